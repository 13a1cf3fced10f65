#include "hwy/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "hwy/io_util.hpp"

namespace hwy {

void TrainConfig::validate() const {
    if (depth < 2) throw ConfigError("depth must be >= 2, got " + std::to_string(depth));
    if (width < 1) throw ConfigError("width must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    schedule.validate();
}

Architecture TrainConfig::architecture(std::size_t input_dim, std::size_t class_count) const {
    Architecture a;
    a.input_dim = input_dim;
    a.width = width;
    a.classes = classes ? classes : class_count;
    a.body_layers = static_cast<std::size_t>(depth - 1);
    a.kind = kind;
    a.act = act;
    return a;
}

TrainConfig TrainConfig::resolved() const {
    TrainConfig c = *this;
    if (c.scheme_auto) {
        c.init.scheme = default_scheme_for(c.act);
        c.scheme_auto = false;
    }
    return c;
}

const char* run_status_name(RunStatus s) {
    return s == RunStatus::completed ? "completed" : "diverged";
}

double RunRecord::final_train_loss() const {
    if (status != RunStatus::completed || curve.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    return curve.back().train_loss;
}

EvalOut evaluate(const Network& net, const Dataset& ds, std::size_t batch) {
    if (ds.dim() != net.input_dim()) {
        throw ShapeError("evaluate: dataset dim " + std::to_string(ds.dim()) +
                         " does not match network input " + std::to_string(net.input_dim()));
    }
    if (batch == 0) throw UsageError("evaluate: batch must be positive");
    const std::size_t n = ds.size();
    double nll_sum = 0.0;
    std::size_t correct = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t end = std::min(n, start + batch);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        Batch b = gather(ds, idx);
        auto fwd = network_forward(net, b.x, b.labels);
        for (double v : fwd.sample_nll) nll_sum += v;
        correct += correct_count(fwd.trace.probs, b.labels);
    }
    EvalOut out;
    out.loss = nll_sum / static_cast<double>(n);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

TrainOutcome train_run(const TrainConfig& cfg_in, const Dataset& train, const Dataset* val) {
    const TrainConfig cfg = cfg_in.resolved();
    cfg.validate();
    if (train.size() == 0) throw UsageError("train_run: empty training set");

    const auto t0 = std::chrono::steady_clock::now();
    const Architecture arch =
        cfg.architecture(train.dim(), static_cast<std::size_t>(train.class_count));
    Network net = init_network(arch, cfg.init);
    SgdMomentum opt(net, cfg.lr, cfg.momentum);

    TrainOutcome out;
    out.record.config = cfg;
    out.record.status = RunStatus::completed;

    const BatchPlan plan{cfg.batch_size, cfg.shuffle_seed};
    bool diverged = false;
    for (int epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
        const double lr_e = cfg.schedule.at(cfg.lr, epoch);
        for (const auto& indices : batch_indices(train.size(), plan, epoch)) {
            Batch b = gather(train, indices);
            try {
                auto fwd = network_forward(net, b.x, b.labels);
                if (!std::isfinite(fwd.loss)) {
                    diverged = true;
                    break;
                }
                NetworkGrads grads = network_backward(net, fwd.trace, b.labels);
                opt.step(net, grads, lr_e);
            } catch (const NumericError&) {
                diverged = true;
                break;
            }
        }
        if (diverged) break;

        EpochStats stats;
        try {
            const EvalOut tr = evaluate(net, train);
            stats.train_loss = tr.loss;
            stats.train_err = 1.0 - tr.accuracy;
            if (val) {
                const EvalOut v = evaluate(net, *val);
                stats.has_val = true;
                stats.val_loss = v.loss;
                stats.val_err = 1.0 - v.accuracy;
            }
        } catch (const NumericError&) {
            diverged = true;
            break;
        }
        if (!std::isfinite(stats.train_loss)) {
            diverged = true;
            break;
        }
        out.record.curve.push_back(stats);
    }

    out.record.status = diverged ? RunStatus::diverged : RunStatus::completed;
    out.record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.net = std::move(net);
    return out;
}

void HyperSpace::validate() const {
    auto ordered = [](double lo, double hi) { return lo < hi || lo == hi; };
    if (!ordered(lr_lo, lr_hi) || lr_lo <= 0.0) throw ConfigError("hyper space: bad lr range");
    if (!ordered(momentum_lo, momentum_hi) || momentum_lo < 0.0 || momentum_hi >= 1.0)
        throw ConfigError("hyper space: bad momentum range");
    if (!ordered(decay_lo, decay_hi) || decay_lo <= 0.0 || decay_hi > 1.0)
        throw ConfigError("hyper space: bad decay range");
    if (activations.empty()) throw ConfigError("hyper space: no activations to sample");
    if (gate_bias_lo > gate_bias_hi || gate_bias_hi >= 0.0)
        throw ConfigError("hyper space: gate bias range must be negative and ordered");
}

namespace {

double log_uniform(RngState& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::exp(rng.next_uniform(std::log(lo), std::log(hi)));
}

double plain_uniform(RngState& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return rng.next_uniform(lo, hi);
}

} // namespace

HyperSample sample_hyper(const HyperSpace& space, LayerKind kind, RngState& rng) {
    HyperSample s;
    s.lr = log_uniform(rng, space.lr_lo, space.lr_hi);
    s.momentum = plain_uniform(rng, space.momentum_lo, space.momentum_hi);
    s.decay = log_uniform(rng, space.decay_lo, space.decay_hi);
    s.act = space.activations[rng.next_below(space.activations.size())];
    if (kind == LayerKind::highway) {
        s.gate_bias = plain_uniform(rng, space.gate_bias_lo, space.gate_bias_hi);
    }
    return s;
}

TrainConfig trial_config(const HyperSpace& space, const TrainConfig& base,
                         std::uint64_t master_seed, int trial) {
    RngState rng = RngState::substream(master_seed, static_cast<std::uint64_t>(trial));
    const HyperSample s = sample_hyper(space, base.kind, rng);
    TrainConfig cfg = base;
    cfg.lr = s.lr;
    cfg.momentum = s.momentum;
    cfg.schedule.kind = LrSchedule::Kind::exponential;
    cfg.schedule.factor = s.decay;
    cfg.act = s.act;
    cfg.scheme_auto = true; // scheme follows the sampled activation
    if (base.kind == LayerKind::highway) cfg.init.gate_bias = s.gate_bias;
    cfg.init.seed = rng.next_u64();
    cfg.shuffle_seed = rng.next_u64();
    cfg.run_id = base.run_id + "-t" + std::to_string(trial);
    return cfg.resolved();
}

SearchResult random_search(const HyperSpace& space, int n_runs, const TrainConfig& base,
                           const Dataset& train, const Dataset* val, std::uint64_t master_seed,
                           int parallel, std::size_t top_k, const TrialCallback& on_trial) {
    if (n_runs < 1) throw UsageError("random_search: n_runs must be >= 1");
    space.validate();
    base.validate();
    if (parallel < 1) parallel = 1;

    SearchResult result;
    result.records.resize(static_cast<std::size_t>(n_runs));
    result.nets.resize(static_cast<std::size_t>(n_runs));

    std::mutex mu;
    std::size_t next_trial = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t trial;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next_trial >= static_cast<std::size_t>(n_runs)) return;
                trial = next_trial++;
            }
            const TrainConfig cfg =
                trial_config(space, base, master_seed, static_cast<int>(trial));
            TrainOutcome outcome = train_run(cfg, train, val);
            {
                std::lock_guard<std::mutex> lock(mu);
                result.records[trial] = std::move(outcome.record);
                result.nets[trial] = std::move(outcome.net);
                if (on_trial) on_trial(static_cast<int>(trial), result.records[trial]);
            }
        }
    };

    if (parallel == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < parallel; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    // Rank by final training loss, ties broken by trial index.
    std::vector<std::size_t> order(result.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.records[a].final_train_loss() < result.records[b].final_train_loss();
    });
    result.best_index = order.front();

    result.top_k = std::min(top_k, order.size());
    std::size_t curve_len = std::numeric_limits<std::size_t>::max();
    for (std::size_t r = 0; r < result.top_k; ++r) {
        curve_len = std::min(curve_len, result.records[order[r]].curve.size());
    }
    if (result.top_k > 0 && curve_len != std::numeric_limits<std::size_t>::max()) {
        result.top_k_mean_loss.assign(curve_len, 0.0);
        for (std::size_t r = 0; r < result.top_k; ++r) {
            const auto& curve = result.records[order[r]].curve;
            for (std::size_t e = 0; e < curve_len; ++e)
                result.top_k_mean_loss[e] += curve[e].train_loss;
        }
        for (auto& v : result.top_k_mean_loss) v /= static_cast<double>(result.top_k);
    }
    return result;
}

std::string curve_csv(const RunRecord& record) {
    std::string out = "epoch,train_loss,train_err,val_loss,val_err\n";
    for (std::size_t e = 0; e < record.curve.size(); ++e) {
        const EpochStats& s = record.curve[e];
        out += std::to_string(e);
        out += ',';
        out += fmt_double(s.train_loss);
        out += ',';
        out += fmt_double(s.train_err);
        out += ',';
        if (s.has_val) out += fmt_double(s.val_loss);
        out += ',';
        if (s.has_val) out += fmt_double(s.val_err);
        out += '\n';
    }
    return out;
}

} // namespace hwy
