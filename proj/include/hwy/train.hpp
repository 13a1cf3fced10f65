#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hwy/data.hpp"
#include "hwy/init.hpp"
#include "hwy/layers.hpp"
#include "hwy/optim.hpp"

namespace hwy {

/// Depth counts the leading plain layer plus the body; the linear layer that
/// feeds the softmax is not counted. depth 10 = 1 plain + 9 body layers.
struct TrainConfig {
    int depth = 2;
    std::size_t width = 16;
    LayerKind kind = LayerKind::highway;
    Activation act = Activation::relu;
    std::size_t classes = 0; // 0 = take the dataset's class count

    InitSpec init;
    bool scheme_auto = true; // pick the weight scheme from the activation

    double lr = 0.1;
    double momentum = 0.9;
    LrSchedule schedule;

    std::size_t batch_size = 64;
    int epochs = 50;
    std::uint64_t shuffle_seed = 0;

    DatasetRef data;
    std::string run_id = "run";

    void validate() const;
    Architecture architecture(std::size_t input_dim, std::size_t class_count) const;
    /// Copy with scheme_auto resolved to a concrete weight scheme.
    TrainConfig resolved() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_err = 0.0;
    bool has_val = false;
    double val_loss = 0.0;
    double val_err = 0.0;
};

enum class RunStatus { completed, diverged };

const char* run_status_name(RunStatus s);

struct RunRecord {
    TrainConfig config; // resolved
    std::vector<EpochStats> curve;
    RunStatus status = RunStatus::completed;
    double wall_seconds = 0.0;
    std::string checkpoint_path;

    /// Ranking key: last recorded training loss, +inf for diverged runs.
    double final_train_loss() const;
};

struct TrainOutcome {
    RunRecord record;
    Network net;
};

/// One full run: init, epochs of shuffled minibatch SGD with the decayed
/// learning rate, full-dataset metrics after every epoch. Divergence (NaN
/// loss or gradients) truncates the curve and flags the record instead of
/// throwing.
TrainOutcome train_run(const TrainConfig& cfg, const Dataset& train, const Dataset* val);

/// Full-dataset metrics, batched internally, samples visited in order.
/// Returns {mean nll, error rate}.
EvalOut evaluate(const Network& net, const Dataset& ds, std::size_t batch = 512);

struct HyperSpace {
    double lr_lo = 1e-3, lr_hi = 1.0;          // log-uniform
    double momentum_lo = 0.5, momentum_hi = 0.99;
    double decay_lo = 0.9, decay_hi = 1.0;     // log-uniform
    std::vector<Activation> activations{Activation::relu, Activation::tanh};
    double gate_bias_lo = -10.0, gate_bias_hi = -1.0; // highway only

    void validate() const;
};

struct HyperSample {
    double lr = 0.0;
    double momentum = 0.0;
    double decay = 1.0;
    Activation act = Activation::relu;
    double gate_bias = -1.0; // meaningful for highway bodies only
};

HyperSample sample_hyper(const HyperSpace& space, LayerKind kind, RngState& rng);

/// Trial i draws from substream(master_seed, i): hyperparameters first, then
/// fresh init and shuffle seeds, so the resolved config alone reproduces the
/// trial.
TrainConfig trial_config(const HyperSpace& space, const TrainConfig& base,
                         std::uint64_t master_seed, int trial);

struct SearchResult {
    std::vector<RunRecord> records; // index == trial index
    std::vector<Network> nets;      // parallel to records
    std::size_t best_index = 0;     // lowest final training loss, ties to lower index
    std::size_t top_k = 0;
    std::vector<double> top_k_mean_loss; // per-epoch mean over the k best runs
};

using TrialCallback = std::function<void(int trial, const RunRecord&)>;

SearchResult random_search(const HyperSpace& space, int n_runs, const TrainConfig& base,
                           const Dataset& train, const Dataset* val, std::uint64_t master_seed,
                           int parallel = 1, std::size_t top_k = 10,
                           const TrialCallback& on_trial = nullptr);

/// Curve CSV: header epoch,train_loss,train_err,val_loss,val_err (val fields
/// empty when no validation set was used).
std::string curve_csv(const RunRecord& record);

} // namespace hwy
