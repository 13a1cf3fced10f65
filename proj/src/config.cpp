#include "hwy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hwy {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ConfigError("missing required key \"" + std::string(key) + "\" in " + where);
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

LrSchedule parse_schedule(const json& j) {
    reject_unknown(j, "optim.schedule", {"kind", "factor", "gamma", "milestones"});
    LrSchedule s;
    const auto kind = require<std::string>(j, "kind", "optim.schedule");
    if (kind == "exponential") {
        s.kind = LrSchedule::Kind::exponential;
        s.factor = get_or<double>(j, "factor", 1.0);
        if (j.contains("gamma") || j.contains("milestones")) {
            throw ConfigError("exponential schedule takes only \"factor\"");
        }
    } else if (kind == "step") {
        s.kind = LrSchedule::Kind::step;
        s.gamma = get_or<double>(j, "gamma", 1.0);
        s.milestones = get_or<std::vector<int>>(j, "milestones", {});
        if (j.contains("factor")) {
            throw ConfigError("step schedule takes \"gamma\" and \"milestones\", not \"factor\"");
        }
    } else {
        throw ConfigError("schedule kind must be \"exponential\" or \"step\", got \"" + kind +
                          "\"");
    }
    s.validate();
    return s;
}

DatasetRef parse_data(const json& j) {
    reject_unknown(j, "data",
                   {"kind", "dir", "images", "labels", "subsample", "subsample_seed",
                    "downsample", "val_split", "bits", "samples", "seed"});
    DatasetRef ref;
    ref.kind = get_or<std::string>(j, "kind", "idx");
    ref.dir = get_or<std::string>(j, "dir", "");
    ref.images = get_or<std::string>(j, "images", "");
    ref.labels = get_or<std::string>(j, "labels", "");
    ref.subsample_n = get_or<std::size_t>(j, "subsample", 0);
    ref.subsample_seed = get_or<std::uint64_t>(j, "subsample_seed", 0);
    ref.downsample_factor = get_or<int>(j, "downsample", 1);
    ref.val_split = get_or<std::size_t>(j, "val_split", 0);
    ref.parity_bits = get_or<int>(j, "bits", 4);
    ref.parity_samples = get_or<std::size_t>(j, "samples", 0);
    ref.parity_seed = get_or<std::uint64_t>(j, "seed", 0);
    ref.validate();
    return ref;
}

HyperSpace parse_search(const json& j) {
    reject_unknown(j, "search", {"lr", "momentum", "decay", "activations", "gate_bias"});
    HyperSpace space;
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto v = require<std::vector<double>>(j, key, "search");
        if (v.size() != 2) throw ConfigError(std::string("search.") + key + " must be [lo, hi]");
        lo = v[0];
        hi = v[1];
    };
    range("lr", space.lr_lo, space.lr_hi);
    range("momentum", space.momentum_lo, space.momentum_hi);
    range("decay", space.decay_lo, space.decay_hi);
    range("gate_bias", space.gate_bias_lo, space.gate_bias_hi);
    if (j.contains("activations")) {
        space.activations.clear();
        for (const auto& name : require<std::vector<std::string>>(j, "activations", "search")) {
            space.activations.push_back(activation_from_name(name));
        }
    }
    space.validate();
    return space;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(j, "config root",
                   {"run_id", "arch", "init", "optim", "batch_size", "epochs", "shuffle_seed",
                    "data", "search"});

    RunConfig rc;
    TrainConfig& cfg = rc.train;
    cfg.run_id = get_or<std::string>(j, "run_id", "run");

    if (!j.contains("arch")) throw ConfigError("missing \"arch\" section");
    {
        const json& a = j.at("arch");
        reject_unknown(a, "arch", {"depth", "width", "kind", "activation", "classes"});
        cfg.depth = require<int>(a, "depth", "arch");
        cfg.width = require<std::size_t>(a, "width", "arch");
        cfg.kind = layer_kind_from_name(require<std::string>(a, "kind", "arch"));
        cfg.act = activation_from_name(get_or<std::string>(a, "activation", "relu"));
        cfg.classes = get_or<std::size_t>(a, "classes", 0);
    }

    if (!j.contains("init")) throw ConfigError("missing \"init\" section");
    {
        const json& i = j.at("init");
        reject_unknown(i, "init", {"scheme", "gate_bias", "seed"});
        const auto scheme = get_or<std::string>(i, "scheme", "auto");
        if (scheme == "auto") {
            cfg.scheme_auto = true;
        } else {
            cfg.scheme_auto = false;
            cfg.init.scheme = weight_scheme_from_name(scheme);
        }
        cfg.init.gate_bias = get_or<double>(i, "gate_bias", -1.0);
        cfg.init.seed = require<std::uint64_t>(i, "seed", "init");
    }

    if (!j.contains("optim")) throw ConfigError("missing \"optim\" section");
    {
        const json& o = j.at("optim");
        reject_unknown(o, "optim", {"lr", "momentum", "schedule"});
        cfg.lr = require<double>(o, "lr", "optim");
        cfg.momentum = get_or<double>(o, "momentum", 0.0);
        if (o.contains("schedule")) cfg.schedule = parse_schedule(o.at("schedule"));
    }

    cfg.batch_size = get_or<std::size_t>(j, "batch_size", 64);
    cfg.epochs = get_or<int>(j, "epochs", 50);
    if (!j.contains("shuffle_seed")) throw ConfigError("missing \"shuffle_seed\"");
    cfg.shuffle_seed = require<std::uint64_t>(j, "shuffle_seed", "config root");

    if (!j.contains("data")) throw ConfigError("missing \"data\" section");
    cfg.data = parse_data(j.at("data"));

    if (j.contains("search")) {
        rc.search = parse_search(j.at("search"));
        rc.has_search = true;
    }

    cfg.validate();
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string train_config_json(const TrainConfig& cfg_in) {
    const TrainConfig cfg = cfg_in.resolved();
    ordered_json j;
    j["run_id"] = cfg.run_id;
    j["arch"] = {{"depth", cfg.depth},
                 {"width", cfg.width},
                 {"kind", layer_kind_name(cfg.kind)},
                 {"activation", activation_name(cfg.act)},
                 {"classes", cfg.classes}};
    j["init"] = {{"scheme", weight_scheme_name(cfg.init.scheme)},
                 {"gate_bias", cfg.init.gate_bias},
                 {"seed", cfg.init.seed}};
    ordered_json sched;
    if (cfg.schedule.kind == LrSchedule::Kind::exponential) {
        sched = {{"kind", "exponential"}, {"factor", cfg.schedule.factor}};
    } else {
        sched = {{"kind", "step"},
                 {"gamma", cfg.schedule.gamma},
                 {"milestones", cfg.schedule.milestones}};
    }
    j["optim"] = {{"lr", cfg.lr}, {"momentum", cfg.momentum}, {"schedule", sched}};
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["shuffle_seed"] = cfg.shuffle_seed;
    ordered_json d;
    d["kind"] = cfg.data.kind;
    if (cfg.data.kind == "idx") {
        if (!cfg.data.dir.empty()) d["dir"] = cfg.data.dir;
        if (!cfg.data.images.empty()) {
            d["images"] = cfg.data.images;
            d["labels"] = cfg.data.labels;
        }
        if (cfg.data.subsample_n) {
            d["subsample"] = cfg.data.subsample_n;
            d["subsample_seed"] = cfg.data.subsample_seed;
        }
        if (cfg.data.downsample_factor > 1) d["downsample"] = cfg.data.downsample_factor;
    } else {
        d["bits"] = cfg.data.parity_bits;
        d["samples"] = cfg.data.parity_samples;
        d["seed"] = cfg.data.parity_seed;
    }
    if (cfg.data.val_split) d["val_split"] = cfg.data.val_split;
    j["data"] = d;
    return j.dump(2) + "\n";
}

std::string run_record_json(const RunRecord& record, const std::string& curve_path) {
    ordered_json j;
    j["config"] = ordered_json::parse(train_config_json(record.config));
    j["status"] = run_status_name(record.status);
    j["epochs_completed"] = record.curve.size();
    if (!record.curve.empty()) {
        j["final_train_loss"] = record.curve.back().train_loss;
        j["final_train_err"] = record.curve.back().train_err;
        if (record.curve.back().has_val) {
            j["final_val_loss"] = record.curve.back().val_loss;
            j["final_val_err"] = record.curve.back().val_err;
        }
    }
    j["wall_seconds"] = record.wall_seconds;
    if (!record.checkpoint_path.empty()) j["checkpoint"] = record.checkpoint_path;
    if (!curve_path.empty()) j["curve"] = curve_path;
    return j.dump(2) + "\n";
}

} // namespace hwy
