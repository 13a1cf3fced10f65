#pragma once

#include <string>

#include "hwy/train.hpp"

namespace hwy {

/// Parsed run configuration file. Unknown keys anywhere in the document are
/// rejected; seeds must be explicit.
struct RunConfig {
    TrainConfig train;
    HyperSpace search;
    bool has_search = false;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON for a resolved TrainConfig; parsing it back yields the
/// same configuration.
std::string train_config_json(const TrainConfig& cfg);

/// Run record as JSON: the resolved config plus status, metrics and
/// artifact paths.
std::string run_record_json(const RunRecord& record, const std::string& curve_path);

} // namespace hwy
