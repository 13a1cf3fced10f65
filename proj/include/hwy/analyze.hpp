#pragma once

#include <string>
#include <vector>

#include "hwy/data.hpp"
#include "hwy/layers.hpp"

namespace hwy {

/// Per body-layer x block gate statistics: the bias, the exact mean gate
/// output over a dataset, and the gate/block outputs for one designated
/// sample.
struct GateReport {
    Matrix bias;            // body_depth x width, row l = b_T of layer l
    Matrix mean_gate;       // exact dataset means
    Matrix sample_gate;     // gate outputs for the designated sample
    Matrix sample_output;   // block outputs y for the same sample
    std::size_t sample_index = 0;
    Activation act = Activation::tanh; // the block activation, noted for the manifest
};

GateReport gate_activity(const Network& net, const Dataset& ds, std::size_t sample_index,
                         std::size_t batch = 512);

/// Per class: class-conditional mean gate output minus the global mean.
struct ClassRoutingReport {
    std::vector<Matrix> deviation;   // class -> body_depth x width
    Matrix global_mean;              // body_depth x width
    std::vector<std::size_t> class_counts;
    std::vector<bool> empty_class;   // flagged, not fatal
};

ClassRoutingReport class_routing(const Network& net, const Dataset& ds, std::size_t batch = 512);

/// Training-set error with each body layer's gates forced shut, one layer at
/// a time, next to the untouched baseline. Evaluation only; parameters are
/// never modified.
struct LesionReport {
    std::vector<double> lesioned_err;  // per body layer
    std::vector<double> lesioned_loss;
    double baseline_err = 0.0;
    double baseline_loss = 0.0;
};

LesionReport lesion_sweep(const Network& net, const Dataset& ds, std::size_t batch = 512);

// CSV emission, one file per report: {run_id}.{gates|routing|lesion}.csv
// plus {run_id}.{...}.json manifests describing the columns.
std::string gate_report_csv(const GateReport& r);
std::string gate_report_manifest(const GateReport& r, const std::string& run_id);
std::string routing_report_csv(const ClassRoutingReport& r);
std::string routing_report_manifest(const ClassRoutingReport& r, const std::string& run_id);
std::string lesion_report_csv(const LesionReport& r);
std::string lesion_report_manifest(const LesionReport& r, const std::string& run_id);

} // namespace hwy
