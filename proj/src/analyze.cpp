#include "hwy/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hwy/io_util.hpp"

namespace hwy {

namespace {

using ordered_json = nlohmann::ordered_json;

void require_highway(const Network& net, const char* what) {
    if (net.body_kind != LayerKind::highway || net.highway_body.empty()) {
        throw UsageError(std::string(what) + " requires a non-empty highway body");
    }
}

std::vector<std::size_t> contiguous(std::size_t start, std::size_t end) {
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    return idx;
}

std::string matrix_rows_csv(const Matrix& m, const std::string& tag) {
    std::string out;
    for (std::size_t l = 0; l < m.rows; ++l) {
        if (!tag.empty()) {
            out += tag;
            out += ',';
        }
        out += std::to_string(l);
        for (std::size_t j = 0; j < m.cols; ++j) {
            out += ',';
            out += fmt_double(m(l, j));
        }
        out += '\n';
    }
    return out;
}

std::string block_header(std::size_t width, const std::string& leading) {
    std::string h = leading;
    for (std::size_t j = 0; j < width; ++j) h += ",block_" + std::to_string(j);
    h += '\n';
    return h;
}

} // namespace

GateReport gate_activity(const Network& net, const Dataset& ds, std::size_t sample_index,
                         std::size_t batch) {
    require_highway(net, "gate_activity");
    if (sample_index >= ds.size()) {
        throw UsageError("gate_activity: sample index " + std::to_string(sample_index) +
                         " out of range [0, " + std::to_string(ds.size()) + ")");
    }
    const std::size_t depth = net.highway_body.size();
    const std::size_t width = net.width();

    GateReport report;
    report.sample_index = sample_index;
    report.act = net.body_act();
    report.bias = Matrix(depth, width);
    for (std::size_t l = 0; l < depth; ++l) {
        std::copy_n(net.highway_body[l].b_t.data.data(), width, report.bias.row_ptr(l));
    }

    // Exact means: accumulate row by row in global sample order, so the
    // result is independent of how the dataset is partitioned into batches.
    Matrix sums(depth, width);
    const std::size_t n = ds.size();
    for (std::size_t start = 0; start < n; start += batch) {
        Batch b = gather(ds, contiguous(start, std::min(n, start + batch)));
        const ForwardTrace trace = network_trace(net, b.x);
        for (std::size_t l = 0; l < depth; ++l) {
            const Matrix& t = trace.highway_body[l].t;
            double* acc = sums.row_ptr(l);
            for (std::size_t i = 0; i < t.rows; ++i) {
                const double* ti = t.row_ptr(i);
                for (std::size_t j = 0; j < width; ++j) acc[j] += ti[j];
            }
        }
    }
    report.mean_gate = Matrix(depth, width);
    for (std::size_t i = 0; i < sums.data.size(); ++i)
        report.mean_gate.data[i] = sums.data[i] / static_cast<double>(n);

    Batch one = gather(ds, {sample_index});
    const ForwardTrace trace = network_trace(net, one.x);
    report.sample_gate = Matrix(depth, width);
    report.sample_output = Matrix(depth, width);
    for (std::size_t l = 0; l < depth; ++l) {
        std::copy_n(trace.highway_body[l].t.row_ptr(0), width, report.sample_gate.row_ptr(l));
        std::copy_n(trace.highway_body[l].y.row_ptr(0), width, report.sample_output.row_ptr(l));
    }
    return report;
}

ClassRoutingReport class_routing(const Network& net, const Dataset& ds, std::size_t batch) {
    require_highway(net, "class_routing");
    const std::size_t depth = net.highway_body.size();
    const std::size_t width = net.width();
    const std::size_t k = static_cast<std::size_t>(ds.class_count);
    const std::size_t n = ds.size();

    std::vector<Matrix> class_sums(k, Matrix(depth, width));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t start = 0; start < n; start += batch) {
        Batch b = gather(ds, contiguous(start, std::min(n, start + batch)));
        const ForwardTrace trace = network_trace(net, b.x);
        for (std::size_t i = 0; i < b.labels.size(); ++i) {
            const auto c = static_cast<std::size_t>(b.labels[i]);
            counts[c] += 1;
            Matrix& acc = class_sums[c];
            for (std::size_t l = 0; l < depth; ++l) {
                const double* ti = trace.highway_body[l].t.row_ptr(i);
                double* al = acc.row_ptr(l);
                for (std::size_t j = 0; j < width; ++j) al[j] += ti[j];
            }
        }
    }

    ClassRoutingReport report;
    report.class_counts = counts;
    report.empty_class.assign(k, false);
    report.global_mean = Matrix(depth, width);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < report.global_mean.data.size(); ++i)
            report.global_mean.data[i] += class_sums[c].data[i];
    }
    for (auto& v : report.global_mean.data) v /= static_cast<double>(n);

    report.deviation.assign(k, Matrix(depth, width));
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            report.empty_class[c] = true; // deviation left at zero
            continue;
        }
        for (std::size_t i = 0; i < report.deviation[c].data.size(); ++i) {
            report.deviation[c].data[i] =
                class_sums[c].data[i] / static_cast<double>(counts[c]) -
                report.global_mean.data[i];
        }
    }
    return report;
}

namespace {

EvalOut lesioned_evaluate(const Network& net, const Dataset& ds, std::size_t lesion,
                          std::size_t batch) {
    const std::size_t n = ds.size();
    double nll_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += batch) {
        Batch b = gather(ds, contiguous(start, std::min(n, start + batch)));
        const ForwardTrace trace = network_trace(net, b.x, lesion);
        const auto sm = softmax_xent(trace.output.y, b.labels);
        for (double v : sm.sample_nll) nll_sum += v;
        correct += correct_count(sm.probs, b.labels);
    }
    EvalOut out;
    out.loss = nll_sum / static_cast<double>(n);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

} // namespace

LesionReport lesion_sweep(const Network& net, const Dataset& ds, std::size_t batch) {
    require_highway(net, "lesion_sweep");
    LesionReport report;
    const std::size_t n = ds.size();
    double nll_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += batch) {
        Batch b = gather(ds, contiguous(start, std::min(n, start + batch)));
        auto fwd = network_forward(net, b.x, b.labels);
        for (double v : fwd.sample_nll) nll_sum += v;
        correct += correct_count(fwd.trace.probs, b.labels);
    }
    report.baseline_loss = nll_sum / static_cast<double>(n);
    report.baseline_err = 1.0 - static_cast<double>(correct) / static_cast<double>(n);

    for (std::size_t l = 0; l < net.highway_body.size(); ++l) {
        const EvalOut e = lesioned_evaluate(net, ds, l, batch);
        report.lesioned_loss.push_back(e.loss);
        report.lesioned_err.push_back(1.0 - e.accuracy);
    }
    return report;
}

std::string gate_report_csv(const GateReport& r) {
    std::string out = block_header(r.bias.cols, "section,layer");
    out += matrix_rows_csv(r.bias, "bias");
    out += matrix_rows_csv(r.mean_gate, "mean_gate");
    out += matrix_rows_csv(r.sample_gate, "sample_gate");
    out += matrix_rows_csv(r.sample_output, "sample_output");
    return out;
}

std::string gate_report_manifest(const GateReport& r, const std::string& run_id) {
    ordered_json j;
    j["run_id"] = run_id;
    j["report"] = "gates";
    j["body_depth"] = r.bias.rows;
    j["width"] = r.bias.cols;
    j["sample_index"] = r.sample_index;
    j["activation"] = activation_name(r.act);
    j["sections"] = {"bias", "mean_gate", "sample_gate", "sample_output"};
    return j.dump(2) + "\n";
}

std::string routing_report_csv(const ClassRoutingReport& r) {
    std::string out = block_header(r.global_mean.cols, "class,layer");
    out += matrix_rows_csv(r.global_mean, "global");
    for (std::size_t c = 0; c < r.deviation.size(); ++c) {
        out += matrix_rows_csv(r.deviation[c], std::to_string(c));
    }
    return out;
}

std::string routing_report_manifest(const ClassRoutingReport& r, const std::string& run_id) {
    ordered_json j;
    j["run_id"] = run_id;
    j["report"] = "routing";
    j["body_depth"] = r.global_mean.rows;
    j["width"] = r.global_mean.cols;
    j["class_counts"] = r.class_counts;
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < r.empty_class.size(); ++c)
        if (r.empty_class[c]) empty.push_back(c);
    j["empty_classes"] = empty;
    j["rows"] = "global mean first, then per-class deviation from it";
    return j.dump(2) + "\n";
}

std::string lesion_report_csv(const LesionReport& r) {
    std::string out = "layer,lesioned_err,lesioned_loss\n";
    out += "baseline," + fmt_double(r.baseline_err) + ',' + fmt_double(r.baseline_loss) + '\n';
    for (std::size_t l = 0; l < r.lesioned_err.size(); ++l) {
        out += std::to_string(l) + ',' + fmt_double(r.lesioned_err[l]) + ',' +
               fmt_double(r.lesioned_loss[l]) + '\n';
    }
    return out;
}

std::string lesion_report_manifest(const LesionReport& r, const std::string& run_id) {
    ordered_json j;
    j["run_id"] = run_id;
    j["report"] = "lesion";
    j["body_depth"] = r.lesioned_err.size();
    j["baseline_err"] = r.baseline_err;
    j["baseline_loss"] = r.baseline_loss;
    return j.dump(2) + "\n";
}

} // namespace hwy
