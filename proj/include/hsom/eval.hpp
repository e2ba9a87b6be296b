#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/tree.hpp"

namespace hsom {

/// Binary confusion counts with class 1 (malicious) as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

inline ConfusionMatrix confusion(std::span<const std::uint8_t> predictions,
                                 std::span<const std::uint8_t> truth) {
    if (predictions.size() != truth.size())
        throw InvalidInput("confusion: prediction and truth lengths differ");
    if (predictions.empty()) throw InvalidInput("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (truth[i]) {
            predictions[i] ? ++cm.tp : ++cm.fn;
        } else {
            predictions[i] ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

/// Per-class quality metrics plus the two timing figures: training
/// wall-clock in seconds and mean per-sample prediction latency in
/// milliseconds. A 0/0 ratio reports 0 and raises `degenerate` instead of
/// aborting a sweep.
struct EvalReport {
    double precision_0 = 0, precision_1 = 0;
    double recall_0 = 0, recall_1 = 0;
    double f1_0 = 0, f1_1 = 0;
    double accuracy = 0;
    double fpr = 0, fnr = 0;
    double tt_s = 0;
    double pt_ms = 0;
    bool degenerate = false;
};

namespace detail {

inline double ratio(std::size_t num, std::size_t den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double harmonic_f1(double precision, double recall) {
    if (precision == 0.0 && recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

inline EvalReport report(const ConfusionMatrix& cm, double tt_s, double pt_ms) {
    EvalReport r;
    r.precision_1 = detail::ratio(cm.tp, cm.tp + cm.fp, r.degenerate);
    r.recall_1 = detail::ratio(cm.tp, cm.tp + cm.fn, r.degenerate);
    r.precision_0 = detail::ratio(cm.tn, cm.tn + cm.fn, r.degenerate);
    r.recall_0 = detail::ratio(cm.tn, cm.tn + cm.fp, r.degenerate);
    r.f1_0 = detail::harmonic_f1(r.precision_0, r.recall_0);
    r.f1_1 = detail::harmonic_f1(r.precision_1, r.recall_1);
    r.accuracy = detail::ratio(cm.tp + cm.tn, cm.total(), r.degenerate);
    r.fpr = detail::ratio(cm.fp, cm.fp + cm.tn, r.degenerate);
    r.fnr = detail::ratio(cm.fn, cm.fn + cm.tp, r.degenerate);
    r.tt_s = tt_s;
    r.pt_ms = pt_ms;
    return r;
}

/// Monotonic wall-clock around the training call only.
template <class Trainer>
auto time_training(Trainer&& trainer)
    -> std::pair<decltype(trainer()), double> {
    const auto started = std::chrono::steady_clock::now();
    auto model = trainer();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), elapsed};
}

/// Predict the whole test set and report the mean per-sample latency in
/// milliseconds.
inline std::pair<std::vector<std::uint8_t>, double> time_prediction(const HsomModel& model,
                                                                    const LabeledDataset& test) {
    if (test.size() == 0) throw InvalidInput("time_prediction: test set is empty");
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::uint8_t> predictions = predict_all(model, test.features);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(predictions), elapsed * 1000.0 / static_cast<double>(test.size())};
}

struct RunAggregate {
    std::size_t runs = 0;
    EvalReport mean;
    std::vector<EvalReport> reports;
};

/// Arithmetic per-field mean over repeated runs; the individual reports
/// are kept alongside.
inline RunAggregate aggregate(std::span<const EvalReport> reports) {
    if (reports.empty()) throw InvalidInput("aggregate: need at least one report");
    RunAggregate agg;
    agg.runs = reports.size();
    agg.reports.assign(reports.begin(), reports.end());
    const double inv = 1.0 / static_cast<double>(reports.size());
    for (const EvalReport& r : reports) {
        agg.mean.precision_0 += r.precision_0 * inv;
        agg.mean.precision_1 += r.precision_1 * inv;
        agg.mean.recall_0 += r.recall_0 * inv;
        agg.mean.recall_1 += r.recall_1 * inv;
        agg.mean.f1_0 += r.f1_0 * inv;
        agg.mean.f1_1 += r.f1_1 * inv;
        agg.mean.accuracy += r.accuracy * inv;
        agg.mean.fpr += r.fpr * inv;
        agg.mean.fnr += r.fnr * inv;
        agg.mean.tt_s += r.tt_s * inv;
        agg.mean.pt_ms += r.pt_ms * inv;
        agg.mean.degenerate = agg.mean.degenerate || r.degenerate;
    }
    return agg;
}

inline double speedup(double tt_sequential_s, double tt_parallel_s) {
    if (!(tt_sequential_s > 0.0) || !(tt_parallel_s > 0.0))
        throw InvalidInput("speedup: training times must be positive");
    return tt_sequential_s / tt_parallel_s;
}

/// JSON layout mirroring the result tables: per-class precision/recall/F1
/// blocks, then accuracy, FPR, FNR, TT, PT.
inline nlohmann::json report_to_json(const EvalReport& r) {
    return {{"precision", {{"0", r.precision_0}, {"1", r.precision_1}}},
            {"recall", {{"0", r.recall_0}, {"1", r.recall_1}}},
            {"f1", {{"0", r.f1_0}, {"1", r.f1_1}}},
            {"accuracy", r.accuracy},
            {"fpr", r.fpr},
            {"fnr", r.fnr},
            {"tt_s", r.tt_s},
            {"pt_ms", r.pt_ms},
            {"degenerate", r.degenerate}};
}

inline nlohmann::json aggregate_to_json(const RunAggregate& agg) {
    nlohmann::json runs = nlohmann::json::array();
    for (const EvalReport& r : agg.reports) runs.push_back(report_to_json(r));
    return {{"runs", agg.runs}, {"mean", report_to_json(agg.mean)}, {"per_run", std::move(runs)}};
}

inline constexpr const char* kReportCsvHeader =
    "precision_0,precision_1,recall_0,recall_1,f1_0,f1_1,accuracy,fpr,fnr,tt_s,pt_ms";

inline std::string report_to_csv_row(const EvalReport& r) {
    const auto fmt = [](double v) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    return fmt(r.precision_0) + ',' + fmt(r.precision_1) + ',' + fmt(r.recall_0) + ',' +
           fmt(r.recall_1) + ',' + fmt(r.f1_0) + ',' + fmt(r.f1_1) + ',' + fmt(r.accuracy) + ',' +
           fmt(r.fpr) + ',' + fmt(r.fnr) + ',' + fmt(r.tt_s) + ',' + fmt(r.pt_ms);
}

}  // namespace hsom
