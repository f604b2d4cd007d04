#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sia/adapter_bank.hpp"
#include "sia/classifier.hpp"
#include "sia/dataset.hpp"
#include "sia/geometry.hpp"

namespace sia {

struct PredictionRecord {
    std::size_t predicted = 0;
    std::size_t label = 0;
    BoundingBox box;
};

struct ClassAccuracy {
    std::size_t count = 0;
    std::size_t correct = 0;
    std::optional<double> accuracy; // empty classes report no accuracy, not 0
};

struct BinAccuracy {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    std::size_t correct = 0;
    std::optional<double> accuracy;
};

struct Ap50Result {
    std::vector<std::optional<double>> per_class; // empty where a class has no ground truth
    std::optional<double> mean;                   // over classes with ground truth
};

struct EvalReport {
    std::size_t total = 0;
    double overall_accuracy = 0.0;
    std::optional<double> base_accuracy;
    std::optional<double> novel_accuracy;
    std::vector<ClassAccuracy> per_class;
    std::vector<BinAccuracy> per_bin;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted]
    std::optional<Ap50Result> ap50;
};

/// Aggregates argmax predictions into overall / split / per-class / per-bin
/// accuracies and a confusion matrix. Per-bin accuracies weighted by bin
/// counts recompose the overall accuracy.
EvalReport accuracy_report(const std::vector<PredictionRecord>& predictions,
                           std::size_t num_classes, const std::vector<Split>& class_splits,
                           const BinPartition& partition);

struct ImageDetection {
    std::int64_t image_id = 0;
    ScoredDetection detection;
};

struct GroundTruth {
    std::int64_t image_id = 0;
    BoundingBox box;
    std::size_t label = 0;
};

/// Average precision at IoU 0.5, all-point interpolation. Detections are
/// processed per class in descending score_box order (ties keep input
/// order); each one greedily claims the unclaimed same-image ground truth
/// with the highest IoU at or above 0.5. The mean skips classes without
/// ground truth.
Ap50Result ap50(const std::vector<ImageDetection>& detections,
                const std::vector<GroundTruth>& ground_truth, std::size_t num_classes);

/// Scores every sample and builds the accuracy report. A null bank evaluates
/// the raw features (the un-adapted baseline). with_ap50 adds ground-truth-
/// box average precision, each sample acting as a unit-confidence detection.
EvalReport evaluate_dataset(const Dataset& ds, const AdapterBank* bank,
                            const TextEmbeddingBank& texts, const ClassifierConfig& cfg,
                            const BinPartition& report_bins, bool with_ap50);

/// One CSV row per sample: id, label, adapted feature. Values print with 17
/// significant digits so a reader recovers them bit-exactly.
void export_adapted_features(const std::vector<RegionSample>& samples,
                             const AdapterBank& bank, const std::string& path);

} // namespace sia
