#include "sia/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

#include "sia/containers.hpp"

namespace sia {

EvalReport accuracy_report(const std::vector<PredictionRecord>& predictions,
                           std::size_t num_classes, const std::vector<Split>& class_splits,
                           const BinPartition& partition) {
    if (num_classes == 0) throw ValidationError("no classes to report on");
    if (class_splits.size() != num_classes)
        throw ValidationError("split tags do not match the class count");
    if (predictions.empty()) throw ValidationError("no predictions to report on");

    EvalReport rep;
    rep.total = predictions.size();
    rep.per_class.assign(num_classes, {});
    rep.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    const std::size_t nbins = partition.bins();
    rep.per_bin.assign(nbins, {});
    for (std::size_t b = 0; b < nbins; ++b) {
        rep.per_bin[b].lower = partition.boundaries()[b];
        rep.per_bin[b].upper = partition.boundaries()[b + 1];
    }

    std::size_t correct = 0;
    std::size_t base_n = 0, base_c = 0, novel_n = 0, novel_c = 0;
    for (const PredictionRecord& p : predictions) {
        if (p.label >= num_classes || p.predicted >= num_classes)
            throw ValidationError("prediction indices out of range");
        const bool hit = p.predicted == p.label;
        correct += hit;
        rep.confusion[p.label][p.predicted] += 1;
        rep.per_class[p.label].count += 1;
        rep.per_class[p.label].correct += hit;
        if (class_splits[p.label] == Split::base) {
            base_n += 1;
            base_c += hit;
        } else {
            novel_n += 1;
            novel_c += hit;
        }
        BinAccuracy& bin = rep.per_bin[partition.bin_index(aspect_ratio(p.box))];
        bin.count += 1;
        bin.correct += hit;
    }

    rep.overall_accuracy = static_cast<double>(correct) / static_cast<double>(rep.total);
    if (base_n > 0)
        rep.base_accuracy = static_cast<double>(base_c) / static_cast<double>(base_n);
    if (novel_n > 0)
        rep.novel_accuracy = static_cast<double>(novel_c) / static_cast<double>(novel_n);
    for (ClassAccuracy& c : rep.per_class) {
        if (c.count > 0)
            c.accuracy = static_cast<double>(c.correct) / static_cast<double>(c.count);
    }
    for (BinAccuracy& b : rep.per_bin) {
        if (b.count > 0)
            b.accuracy = static_cast<double>(b.correct) / static_cast<double>(b.count);
    }
    return rep;
}

namespace {

struct ClassDetection {
    std::int64_t image_id;
    const BoundingBox* box;
    double score;
};

std::optional<double> class_ap50(std::vector<ClassDetection> dets,
                                 std::map<std::int64_t, std::vector<const BoundingBox*>>& gts,
                                 std::size_t total_gt) {
    if (total_gt == 0) return std::nullopt;
    // Descending score; stable so that ties keep input order.
    std::stable_sort(dets.begin(), dets.end(),
                     [](const ClassDetection& a, const ClassDetection& b) {
                         return a.score > b.score;
                     });

    std::map<std::int64_t, std::vector<char>> claimed;
    for (const auto& [img, boxes] : gts) claimed[img].assign(boxes.size(), 0);

    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto it = gts.find(dets[i].image_id);
        std::size_t best_gt = 0;
        double best_iou = 0.0;
        bool found = false;
        if (it != gts.end()) {
            const auto& boxes = it->second;
            auto& used = claimed[dets[i].image_id];
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                if (used[g]) continue;
                const double v = iou(*dets[i].box, *boxes[g]);
                if (v >= 0.5 && v > best_iou) {
                    best_iou = v;
                    best_gt = g;
                    found = true;
                }
            }
        }
        if (found) {
            claimed[dets[i].image_id][best_gt] = 1;
            tp += 1;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    }
    if (dets.empty()) return 0.0;

    // All-point interpolation: precision envelope from the right, then the
    // area under recall increments.
    for (std::size_t i = precision.size() - 1; i > 0; --i)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

} // namespace

Ap50Result ap50(const std::vector<ImageDetection>& detections,
                const std::vector<GroundTruth>& ground_truth, std::size_t num_classes) {
    if (num_classes == 0) throw ValidationError("no classes to evaluate");
    for (const ImageDetection& d : detections) {
        d.detection.box.validate();
        if (d.detection.predicted_class >= num_classes)
            throw ValidationError("detection class out of range");
    }
    for (const GroundTruth& g : ground_truth) {
        g.box.validate();
        if (g.label >= num_classes) throw ValidationError("ground truth class out of range");
    }

    Ap50Result out;
    out.per_class.assign(num_classes, std::nullopt);
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<ClassDetection> dets;
        for (const ImageDetection& d : detections) {
            if (d.detection.predicted_class == c)
                dets.push_back({d.image_id, &d.detection.box, d.detection.score_box});
        }
        std::map<std::int64_t, std::vector<const BoundingBox*>> gts;
        std::size_t total_gt = 0;
        for (const GroundTruth& g : ground_truth) {
            if (g.label == c) {
                gts[g.image_id].push_back(&g.box);
                total_gt += 1;
            }
        }
        out.per_class[c] = class_ap50(std::move(dets), gts, total_gt);
        if (out.per_class[c]) {
            sum += *out.per_class[c];
            defined += 1;
        }
    }
    if (defined > 0) out.mean = sum / static_cast<double>(defined);
    return out;
}

EvalReport evaluate_dataset(const Dataset& ds, const AdapterBank* bank,
                            const TextEmbeddingBank& texts, const ClassifierConfig& cfg,
                            const BinPartition& report_bins, bool with_ap50) {
    ds.validate();
    texts.validate();
    if (ds.samples.empty()) throw ValidationError("dataset has no samples to evaluate");
    if (ds.num_classes() != texts.num_classes())
        throw ValidationError("dataset and text bank disagree on the class count");
    if (ds.dim != texts.dim)
        throw ValidationError("dataset and text bank disagree on the dimension");
    if (bank) {
        bank->validate();
        if (bank->dim != ds.dim)
            throw ValidationError("bank dimension does not match the dataset");
    }

    std::vector<PredictionRecord> preds;
    preds.reserve(ds.samples.size());
    std::vector<ImageDetection> dets;
    std::vector<GroundTruth> gts;
    for (const RegionSample& s : ds.samples) {
        const std::vector<double> beta =
            bank ? adapt_region(*bank, s.feature, s.box) : s.feature;
        const std::vector<double> probs = classify(beta, texts, cfg);
        const auto [score, cls] = classification_score(probs);
        preds.push_back({cls, s.label, s.box});
        if (with_ap50) {
            ScoredDetection det;
            det.box = s.box;
            det.probs = probs;
            det.score_c = score;
            det.predicted_class = cls;
            det.score_l = 1.0;
            det.score_box = fuse_scores(det.score_c, det.score_l);
            dets.push_back({s.image_id, std::move(det)});
            gts.push_back({s.image_id, s.box, s.label});
        }
    }

    EvalReport rep =
        accuracy_report(preds, ds.num_classes(), ds.class_splits, report_bins);
    if (with_ap50) rep.ap50 = ap50(dets, gts, ds.num_classes());
    return rep;
}

void export_adapted_features(const std::vector<RegionSample>& samples,
                             const AdapterBank& bank, const std::string& path) {
    bank.validate();
    if (samples.empty()) throw ValidationError("no samples to export");

    std::string out = "id,label";
    for (std::size_t d = 0; d < bank.dim; ++d) out += ",f" + std::to_string(d);
    out += "\n";
    for (const RegionSample& s : samples) {
        if (s.feature.size() != bank.dim)
            throw ValidationError("sample feature length does not match the bank");
        const std::vector<double> beta = adapt_region(bank, s.feature, s.box);
        out += std::to_string(s.id) + "," + std::to_string(s.label);
        for (double v : beta) {
            out += ',';
            out += format_double(v);
        }
        out += "\n";
    }
    write_file_atomic(path, out);
}

} // namespace sia
