#pragma once

// Brute-force average-precision oracle. Instead of claiming greedily, it
// enumerates every sequentially-valid assignment of detections to ground
// truths (a detection must match some free compatible ground truth whenever
// one exists) and keeps the lexicographically largest (iou, -gt-index)
// sequence, which is provably the labelling the greedy matcher commits to.
// The integration runs as a forward scan rather than a right-to-left
// envelope. Exhaustive, so only fit for small instances.

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sia/evaluator.hpp"

namespace testutil {

inline double brute_ap_from_flags(const std::vector<char>& tp, std::size_t total_gt) {
    const std::size_t m = tp.size();
    if (m == 0) return 0.0;
    std::vector<double> precision(m), recall(m);
    std::size_t cum = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (tp[i]) ++cum;
        precision[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(cum) / static_cast<double>(total_gt);
    }
    double ap = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double best = 0.0;
        for (std::size_t j = i; j < m; ++j) best = std::max(best, precision[j]);
        ap += (recall[i] - prev) * best;
        prev = recall[i];
    }
    return ap;
}

struct BruteDet {
    std::int64_t image_id = 0;
    const sia::BoundingBox* box = nullptr;
    double score = 0.0;
};

using IouSeq = std::vector<std::pair<double, double>>;

struct BruteSearch {
    const std::vector<BruteDet>* dets = nullptr;
    const std::vector<sia::GroundTruth>* gts = nullptr; // class-filtered
    std::vector<char> used;
    IouSeq seq;
    std::vector<char> tp;
    IouSeq best_seq;
    std::vector<char> best_tp;
    bool have_best = false;

    void recurse(std::size_t i) {
        if (i == dets->size()) {
            if (!have_best || seq > best_seq) {
                best_seq = seq;
                best_tp = tp;
                have_best = true;
            }
            return;
        }
        const BruteDet& d = (*dets)[i];
        bool any = false;
        for (std::size_t g = 0; g < gts->size(); ++g) {
            if (used[g] || (*gts)[g].image_id != d.image_id) continue;
            const double v = sia::iou(*d.box, (*gts)[g].box);
            if (v < 0.5) continue;
            any = true;
            used[g] = 1;
            seq.emplace_back(v, -static_cast<double>(g));
            tp.push_back(1);
            recurse(i + 1);
            tp.pop_back();
            seq.pop_back();
            used[g] = 0;
        }
        if (!any) {
            seq.emplace_back(-1.0, 0.0);
            tp.push_back(0);
            recurse(i + 1);
            tp.pop_back();
            seq.pop_back();
        }
    }
};

inline sia::Ap50Result brute_ap50(const std::vector<sia::ImageDetection>& detections,
                                  const std::vector<sia::GroundTruth>& ground_truth,
                                  std::size_t num_classes) {
    sia::Ap50Result out;
    out.per_class.assign(num_classes, std::nullopt);
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<sia::GroundTruth> gts;
        for (const sia::GroundTruth& g : ground_truth)
            if (g.label == c) gts.push_back(g);
        if (gts.empty()) continue;

        std::vector<BruteDet> dets;
        for (const sia::ImageDetection& d : detections)
            if (d.detection.predicted_class == c)
                dets.push_back({d.image_id, &d.detection.box, d.detection.score_box});
        std::stable_sort(dets.begin(), dets.end(),
                         [](const BruteDet& a, const BruteDet& b) { return a.score > b.score; });

        BruteSearch search;
        search.dets = &dets;
        search.gts = &gts;
        search.used.assign(gts.size(), 0);
        search.recurse(0);
        out.per_class[c] = brute_ap_from_flags(search.best_tp, gts.size());
        sum += *out.per_class[c];
        defined += 1;
    }
    if (defined > 0) out.mean = sum / static_cast<double>(defined);
    return out;
}

} // namespace testutil
