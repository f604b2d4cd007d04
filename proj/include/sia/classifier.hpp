#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sia/adapter_bank.hpp"
#include "sia/geometry.hpp"

namespace sia {

/// Whether a class participates in training (base) or only appears at
/// evaluation time (novel).
enum class Split { base, novel };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

/// Frozen per-class prototype vectors in the shared embedding space.
/// Conceptually a D x K matrix; stored class-major so that class k's
/// prototype is embeddings[k].
struct TextEmbeddingBank {
    std::size_t dim = 0;
    std::vector<std::vector<double>> embeddings;
    std::vector<std::string> class_names;
    std::vector<Split> class_splits;

    std::size_t num_classes() const { return embeddings.size(); }
    void validate() const;
};

struct ClassifierConfig {
    double tau = 0.01;
    bool normalize = true;

    void validate() const;
};

/// Fully scored region: class posterior plus the fused detection score.
struct ScoredDetection {
    BoundingBox box;
    std::vector<double> probs;
    double score_c = 0.0;
    double score_l = 0.0;
    double score_box = 0.0;
    std::size_t predicted_class = 0;

    void validate() const;
};

/// Temperature-softmax posterior over classes. With normalize = true both the
/// region embedding and the prototypes are L2-normalized first, making the
/// result invariant to positive rescaling of beta.
std::vector<double> classify(const std::vector<double>& beta, const TextEmbeddingBank& bank,
                             const ClassifierConfig& cfg);

/// Highest posterior and its class; ties resolve to the lowest class index.
std::pair<double, std::size_t> classification_score(const std::vector<double>& probs);

/// score_c * score_l. Both factors must lie in [0, 1].
double fuse_scores(double score_c, double score_l);

/// Adapt, classify, and fuse one proposal into a ScoredDetection.
ScoredDetection score_proposal(const RegionProposal& proposal,
                               const std::vector<double>& feature, const AdapterBank& bank,
                               const TextEmbeddingBank& texts, const ClassifierConfig& cfg);

} // namespace sia
