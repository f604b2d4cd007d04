#include "sia/classifier.hpp"

#include <cmath>

#include "sia/matrix.hpp"

namespace sia {

const char* split_name(Split s) { return s == Split::base ? "base" : "novel"; }

Split split_from_name(const std::string& name) {
    if (name == "base") return Split::base;
    if (name == "novel") return Split::novel;
    throw ValidationError("unknown split tag '" + name + "'");
}

void TextEmbeddingBank::validate() const {
    if (dim == 0) throw ValidationError("text bank dimension must be positive");
    if (embeddings.size() < 2)
        throw ValidationError("text bank needs at least two classes");
    if (class_names.size() != embeddings.size() || class_splits.size() != embeddings.size())
        throw ValidationError("text bank metadata sizes disagree");
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
        if (embeddings[k].size() != dim)
            throw ValidationError("text bank column has the wrong length");
        if (!all_finite(embeddings[k]))
            throw ValidationError("text bank column contains non-finite values");
        if (norm2(embeddings[k]) == 0.0)
            throw ValidationError("text bank column is a zero vector");
        if (class_names[k].empty())
            throw ValidationError("class names must be non-empty");
    }
}

void ClassifierConfig::validate() const {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw ValidationError("temperature tau must be positive");
}

void ScoredDetection::validate() const {
    box.validate();
    if (probs.empty()) throw ValidationError("detection has no class posterior");
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) throw ValidationError("posterior entries must be non-negative");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("posterior does not sum to 1");
    if (predicted_class >= probs.size())
        throw ValidationError("predicted class out of range");
    if (score_l < 0.0 || score_l > 1.0 || score_c < 0.0 || score_c > 1.0)
        throw ValidationError("scores must lie in [0, 1]");
    if (score_box != score_c * score_l)
        throw ValidationError("fused score must equal score_c * score_l");
}

namespace {

std::vector<double> normalized(const std::vector<double>& v) {
    const double n = norm2(v);
    if (n == 0.0) throw ValidationError("cannot normalize a zero vector");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

std::vector<double> softmax(std::vector<double> logits) {
    double m = logits[0];
    for (double z : logits) m = z > m ? z : m;
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - m);
        sum += z;
    }
    for (double& z : logits) z /= sum;
    return logits;
}

} // namespace

std::vector<double> classify(const std::vector<double>& beta, const TextEmbeddingBank& bank,
                             const ClassifierConfig& cfg) {
    cfg.validate();
    if (beta.size() != bank.dim)
        throw ValidationError("region embedding length does not match the text bank");
    if (!all_finite(beta))
        throw ValidationError("region embedding contains non-finite values");

    const std::size_t k = bank.num_classes();
    if (k < 2) throw ValidationError("text bank needs at least two classes");
    std::vector<double> logits(k);
    if (cfg.normalize) {
        const std::vector<double> bn = normalized(beta);
        for (std::size_t c = 0; c < k; ++c)
            logits[c] = dot(bn, normalized(bank.embeddings[c])) / cfg.tau;
    } else {
        for (std::size_t c = 0; c < k; ++c)
            logits[c] = dot(beta, bank.embeddings[c]) / cfg.tau;
    }
    return softmax(std::move(logits));
}

std::pair<double, std::size_t> classification_score(const std::vector<double>& probs) {
    if (probs.empty()) throw ValidationError("empty posterior");
    if (!all_finite(probs)) throw ValidationError("posterior contains non-finite values");
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return {probs[best], best};
}

double fuse_scores(double score_c, double score_l) {
    if (!std::isfinite(score_c) || score_c < 0.0 || score_c > 1.0)
        throw ValidationError("score_c must lie in [0, 1]");
    if (!std::isfinite(score_l) || score_l < 0.0 || score_l > 1.0)
        throw ValidationError("score_l must lie in [0, 1]");
    return score_c * score_l;
}

ScoredDetection score_proposal(const RegionProposal& proposal,
                               const std::vector<double>& feature, const AdapterBank& bank,
                               const TextEmbeddingBank& texts, const ClassifierConfig& cfg) {
    proposal.validate();
    ScoredDetection det;
    det.box = proposal.box;
    det.probs = classify(adapt_region(bank, feature, proposal.box), texts, cfg);
    const auto [score, cls] = classification_score(det.probs);
    det.score_c = score;
    det.predicted_class = cls;
    det.score_l = proposal.score_l;
    det.score_box = fuse_scores(det.score_c, det.score_l);
    return det;
}

} // namespace sia
