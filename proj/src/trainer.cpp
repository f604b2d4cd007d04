#include "sia/trainer.hpp"

#include <cmath>
#include <numeric>

namespace sia {

void TrainConfig::validate() const {
    if (epochs == 0) throw ValidationError("epochs must be positive");
    if (!std::isfinite(base_lr) || base_lr <= 0.0)
        throw ValidationError("base learning rate must be positive");
    if (!std::isfinite(lr_decay_factor) || lr_decay_factor <= 0.0 || lr_decay_factor > 1.0)
        throw ValidationError("lr decay factor must lie in (0, 1]");
    if (batch_size == 0) throw ValidationError("batch size must be positive");
    if (!std::isfinite(weight_decay) || weight_decay < 0.0)
        throw ValidationError("weight decay must be non-negative");
}

double ce_loss(const std::vector<double>& probs, std::size_t label, bool* clamped) {
    if (clamped) *clamped = false;
    if (label >= probs.size()) throw ValidationError("label out of range");
    if (!all_finite(probs)) throw ValidationError("posterior contains non-finite values");
    double p = probs[label];
    if (p < 1e-12) {
        p = 1e-12;
        if (clamped) *clamped = true;
    }
    return -std::log(p);
}

namespace {

struct SampleLoss {
    double loss = 0.0;
    std::size_t adapter = 0;
};

// Forward and backward for one example, accumulating unscaled gradients.
SampleLoss backprop_example(const AdapterBank& bank, const TrainExample& ex,
                            const std::vector<std::vector<double>>& alphas,
                            const ClassifierConfig& cfg, LossKind kind,
                            BankGradients& grads) {
    const std::size_t j = bank.partition.bin_index(aspect_ratio(ex.box));
    const Adapter& ad = bank.adapters[j];
    const std::size_t dim = bank.dim;
    const std::size_t k = alphas.size();
    if (ex.label >= k) throw ValidationError("label out of range");
    if (ex.feature.size() != dim)
        throw ValidationError("feature length does not match the bank");
    if (!all_finite(ex.feature))
        throw ValidationError("feature contains non-finite values");

    // Forward.
    std::vector<double> h = vec_mat(ex.feature, ad.w1);
    std::vector<double> r(h.size());
    for (std::size_t q = 0; q < h.size(); ++q) r[q] = h[q] > 0.0 ? h[q] : 0.0;
    std::vector<double> a = vec_mat(r, ad.w2);
    std::vector<double> beta(dim);
    for (std::size_t d = 0; d < dim; ++d)
        beta[d] = bank.lambda * a[d] + (1.0 - bank.lambda) * ex.feature[d];

    double beta_norm = 1.0;
    std::vector<double> beta_hat = beta;
    if (cfg.normalize) {
        beta_norm = norm2(beta);
        if (beta_norm == 0.0)
            throw ValidationError("adapted feature is a zero vector; cannot normalize");
        for (double& v : beta_hat) v /= beta_norm;
    }

    std::vector<double> z(k);
    for (std::size_t c = 0; c < k; ++c) z[c] = dot(beta_hat, alphas[c]) / cfg.tau;

    double zmax = z[0];
    for (double v : z) zmax = v > zmax ? v : zmax;
    double sum_exp = 0.0;
    for (double v : z) sum_exp += std::exp(v - zmax);
    const double lse = zmax + std::log(sum_exp);

    SampleLoss out;
    out.adapter = j;
    if (kind == LossKind::label_ce) {
        out.loss = lse - z[ex.label];
    } else {
        double zmean = 0.0;
        for (double v : z) zmean += v;
        zmean /= static_cast<double>(k);
        out.loss = lse - zmean;
    }

    // Backward: d loss / d z is the posterior minus the target distribution.
    std::vector<double> dz(k);
    for (std::size_t c = 0; c < k; ++c) {
        const double p = std::exp(z[c] - lse);
        dz[c] = p - (kind == LossKind::label_ce
                         ? (c == ex.label ? 1.0 : 0.0)
                         : 1.0 / static_cast<double>(k));
    }

    std::vector<double> g_bhat(dim, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const double w = dz[c] / cfg.tau;
        if (w == 0.0) continue;
        for (std::size_t d = 0; d < dim; ++d) g_bhat[d] += w * alphas[c][d];
    }

    std::vector<double> g_beta(dim);
    if (cfg.normalize) {
        const double along = dot(beta_hat, g_bhat);
        for (std::size_t d = 0; d < dim; ++d)
            g_beta[d] = (g_bhat[d] - beta_hat[d] * along) / beta_norm;
    } else {
        g_beta = g_bhat;
    }

    // Residual blend: only the adapter branch carries trainable weights.
    std::vector<double> g_a(dim);
    for (std::size_t d = 0; d < dim; ++d) g_a[d] = bank.lambda * g_beta[d];

    add_outer(grads.dw2[j], r, g_a, 1.0);

    std::vector<double> g_h = mat_vec(ad.w2, g_a);
    for (std::size_t q = 0; q < g_h.size(); ++q) {
        if (h[q] <= 0.0) g_h[q] = 0.0;
    }
    add_outer(grads.dw1[j], ex.feature, g_h, 1.0);

    grads.samples_per_adapter[j] += 1;
    return out;
}

} // namespace

LossAndGradients loss_and_gradients(const AdapterBank& bank,
                                    const std::vector<TrainExample>& batch,
                                    const TextEmbeddingBank& texts,
                                    const ClassifierConfig& cfg, LossKind kind) {
    cfg.validate();
    texts.validate();
    if (batch.empty()) throw ValidationError("batch is empty");
    if (texts.dim != bank.dim)
        throw ValidationError("text bank dimension does not match the bank");

    std::vector<std::vector<double>> alphas = texts.embeddings;
    if (cfg.normalize) {
        for (auto& a : alphas) {
            const double n = norm2(a);
            for (double& v : a) v /= n;
        }
    }

    LossAndGradients out;
    out.grads.dw1.assign(bank.size(), Matrix(bank.dim, bank.hidden_dim));
    out.grads.dw2.assign(bank.size(), Matrix(bank.hidden_dim, bank.dim));
    out.grads.samples_per_adapter.assign(bank.size(), 0);

    double loss_sum = 0.0;
    for (const TrainExample& ex : batch)
        loss_sum += backprop_example(bank, ex, alphas, cfg, kind, out.grads).loss;

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    out.loss = loss_sum * inv_n;
    for (std::size_t j = 0; j < bank.size(); ++j) {
        for (double& v : out.grads.dw1[j].data()) v *= inv_n;
        for (double& v : out.grads.dw2[j].data()) v *= inv_n;
    }
    return out;
}

namespace {

struct AdamState {
    Matrix m1, v1, m2, v2;
    std::size_t steps = 0;
};

void adamw_update(Matrix& w, const Matrix& g, Matrix& m, Matrix& v, double lr,
                  double weight_decay, std::size_t step) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    auto& wd = w.data();
    const auto& gd = g.data();
    auto& md = m.data();
    auto& vd = v.data();
    for (std::size_t i = 0; i < wd.size(); ++i) {
        // Decoupled decay acts on the pre-step weight and never enters the
        // moment estimates.
        if (weight_decay > 0.0) wd[i] -= lr * weight_decay * wd[i];
        md[i] = kBeta1 * md[i] + (1.0 - kBeta1) * gd[i];
        vd[i] = kBeta2 * vd[i] + (1.0 - kBeta2) * gd[i] * gd[i];
        const double mhat = md[i] / bc1;
        const double vhat = vd[i] / bc2;
        wd[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
}

void sgd_update(Matrix& w, const Matrix& g, double lr, double weight_decay) {
    auto& wd = w.data();
    const auto& gd = g.data();
    for (std::size_t i = 0; i < wd.size(); ++i) {
        wd[i] -= lr * (gd[i] + weight_decay * wd[i]);
    }
}

} // namespace

TrainResult train(const AdapterBank& bank, const Dataset& train_set,
                  const TextEmbeddingBank& texts, const TrainConfig& cfg,
                  const ClassifierConfig& clf) {
    bank.validate();
    cfg.validate();
    clf.validate();
    texts.validate();
    train_set.validate();
    if (train_set.dim != bank.dim)
        throw ValidationError("dataset dimension does not match the bank");
    if (train_set.num_classes() != texts.num_classes())
        throw ValidationError("dataset and text bank disagree on the class count");
    if (train_set.samples.empty()) throw ValidationError("training set is empty");
    for (const RegionSample& s : train_set.samples) {
        if (train_set.class_splits[s.label] == Split::novel)
            throw ValidationError("training set contains novel-class samples");
    }

    TrainResult result{bank, {}};
    AdapterBank& model = result.bank;

    std::vector<TrainExample> examples;
    examples.reserve(train_set.samples.size());
    for (const RegionSample& s : train_set.samples)
        examples.push_back(TrainExample{s.feature, s.box, s.label});

    std::vector<AdamState> states(model.size());
    if (cfg.optimizer == OptimizerKind::adamw) {
        for (std::size_t j = 0; j < model.size(); ++j) {
            states[j].m1 = Matrix(model.dim, model.hidden_dim);
            states[j].v1 = Matrix(model.dim, model.hidden_dim);
            states[j].m2 = Matrix(model.hidden_dim, model.dim);
            states[j].v2 = Matrix(model.hidden_dim, model.dim);
        }
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t n = examples.size();
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = epoch > cfg.lr_decay_after_epoch
                              ? cfg.base_lr * cfg.lr_decay_factor
                              : cfg.base_lr;
        rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            std::vector<TrainExample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);

            LossAndGradients lg = loss_and_gradients(model, batch, texts, clf, cfg.loss);
            epoch_loss_sum += lg.loss * static_cast<double>(batch.size());

            for (std::size_t j = 0; j < model.size(); ++j) {
                if (lg.grads.samples_per_adapter[j] == 0) continue;
                if (cfg.optimizer == OptimizerKind::adamw) {
                    AdamState& st = states[j];
                    st.steps += 1;
                    adamw_update(model.adapters[j].w1, lg.grads.dw1[j], st.m1, st.v1, lr,
                                 cfg.weight_decay, st.steps);
                    adamw_update(model.adapters[j].w2, lg.grads.dw2[j], st.m2, st.v2, lr,
                                 cfg.weight_decay, st.steps);
                } else {
                    sgd_update(model.adapters[j].w1, lg.grads.dw1[j], lr, cfg.weight_decay);
                    sgd_update(model.adapters[j].w2, lg.grads.dw2[j], lr, cfg.weight_decay);
                }
            }
        }
        result.report.epoch_mean_loss.push_back(epoch_loss_sum / static_cast<double>(n));
    }

    // Per-bin bookkeeping on the final weights.
    TrainReport& rep = result.report;
    rep.bin_counts.assign(model.size(), 0);
    std::vector<std::size_t> bin_correct(model.size(), 0);
    for (const RegionSample& s : train_set.samples) {
        const std::size_t j = model.partition.bin_index(aspect_ratio(s.box));
        rep.bin_counts[j] += 1;
        const std::vector<double> probs =
            classify(adapt_region(model, s.feature, s.box), texts, clf);
        if (classification_score(probs).second == s.label) bin_correct[j] += 1;
    }
    for (std::size_t j = 0; j < model.size(); ++j) {
        if (rep.bin_counts[j] == 0) {
            rep.empty_bins.push_back(j);
            rep.bin_train_accuracy.push_back(std::nullopt);
        } else {
            rep.bin_train_accuracy.push_back(static_cast<double>(bin_correct[j]) /
                                             static_cast<double>(rep.bin_counts[j]));
        }
    }
    return result;
}

} // namespace sia
