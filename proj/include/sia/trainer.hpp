#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sia/adapter_bank.hpp"
#include "sia/classifier.hpp"
#include "sia/dataset.hpp"

namespace sia {

enum class OptimizerKind { sgd, adamw };

/// label_ce is standard cross entropy on the labelled class. all_class_mean
/// averages -log p over every class instead and exists only for comparison;
/// its gradient is p - 1/K.
enum class LossKind { label_ce, all_class_mean };

struct TrainConfig {
    std::size_t epochs = 5;
    double base_lr = 1e-4;
    double lr_decay_factor = 0.1;
    /// Learning rate is multiplied by lr_decay_factor once, at the start of
    /// epoch lr_decay_after_epoch + 1 (1-based).
    std::size_t lr_decay_after_epoch = 4;
    std::size_t batch_size = 16;
    double weight_decay = 0.0;
    std::uint64_t seed = 1;
    OptimizerKind optimizer = OptimizerKind::adamw;
    LossKind loss = LossKind::label_ce;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    std::vector<std::size_t> bin_counts;
    std::vector<std::optional<double>> bin_train_accuracy;
    std::vector<std::size_t> empty_bins;
};

/// -log probs[label], with the probability floored at 1e-12 before the log.
/// *clamped is set when the floor fired.
double ce_loss(const std::vector<double>& probs, std::size_t label, bool* clamped = nullptr);

struct TrainExample {
    std::vector<double> feature;
    BoundingBox box;
    std::size_t label = 0;
};

/// Per-adapter gradients; adapters that saw no sample in the batch keep
/// exactly-zero matrices.
struct BankGradients {
    std::vector<Matrix> dw1;
    std::vector<Matrix> dw2;
    std::vector<std::size_t> samples_per_adapter;
};

struct LossAndGradients {
    double loss = 0.0;
    BankGradients grads;
};

/// Mean batch loss plus analytic gradients of every adapter weight,
/// backpropagated through the softmax, the optional normalization, the
/// residual blend, and the relu (subgradient 0 at exactly 0).
LossAndGradients loss_and_gradients(const AdapterBank& bank,
                                    const std::vector<TrainExample>& batch,
                                    const TextEmbeddingBank& texts,
                                    const ClassifierConfig& cfg,
                                    LossKind kind = LossKind::label_ce);

struct TrainResult {
    AdapterBank bank;
    TrainReport report;
};

/// Mini-batch training of the bank. Inputs (dataset, text bank) are read
/// only; novel-class samples in the training set are rejected. An adapter's
/// weights change in a step only when the batch routed at least one sample
/// to it.
TrainResult train(const AdapterBank& bank, const Dataset& train_set,
                  const TextEmbeddingBank& texts, const TrainConfig& cfg,
                  const ClassifierConfig& clf);

} // namespace sia
