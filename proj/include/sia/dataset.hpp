#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sia/classifier.hpp"
#include "sia/geometry.hpp"
#include "sia/matrix.hpp"

namespace sia {

/// One pre-extracted region: feature vector, box, and label. The split tag
/// always mirrors the split of the labelled class.
struct RegionSample {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    BoundingBox box;
    std::size_t label = 0;
    Split split = Split::base;
    std::vector<double> feature;
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<std::string> class_names;
    std::vector<Split> class_splits;
    std::vector<RegionSample> samples;

    std::size_t num_classes() const { return class_names.size(); }
    void validate() const;
};

/// Synthetic task with planted per-bin structure: K unit-norm prototypes act
/// as both class centers and text embeddings, and every aspect-ratio bin
/// applies its own hidden invertible map to the noised prototypes.
struct SynthConfig {
    enum class Deformation { rotation, general_linear };

    std::size_t dim = 32;
    std::size_t num_classes = 8;
    std::size_t bins = 4;
    std::size_t samples_per_class_per_bin = 100;
    double noise_sigma = 0.05;
    Deformation kind = Deformation::rotation;
    std::uint64_t seed = 1;
    /// Trailing classes tagged novel; they appear in the data but are
    /// rejected by training.
    std::size_t num_novel_classes = 0;

    void validate() const;
};

struct SynthResult {
    Dataset dataset;
    TextEmbeddingBank text_bank;
    BinPartition partition;
    /// Hidden per-bin deformations, returned for oracle checks only; they are
    /// never serialized with the dataset.
    std::vector<Matrix> deformations;
};

SynthResult generate_synthetic(const SynthConfig& cfg);

/// Deterministic stratified split. Base classes split per class (optionally
/// per class x bin when a partition is supplied); novel-class samples all go
/// to the eval side. Groups too small to split are sent to eval with a
/// warning.
struct SplitResult {
    Dataset train;
    Dataset eval;
    std::vector<std::string> warnings;
};

SplitResult split_train_eval(const Dataset& ds, double fraction, std::uint64_t seed,
                             const BinPartition* stratify_bins = nullptr);

} // namespace sia
