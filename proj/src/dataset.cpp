#include "sia/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sia/adapter_bank.hpp"

namespace sia {

void Dataset::validate() const {
    if (dim == 0) throw ValidationError("dataset feature dimension must be positive");
    if (class_names.empty()) throw ValidationError("dataset declares no classes");
    if (class_splits.size() != class_names.size())
        throw ValidationError("dataset class metadata sizes disagree");
    for (const std::string& n : class_names) {
        if (n.empty()) throw ValidationError("class names must be non-empty");
    }
    for (const RegionSample& s : samples) {
        s.box.validate();
        if (s.label >= class_names.size())
            throw ValidationError("sample label out of range");
        if (s.split != class_splits[s.label])
            throw ValidationError("sample split tag disagrees with its class");
        if (s.feature.size() != dim)
            throw ValidationError("sample feature has the wrong length");
        if (!all_finite(s.feature))
            throw ValidationError("sample feature contains non-finite values");
    }
}

void SynthConfig::validate() const {
    if (dim == 0 || num_classes < 2 || bins == 0 || samples_per_class_per_bin == 0)
        throw ValidationError("synthetic config sizes must be positive (and K >= 2)");
    if (!std::isfinite(noise_sigma) || noise_sigma < 0.0)
        throw ValidationError("noise sigma must be non-negative");
    if (num_novel_classes >= num_classes)
        throw ValidationError("at least one class must stay in the base split");
}

namespace {

std::vector<double> unit_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double n = 0.0;
    while (n == 0.0) {
        for (double& x : v) x = rng.normal();
        n = norm2(v);
    }
    for (double& x : v) x /= n;
    return v;
}

// Haar-ish random rotation: Gram-Schmidt on a Gaussian matrix, then a column
// flip if the determinant came out negative.
Matrix random_rotation(Rng& rng, std::size_t dim) {
    while (true) {
        Matrix g(dim, dim);
        for (double& x : g.data()) x = rng.normal();
        // Columns orthonormalized in place by modified Gram-Schmidt.
        bool degenerate = false;
        for (std::size_t c = 0; c < dim && !degenerate; ++c) {
            for (std::size_t prev = 0; prev < c; ++prev) {
                double proj = 0.0;
                for (std::size_t r = 0; r < dim; ++r) proj += g(r, c) * g(r, prev);
                for (std::size_t r = 0; r < dim; ++r) g(r, c) -= proj * g(r, prev);
            }
            double n = 0.0;
            for (std::size_t r = 0; r < dim; ++r) n += g(r, c) * g(r, c);
            n = std::sqrt(n);
            if (n < 1e-12) {
                degenerate = true;
                break;
            }
            for (std::size_t r = 0; r < dim; ++r) g(r, c) /= n;
        }
        if (degenerate) continue;
        if (determinant(g) < 0.0) {
            for (std::size_t r = 0; r < dim; ++r) g(r, 0) = -g(r, 0);
        }
        return g;
    }
}

Matrix random_invertible(Rng& rng, std::size_t dim) {
    while (true) {
        Matrix g(dim, dim);
        for (double& x : g.data()) x = rng.normal() / std::sqrt(static_cast<double>(dim));
        const double det = determinant(g);
        if (std::isfinite(det) && std::fabs(det) > 1e-9) return g;
    }
}

// Finite sampling range for a bin; the unbounded edge bins are clipped one
// geometric step beyond the interior range.
std::pair<double, double> sampling_range(const std::vector<double>& bounds, std::size_t b) {
    const double first_interior = bounds.size() > 2 ? bounds[1] : 1.0;
    const double last_interior = bounds.size() > 2 ? bounds[bounds.size() - 2] : 1.0;
    double lo = bounds[b] > 0.0 ? bounds[b] : first_interior / 4.0;
    double hi = std::isinf(bounds[b + 1]) ? last_interior * 4.0 : bounds[b + 1];
    return {lo, hi};
}

} // namespace

SynthResult generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    SynthResult out;
    out.partition = BinPartition::geometric(cfg.bins);

    std::vector<std::vector<double>> prototypes(cfg.num_classes);
    for (auto& p : prototypes) p = unit_vector(rng, cfg.dim);

    out.deformations.reserve(cfg.bins);
    for (std::size_t b = 0; b < cfg.bins; ++b) {
        out.deformations.push_back(cfg.kind == SynthConfig::Deformation::rotation
                                       ? random_rotation(rng, cfg.dim)
                                       : random_invertible(rng, cfg.dim));
    }

    Dataset& ds = out.dataset;
    ds.dim = cfg.dim;
    for (std::size_t k = 0; k < cfg.num_classes; ++k) {
        ds.class_names.push_back("class_" + std::to_string(k));
        const bool novel = k + cfg.num_novel_classes >= cfg.num_classes;
        ds.class_splits.push_back(novel ? Split::novel : Split::base);
    }

    const std::vector<double>& bounds = out.partition.boundaries();
    std::int64_t next_id = 0;
    for (std::size_t b = 0; b < cfg.bins; ++b) {
        const auto [lo, hi] = sampling_range(bounds, b);
        for (std::size_t k = 0; k < cfg.num_classes; ++k) {
            for (std::size_t i = 0; i < cfg.samples_per_class_per_bin; ++i) {
                double ratio = 0.0;
                do {
                    ratio = std::exp(rng.uniform(std::log(lo), std::log(hi)));
                } while (out.partition.bin_index(ratio) != b);

                RegionSample s;
                s.id = next_id;
                s.image_id = next_id;
                ++next_id;
                // Unit-area box with the sampled aspect ratio.
                s.box = BoundingBox{0.0, 0.0, 1.0 / std::sqrt(ratio), std::sqrt(ratio)};
                s.label = k;
                s.split = ds.class_splits[k];

                std::vector<double> noised = prototypes[k];
                for (double& v : noised) v += rng.normal(0.0, cfg.noise_sigma);
                std::vector<double> feat = mat_vec(out.deformations[b], noised);
                const double n = norm2(feat);
                if (n > 0.0) {
                    for (double& v : feat) v /= n;
                }
                s.feature = std::move(feat);
                ds.samples.push_back(std::move(s));
            }
        }
    }

    TextEmbeddingBank& tb = out.text_bank;
    tb.dim = cfg.dim;
    tb.embeddings = std::move(prototypes);
    tb.class_names = ds.class_names;
    tb.class_splits = ds.class_splits;

    ds.validate();
    tb.validate();
    return out;
}

SplitResult split_train_eval(const Dataset& ds, double fraction, std::uint64_t seed,
                             const BinPartition* stratify_bins) {
    ds.validate();
    if (!std::isfinite(fraction) || fraction <= 0.0 || fraction >= 1.0)
        throw ValidationError("train fraction must lie strictly between 0 and 1");

    SplitResult out;
    out.train.dim = out.eval.dim = ds.dim;
    out.train.class_names = out.eval.class_names = ds.class_names;
    out.train.class_splits = out.eval.class_splits = ds.class_splits;

    // Group key: class, plus bin when a partition is given. Groups are
    // processed in ascending key order so the rng stream is reproducible.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const RegionSample& s = ds.samples[i];
        const std::size_t bin =
            stratify_bins ? stratify_bins->bin_index(aspect_ratio(s.box)) : 0;
        groups[{s.label, bin}].push_back(i);
    }

    Rng rng(seed);
    std::vector<char> to_train(ds.samples.size(), 0);
    for (auto& [key, indices] : groups) {
        const std::size_t label = key.first;
        if (ds.class_splits[label] == Split::novel) continue;
        if (indices.size() < 2) {
            out.warnings.push_back("class " + ds.class_names[label] +
                                   " has a group with fewer than 2 samples; all sent to eval");
            continue;
        }
        std::vector<std::size_t> order = indices;
        rng.shuffle(order);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(order.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);
        for (std::size_t i = 0; i < n_train; ++i) to_train[order[i]] = 1;
    }

    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        (to_train[i] ? out.train : out.eval).samples.push_back(ds.samples[i]);
    }
    return out;
}

} // namespace sia
