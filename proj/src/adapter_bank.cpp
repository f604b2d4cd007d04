#include "sia/adapter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sia {

BinPartition::BinPartition(std::vector<double> boundaries)
    : boundaries_(std::move(boundaries)) {
    if (boundaries_.size() < 2)
        throw ValidationError("partition needs at least two boundaries");
    if (boundaries_.front() != 0.0)
        throw ValidationError("partition must start at 0");
    if (!std::isinf(boundaries_.back()) || boundaries_.back() < 0.0)
        throw ValidationError("partition must end at +infinity");
    for (std::size_t i = 1; i < boundaries_.size(); ++i) {
        if (std::isnan(boundaries_[i]) || boundaries_[i] <= boundaries_[i - 1])
            throw ValidationError("partition boundaries must be strictly increasing");
    }
}

BinPartition BinPartition::geometric(std::size_t bins) {
    if (bins == 0) throw ValidationError("partition needs at least one bin");
    std::vector<double> b;
    b.reserve(bins + 1);
    b.push_back(0.0);
    for (std::size_t k = 1; k < bins; ++k) {
        const double e = 2.0 * static_cast<double>(k) / static_cast<double>(bins) - 1.0;
        b.push_back(std::pow(4.0, e));
    }
    b.push_back(std::numeric_limits<double>::infinity());
    return BinPartition(std::move(b));
}

std::size_t BinPartition::bin_index(double ratio) const {
    if (boundaries_.size() < 2) throw ValidationError("partition is empty");
    if (std::isnan(ratio) || std::isinf(ratio) || ratio <= 0.0)
        throw ValidationError("aspect ratio must be finite and positive");
    // First boundary >= ratio closes the interval (s_{k-1}, s_k] that holds it.
    const auto it = std::lower_bound(boundaries_.begin() + 1, boundaries_.end(), ratio);
    return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

std::size_t AllocationWeights::hot_index() const {
    validate();
    for (std::size_t i = 0; i < onehot.size(); ++i) {
        if (onehot[i] == 1.0) return i;
    }
    throw ValidationError("allocation weights have no hot entry");
}

void AllocationWeights::validate() const {
    if (onehot.empty()) throw ValidationError("allocation weights are empty");
    std::size_t ones = 0;
    for (double v : onehot) {
        if (v == 1.0)
            ++ones;
        else if (v != 0.0)
            throw ValidationError("allocation weights must be exactly 0 or 1");
    }
    if (ones != 1) throw ValidationError("allocation weights must have exactly one hot entry");
}

void AdapterBank::validate() const {
    if (adapters.empty()) throw ValidationError("bank needs at least one adapter");
    if (dim == 0 || hidden_dim == 0)
        throw ValidationError("bank dimensions must be positive");
    if (partition.bins() != adapters.size())
        throw ValidationError("partition bin count must equal the number of adapters");
    if (!std::isfinite(lambda) || lambda < 0.0 || lambda > 1.0)
        throw ValidationError("lambda must lie in [0, 1]");
    for (const Adapter& a : adapters) {
        if (a.w1.rows() != dim || a.w1.cols() != hidden_dim)
            throw ValidationError("adapter w1 has the wrong shape");
        if (a.w2.rows() != hidden_dim || a.w2.cols() != dim)
            throw ValidationError("adapter w2 has the wrong shape");
        if (!all_finite(a.w1.data()) || !all_finite(a.w2.data()))
            throw ValidationError("adapter weights must be finite");
    }
}

AdapterBank AdapterBank::initialized(std::size_t num_adapters, std::size_t dim,
                                     std::size_t hidden_dim, double lambda,
                                     BinPartition partition, Rng& rng) {
    AdapterBank bank;
    bank.dim = dim;
    bank.hidden_dim = hidden_dim;
    bank.lambda = lambda;
    bank.partition = std::move(partition);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    bank.adapters.resize(num_adapters);
    for (Adapter& a : bank.adapters) {
        a.w1 = Matrix(dim, hidden_dim);
        for (double& v : a.w1.data()) v = rng.uniform(-bound, bound);
        a.w2 = Matrix(hidden_dim, dim, 0.0);
    }
    bank.validate();
    return bank;
}

std::size_t default_hidden_dim(std::size_t dim) {
    return std::max<std::size_t>(1, dim / 4);
}

std::vector<double> adapter_forward(const Adapter& adapter, const std::vector<double>& f) {
    if (f.size() != adapter.w1.rows())
        throw ValidationError("feature length does not match adapter input width");
    if (adapter.w1.cols() != adapter.w2.rows())
        throw ValidationError("adapter projections do not compose");
    if (!all_finite(f)) throw ValidationError("feature contains non-finite values");
    std::vector<double> h = vec_mat(f, adapter.w1);
    for (double& v : h) v = v > 0.0 ? v : 0.0;
    return vec_mat(h, adapter.w2);
}

std::vector<double> residual_mix(const AdapterBank& bank, std::size_t index,
                                 const std::vector<double>& f) {
    if (index >= bank.adapters.size())
        throw ValidationError("adapter index out of range");
    const std::vector<double> a = adapter_forward(bank.adapters[index], f);
    std::vector<double> out(f.size());
    for (std::size_t d = 0; d < f.size(); ++d)
        out[d] = bank.lambda * a[d] + (1.0 - bank.lambda) * f[d];
    return out;
}

Matrix adapt_all(const AdapterBank& bank, const std::vector<double>& f) {
    bank.validate();
    Matrix stack(bank.dim, bank.adapters.size());
    for (std::size_t j = 0; j < bank.adapters.size(); ++j) {
        const std::vector<double> col = residual_mix(bank, j, f);
        for (std::size_t d = 0; d < bank.dim; ++d) stack(d, j) = col[d];
    }
    return stack;
}

AllocationWeights allocate(const BinPartition& partition, double ratio) {
    AllocationWeights w;
    w.onehot.assign(partition.bins(), 0.0);
    w.onehot[partition.bin_index(ratio)] = 1.0;
    return w;
}

std::vector<double> select_adapted(const Matrix& stack, const AllocationWeights& weights) {
    weights.validate();
    if (weights.onehot.size() != stack.cols())
        throw ValidationError("allocation width does not match the stack");
    std::vector<double> out(stack.rows(), 0.0);
    for (std::size_t d = 0; d < stack.rows(); ++d) {
        double acc = 0.0;
        for (std::size_t j = 0; j < stack.cols(); ++j) acc += stack(d, j) * weights.onehot[j];
        out[d] = acc;
    }
    return out;
}

std::vector<double> adapt_region(const AdapterBank& bank, const std::vector<double>& f,
                                 const BoundingBox& box) {
    const std::size_t j = bank.partition.bin_index(aspect_ratio(box));
    return residual_mix(bank, j, f);
}

} // namespace sia
