#pragma once

#include <cstddef>
#include <vector>

#include "sia/geometry.hpp"
#include "sia/matrix.hpp"
#include "sia/rng.hpp"

namespace sia {

/// One residual bottleneck adapter. Row-vector convention: the adapter maps a
/// length-D feature f to relu(f w1) w2, with w1 of shape D x Dh and w2 of
/// shape Dh x D. Neither projection carries a bias.
struct Adapter {
    Matrix w1;
    Matrix w2;
};

/// Partition of the aspect-ratio axis (h/w) into half-open intervals
/// (s_{k-1}, s_k], with boundaries 0 = s_0 < s_1 < ... < s_N = +infinity.
/// Every positive ratio falls in exactly one interval.
class BinPartition {
public:
    BinPartition() = default;
    explicit BinPartition(std::vector<double> boundaries);

    /// Default partition: interior boundaries geometrically spaced between
    /// 1/4 and 4, s_k = 4^(2k/n - 1).
    static BinPartition geometric(std::size_t bins);

    std::size_t bins() const { return boundaries_.empty() ? 0 : boundaries_.size() - 1; }
    const std::vector<double>& boundaries() const { return boundaries_; }

    /// Zero-based index of the interval holding `ratio`. Ratios equal to a
    /// boundary belong to the interval that ends there.
    std::size_t bin_index(double ratio) const;

private:
    std::vector<double> boundaries_;
};

/// One-hot routing weights over a bank of N adapters.
struct AllocationWeights {
    std::vector<double> onehot;

    std::size_t hot_index() const;
    void validate() const;
};

/// Bank of N adapters routed by box aspect ratio; adapter k serves interval k
/// of the partition. lambda blends adapter output with the input feature.
struct AdapterBank {
    std::vector<Adapter> adapters;
    BinPartition partition;
    double lambda = 0.2;
    std::size_t dim = 0;
    std::size_t hidden_dim = 0;

    std::size_t size() const { return adapters.size(); }
    void validate() const;

    /// Fresh bank: w2 zeroed, w1 uniform in +-1/sqrt(D). With w2 = 0 the bank
    /// is a no-op up to the residual blend, so an untrained bank classifies
    /// exactly like the raw features.
    static AdapterBank initialized(std::size_t num_adapters, std::size_t dim,
                                   std::size_t hidden_dim, double lambda,
                                   BinPartition partition, Rng& rng);
};

/// Default bottleneck width: max(1, dim / 4).
std::size_t default_hidden_dim(std::size_t dim);

/// relu(f w1) w2 for a single adapter.
std::vector<double> adapter_forward(const Adapter& adapter, const std::vector<double>& f);

/// lambda * adapter_k(f) + (1 - lambda) * f. lambda = 0 returns f unchanged.
std::vector<double> residual_mix(const AdapterBank& bank, std::size_t index,
                                 const std::vector<double>& f);

/// All N residual-mixed outputs stacked as columns of a D x N matrix.
Matrix adapt_all(const AdapterBank& bank, const std::vector<double>& f);

/// One-hot weights for the interval holding `ratio`.
AllocationWeights allocate(const BinPartition& partition, double ratio);

/// Literal stack-times-one-hot product; exact because the weights are 0/1.
std::vector<double> select_adapted(const Matrix& stack, const AllocationWeights& weights);

/// Adapted feature for a region: routes by the box's aspect ratio and
/// evaluates only the selected adapter. Equal, bit for bit, to building the
/// full stack and selecting from it.
std::vector<double> adapt_region(const AdapterBank& bank, const std::vector<double>& f,
                                 const BoundingBox& box);

} // namespace sia
