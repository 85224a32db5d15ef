#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "flowsr/field.hpp"

namespace flowsr {

/// Per-component velocity statistics used as clustering features:
/// mean, variance, skewness, kurtosis for each of u1, u2, u3, flattened as
/// v[4*comp + quantity].
struct MomentVector {
    static constexpr int kDim = 12;
    std::array<double, kDim> v{};

    double mean(int comp) const { return v[4 * comp]; }
    double variance(int comp) const { return v[4 * comp + 1]; }
    double skewness(int comp) const { return v[4 * comp + 2]; }
    double kurtosis(int comp) const { return v[4 * comp + 3]; }
};

/// k-means result. Centroids and inertia live in standardized (per-dimension
/// z-scored) feature space; feature_mean/feature_std record the affine map
/// so new points can be assigned consistently.
struct ClusterModel {
    int k = 0;
    std::vector<std::array<double, MomentVector::kDim>> centroids;
    double inertia = 0.0;
    std::vector<int> assignments;  // cluster index per input feature
    std::array<double, MomentVector::kDim> feature_mean{};
    std::array<double, MomentVector::kDim> feature_std{};
};

/// Non-overlapping tiling into size^3 blocks, remainders at the high faces
/// dropped. Blocks are ordered x-major (x block outermost, z innermost).
std::vector<FlowState> extract_subvolumes(const FlowState& state, int size);

/// Population central moments per velocity component. A zero-variance
/// component reports skewness 0 and kurtosis 3 by convention.
MomentVector moments(const FlowState& state);

/// k-means on z-scored features: k-means++ seeding, Lloyd iterations to an
/// assignment fixpoint (300 iteration cap), best of 10 restarts by inertia.
/// Fully deterministic for a fixed seed. Throws when the input is empty or
/// k is out of range. Constant feature dimensions are centered and left
/// unscaled (z-score divisor 1).
ClusterModel kmeans(std::span<const MomentVector> features, int k, std::uint64_t seed);

/// Sweeps kmeans over the inclusive k_range and returns the k with the
/// largest interior second difference of the inertia curve (the knee). Ties
/// break toward smaller k; a flat curve (no strictly positive curvature)
/// falls back to the smallest k in range.
int elbow(std::span<const MomentVector> features, std::pair<int, int> k_range,
          std::uint64_t seed);

/// Picks exactly n_target item indices with balanced cluster representation:
/// clusters are visited in ascending size (ties toward the smaller cluster
/// id) and each receives min(cluster size, remaining quota / remaining
/// clusters), so the surplus of small clusters flows to larger ones. Members
/// are drawn without replacement per cluster; the result is sorted.
std::vector<std::size_t> balanced_select(std::span<const int> assignments,
                                         std::size_t n_target, std::uint64_t seed);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Uniform shuffle, then an 80:10:10 partition: val and test get floor(n/10)
/// each and the remainder trains. Partitions are returned sorted.
SplitIndices split(std::span<const std::size_t> indices, std::uint64_t seed);

}  // namespace flowsr
