#include "flowsr/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace flowsr {

std::vector<FlowState> extract_subvolumes(const FlowState& state, int size) {
    state.validate();
    const GridSpec& g = state.grid();
    if (size < 2)
        throw std::invalid_argument("extract_subvolumes: size must be >= 2");
    if (size > g.nx || size > g.ny || size > g.nz)
        throw std::invalid_argument("extract_subvolumes: size exceeds a grid extent");

    const int bx = g.nx / size, by = g.ny / size, bz = g.nz / size;
    std::vector<FlowState> out;
    out.reserve(static_cast<std::size_t>(bx) * by * bz);
    for (int ox = 0; ox < bx; ++ox)
        for (int oy = 0; oy < by; ++oy)
            for (int oz = 0; oz < bz; ++oz) {
                FlowState sub;
                const GridSpec sg{size, size, size, g.dx};
                sub.rho = ScalarField3D(sg, state.rho.unit);
                for (int k = 0; k < 3; ++k) sub.u[k] = ScalarField3D(sg, state.u[k].unit);
                for (int x = 0; x < size; ++x)
                    for (int y = 0; y < size; ++y)
                        for (int z = 0; z < size; ++z) {
                            const std::size_t src =
                                state.rho.index(ox * size + x, oy * size + y, oz * size + z);
                            const std::size_t dst = sub.rho.index(x, y, z);
                            sub.rho.values[dst] = state.rho.values[src];
                            for (int k = 0; k < 3; ++k)
                                sub.u[k].values[dst] = state.u[k].values[src];
                        }
                out.push_back(std::move(sub));
            }
    return out;
}

MomentVector moments(const FlowState& state) {
    state.validate();
    MomentVector mv;
    const double n = static_cast<double>(state.grid().voxel_count());
    for (int comp = 0; comp < 3; ++comp) {
        const std::vector<double>& u = state.u[comp].values;
        double mean = 0.0;
        for (double v : u) mean += v;
        mean /= n;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double v : u) {
            const double d = v - mean;
            const double d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        mv.v[4 * comp] = mean;
        mv.v[4 * comp + 1] = m2;
        if (m2 > 0.0) {
            mv.v[4 * comp + 2] = m3 / std::pow(m2, 1.5);
            mv.v[4 * comp + 3] = m4 / (m2 * m2);
        } else {
            mv.v[4 * comp + 2] = 0.0;  // degenerate channel: Gaussian-reference
            mv.v[4 * comp + 3] = 3.0;  // values by convention
        }
    }
    return mv;
}

namespace {

constexpr int kMaxLloydIters = 300;
constexpr int kRestarts = 10;

using Feature = std::array<double, MomentVector::kDim>;

/// 53-bit uniform double in [0,1) from the raw generator word.
double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double sq_dist(const Feature& a, const Feature& b) {
    double d = 0.0;
    for (int i = 0; i < MomentVector::kDim; ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

struct LloydResult {
    std::vector<Feature> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
};

int nearest_centroid(const Feature& x, const std::vector<Feature>& centroids) {
    int best = 0;
    double best_d = sq_dist(x, centroids[0]);
    for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
        const double d = sq_dist(x, centroids[c]);
        if (d < best_d) {  // strict: ties stay with the lower index
            best_d = d;
            best = c;
        }
    }
    return best;
}

double total_inertia(const std::vector<Feature>& pts, const std::vector<Feature>& centroids,
                     const std::vector<int>& assign) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) total += sq_dist(pts[i], centroids[assign[i]]);
    return total;
}

/// k-means++ seeding: first center uniform, the rest drawn with probability
/// proportional to the squared distance to the nearest chosen center. When
/// every remaining point coincides with a center the draw degenerates; the
/// smallest unchosen index is taken instead so centers stay distinct.
std::vector<Feature> seed_centroids(const std::vector<Feature>& pts, int k,
                                    std::mt19937_64& gen) {
    const std::size_t n = pts.size();
    std::vector<Feature> centroids;
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::max());

    std::size_t first = static_cast<std::size_t>(gen() % n);
    centroids.push_back(pts[first]);
    chosen[first] = true;

    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(pts[i], centroids.back()));
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double threshold = uniform01(gen) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > threshold) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = n - 1;  // rounding pushed the walk past the end
        } else {
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            if (pick == n) pick = static_cast<std::size_t>(gen() % n);
        }
        chosen[pick] = true;
        centroids.push_back(pts[pick]);
    }
    return centroids;
}

LloydResult lloyd(const std::vector<Feature>& pts, int k, std::mt19937_64& gen) {
    const std::size_t n = pts.size();
    LloydResult res;
    res.centroids = seed_centroids(pts, k, gen);
    res.assignments.assign(n, -1);

    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < kMaxLloydIters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = nearest_centroid(pts[i], res.centroids);
            if (c != res.assignments[i]) {
                res.assignments[i] = c;
                changed = true;
            }
        }

        std::vector<Feature> sums(k, Feature{});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < MomentVector::kDim; ++d)
                sums[res.assignments[i]][d] += pts[i][d];
            ++counts[res.assignments[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0)
                for (int d = 0; d < MomentVector::kDim; ++d)
                    res.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);

        // An empty cluster captures the point farthest from its centroid;
        // relocating one point to its own center can only lower the SSE.
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t worst = 0;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[res.assignments[i]] <= 1) continue;
                const double d = sq_dist(pts[i], res.centroids[res.assignments[i]]);
                if (d > worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            --counts[res.assignments[worst]];
            res.assignments[worst] = c;
            counts[c] = 1;
            res.centroids[c] = pts[worst];
            changed = true;
        }

        const double inertia = total_inertia(pts, res.centroids, res.assignments);
        if (inertia > prev_inertia * (1.0 + 1e-12) + 1e-12)
            throw std::logic_error("kmeans: inertia increased across a Lloyd iteration");
        prev_inertia = inertia;
        if (!changed) break;
    }
    res.inertia = prev_inertia;
    return res;
}

}  // namespace

ClusterModel kmeans(std::span<const MomentVector> features, int k, std::uint64_t seed) {
    if (features.empty())
        throw std::invalid_argument("kmeans: empty feature set");
    if (k < 1 || static_cast<std::size_t>(k) > features.size())
        throw std::invalid_argument("kmeans: k must satisfy 1 <= k <= " +
                                    std::to_string(features.size()));

    // Per-dimension z-scoring; constant dimensions are centered only.
    ClusterModel model;
    model.k = k;
    const std::size_t n = features.size();
    for (int d = 0; d < MomentVector::kDim; ++d) {
        double mean = 0.0;
        for (const MomentVector& f : features) mean += f.v[d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const MomentVector& f : features) {
            const double t = f.v[d] - mean;
            var += t * t;
        }
        var /= static_cast<double>(n);
        model.feature_mean[d] = mean;
        model.feature_std[d] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    std::vector<Feature> pts(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < MomentVector::kDim; ++d)
            pts[i][d] = (features[i].v[d] - model.feature_mean[d]) / model.feature_std[d];

    std::mt19937_64 gen(seed);
    LloydResult best;
    best.inertia = std::numeric_limits<double>::max();
    for (int r = 0; r < kRestarts; ++r) {
        LloydResult cur = lloyd(pts, k, gen);
        if (cur.inertia < best.inertia) best = std::move(cur);  // ties keep the earlier restart
    }

    model.centroids = std::move(best.centroids);
    model.assignments = std::move(best.assignments);
    model.inertia = best.inertia;
    return model;
}

int elbow(std::span<const MomentVector> features, std::pair<int, int> k_range,
          std::uint64_t seed) {
    const auto [lo, hi] = k_range;
    if (lo < 1 || hi < lo)
        throw std::invalid_argument("elbow: k_range must satisfy 1 <= lo <= hi");
    if (static_cast<std::size_t>(hi) > features.size())
        throw std::invalid_argument("elbow: k_range upper bound exceeds the sample count");

    std::vector<double> inertia;
    for (int k = lo; k <= hi; ++k)
        inertia.push_back(kmeans(features, k, seed).inertia);

    // Knee = largest positive curvature of the inertia curve. Strictly-greater
    // comparison breaks ties toward smaller k; a curve with no positive
    // curvature (flat or degenerate) yields the smallest k in range.
    int best_k = lo;
    double best_d2 = 0.0;
    for (int k = lo + 1; k <= hi - 1; ++k) {
        const std::size_t i = static_cast<std::size_t>(k - lo);
        const double d2 = inertia[i - 1] - 2.0 * inertia[i] + inertia[i + 1];
        if (d2 > best_d2) {
            best_d2 = d2;
            best_k = k;
        }
    }
    return best_k;
}

std::vector<std::size_t> balanced_select(std::span<const int> assignments,
                                         std::size_t n_target, std::uint64_t seed) {
    const std::size_t n = assignments.size();
    if (n_target > n)
        throw std::invalid_argument("balanced_select: n_target exceeds the item count");
    int max_cluster = -1;
    for (int a : assignments) {
        if (a < 0) throw std::invalid_argument("balanced_select: negative cluster index");
        max_cluster = std::max(max_cluster, a);
    }

    // Bucket item indices per cluster (original order within each bucket).
    std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(max_cluster) + 1);
    for (std::size_t i = 0; i < n; ++i) buckets[assignments[i]].push_back(i);

    // Visit nonempty clusters small-to-large so their spare capacity flows to
    // the larger ones; each takes min(size, remaining/remaining_clusters).
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < buckets.size(); ++c)
        if (!buckets[c].empty()) order.push_back(c);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return buckets[a].size() < buckets[b].size();
    });

    std::mt19937_64 gen(seed);
    std::vector<std::size_t> picked;
    std::size_t remaining = n_target;
    std::size_t clusters_left = order.size();
    for (std::size_t c : order) {
        std::size_t fair = remaining / clusters_left;
        if (clusters_left == 1) fair = remaining;  // last cluster absorbs the remainder
        const std::size_t quota = std::min(buckets[c].size(), fair);
        std::vector<std::size_t>& items = buckets[c];
        // Partial Fisher-Yates with explicit modular draws: the standard
        // library shuffle is implementation-defined and would break seed
        // reproducibility across toolchains.
        for (std::size_t i = 0; i < quota; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(gen() % (items.size() - i));
            std::swap(items[i], items[j]);
            picked.push_back(items[i]);
        }
        remaining -= quota;
        --clusters_left;
    }
    if (remaining > 0) {
        // Quotas were capped by cluster sizes in a way integer fair shares
        // could not redistribute; sweep again largest-first for the rest.
        for (auto it = order.rbegin(); it != order.rend() && remaining > 0; ++it) {
            std::vector<std::size_t>& items = buckets[*it];
            std::size_t already = 0;
            for (std::size_t i : picked)
                if (assignments[i] == static_cast<int>(*it)) ++already;
            while (already < items.size() && remaining > 0) {
                const std::size_t j =
                    already + static_cast<std::size_t>(gen() % (items.size() - already));
                std::swap(items[already], items[j]);
                picked.push_back(items[already]);
                ++already;
                --remaining;
            }
        }
    }

    std::sort(picked.begin(), picked.end());
    return picked;
}

SplitIndices split(std::span<const std::size_t> indices, std::uint64_t seed) {
    std::vector<std::size_t> pool(indices.begin(), indices.end());
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i + 1 < pool.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }

    const std::size_t n = pool.size();
    const std::size_t n_val = n / 10;
    const std::size_t n_test = n / 10;
    const std::size_t n_train = n - n_val - n_test;

    SplitIndices out;
    out.train.assign(pool.begin(), pool.begin() + n_train);
    out.val.assign(pool.begin() + n_train, pool.begin() + n_train + n_val);
    out.test.assign(pool.begin() + n_train + n_val, pool.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace flowsr
