#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flowsr {

/// Uniform Cartesian lattice. Spacing is identical on all three axes.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    double dx = 1.0;

    bool operator==(const GridSpec&) const = default;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }

    /// Extent along axis 1..3.
    int extent(int axis) const;

    /// Throws std::invalid_argument unless nx,ny,nz >= 2 and dx > 0.
    void validate() const;
};

/// Scalar samples on a GridSpec. Values are stored flat with z fastest:
/// index = (x*ny + y)*nz + z, matching a C-order reshape of dims [nx,ny,nz].
/// Arithmetic is done in double; file interchange narrows to binary32.
/// Storage accepts any positive extents (filters may emit single-voxel
/// outputs); operations that need neighbors enforce their own minimums.
struct ScalarField3D {
    GridSpec grid;
    std::vector<double> values;
    std::string unit;  // free-form SI tag, e.g. "kgm-3", "ms-1"

    ScalarField3D() = default;
    ScalarField3D(GridSpec g, std::string unit_tag = "", double fill = 0.0);

    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(x) * grid.ny + y) * grid.nz + z;
    }
    double operator()(int x, int y, int z) const { return values[index(x, y, z)]; }
    double& operator()(int x, int y, int z) { return values[index(x, y, z)]; }

    bool all_finite() const;

    /// Throws std::invalid_argument if values.size() != grid.voxel_count().
    void validate_shape() const;
};

/// Density plus three velocity components on one shared grid.
struct FlowState {
    ScalarField3D rho;
    std::array<ScalarField3D, 3> u;

    const GridSpec& grid() const { return rho.grid; }

    /// Throws unless all four fields share one grid, have the right length,
    /// are finite, and rho is strictly positive everywhere.
    void validate() const;
};

/// Channel normalization constants. One shared pair serves all three
/// velocity components so that axis-swapping augmentations stay consistent.
struct ChannelStats {
    double rho_mean = 0.0;
    double rho_std = 1.0;
    double vel_mean = 0.0;
    double vel_std = 1.0;

    /// Throws std::invalid_argument unless both stds are strictly positive.
    void validate() const;
};

/// Second-order central differences at interior voxels, first-order
/// one-sided at the two boundary planes. axis is 1..3; the axis extent
/// must be >= 3. Result unit is unit(f) per meter.
ScalarField3D gradient(const ScalarField3D& f, int axis);

/// Sum of gradient(v_k, k) over the three axes. All fields must share a grid.
ScalarField3D divergence(const ScalarField3D& v1, const ScalarField3D& v2,
                         const ScalarField3D& v3);

/// rho' = (rho - rho_mean)/rho_std, u_k' = (u_k - vel_mean)/vel_std.
FlowState normalize(const FlowState& state, const ChannelStats& stats);

/// Exact inverse of normalize up to floating rounding.
FlowState denormalize(const FlowState& state, const ChannelStats& stats);

/// Pooled statistics over a sample set: rho over all density voxels, the
/// velocity pair over all voxels of all three components. Population
/// standard deviation. Throws on an empty sequence.
ChannelStats compute_stats(std::span<const FlowState> states);

}  // namespace flowsr
