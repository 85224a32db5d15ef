#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "flowsr/field.hpp"

namespace flowsr {

enum class FlopsMode { sparse, dense };

/// Cost constants of applying the 64x64 coefficient map per output
/// voxel-channel, counting the polynomial evaluation on top of the sparse
/// (nonzero-only) or dense matrix product.
inline constexpr std::int64_t kSparseFlopsPerPoint = 2738;
inline constexpr std::int64_t kDenseFlopsPerPoint = 8328;

/// Finite-difference tricubic coefficient map.
///
/// The interpolant on a unit cell is p(x,y,z) = sum_{ijk<=3} a_ijk x^i y^j z^k.
/// The 64 coefficients come from imposing values, first derivatives (dx, dy,
/// dz), mixed second derivatives (dxy, dxz, dyz), and the mixed third
/// derivative (dxyz) at the 8 cell corners, with every derivative estimated
/// by unscaled central differences on the surrounding 4x4x4 stencil. Writing
/// those constraints as A1 * alpha = A2 * phi for the 64-vector phi of
/// stencil values gives 8*alpha = B * phi with B = 8 * A1^{-1} A2 an exact
/// integer matrix; `weights` stores that integer form and callers divide by
/// 8 once per evaluation.
///
/// Index conventions: coefficient row = i + 4j + 16k; stencil column
/// s = p + 4q + 16r for stencil offsets p,q,r in 0..3 (x fastest), with the
/// base cell corner sitting at stencil point (1,1,1).
struct TricubicCoefMatrix {
    std::array<std::array<std::int64_t, 64>, 64> weights{};
    int nnz = 0;

    int zero_count() const { return 64 * 64 - nnz; }

    struct SparseEntry {
        std::uint8_t col;
        std::int32_t w;
    };
    std::array<std::vector<SparseEntry>, 64> rows;  // nonzeros, row-wise
};

/// Builds the coefficient map from scratch: assembles A1 and A2, solves for
/// B, rounds to integers, and re-verifies A1*B = A2 in exact integer
/// arithmetic. Throws std::logic_error if the verification fails.
TricubicCoefMatrix build_coef_matrix();

/// Shared singleton of build_coef_matrix().
const TricubicCoefMatrix& coef_matrix();

/// Evaluates the tricubic interpolant at unit-cell coordinates (x,y,z) in
/// [0,1]^3 from a 4x4x4 stencil flattened as s = p + 4q + 16r. The sparse
/// and dense modes differ only in how the coefficient product is iterated;
/// their results agree to rounding.
double interpolate_cell(std::span<const double, 64> stencil, double x, double y, double z,
                        FlopsMode mode = FlopsMode::sparse);

/// Integer upsampling: the output grid is `factor` times denser per axis
/// (spacing dx/factor) and fine voxel center i maps to coarse coordinate
/// (i + 0.5)/factor - 0.5 (cell-centered alignment, the inverse of block
/// averaging). Stencil indices are clamped at the domain faces, which
/// replicates the edge planes. Requires factor >= 2 and at least 4 source
/// voxels per axis.
ScalarField3D upsample(const ScalarField3D& field, int factor,
                       FlopsMode mode = FlopsMode::sparse);

/// Channel-wise upsample of density and the three velocity components.
/// Interpolation can overshoot; if the reconstructed density dips to zero or
/// below anywhere the result violates the state contract and this throws.
FlowState upsample_state(const FlowState& state, int factor,
                         FlopsMode mode = FlopsMode::sparse);

/// Exact operation count for upsampling onto `grid` (the output grid) with
/// n_channels channels: per-point cost constant x nx*ny*nz * n_channels.
std::uint64_t flops(const GridSpec& grid, int n_channels, FlopsMode mode);

}  // namespace flowsr
