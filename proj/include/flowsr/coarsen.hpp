#pragma once

#include <array>

#include "flowsr/field.hpp"

namespace flowsr {

/// Filter width in fine voxels per axis. The width doubles as the
/// downsampling factor: each coarse voxel covers one factor^3 block.
struct FilterSpec {
    int factor = 8;

    /// Throws std::invalid_argument unless factor is one of {2,4,8,16,32}
    /// and divides every extent of `grid` exactly.
    void validate_for(const GridSpec& grid) const;
};

/// Symmetric subgrid-scale stress tensor on the coarse grid. Components are
/// stored once each in the order (11,22,33,12,13,23).
struct SgsTensorField {
    std::array<ScalarField3D, 6> comp;

    static int index_of(int i, int j);
    const ScalarField3D& operator()(int i, int j) const { return comp[index_of(i, j)]; }
    ScalarField3D& operator()(int i, int j) { return comp[index_of(i, j)]; }

    const GridSpec& grid() const { return comp[0].grid; }
};

/// Block mean: each coarse voxel is the arithmetic mean of its factor^3 fine
/// block. The coarse spacing is factor * fine spacing.
ScalarField3D box_filter(const ScalarField3D& f, const FilterSpec& spec);

/// Density-weighted (Favre) filter: rho_bar = box(rho),
/// u_tilde_k = box(rho*u_k) / rho_bar. Density positivity keeps the divisor
/// safe.
FlowState favre_filter(const FlowState& state, const FilterSpec& spec);

/// tau_ij = rho_bar * (Favre(u_i u_j) - u_tilde_i u_tilde_j), evaluated as
/// the block mean of rho*(u_i - u_tilde_i)*(u_j - u_tilde_j). The two forms
/// agree algebraically; the fluctuation form keeps the diagonal entries
/// nonnegative in floating point as well.
SgsTensorField sgs_stress(const FlowState& fine, const FilterSpec& spec);

/// Row divergence (div tau)_k = sum_j d(tau_kj)/dx_j with the shared
/// difference stencils at the coarse spacing. Requires >= 3 coarse voxels
/// per axis.
std::array<ScalarField3D, 3> sgs_divergence(const FlowState& fine, const FilterSpec& spec);
std::array<ScalarField3D, 3> sgs_divergence(const SgsTensorField& tau);

}  // namespace flowsr
