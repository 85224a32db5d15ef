#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "flowsr/field.hpp"

namespace flowsr {

/// One of the 48 symmetries of the cube, stored as a signed axis
/// permutation. The element acts on vectors as the orthogonal matrix R with
/// R[k][perm[k]] = signs[k] (all other entries zero):
///
///   (R v)_k = signs[k] * v[perm[k]]
///
/// and on fields by f'(x) = f(R^-1 x). Lattice points map to lattice points,
/// so applying an element is an exact index gather: along axis perm[k] the
/// source index is the output index k, reversed when signs[k] is negative.
struct CubeSymmetry {
    std::array<int, 3> perm{0, 1, 2};
    std::array<int, 3> signs{1, 1, 1};

    bool operator==(const CubeSymmetry&) const = default;

    static CubeSymmetry identity() { return {}; }

    /// Throws std::invalid_argument unless perm is a permutation of {0,1,2}
    /// and every sign is +1 or -1.
    void validate() const;

    /// det R = +1 (proper rotation) vs -1 (includes a reflection).
    bool is_rotation() const;

    CubeSymmetry inverse() const;
};

/// Group product "h after g": apply(state, compose(h, g)) equals
/// apply(apply(state, g), h).
CubeSymmetry compose(const CubeSymmetry& h, const CubeSymmetry& g);

/// All 48 elements in a fixed order: the 6 axis permutations in lexicographic
/// order, each with the 8 sign patterns counted in binary (bit k set means
/// signs[k] = -1). Element 0 is the identity.
std::array<CubeSymmetry, 48> all_symmetries();

/// Uniform draw over the 48 elements (or the 24 proper rotations). Driven by
/// explicit modular draws from the generator so the sequence is identical on
/// every platform.
CubeSymmetry random_symmetry(std::mt19937_64& gen, bool rotations_only = false);
CubeSymmetry random_symmetry(std::uint64_t seed, bool rotations_only = false);

/// Transforms a scalar field by pure index gather. Axis-permuting elements
/// require a cubic grid.
ScalarField3D apply(const ScalarField3D& f, const CubeSymmetry& g);

/// Transforms a flow state: density as a scalar, velocity with the
/// additional component permutation and sign so that derived scalars like
/// div(rho u) transform as scalars.
FlowState apply(const FlowState& state, const CubeSymmetry& g);

/// Equivariance check for the continuity term: computes D = div(rho u) on
/// the input, transforms D as a scalar, recomputes D on the transformed
/// state, and returns the max abs difference over interior voxels (the
/// one-sided boundary stencils are excluded).
double verify_continuity(const FlowState& state, const CubeSymmetry& g);

}  // namespace flowsr
