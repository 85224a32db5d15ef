#include "flowsr/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowsr {

void CubeSymmetry::validate() const {
    std::array<int, 3> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2})
        throw std::invalid_argument("CubeSymmetry: perm must be a permutation of {0,1,2}");
    for (int s : signs)
        if (s != 1 && s != -1)
            throw std::invalid_argument("CubeSymmetry: signs must be +1 or -1");
}

bool CubeSymmetry::is_rotation() const {
    validate();
    // Permutation parity: count inversions of the 3-element permutation.
    int parity = 1;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (perm[i] > perm[j]) parity = -parity;
    return parity * signs[0] * signs[1] * signs[2] == 1;
}

CubeSymmetry CubeSymmetry::inverse() const {
    validate();
    CubeSymmetry inv;
    for (int k = 0; k < 3; ++k) {
        inv.perm[perm[k]] = k;
        inv.signs[perm[k]] = signs[k];
    }
    return inv;
}

CubeSymmetry compose(const CubeSymmetry& h, const CubeSymmetry& g) {
    h.validate();
    g.validate();
    // Matrix product R_h * R_g evaluated on the sparse representation.
    CubeSymmetry out;
    for (int k = 0; k < 3; ++k) {
        out.perm[k] = g.perm[h.perm[k]];
        out.signs[k] = h.signs[k] * g.signs[h.perm[k]];
    }
    return out;
}

std::array<CubeSymmetry, 48> all_symmetries() {
    constexpr std::array<std::array<int, 3>, 6> kPerms = {{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
    }};
    std::array<CubeSymmetry, 48> out;
    int idx = 0;
    for (const auto& perm : kPerms)
        for (int mask = 0; mask < 8; ++mask) {
            CubeSymmetry g;
            g.perm = perm;
            for (int k = 0; k < 3; ++k) g.signs[k] = (mask >> k) & 1 ? -1 : 1;
            out[idx++] = g;
        }
    return out;
}

CubeSymmetry random_symmetry(std::mt19937_64& gen, bool rotations_only) {
    // gen() % n rather than a distribution object: the standard pins down
    // the mt19937_64 stream but not distribution algorithms, and this draw
    // must replay identically everywhere.
    if (!rotations_only)
        return all_symmetries()[static_cast<std::size_t>(gen() % 48)];
    std::array<CubeSymmetry, 24> rotations;
    std::size_t n = 0;
    for (const CubeSymmetry& g : all_symmetries())
        if (g.is_rotation()) rotations[n++] = g;
    return rotations[static_cast<std::size_t>(gen() % 24)];
}

CubeSymmetry random_symmetry(std::uint64_t seed, bool rotations_only) {
    std::mt19937_64 gen(seed);
    return random_symmetry(gen, rotations_only);
}

namespace {

bool is_identity_perm(const std::array<int, 3>& perm) {
    return perm == std::array<int, 3>{0, 1, 2};
}

/// Source index along each input axis for output voxel (o0,o1,o2):
/// i[perm[k]] = o_k, reversed along that axis when signs[k] < 0.
std::array<int, 3> source_index(const CubeSymmetry& g, const std::array<int, 3>& n_in, int o0,
                                int o1, int o2) {
    const std::array<int, 3> o{o0, o1, o2};
    std::array<int, 3> i{};
    for (int k = 0; k < 3; ++k) {
        const int axis = g.perm[k];
        i[axis] = g.signs[k] > 0 ? o[k] : n_in[axis] - 1 - o[k];
    }
    return i;
}

}  // namespace

ScalarField3D apply(const ScalarField3D& f, const CubeSymmetry& g) {
    g.validate();
    f.validate_shape();
    if (!is_identity_perm(g.perm) && (f.grid.nx != f.grid.ny || f.grid.ny != f.grid.nz))
        throw std::invalid_argument("apply: axis-permuting symmetry requires a cubic grid");

    const std::array<int, 3> n_in{f.grid.nx, f.grid.ny, f.grid.nz};
    const GridSpec out_grid{n_in[g.perm[0]], n_in[g.perm[1]], n_in[g.perm[2]], f.grid.dx};
    ScalarField3D out(out_grid, f.unit);
    for (int o0 = 0; o0 < out_grid.nx; ++o0)
        for (int o1 = 0; o1 < out_grid.ny; ++o1)
            for (int o2 = 0; o2 < out_grid.nz; ++o2) {
                const auto i = source_index(g, n_in, o0, o1, o2);
                out(o0, o1, o2) = f(i[0], i[1], i[2]);
            }
    return out;
}

FlowState apply(const FlowState& state, const CubeSymmetry& g) {
    state.validate();
    FlowState out;
    out.rho = apply(state.rho, g);
    for (int k = 0; k < 3; ++k) {
        // Output component k draws from input component perm[k], gathered
        // through the same index map and scaled by the component sign.
        out.u[k] = apply(state.u[g.perm[k]], g);
        if (g.signs[k] < 0)
            for (double& v : out.u[k].values) v = -v;
    }
    return out;
}

double verify_continuity(const FlowState& state, const CubeSymmetry& g) {
    state.validate();
    const GridSpec& gr = state.grid();
    if (gr.nx < 3 || gr.ny < 3 || gr.nz < 3)
        throw std::invalid_argument("verify_continuity: need at least 3 voxels per axis");

    const auto momentum = [](const FlowState& s) {
        std::array<ScalarField3D, 3> m;
        for (int k = 0; k < 3; ++k) {
            m[k] = s.u[k];
            for (std::size_t i = 0; i < m[k].values.size(); ++i)
                m[k].values[i] *= s.rho.values[i];
        }
        return m;
    };

    const auto m0 = momentum(state);
    const ScalarField3D div0 = divergence(m0[0], m0[1], m0[2]);
    const ScalarField3D div0_mapped = apply(div0, g);

    const FlowState transformed = apply(state, g);
    const auto m1 = momentum(transformed);
    const ScalarField3D div1 = divergence(m1[0], m1[1], m1[2]);

    double max_dev = 0.0;
    for (int x = 1; x < div1.grid.nx - 1; ++x)
        for (int y = 1; y < div1.grid.ny - 1; ++y)
            for (int z = 1; z < div1.grid.nz - 1; ++z)
                max_dev = std::max(max_dev,
                                   std::abs(div0_mapped(x, y, z) - div1(x, y, z)));
    return max_dev;
}

}  // namespace flowsr
