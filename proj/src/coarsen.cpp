#include "flowsr/coarsen.hpp"

#include <stdexcept>
#include <string>

namespace flowsr {

void FilterSpec::validate_for(const GridSpec& grid) const {
    grid.validate();
    if (factor != 2 && factor != 4 && factor != 8 && factor != 16 && factor != 32)
        throw std::invalid_argument("FilterSpec: factor must be one of {2,4,8,16,32}");
    if (grid.nx % factor != 0 || grid.ny % factor != 0 || grid.nz % factor != 0)
        throw std::invalid_argument("FilterSpec: factor " + std::to_string(factor) +
                                    " does not divide grid " + std::to_string(grid.nx) + "x" +
                                    std::to_string(grid.ny) + "x" + std::to_string(grid.nz));
}

int SgsTensorField::index_of(int i, int j) {
    if (i < 0 || i > 2 || j < 0 || j > 2)
        throw std::invalid_argument("SgsTensorField: component indices must be 0..2");
    if (i == j) return i;
    const int lo = std::min(i, j), hi = std::max(i, j);
    if (lo == 0) return hi == 1 ? 3 : 4;  // (0,1) -> 3, (0,2) -> 4
    return 5;                             // (1,2) -> 5
}

namespace {

GridSpec coarse_grid(const GridSpec& fine, int factor) {
    return GridSpec{fine.nx / factor, fine.ny / factor, fine.nz / factor, fine.dx * factor};
}

/// Visits every fine voxel of the block belonging to coarse voxel (cx,cy,cz).
template <typename Fn>
void for_block(const GridSpec& fine, int factor, int cx, int cy, int cz, Fn&& fn) {
    for (int ix = cx * factor; ix < (cx + 1) * factor; ++ix)
        for (int iy = cy * factor; iy < (cy + 1) * factor; ++iy)
            for (int iz = cz * factor; iz < (cz + 1) * factor; ++iz)
                fn((static_cast<std::size_t>(ix) * fine.ny + iy) * fine.nz + iz);
}

}  // namespace

ScalarField3D box_filter(const ScalarField3D& f, const FilterSpec& spec) {
    f.validate_shape();
    spec.validate_for(f.grid);

    ScalarField3D out(coarse_grid(f.grid, spec.factor), f.unit);
    const double inv_block = 1.0 / (static_cast<double>(spec.factor) * spec.factor * spec.factor);
    for (int cx = 0; cx < out.grid.nx; ++cx)
        for (int cy = 0; cy < out.grid.ny; ++cy)
            for (int cz = 0; cz < out.grid.nz; ++cz) {
                double sum = 0.0;
                for_block(f.grid, spec.factor, cx, cy, cz,
                          [&](std::size_t i) { sum += f.values[i]; });
                out(cx, cy, cz) = sum * inv_block;
            }
    return out;
}

FlowState favre_filter(const FlowState& state, const FilterSpec& spec) {
    state.validate();
    spec.validate_for(state.grid());

    FlowState out;
    out.rho = ScalarField3D(coarse_grid(state.grid(), spec.factor), state.rho.unit);
    for (int k = 0; k < 3; ++k)
        out.u[k] = ScalarField3D(out.rho.grid, state.u[k].unit);

    for (int cx = 0; cx < out.rho.grid.nx; ++cx)
        for (int cy = 0; cy < out.rho.grid.ny; ++cy)
            for (int cz = 0; cz < out.rho.grid.nz; ++cz) {
                double rho_sum = 0.0;
                std::array<double, 3> mom_sum{0.0, 0.0, 0.0};
                for_block(state.grid(), spec.factor, cx, cy, cz, [&](std::size_t i) {
                    const double r = state.rho.values[i];
                    rho_sum += r;
                    for (int k = 0; k < 3; ++k) mom_sum[k] += r * state.u[k].values[i];
                });
                const double block = static_cast<double>(spec.factor) * spec.factor * spec.factor;
                out.rho(cx, cy, cz) = rho_sum / block;
                // Density-weighted mean: the block volume cancels between
                // numerator and denominator.
                for (int k = 0; k < 3; ++k) out.u[k](cx, cy, cz) = mom_sum[k] / rho_sum;
            }
    return out;
}

SgsTensorField sgs_stress(const FlowState& fine, const FilterSpec& spec) {
    fine.validate();
    spec.validate_for(fine.grid());

    const FlowState coarse = favre_filter(fine, spec);
    SgsTensorField tau;
    for (auto& c : tau.comp) c = ScalarField3D(coarse.grid(), "kgm-1s-2");

    const double inv_block = 1.0 / (static_cast<double>(spec.factor) * spec.factor * spec.factor);
    for (int cx = 0; cx < coarse.grid().nx; ++cx)
        for (int cy = 0; cy < coarse.grid().ny; ++cy)
            for (int cz = 0; cz < coarse.grid().nz; ++cz) {
                const std::array<double, 3> ut = {coarse.u[0](cx, cy, cz),
                                                  coarse.u[1](cx, cy, cz),
                                                  coarse.u[2](cx, cy, cz)};
                std::array<double, 6> sum{};
                for_block(fine.grid(), spec.factor, cx, cy, cz, [&](std::size_t i) {
                    const double r = fine.rho.values[i];
                    const std::array<double, 3> du = {fine.u[0].values[i] - ut[0],
                                                      fine.u[1].values[i] - ut[1],
                                                      fine.u[2].values[i] - ut[2]};
                    for (int a = 0; a < 3; ++a)
                        for (int b = a; b < 3; ++b)
                            sum[SgsTensorField::index_of(a, b)] += r * du[a] * du[b];
                });
                for (int c = 0; c < 6; ++c)
                    tau.comp[c](cx, cy, cz) = sum[c] * inv_block;
            }
    return tau;
}

std::array<ScalarField3D, 3> sgs_divergence(const SgsTensorField& tau) {
    const GridSpec& g = tau.grid();
    if (g.nx < 3 || g.ny < 3 || g.nz < 3)
        throw std::invalid_argument("sgs_divergence: need at least 3 coarse voxels per axis");

    std::array<ScalarField3D, 3> div;
    for (int k = 0; k < 3; ++k) {
        div[k] = gradient(tau(k, 0), 1);
        const ScalarField3D d2 = gradient(tau(k, 1), 2);
        const ScalarField3D d3 = gradient(tau(k, 2), 3);
        for (std::size_t i = 0; i < div[k].values.size(); ++i)
            div[k].values[i] += d2.values[i] + d3.values[i];
        div[k].unit = "kgm-2s-2";
    }
    return div;
}

std::array<ScalarField3D, 3> sgs_divergence(const FlowState& fine, const FilterSpec& spec) {
    return sgs_divergence(sgs_stress(fine, spec));
}

}  // namespace flowsr
