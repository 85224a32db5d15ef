#include "flowsr/field.hpp"

#include <cmath>
#include <stdexcept>

namespace flowsr {

int GridSpec::extent(int axis) const {
    switch (axis) {
        case 1: return nx;
        case 2: return ny;
        case 3: return nz;
        default: throw std::invalid_argument("GridSpec::extent: axis must be 1..3");
    }
}

void GridSpec::validate() const {
    if (nx < 2 || ny < 2 || nz < 2)
        throw std::invalid_argument("GridSpec: extents must all be >= 2");
    if (!(dx > 0.0) || !std::isfinite(dx))
        throw std::invalid_argument("GridSpec: dx must be positive and finite");
}

namespace {

// Filters can legitimately produce single-voxel outputs (a 2^3 field at
// factor 2), so field storage accepts any positive extents; the >= 2
// contract of GridSpec::validate applies to ingest and stencil paths.
GridSpec checked_grid(GridSpec g) {
    if (g.nx < 1 || g.ny < 1 || g.nz < 1)
        throw std::invalid_argument("ScalarField3D: extents must be positive");
    if (!(g.dx > 0.0) || !std::isfinite(g.dx))
        throw std::invalid_argument("ScalarField3D: dx must be positive and finite");
    return g;
}

}  // namespace

ScalarField3D::ScalarField3D(GridSpec g, std::string unit_tag, double fill)
    : grid(checked_grid(g)), values(grid.voxel_count(), fill), unit(std::move(unit_tag)) {}

bool ScalarField3D::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void ScalarField3D::validate_shape() const {
    checked_grid(grid);
    if (values.size() != grid.voxel_count())
        throw std::invalid_argument("ScalarField3D: value count does not match grid extents");
}

void FlowState::validate() const {
    rho.validate_shape();
    for (const auto& comp : u) {
        comp.validate_shape();
        if (comp.grid != rho.grid)
            throw std::invalid_argument("FlowState: velocity grid differs from density grid");
        if (!comp.all_finite())
            throw std::invalid_argument("FlowState: velocity contains a non-finite value");
    }
    if (!rho.all_finite())
        throw std::invalid_argument("FlowState: density contains a non-finite value");
    for (double r : rho.values)
        if (!(r > 0.0))
            throw std::invalid_argument("FlowState: density must be strictly positive");
}

void ChannelStats::validate() const {
    if (!(rho_std > 0.0) || !(vel_std > 0.0))
        throw std::invalid_argument("ChannelStats: standard deviations must be positive");
    if (!std::isfinite(rho_mean) || !std::isfinite(rho_std) ||
        !std::isfinite(vel_mean) || !std::isfinite(vel_std))
        throw std::invalid_argument("ChannelStats: values must be finite");
}

namespace {

// Walk one axis of the flat layout without recomputing full indices:
// stride of +1 in x is ny*nz values, +1 in y is nz, +1 in z is 1.
std::size_t axis_stride(const GridSpec& g, int axis) {
    switch (axis) {
        case 1: return static_cast<std::size_t>(g.ny) * g.nz;
        case 2: return static_cast<std::size_t>(g.nz);
        case 3: return 1;
        default: throw std::invalid_argument("gradient: axis must be 1..3");
    }
}

}  // namespace

ScalarField3D gradient(const ScalarField3D& f, int axis) {
    f.validate_shape();
    const int n = f.grid.extent(axis);
    if (n < 3)
        throw std::invalid_argument("gradient: axis extent must be >= 3 for the interior stencil");

    ScalarField3D out(f.grid, f.unit.empty() ? "" : f.unit + "m-1");
    const std::size_t stride = axis_stride(f.grid, axis);
    const double inv2dx = 1.0 / (2.0 * f.grid.dx);
    const double invdx = 1.0 / f.grid.dx;

    for (int x = 0; x < f.grid.nx; ++x)
        for (int y = 0; y < f.grid.ny; ++y)
            for (int z = 0; z < f.grid.nz; ++z) {
                const std::size_t i = f.index(x, y, z);
                const int pos = (axis == 1) ? x : (axis == 2) ? y : z;
                if (pos == 0)
                    out.values[i] = (f.values[i + stride] - f.values[i]) * invdx;
                else if (pos == n - 1)
                    out.values[i] = (f.values[i] - f.values[i - stride]) * invdx;
                else
                    out.values[i] = (f.values[i + stride] - f.values[i - stride]) * inv2dx;
            }
    return out;
}

ScalarField3D divergence(const ScalarField3D& v1, const ScalarField3D& v2,
                         const ScalarField3D& v3) {
    if (v2.grid != v1.grid || v3.grid != v1.grid)
        throw std::invalid_argument("divergence: components must share one grid");
    ScalarField3D out = gradient(v1, 1);
    const ScalarField3D d2 = gradient(v2, 2);
    const ScalarField3D d3 = gradient(v3, 3);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += d2.values[i] + d3.values[i];
    return out;
}

FlowState normalize(const FlowState& state, const ChannelStats& stats) {
    stats.validate();
    FlowState out = state;
    for (double& v : out.rho.values) v = (v - stats.rho_mean) / stats.rho_std;
    for (auto& comp : out.u)
        for (double& v : comp.values) v = (v - stats.vel_mean) / stats.vel_std;
    return out;
}

FlowState denormalize(const FlowState& state, const ChannelStats& stats) {
    stats.validate();
    FlowState out = state;
    for (double& v : out.rho.values) v = v * stats.rho_std + stats.rho_mean;
    for (auto& comp : out.u)
        for (double& v : comp.values) v = v * stats.vel_std + stats.vel_mean;
    return out;
}

ChannelStats compute_stats(std::span<const FlowState> states) {
    if (states.empty())
        throw std::invalid_argument("compute_stats: empty sample set");

    double rho_sum = 0.0, vel_sum = 0.0;
    std::size_t n_rho = 0, n_vel = 0;
    for (const FlowState& s : states) {
        s.validate();
        for (double v : s.rho.values) rho_sum += v;
        n_rho += s.rho.values.size();
        for (const auto& comp : s.u) {
            for (double v : comp.values) vel_sum += v;
            n_vel += comp.values.size();
        }
    }

    ChannelStats st;
    st.rho_mean = rho_sum / static_cast<double>(n_rho);
    st.vel_mean = vel_sum / static_cast<double>(n_vel);

    // Second pass over centered values keeps the variance well conditioned
    // when the mean dwarfs the fluctuations.
    double rho_var = 0.0, vel_var = 0.0;
    for (const FlowState& s : states) {
        for (double v : s.rho.values) {
            const double d = v - st.rho_mean;
            rho_var += d * d;
        }
        for (const auto& comp : s.u)
            for (double v : comp.values) {
                const double d = v - st.vel_mean;
                vel_var += d * d;
            }
    }
    st.rho_std = std::sqrt(rho_var / static_cast<double>(n_rho));
    st.vel_std = std::sqrt(vel_var / static_cast<double>(n_vel));
    // Degenerate (zero-std) stats are returned as-is; normalize() rejects
    // them, which is where a constant channel actually becomes a problem.
    return st;
}

}  // namespace flowsr
