#include "flowsr/tricubic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flowsr {

namespace {

// Constraint rows come in eight blocks of eight corners each:
// values, d/dx, d/dy, d/dz, d2/dxdy, d2/dxdz, d2/dydz, d3/dxdydz.
// kDerivAxes[q] marks which axes block q differentiates.
constexpr std::array<std::array<int, 3>, 8> kDerivAxes = {{
    {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1},
}};

/// d-th derivative of t^e evaluated at t = c (c in {0,1}), as an integer.
std::int64_t mono_deriv(int c, int e, int d) {
    if (d > e) return 0;
    std::int64_t coeff = 1;
    for (int m = e; m > e - d; --m) coeff *= m;  // e!/(e-d)!
    const int rem = e - d;
    if (rem == 0) return coeff;
    return c == 0 ? 0 : coeff;  // c^rem with c in {0,1}
}

/// A1[row][col]: the (derivative, corner) constraint applied to monomial
/// x^i y^j z^k, col = i + 4j + 16k, corner c = cx + 2cy + 4cz, row = 8q + c.
std::array<std::array<std::int64_t, 64>, 64> build_a1() {
    std::array<std::array<std::int64_t, 64>, 64> a1{};
    for (int q = 0; q < 8; ++q)
        for (int c = 0; c < 8; ++c) {
            const int row = 8 * q + c;
            const int cx = c & 1, cy = (c >> 1) & 1, cz = (c >> 2) & 1;
            for (int k = 0; k < 4; ++k)
                for (int j = 0; j < 4; ++j)
                    for (int i = 0; i < 4; ++i)
                        a1[row][i + 4 * j + 16 * k] = mono_deriv(cx, i, kDerivAxes[q][0]) *
                                                      mono_deriv(cy, j, kDerivAxes[q][1]) *
                                                      mono_deriv(cz, k, kDerivAxes[q][2]);
        }
    return a1;
}

/// A2[row][s]: extracts the same constraint quantities from the 4x4x4
/// stencil by unscaled central differences, pre-multiplied by 8 so every
/// entry is an integer. Corner c sits at stencil point (cx+1, cy+1, cz+1);
/// each differentiated axis contributes offsets -1/+1 with weight -1/+1 and
/// halves the 8x prefactor.
std::array<std::array<std::int64_t, 64>, 64> build_a2() {
    std::array<std::array<std::int64_t, 64>, 64> a2{};
    for (int q = 0; q < 8; ++q) {
        const auto& d = kDerivAxes[q];
        const int order = d[0] + d[1] + d[2];
        const std::int64_t scale = 8 >> order;  // 8 / 2^order
        for (int c = 0; c < 8; ++c) {
            const int row = 8 * q + c;
            const std::array<int, 3> base = {(c & 1) + 1, ((c >> 1) & 1) + 1, ((c >> 2) & 1) + 1};
            // Each differentiated axis ranges over {-1,+1}; the others stay
            // at offset 0 (the +=2 step exits those loops after one pass).
            for (int ox = d[0] ? -1 : 0; ox <= (d[0] ? 1 : 0); ox += 2)
                for (int oy = d[1] ? -1 : 0; oy <= (d[1] ? 1 : 0); oy += 2)
                    for (int oz = d[2] ? -1 : 0; oz <= (d[2] ? 1 : 0); oz += 2) {
                        const int sign = (d[0] ? ox : 1) * (d[1] ? oy : 1) * (d[2] ? oz : 1);
                        const int s =
                            (base[0] + ox) + 4 * (base[1] + oy) + 16 * (base[2] + oz);
                        a2[row][s] += scale * sign;
                    }
        }
    }
    return a2;
}

}  // namespace

TricubicCoefMatrix build_coef_matrix() {
    const auto a1 = build_a1();
    const auto a2 = build_a2();

    // Solve A1 * B = A2 by Gauss-Jordan elimination with partial pivoting.
    // A1 is unimodular, so B is integral; the float solve is only a vehicle
    // and the rounded result is re-verified exactly below.
    std::array<std::array<double, 128>, 64> m{};
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            m[r][c] = static_cast<double>(a1[r][c]);
            m[r][64 + c] = static_cast<double>(a2[r][c]);
        }
    for (int col = 0; col < 64; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 64; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (m[pivot][col] == 0.0)
            throw std::logic_error("tricubic: constraint matrix is singular");
        std::swap(m[col], m[pivot]);
        const double inv = 1.0 / m[col][col];
        for (int c = col; c < 128; ++c) m[col][c] *= inv;
        for (int r = 0; r < 64; ++r) {
            if (r == col || m[r][col] == 0.0) continue;
            const double f = m[r][col];
            for (int c = col; c < 128; ++c) m[r][c] -= f * m[col][c];
        }
    }

    TricubicCoefMatrix out;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            out.weights[r][c] = std::llround(m[r][64 + c]);

    // Exact integer check that the rounded solution solves A1 * B = A2.
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            std::int64_t acc = 0;
            for (int k = 0; k < 64; ++k) acc += a1[r][k] * out.weights[k][c];
            if (acc != a2[r][c])
                throw std::logic_error("tricubic: integer verification of the coefficient map failed");
        }

    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (out.weights[r][c] != 0) {
                ++out.nnz;
                out.rows[r].push_back({static_cast<std::uint8_t>(c),
                                       static_cast<std::int32_t>(out.weights[r][c])});
            }
    return out;
}

const TricubicCoefMatrix& coef_matrix() {
    static const TricubicCoefMatrix matrix = build_coef_matrix();
    return matrix;
}

namespace {

/// 8*alpha = B * phi over the nonzero entries only.
void coefficients_sparse(const TricubicCoefMatrix& m, std::span<const double, 64> stencil,
                         std::array<double, 64>& alpha8) {
    for (int r = 0; r < 64; ++r) {
        double acc = 0.0;
        for (const auto& e : m.rows[r]) acc += static_cast<double>(e.w) * stencil[e.col];
        alpha8[r] = acc;
    }
}

/// Same product over all 64x64 entries, zeros included.
void coefficients_dense(const TricubicCoefMatrix& m, std::span<const double, 64> stencil,
                        std::array<double, 64>& alpha8) {
    for (int r = 0; r < 64; ++r) {
        double acc = 0.0;
        for (int c = 0; c < 64; ++c) acc += static_cast<double>(m.weights[r][c]) * stencil[c];
        alpha8[r] = acc;
    }
}

/// Horner evaluation of sum alpha8_ijk x^i y^j z^k, divided by 8 at the end.
double evaluate_poly(const std::array<double, 64>& alpha8, double x, double y, double z) {
    double pz = 0.0;
    for (int k = 3; k >= 0; --k) {
        double py = 0.0;
        for (int j = 3; j >= 0; --j) {
            const double* a = alpha8.data() + 4 * j + 16 * k;
            py = py * y + (((a[3] * x + a[2]) * x + a[1]) * x + a[0]);
        }
        pz = pz * z + py;
    }
    return pz * 0.125;
}

}  // namespace

double interpolate_cell(std::span<const double, 64> stencil, double x, double y, double z,
                        FlopsMode mode) {
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0 && z >= 0.0 && z <= 1.0))
        throw std::invalid_argument("interpolate_cell: coordinates must lie in the unit cell");
    std::array<double, 64> alpha8;
    if (mode == FlopsMode::sparse)
        coefficients_sparse(coef_matrix(), stencil, alpha8);
    else
        coefficients_dense(coef_matrix(), stencil, alpha8);
    return evaluate_poly(alpha8, x, y, z);
}

namespace {

struct AxisMap {
    std::vector<int> cell;                    // base cell index per output voxel
    std::vector<double> t;                    // intra-cell coordinate in [0,1)
    std::vector<std::array<int, 4>> stencil;  // clamped source indices per cell id
};

/// Precomputes, for one axis, which coarse cell every fine voxel lands in and
/// the clamped 4-point stencil of that cell. Cells are keyed by base index
/// offset so boundary cells (base -1 or n-1) get their own clamped stencils.
AxisMap build_axis_map(int n_coarse, int factor) {
    AxisMap map;
    map.cell.resize(static_cast<std::size_t>(n_coarse) * factor);
    map.t.resize(map.cell.size());
    const int n_cells = n_coarse + 1;  // base indices -1 .. n_coarse-1
    map.stencil.resize(n_cells);
    for (int base = -1; base < n_coarse; ++base)
        for (int s = 0; s < 4; ++s)
            map.stencil[base + 1][s] = std::clamp(base - 1 + s, 0, n_coarse - 1);
    for (std::size_t i = 0; i < map.cell.size(); ++i) {
        const double xc = (static_cast<double>(i) + 0.5) / factor - 0.5;
        int base = static_cast<int>(std::floor(xc));
        base = std::clamp(base, -1, n_coarse - 1);
        map.cell[i] = base + 1;
        map.t[i] = xc - base;
    }
    return map;
}

}  // namespace

ScalarField3D upsample(const ScalarField3D& field, int factor, FlopsMode mode) {
    field.validate_shape();
    if (factor < 2)
        throw std::invalid_argument("upsample: factor must be >= 2");
    if (field.grid.nx < 4 || field.grid.ny < 4 || field.grid.nz < 4)
        throw std::invalid_argument("upsample: need at least 4 source voxels per axis");

    const GridSpec& cg = field.grid;
    ScalarField3D out(GridSpec{cg.nx * factor, cg.ny * factor, cg.nz * factor, cg.dx / factor},
                      field.unit);

    const AxisMap mx = build_axis_map(cg.nx, factor);
    const AxisMap my = build_axis_map(cg.ny, factor);
    const AxisMap mz = build_axis_map(cg.nz, factor);
    const TricubicCoefMatrix& B = coef_matrix();

    std::array<double, 64> stencil;
    std::array<double, 64> alpha8{};
    int last_cx = -1, last_cy = -1, last_cz = -1;

    std::size_t o = 0;
    for (int x = 0; x < out.grid.nx; ++x)
        for (int y = 0; y < out.grid.ny; ++y)
            for (int z = 0; z < out.grid.nz; ++z, ++o) {
                const int cx = mx.cell[x], cy = my.cell[y], cz = mz.cell[z];
                if (cx != last_cx || cy != last_cy || cz != last_cz) {
                    // New cell: gather the clamped 4x4x4 stencil and refresh
                    // the polynomial coefficients. Consecutive fine voxels
                    // share cells, so this triggers ~1/factor of the time.
                    const auto& sx = mx.stencil[cx];
                    const auto& sy = my.stencil[cy];
                    const auto& sz = mz.stencil[cz];
                    for (int r = 0; r < 4; ++r)
                        for (int q = 0; q < 4; ++q)
                            for (int p = 0; p < 4; ++p)
                                stencil[p + 4 * q + 16 * r] =
                                    field.values[(static_cast<std::size_t>(sx[p]) * cg.ny + sy[q]) *
                                                     cg.nz +
                                                 sz[r]];
                    if (mode == FlopsMode::sparse)
                        coefficients_sparse(B, stencil, alpha8);
                    else
                        coefficients_dense(B, stencil, alpha8);
                    last_cx = cx;
                    last_cy = cy;
                    last_cz = cz;
                }
                out.values[o] = evaluate_poly(alpha8, mx.t[x], my.t[y], mz.t[z]);
            }
    return out;
}

FlowState upsample_state(const FlowState& state, int factor, FlopsMode mode) {
    state.validate();
    FlowState out;
    out.rho = upsample(state.rho, factor, mode);
    for (int k = 0; k < 3; ++k) out.u[k] = upsample(state.u[k], factor, mode);
    for (double r : out.rho.values)
        if (!(r > 0.0))
            throw std::runtime_error(
                "upsample_state: interpolation overshoot produced non-positive density");
    return out;
}

std::uint64_t flops(const GridSpec& grid, int n_channels, FlopsMode mode) {
    if (n_channels < 1)
        throw std::invalid_argument("flops: n_channels must be >= 1");
    const std::uint64_t per_point = static_cast<std::uint64_t>(
        mode == FlopsMode::sparse ? kSparseFlopsPerPoint : kDenseFlopsPerPoint);
    return per_point * grid.voxel_count() * static_cast<std::uint64_t>(n_channels);
}

}  // namespace flowsr
