#include "flowsr/metrics.hpp"

#include <fftw3.h>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace flowsr {

void SsimConfig::validate() const {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("SsimConfig: window must be odd and >= 3");
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw std::invalid_argument("SsimConfig: stabilizers must be positive");
}

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

namespace {

/// Sliding sums of width w along one axis (0=x, 1=y, 2=z of the canonical
/// layout); the axis shrinks to n-w+1 valid offsets. One running
/// add/subtract per step keeps the whole pyramid O(N).
std::vector<double> sliding_sum_axis(const std::vector<double>& in, std::array<int, 3> din,
                                     int axis, int w, std::array<int, 3>& dout) {
    dout = din;
    dout[axis] = din[axis] - w + 1;
    std::vector<double> out(static_cast<std::size_t>(dout[0]) * dout[1] * dout[2]);

    const auto strides = [](const std::array<int, 3>& d) {
        return std::array<std::size_t, 3>{static_cast<std::size_t>(d[1]) * d[2],
                                          static_cast<std::size_t>(d[2]), 1};
    };
    const auto si = strides(din);
    const auto so = strides(dout);
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    const int n = din[axis];

    for (int i1 = 0; i1 < din[a1]; ++i1)
        for (int i2 = 0; i2 < din[a2]; ++i2) {
            const std::size_t bi = i1 * si[a1] + i2 * si[a2];
            const std::size_t bo = i1 * so[a1] + i2 * so[a2];
            double acc = 0.0;
            for (int p = 0; p < w; ++p) acc += in[bi + static_cast<std::size_t>(p) * si[axis]];
            out[bo] = acc;
            for (int p = 1; p + w - 1 < n; ++p) {
                acc += in[bi + static_cast<std::size_t>(p + w - 1) * si[axis]] -
                       in[bi + static_cast<std::size_t>(p - 1) * si[axis]];
                out[bo + static_cast<std::size_t>(p) * so[axis]] = acc;
            }
        }
    return out;
}

/// Window sums over all w^3 stride-1 valid windows.
std::vector<double> window_sums(std::vector<double> vals, std::array<int, 3> dims, int w,
                                std::array<int, 3>& dout) {
    for (int axis = 0; axis < 3; ++axis) {
        std::array<int, 3> next{};
        vals = sliding_sum_axis(vals, dims, axis, w, next);
        dims = next;
    }
    dout = dims;
    return vals;
}

}  // namespace

double ssim3d(const ScalarField3D& a, const ScalarField3D& b, const SsimConfig& cfg) {
    cfg.validate();
    a.validate_shape();
    b.validate_shape();
    if (a.grid != b.grid)
        throw std::invalid_argument("ssim3d: fields must share one grid");
    if (a.grid.nx < cfg.window || a.grid.ny < cfg.window || a.grid.nz < cfg.window)
        throw std::invalid_argument("ssim3d: every axis must be at least the window size");

    const std::size_t n = a.values.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a.values[i] * a.values[i];
        bb[i] = b.values[i] * b.values[i];
        ab[i] = a.values[i] * b.values[i];
    }

    const std::array<int, 3> dims{a.grid.nx, a.grid.ny, a.grid.nz};
    std::array<int, 3> wd{};
    const std::vector<double> sa = window_sums(a.values, dims, cfg.window, wd);
    const std::vector<double> sb = window_sums(b.values, dims, cfg.window, wd);
    const std::vector<double> saa = window_sums(std::move(aa), dims, cfg.window, wd);
    const std::vector<double> sbb = window_sums(std::move(bb), dims, cfg.window, wd);
    const std::vector<double> sab = window_sums(std::move(ab), dims, cfg.window, wd);

    const double inv_w3 = 1.0 / (static_cast<double>(cfg.window) * cfg.window * cfg.window);
    const double c1sq = cfg.c1 * cfg.c1;
    const double c2sq = cfg.c2 * cfg.c2;

    double total = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double mu_a = sa[i] * inv_w3;
        const double mu_b = sb[i] * inv_w3;
        const double var_a = saa[i] * inv_w3 - mu_a * mu_a;
        const double var_b = sbb[i] * inv_w3 - mu_b * mu_b;
        const double cov = sab[i] * inv_w3 - mu_a * mu_b;
        total += ((2.0 * mu_a * mu_b + c1sq) * (2.0 * cov + c2sq)) /
                 ((mu_a * mu_a + mu_b * mu_b + c1sq) * (var_a + var_b + c2sq));
    }
    return total / static_cast<double>(sa.size());
}

// ---------------------------------------------------------------------------
// NRMSE
// ---------------------------------------------------------------------------

double nrmse(std::span<const double> pred, std::span<const double> truth, bool take_sqrt) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("nrmse: inputs must have equal length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den == 0.0)
        throw std::invalid_argument("nrmse: reference is identically zero");
    const double ratio = num / den;
    return take_sqrt ? std::sqrt(ratio) : ratio;
}

double nrmse(const ScalarField3D& pred, const ScalarField3D& truth, bool take_sqrt) {
    if (pred.grid != truth.grid)
        throw std::invalid_argument("nrmse: fields must share one grid");
    return nrmse(std::span<const double>(pred.values), std::span<const double>(truth.values),
                 take_sqrt);
}

// ---------------------------------------------------------------------------
// Channel and SGS metrics
// ---------------------------------------------------------------------------

namespace {

double channel_metric(const ScalarField3D& pred, const ScalarField3D& truth, MetricKind kind,
                      const SsimConfig& cfg) {
    return kind == MetricKind::ssim ? ssim3d(pred, truth, cfg) : nrmse(pred, truth);
}

/// Drops one voxel layer from every face.
ScalarField3D trim_one(const ScalarField3D& f) {
    if (f.grid.nx < 4 || f.grid.ny < 4 || f.grid.nz < 4)
        throw std::invalid_argument("metric_sgs: trimmed domain would be smaller than 2 voxels per axis");
    ScalarField3D out(GridSpec{f.grid.nx - 2, f.grid.ny - 2, f.grid.nz - 2, f.grid.dx}, f.unit);
    for (int x = 0; x < out.grid.nx; ++x)
        for (int y = 0; y < out.grid.ny; ++y)
            for (int z = 0; z < out.grid.nz; ++z)
                out(x, y, z) = f(x + 1, y + 1, z + 1);
    return out;
}

std::array<ScalarField3D, 3> trimmed_sgs_divergence(const FlowState& fine,
                                                    const FilterSpec& spec) {
    const std::array<ScalarField3D, 3> div = sgs_divergence(fine, spec);
    return {trim_one(div[0]), trim_one(div[1]), trim_one(div[2])};
}

}  // namespace

double metric_rho_u(const FlowState& pred, const FlowState& truth, MetricKind kind,
                    const ChannelStats& stats, const SsimConfig& cfg) {
    if (pred.grid() != truth.grid())
        throw std::invalid_argument("metric_rho_u: states must share one grid");
    const FlowState np = normalize(pred, stats);
    const FlowState nt = normalize(truth, stats);
    double total = channel_metric(np.rho, nt.rho, kind, cfg);
    for (int k = 0; k < 3; ++k) total += channel_metric(np.u[k], nt.u[k], kind, cfg);
    return total / 4.0;
}

double metric_rho_u(const FlowState& pred, const FlowState& truth, MetricKind kind,
                    const SsimConfig& cfg) {
    const ChannelStats stats = compute_stats(std::span<const FlowState>(&truth, 1));
    return metric_rho_u(pred, truth, kind, stats, cfg);
}

double metric_sgs(const FlowState& pred_fine, const FlowState& truth_fine,
                  const FilterSpec& spec, MetricKind kind, const SsimConfig& cfg) {
    if (pred_fine.grid() != truth_fine.grid())
        throw std::invalid_argument("metric_sgs: states must share one grid");
    const auto dp = trimmed_sgs_divergence(pred_fine, spec);
    const auto dt = trimmed_sgs_divergence(truth_fine, spec);
    double total = 0.0;
    for (int k = 0; k < 3; ++k) total += channel_metric(dp[k], dt[k], kind, cfg);
    return total / 3.0;
}

// ---------------------------------------------------------------------------
// Energy, dissipation, spectra
// ---------------------------------------------------------------------------

double kinetic_energy(const FlowState& state) {
    state.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < state.rho.values.size(); ++i) {
        const double u1 = state.u[0].values[i];
        const double u2 = state.u[1].values[i];
        const double u3 = state.u[2].values[i];
        sum += 0.5 * state.rho.values[i] * (u1 * u1 + u2 * u2 + u3 * u3);
    }
    return sum / static_cast<double>(state.rho.values.size());
}

double dissipation(const FlowState& state) {
    state.validate();
    const GridSpec& g = state.grid();
    if (g.nx < 3 || g.ny < 3 || g.nz < 3)
        throw std::invalid_argument("dissipation: need at least 3 voxels per axis");

    const double inv2dx = 1.0 / (2.0 * g.dx);
    const std::size_t sx = static_cast<std::size_t>(g.ny) * g.nz;
    const std::size_t sy = static_cast<std::size_t>(g.nz);
    const std::size_t sz = 1;
    const std::array<std::size_t, 3> stride{sx, sy, sz};

    double sum = 0.0;
    std::size_t count = 0;
    for (int x = 1; x < g.nx - 1; ++x)
        for (int y = 1; y < g.ny - 1; ++y)
            for (int z = 1; z < g.nz - 1; ++z) {
                const std::size_t i = state.rho.index(x, y, z);
                double grad[3][3];
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        grad[a][b] = (state.u[a].values[i + stride[b]] -
                                      state.u[a].values[i - stride[b]]) *
                                     inv2dx;
                const double trace = grad[0][0] + grad[1][1] + grad[2][2];
                double contraction = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        const double tau_ab =
                            grad[a][b] + grad[b][a] - (a == b ? (2.0 / 3.0) * trace : 0.0);
                        contraction += tau_ab * grad[a][b];
                    }
                sum += contraction;
                ++count;
            }
    return sum / static_cast<double>(count);
}

double Spectrum::total() const {
    double sum = 0.0;
    for (double e : energy) sum += e;
    return sum;
}

Spectrum tke_spectrum(const FlowState& state) {
    state.validate();
    const GridSpec& g = state.grid();
    if (g.nx != g.ny || g.ny != g.nz)
        throw std::invalid_argument("tke_spectrum: domain must be cubic");
    const int n = g.nx;
    const std::size_t total = g.voxel_count();

    fftw_complex* in = fftw_alloc_complex(total);
    fftw_complex* out = fftw_alloc_complex(total);
    // Layout matches the canonical z-fastest order, so the dims map directly.
    fftw_plan plan = fftw_plan_dft_3d(n, n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);

    const int half = n / 2;
    const int max_shell =
        static_cast<int>(std::lround(std::sqrt(3.0) * static_cast<double>(half))) + 1;
    Spectrum spec;
    spec.energy.assign(static_cast<std::size_t>(max_shell) + 1, 0.0);

    for (int comp = 0; comp < 3; ++comp) {
        double mean = 0.0;
        for (double v : state.u[comp].values) mean += v;
        mean /= static_cast<double>(total);
        for (std::size_t i = 0; i < total; ++i) {
            in[i][0] = state.u[comp].values[i] - mean;
            in[i][1] = 0.0;
        }
        fftw_execute(plan);

        std::size_t i = 0;
        for (int kx = 0; kx < n; ++kx) {
            const int fx = kx <= half ? kx : kx - n;
            for (int ky = 0; ky < n; ++ky) {
                const int fy = ky <= half ? ky : ky - n;
                for (int kz = 0; kz < n; ++kz, ++i) {
                    const int fz = kz <= half ? kz : kz - n;
                    const int shell = static_cast<int>(std::lround(
                        std::sqrt(static_cast<double>(fx) * fx + static_cast<double>(fy) * fy +
                                  static_cast<double>(fz) * fz)));
                    spec.energy[shell] += out[i][0] * out[i][0] + out[i][1] * out[i][1];
                }
            }
        }
    }

    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);

    const double scale = 0.5 / (static_cast<double>(total) * static_cast<double>(total));
    for (double& e : spec.energy) e *= scale;
    return spec;
}

// ---------------------------------------------------------------------------
// Aggregate reports
// ---------------------------------------------------------------------------

MetricReport evaluate_batch(std::span<const FlowState> preds,
                            std::span<const FlowState> truths, const FilterSpec& spec,
                            const ChannelStats& stats, const SsimConfig& cfg) {
    if (preds.size() != truths.size() || preds.empty())
        throw std::invalid_argument("evaluate_batch: need equally many predictions and truths");
    stats.validate();

    MetricReport rep;
    const double n_samp = static_cast<double>(preds.size());

    // Channel NRMSE accumulates one ratio per channel across the whole batch.
    std::array<double, 4> num{}, den{};
    std::array<double, 3> sgs_num{}, sgs_den{};
    double ek_num = 0.0, ek_den = 0.0, eps_num = 0.0, eps_den = 0.0;

    for (std::size_t s = 0; s < preds.size(); ++s) {
        const FlowState& pred = preds[s];
        const FlowState& truth = truths[s];
        if (pred.grid() != truth.grid())
            throw std::invalid_argument("evaluate_batch: pair " + std::to_string(s) +
                                        " has mismatched grids");

        rep.ssim_rho_u += metric_rho_u(pred, truth, MetricKind::ssim, stats, cfg) / n_samp;

        const FlowState np = normalize(pred, stats);
        const FlowState nt = normalize(truth, stats);
        for (int c = 0; c < 4; ++c) {
            const std::vector<double>& p = c == 0 ? np.rho.values : np.u[c - 1].values;
            const std::vector<double>& t = c == 0 ? nt.rho.values : nt.u[c - 1].values;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double d = p[i] - t[i];
                num[c] += d * d;
                den[c] += t[i] * t[i];
            }
        }

        const auto dp = trimmed_sgs_divergence(pred, spec);
        const auto dt = trimmed_sgs_divergence(truth, spec);
        for (int k = 0; k < 3; ++k) {
            rep.ssim_sgs += ssim3d(dp[k], dt[k], cfg) / (3.0 * n_samp);
            for (std::size_t i = 0; i < dp[k].values.size(); ++i) {
                const double d = dp[k].values[i] - dt[k].values[i];
                sgs_num[k] += d * d;
                sgs_den[k] += dt[k].values[i] * dt[k].values[i];
            }
        }

        const double ek_t = kinetic_energy(truth);
        const double ek_p = kinetic_energy(pred);
        const double eps_t = dissipation(truth);
        const double eps_p = dissipation(pred);
        rep.Ek_true += ek_t / n_samp;
        rep.Ek_pred += ek_p / n_samp;
        rep.eps_true += eps_t / n_samp;
        rep.eps_pred += eps_p / n_samp;
        ek_num += (ek_p - ek_t) * (ek_p - ek_t);
        ek_den += ek_t * ek_t;
        eps_num += (eps_p - eps_t) * (eps_p - eps_t);
        eps_den += eps_t * eps_t;
    }

    for (int c = 0; c < 4; ++c) {
        if (den[c] == 0.0)
            throw std::invalid_argument("evaluate_batch: a normalized truth channel is identically zero");
        rep.nrmse_rho_u += (num[c] / den[c]) / 4.0;
    }
    for (int k = 0; k < 3; ++k) {
        if (sgs_den[k] == 0.0)
            throw std::invalid_argument("evaluate_batch: an SGS divergence component of the truth is identically zero");
        rep.nrmse_sgs += (sgs_num[k] / sgs_den[k]) / 3.0;
    }
    if (ek_den == 0.0 || eps_den == 0.0)
        throw std::invalid_argument("evaluate_batch: zero reference energy or dissipation");
    rep.nrmse_Ek = ek_num / ek_den;
    rep.nrmse_eps = eps_num / eps_den;
    return rep;
}

MetricReport evaluate_pair(const FlowState& pred, const FlowState& truth,
                           const FilterSpec& spec, const ChannelStats& stats,
                           const SsimConfig& cfg) {
    return evaluate_batch(std::span<const FlowState>(&pred, 1),
                          std::span<const FlowState>(&truth, 1), spec, stats, cfg);
}

nlohmann::json report_to_json(const MetricReport& r) {
    return nlohmann::json{
        {"ssim_rho_u", r.ssim_rho_u}, {"ssim_sgs", r.ssim_sgs},
        {"nrmse_rho_u", r.nrmse_rho_u}, {"nrmse_sgs", r.nrmse_sgs},
        {"nrmse_Ek", r.nrmse_Ek},     {"nrmse_eps", r.nrmse_eps},
        {"Ek_true", r.Ek_true},       {"Ek_pred", r.Ek_pred},
        {"eps_true", r.eps_true},     {"eps_pred", r.eps_pred},
    };
}

MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    r.ssim_rho_u = j.at("ssim_rho_u").get<double>();
    r.ssim_sgs = j.at("ssim_sgs").get<double>();
    r.nrmse_rho_u = j.at("nrmse_rho_u").get<double>();
    r.nrmse_sgs = j.at("nrmse_sgs").get<double>();
    r.nrmse_Ek = j.at("nrmse_Ek").get<double>();
    r.nrmse_eps = j.at("nrmse_eps").get<double>();
    r.Ek_true = j.at("Ek_true").get<double>();
    r.Ek_pred = j.at("Ek_pred").get<double>();
    r.eps_true = j.at("eps_true").get<double>();
    r.eps_pred = j.at("eps_pred").get<double>();
    return r;
}

std::string report_csv_header() {
    return "id,ssim_rho_u,ssim_sgs,nrmse_rho_u,nrmse_sgs,nrmse_Ek,nrmse_eps,"
           "Ek_true,Ek_pred,eps_true,eps_pred";
}

std::string report_csv_row(const std::string& id, const MetricReport& r) {
    std::ostringstream out;
    out << id << std::setprecision(17);
    for (double v : {r.ssim_rho_u, r.ssim_sgs, r.nrmse_rho_u, r.nrmse_sgs, r.nrmse_Ek,
                     r.nrmse_eps, r.Ek_true, r.Ek_pred, r.eps_true, r.eps_pred})
        out << ',' << v;
    return out.str();
}

}  // namespace flowsr
