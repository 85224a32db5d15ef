#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowsr/coarsen.hpp"
#include "flowsr/field.hpp"

namespace flowsr {

/// Windowed-SSIM parameters. The stabilizers c1 and c2 enter the formula
/// squared, so the defaults contribute 0.01 and 0.09.
struct SsimConfig {
    int window = 9;
    double c1 = 0.1;
    double c2 = 0.3;

    /// Throws std::invalid_argument unless window is odd and >= 3 and both
    /// stabilizers are positive.
    void validate() const;
};

enum class MetricKind { ssim, nrmse };

/// Aggregate evaluation record for one prediction/truth pair (or batch).
/// Channel metrics are computed on normalized fields, the SGS metrics on raw
/// subgrid-stress divergences, and the energy/dissipation numbers on
/// physical fields.
struct MetricReport {
    double ssim_rho_u = 0.0;
    double ssim_sgs = 0.0;
    double nrmse_rho_u = 0.0;
    double nrmse_sgs = 0.0;
    double nrmse_Ek = 0.0;
    double nrmse_eps = 0.0;
    double Ek_true = 0.0;   // volume-averaged rho*|u|^2/2, J m^-3
    double Ek_pred = 0.0;
    double eps_true = 0.0;  // m^2 s^-3 at unit kinematic viscosity
    double eps_pred = 0.0;
};

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

/// Manifest-style row form for batch runs: a fixed header plus one CSV row
/// per evaluated pair, keyed by a caller-chosen id.
std::string report_csv_header();
std::string report_csv_row(const std::string& id, const MetricReport& report);

/// Shell-binned turbulent kinetic energy spectrum. energy[k] is the total
/// over the integer shell |kappa| = k (wavenumbers in units of 2*pi/L), and
/// the sum over shells equals the fluctuation kinetic energy per unit mass.
struct Spectrum {
    std::vector<double> energy;

    double total() const;
};

/// Mean over all fully-interior stride-1 windows of the two-factor SSIM
/// with uniform window statistics:
///   (2 mu_a mu_b + c1^2)(2 cov + c2^2)
///   -----------------------------------
///   (mu_a^2 + mu_b^2 + c1^2)(var_a + var_b + c2^2)
/// Requires equal grids and every axis >= window.
double ssim3d(const ScalarField3D& a, const ScalarField3D& b, const SsimConfig& cfg = {});

/// sum (pred - truth)^2 / sum truth^2 over all elements. Despite the
/// conventional name this ratio is not rooted; pass take_sqrt for the rooted
/// variant when comparing against other tools. Throws when truth is
/// identically zero.
double nrmse(std::span<const double> pred, std::span<const double> truth,
             bool take_sqrt = false);
double nrmse(const ScalarField3D& pred, const ScalarField3D& truth, bool take_sqrt = false);

/// Macro-averaged channel metric: mean of the metric over the density
/// channel and the three velocity components, evaluated on fields normalized
/// with `stats`. The overload without stats derives them from the truth
/// state (evaluation-set normalization).
double metric_rho_u(const FlowState& pred, const FlowState& truth, MetricKind kind,
                    const ChannelStats& stats, const SsimConfig& cfg = {});
double metric_rho_u(const FlowState& pred, const FlowState& truth, MetricKind kind,
                    const SsimConfig& cfg = {});

/// SGS closure metric: subgrid stress divergence of both fine states at the
/// given filter, one voxel stripped from every face (the boundary stencil is
/// one-sided there), then the metric averaged over the three components.
double metric_sgs(const FlowState& pred_fine, const FlowState& truth_fine,
                  const FilterSpec& spec, MetricKind kind, const SsimConfig& cfg = {});

/// Volume-averaged kinetic energy density <rho |u|^2 / 2>.
double kinetic_energy(const FlowState& state);

/// Volume-averaged (tau/rho) : grad(u) over interior voxels with unit
/// kinematic viscosity, where tau/rho is the deviatoric Newtonian stress
/// grad(u) + grad(u)^T - (2/3)(div u) I under the Stokes hypothesis.
double dissipation(const FlowState& state);

/// Shell-averaged TKE spectrum of the velocity fluctuation on a cubic
/// periodic domain: per-component mean subtracted, 3D DFT, then
/// E(kappa) = 1/2 sum_shell sum_comp |u_hat|^2 / N^2 binned by the rounded
/// shell radius. Non-cubic domains are an error.
Spectrum tke_spectrum(const FlowState& state);

/// Full report for one pair: channel metrics on normalized fields, SGS
/// metrics at the given filter, energy and dissipation on physical fields,
/// and their single-pair NRMSE ratios.
MetricReport evaluate_pair(const FlowState& pred, const FlowState& truth,
                           const FilterSpec& spec, const ChannelStats& stats,
                           const SsimConfig& cfg = {});

/// Batch form: SSIM-type entries are means over pairs; NRMSE-type entries
/// use a single ratio of summed squares over all voxels and samples per
/// channel before macro-averaging; Ek/eps entries are per-sample means with
/// batch NRMSE ratios.
MetricReport evaluate_batch(std::span<const FlowState> preds,
                            std::span<const FlowState> truths, const FilterSpec& spec,
                            const ChannelStats& stats, const SsimConfig& cfg = {});

}  // namespace flowsr
