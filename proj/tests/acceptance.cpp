// Acceptance gate for the flowsr toolkit. Each criterion prints exactly one
// PASS/FAIL line (or SKIP for the data-gated reference comparison) and the
// process exits nonzero if any criterion fails. Budgeted criteria also fail
// when they blow their wall-clock allowance.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowsr/augment.hpp"
#include "flowsr/blastnet_io.hpp"
#include "flowsr/coarsen.hpp"
#include "flowsr/field.hpp"
#include "flowsr/loss.hpp"
#include "flowsr/metrics.hpp"
#include "flowsr/subsample.hpp"
#include "flowsr/tricubic.hpp"
#include "oracles.hpp"

using namespace flowsr;

namespace {

int g_failures = 0;

class Timer {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail
              << std::endl;
    if (!ok) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
    std::cout << "SKIP criterion " << criterion << ": " << detail << std::endl;
}

std::string fmt_ms(double ms) {
    std::ostringstream ss;
    ss.precision(3);
    ss << ms << " ms";
    return ss.str();
}

template <typename Body>
void run_criterion(int criterion, Body&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(criterion, false, std::string("unexpected exception: ") + e.what());
    }
}

// --- 1: closed-form operation counts ----------------------------------------

void criterion_flops() {
    Timer t;
    const GridSpec g{128, 128, 128, 1.0};
    const std::uint64_t sparse = flops(g, 4, FlopsMode::sparse);
    const std::uint64_t dense = flops(g, 4, FlopsMode::dense);
    const double ms = t.ms();

    const bool ok = sparse == 22'968'008'704ULL && dense == 69'860'327'424ULL && ms < 1.0;
    std::ostringstream d;
    d << "operation counts for 128^3 x 4 channels: sparse=" << sparse << " dense=" << dense
      << " (" << fmt_ms(ms) << ", budget 1 ms)";
    report(1, ok, d.str());
}

// --- 2: coefficient table structure and interpolation fidelity ---------------

void criterion_coef_matrix() {
    Timer t;
    const TricubicCoefMatrix& m = coef_matrix();
    const bool zeros_ok = m.zero_count() == 2765;

    // constant reproduction anywhere in the cell
    std::array<double, 64> stencil;
    stencil.fill(6.75);
    double max_rel = 0.0;
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = oracles::uniform01(gen), y = oracles::uniform01(gen),
                     z = oracles::uniform01(gen);
        max_rel = std::max(max_rel,
                           std::abs(interpolate_cell(stencil, x, y, z) - 6.75) / 6.75);
    }

    // product of per-axis quadratics: inside the cubic span, reproduced exactly
    auto qx = [](double v) { return 2.0 + 0.5 * v - 0.25 * v * v; };
    auto qy = [](double v) { return 1.0 - 0.125 * v + 0.0625 * v * v; };
    auto qz = [](double v) { return 0.5 + 0.25 * v + 0.125 * v * v; };
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r)
                stencil[p + 4 * q + 16 * r] = qx(p - 1.0) * qy(q - 1.0) * qz(r - 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = oracles::uniform01(gen), y = oracles::uniform01(gen),
                     z = oracles::uniform01(gen);
        const double expect = qx(x) * qy(y) * qz(z);
        max_rel = std::max(
            max_rel, std::abs(interpolate_cell(stencil, x, y, z) - expect) / std::abs(expect));
    }

    // value continuity across a shared cell face of a random field
    const GridSpec g{6, 5, 5, 1.0};
    const ScalarField3D f = oracles::random_field(g, gen);
    double max_jump = 0.0;
    auto stencil_at = [&](int bx, int by, int bz) {
        std::array<double, 64> s;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
                for (int r = 0; r < 4; ++r)
                    s[p + 4 * q + 16 * r] = f(bx + p - 1, by + q - 1, bz + r - 1);
        return s;
    };
    const auto left = stencil_at(1, 1, 1);    // cells [1,2] x [1,2] x [1,2]
    const auto right = stencil_at(2, 1, 1);   // neighbor across x
    for (int trial = 0; trial < 30; ++trial) {
        const double y = oracles::uniform01(gen), z = oracles::uniform01(gen);
        max_jump = std::max(max_jump, std::abs(interpolate_cell(left, 1.0, y, z) -
                                               interpolate_cell(right, 0.0, y, z)));
    }

    const double ms = t.ms();
    const bool ok = zeros_ok && max_rel < 1e-8 && max_jump < 1e-10 && ms < 1000.0;
    std::ostringstream d;
    d << "coefficient table zeros=" << m.zero_count()
      << ", constant/quadratic reproduction rel_err=" << max_rel
      << ", face jump=" << max_jump << " (" << fmt_ms(ms) << ", budget 1 s)";
    report(2, ok, d.str());
}

// --- 3: conservation under density-weighted coarsening ----------------------

void criterion_conservation() {
    Timer t;
    const GridSpec g{32, 32, 32, 1.0};
    double worst_mass = 0.0, worst_mom = 0.0;
    bool diagonals_ok = true;

    for (int trial = 0; trial < 100; ++trial) {
        const FlowState fine = oracles::random_state(g, 4000 + trial);
        double fine_mass = 0.0;
        std::array<double, 3> fine_mom{}, mom_scale{};
        for (std::size_t i = 0; i < fine.rho.values.size(); ++i) {
            fine_mass += fine.rho.values[i];
            for (int k = 0; k < 3; ++k) {
                const double m = fine.rho.values[i] * fine.u[k].values[i];
                fine_mom[k] += m;
                mom_scale[k] += std::abs(m);
            }
        }

        for (int factor : {2, 4, 8}) {
            const FilterSpec spec{factor};
            const FlowState coarse = favre_filter(fine, spec);
            const double block = static_cast<double>(factor) * factor * factor;
            double mass = 0.0;
            std::array<double, 3> mom{};
            for (std::size_t i = 0; i < coarse.rho.values.size(); ++i) {
                mass += block * coarse.rho.values[i];
                for (int k = 0; k < 3; ++k)
                    mom[k] += block * coarse.rho.values[i] * coarse.u[k].values[i];
            }
            worst_mass = std::max(worst_mass, std::abs(mass - fine_mass) / fine_mass);
            for (int k = 0; k < 3; ++k)
                worst_mom = std::max(worst_mom, std::abs(mom[k] - fine_mom[k]) / mom_scale[k]);

            const SgsTensorField tau = sgs_stress(fine, spec);
            for (int k = 0; k < 3; ++k)
                for (double v : tau(k, k).values)
                    if (v < 0.0) diagonals_ok = false;
        }
    }

    const double ms = t.ms();
    const bool ok = worst_mass < 1e-10 && worst_mom < 1e-10 && diagonals_ok && ms < 10000.0;
    std::ostringstream d;
    d << "100 random 32^3 states, factors 2/4/8: mass rel_err=" << worst_mass
      << ", momentum rel_err=" << worst_mom
      << ", stress diagonals nonnegative=" << (diagonals_ok ? "yes" : "no") << " ("
      << fmt_ms(ms) << ", budget 10 s)";
    report(3, ok, d.str());
}

// --- 4: windowed structural similarity ---------------------------------------

void criterion_ssim() {
    std::mt19937_64 gen(5);
    double worst_identity = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const ScalarField3D f = oracles::random_field(GridSpec{11, 11, 11, 1.0}, gen, -4.0, 4.0);
        worst_identity = std::max(worst_identity, std::abs(ssim3d(f, f) - 1.0));
    }

    const ScalarField3D zeros(GridSpec{10, 10, 10, 1.0}, "", 0.0);
    const ScalarField3D ones(GridSpec{10, 10, 10, 1.0}, "", 1.0);
    const double const_err = std::abs(ssim3d(zeros, ones) - 0.01 / 1.01);

    double worst_oracle = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        const ScalarField3D a = oracles::random_field(GridSpec{16, 16, 16, 1.0}, gen);
        ScalarField3D b = trial == 0 ? oracles::random_field(GridSpec{16, 16, 16, 1.0}, gen) : a;
        if (trial == 1)
            for (double& v : b.values) v = -v;
        const SsimConfig cfg{};
        worst_oracle =
            std::max(worst_oracle, std::abs(ssim3d(a, b, cfg) - oracles::ssim3d_naive(a, b, cfg)));
    }

    const bool ok = worst_identity < 1e-9 && const_err < 1e-12 && worst_oracle < 1e-10;
    std::ostringstream d;
    d << "similarity: identity dev=" << worst_identity << " (50 fields), constant closed-form dev="
      << const_err << ", window-oracle dev=" << worst_oracle;
    report(4, ok, d.str());
}

// --- 5: squared-error ratio ---------------------------------------------------

void criterion_nrmse() {
    std::mt19937_64 gen(6);
    const ScalarField3D f = oracles::random_field(GridSpec{8, 8, 8, 1.0}, gen);
    const bool identity_ok = nrmse(f, f) == 0.0;

    const std::vector<double> truth{1.0, 2.0}, pred{1.0, 3.0};
    const double fixture = nrmse(std::span<const double>(pred), std::span<const double>(truth));
    const bool fixture_ok = fixture == 0.2;

    const ScalarField3D p = oracles::random_field(GridSpec{8, 8, 8, 1.0}, gen);
    const double base = nrmse(p, f);
    double worst_scale = 0.0;
    for (double a : {2.0, -3.7, 1e-4}) {
        ScalarField3D fs = f, ps = p;
        for (double& v : fs.values) v *= a;
        for (double& v : ps.values) v *= a;
        worst_scale = std::max(worst_scale, std::abs(nrmse(ps, fs) - base) / base);
    }

    const bool ok = identity_ok && fixture_ok && worst_scale < 1e-12;
    std::ostringstream d;
    d << "error ratio: identity=" << (identity_ok ? "0" : "nonzero") << ", two-point fixture="
      << fixture << ", scale-invariance dev=" << worst_scale;
    report(5, ok, d.str());
}

// --- 6: symmetry-group equivariance -------------------------------------------

void criterion_augmentation() {
    Timer t;
    const auto all = all_symmetries();

    bool algebra_ok = true;
    for (const CubeSymmetry& gsym : all) {
        if (!(compose(gsym.inverse(), gsym) == CubeSymmetry::identity())) algebra_ok = false;
        for (const CubeSymmetry& h : all) {
            const CubeSymmetry hg = compose(h, gsym);
            hg.validate();
        }
    }

    double worst = 0.0;
    bool state_law_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const FlowState s = oracles::random_state(GridSpec{24, 24, 24, 1.0}, 6000 + trial);
        for (const CubeSymmetry& gsym : all)
            worst = std::max(worst, verify_continuity(s, gsym));

        // group law on the state itself, bit for bit
        std::mt19937_64 gen(7000 + trial);
        const CubeSymmetry ga = random_symmetry(gen);
        const CubeSymmetry gb = random_symmetry(gen);
        const FlowState once = apply(s, compose(gb, ga));
        const FlowState twice = apply(apply(s, ga), gb);
        if (once.rho.values != twice.rho.values) state_law_ok = false;
        for (int k = 0; k < 3; ++k)
            if (once.u[k].values != twice.u[k].values) state_law_ok = false;
        const FlowState back = apply(apply(s, ga), ga.inverse());
        if (back.rho.values != s.rho.values) state_law_ok = false;
    }

    const double ms = t.ms();
    const bool ok = algebra_ok && state_law_ok && worst < 1e-10 && ms < 30000.0;
    std::ostringstream d;
    d << "48-element symmetry group on 20 random 24^3 states: continuity dev=" << worst
      << ", composition/inverse exact=" << ((algebra_ok && state_law_ok) ? "yes" : "no") << " ("
      << fmt_ms(ms) << ", budget 30 s)";
    report(6, ok, d.str());
}

// --- 7: loss blend -------------------------------------------------------------

void criterion_losses() {
    const GridSpec g{6, 6, 6, 0.5};
    FlowState truth = oracles::random_state(g, 8);
    const FlowState pred = oracles::random_state(g, 9);

    const bool lambda0_ok = phys_loss(pred, truth, LossConfig{0.0, 0.0}) == mse_loss(pred, truth);

    // Quantize to multiples of 2^-20 so that adding 2.0 is exact in binary64
    // and the shifted gradients cancel bit for bit.
    auto quantize = [](ScalarField3D& f) {
        for (double& v : f.values) v = std::round(v * 1048576.0) / 1048576.0;
    };
    quantize(truth.rho);
    for (int k = 0; k < 3; ++k) quantize(truth.u[k]);
    FlowState offset = truth;
    for (double& v : offset.rho.values) v += 2.0;
    for (int k = 0; k < 3; ++k)
        for (double& v : offset.u[k].values) v += 2.0;
    const double offset_grad = grad_loss(offset, truth);

    FlowState base;
    base.rho = ScalarField3D(g, "kgm-3", 1.0);
    for (int k = 0; k < 3; ++k) base.u[k] = ScalarField3D(g, "ms-1", 0.25);
    FlowState ramp = base;
    const double slope = 0.75;
    auto add_ramp = [&](ScalarField3D& f) {
        for (int x = 0; x < g.nx; ++x)
            for (int y = 0; y < g.ny; ++y)
                for (int z = 0; z < g.nz; ++z) f(x, y, z) += slope * x * g.dx;
    };
    add_ramp(ramp.rho);
    for (int k = 0; k < 3; ++k) add_ramp(ramp.u[k]);
    const double expect = g.dx * g.dx * slope * slope / 3.0;
    const double ramp_dev = std::abs(grad_loss(ramp, base) - expect) / expect;

    const bool ok = lambda0_ok && offset_grad == 0.0 && ramp_dev < 1e-10;
    std::ostringstream d;
    d << "losses: lambda=0 equals MSE bit-for-bit=" << (lambda0_ok ? "yes" : "no")
      << ", constant-offset gradient loss=" << offset_grad << ", ramp fixture rel_err=" << ramp_dev;
    report(7, ok, d.str());
}

// --- 8: shell spectrum ----------------------------------------------------------

void criterion_spectrum() {
    double worst_parseval = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const FlowState s = oracles::random_state(GridSpec{32, 32, 32, 1.0}, 10 + trial);
        const Spectrum spec = tke_spectrum(s);
        double phys = 0.0;
        for (int k = 0; k < 3; ++k) {
            double mean = 0.0;
            for (double v : s.u[k].values) mean += v;
            mean /= static_cast<double>(s.u[k].values.size());
            for (double v : s.u[k].values) phys += 0.5 * (v - mean) * (v - mean);
        }
        phys /= static_cast<double>(s.grid().voxel_count());
        worst_parseval = std::max(worst_parseval, std::abs(spec.total() - phys) / phys);
    }

    const int n = 32, k0 = 3;
    GridSpec g{n, n, n, 1.0};
    FlowState mode;
    mode.rho = ScalarField3D(g, "kgm-3", 1.0);
    for (int k = 0; k < 3; ++k) mode.u[k] = ScalarField3D(g, "ms-1", 0.0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                mode.u[0](x, y, z) = 2.0 * std::sin(2.0 * M_PI * k0 * x / n);
    const Spectrum spec = tke_spectrum(mode);
    const double share = spec.energy[k0] / spec.total();

    const bool ok = worst_parseval < 1e-6 && share >= 0.999;
    std::ostringstream d;
    d << "spectrum: Parseval residual=" << worst_parseval << " (3 random 32^3 states), shell-"
      << k0 << " energy share=" << share;
    report(8, ok, d.str());
}

// --- 9: dataset subsampling ------------------------------------------------------

void criterion_subsampling() {
    // three tight velocity-moment blobs at the corners of a near-equilateral
    // triangle so every pairwise merge costs about the same
    std::vector<MomentVector> features;
    const double centers[3][2] = {{0.0, 0.0}, {5.0, 8.66}, {10.0, 0.0}};
    for (const auto& c : centers)
        for (int j = -1; j <= 1; ++j) {
            MomentVector m;
            m.v[0] = c[0] + 0.05 * j;
            m.v[4] = c[1] + 0.02 * j;
            features.push_back(m);
        }
    const int k = elbow(features, {1, 5}, 17);

    std::vector<int> assign(1, 0);
    assign.insert(assign.end(), 10, 1);
    assign.insert(assign.end(), 10, 2);
    const auto picked = balanced_select(assign, 6, 2);
    const std::set<std::size_t> unique(picked.begin(), picked.end());
    std::array<int, 3> counts{};
    for (std::size_t i : picked) ++counts[assign[i]];
    const bool select_ok =
        picked.size() == 6 && unique.size() == 6 && counts == std::array<int, 3>{1, 2, 3};

    std::vector<std::size_t> idx(2000);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const SplitIndices parts = split(idx, 21);
    std::set<std::size_t> all(parts.train.begin(), parts.train.end());
    all.insert(parts.val.begin(), parts.val.end());
    all.insert(parts.test.begin(), parts.test.end());
    const bool split_ok = parts.train.size() == 1600 && parts.val.size() == 200 &&
                          parts.test.size() == 200 && all.size() == 2000;

    const bool ok = k == 3 && select_ok && split_ok;
    std::ostringstream d;
    d << "subsampling: elbow k=" << k << ", balanced quotas {1,10,10}->(" << counts[0] << ","
      << counts[1] << "," << counts[2] << "), split 2000->" << parts.train.size() << "/"
      << parts.val.size() << "/" << parts.test.size();
    report(9, ok, d.str());
}

// --- 10: dissipation fixtures ------------------------------------------------------

void criterion_dissipation() {
    const GridSpec g{8, 8, 8, 0.5};
    FlowState shear;
    shear.rho = ScalarField3D(g, "kgm-3", 1.0);
    shear.u[0] = ScalarField3D(g, "ms-1");
    shear.u[1] = ScalarField3D(g, "ms-1", 0.0);
    shear.u[2] = ScalarField3D(g, "ms-1", 0.0);
    for (int x = 0; x < g.nx; ++x)
        for (int y = 0; y < g.ny; ++y)
            for (int z = 0; z < g.nz; ++z) shear.u[0](x, y, z) = y * g.dx;
    const double shear_dev = std::abs(dissipation(shear) - 1.0);

    FlowState body;
    body.rho = ScalarField3D(g, "kgm-3", 1.0);
    body.u[0] = ScalarField3D(g, "ms-1");
    body.u[1] = ScalarField3D(g, "ms-1");
    body.u[2] = ScalarField3D(g, "ms-1", 0.0);
    for (int x = 0; x < g.nx; ++x)
        for (int y = 0; y < g.ny; ++y)
            for (int z = 0; z < g.nz; ++z) {
                body.u[0](x, y, z) = -(y * g.dx);
                body.u[1](x, y, z) = x * g.dx;
            }
    const double body_eps = std::abs(dissipation(body));

    const bool ok = shear_dev < 1e-10 && body_eps < 1e-10;
    std::ostringstream d;
    d << "dissipation: unit-shear dev=" << shear_dev << ", solid-body rate=" << body_eps;
    report(10, ok, d.str());
}

// --- 11: end-to-end baseline dominance ----------------------------------------------

void criterion_dominance() {
    Timer t;
    const FlowState fine = oracles::taylor_green_like(128);
    const FilterSpec spec{8};
    const FlowState coarse = favre_filter(fine, spec);
    const FlowState tricubic = upsample_state(coarse, 8);
    const FlowState nearest = oracles::upsample_nearest_state(coarse, 8);

    const ChannelStats stats = compute_stats(std::span<const FlowState>(&fine, 1));
    const double ssim_tri = metric_rho_u(tricubic, fine, MetricKind::ssim, stats);
    const double ssim_nn = metric_rho_u(nearest, fine, MetricKind::ssim, stats);
    const double ssim_sgs = metric_sgs(tricubic, fine, spec, MetricKind::ssim);

    const double ms = t.ms();
    const bool ok = ssim_tri > ssim_nn && ssim_sgs > 0.0 && ssim_sgs < 1.0 && ms < 120000.0;
    std::ostringstream d;
    d.precision(10);
    d << "128^3 coarsen-8x baselines: tricubic ssim_rho_u=" << ssim_tri
      << " vs nearest=" << ssim_nn << ", ssim_sgs=" << ssim_sgs << " (" << fmt_ms(ms)
      << ", budget 120 s)";
    report(11, ok, d.str());
}

// --- 12: reference dataset comparison (data-gated) -----------------------------------

void criterion_reference_data() {
    const char* root = std::getenv("FLOWSR_DATA_ROOT");
    if (root == nullptr) {
        report_skip(12, "reference 128^3 test split not present (set FLOWSR_DATA_ROOT)");
        return;
    }
    namespace fs = std::filesystem;
    fs::path dir;
    for (const char* candidate : {"momentum128_test", "momentum128/test", "."}) {
        const fs::path p = fs::path(root) / candidate;
        if (fs::exists(p / "info.json")) {
            dir = p;
            break;
        }
    }
    if (dir.empty()) {
        report_skip(12, "no info.json under " + std::string(root) +
                            " (expected the reference 128^3 test split)");
        return;
    }

    const InfoMeta info = parse_info(dir / "info.json");
    double sum_rho_u = 0.0, sum_sgs = 0.0;
    int n_used = 0;
    for (const LocalMeta& snap : info.local) {
        const FlowState truth = load_flow_state(info.global, snap, dir);
        if (truth.grid().nx != 128 || truth.grid().ny != 128 || truth.grid().nz != 128) continue;
        const FilterSpec spec{8};
        const FlowState pred = upsample_state(favre_filter(truth, spec), 8);
        sum_rho_u += metric_rho_u(pred, truth, MetricKind::ssim);
        sum_sgs += metric_sgs(pred, truth, spec, MetricKind::ssim);
        ++n_used;
    }
    if (n_used == 0) {
        report_skip(12, "info.json at " + dir.string() + " holds no 128^3 snapshots");
        return;
    }

    const double ssim_rho_u = sum_rho_u / n_used;
    const double ssim_sgs = sum_sgs / n_used;
    const bool ok = std::abs(ssim_rho_u - 0.820) <= 0.02 && std::abs(ssim_sgs - 0.431) <= 0.02;
    std::ostringstream d;
    d << "reference 8x baseline on " << n_used << " snapshots: ssim_rho_u=" << ssim_rho_u
      << " (target 0.820 +- 0.02), ssim_sgs=" << ssim_sgs << " (target 0.431 +- 0.02)";
    report(12, ok, d.str());
}

}  // namespace

int main() {
    run_criterion(1, criterion_flops);
    run_criterion(2, criterion_coef_matrix);
    run_criterion(3, criterion_conservation);
    run_criterion(4, criterion_ssim);
    run_criterion(5, criterion_nrmse);
    run_criterion(6, criterion_augmentation);
    run_criterion(7, criterion_losses);
    run_criterion(8, criterion_spectrum);
    run_criterion(9, criterion_subsampling);
    run_criterion(10, criterion_dissipation);
    run_criterion(11, criterion_dominance);
    run_criterion(12, criterion_reference_data);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed (or were skipped as data-gated)" << std::endl;
    return 0;
}
