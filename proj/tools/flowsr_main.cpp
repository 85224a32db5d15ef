// flowsr: batch front end for the compressible-turbulence super-resolution
// toolkit. Subcommands cover volume inspection, Favre coarsening, the
// tricubic baseline, the metric suite, dataset subsampling, augmentation
// self-checks, and TKE spectra.
//
// Errors leave on stderr as "error[<code>]: message" with a nonzero exit;
// code "args" marks bad invocations or contract violations, "run" marks
// I/O and data failures.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flowsr/augment.hpp"
#include "flowsr/blastnet_io.hpp"
#include "flowsr/coarsen.hpp"
#include "flowsr/field.hpp"
#include "flowsr/loss.hpp"
#include "flowsr/metrics.hpp"
#include "flowsr/subsample.hpp"
#include "flowsr/tricubic.hpp"

namespace {

using namespace flowsr;

constexpr char kDataRootEnv[] = "FLOWSR_DATA_ROOT";

const std::array<std::string, 4> kChannelNames = {"RHO_kgm-3", "UX_ms-1", "UY_ms-1", "UZ_ms-1"};

std::string env_data_root() {
    const char* root = std::getenv(kDataRootEnv);
    return root ? std::string(root) : std::string();
}

/// Shared addressing for on-disk states: a directory plus a hash tag names
/// the four channel files RHO_kgm-3_id<tag>.dat, UX_ms-1_id<tag>.dat, ...
struct StateAddress {
    std::string dir;
    std::string tag;
};

FlowState load_state(const StateAddress& address, const GridSpec& grid) {
    FlowState state;
    const std::filesystem::path base(address.dir);
    state.rho = read_volume(base / momentum_filename(kChannelNames[0], address.tag), grid,
                            "kgm-3");
    for (int k = 0; k < 3; ++k)
        state.u[k] = read_volume(base / momentum_filename(kChannelNames[k + 1], address.tag),
                                 grid, "ms-1");
    state.validate();
    return state;
}

void save_state(const FlowState& state, const StateAddress& address) {
    const std::filesystem::path base(address.dir);
    write_volume(state.rho, base / momentum_filename(kChannelNames[0], address.tag));
    for (int k = 0; k < 3; ++k)
        write_volume(state.u[k], base / momentum_filename(kChannelNames[k + 1], address.tag));
}

struct GridFlags {
    int nx = 0, ny = 0, nz = 0;
    double dx = 1.0;

    GridSpec resolve() const {
        GridSpec g{nx, ny > 0 ? ny : nx, nz > 0 ? nz : nx, dx};
        g.validate();
        return g;
    }
};

void add_grid_flags(CLI::App* cmd, GridFlags& flags) {
    cmd->add_option("--nx", flags.nx, "Voxels along x")->required();
    cmd->add_option("--ny", flags.ny, "Voxels along y (default: nx)");
    cmd->add_option("--nz", flags.nz, "Voxels along z (default: nx)");
    cmd->add_option("--dx", flags.dx, "Grid spacing in meters")->capture_default_str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

int cmd_inspect(const std::vector<std::string>& files, const GridFlags& flags) {
    const GridSpec grid = flags.resolve();
    for (const std::string& file : files) {
        const ScalarField3D f = read_volume(file, grid, "", /*reject_nonfinite=*/false);
        double lo = f.values[0], hi = f.values[0];
        std::size_t nonfinite = 0;
        bool positive = true;
        for (double v : f.values) {
            if (!std::isfinite(v)) {
                ++nonfinite;
                continue;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (!(v > 0.0)) positive = false;
        }
        std::cout << file << ": dims " << grid.nx << "x" << grid.ny << "x" << grid.nz
                  << ", min=" << lo << ", max=" << hi << ", nonfinite=" << nonfinite
                  << ", positive=" << (positive && nonfinite == 0 ? "yes" : "no") << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// coarsen
// ---------------------------------------------------------------------------

int cmd_coarsen(const StateAddress& in, const GridFlags& flags, int factor,
                const StateAddress& out) {
    const FlowState fine = load_state(in, flags.resolve());
    const FilterSpec spec{factor};
    const FlowState coarse = favre_filter(fine, spec);
    std::filesystem::create_directories(out.dir);
    save_state(coarse, out);

    // Conservation audit: block sums make total mass and momentum of the
    // coarse state match the fine state up to rounding.
    const double block = static_cast<double>(factor) * factor * factor;
    double fine_mass = 0.0, coarse_mass = 0.0;
    std::array<double, 3> fine_mom{}, coarse_mom{};
    for (std::size_t i = 0; i < fine.rho.values.size(); ++i) {
        fine_mass += fine.rho.values[i];
        for (int k = 0; k < 3; ++k) fine_mom[k] += fine.rho.values[i] * fine.u[k].values[i];
    }
    for (std::size_t i = 0; i < coarse.rho.values.size(); ++i) {
        coarse_mass += block * coarse.rho.values[i];
        for (int k = 0; k < 3; ++k)
            coarse_mom[k] += block * coarse.rho.values[i] * coarse.u[k].values[i];
    }

    std::cout << "coarsened " << flags.nx << "^3-extent state by factor " << factor << " -> "
              << out.dir << " tag " << out.tag << "\n";
    std::cout << "mass: fine=" << fine_mass << " coarse=" << coarse_mass
              << " rel_err=" << std::abs(coarse_mass - fine_mass) / std::abs(fine_mass) << "\n";
    const char* axes = "xyz";
    for (int k = 0; k < 3; ++k) {
        const double denom = std::max(std::abs(fine_mom[k]), 1e-300);
        std::cout << "momentum_" << axes[k] << ": fine=" << fine_mom[k]
                  << " coarse=" << coarse_mom[k]
                  << " rel_err=" << std::abs(coarse_mom[k] - fine_mom[k]) / denom << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

int cmd_baseline(const StateAddress& in, const GridFlags& flags, int factor,
                 const StateAddress& out) {
    const FlowState coarse = load_state(in, flags.resolve());
    const FlowState fine = upsample_state(coarse, factor);
    std::filesystem::create_directories(out.dir);
    save_state(fine, out);

    const GridSpec& og = fine.grid();
    std::cout << "upsampled " << coarse.grid().nx << "x" << coarse.grid().ny << "x"
              << coarse.grid().nz << " -> " << og.nx << "x" << og.ny << "x" << og.nz
              << " (factor " << factor << ")\n";
    std::cout << "flops sparse: " << flops(og, 4, FlopsMode::sparse) << "\n";
    std::cout << "flops dense: " << flops(og, 4, FlopsMode::dense) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

ChannelStats stats_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stats file: " + path);
    nlohmann::json j;
    in >> j;
    ChannelStats st;
    st.rho_mean = j.at("rho_mean").get<double>();
    st.rho_std = j.at("rho_std").get<double>();
    st.vel_mean = j.at("vel_mean").get<double>();
    st.vel_std = j.at("vel_std").get<double>();
    st.validate();
    return st;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& truth_dir,
                 const std::vector<std::string>& pred_tags,
                 const std::vector<std::string>& truth_tags, const GridFlags& flags, int factor,
                 const SsimConfig& ssim_cfg, double lambda, const std::string& stats_path,
                 const std::string& out_json, const std::string& out_csv) {
    if (pred_tags.size() != truth_tags.size() || pred_tags.empty())
        throw std::invalid_argument("evaluate: need equally many --pred-tag and --truth-tag");
    const GridSpec grid = flags.resolve();

    std::vector<FlowState> preds, truths;
    for (std::size_t i = 0; i < pred_tags.size(); ++i) {
        preds.push_back(load_state({pred_dir, pred_tags[i]}, grid));
        truths.push_back(load_state({truth_dir, truth_tags[i]}, grid));
    }

    const ChannelStats stats = stats_path.empty()
                                   ? compute_stats(std::span<const FlowState>(truths))
                                   : stats_from_file(stats_path);
    const FilterSpec spec{factor};

    std::string csv = report_csv_header() + "\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const MetricReport row = evaluate_pair(preds[i], truths[i], spec, stats, ssim_cfg);
        csv += report_csv_row(pred_tags[i], row) + "\n";
    }

    const MetricReport batch =
        evaluate_batch(std::span<const FlowState>(preds), std::span<const FlowState>(truths),
                       spec, stats, ssim_cfg);
    nlohmann::json j = report_to_json(batch);
    const LossConfig loss_cfg{lambda, 0.0};
    j["losses"] = {
        {"mse", mse_loss(std::span<const FlowState>(preds), std::span<const FlowState>(truths),
                         stats)},
        {"grad", grad_loss(std::span<const FlowState>(preds), std::span<const FlowState>(truths),
                           loss_cfg, stats)},
        {"phys", phys_loss(std::span<const FlowState>(preds), std::span<const FlowState>(truths),
                           loss_cfg, stats)},
    };
    j["n_pairs"] = preds.size();

    if (out_json.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_text_atomic(out_json, j.dump(2) + "\n");
    if (out_csv.empty())
        std::cout << csv;
    else
        write_text_atomic(out_csv, csv);
    return 0;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int cmd_sample(const std::string& manifest_in, const std::string& manifest_out,
               const std::string& data_root, int k, std::pair<int, int> k_range,
               std::size_t n_target, std::uint64_t seed) {
    std::vector<ManifestRecord> records = parse_manifest(manifest_in);
    if (records.empty()) throw std::runtime_error("sample: manifest has no records");
    if (n_target == 0) n_target = records.size();
    if (n_target > records.size())
        throw std::invalid_argument("sample: n_target exceeds the manifest record count");

    std::vector<MomentVector> features;
    features.reserve(records.size());
    for (const ManifestRecord& rec : records) {
        const GridSpec grid{rec.nx, rec.ny, rec.nz, 1.0};
        features.push_back(moments(load_state({data_root, rec.hash_id}, grid)));
    }

    int chosen_k = k;
    if (k <= 0) {
        chosen_k = elbow(features, k_range, seed);
        std::cout << "k: " << chosen_k << " (elbow over " << k_range.first << ".."
                  << k_range.second << ")\n";
    } else {
        std::cout << "k: " << chosen_k << " (fixed)\n";
    }

    const ClusterModel model = kmeans(features, chosen_k, seed);
    std::cout << "inertia: " << model.inertia << "\n";

    const std::vector<std::size_t> picked =
        balanced_select(model.assignments, n_target, seed + 1);
    const SplitIndices parts = split(picked, seed + 2);

    const auto label_of = [&](std::size_t idx) {
        for (std::size_t i : parts.val)
            if (i == idx) return SplitLabel::val;
        for (std::size_t i : parts.test)
            if (i == idx) return SplitLabel::test;
        return SplitLabel::train;
    };

    std::vector<ManifestRecord> out;
    out.reserve(picked.size());
    for (std::size_t idx : picked) {
        ManifestRecord rec = records[idx];
        rec.cluster = model.assignments[idx];
        rec.split = label_of(idx);
        out.push_back(std::move(rec));
    }
    emit_manifest(out, manifest_out);

    std::cout << "selected: " << picked.size() << " of " << records.size() << "\n";
    std::cout << "splits: train=" << parts.train.size() << " val=" << parts.val.size()
              << " test=" << parts.test.size() << "\n";
    std::cout << "wrote " << manifest_out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// augment-test
// ---------------------------------------------------------------------------

int cmd_augment_test(const StateAddress& in, const GridFlags& flags) {
    const FlowState state = load_state(in, flags.resolve());
    const GridSpec& g = state.grid();
    const bool cubic = g.nx == g.ny && g.ny == g.nz;
    if (!cubic)
        std::cout << "notice: non-cubic grid; axis-permuting elements skipped\n";

    double max_dev = 0.0;
    int ran = 0;
    int idx = 0;
    for (const CubeSymmetry& sym : all_symmetries()) {
        const bool permuting = sym.perm != std::array<int, 3>{0, 1, 2};
        if (permuting && !cubic) {
            ++idx;
            continue;
        }
        const double dev = verify_continuity(state, sym);
        max_dev = std::max(max_dev, dev);
        ++ran;
        std::cout << "element " << idx++ << " perm=(" << sym.perm[0] << "," << sym.perm[1] << ","
                  << sym.perm[2] << ") signs=(" << sym.signs[0] << "," << sym.signs[1] << ","
                  << sym.signs[2] << ") deviation=" << dev << "\n";
    }
    std::cout << "ran " << ran << " of 48 elements\n";
    std::cout << "max deviation: " << max_dev << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

int cmd_spectrum(const StateAddress& in, const GridFlags& flags, const std::string& out_path) {
    const FlowState state = load_state(in, flags.resolve());
    const Spectrum spec = tke_spectrum(state);

    std::string table = "# kappa E\n";
    for (std::size_t kappa = 0; kappa < spec.energy.size(); ++kappa) {
        std::ostringstream line;
        line << kappa << " " << std::setprecision(17) << spec.energy[kappa] << "\n";
        table += line.str();
    }
    write_text_atomic(out_path, table);

    double physical = 0.0;
    const std::size_t n = state.grid().voxel_count();
    for (int comp = 0; comp < 3; ++comp) {
        double mean = 0.0;
        for (double v : state.u[comp].values) mean += v;
        mean /= static_cast<double>(n);
        for (double v : state.u[comp].values) physical += 0.5 * (v - mean) * (v - mean);
    }
    physical /= static_cast<double>(n);

    const double total = spec.total();
    std::cout << "parseval: shell_total=" << total << " physical=" << physical
              << " abs_diff=" << std::abs(total - physical) << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "flowsr: coarsening, tricubic baselines, physics metrics, and dataset tooling for 3D "
        "compressible-turbulence super-resolution volumes"};
    app.require_subcommand(1);

    const std::string default_root = env_data_root();

    // --- inspect ---
    auto* inspect_cmd = app.add_subcommand("inspect", "Report dims, range, and payload health of raw volumes");
    std::vector<std::string> inspect_files;
    GridFlags inspect_grid;
    inspect_cmd->add_option("files", inspect_files, "Raw binary32 volume files")->required();
    add_grid_flags(inspect_cmd, inspect_grid);

    // --- coarsen ---
    auto* coarsen_cmd = app.add_subcommand("coarsen", "Favre-filter a fine state to a coarse one");
    StateAddress coarsen_in{default_root, ""}, coarsen_out{"", ""};
    GridFlags coarsen_grid;
    int coarsen_factor = 8;
    coarsen_cmd->add_option("--in-dir", coarsen_in.dir, "Directory of the fine state")->required();
    coarsen_cmd->add_option("--in-tag", coarsen_in.tag, "Hash tag of the fine state")->required();
    add_grid_flags(coarsen_cmd, coarsen_grid);
    coarsen_cmd->add_option("--factor", coarsen_factor, "Filter width per axis")->capture_default_str();
    coarsen_cmd->add_option("--out-dir", coarsen_out.dir, "Output directory")->required();
    coarsen_cmd->add_option("--out-tag", coarsen_out.tag, "Output hash tag")->required();

    // --- baseline ---
    auto* baseline_cmd = app.add_subcommand("baseline", "Tricubic-upsample a coarse state");
    StateAddress baseline_in{default_root, ""}, baseline_out{"", ""};
    GridFlags baseline_grid;
    int baseline_factor = 8;
    baseline_cmd->add_option("--in-dir", baseline_in.dir, "Directory of the coarse state")->required();
    baseline_cmd->add_option("--in-tag", baseline_in.tag, "Hash tag of the coarse state")->required();
    add_grid_flags(baseline_cmd, baseline_grid);
    baseline_cmd->add_option("--factor", baseline_factor, "Upsampling factor per axis")->capture_default_str();
    baseline_cmd->add_option("--out-dir", baseline_out.dir, "Output directory")->required();
    baseline_cmd->add_option("--out-tag", baseline_out.tag, "Output hash tag")->required();

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "Metric report for prediction/truth pairs");
    std::string eval_pred_dir, eval_truth_dir, eval_stats, eval_json, eval_csv;
    std::vector<std::string> eval_pred_tags, eval_truth_tags;
    GridFlags eval_grid;
    int eval_factor = 8;
    SsimConfig eval_ssim;
    double eval_lambda = 0.99;
    eval_cmd->add_option("--pred-dir", eval_pred_dir, "Directory of predictions")->required();
    eval_cmd->add_option("--truth-dir", eval_truth_dir, "Directory of references")->required();
    eval_cmd->add_option("--pred-tag", eval_pred_tags, "Prediction tags (comma-separated)")
        ->required()
        ->delimiter(',');
    eval_cmd->add_option("--truth-tag", eval_truth_tags, "Reference tags (comma-separated)")
        ->required()
        ->delimiter(',');
    add_grid_flags(eval_cmd, eval_grid);
    eval_cmd->add_option("--factor", eval_factor, "SGS filter width")->capture_default_str();
    eval_cmd->add_option("--window", eval_ssim.window, "SSIM window size")->capture_default_str();
    eval_cmd->add_option("--c1", eval_ssim.c1, "SSIM mean stabilizer")->capture_default_str();
    eval_cmd->add_option("--c2", eval_ssim.c2, "SSIM variance stabilizer")->capture_default_str();
    eval_cmd->add_option("--lambda", eval_lambda, "Gradient-loss weight")->capture_default_str();
    eval_cmd->add_option("--stats-file", eval_stats,
                         "JSON with rho_mean/rho_std/vel_mean/vel_std (default: from truths)");
    eval_cmd->add_option("--out-json", eval_json, "Write the batch report here (default: stdout)");
    eval_cmd->add_option("--out-csv", eval_csv, "Write per-pair rows here (default: stdout)");

    // --- sample ---
    auto* sample_cmd = app.add_subcommand("sample", "Cluster, balance-select, and split a manifest");
    std::string sample_in, sample_out, sample_root = default_root;
    int sample_k = 0;
    std::pair<int, int> sample_range{1, 8};
    std::size_t sample_target = 0;
    std::uint64_t sample_seed = 0;
    sample_cmd->add_option("--manifest", sample_in, "Input manifest CSV")->required();
    sample_cmd->add_option("--out", sample_out, "Output manifest CSV")->required();
    sample_cmd
        ->add_option("--data-root", sample_root,
                     "Directory holding the per-record volumes (default: $" +
                         std::string(kDataRootEnv) + ")")
        ->required(default_root.empty());
    sample_cmd->add_option("--k", sample_k, "Cluster count; 0 selects via the elbow sweep")
        ->capture_default_str();
    sample_cmd->add_option("--k-lo", sample_range.first, "Elbow sweep lower bound")->capture_default_str();
    sample_cmd->add_option("--k-hi", sample_range.second, "Elbow sweep upper bound")->capture_default_str();
    sample_cmd->add_option("--n-target", sample_target, "Samples to keep (0 = all)")->capture_default_str();
    sample_cmd->add_option("--seed", sample_seed, "Master seed")->capture_default_str();

    // --- augment-test ---
    auto* augment_cmd =
        app.add_subcommand("augment-test", "Continuity equivariance check over the symmetry group");
    StateAddress augment_in{default_root, ""};
    GridFlags augment_grid;
    augment_cmd->add_option("--in-dir", augment_in.dir, "Directory of the state")->required();
    augment_cmd->add_option("--in-tag", augment_in.tag, "Hash tag of the state")->required();
    add_grid_flags(augment_cmd, augment_grid);

    // --- spectrum ---
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Shell-averaged TKE spectrum to a table");
    StateAddress spectrum_in{default_root, ""};
    GridFlags spectrum_grid;
    std::string spectrum_out;
    spectrum_cmd->add_option("--in-dir", spectrum_in.dir, "Directory of the state")->required();
    spectrum_cmd->add_option("--in-tag", spectrum_in.tag, "Hash tag of the state")->required();
    add_grid_flags(spectrum_cmd, spectrum_grid);
    spectrum_cmd->add_option("--out", spectrum_out, "Output table path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(inspect_cmd))
            return cmd_inspect(inspect_files, inspect_grid);
        if (app.got_subcommand(coarsen_cmd))
            return cmd_coarsen(coarsen_in, coarsen_grid, coarsen_factor, coarsen_out);
        if (app.got_subcommand(baseline_cmd))
            return cmd_baseline(baseline_in, baseline_grid, baseline_factor, baseline_out);
        if (app.got_subcommand(eval_cmd))
            return cmd_evaluate(eval_pred_dir, eval_truth_dir, eval_pred_tags, eval_truth_tags,
                                eval_grid, eval_factor, eval_ssim, eval_lambda, eval_stats,
                                eval_json, eval_csv);
        if (app.got_subcommand(sample_cmd))
            return cmd_sample(sample_in, sample_out, sample_root, sample_k, sample_range,
                              sample_target, sample_seed);
        if (app.got_subcommand(augment_cmd))
            return cmd_augment_test(augment_in, augment_grid);
        if (app.got_subcommand(spectrum_cmd))
            return cmd_spectrum(spectrum_in, spectrum_grid, spectrum_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error[args]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[run]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
