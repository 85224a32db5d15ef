#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowsr/field.hpp"

namespace flowsr {

/// Dataset-level entry of an info.json file. Unknown keys are kept verbatim
/// in `extra` so a parse → serialize round trip loses nothing.
struct GlobalMeta {
    std::string dataset_id;
    std::array<int, 3> nxyz{0, 0, 0};
    int snapshots = 0;
    std::vector<std::string> variables;          // e.g. "RHO_kgm-3", "UX_ms-1"
    std::map<std::string, std::string> grid;     // axis tag -> relative path
    nlohmann::json extra = nlohmann::json::object();

    void validate() const;
};

/// Per-snapshot entry: an id, an optional time stamp, and one relative file
/// path per variable (parsed from the "<VAR> filename" keys).
struct LocalMeta {
    int id = -1;
    std::optional<double> time_s;
    std::map<std::string, std::string> files;  // variable -> relative path
};

struct InfoMeta {
    GlobalMeta global;
    std::vector<LocalMeta> local;
};

enum class SplitLabel { train, val, test, param_variation, forced_hit };

std::string to_string(SplitLabel label);
SplitLabel split_label_from(const std::string& text);

/// One row of a dataset manifest CSV
/// (header: hash_id,kaggle_id,description,cluster,nx,ny,nz,split).
struct ManifestRecord {
    std::string hash_id;
    std::string kaggle_id;
    std::string description;
    int cluster = -1;
    int nx = 0, ny = 0, nz = 0;
    SplitLabel split = SplitLabel::train;
};

/// Reads a headerless little-endian binary32 volume of exactly
/// 4*nx*ny*nz bytes into the canonical z-fastest layout, widening to double.
/// Throws std::runtime_error on size mismatch, unreadable files, or a
/// NaN/Inf payload (the message names the offending voxel index). Diagnostic
/// tools can pass reject_nonfinite = false to admit such payloads and scan
/// them instead.
ScalarField3D read_volume(const std::filesystem::path& path, const GridSpec& grid,
                          std::string unit = "", bool reject_nonfinite = true);

/// Inverse of read_volume: narrows to binary32 (round-to-nearest-even) and
/// writes little-endian bytes. The write goes to a temp file first and is
/// renamed into place so readers never observe a partial volume.
/// Refuses non-finite values.
void write_volume(const ScalarField3D& field, const std::filesystem::path& path);

/// Parses an info.json file (objects under "global" and "local").
InfoMeta parse_info(const std::filesystem::path& path);
InfoMeta parse_info_text(const std::string& text);

/// Assembles density + velocity from one snapshot's files, resolved against
/// base_dir. Requires the RHO_kgm-3 / UX_ms-1 / UY_ms-1 / UZ_ms-1 channels;
/// validates grids and density positivity. dx is not stored in the metadata
/// (grids live in separate coordinate files), so callers may supply it.
FlowState load_flow_state(const GlobalMeta& meta, const LocalMeta& local,
                          const std::filesystem::path& base_dir, double dx = 1.0);

/// CSV manifest round trip. Fields containing commas, quotes, or newlines are
/// double-quoted with "" escapes. A zero-byte file parses to an empty list.
/// Throws on a bad header, malformed rows, or duplicate hash ids.
std::vector<ManifestRecord> parse_manifest(const std::filesystem::path& path);
std::vector<ManifestRecord> parse_manifest_text(const std::string& text);
void emit_manifest(std::span<const ManifestRecord> records,
                   const std::filesystem::path& path);
std::string manifest_to_text(std::span<const ManifestRecord> records);

/// Canonical per-snapshot volume filename: "<var>_id<hash>.dat".
std::string momentum_filename(const std::string& var, const std::string& hash);

}  // namespace flowsr
