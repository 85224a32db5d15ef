#include "flowsr/blastnet_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flowsr {

namespace {

constexpr char kManifestHeader[] = "hash_id,kaggle_id,description,cluster,nx,ny,nz,split";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& text, const char* what) {
    int value = 0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::runtime_error(std::string("manifest: bad integer in column '") + what +
                                 "': '" + text + "'");
    return value;
}

std::vector<std::byte> read_all_bytes(const std::filesystem::path& path,
                                      std::uintmax_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open volume file: " + path.string());
    std::vector<std::byte> bytes(expected);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(expected));
    if (static_cast<std::uintmax_t>(in.gcount()) != expected)
        throw std::runtime_error("short read on volume file: " + path.string());
    return bytes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Raw binary32 volumes
// ---------------------------------------------------------------------------

ScalarField3D read_volume(const std::filesystem::path& path, const GridSpec& grid,
                          std::string unit, bool reject_nonfinite) {
    grid.validate();
    std::error_code ec;
    const std::uintmax_t actual = std::filesystem::file_size(path, ec);
    if (ec)
        throw std::runtime_error("cannot stat volume file: " + path.string());
    const std::uintmax_t expected = 4ull * grid.voxel_count();
    if (actual != expected)
        throw std::runtime_error("volume size mismatch for " + path.string() + ": expected " +
                                 std::to_string(expected) + " bytes, found " +
                                 std::to_string(actual));

    const std::vector<std::byte> bytes = read_all_bytes(path, expected);
    ScalarField3D field(grid, std::move(unit));
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        // Assemble each word explicitly little-endian so decoding does not
        // depend on host byte order.
        const std::uint32_t word =
            static_cast<std::uint32_t>(std::to_integer<std::uint32_t>(bytes[4 * i])) |
            (std::to_integer<std::uint32_t>(bytes[4 * i + 1]) << 8) |
            (std::to_integer<std::uint32_t>(bytes[4 * i + 2]) << 16) |
            (std::to_integer<std::uint32_t>(bytes[4 * i + 3]) << 24);
        const float v = std::bit_cast<float>(word);
        if (reject_nonfinite && !std::isfinite(v))
            throw std::runtime_error("non-finite value at voxel " + std::to_string(i) + " of " +
                                     path.string());
        field.values[i] = static_cast<double>(v);
    }
    return field;
}

void write_volume(const ScalarField3D& field, const std::filesystem::path& path) {
    field.validate_shape();
    if (!field.all_finite())
        throw std::runtime_error("refusing to write non-finite values to " + path.string());

    std::vector<std::byte> bytes(4 * field.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const auto word = std::bit_cast<std::uint32_t>(static_cast<float>(field.values[i]));
        bytes[4 * i] = static_cast<std::byte>(word & 0xff);
        bytes[4 * i + 1] = static_cast<std::byte>((word >> 8) & 0xff);
        bytes[4 * i + 2] = static_cast<std::byte>((word >> 16) & 0xff);
        bytes[4 * i + 3] = static_cast<std::byte>((word >> 24) & 0xff);
    }

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open for write: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move volume into place at " + path.string() + ": " +
                                 ec.message());
    }
}

// ---------------------------------------------------------------------------
// info.json metadata
// ---------------------------------------------------------------------------

void GlobalMeta::validate() const {
    if (variables.empty())
        throw std::runtime_error("info metadata: 'variables' must be nonempty");
    for (int n : nxyz)
        if (n <= 0) throw std::runtime_error("info metadata: Nxyz entries must be positive");
}

namespace {

constexpr char kFilenameSuffix[] = " filename";

GlobalMeta parse_global(const nlohmann::json& g) {
    GlobalMeta meta;
    for (const auto& [key, value] : g.items()) {
        if (key == "dataset_id") {
            meta.dataset_id = value.get<std::string>();
        } else if (key == "Nxyz") {
            if (!value.is_array() || value.size() != 3)
                throw std::runtime_error("info metadata: Nxyz must hold three integers");
            for (int a = 0; a < 3; ++a) meta.nxyz[a] = value[a].get<int>();
        } else if (key == "snapshots") {
            meta.snapshots = value.get<int>();
        } else if (key == "variables") {
            meta.variables = value.get<std::vector<std::string>>();
        } else if (key == "grid") {
            for (const auto& [axis, p] : value.items())
                meta.grid[axis] = p.get<std::string>();
        } else {
            meta.extra[key] = value;
        }
    }
    meta.validate();
    return meta;
}

LocalMeta parse_local(const nlohmann::json& rec) {
    LocalMeta local;
    if (!rec.contains("id"))
        throw std::runtime_error("info metadata: local record without an 'id'");
    local.id = rec.at("id").get<int>();
    for (const auto& [raw_key, value] : rec.items()) {
        const std::string key = trim(raw_key);
        if (key == "id") continue;
        if (key == "time [s]") {
            local.time_s = value.get<double>();
            continue;
        }
        // Listings pad the per-file keys for alignment ("   P_Pa filename"),
        // so match on the trimmed "<VAR> filename" pattern.
        if (key.size() > sizeof(kFilenameSuffix) - 1 &&
            key.ends_with(kFilenameSuffix)) {
            const std::string var = trim(key.substr(0, key.size() - (sizeof(kFilenameSuffix) - 1)));
            local.files[var] = value.get<std::string>();
        }
    }
    return local;
}

}  // namespace

InfoMeta parse_info_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("info metadata: invalid JSON: ") + e.what());
    }
    if (!doc.contains("global"))
        throw std::runtime_error("info metadata: missing 'global' object");

    InfoMeta info;
    info.global = parse_global(doc.at("global"));
    if (doc.contains("local")) {
        for (const auto& rec : doc.at("local")) info.local.push_back(parse_local(rec));
    }

    // ids must be unique and contiguous from 0; every referenced variable
    // must be declared in the global list.
    std::vector<bool> seen(info.local.size(), false);
    for (const LocalMeta& l : info.local) {
        if (l.id < 0 || static_cast<std::size_t>(l.id) >= info.local.size() || seen[l.id])
            throw std::runtime_error("info metadata: local ids must be unique and contiguous from 0");
        seen[l.id] = true;
        for (const auto& [var, p] : l.files) {
            (void)p;
            bool known = false;
            for (const std::string& v : info.global.variables)
                if (v == var) { known = true; break; }
            if (!known)
                throw std::runtime_error("info metadata: local record " + std::to_string(l.id) +
                                         " references undeclared variable '" + var + "'");
        }
    }
    return info;
}

InfoMeta parse_info(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open info metadata file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_info_text(buf.str());
}

FlowState load_flow_state(const GlobalMeta& meta, const LocalMeta& local,
                          const std::filesystem::path& base_dir, double dx) {
    static const std::array<std::string, 4> kChannels = {"RHO_kgm-3", "UX_ms-1", "UY_ms-1",
                                                         "UZ_ms-1"};
    const GridSpec grid{meta.nxyz[0], meta.nxyz[1], meta.nxyz[2], dx};

    std::array<ScalarField3D, 4> loaded;
    for (std::size_t c = 0; c < kChannels.size(); ++c) {
        const auto it = local.files.find(kChannels[c]);
        if (it == local.files.end())
            throw std::runtime_error("snapshot " + std::to_string(local.id) +
                                     " is missing channel " + kChannels[c]);
        const std::string unit_tag = kChannels[c].substr(kChannels[c].find('_') + 1);
        loaded[c] = read_volume(base_dir / it->second, grid, unit_tag);
    }

    FlowState state;
    state.rho = std::move(loaded[0]);
    state.u = {std::move(loaded[1]), std::move(loaded[2]), std::move(loaded[3])};
    state.validate();
    return state;
}

// ---------------------------------------------------------------------------
// Manifest CSV
// ---------------------------------------------------------------------------

std::string to_string(SplitLabel label) {
    switch (label) {
        case SplitLabel::train: return "train";
        case SplitLabel::val: return "val";
        case SplitLabel::test: return "test";
        case SplitLabel::param_variation: return "param-variation";
        case SplitLabel::forced_hit: return "forced-hit";
    }
    throw std::invalid_argument("unknown split label");
}

SplitLabel split_label_from(const std::string& text) {
    if (text == "train") return SplitLabel::train;
    if (text == "val") return SplitLabel::val;
    if (text == "test") return SplitLabel::test;
    if (text == "param-variation") return SplitLabel::param_variation;
    if (text == "forced-hit") return SplitLabel::forced_hit;
    throw std::runtime_error("manifest: unknown split label '" + text + "'");
}

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_csv(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// Splits CSV text into records of fields, honoring double-quoted fields
/// with "" escapes and embedded separators/newlines.
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool row_started = false;

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                fields.push_back(cur);
                cur.clear();
                row_started = true;
                break;
            case '\r':
                break;  // tolerate CRLF line endings
            case '\n':
                if (row_started || !cur.empty() || !fields.empty()) {
                    fields.push_back(cur);
                    records.push_back(std::move(fields));
                    fields = {};
                    cur.clear();
                    row_started = false;
                }
                break;
            default:
                cur += c;
                row_started = true;
        }
    }
    if (in_quotes)
        throw std::runtime_error("manifest: unterminated quoted field");
    if (row_started || !cur.empty() || !fields.empty()) {
        fields.push_back(cur);
        records.push_back(std::move(fields));
    }
    return records;
}

}  // namespace

std::vector<ManifestRecord> parse_manifest_text(const std::string& text) {
    const auto records = split_csv(text);
    if (records.empty()) return {};  // zero-byte manifest: no entries

    const std::vector<std::string> expected_header = {
        "hash_id", "kaggle_id", "description", "cluster", "nx", "ny", "nz", "split"};
    if (records.front() != expected_header)
        throw std::runtime_error(std::string("manifest: header must be '") + kManifestHeader + "'");

    std::vector<ManifestRecord> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r];
        if (f.size() != 8)
            throw std::runtime_error("manifest: row " + std::to_string(r) + " has " +
                                     std::to_string(f.size()) + " fields, expected 8");
        ManifestRecord rec;
        rec.hash_id = f[0];
        rec.kaggle_id = f[1];
        rec.description = f[2];
        rec.cluster = parse_int(f[3], "cluster");
        rec.nx = parse_int(f[4], "nx");
        rec.ny = parse_int(f[5], "ny");
        rec.nz = parse_int(f[6], "nz");
        rec.split = split_label_from(trim(f[7]));
        if (rec.hash_id.empty())
            throw std::runtime_error("manifest: row " + std::to_string(r) + " has an empty hash_id");
        for (const ManifestRecord& prev : out)
            if (prev.hash_id == rec.hash_id)
                throw std::runtime_error("manifest: duplicate hash_id '" + rec.hash_id + "'");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ManifestRecord> parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open manifest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest_text(buf.str());
}

std::string manifest_to_text(std::span<const ManifestRecord> records) {
    std::string out = kManifestHeader;
    out += '\n';
    for (const ManifestRecord& r : records) {
        out += quote_csv(r.hash_id);
        out += ',';
        out += quote_csv(r.kaggle_id);
        out += ',';
        out += quote_csv(r.description);
        out += ',';
        out += std::to_string(r.cluster);
        out += ',';
        out += std::to_string(r.nx);
        out += ',';
        out += std::to_string(r.ny);
        out += ',';
        out += std::to_string(r.nz);
        out += ',';
        out += to_string(r.split);
        out += '\n';
    }
    return out;
}

void emit_manifest(std::span<const ManifestRecord> records,
                   const std::filesystem::path& path) {
    const std::string text = manifest_to_text(records);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open for write: " + tmp.string());
        out << text;
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move manifest into place at " + path.string() + ": " +
                                 ec.message());
    }
}

std::string momentum_filename(const std::string& var, const std::string& hash) {
    if (var.empty())
        throw std::invalid_argument("momentum_filename: variable name must be nonempty");
    if (hash.empty())
        throw std::invalid_argument("momentum_filename: hash id must be nonempty");
    return var + "_id" + hash + ".dat";
}

}  // namespace flowsr
