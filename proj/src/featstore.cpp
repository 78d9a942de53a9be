#include "adnpca/featstore.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_map>

#include "adnpca/error.hpp"
#include "adnpca/io.hpp"

namespace adnpca {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::Train: return "train";
        case Split::TestNormal: return "test_normal";
        case Split::TestAnomalous: return "test_anomalous";
        case Split::Synthetic: return "synthetic";
    }
    return "train";
}

Split split_from_string(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test_normal") return Split::TestNormal;
    if (text == "test_anomalous") return Split::TestAnomalous;
    if (text == "synthetic") return Split::Synthetic;
    throw Error(ErrorKind::MalformedFile, "unknown split '" + std::string(text) + "'");
}

void validate(const FeatureMatrix& m) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "feature matrix must be at least 1x1");
    }
    if (static_cast<Index>(m.image_ids.size()) != m.rows()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "image_ids has " + std::to_string(m.image_ids.size()) + " entries for " +
                        std::to_string(m.rows()) + " rows");
    }
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m.data(i, j))) {
                throw Error(ErrorKind::NonFiniteEntry, "non-finite value at row " +
                                                           std::to_string(i) + ", col " +
                                                           std::to_string(j));
            }
        }
    }
}

FeatureMatrix make_feature_matrix(Eigen::MatrixXd data, std::string category, int stage,
                                  Split split, std::vector<std::string> image_ids) {
    FeatureMatrix m;
    m.data = std::move(data);
    m.category = std::move(category);
    m.stage = stage;
    m.split = split;
    if (image_ids.empty()) {
        image_ids.reserve(static_cast<std::size_t>(m.data.rows()));
        for (Index i = 0; i < m.data.rows(); ++i) image_ids.push_back(std::to_string(i));
    }
    m.image_ids = std::move(image_ids);
    validate(m);
    return m;
}

fs::path sidecar_path(const fs::path& path) {
    fs::path p = path;
    p += ".json";
    return p;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

json metadata_json(const FeatureMatrix& m, const std::optional<Pairing>& pairing) {
    json j;
    j["category"] = m.category;
    j["stage"] = m.stage;
    j["split"] = std::string(to_string(m.split));
    j["image_ids"] = m.image_ids;
    j["pairing"] = pairing ? pairing_to_json(*pairing) : json(nullptr);
    return j;
}

void apply_sidecar(FeatureMatrix& m, const fs::path& path) {
    const fs::path side = sidecar_path(path);
    if (!fs::exists(side)) return;
    json j;
    try {
        j = json::parse(io::read_file(side));
        if (j.contains("category")) m.category = j.at("category").get<std::string>();
        if (j.contains("stage")) m.stage = j.at("stage").get<int>();
        if (j.contains("split")) m.split = split_from_string(j.at("split").get<std::string>());
        if (j.contains("image_ids") && !j.at("image_ids").is_null()) {
            m.image_ids = j.at("image_ids").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, "bad sidecar '" + side.string() + "': " + e.what());
    }
}

}  // namespace

std::string encode_featmat(const Eigen::MatrixXd& data) {
    std::string out;
    out.reserve(kFeatMatHeaderBytes + static_cast<std::size_t>(data.size()) * 8);
    out.append(kFeatMatMagic);
    put_u32(out, static_cast<std::uint32_t>(data.rows()));
    put_u32(out, static_cast<std::uint32_t>(data.cols()));
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(data(i, j)));
    }
    return out;
}

Eigen::MatrixXd decode_featmat(std::string_view bytes, std::string_view origin) {
    const std::string where(origin);
    if (bytes.size() < kFeatMatHeaderBytes) {
        throw Error(ErrorKind::MalformedFile, "'" + where + "' is truncated before the header ends");
    }
    if (bytes.substr(0, kFeatMatMagic.size()) != kFeatMatMagic) {
        throw Error(ErrorKind::MalformedFile, "'" + where + "' does not start with FEATMAT1");
    }
    const auto n = get_le(bytes, 8, 4);
    const auto d = get_le(bytes, 12, 4);
    if (n == 0 || d == 0) {
        throw Error(ErrorKind::MalformedFile, "'" + where + "' declares an empty matrix");
    }
    const std::size_t payload = bytes.size() - kFeatMatHeaderBytes;
    if (payload % 8 != 0) {
        throw Error(ErrorKind::MalformedFile, "'" + where + "' payload ends mid-value");
    }
    if (payload / 8 != n * d) {
        throw Error(ErrorKind::DimensionMismatch,
                    "'" + where + "' header says " + std::to_string(n) + "x" + std::to_string(d) +
                        " but payload holds " + std::to_string(payload / 8) + " values");
    }
    Eigen::MatrixXd data(static_cast<Index>(n), static_cast<Index>(d));
    std::size_t offset = kFeatMatHeaderBytes;
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) {
            data(i, j) = std::bit_cast<double>(get_le(bytes, offset, 8));
            offset += 8;
        }
    }
    return data;
}

FeatureMatrix parse_feature_csv(std::string_view text, std::string_view origin) {
    const std::string where(origin);
    FeatureMatrix m;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    std::size_t line_no = 0;
    for (std::string_view raw : split_on(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            for (std::string_view kv : split_on(line, ',')) {
                kv = trim(kv);
                if (kv.empty()) continue;
                const auto eq = kv.find('=');
                if (eq == std::string_view::npos) {
                    throw Error(ErrorKind::MalformedFile,
                                where + ":" + std::to_string(line_no) + ": expected key=value");
                }
                const std::string_view key = trim(kv.substr(0, eq));
                const std::string_view value = trim(kv.substr(eq + 1));
                if (key == "category") {
                    m.category = std::string(value);
                } else if (key == "stage") {
                    int stage = 0;
                    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), stage);
                    if (ec != std::errc{} || p != value.data() + value.size()) {
                        throw Error(ErrorKind::MalformedFile, where + ": bad stage '" + std::string(value) + "'");
                    }
                    m.stage = stage;
                } else if (key == "split") {
                    m.split = split_from_string(value);
                } else if (key == "ids") {
                    for (std::string_view id : split_on(value, ';')) ids.emplace_back(trim(id));
                }
            }
            continue;
        }
        std::vector<double> row;
        for (std::string_view cell : split_on(line, ',')) {
            cell = trim(cell);
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || p != cell.data() + cell.size()) {
                throw Error(ErrorKind::MalformedFile, where + ":" + std::to_string(line_no) +
                                                          ": not a number '" + std::string(cell) + "'");
            }
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonFiniteEntry, where + ": non-finite value at row " +
                                                           std::to_string(rows.size()) + ", col " +
                                                           std::to_string(row.size()));
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorKind::DimensionMismatch, where + ":" + std::to_string(line_no) + ": row has " +
                                                          std::to_string(row.size()) + " values, expected " +
                                                          std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(ErrorKind::MalformedFile, "'" + where + "' contains no data rows");
    }
    m.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.data.rows(); ++i) {
        for (Index j = 0; j < m.data.cols(); ++j) m.data(i, j) = rows[i][j];
    }
    if (ids.empty()) {
        for (Index i = 0; i < m.data.rows(); ++i) ids.push_back(std::to_string(i));
    }
    m.image_ids = std::move(ids);
    validate(m);
    return m;
}

FeatureMatrix read_feature_matrix(const fs::path& path) {
    if (!fs::exists(path)) {
        throw Error(ErrorKind::IoFailure, "no such file '" + path.string() + "'");
    }
    const std::string bytes = io::read_file(path);
    const bool is_binary = bytes.compare(0, kFeatMatMagic.size(), kFeatMatMagic) == 0;
    if (!is_binary) {
        const auto first = bytes.find_first_not_of(" \t\r\n");
        const bool looks_csv =
            path.extension() == ".csv" ||
            (first != std::string::npos && std::string_view("#+-.0123456789").find(bytes[first]) != std::string_view::npos);
        if (!looks_csv) {
            throw Error(ErrorKind::MalformedFile, "'" + path.string() + "' has neither FEATMAT1 magic nor CSV content");
        }
        FeatureMatrix m = parse_feature_csv(bytes, path.string());
        apply_sidecar(m, path);
        validate(m);
        return m;
    }
    FeatureMatrix m;
    m.data = decode_featmat(bytes, path.string());
    for (Index i = 0; i < m.data.rows(); ++i) m.image_ids.push_back(std::to_string(i));
    apply_sidecar(m, path);
    validate(m);
    return m;
}

void write_feature_matrix(const FeatureMatrix& m, const fs::path& path,
                          const std::optional<Pairing>& pairing) {
    validate(m);
    io::write_file_atomic(path, encode_featmat(m.data));
    io::write_file_atomic(sidecar_path(path), metadata_json(m, pairing).dump(2) + "\n");
}

std::optional<Pairing> read_sidecar_pairing(const fs::path& path) {
    const fs::path side = sidecar_path(path);
    if (!fs::exists(side)) return std::nullopt;
    try {
        const json j = json::parse(io::read_file(side));
        if (!j.contains("pairing") || j.at("pairing").is_null()) return std::nullopt;
        return pairing_from_json(j.at("pairing"));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, "bad sidecar '" + side.string() + "': " + e.what());
    }
}

int stage_channels(int stage) {
    if (stage < 0 || stage >= static_cast<int>(kStageChannels.size())) {
        throw Error(ErrorKind::UnknownStage, "stage " + std::to_string(stage) + " is outside 0..8");
    }
    return kStageChannels[static_cast<std::size_t>(stage)];
}

bool validate_stage_dims(const FeatureMatrix& m) {
    return m.cols() == stage_channels(m.stage);
}

json pairing_to_json(const Pairing& pairing) {
    json arr = json::array();
    for (const auto& p : pairing) arr.push_back({{"normal", p.normal_id}, {"synthetic", p.synth_id}});
    return arr;
}

Pairing pairing_from_json(const json& j) {
    Pairing out;
    for (const auto& e : j) {
        if (e.is_array()) {
            out.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
        } else {
            out.push_back({e.at("normal").get<std::string>(), e.at("synthetic").get<std::string>()});
        }
    }
    return out;
}

std::vector<int> DatasetManifest::stage_ids() const {
    std::set<int> ids;
    for (const auto& e : stages) ids.insert(e.stage);
    return {ids.begin(), ids.end()};
}

const ManifestEntry* DatasetManifest::find(int stage, Split split) const {
    for (const auto& e : stages) {
        if (e.stage == stage && e.split == split) return &e;
    }
    return nullptr;
}

DatasetManifest read_manifest(const fs::path& path) {
    if (!fs::exists(path)) {
        throw Error(ErrorKind::IoFailure, "no such manifest '" + path.string() + "'");
    }
    const fs::path base = path.parent_path();
    DatasetManifest m;
    try {
        const json j = json::parse(io::read_file(path));
        m.category = j.value("category", std::string{});
        for (const auto& e : j.at("stages")) {
            ManifestEntry entry;
            entry.stage = e.at("stage").get<int>();
            entry.split = split_from_string(e.at("split").get<std::string>());
            fs::path file = e.at("file").get<std::string>();
            entry.file = file.is_relative() ? base / file : file;
            m.stages.push_back(std::move(entry));
        }
        if (j.contains("pairing") && !j.at("pairing").is_null()) {
            m.pairing = pairing_from_json(j.at("pairing"));
        }
        if (j.contains("truth")) m.truth = j.at("truth");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, "bad manifest '" + path.string() + "': " + e.what());
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
    const fs::path base = path.parent_path();
    json j;
    j["category"] = manifest.category;
    j["stages"] = json::array();
    for (const auto& e : manifest.stages) {
        fs::path file = e.file;
        if (!base.empty() && file.is_absolute() == base.is_absolute()) {
            const fs::path rel = file.lexically_relative(base);
            if (!rel.empty() && *rel.begin() != "..") file = rel;
        }
        j["stages"].push_back({{"stage", e.stage}, {"file", file.generic_string()},
                               {"split", std::string(to_string(e.split))}});
    }
    j["pairing"] = manifest.pairing ? pairing_to_json(*manifest.pairing) : json(nullptr);
    j["truth"] = manifest.truth;
    io::write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<Index> pairing_order(const std::vector<std::string>& normal_ids,
                                 const std::vector<std::string>& synth_ids, const Pairing& pairing) {
    if (pairing.size() != normal_ids.size() || pairing.size() != synth_ids.size()) {
        throw Error(ErrorKind::PairingMismatch,
                    "pairing has " + std::to_string(pairing.size()) + " entries for " +
                        std::to_string(normal_ids.size()) + " normal and " +
                        std::to_string(synth_ids.size()) + " synthetic rows");
    }
    std::unordered_map<std::string, std::string> partner;
    for (const auto& p : pairing) {
        if (!partner.emplace(p.normal_id, p.synth_id).second) {
            throw Error(ErrorKind::PairingMismatch, "normal id '" + p.normal_id + "' paired twice");
        }
    }
    std::unordered_map<std::string, Index> synth_row;
    for (std::size_t i = 0; i < synth_ids.size(); ++i) {
        if (!synth_row.emplace(synth_ids[i], static_cast<Index>(i)).second) {
            throw Error(ErrorKind::PairingMismatch, "duplicate synthetic id '" + synth_ids[i] + "'");
        }
    }
    std::vector<Index> order;
    order.reserve(normal_ids.size());
    std::vector<bool> used(synth_ids.size(), false);
    for (const auto& id : normal_ids) {
        auto it = partner.find(id);
        if (it == partner.end()) {
            throw Error(ErrorKind::PairingMismatch, "normal id '" + id + "' has no synthetic partner");
        }
        auto row = synth_row.find(it->second);
        if (row == synth_row.end()) {
            throw Error(ErrorKind::PairingMismatch, "synthetic id '" + it->second + "' not present");
        }
        if (used[static_cast<std::size_t>(row->second)]) {
            throw Error(ErrorKind::PairingMismatch, "synthetic id '" + it->second + "' paired twice");
        }
        used[static_cast<std::size_t>(row->second)] = true;
        order.push_back(row->second);
    }
    return order;
}

void validate_manifest(const DatasetManifest& manifest) {
    for (const auto& e : manifest.stages) {
        if (!fs::exists(e.file)) {
            throw Error(ErrorKind::IoFailure, "manifest references missing file '" + e.file.string() + "'");
        }
        (void)read_feature_matrix(e.file);
    }
    if (!manifest.pairing) return;
    for (int stage : manifest.stage_ids()) {
        const ManifestEntry* synth = manifest.find(stage, Split::Synthetic);
        if (synth == nullptr) continue;
        const FeatureMatrix s = read_feature_matrix(synth->file);
        bool matched = false;
        for (Split normal_split : {Split::TestNormal, Split::Train}) {
            const ManifestEntry* normal = manifest.find(stage, normal_split);
            if (normal == nullptr) continue;
            const FeatureMatrix n = read_feature_matrix(normal->file);
            try {
                (void)pairing_order(n.image_ids, s.image_ids, *manifest.pairing);
                matched = true;
                break;
            } catch (const Error&) {
            }
        }
        if (!matched) {
            throw Error(ErrorKind::PairingMismatch, "pairing is not a bijection onto any normal split of stage " +
                                                        std::to_string(stage));
        }
    }
}

}  // namespace adnpca
