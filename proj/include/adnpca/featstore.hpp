#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace adnpca {

using Index = Eigen::Index;

enum class Split { Train, TestNormal, TestAnomalous, Synthetic };

std::string_view to_string(Split split) noexcept;
Split split_from_string(std::string_view text);

/// Per-image feature vectors for one (category, stage, split).
///
/// Rows are images, columns are feature channels. Every entry is finite and
/// `image_ids.size() == rows()`. A train split holds normal images only.
struct FeatureMatrix {
    Eigen::MatrixXd data;
    std::string category;
    int stage = 0;
    Split split = Split::Train;
    std::vector<std::string> image_ids;

    Index rows() const noexcept { return data.rows(); }
    Index cols() const noexcept { return data.cols(); }
};

/// Builds a validated matrix. Missing ids default to "0", "1", ...
FeatureMatrix make_feature_matrix(Eigen::MatrixXd data, std::string category = {},
                                  int stage = 0, Split split = Split::Train,
                                  std::vector<std::string> image_ids = {});

/// Throws DimensionMismatch / NonFiniteEntry / InvalidArgument on a broken matrix.
void validate(const FeatureMatrix& m);

struct ImagePair {
    std::string normal_id;
    std::string synth_id;

    bool operator==(const ImagePair&) const = default;
};
using Pairing = std::vector<ImagePair>;

// FEATMAT1 binary layout: 8-byte magic, u32 n, u32 d, n*d f64 row-major,
// all little-endian. Metadata lives in a JSON sidecar at `<path>.json`.
inline constexpr std::string_view kFeatMatMagic = "FEATMAT1";
inline constexpr std::size_t kFeatMatHeaderBytes = 16;

std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Reads a FEATMAT1 file (with optional sidecar) or a CSV file whose leading
/// `#key=value` comment lines carry the metadata.
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

/// Writes FEATMAT1 plus sidecar. Values are stored bit-exactly.
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path,
                          const std::optional<Pairing>& pairing = std::nullopt);

std::string encode_featmat(const Eigen::MatrixXd& data);
Eigen::MatrixXd decode_featmat(std::string_view bytes, std::string_view origin = "<memory>");

FeatureMatrix parse_feature_csv(std::string_view text, std::string_view origin = "<memory>");

std::optional<Pairing> read_sidecar_pairing(const std::filesystem::path& path);

// EfficientNet-B4 channel count per stage.
inline constexpr std::array<int, 9> kStageChannels{48, 24, 32, 56, 112, 160, 272, 448, 1792};

int stage_channels(int stage);

/// True iff the column count matches the channel count of `m.stage`.
/// Throws UnknownStage for stages outside 0..8.
bool validate_stage_dims(const FeatureMatrix& m);

struct ManifestEntry {
    int stage = 0;
    std::filesystem::path file;
    Split split = Split::Train;
};

/// Dataset-level index of feature files. Relative paths are resolved against
/// the directory holding the manifest.
struct DatasetManifest {
    std::string category;
    std::vector<ManifestEntry> stages;
    std::optional<Pairing> pairing;
    nlohmann::json truth;  // null unless produced by the synthetic generator

    std::vector<int> stage_ids() const;
    const ManifestEntry* find(int stage, Split split) const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Parses every referenced file and checks the pairing is a bijection
/// between equally sized normal and synthetic splits of each stage.
void validate_manifest(const DatasetManifest& manifest);

/// Row permutation of `synth` aligned to the rows of `normal` under `pairing`.
/// Throws PairingMismatch unless the pairing is a bijection between the two id sets.
std::vector<Index> pairing_order(const std::vector<std::string>& normal_ids,
                                 const std::vector<std::string>& synth_ids,
                                 const Pairing& pairing);

nlohmann::json pairing_to_json(const Pairing& pairing);
Pairing pairing_from_json(const nlohmann::json& j);

}  // namespace adnpca
