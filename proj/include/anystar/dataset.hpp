#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anystar/config.hpp"
#include "anystar/evalmetrics.hpp"

namespace anystar {

inline constexpr const char* kToolVersion = "anystar 1.0.0";

struct GeneratedSample {
    JointSample sample;
    BackgroundMode background = BackgroundMode::PlainRand;
    std::vector<Stage> fired;
};

/// Sample `index` of the dataset; a pure function of (master_seed, index)
/// and the config. Stages draw from stream_key(master_seed, index, tag) with
/// tags "labels", "appearance" and "augment".
GeneratedSample generate_sample(const GeneratorConfig& cfg, std::uint64_t index);

struct FileRecord {
    std::string path;  // relative to the manifest directory
    std::string sha256;
    bool operator==(const FileRecord&) const = default;
};

struct SampleRecord {
    std::uint64_t index = 0;
    std::uint64_t master_seed = 0;
    GeneratorMode generator_mode = GeneratorMode::Mix;
    BackgroundMode background_mode = BackgroundMode::PlainRand;
    int instances = 0;
    FileRecord image;
    FileRecord labels;
    std::optional<FileRecord> encoding;
    /// Diagnostic only, never digested.
    std::optional<std::string> preview;
    bool operator==(const SampleRecord&) const = default;
};

struct FailureRecord {
    std::uint64_t index = 0;
    std::string error;
    bool operator==(const FailureRecord&) const = default;
};

struct DatasetManifest {
    GeneratorConfig config;
    std::string tool_version = kToolVersion;
    std::vector<SampleRecord> samples;  // ascending index
    std::vector<FailureRecord> failures;
    bool operator==(const DatasetManifest&) const = default;
};

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

/// "manifest.json" for a run starting at index 0, otherwise
/// "manifest_<first>_<last>.json" so disjoint ranges can share a directory.
std::string manifest_filename(const GeneratorConfig& cfg);
std::string sample_file_stem(std::uint64_t index);

/// Writes every sample with cfg.workers threads, then the manifest. Failed
/// samples are recorded and skipped. An IO error stops the run, removes the
/// files this run wrote, and is rethrown as IoError. `make` produces each
/// sample.
using SampleFn = std::function<GeneratedSample(const GeneratorConfig&, std::uint64_t)>;
DatasetManifest generate_dataset(const GeneratorConfig& cfg, const SampleFn& make = generate_sample);

struct VerifyResult {
    std::size_t checked = 0;
    std::vector<std::string> missing;
    std::vector<std::string> mismatched;
    bool ok() const { return missing.empty() && mismatched.empty(); }
};

VerifyResult verify_manifest(const std::string& manifest_path);

MatchReport evaluate_files(const std::string& pred_path, const std::string& gt_path);

// Preview

struct PreviewImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
};

/// Fixed color per id; id 0 is black.
std::array<std::uint8_t, 3> label_color(Label id);

/// Gray image slice (values clamped to [0, 1]) on the left and the colored
/// label slice on the right. axis 0, 1, 2 is x, y, z; the slice is shown
/// with the lower remaining axis horizontal.
PreviewImage render_preview(const Image& image, const LabelVolume& labels, int axis, int index);

/// `sample` names a sample's image file, its label file, or the common stem.
struct SamplePaths {
    std::string image;
    std::string labels;
};
SamplePaths resolve_sample(const std::string& sample);

}  // namespace anystar
