#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "anystar/appearance.hpp"
#include "anystar/augment.hpp"
#include "anystar/labelgen.hpp"

namespace anystar {

/// Bad config text or a value that fails validation; the message starts
/// with the dotted key path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VolumeFormat { Nifti, Raw };
const char* to_string(VolumeFormat f);
VolumeFormat volume_format_from_string(const std::string& s);

struct StarConfig {
    int n_rays = 96;
    double prob_thresh = 0.5;
    double nms_thresh = 0.3;
    int grid_step = 2;
    bool operator==(const StarConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "anystar_out";
    VolumeFormat format = VolumeFormat::Nifti;
    bool compression = true;  // gzip NIfTI files
    bool emit_encodings = false;
    bool emit_previews = false;
    bool operator==(const OutputConfig&) const = default;
};

struct GeneratorConfig {
    std::uint64_t master_seed = 0;
    int n_samples = 1;
    /// Samples are indices first_index .. first_index + n_samples - 1.
    std::uint64_t first_index = 0;
    int workers = 1;
    GeneratorMode generator_mode = GeneratorMode::Mix;
    /// Emit partially augmented samples ending after this stage.
    std::optional<Stage> stop_after{};
    LabelGenConfig labelgen;
    AppearanceConfig appearance;
    AugmentConfig augment;
    StarConfig star;
    OutputConfig output;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const GeneratorConfig&) const = default;
};

/// Empty or whitespace-only text gives the defaults. Absent keys keep their
/// defaults; unknown keys are errors.
GeneratorConfig parse_config(const std::string& text);
GeneratorConfig load_config(const std::string& path);
/// Every field, pretty-printed.
std::string dump_config(const GeneratorConfig& cfg);

}  // namespace anystar
