#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "anystar/starconvex.hpp"
#include "anystar/volume.hpp"

namespace anystar {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File kind from the extension: ".nii", ".nii.gz" (gzip), or ".raw" with a
/// JSON sidecar at "<path>.json" describing dims, spacing and dtype.
enum class FileKind { Nifti, NiftiGz, Raw };
FileKind file_kind(const std::string& path);

/// Images are stored as float32, labels as uint16 (ids above 65535 are
/// rejected), encodings as a 4D float32 volume with n_rays + 1 channels:
/// channel 0 is prob, channel 1 + k is ray k.
void write_image(const std::string& path, const Image& img);
void write_labels(const std::string& path, const LabelVolume& labels);
void write_encoding(const std::string& path, const StarEncoding& enc);

/// Readers accept any NIfTI-1 scalar type, either byte order. Label files
/// must hold integral values.
Image read_image(const std::string& path);
LabelVolume read_labels(const std::string& path);
StarEncoding read_encoding(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file(const std::string& path);

/// 8-bit PNG, channels 1 (gray) or 3 (RGB), rows top to bottom.
void write_png(const std::string& path, int width, int height, int channels, const std::vector<std::uint8_t>& pixels);

}  // namespace anystar
