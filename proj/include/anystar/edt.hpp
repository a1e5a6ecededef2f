#pragma once

#include <cstdint>

#include "anystar/volume.hpp"

namespace anystar {

using Mask = Volume3<std::uint8_t>;

/// Exact Euclidean distance transform (separable lower-envelope method).
/// Each foreground voxel (nonzero) receives the physical distance to the
/// nearest background voxel; everything outside the grid counts as
/// background. Background voxels map to 0.
Volume3<double> edt3(const Mask& mask, const Spacing& spacing);
inline Volume3<double> edt3(const Mask& mask) { return edt3(mask, mask.spacing()); }

}  // namespace anystar
