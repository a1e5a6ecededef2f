#pragma once

#include <cstdint>
#include <vector>

#include "anystar/volume.hpp"

namespace anystar {

/// Fractal lattice gradient noise parameters. Octave k uses a lattice period
/// of lattice_period / 2^k and amplitude persistence^k; the octave sum is
/// divided by the total amplitude so values stay in [-1, 1].
struct PerlinSpec {
    std::array<double, 3> lattice_period{16.0, 16.0, 16.0};
    int octaves = 4;
    double persistence = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const PerlinSpec&) const = default;
};

Image perlin3(Dims dims, const PerlinSpec& spec);

/// Channel c is perlin3 with seed substream(spec.seed, c).
std::vector<Image> perlin_multichannel(Dims dims, int channels, const PerlinSpec& spec);
std::uint64_t perlin_channel_seed(std::uint64_t seed, int channel);

/// Per-voxel displacement in voxel units.
using DeformField = Volume3<Vec3>;

/// Control points every `control_spacing` voxels carry displacements drawn
/// uniformly from [-max_disp, max_disp] per axis; the dense field is their
/// trilinear upsampling, so |d|_inf <= max_disp everywhere.
DeformField smooth_deform_field(Dims dims, double control_spacing, double max_disp, std::uint64_t seed);

enum class Interp { Trilinear, Nearest };

/// out(x) = sample(vol, x + field(x)).
Image warp(const Image& vol, const DeformField& field, Interp interp, PadMode pad);
LabelVolume warp(const LabelVolume& vol, const DeformField& field, PadMode pad);

}  // namespace anystar
