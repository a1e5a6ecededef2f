#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "anystar/noise.hpp"
#include "anystar/volume.hpp"

namespace anystar {

struct InstanceSeed {
    Vec3 center;    // canvas voxel coordinates
    double radius;  // > 0
};

struct LabelGenConfig {
    Dims grid_shape{4, 4, 4};
    double base_radius = 10.0;
    /// Max |translation| per axis as a fraction of the grid pitch.
    double jitter_frac = 0.2;
    std::array<double, 2> scale_range{0.75, 1.25};
    double removal_frac_max = 1.0 / 3.0;
    PerlinSpec perlin{};
    /// Coefficient on the additive noise term (gain * base_radius * p).
    double noise_gain = 0.9;
    Dims canvas_dims{128, 128, 128};
    Dims output_dims{128, 128, 128};
    std::array<double, 2> pad_frac_range{0.0, 0.5};
    /// Fixed padding mode, or nullopt to pick Zero/Reflect per sample.
    std::optional<PadMode> pad_mode{};

    void validate() const;
    bool operator==(const LabelGenConfig&) const = default;
};

/// Regular grid of spheres, each jittered and scaled, then a uniform
/// fraction in [0, removal_frac_max] removed at random.
std::vector<InstanceSeed> place_instances(const LabelGenConfig& cfg, std::uint64_t seed);

/// Labels voxel j with i* = argmin_i d_ij, where
///   d_ij = |x_j - c_i| + noise_gain * base_radius * p_j,
/// when d_i*j < r_i*, background otherwise. Ties go to the lower index. Ids
/// are renumbered 1..n' with empty instances dropped. `noise` must have the
/// canvas dims.
LabelVolume assign_labels(const std::vector<InstanceSeed>& seeds, const LabelGenConfig& cfg, const Image& noise);
/// Same, with p drawn from perlin3(canvas_dims, cfg.perlin reseeded by `seed`).
LabelVolume assign_labels(const std::vector<InstanceSeed>& seeds, const LabelGenConfig& cfg, std::uint64_t seed);

/// Concrete padding draw of density_pad_rescale.
struct PadDraw {
    PadMode mode = PadMode::Zero;
    Dims before{0, 0, 0};
    Dims after{0, 0, 0};
};

PadDraw sample_padding(const LabelVolume& labels, const LabelGenConfig& cfg, std::uint64_t seed);
/// Pads each axis as drawn. Mirrored copies become new instances.
LabelVolume pad_labels(const LabelVolume& labels, const PadDraw& pad);
/// Random per-axis padding followed by nearest resampling to output_dims.
LabelVolume density_pad_rescale(const LabelVolume& labels, const LabelGenConfig& cfg, std::uint64_t seed);

/// Full label synthesis: place, assign, pad and rescale.
LabelVolume synthesize_labels(const LabelGenConfig& cfg, std::uint64_t seed);

}  // namespace anystar
