#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anystar/noise.hpp"
#include "anystar/volume.hpp"

namespace anystar {

enum class BackgroundMode { PlainBright, PlainRand, PerlinShapes };
enum class GeneratorMode { Mix, BrightFG_PlainBG, RandFG_PlainBG, RandFG_PerlinBG };

const char* to_string(BackgroundMode mode);
const char* to_string(GeneratorMode mode);
BackgroundMode background_mode_from_string(const std::string& s);
GeneratorMode generator_mode_from_string(const std::string& s);

/// One (mean, std) pair per instance followed by one background component.
struct GmmParams {
    std::vector<double> means;
    std::vector<double> stds;

    int instances() const { return static_cast<int>(means.size()) - 1; }
    double background_mean() const { return means.back(); }
};

struct AppearanceConfig {
    std::array<double, 2> mean_range{0.2, 0.9};
    std::array<double, 2> std_range{0.01, 0.12};
    /// Upper bound B of the background shape count b ~ U{1, B}.
    int max_background_shapes = 10;
    PerlinSpec shape_perlin{{32.0, 32.0, 32.0}, 2, 0.5, 0};
    double shape_control_spacing = 16.0;
    double shape_max_disp = 8.0;
    PerlinSpec texture_perlin{{16.0, 16.0, 16.0}, 4, 0.5, 0};
    std::array<double, 2> texture_strength_range{0.0, 0.5};

    void validate() const;
    bool operator==(const AppearanceConfig&) const = default;
};

/// Means and stds drawn uniformly for n instances plus the background. In
/// PlainBright mode the background mean is redrawn from U(0, min fg mean)
/// until it is strictly darker than every instance.
GmmParams sample_gmm_params(int n, BackgroundMode mode, const AppearanceConfig& cfg, std::uint64_t seed);

/// Instance i voxels ~ N(mu_i, sigma_i^2); background voxels are left at 0.
Image render_foreground(const LabelVolume& labels, const GmmParams& params, std::uint64_t seed);

int draw_shape_count(const AppearanceConfig& cfg, std::uint64_t seed);
/// Background sub-category per voxel: argmax over `shapes` independently
/// deformed Perlin channels (ties to the lower channel), values 0..shapes-1.
Volume3<std::uint8_t> background_subcategories(Dims dims, int shapes, const AppearanceConfig& cfg,
                                               std::uint64_t seed);
/// Fills background voxels only; foreground voxels stay 0.
Image render_background(const LabelVolume& labels, BackgroundMode mode, const GmmParams& params,
                        const AppearanceConfig& cfg, std::uint64_t seed);

/// img * (1 + strength * p), clamped to [0, 1].
Image modulate_texture(const Image& img, const PerlinSpec& spec, double strength);

struct Synthesis {
    Image image;
    BackgroundMode background = BackgroundMode::PlainRand;
};

BackgroundMode resolve_background(GeneratorMode mode, std::uint64_t seed);

/// g(L): GMM foreground, background model, multiplicative texture. Labels
/// must carry consecutive ids.
Synthesis synthesize(const LabelVolume& labels, GeneratorMode mode, const AppearanceConfig& cfg, std::uint64_t seed);

}  // namespace anystar
