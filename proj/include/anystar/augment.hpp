#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anystar/noise.hpp"
#include "anystar/volume.hpp"

namespace anystar {

using Range = std::array<double, 2>;
using IntRange = std::array<int, 2>;

enum class NoiseFamily { Gaussian, Poisson, Speckle };
const char* to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

struct CropConfig {
    double p = 1.0;
    Dims target{64, 64, 64};
    bool operator==(const CropConfig&) const = default;
};

struct AffineConfig {
    double p = 0.8;
    double max_translation = 8.0;  // voxels
    double max_rotation_deg = 45.0;
    Range scale_range{0.8, 1.25};
    double max_shear = 0.1;
    bool operator==(const AffineConfig&) const = default;
};

struct BiasFieldConfig {
    double p = 0.5;
    double coef_max = 0.1;
    int order = 3;
    bool operator==(const BiasFieldConfig&) const = default;
};

struct KSpaceSpikeConfig {
    double p = 0.5;
    IntRange count_range{1, 3};
    Range factor_range{20.0, 100.0};
    bool operator==(const KSpaceSpikeConfig&) const = default;
};

struct GibbsConfig {
    double p = 0.5;
    Range cutoff_range{0.3, 0.9};
    bool operator==(const GibbsConfig&) const = default;
};

struct SharpenConfig {
    double p = 0.5;
    Range alpha_range{0.5, 2.0};
    double sigma = 1.0;
    bool operator==(const SharpenConfig&) const = default;
};

struct GammaConfig {
    double p = 0.5;
    Range gamma_range{0.5, 2.0};  // sampled log-uniformly
    bool operator==(const GammaConfig&) const = default;
};

struct CutoutConfig {
    double p = 0.5;
    IntRange count_range{1, 4};
    IntRange size_range{4, 16};  // box edge length per axis, voxels
    bool operator==(const CutoutConfig&) const = default;
};

struct AxisBlurConfig {
    double p = 0.5;
    Range sigma_range{0.0, 2.0};
    bool operator==(const AxisBlurConfig&) const = default;
};

struct FlipRot90Config {
    double p = 1.0;
    bool operator==(const FlipRot90Config&) const = default;
};

struct ElasticConfig {
    double p = 0.5;
    double control_spacing = 16.0;
    double max_disp = 4.0;
    bool operator==(const ElasticConfig&) const = default;
};

struct EdgeZeroPadConfig {
    double p = 0.5;
    IntRange width_range{0, 8};
    bool operator==(const EdgeZeroPadConfig&) const = default;
};

struct NoiseConfig {
    double p = 0.5;
    std::vector<NoiseFamily> families{NoiseFamily::Gaussian, NoiseFamily::Poisson, NoiseFamily::Speckle};
    Range level_range{0.0, 0.1};
    double poisson_lambda = 255.0;
    bool operator==(const NoiseConfig&) const = default;
};

struct AugmentConfig {
    CropConfig crop;
    AffineConfig affine;
    BiasFieldConfig bias_field;
    KSpaceSpikeConfig kspace_spike;
    GibbsConfig gibbs;
    SharpenConfig sharpen;
    GammaConfig gamma;
    CutoutConfig cutout;
    AxisBlurConfig axis_blur;
    FlipRot90Config flip_rot90;
    ElasticConfig elastic;
    EdgeZeroPadConfig edge_zero_pad;
    CutoutConfig terminal_cutout;
    NoiseConfig noise;

    void validate() const;
    bool operator==(const AugmentConfig&) const = default;
};

struct JointSample {
    Image image;
    LabelVolume labels;
};

/// Pipeline stages in application order.
enum class Stage {
    Crop,
    Affine,
    BiasField,
    KSpaceSpike,
    Gibbs,
    Sharpen,
    Gamma,
    Cutout,
    AxisBlur,
    FlipRot90,
    Elastic,
    EdgeZeroPad,
    TerminalCutout,
    Noise,
};
inline constexpr int kStageCount = 14;
const char* to_string(Stage s);
Stage stage_from_string(const std::string& s);
bool is_joint_stage(Stage s);

// Crop

/// Random window of `target` dims; labels renumbered.
JointSample crop_random(const JointSample& s, Dims target, std::uint64_t seed);
JointSample crop_center(const JointSample& s, Dims target);

// Affine

using Mat3 = std::array<std::array<double, 3>, 3>;

struct AffineParams {
    Vec3 translation;
    Vec3 rotation;  // radians about x, y, z
    Vec3 scale{1.0, 1.0, 1.0};
    std::array<double, 3> shear{0.0, 0.0, 0.0};  // xy, xz, yz
};

/// Forward matrix Rz Ry Rx Sh S.
Mat3 affine_matrix(const AffineParams& p);
double determinant(const Mat3& m);
AffineParams sample_affine(const AffineConfig& cfg, std::uint64_t seed);
/// Output voxel x samples the input at A^-1 (x - c - t) + c with c the
/// volume center. Image: trilinear, labels: nearest; both reflect-padded,
/// mirrored instance copies get new ids.
JointSample affine_joint(const JointSample& s, const AffineParams& p);
JointSample affine_joint(const JointSample& s, const AffineConfig& cfg, std::uint64_t seed);

// Intensity stages

/// exp(P(u)) with P a random polynomial of total degree <= order in
/// coordinates normalized to [-1, 1], coefficients ~ U(-coef_max, coef_max).
Image bias_multiplier(Dims dims, double coef_max, int order, std::uint64_t seed);
Image bias_field(const Image& img, const BiasFieldConfig& cfg, std::uint64_t seed);

struct Spike {
    std::array<int, 3> bin;  // unsigned DFT bin index per axis
    double factor;
};
/// Scale the given DFT bins, invert and map the real part back onto the
/// input's intensity range.
Image kspace_spike(const Image& img, const std::vector<Spike>& spikes);
Image kspace_spike(const Image& img, const KSpaceSpikeConfig& cfg, std::uint64_t seed);

/// Normalized spectral radius sqrt(mean_a (f_a / (n_a / 2))^2), which is 1
/// at the highest frequency corner.
double spectral_radius(const std::array<int, 3>& bin, const Dims& dims);
/// Zero every DFT bin with spectral radius > cutoff; unclamped real part.
Image lowpass_truncate(const Image& img, double cutoff);
Image gibbs_ringing(const Image& img, double cutoff);
Image gibbs_ringing(const Image& img, const GibbsConfig& cfg, std::uint64_t seed);

/// Separable Gaussian with an independent sigma per axis (0 skips the
/// axis), mirrored boundary.
Image gaussian_blur(const Image& img, const std::array<double, 3>& sigma);

Image sharpen(const Image& img, double alpha, double sigma);
Image sharpen(const Image& img, const SharpenConfig& cfg, std::uint64_t seed);

Image gamma_adjust(const Image& img, double gamma);
Image gamma_adjust(const Image& img, const GammaConfig& cfg, std::uint64_t seed);

struct Box {
    Dims lo;
    Dims size;
};
std::vector<Box> sample_boxes(Dims dims, const CutoutConfig& cfg, std::uint64_t seed);
Image cutout(const Image& img, const std::vector<Box>& boxes);
Image cutout(const Image& img, const CutoutConfig& cfg, std::uint64_t seed);

Image axis_blur(const Image& img, const AxisBlurConfig& cfg, std::uint64_t seed);

// Flips and quarter turns

template <typename T>
Volume3<T> flip(const Volume3<T>& v, int axis) {
    Volume3<T> out(v.dims(), T{}, v.spacing());
    const int n = v.dims()[axis];
    for (int z = 0; z < v.nz(); ++z)
        for (int y = 0; y < v.ny(); ++y)
            for (int x = 0; x < v.nx(); ++x) {
                int s[3] = {x, y, z};
                s[axis] = n - 1 - s[axis];
                out(x, y, z) = v(s[0], s[1], s[2]);
            }
    return out;
}

/// Quarter turns about `axis` in the same sense as a positive affine
/// rotation. Returns the input unchanged when the rotated plane is not square.
template <typename T>
Volume3<T> rot90(const Volume3<T>& v, int axis, int k) {
    static constexpr int plane[3][2] = {{1, 2}, {2, 0}, {0, 1}};
    const int a = plane[axis][0], b = plane[axis][1];
    k = ((k % 4) + 4) % 4;
    if (k == 0 || v.dims()[a] != v.dims()[b]) return v;
    const int n = v.dims()[a];
    Volume3<T> cur = v;
    for (int turn = 0; turn < k; ++turn) {
        Volume3<T> out(cur.dims(), T{}, cur.spacing());
        for (int z = 0; z < cur.nz(); ++z)
            for (int y = 0; y < cur.ny(); ++y)
                for (int x = 0; x < cur.nx(); ++x) {
                    const int o[3] = {x, y, z};
                    int s[3] = {x, y, z};
                    s[a] = o[b];
                    s[b] = n - 1 - o[a];
                    out(x, y, z) = cur(s[0], s[1], s[2]);
                }
        cur = std::move(out);
    }
    return cur;
}

struct FlipRot90Params {
    std::array<bool, 3> flip{false, false, false};
    int axis = 2;
    int k = 0;
};
FlipRot90Params sample_flip_rot90(std::uint64_t seed);
/// Flips first, then the quarter turns.
JointSample flip_rot90_joint(const JointSample& s, const FlipRot90Params& p);
JointSample flip_rot90_joint(const JointSample& s, std::uint64_t seed);

// Elastic

/// Image trilinear, labels nearest, zero padding, one shared field.
JointSample elastic_joint(const JointSample& s, const DeformField& field);
JointSample elastic_joint(const JointSample& s, const ElasticConfig& cfg, std::uint64_t seed);

// Blank regions

/// Face slab widths ordered -x, +x, -y, +y, -z, +z.
using FaceWidths = std::array<int, 6>;
JointSample edge_zero_pad(const JointSample& s, const FaceWidths& widths);
JointSample edge_zero_pad(const JointSample& s, const EdgeZeroPadConfig& cfg, std::uint64_t seed);
/// Zeroes boxes in both image and labels.
JointSample terminal_cutout(const JointSample& s, const std::vector<Box>& boxes);
JointSample terminal_cutout(const JointSample& s, const CutoutConfig& cfg, std::uint64_t seed);

// Noise

/// Corrupts only voxels with img > 0, then clamps to [0, 1]. Level 0 is the
/// identity for every family; Poisson otherwise draws Poisson(x lambda) / lambda.
Image noise_inject(const Image& img, NoiseFamily family, double level, double poisson_lambda, std::uint64_t seed);
Image noise_inject(const Image& img, const NoiseConfig& cfg, std::uint64_t seed);

// Full sequence

struct PipelineTrace {
    std::vector<Stage> fired;
};

/// Runs every stage in order, each gated by its own probability and drawing
/// from its own stream. When the crop stage does not fire the centered window
/// is taken, so the output always has the crop target dims. `stop_after`
/// ends the sequence after the named stage.
JointSample apply_pipeline(const JointSample& s, const AugmentConfig& cfg, std::uint64_t seed,
                           std::optional<Stage> stop_after = std::nullopt, PipelineTrace* trace = nullptr);

}  // namespace anystar
