#include "anystar/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "anystar/fft.hpp"
#include "anystar/rng.hpp"

namespace anystar {

const char* to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::Gaussian: return "gaussian";
        case NoiseFamily::Poisson: return "poisson";
        case NoiseFamily::Speckle: return "speckle";
    }
    return "gaussian";
}

NoiseFamily noise_family_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseFamily::Gaussian;
    if (s == "poisson") return NoiseFamily::Poisson;
    if (s == "speckle") return NoiseFamily::Speckle;
    throw std::invalid_argument("unknown noise family '" + s + "'");
}

namespace {

constexpr const char* kStageNames[kStageCount] = {
    "crop",   "affine",    "bias_field", "kspace_spike",  "gibbs",           "sharpen", "gamma",
    "cutout", "axis_blur", "flip_rot90", "elastic", "edge_zero_pad", "terminal_cutout", "noise",
};

void check_p(double p, const std::string& key) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(key + ".p: probability must lie in [0, 1]");
}

void check_range(const Range& r, const std::string& key, double lo_bound) {
    if (!(r[0] <= r[1]) || !(r[0] >= lo_bound) || !std::isfinite(r[1])) {
        throw std::invalid_argument(key + ": invalid range");
    }
}

void check_range(const IntRange& r, const std::string& key, int lo_bound) {
    if (r[0] > r[1] || r[0] < lo_bound) throw std::invalid_argument(key + ": invalid range");
}

}  // namespace

const char* to_string(Stage s) { return kStageNames[static_cast<int>(s)]; }

Stage stage_from_string(const std::string& s) {
    for (int i = 0; i < kStageCount; ++i) {
        if (s == kStageNames[i]) return static_cast<Stage>(i);
    }
    throw std::invalid_argument("unknown augmentation stage '" + s + "'");
}

bool is_joint_stage(Stage s) {
    switch (s) {
        case Stage::Crop:
        case Stage::Affine:
        case Stage::FlipRot90:
        case Stage::Elastic:
        case Stage::EdgeZeroPad:
        case Stage::TerminalCutout: return true;
        default: return false;
    }
}

void AugmentConfig::validate() const {
    check_p(crop.p, "augment.crop");
    for (int n : crop.target) {
        if (n < 1) throw std::invalid_argument("augment.crop.target: each entry must be >= 1");
    }
    check_p(affine.p, "augment.affine");
    if (!(affine.max_translation >= 0.0)) throw std::invalid_argument("augment.affine.max_translation: must be >= 0");
    if (!(affine.max_rotation_deg >= 0.0)) throw std::invalid_argument("augment.affine.max_rotation_deg: must be >= 0");
    check_range(affine.scale_range, "augment.affine.scale_range", 1e-3);
    if (!(affine.max_shear >= 0.0 && affine.max_shear < 1.0)) {
        throw std::invalid_argument("augment.affine.max_shear: must lie in [0, 1)");
    }
    check_p(bias_field.p, "augment.bias_field");
    if (!(bias_field.coef_max >= 0.0)) throw std::invalid_argument("augment.bias_field.coef_max: must be >= 0");
    if (bias_field.order < 1 || bias_field.order > 6) {
        throw std::invalid_argument("augment.bias_field.order: must lie in [1, 6]");
    }
    check_p(kspace_spike.p, "augment.kspace_spike");
    check_range(kspace_spike.count_range, "augment.kspace_spike.count_range", 0);
    check_range(kspace_spike.factor_range, "augment.kspace_spike.factor_range", 0.0);
    check_p(gibbs.p, "augment.gibbs");
    check_range(gibbs.cutoff_range, "augment.gibbs.cutoff_range", 0.0);
    if (!(gibbs.cutoff_range[0] > 0.0 && gibbs.cutoff_range[1] <= 1.0)) {
        throw std::invalid_argument("augment.gibbs.cutoff_range: must lie in (0, 1]");
    }
    check_p(sharpen.p, "augment.sharpen");
    check_range(sharpen.alpha_range, "augment.sharpen.alpha_range", 0.0);
    if (!(sharpen.sigma > 0.0)) throw std::invalid_argument("augment.sharpen.sigma: must be > 0");
    check_p(gamma.p, "augment.gamma");
    check_range(gamma.gamma_range, "augment.gamma.gamma_range", 1e-6);
    for (const auto* c : {&cutout, &terminal_cutout}) {
        const std::string key = c == &cutout ? "augment.cutout" : "augment.terminal_cutout";
        check_p(c->p, key);
        check_range(c->count_range, key + ".count_range", 0);
        check_range(c->size_range, key + ".size_range", 1);
    }
    check_p(axis_blur.p, "augment.axis_blur");
    check_range(axis_blur.sigma_range, "augment.axis_blur.sigma_range", 0.0);
    check_p(flip_rot90.p, "augment.flip_rot90");
    check_p(elastic.p, "augment.elastic");
    if (!(elastic.control_spacing >= 2.0)) throw std::invalid_argument("augment.elastic.control_spacing: must be >= 2");
    if (!(elastic.max_disp >= 0.0)) throw std::invalid_argument("augment.elastic.max_disp: must be >= 0");
    check_p(edge_zero_pad.p, "augment.edge_zero_pad");
    check_range(edge_zero_pad.width_range, "augment.edge_zero_pad.width_range", 0);
    check_p(noise.p, "augment.noise");
    if (noise.families.empty()) throw std::invalid_argument("augment.noise.families: must not be empty");
    check_range(noise.level_range, "augment.noise.level_range", 0.0);
    if (!(noise.poisson_lambda > 0.0)) throw std::invalid_argument("augment.noise.poisson_lambda: must be > 0");
}

namespace {

void check_joint(const JointSample& s) {
    if (s.image.dims() != s.labels.dims()) throw std::invalid_argument("joint sample: image and label dims differ");
}

Image clamp01(Image img) {
    for (float& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
    return img;
}

}  // namespace

JointSample crop_random(const JointSample& s, Dims target, std::uint64_t seed) {
    check_joint(s);
    const Dims& d = s.image.dims();
    for (int a = 0; a < 3; ++a) {
        if (target[a] < 1 || target[a] > d[a]) throw std::invalid_argument("crop_random: target larger than source");
    }
    Rng rng(seed);
    Dims off{};
    for (int a = 0; a < 3; ++a) off[a] = static_cast<int>(rng.uniform_int(0, d[a] - target[a]));
    return {crop(s.image, off, target), relabel_consecutive(crop(s.labels, off, target))};
}

JointSample crop_center(const JointSample& s, Dims target) {
    check_joint(s);
    const Dims& d = s.image.dims();
    Dims off{};
    for (int a = 0; a < 3; ++a) {
        if (target[a] < 1 || target[a] > d[a]) throw std::invalid_argument("crop_center: target larger than source");
        off[a] = (d[a] - target[a]) / 2;
    }
    return {crop(s.image, off, target), relabel_consecutive(crop(s.labels, off, target))};
}

// ---------------------------------------------------------------------------

namespace {

Mat3 mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat3 inverse(const Mat3& m) {
    const double det = determinant(m);
    Mat3 r{};
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

// Entries within rounding of an integer become that integer, so quarter
// turns and identities resample exactly on the grid.
void snap(Mat3& m) {
    for (auto& row : m)
        for (double& v : row) {
            const double r = std::round(v);
            if (std::abs(v - r) < 1e-12) v = r;
        }
}

}  // namespace

double determinant(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 affine_matrix(const AffineParams& p) {
    const double cx = std::cos(p.rotation.x), sx = std::sin(p.rotation.x);
    const double cy = std::cos(p.rotation.y), sy = std::sin(p.rotation.y);
    const double cz = std::cos(p.rotation.z), sz = std::sin(p.rotation.z);
    const Mat3 rx{{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
    const Mat3 ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
    const Mat3 rz{{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
    const Mat3 sh{{{1, p.shear[0], p.shear[1]}, {0, 1, p.shear[2]}, {0, 0, 1}}};
    const Mat3 sc{{{p.scale.x, 0, 0}, {0, p.scale.y, 0}, {0, 0, p.scale.z}}};
    Mat3 m = mul(mul(mul(rz, ry), mul(rx, sh)), sc);
    snap(m);
    return m;
}

AffineParams sample_affine(const AffineConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const double rot = cfg.max_rotation_deg * std::numbers::pi / 180.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        AffineParams p;
        for (int a = 0; a < 3; ++a) p.translation[a] = rng.uniform(-cfg.max_translation, cfg.max_translation);
        for (int a = 0; a < 3; ++a) p.rotation[a] = rng.uniform(-rot, rot);
        for (int a = 0; a < 3; ++a) p.scale[a] = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
        for (double& s : p.shear) s = rng.uniform(-cfg.max_shear, cfg.max_shear);
        if (std::abs(determinant(affine_matrix(p))) >= 1e-6) return p;
    }
    throw std::runtime_error("sample_affine: could not draw a non-singular matrix");
}

JointSample affine_joint(const JointSample& s, const AffineParams& p) {
    check_joint(s);
    const Mat3 m = affine_matrix(p);
    if (std::abs(determinant(m)) < 1e-6) throw std::invalid_argument("affine_joint: singular matrix");
    Mat3 inv = inverse(m);
    snap(inv);
    const Dims& d = s.image.dims();
    const Vec3 c{(d[0] - 1) / 2.0, (d[1] - 1) / 2.0, (d[2] - 1) / 2.0};
    JointSample out{Image(d, 0.0f, s.image.spacing()), LabelVolume(d, 0, s.labels.spacing())};
    MirrorRelabeler relabel(max_label(s.labels));
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const Vec3 q = Vec3{double(x), double(y), double(z)} - c - p.translation;
                Vec3 src;
                for (int i = 0; i < 3; ++i) src[i] = inv[i][0] * q.x + inv[i][1] * q.y + inv[i][2] * q.z + c[i];
                out.image(x, y, z) = static_cast<float>(trilinear_sample(s.image, src, PadMode::Reflect));
                out.labels(x, y, z) = nearest_sample_mirrored(s.labels, src, relabel);
            }
        }
    }
    out.labels = relabel_consecutive(out.labels);
    return out;
}

JointSample affine_joint(const JointSample& s, const AffineConfig& cfg, std::uint64_t seed) {
    return affine_joint(s, sample_affine(cfg, seed));
}

// ---------------------------------------------------------------------------

Image bias_multiplier(Dims dims, double coef_max, int order, std::uint64_t seed) {
    if (order < 0) throw std::invalid_argument("bias_multiplier: order must be >= 0");
    Rng rng(seed);
    struct Term {
        int i, j, k;
        double c;
    };
    std::vector<Term> terms;
    for (int deg = 1; deg <= order; ++deg)
        for (int i = deg; i >= 0; --i)
            for (int j = deg - i; j >= 0; --j) terms.push_back({i, j, deg - i - j, rng.uniform(-coef_max, coef_max)});

    // Powers of the normalized coordinate per axis.
    std::array<std::vector<double>, 3> pw;
    for (int a = 0; a < 3; ++a) {
        const int n = dims[a];
        pw[a].assign(static_cast<std::size_t>(n * (order + 1)), 1.0);
        for (int t = 0; t < n; ++t) {
            const double u = n > 1 ? 2.0 * t / (n - 1) - 1.0 : 0.0;
            for (int e = 1; e <= order; ++e) {
                pw[a][static_cast<std::size_t>(t * (order + 1) + e)] = pw[a][static_cast<std::size_t>(t * (order + 1) + e - 1)] * u;
            }
        }
    }
    auto at = [&](int a, int t, int e) { return pw[a][static_cast<std::size_t>(t * (order + 1) + e)]; };
    Image out(dims, 1.0f);
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x) {
                double p = 0.0;
                for (const auto& t : terms) p += t.c * at(0, x, t.i) * at(1, y, t.j) * at(2, z, t.k);
                out(x, y, z) = static_cast<float>(std::exp(p));
            }
    return out;
}

Image bias_field(const Image& img, const BiasFieldConfig& cfg, std::uint64_t seed) {
    if (cfg.coef_max == 0.0) return img;
    const Image m = bias_multiplier(img.dims(), cfg.coef_max, cfg.order, seed);
    Image out = img;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::clamp(img[j] * m[j], 0.0f, 1.0f);
    return out;
}

// ---------------------------------------------------------------------------

Image kspace_spike(const Image& img, const std::vector<Spike>& spikes) {
    const Dims& d = img.dims();
    ComplexVolume spec = dft3(img);
    for (const auto& s : spikes) {
        for (int a = 0; a < 3; ++a) {
            if (s.bin[a] < 0 || s.bin[a] >= d[a]) throw std::invalid_argument("kspace_spike: bin outside spectrum");
        }
        spec(s.bin[0], s.bin[1], s.bin[2]) *= s.factor;
    }
    const Image r = real_part(idft3(spec));
    const auto [imin, imax] = std::minmax_element(img.data().begin(), img.data().end());
    const auto [rmin, rmax] = std::minmax_element(r.data().begin(), r.data().end());
    const double lo = *imin, hi = *imax, rlo = *rmin, rhi = *rmax;
    Image out(d, 0.0f, img.spacing());
    if (hi == lo || rhi == rlo) return img;
    const double scale = (hi - lo) / (rhi - rlo);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::clamp(static_cast<float>((r[j] - rlo) * scale + lo), 0.0f, 1.0f);
    }
    return out;
}

Image kspace_spike(const Image& img, const KSpaceSpikeConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const Dims& d = img.dims();
    if (d[0] * d[1] * d[2] == 1) return img;
    const auto count = rng.uniform_int(cfg.count_range[0], cfg.count_range[1]);
    std::vector<Spike> spikes;
    for (std::int64_t i = 0; i < count; ++i) {
        Spike s{};
        do {
            for (int a = 0; a < 3; ++a) s.bin[a] = static_cast<int>(rng.uniform_int(0, d[a] - 1));
        } while (s.bin[0] == 0 && s.bin[1] == 0 && s.bin[2] == 0);
        s.factor = rng.uniform(cfg.factor_range[0], cfg.factor_range[1]);
        spikes.push_back(s);
    }
    return kspace_spike(img, spikes);
}

double spectral_radius(const std::array<int, 3>& bin, const Dims& dims) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 2) continue;
        const double f = signed_frequency(bin[a], dims[a]) / (dims[a] / 2.0);
        acc += f * f;
    }
    return std::sqrt(acc / 3.0);
}

Image lowpass_truncate(const Image& img, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 1.0)) throw std::invalid_argument("lowpass_truncate: cutoff must lie in (0, 1]");
    const Dims& d = img.dims();
    ComplexVolume spec = dft3(img);
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x) {
                if (spectral_radius({x, y, z}, d) > cutoff) spec(x, y, z) = Complex{};
            }
    Image out = real_part(idft3(spec));
    out.set_spacing(img.spacing());
    return out;
}

Image gibbs_ringing(const Image& img, double cutoff) { return clamp01(lowpass_truncate(img, cutoff)); }

Image gibbs_ringing(const Image& img, const GibbsConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return gibbs_ringing(img, rng.uniform(cfg.cutoff_range[0], cfg.cutoff_range[1]));
}

// ---------------------------------------------------------------------------

Image gaussian_blur(const Image& img, const std::array<double, 3>& sigma) {
    const Dims& d = img.dims();
    std::vector<double> work(img.data().begin(), img.data().end());
    std::vector<double> line, result;
    for (int a = 0; a < 3; ++a) {
        if (!(sigma[a] >= 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
        if (sigma[a] == 0.0 || d[a] == 1) continue;
        const int radius = static_cast<int>(std::ceil(3.0 * sigma[a]));
        std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
        double total = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            w[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma[a] * sigma[a]));
            total += w[static_cast<std::size_t>(k + radius)];
        }
        for (double& v : w) v /= total;

        const int n = d[a];
        const std::size_t stride = a == 0 ? 1 : (a == 1 ? std::size_t(d[0]) : std::size_t(d[0]) * std::size_t(d[1]));
        const int o1 = a == 0 ? 1 : 0, o2 = a == 2 ? 1 : 2;
        line.resize(static_cast<std::size_t>(n));
        result.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < d[o2]; ++j) {
            for (int i = 0; i < d[o1]; ++i) {
                int start[3] = {0, 0, 0};
                start[o1] = i;
                start[o2] = j;
                const std::size_t base = img.index(start[0], start[1], start[2]);
                for (int t = 0; t < n; ++t) line[static_cast<std::size_t>(t)] = work[base + static_cast<std::size_t>(t) * stride];
                for (int t = 0; t < n; ++t) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        acc += w[static_cast<std::size_t>(k + radius)] * line[static_cast<std::size_t>(reflect_index(t + k, n))];
                    }
                    result[static_cast<std::size_t>(t)] = acc;
                }
                for (int t = 0; t < n; ++t) work[base + static_cast<std::size_t>(t) * stride] = result[static_cast<std::size_t>(t)];
            }
        }
    }
    Image out(d, 0.0f, img.spacing());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<float>(work[j]);
    return out;
}

Image sharpen(const Image& img, double alpha, double sigma) {
    if (alpha == 0.0) return img;
    const Image blur = gaussian_blur(img, {sigma, sigma, sigma});
    Image out = img;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double v = img[j] + alpha * (static_cast<double>(img[j]) - blur[j]);
        out[j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

Image sharpen(const Image& img, const SharpenConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return sharpen(img, rng.uniform(cfg.alpha_range[0], cfg.alpha_range[1]), cfg.sigma);
}

Image gamma_adjust(const Image& img, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma_adjust: gamma must be > 0");
    if (gamma == 1.0) return img;
    const auto [mn, mx] = std::minmax_element(img.data().begin(), img.data().end());
    const double lo = *mn, hi = *mx;
    if (hi == lo) return img;
    Image out = img;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double u = (img[j] - lo) / (hi - lo);
        out[j] = static_cast<float>(lo + (hi - lo) * std::pow(u, gamma));
    }
    return out;
}

Image gamma_adjust(const Image& img, const GammaConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return gamma_adjust(img, rng.log_uniform(cfg.gamma_range[0], cfg.gamma_range[1]));
}

std::vector<Box> sample_boxes(Dims dims, const CutoutConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const auto count = rng.uniform_int(cfg.count_range[0], cfg.count_range[1]);
    std::vector<Box> boxes;
    for (std::int64_t i = 0; i < count; ++i) {
        Box b{};
        for (int a = 0; a < 3; ++a) {
            b.size[a] = std::min(dims[a], static_cast<int>(rng.uniform_int(cfg.size_range[0], cfg.size_range[1])));
            b.lo[a] = static_cast<int>(rng.uniform_int(0, dims[a] - b.size[a]));
        }
        boxes.push_back(b);
    }
    return boxes;
}

namespace {

template <typename T>
void zero_box(Volume3<T>& v, const Box& b) {
    const Dims& d = v.dims();
    const int x1 = std::min(d[0], b.lo[0] + b.size[0]), y1 = std::min(d[1], b.lo[1] + b.size[1]),
              z1 = std::min(d[2], b.lo[2] + b.size[2]);
    for (int z = std::max(0, b.lo[2]); z < z1; ++z)
        for (int y = std::max(0, b.lo[1]); y < y1; ++y)
            for (int x = std::max(0, b.lo[0]); x < x1; ++x) v(x, y, z) = T{};
}

}  // namespace

Image cutout(const Image& img, const std::vector<Box>& boxes) {
    Image out = img;
    for (const auto& b : boxes) zero_box(out, b);
    return out;
}

Image cutout(const Image& img, const CutoutConfig& cfg, std::uint64_t seed) {
    return cutout(img, sample_boxes(img.dims(), cfg, seed));
}

Image axis_blur(const Image& img, const AxisBlurConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    std::array<double, 3> sigma{};
    for (double& s : sigma) s = rng.uniform(cfg.sigma_range[0], cfg.sigma_range[1]);
    return gaussian_blur(img, sigma);
}

// ---------------------------------------------------------------------------

FlipRot90Params sample_flip_rot90(std::uint64_t seed) {
    Rng rng(seed);
    FlipRot90Params p;
    for (bool& f : p.flip) f = rng.bernoulli(0.5);
    p.axis = static_cast<int>(rng.uniform_int(0, 2));
    p.k = static_cast<int>(rng.uniform_int(0, 3));
    return p;
}

JointSample flip_rot90_joint(const JointSample& s, const FlipRot90Params& p) {
    check_joint(s);
    if (p.axis < 0 || p.axis > 2) throw std::invalid_argument("flip_rot90_joint: axis must be 0, 1 or 2");
    JointSample out = s;
    for (int a = 0; a < 3; ++a) {
        if (!p.flip[a]) continue;
        out.image = flip(out.image, a);
        out.labels = flip(out.labels, a);
    }
    out.image = rot90(out.image, p.axis, p.k);
    out.labels = rot90(out.labels, p.axis, p.k);
    return out;
}

JointSample flip_rot90_joint(const JointSample& s, std::uint64_t seed) {
    return flip_rot90_joint(s, sample_flip_rot90(seed));
}

JointSample elastic_joint(const JointSample& s, const DeformField& field) {
    check_joint(s);
    return {warp(s.image, field, Interp::Trilinear, PadMode::Zero),
            relabel_consecutive(warp(s.labels, field, PadMode::Zero))};
}

JointSample elastic_joint(const JointSample& s, const ElasticConfig& cfg, std::uint64_t seed) {
    if (cfg.max_disp == 0.0) return s;
    return elastic_joint(s, smooth_deform_field(s.image.dims(), cfg.control_spacing, cfg.max_disp, seed));
}

JointSample edge_zero_pad(const JointSample& s, const FaceWidths& widths) {
    check_joint(s);
    const Dims& d = s.image.dims();
    JointSample out = s;
    for (int a = 0; a < 3; ++a) {
        for (int side = 0; side < 2; ++side) {
            const int w = std::min(widths[static_cast<std::size_t>(2 * a + side)], d[a]);
            if (w < 0) throw std::invalid_argument("edge_zero_pad: negative width");
            if (w == 0) continue;
            Box b{{0, 0, 0}, d};
            b.size[a] = w;
            b.lo[a] = side == 0 ? 0 : d[a] - w;
            zero_box(out.image, b);
            zero_box(out.labels, b);
        }
    }
    out.labels = relabel_consecutive(out.labels);
    return out;
}

JointSample edge_zero_pad(const JointSample& s, const EdgeZeroPadConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    FaceWidths w{};
    for (int& v : w) v = static_cast<int>(rng.uniform_int(cfg.width_range[0], cfg.width_range[1]));
    return edge_zero_pad(s, w);
}

JointSample terminal_cutout(const JointSample& s, const std::vector<Box>& boxes) {
    check_joint(s);
    JointSample out = s;
    for (const auto& b : boxes) {
        zero_box(out.image, b);
        zero_box(out.labels, b);
    }
    out.labels = relabel_consecutive(out.labels);
    return out;
}

JointSample terminal_cutout(const JointSample& s, const CutoutConfig& cfg, std::uint64_t seed) {
    return terminal_cutout(s, sample_boxes(s.image.dims(), cfg, seed));
}

// ---------------------------------------------------------------------------

Image noise_inject(const Image& img, NoiseFamily family, double level, double poisson_lambda, std::uint64_t seed) {
    if (!(level >= 0.0)) throw std::invalid_argument("noise_inject: level must be >= 0");
    if (!(poisson_lambda > 0.0)) throw std::invalid_argument("noise_inject: poisson_lambda must be > 0");
    if (level == 0.0) return img;
    Rng rng(seed);
    Image out = img;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double x = img[j];
        if (!(x > 0.0)) continue;
        double v = x;
        switch (family) {
            case NoiseFamily::Gaussian: v = x + rng.normal(0.0, level); break;
            case NoiseFamily::Speckle: v = x * (1.0 + rng.normal(0.0, level)); break;
            case NoiseFamily::Poisson: v = static_cast<double>(rng.poisson(x * poisson_lambda)) / poisson_lambda; break;
        }
        out[j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

Image noise_inject(const Image& img, const NoiseConfig& cfg, std::uint64_t seed) {
    if (cfg.families.empty()) throw std::invalid_argument("noise_inject: no noise families configured");
    Rng rng(seed);
    const auto f = cfg.families[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.families.size()) - 1))];
    const double level = rng.uniform(cfg.level_range[0], cfg.level_range[1]);
    return noise_inject(img, f, level, cfg.poisson_lambda, substream(seed, "voxels"));
}

// ---------------------------------------------------------------------------

namespace {

double stage_probability(const AugmentConfig& c, Stage s) {
    switch (s) {
        case Stage::Crop: return c.crop.p;
        case Stage::Affine: return c.affine.p;
        case Stage::BiasField: return c.bias_field.p;
        case Stage::KSpaceSpike: return c.kspace_spike.p;
        case Stage::Gibbs: return c.gibbs.p;
        case Stage::Sharpen: return c.sharpen.p;
        case Stage::Gamma: return c.gamma.p;
        case Stage::Cutout: return c.cutout.p;
        case Stage::AxisBlur: return c.axis_blur.p;
        case Stage::FlipRot90: return c.flip_rot90.p;
        case Stage::Elastic: return c.elastic.p;
        case Stage::EdgeZeroPad: return c.edge_zero_pad.p;
        case Stage::TerminalCutout: return c.terminal_cutout.p;
        case Stage::Noise: return c.noise.p;
    }
    return 0.0;
}

}  // namespace

JointSample apply_pipeline(const JointSample& input, const AugmentConfig& cfg, std::uint64_t seed,
                           std::optional<Stage> stop_after, PipelineTrace* trace) {
    cfg.validate();
    check_joint(input);
    for (int a = 0; a < 3; ++a) {
        if (input.image.dims()[a] < cfg.crop.target[a]) {
            throw std::invalid_argument("apply_pipeline: input smaller than the crop target");
        }
    }
    JointSample s = input;
    for (int i = 0; i < kStageCount; ++i) {
        const Stage stage = static_cast<Stage>(i);
        const std::uint64_t key = substream(seed, to_string(stage));
        Rng gate(key);
        const bool fire = gate.bernoulli(stage_probability(cfg, stage));
        const std::uint64_t ps = substream(key, "params");
        if (fire && trace) trace->fired.push_back(stage);
        if (stage == Stage::Crop) {
            s = fire ? crop_random(s, cfg.crop.target, ps) : crop_center(s, cfg.crop.target);
        } else if (fire) {
            switch (stage) {
                case Stage::Crop: break;
                case Stage::Affine: s = affine_joint(s, cfg.affine, ps); break;
                case Stage::BiasField: s.image = bias_field(s.image, cfg.bias_field, ps); break;
                case Stage::KSpaceSpike: s.image = kspace_spike(s.image, cfg.kspace_spike, ps); break;
                case Stage::Gibbs: s.image = gibbs_ringing(s.image, cfg.gibbs, ps); break;
                case Stage::Sharpen: s.image = sharpen(s.image, cfg.sharpen, ps); break;
                case Stage::Gamma: s.image = gamma_adjust(s.image, cfg.gamma, ps); break;
                case Stage::Cutout: s.image = cutout(s.image, cfg.cutout, ps); break;
                case Stage::AxisBlur: s.image = axis_blur(s.image, cfg.axis_blur, ps); break;
                case Stage::FlipRot90: s = flip_rot90_joint(s, ps); break;
                case Stage::Elastic: s = elastic_joint(s, cfg.elastic, ps); break;
                case Stage::EdgeZeroPad: s = edge_zero_pad(s, cfg.edge_zero_pad, ps); break;
                case Stage::TerminalCutout: s = terminal_cutout(s, cfg.terminal_cutout, ps); break;
                case Stage::Noise: s.image = noise_inject(s.image, cfg.noise, ps); break;
            }
        }
        if (stop_after && *stop_after == stage) break;
    }
    s.image = clamp01(std::move(s.image));
    s.labels = relabel_consecutive(s.labels);
    return s;
}

}  // namespace anystar
