#include "anystar/appearance.hpp"

#include <algorithm>
#include <stdexcept>

#include "anystar/rng.hpp"

namespace anystar {

const char* to_string(BackgroundMode mode) {
    switch (mode) {
        case BackgroundMode::PlainBright: return "plain-bright";
        case BackgroundMode::PlainRand: return "plain-rand";
        case BackgroundMode::PerlinShapes: return "perlin-shapes";
    }
    return "plain-rand";
}

const char* to_string(GeneratorMode mode) {
    switch (mode) {
        case GeneratorMode::Mix: return "mix";
        case GeneratorMode::BrightFG_PlainBG: return "brightfg-plainbg";
        case GeneratorMode::RandFG_PlainBG: return "randfg-plainbg";
        case GeneratorMode::RandFG_PerlinBG: return "randfg-perlinbg";
    }
    return "mix";
}

BackgroundMode background_mode_from_string(const std::string& s) {
    if (s == "plain-bright") return BackgroundMode::PlainBright;
    if (s == "plain-rand") return BackgroundMode::PlainRand;
    if (s == "perlin-shapes") return BackgroundMode::PerlinShapes;
    throw std::invalid_argument("unknown background mode '" + s + "'");
}

GeneratorMode generator_mode_from_string(const std::string& s) {
    if (s == "mix") return GeneratorMode::Mix;
    if (s == "brightfg-plainbg") return GeneratorMode::BrightFG_PlainBG;
    if (s == "randfg-plainbg") return GeneratorMode::RandFG_PlainBG;
    if (s == "randfg-perlinbg") return GeneratorMode::RandFG_PerlinBG;
    throw std::invalid_argument("unknown generator mode '" + s + "'");
}

namespace {

void check_range(const std::array<double, 2>& r, const char* key, double lo_bound, double hi_bound) {
    if (!(r[0] <= r[1]) || r[0] < lo_bound || r[1] > hi_bound) {
        throw std::invalid_argument(std::string(key) + ": invalid range");
    }
}

}  // namespace

void AppearanceConfig::validate() const {
    check_range(mean_range, "appearance.mean_range", 0.0, 1.0);
    check_range(std_range, "appearance.std_range", 0.0, 1e9);
    check_range(texture_strength_range, "appearance.texture_strength_range", 0.0, 1.0);
    if (max_background_shapes < 1 || max_background_shapes > 255) {
        throw std::invalid_argument("appearance.max_background_shapes: must lie in [1, 255]");
    }
    if (!(shape_control_spacing >= 2.0)) throw std::invalid_argument("appearance.shape_control_spacing: must be >= 2");
    if (!(shape_max_disp >= 0.0)) throw std::invalid_argument("appearance.shape_max_disp: must be >= 0");
    shape_perlin.validate();
    texture_perlin.validate();
}

GmmParams sample_gmm_params(int n, BackgroundMode mode, const AppearanceConfig& cfg, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gmm_params: need at least one instance");
    if (!(cfg.mean_range[0] <= cfg.mean_range[1]) || !(cfg.std_range[0] <= cfg.std_range[1])) {
        throw std::invalid_argument("sample_gmm_params: empty parameter range");
    }
    Rng rng(seed);
    GmmParams p;
    p.means.resize(static_cast<std::size_t>(n) + 1);
    p.stds.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        p.means[static_cast<std::size_t>(i)] = rng.uniform(cfg.mean_range[0], cfg.mean_range[1]);
        p.stds[static_cast<std::size_t>(i)] = rng.uniform(cfg.std_range[0], cfg.std_range[1]);
    }
    if (mode == BackgroundMode::PlainBright) {
        const double fg_min = *std::min_element(p.means.begin(), p.means.end() - 1);
        if (!(fg_min > 0.0)) throw std::invalid_argument("sample_gmm_params: bright foreground needs mean_range lo > 0");
        double bg = rng.uniform(0.0, fg_min);
        while (!(bg < fg_min)) bg = rng.uniform(0.0, fg_min);
        p.means.back() = bg;
    }
    return p;
}

Image render_foreground(const LabelVolume& labels, const GmmParams& params, std::uint64_t seed) {
    if (params.means.size() != params.stds.size() || params.means.empty()) {
        throw std::invalid_argument("render_foreground: malformed GMM parameters");
    }
    if (max_label(labels) > params.instances()) {
        throw std::invalid_argument("render_foreground: GMM has fewer components than instances");
    }
    Rng rng(seed);
    Image out(labels.dims(), 0.0f, labels.spacing());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const Label l = labels[j];
        if (l == 0) continue;
        const auto i = static_cast<std::size_t>(l - 1);
        out[j] = static_cast<float>(rng.normal(params.means[i], params.stds[i]));
    }
    return out;
}

int draw_shape_count(const AppearanceConfig& cfg, std::uint64_t seed) {
    if (cfg.max_background_shapes < 1) throw std::invalid_argument("max_background_shapes must be >= 1");
    Rng rng(substream(seed, "shape-count"));
    return static_cast<int>(rng.uniform_int(1, cfg.max_background_shapes));
}

Volume3<std::uint8_t> background_subcategories(Dims dims, int shapes, const AppearanceConfig& cfg,
                                               std::uint64_t seed) {
    if (shapes < 1 || shapes > 255) throw std::invalid_argument("background_subcategories: shape count out of range");
    Volume3<std::uint8_t> cat(dims, 0);
    if (shapes == 1) return cat;
    PerlinSpec spec = cfg.shape_perlin;
    spec.seed = substream(seed, "shape-perlin");
    const auto channels = perlin_multichannel(dims, shapes, spec);
    Image best(dims, -2.0f);
    for (int c = 0; c < shapes; ++c) {
        const auto field = smooth_deform_field(dims, cfg.shape_control_spacing, cfg.shape_max_disp,
                                               substream(substream(seed, "shape-deform"), static_cast<std::uint64_t>(c)));
        const Image warped = warp(channels[static_cast<std::size_t>(c)], field, Interp::Trilinear, PadMode::Reflect);
        for (std::size_t j = 0; j < warped.size(); ++j) {
            if (warped[j] > best[j]) {
                best[j] = warped[j];
                cat[j] = static_cast<std::uint8_t>(c);
            }
        }
    }
    return cat;
}

Image render_background(const LabelVolume& labels, BackgroundMode mode, const GmmParams& params,
                        const AppearanceConfig& cfg, std::uint64_t seed) {
    Image out(labels.dims(), 0.0f, labels.spacing());
    Rng rng(substream(seed, "background-intensity"));
    if (mode != BackgroundMode::PerlinShapes) {
        const double mu = params.background_mean();
        const double sd = params.stds.back();
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] == 0) out[j] = static_cast<float>(rng.normal(mu, sd));
        }
        return out;
    }
    if (cfg.max_background_shapes < 1) throw std::invalid_argument("render_background: B must be >= 1");
    const int shapes = draw_shape_count(cfg, seed);
    const auto cat = background_subcategories(labels.dims(), shapes, cfg, seed);
    Rng prng(substream(seed, "shape-gmm"));
    std::vector<double> mu(static_cast<std::size_t>(shapes)), sd(static_cast<std::size_t>(shapes));
    for (int c = 0; c < shapes; ++c) {
        mu[static_cast<std::size_t>(c)] = prng.uniform(cfg.mean_range[0], cfg.mean_range[1]);
        sd[static_cast<std::size_t>(c)] = prng.uniform(cfg.std_range[0], cfg.std_range[1]);
    }
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] != 0) continue;
        const auto c = static_cast<std::size_t>(cat[j]);
        out[j] = static_cast<float>(rng.normal(mu[c], sd[c]));
    }
    return out;
}

Image modulate_texture(const Image& img, const PerlinSpec& spec, double strength) {
    if (!(strength >= 0.0 && strength <= 1.0)) throw std::invalid_argument("modulate_texture: strength must lie in [0, 1]");
    Image out = img;
    if (strength == 0.0) return out;
    const Image p = perlin3(img.dims(), spec);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double v = static_cast<double>(img[j]) * (1.0 + strength * static_cast<double>(p[j]));
        out[j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

BackgroundMode resolve_background(GeneratorMode mode, std::uint64_t seed) {
    switch (mode) {
        case GeneratorMode::BrightFG_PlainBG: return BackgroundMode::PlainBright;
        case GeneratorMode::RandFG_PlainBG: return BackgroundMode::PlainRand;
        case GeneratorMode::RandFG_PerlinBG: return BackgroundMode::PerlinShapes;
        case GeneratorMode::Mix: break;
    }
    Rng rng(substream(seed, "mix"));
    switch (rng.uniform_int(0, 2)) {
        case 0: return BackgroundMode::PlainBright;
        case 1: return BackgroundMode::PlainRand;
        default: return BackgroundMode::PerlinShapes;
    }
}

Synthesis synthesize(const LabelVolume& labels, GeneratorMode mode, const AppearanceConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (!has_consecutive_ids(labels)) throw std::invalid_argument("synthesize: label ids must be consecutive");
    Synthesis s;
    s.background = resolve_background(mode, seed);
    const int n = std::max(1, count_instances(labels));
    const GmmParams params = sample_gmm_params(n, s.background, cfg, substream(seed, "gmm"));
    Image img = render_foreground(labels, params, substream(seed, "foreground"));
    const Image bg = render_background(labels, s.background, params, cfg, substream(seed, "background"));
    for (std::size_t j = 0; j < img.size(); ++j) {
        img[j] = std::clamp(img[j] + bg[j], 0.0f, 1.0f);
    }
    Rng rng(substream(seed, "texture"));
    const double strength = rng.uniform(cfg.texture_strength_range[0], cfg.texture_strength_range[1]);
    PerlinSpec tex = cfg.texture_perlin;
    tex.seed = substream(seed, "texture-perlin");
    s.image = modulate_texture(img, tex, strength);
    return s;
}

}  // namespace anystar
