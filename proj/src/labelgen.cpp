#include "anystar/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "anystar/rng.hpp"

namespace anystar {

void LabelGenConfig::validate() const {
    for (int n : grid_shape) {
        if (n < 1) throw std::invalid_argument("labelgen.grid_shape: each entry must be >= 1");
    }
    if (!(base_radius > 0.0)) throw std::invalid_argument("labelgen.base_radius: must be > 0");
    if (!(jitter_frac >= 0.0)) throw std::invalid_argument("labelgen.jitter_frac: must be >= 0");
    if (!(scale_range[0] > 0.0 && scale_range[0] <= scale_range[1])) {
        throw std::invalid_argument("labelgen.scale_range: need 0 < lo <= hi");
    }
    if (!(removal_frac_max >= 0.0 && removal_frac_max <= 1.0 / 3.0 + 1e-12)) {
        throw std::invalid_argument("labelgen.removal_frac_max: must lie in [0, 1/3]");
    }
    if (!(noise_gain >= 0.0)) throw std::invalid_argument("labelgen.noise_gain: must be >= 0");
    for (int n : canvas_dims) {
        if (n < 1) throw std::invalid_argument("labelgen.canvas_dims: each entry must be >= 1");
    }
    for (int n : output_dims) {
        if (n < 1) throw std::invalid_argument("labelgen.output_dims: each entry must be >= 1");
    }
    if (!(pad_frac_range[0] >= 0.0 && pad_frac_range[0] <= pad_frac_range[1])) {
        throw std::invalid_argument("labelgen.pad_frac_range: need 0 <= lo <= hi");
    }
    perlin.validate();
}

std::vector<InstanceSeed> place_instances(const LabelGenConfig& cfg, std::uint64_t seed) {
    for (int n : cfg.grid_shape) {
        if (n < 1) throw std::invalid_argument("place_instances: empty grid");
    }
    Rng rng(seed);
    std::array<double, 3> pitch{};
    for (int a = 0; a < 3; ++a) pitch[a] = static_cast<double>(cfg.canvas_dims[a]) / cfg.grid_shape[a];

    std::vector<InstanceSeed> seeds;
    seeds.reserve(static_cast<std::size_t>(cfg.grid_shape[0] * cfg.grid_shape[1] * cfg.grid_shape[2]));
    for (int k = 0; k < cfg.grid_shape[2]; ++k) {
        for (int j = 0; j < cfg.grid_shape[1]; ++j) {
            for (int i = 0; i < cfg.grid_shape[0]; ++i) {
                const int idx[3] = {i, j, k};
                InstanceSeed s{};
                for (int a = 0; a < 3; ++a) {
                    const double jitter = cfg.jitter_frac * pitch[a];
                    s.center[a] = (idx[a] + 0.5) * pitch[a] - 0.5 + rng.uniform(-jitter, jitter);
                }
                s.radius = cfg.base_radius * rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
                seeds.push_back(s);
            }
        }
    }

    const std::size_t n = seeds.size();
    const double frac = rng.uniform(0.0, cfg.removal_frac_max);
    const auto n_remove = std::min(n, static_cast<std::size_t>(std::floor(frac * static_cast<double>(n))));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t r = 0; r < n_remove; ++r) {
        const auto pick = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(r), static_cast<std::int64_t>(n - 1)));
        std::swap(order[r], order[pick]);
    }
    std::vector<bool> removed(n, false);
    for (std::size_t r = 0; r < n_remove; ++r) removed[order[r]] = true;
    std::vector<InstanceSeed> kept;
    kept.reserve(n - n_remove);
    for (std::size_t s = 0; s < n; ++s) {
        if (!removed[s]) kept.push_back(seeds[s]);
    }
    return kept;
}

LabelVolume assign_labels(const std::vector<InstanceSeed>& seeds, const LabelGenConfig& cfg, const Image& noise) {
    if (seeds.empty()) throw std::invalid_argument("assign_labels: no seeds");
    if (noise.dims() != cfg.canvas_dims) throw std::invalid_argument("assign_labels: noise dims differ from canvas");
    const Dims& d = cfg.canvas_dims;
    const double noise_scale = cfg.noise_gain * cfg.base_radius;

    double max_radius = 0.0;
    for (const auto& s : seeds) {
        if (!(s.radius > 0.0)) throw std::invalid_argument("assign_labels: seed radius must be > 0");
        max_radius = std::max(max_radius, s.radius);
    }
    // A voxel can only be claimed by a center within r_i + noise_scale, so
    // every center is splatted over the same reach; the nearest center of
    // any claimable voxel is then always among the visited ones.
    const double reach = max_radius + noise_scale + 1.0;

    const std::size_t nvox = Image::voxel_count(d);
    std::vector<double> best_d(nvox, std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> best_i(nvox, -1);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Vec3 c = seeds[i].center;
        int lo[3], hi[3];
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(0, static_cast<int>(std::floor(c[a] - reach)));
            hi[a] = std::min(d[a] - 1, static_cast<int>(std::ceil(c[a] + reach)));
        }
        for (int z = lo[2]; z <= hi[2]; ++z) {
            const double dz = z - c.z;
            for (int y = lo[1]; y <= hi[1]; ++y) {
                const double dy = y - c.y;
                std::size_t j = noise.index(lo[0], y, z);
                for (int x = lo[0]; x <= hi[0]; ++x, ++j) {
                    const double dx = x - c.x;
                    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz) + noise_scale * noise[j];
                    if (dist < best_d[j]) {
                        best_d[j] = dist;
                        best_i[j] = static_cast<std::int32_t>(i);
                    }
                }
            }
        }
    }

    LabelVolume out(d, 0);
    for (std::size_t j = 0; j < nvox; ++j) {
        const auto i = best_i[j];
        if (i >= 0 && best_d[j] < seeds[static_cast<std::size_t>(i)].radius) out[j] = i + 1;
    }
    return relabel_consecutive(out);
}

LabelVolume assign_labels(const std::vector<InstanceSeed>& seeds, const LabelGenConfig& cfg, std::uint64_t seed) {
    PerlinSpec spec = cfg.perlin;
    spec.seed = substream(seed, "label-noise");
    const Image noise = cfg.noise_gain == 0.0 ? Image(cfg.canvas_dims, 0.0f) : perlin3(cfg.canvas_dims, spec);
    return assign_labels(seeds, cfg, noise);
}

PadDraw sample_padding(const LabelVolume& labels, const LabelGenConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    PadDraw draw;
    const bool reflect = rng.bernoulli(0.5);
    draw.mode = cfg.pad_mode.value_or(reflect ? PadMode::Reflect : PadMode::Zero);
    for (int a = 0; a < 3; ++a) {
        const double frac = rng.uniform(cfg.pad_frac_range[0], cfg.pad_frac_range[1]);
        const int total = static_cast<int>(std::lround(frac * labels.dims()[a]));
        draw.before[a] = static_cast<int>(rng.uniform_int(0, total));
        draw.after[a] = total - draw.before[a];
    }
    return draw;
}

LabelVolume pad_labels(const LabelVolume& labels, const PadDraw& pad) {
    const Dims& src = labels.dims();
    Dims dst{};
    for (int a = 0; a < 3; ++a) {
        if (pad.before[a] < 0 || pad.after[a] < 0) throw std::invalid_argument("pad_labels: negative padding");
        dst[a] = src[a] + pad.before[a] + pad.after[a];
    }
    LabelVolume out(dst, 0, labels.spacing());
    MirrorRelabeler relabel(max_label(labels));
    for (int z = 0; z < dst[2]; ++z) {
        for (int y = 0; y < dst[1]; ++y) {
            for (int x = 0; x < dst[0]; ++x) {
                const int s[3] = {x - pad.before[0], y - pad.before[1], z - pad.before[2]};
                if (labels.contains(s[0], s[1], s[2])) {
                    out(x, y, z) = labels(s[0], s[1], s[2]);
                } else if (pad.mode == PadMode::Reflect) {
                    out(x, y, z) = relabel(labels(reflect_index(s[0], src[0]), reflect_index(s[1], src[1]),
                                                  reflect_index(s[2], src[2])),
                                           reflect_tile(s[0], src[0]), reflect_tile(s[1], src[1]),
                                           reflect_tile(s[2], src[2]));
                }
            }
        }
    }
    return out;
}

LabelVolume density_pad_rescale(const LabelVolume& labels, const LabelGenConfig& cfg, std::uint64_t seed) {
    const PadDraw draw = sample_padding(labels, cfg, seed);
    return relabel_consecutive(resample_to_grid(pad_labels(labels, draw), cfg.output_dims));
}

LabelVolume synthesize_labels(const LabelGenConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto seeds = place_instances(cfg, substream(seed, "place"));
    const auto canvas = assign_labels(seeds, cfg, substream(seed, "assign"));
    return density_pad_rescale(canvas, cfg, substream(seed, "pad"));
}

}  // namespace anystar
