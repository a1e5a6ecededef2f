#include "anystar/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anystar/rng.hpp"

namespace anystar {

void PerlinSpec::validate() const {
    for (double p : lattice_period) {
        if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("perlin: lattice_period must be >= 2 on each axis");
    }
    if (octaves < 1) throw std::invalid_argument("perlin: octaves must be >= 1");
    if (!(persistence > 0.0 && persistence <= 1.0)) {
        throw std::invalid_argument("perlin: persistence must lie in (0, 1]");
    }
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
// Unit-length edge directions of the cube.
constexpr double kGradients[12][3] = {
    {kInvSqrt2, kInvSqrt2, 0},  {-kInvSqrt2, kInvSqrt2, 0},  {kInvSqrt2, -kInvSqrt2, 0},  {-kInvSqrt2, -kInvSqrt2, 0},
    {kInvSqrt2, 0, kInvSqrt2},  {-kInvSqrt2, 0, kInvSqrt2},  {kInvSqrt2, 0, -kInvSqrt2},  {-kInvSqrt2, 0, -kInvSqrt2},
    {0, kInvSqrt2, kInvSqrt2},  {0, -kInvSqrt2, kInvSqrt2},  {0, kInvSqrt2, -kInvSqrt2},  {0, -kInvSqrt2, -kInvSqrt2},
};

// Gradient noise with unit gradients is bounded by sqrt(3)/2 in 3D.
constexpr double kUnitScale = 1.1547005383792515290;

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

struct AxisTable {
    std::vector<int> cell;
    std::vector<double> frac;
    std::vector<double> weight;
    int lattice = 0;
};

AxisTable axis_table(int n, double period) {
    AxisTable t;
    t.cell.resize(static_cast<std::size_t>(n));
    t.frac.resize(static_cast<std::size_t>(n));
    t.weight.resize(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        const double u = static_cast<double>(x) / period;
        const double f = std::floor(u);
        t.cell[static_cast<std::size_t>(x)] = static_cast<int>(f);
        t.frac[static_cast<std::size_t>(x)] = u - f;
        t.weight[static_cast<std::size_t>(x)] = fade(u - f);
    }
    t.lattice = t.cell.back() + 2;
    return t;
}

void add_octave(Image& acc, const std::array<double, 3>& period, std::uint64_t seed, double amplitude) {
    const Dims& d = acc.dims();
    const AxisTable tx = axis_table(d[0], period[0]);
    const AxisTable ty = axis_table(d[1], period[1]);
    const AxisTable tz = axis_table(d[2], period[2]);
    const std::size_t lx = static_cast<std::size_t>(tx.lattice);
    const std::size_t ly = static_cast<std::size_t>(ty.lattice);
    const std::size_t lz = static_cast<std::size_t>(tz.lattice);

    std::vector<unsigned char> grad(lx * ly * lz);
    for (std::size_t k = 0; k < lz; ++k) {
        for (std::size_t j = 0; j < ly; ++j) {
            for (std::size_t i = 0; i < lx; ++i) {
                const std::uint64_t h = splitmix64(seed ^ (i * 0x9E3779B97F4A7C15ULL) ^
                                                   (j * 0xC2B2AE3D27D4EB4FULL) ^ (k * 0x165667B19E3779F9ULL));
                grad[i + lx * (j + ly * k)] = static_cast<unsigned char>((h >> 32) % 12);
            }
        }
    }
    auto g = [&](int i, int j, int k) -> const double* {
        return kGradients[grad[static_cast<std::size_t>(i) + lx * (static_cast<std::size_t>(j) + ly * static_cast<std::size_t>(k))]];
    };

    for (int z = 0; z < d[2]; ++z) {
        const int k0 = tz.cell[static_cast<std::size_t>(z)];
        const double fz = tz.frac[static_cast<std::size_t>(z)];
        const double wz = tz.weight[static_cast<std::size_t>(z)];
        for (int y = 0; y < d[1]; ++y) {
            const int j0 = ty.cell[static_cast<std::size_t>(y)];
            const double fy = ty.frac[static_cast<std::size_t>(y)];
            const double wy = ty.weight[static_cast<std::size_t>(y)];
            float* row = &acc(0, y, z);
            for (int x = 0; x < d[0]; ++x) {
                const int i0 = tx.cell[static_cast<std::size_t>(x)];
                const double fx = tx.frac[static_cast<std::size_t>(x)];
                const double wx = tx.weight[static_cast<std::size_t>(x)];
                auto dotg = [&](int di, int dj, int dk) {
                    const double* gr = g(i0 + di, j0 + dj, k0 + dk);
                    return gr[0] * (fx - di) + gr[1] * (fy - dj) + gr[2] * (fz - dk);
                };
                const double x00 = dotg(0, 0, 0) + wx * (dotg(1, 0, 0) - dotg(0, 0, 0));
                const double x10 = dotg(0, 1, 0) + wx * (dotg(1, 1, 0) - dotg(0, 1, 0));
                const double x01 = dotg(0, 0, 1) + wx * (dotg(1, 0, 1) - dotg(0, 0, 1));
                const double x11 = dotg(0, 1, 1) + wx * (dotg(1, 1, 1) - dotg(0, 1, 1));
                const double y0 = x00 + wy * (x10 - x00);
                const double y1 = x01 + wy * (x11 - x01);
                const double v = y0 + wz * (y1 - y0);
                row[x] += static_cast<float>(amplitude * kUnitScale * v);
            }
        }
    }
}

}  // namespace

Image perlin3(Dims dims, const PerlinSpec& spec) {
    spec.validate();
    Image out(dims, 0.0f);
    double amplitude = 1.0;
    double total = 0.0;
    for (int k = 0; k < spec.octaves; ++k) total += std::pow(spec.persistence, k);
    for (int k = 0; k < spec.octaves; ++k) {
        const double scale = std::ldexp(1.0, -k);
        const std::array<double, 3> period{spec.lattice_period[0] * scale, spec.lattice_period[1] * scale,
                                           spec.lattice_period[2] * scale};
        add_octave(out, period, substream(spec.seed, static_cast<std::uint64_t>(k)), amplitude / total);
        amplitude *= spec.persistence;
    }
    for (float& v : out.data()) v = std::clamp(v, -1.0f, 1.0f);
    return out;
}

std::uint64_t perlin_channel_seed(std::uint64_t seed, int channel) {
    return substream(substream(seed, "channel"), static_cast<std::uint64_t>(channel));
}

std::vector<Image> perlin_multichannel(Dims dims, int channels, const PerlinSpec& spec) {
    if (channels < 1) throw std::invalid_argument("perlin_multichannel: channel count must be >= 1");
    std::vector<Image> out;
    out.reserve(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
        PerlinSpec s = spec;
        s.seed = perlin_channel_seed(spec.seed, c);
        out.push_back(perlin3(dims, s));
    }
    return out;
}

DeformField smooth_deform_field(Dims dims, double control_spacing, double max_disp, std::uint64_t seed) {
    if (!(control_spacing >= 2.0) || !std::isfinite(control_spacing)) {
        throw std::invalid_argument("smooth_deform_field: control_spacing must be >= 2");
    }
    if (!(max_disp >= 0.0) || !std::isfinite(max_disp)) {
        throw std::invalid_argument("smooth_deform_field: max_disp must be >= 0");
    }
    DeformField field(dims, Vec3{});
    if (max_disp == 0.0) return field;

    Dims ctrl{};
    for (int a = 0; a < 3; ++a) {
        ctrl[a] = static_cast<int>(std::ceil(static_cast<double>(dims[a] - 1) / control_spacing)) + 1;
        ctrl[a] = std::max(ctrl[a], 2);
    }
    Rng rng(seed);
    std::array<Image, 3> comp{Image(ctrl), Image(ctrl), Image(ctrl)};
    for (std::size_t i = 0; i < comp[0].size(); ++i) {
        for (auto& c : comp) c[i] = static_cast<float>(rng.uniform(-max_disp, max_disp));
    }
    // Control points cover every voxel, so each axis reduces to a fixed
    // (cell, weight) pair and the upsampling is separable.
    std::array<std::vector<int>, 3> cell;
    std::array<std::vector<double>, 3> wt;
    for (int a = 0; a < 3; ++a) {
        cell[a].resize(static_cast<std::size_t>(dims[a]));
        wt[a].resize(static_cast<std::size_t>(dims[a]));
        for (int t = 0; t < dims[a]; ++t) {
            const double u = t / control_spacing;
            const int c = std::min(static_cast<int>(std::floor(u)), ctrl[a] - 2);
            cell[a][static_cast<std::size_t>(t)] = c;
            wt[a][static_cast<std::size_t>(t)] = u - c;
        }
    }
    for (int z = 0; z < dims[2]; ++z) {
        const int cz = cell[2][static_cast<std::size_t>(z)];
        const double wz = wt[2][static_cast<std::size_t>(z)];
        for (int y = 0; y < dims[1]; ++y) {
            const int cy = cell[1][static_cast<std::size_t>(y)];
            const double wy = wt[1][static_cast<std::size_t>(y)];
            for (int x = 0; x < dims[0]; ++x) {
                const int cx = cell[0][static_cast<std::size_t>(x)];
                const double wx = wt[0][static_cast<std::size_t>(x)];
                Vec3 v;
                for (int a = 0; a < 3; ++a) {
                    const Image& g = comp[static_cast<std::size_t>(a)];
                    auto lerp_x = [&](int j, int k) {
                        const double g0 = g(cx, j, k), g1 = g(cx + 1, j, k);
                        return g0 + wx * (g1 - g0);
                    };
                    const double y0 = lerp_x(cy, cz) + wy * (lerp_x(cy + 1, cz) - lerp_x(cy, cz));
                    const double y1 = lerp_x(cy, cz + 1) + wy * (lerp_x(cy + 1, cz + 1) - lerp_x(cy, cz + 1));
                    v[a] = std::clamp(y0 + wz * (y1 - y0), -max_disp, max_disp);
                }
                field(x, y, z) = v;
            }
        }
    }
    return field;
}

namespace {

void check_field(Dims vol, const DeformField& field) {
    if (vol != field.dims()) throw std::invalid_argument("warp: field dims differ from volume dims");
}

}  // namespace

Image warp(const Image& vol, const DeformField& field, Interp interp, PadMode pad) {
    check_field(vol.dims(), field);
    Image out(vol.dims(), 0.0f, vol.spacing());
    for (int z = 0; z < vol.nz(); ++z) {
        for (int y = 0; y < vol.ny(); ++y) {
            for (int x = 0; x < vol.nx(); ++x) {
                const Vec3 p = Vec3{double(x), double(y), double(z)} + field(x, y, z);
                if (interp == Interp::Trilinear) {
                    out(x, y, z) = static_cast<float>(trilinear_sample(vol, p, pad));
                } else {
                    int idx[3];
                    bool inside = true;
                    for (int a = 0; a < 3; ++a) {
                        idx[a] = nearest_index(p[a]);
                        if (idx[a] < 0 || idx[a] >= vol.dims()[a]) {
                            if (pad == PadMode::Zero) inside = false;
                            else idx[a] = reflect_index(idx[a], vol.dims()[a]);
                        }
                    }
                    out(x, y, z) = inside ? vol(idx[0], idx[1], idx[2]) : 0.0f;
                }
            }
        }
    }
    return out;
}

LabelVolume warp(const LabelVolume& vol, const DeformField& field, PadMode pad) {
    check_field(vol.dims(), field);
    LabelVolume out(vol.dims(), 0, vol.spacing());
    for (int z = 0; z < vol.nz(); ++z) {
        for (int y = 0; y < vol.ny(); ++y) {
            for (int x = 0; x < vol.nx(); ++x) {
                out(x, y, z) = nearest_sample(vol, Vec3{double(x), double(y), double(z)} + field(x, y, z), pad);
            }
        }
    }
    return out;
}

}  // namespace anystar
