#include "anystar/volume.hpp"

#include <algorithm>
#include <unordered_map>

namespace anystar {

const char* to_string(PadMode mode) {
    switch (mode) {
        case PadMode::Zero: return "zero";
        case PadMode::Reflect: return "reflect";
    }
    return "zero";
}

PadMode pad_mode_from_string(const std::string& s) {
    if (s == "zero") return PadMode::Zero;
    if (s == "reflect") return PadMode::Reflect;
    throw std::invalid_argument("unknown pad mode '" + s + "'");
}

namespace {

void require_finite(Vec3 p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw std::invalid_argument("sample coordinate is not finite");
    }
}

// Coordinates far outside the grid are clamped before the integer
// conversion; anything beyond one volume width is already out of range.
double clamp_coord(double p, int n) {
    const double lim = 4.0 * static_cast<double>(n) + 8.0;
    return std::clamp(p, -lim, lim);
}

}  // namespace

double trilinear_sample(const Image& vol, Vec3 p, PadMode pad) {
    require_finite(p);
    const Dims& d = vol.dims();
    int i0[3];
    double w1[3];
    for (int a = 0; a < 3; ++a) {
        const double c = clamp_coord(p[a], d[a]);
        const double f = std::floor(c);
        i0[a] = static_cast<int>(f);
        w1[a] = c - f;
    }
    double acc = 0.0;
    if (i0[0] >= 0 && i0[1] >= 0 && i0[2] >= 0 && i0[0] + 1 < d[0] && i0[1] + 1 < d[1] && i0[2] + 1 < d[2]) {
        const std::size_t sy = static_cast<std::size_t>(d[0]);
        const std::size_t sz = sy * static_cast<std::size_t>(d[1]);
        const float* base = &vol(i0[0], i0[1], i0[2]);
        for (int corner = 0; corner < 8; ++corner) {
            const int bx = corner & 1, by = (corner >> 1) & 1, bz = (corner >> 2) & 1;
            double w = bx ? w1[0] : 1.0 - w1[0];
            w *= by ? w1[1] : 1.0 - w1[1];
            w *= bz ? w1[2] : 1.0 - w1[2];
            if (w == 0.0) continue;
            acc += w * static_cast<double>(base[static_cast<std::size_t>(bx) + by * sy + bz * sz]);
        }
        return acc;
    }
    for (int corner = 0; corner < 8; ++corner) {
        int idx[3];
        double w = 1.0;
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            idx[a] = i0[a] + bit;
            w *= bit ? w1[a] : 1.0 - w1[a];
            if (idx[a] < 0 || idx[a] >= d[a]) {
                if (pad == PadMode::Zero) {
                    inside = false;
                } else {
                    idx[a] = reflect_index(idx[a], d[a]);
                }
            }
        }
        if (!inside || w == 0.0) continue;
        acc += w * static_cast<double>(vol(idx[0], idx[1], idx[2]));
    }
    return acc;
}

Label nearest_sample(const LabelVolume& vol, Vec3 p, PadMode pad) {
    require_finite(p);
    const Dims& d = vol.dims();
    int idx[3];
    for (int a = 0; a < 3; ++a) {
        idx[a] = nearest_index(clamp_coord(p[a], d[a]));
        if (idx[a] < 0 || idx[a] >= d[a]) {
            if (pad == PadMode::Zero) return 0;
            idx[a] = reflect_index(idx[a], d[a]);
        }
    }
    return vol(idx[0], idx[1], idx[2]);
}

Label MirrorRelabeler::operator()(Label label, int tx, int ty, int tz) {
    if (label == 0 || (tx == 0 && ty == 0 && tz == 0)) return label;
    const std::array<int, 4> key{tx, ty, tz, label};
    if (last_id_ != 0 && key == last_key_) return last_id_;
    auto [it, inserted] = seen_.try_emplace(key, next_);
    if (inserted) ++next_;
    last_key_ = key;
    last_id_ = it->second;
    return it->second;
}

Label nearest_sample_mirrored(const LabelVolume& vol, Vec3 p, MirrorRelabeler& relabel) {
    require_finite(p);
    const Dims& d = vol.dims();
    int idx[3];
    int tile[3];
    for (int a = 0; a < 3; ++a) {
        const int i = nearest_index(clamp_coord(p[a], d[a]));
        tile[a] = reflect_tile(i, d[a]);
        idx[a] = reflect_index(i, d[a]);
    }
    return relabel(vol(idx[0], idx[1], idx[2]), tile[0], tile[1], tile[2]);
}

namespace {

// Corner-to-corner map of target voxel t onto the source axis.
std::vector<double> source_positions(int n_src, int n_dst) {
    std::vector<double> pos(static_cast<std::size_t>(n_dst));
    const double scale = static_cast<double>(n_src) / static_cast<double>(n_dst);
    for (int t = 0; t < n_dst; ++t) {
        pos[static_cast<std::size_t>(t)] = (static_cast<double>(t) + 0.5) * scale - 0.5;
    }
    return pos;
}

void check_target(Dims target) {
    for (int n : target) {
        if (n < 1) throw std::invalid_argument("resample_to_grid: target dimension must be >= 1");
    }
}

Spacing rescaled_spacing(const Spacing& s, Dims src, Dims dst) {
    Spacing out{};
    for (int a = 0; a < 3; ++a) out[a] = s[a] * static_cast<double>(src[a]) / static_cast<double>(dst[a]);
    return out;
}

}  // namespace

Image resample_to_grid(const Image& vol, Dims target) {
    check_target(target);
    if (target == vol.dims()) return vol;
    const Dims& d = vol.dims();
    std::array<std::vector<double>, 3> pos;
    for (int a = 0; a < 3; ++a) {
        pos[a] = source_positions(d[a], target[a]);
        // Positions in [-0.5, 0) or (n-1, n-0.5] read the edge voxel.
        for (double& p : pos[a]) p = std::clamp(p, 0.0, static_cast<double>(d[a] - 1));
    }
    Image out(target, 0.0f, rescaled_spacing(vol.spacing(), d, target));
    for (int z = 0; z < target[2]; ++z) {
        for (int y = 0; y < target[1]; ++y) {
            for (int x = 0; x < target[0]; ++x) {
                out(x, y, z) = static_cast<float>(
                    trilinear_sample(vol, {pos[0][x], pos[1][y], pos[2][z]}, PadMode::Reflect));
            }
        }
    }
    return out;
}

LabelVolume resample_to_grid(const LabelVolume& vol, Dims target) {
    check_target(target);
    if (target == vol.dims()) return vol;
    const Dims& d = vol.dims();
    std::array<std::vector<int>, 3> idx;
    for (int a = 0; a < 3; ++a) {
        const auto pos = source_positions(d[a], target[a]);
        idx[a].resize(pos.size());
        for (std::size_t t = 0; t < pos.size(); ++t) {
            idx[a][t] = std::clamp(nearest_index(pos[t]), 0, d[a] - 1);
        }
    }
    LabelVolume out(target, 0, rescaled_spacing(vol.spacing(), d, target));
    for (int z = 0; z < target[2]; ++z) {
        for (int y = 0; y < target[1]; ++y) {
            for (int x = 0; x < target[0]; ++x) {
                out(x, y, z) = vol(idx[0][x], idx[1][y], idx[2][z]);
            }
        }
    }
    return out;
}

namespace {

std::vector<Label> sorted_ids(const LabelVolume& labels) {
    std::vector<Label> ids;
    const Label mx = max_label(labels);
    if (mx <= 0) return ids;
    if (mx < (1 << 20)) {
        std::vector<char> seen(static_cast<std::size_t>(mx) + 1, 0);
        for (Label v : labels.data()) seen[static_cast<std::size_t>(v)] = 1;
        for (Label v = 1; v <= mx; ++v) {
            if (seen[static_cast<std::size_t>(v)]) ids.push_back(v);
        }
        return ids;
    }
    ids = labels.data();
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.front() == 0) ids.erase(ids.begin());
    return ids;
}

}  // namespace

int count_instances(const LabelVolume& labels) { return static_cast<int>(sorted_ids(labels).size()); }

Label max_label(const LabelVolume& labels) {
    Label mx = 0;
    for (Label v : labels.data()) {
        if (v < 0) throw std::invalid_argument("label volume holds a negative label");
        mx = std::max(mx, v);
    }
    return mx;
}

LabelVolume relabel_consecutive(const LabelVolume& labels) {
    const auto ids = sorted_ids(labels);
    LabelVolume out(labels.dims(), 0, labels.spacing());
    if (ids.empty()) return out;
    if (ids.back() < (1 << 20)) {
        std::vector<Label> lut(static_cast<std::size_t>(ids.back()) + 1, 0);
        for (std::size_t k = 0; k < ids.size(); ++k) lut[static_cast<std::size_t>(ids[k])] = static_cast<Label>(k + 1);
        for (std::size_t i = 0; i < labels.size(); ++i) out[i] = lut[static_cast<std::size_t>(labels[i])];
        return out;
    }
    std::unordered_map<Label, Label> lut;
    for (std::size_t k = 0; k < ids.size(); ++k) lut[ids[k]] = static_cast<Label>(k + 1);
    lut[0] = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = lut[labels[i]];
    return out;
}

bool has_consecutive_ids(const LabelVolume& labels) {
    const auto ids = sorted_ids(labels);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] != static_cast<Label>(k + 1)) return false;
    }
    return true;
}

}  // namespace anystar
