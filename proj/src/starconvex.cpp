#include "anystar/starconvex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace anystar {

RaySet make_rays(int n) {
    if (n < 4) throw std::invalid_argument("make_rays: need at least 4 rays");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    RaySet rays;
    rays.dirs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        Vec3 d{r * std::cos(phi), r * std::sin(phi), z};
        rays.dirs.push_back((1.0 / d.norm()) * d);
    }
    return rays;
}

namespace {

struct BBox {
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};  // inclusive
};

std::map<Label, BBox> instance_boxes(const LabelVolume& L) {
    std::map<Label, BBox> boxes;
    for (int z = 0; z < L.nz(); ++z)
        for (int y = 0; y < L.ny(); ++y)
            for (int x = 0; x < L.nx(); ++x) {
                const Label l = L(x, y, z);
                if (!l) continue;
                auto [it, fresh] = boxes.try_emplace(l, BBox{{x, y, z}, {x, y, z}});
                if (fresh) continue;
                const int p[3] = {x, y, z};
                for (int a = 0; a < 3; ++a) {
                    it->second.lo[a] = std::min(it->second.lo[a], p[a]);
                    it->second.hi[a] = std::max(it->second.hi[a], p[a]);
                }
            }
    return boxes;
}

inline Label label_near(const LabelVolume& L, double x, double y, double z) {
    const int ix = nearest_index(x), iy = nearest_index(y), iz = nearest_index(z);
    return L.contains(ix, iy, iz) ? L(ix, iy, iz) : 0;
}

// Length along v from voxel `start` to where the nearest voxel first stops
// carrying the start label, found by walking the voxel faces the ray crosses
// (outside the grid counts as a different label). v is the direction in voxel
// units per unit length.
double exit_distance(const LabelVolume& L, std::array<int, 3> start, Vec3 v) {
    const Label id = L(start[0], start[1], start[2]);
    std::array<int, 3> cur = start;
    std::array<double, 3> next{}, delta{};
    std::array<int, 3> step{};
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (v[a] > 0.0) {
            step[a] = 1;
            next[a] = 0.5 / v[a];
            delta[a] = 1.0 / v[a];
        } else if (v[a] < 0.0) {
            step[a] = -1;
            next[a] = -0.5 / v[a];
            delta[a] = -1.0 / v[a];
        } else {
            next[a] = inf;
        }
    }
    for (;;) {
        const double t = std::min({next[0], next[1], next[2]});
        if (t == inf) throw std::invalid_argument("encode: zero ray direction");
        for (int a = 0; a < 3; ++a) {
            if (next[a] == t) {
                cur[a] += step[a];
                next[a] += delta[a];
            }
        }
        if (!L.contains(cur[0], cur[1], cur[2]) || L(cur[0], cur[1], cur[2]) != id) return t;
    }
}

}  // namespace

StarEncoding encode(const LabelVolume& labels, const RaySet& rays, Spacing spacing) {
    for (double s : spacing) {
        if (!(s > 0.0)) throw std::invalid_argument("encode: spacing must be > 0");
    }
    const Dims& d = labels.dims();
    const int nr = rays.size();
    StarEncoding enc;
    enc.dims = d;
    enc.n_rays = nr;
    enc.dists.assign(labels.size() * static_cast<std::size_t>(nr), 0.0f);
    enc.prob = Image(d, 0.0f, spacing);

    for (const auto& [id, box] : instance_boxes(labels)) {
        Dims size{};
        for (int a = 0; a < 3; ++a) size[a] = box.hi[a] - box.lo[a] + 1;
        Mask m(size, 0, spacing);
        for (int z = 0; z < size[2]; ++z)
            for (int y = 0; y < size[1]; ++y)
                for (int x = 0; x < size[0]; ++x) {
                    m(x, y, z) = labels(x + box.lo[0], y + box.lo[1], z + box.lo[2]) == id;
                }
        const auto dist = edt3(m, spacing);
        const double peak = *std::max_element(dist.data().begin(), dist.data().end());
        for (int z = 0; z < size[2]; ++z)
            for (int y = 0; y < size[1]; ++y)
                for (int x = 0; x < size[0]; ++x) {
                    if (m(x, y, z)) {
                        enc.prob(x + box.lo[0], y + box.lo[1], z + box.lo[2]) = static_cast<float>(dist(x, y, z) / peak);
                    }
                }
    }

    std::vector<Vec3> vox_dir(static_cast<std::size_t>(nr));
    for (int k = 0; k < nr; ++k) {
        const Vec3& r = rays.dirs[static_cast<std::size_t>(k)];
        vox_dir[static_cast<std::size_t>(k)] = {r.x / spacing[0], r.y / spacing[1], r.z / spacing[2]};
    }
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x) {
                const std::size_t j = labels.index(x, y, z);
                const Label id = labels[j];
                if (!id) continue;
                float* out = enc.dists.data() + j * static_cast<std::size_t>(nr);
                for (int k = 0; k < nr; ++k) out[k] = static_cast<float>(exit_distance(labels, {x, y, z}, vox_dir[static_cast<std::size_t>(k)]));
            }
    return enc;
}

bool is_star_convex(const LabelVolume& labels, Label id, Vec3 center) {
    bool found = false;
    for (Label l : labels.data()) {
        if (l == id) {
            found = true;
            break;
        }
    }
    if (id == 0 || !found) throw std::invalid_argument("is_star_convex: instance not present");
    if (label_near(labels, center.x, center.y, center.z) != id) return false;
    for (int z = 0; z < labels.nz(); ++z)
        for (int y = 0; y < labels.ny(); ++y)
            for (int x = 0; x < labels.nx(); ++x) {
                if (labels(x, y, z) != id) continue;
                const Vec3 delta = Vec3{double(x), double(y), double(z)} - center;
                const int n = std::max(1, static_cast<int>(std::ceil(delta.norm() / 0.25)));
                for (int s = 1; s < n; ++s) {
                    const Vec3 p = center + (double(s) / n) * delta;
                    if (label_near(labels, p.x, p.y, p.z) != id) return false;
                }
            }
    return true;
}

// ---------------------------------------------------------------------------

RayInterpolator::RayInterpolator(const RaySet& rays, int reach)
    : rays_(rays), reach_(std::clamp(reach, 0, 64)), side_(2 * reach_ + 1) {
    if (rays_.size() < 3) throw std::invalid_argument("RayInterpolator: need at least 3 rays");
    table_.resize(static_cast<std::size_t>(side_) * side_ * side_);
    for (int dz = -reach_; dz <= reach_; ++dz)
        for (int dy = -reach_; dy <= reach_; ++dy)
            for (int dx = -reach_; dx <= reach_; ++dx) {
                const std::size_t i = static_cast<std::size_t>((dx + reach_) + side_ * ((dy + reach_) + side_ * (dz + reach_)));
                table_[i] = compute({double(dx), double(dy), double(dz)});
            }
}

RayInterpolator::Entry RayInterpolator::compute(Vec3 dir) const {
    const double n = dir.norm();
    if (n == 0.0) return Entry{{0, 0, 0}, {1.0f, 0.0f, 0.0f}};
    const Vec3 u = (1.0 / n) * dir;
    std::array<int, 3> best{-1, -1, -1};
    std::array<double, 3> dot{-2.0, -2.0, -2.0};
    for (int k = 0; k < rays_.size(); ++k) {
        const double c = u.dot(rays_.dirs[static_cast<std::size_t>(k)]);
        if (c <= dot[2]) continue;
        int pos = 2;
        while (pos > 0 && c > dot[static_cast<std::size_t>(pos - 1)]) {
            dot[static_cast<std::size_t>(pos)] = dot[static_cast<std::size_t>(pos - 1)];
            best[static_cast<std::size_t>(pos)] = best[static_cast<std::size_t>(pos - 1)];
            --pos;
        }
        dot[static_cast<std::size_t>(pos)] = c;
        best[static_cast<std::size_t>(pos)] = k;
    }
    Entry e{};
    std::array<double, 3> dist{};
    for (int i = 0; i < 3; ++i) {
        e.ray[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(best[static_cast<std::size_t>(i)]);
        dist[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, 2.0 - 2.0 * dot[static_cast<std::size_t>(i)]));
    }
    if (dist[0] < 1e-9) {
        e.weight = {1.0f, 0.0f, 0.0f};
        return e;
    }
    double total = 0.0;
    for (double dd : dist) total += 1.0 / dd;
    for (int i = 0; i < 3; ++i) e.weight[static_cast<std::size_t>(i)] = static_cast<float>(1.0 / dist[static_cast<std::size_t>(i)] / total);
    return e;
}

RayInterpolator::Entry RayInterpolator::lookup(int dx, int dy, int dz) const {
    if (std::abs(dx) > reach_ || std::abs(dy) > reach_ || std::abs(dz) > reach_) {
        return compute({double(dx), double(dy), double(dz)});
    }
    return table_[static_cast<std::size_t>((dx + reach_) + side_ * ((dy + reach_) + side_ * (dz + reach_)))];
}

double RayInterpolator::radius(const float* dists, int dx, int dy, int dz) const {
    const Entry e = lookup(dx, dy, dz);
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r += double(e.weight[static_cast<std::size_t>(i)]) * dists[e.ray[static_cast<std::size_t>(i)]];
    return r;
}

bool LocalMask::at(int x, int y, int z) const {
    const int lx = x - lo[0], ly = y - lo[1], lz = z - lo[2];
    if (lx < 0 || ly < 0 || lz < 0 || lx >= size[0] || ly >= size[1] || lz >= size[2]) return false;
    return inside[static_cast<std::size_t>(lx + size[0] * (ly + size[1] * lz))] != 0;
}

namespace {

int reach_of(const StarCandidate& c) {
    float m = 0.0f;
    for (float v : c.dists) {
        if (!(v >= 0.0f) || !std::isfinite(v)) throw std::invalid_argument("star candidate: radii must be finite and >= 0");
        m = std::max(m, v);
    }
    return static_cast<int>(std::ceil(m));
}

}  // namespace

LocalMask rasterize_local(const StarCandidate& c, const RayInterpolator& interp) {
    if (static_cast<int>(c.dists.size()) != interp.rays().size()) {
        throw std::invalid_argument("rasterize: candidate ray count differs from the ray set");
    }
    const int R = reach_of(c);
    LocalMask m;
    for (int a = 0; a < 3; ++a) {
        m.lo[a] = c.center[a] - R;
        m.size[a] = 2 * R + 1;
    }
    m.inside.assign(static_cast<std::size_t>(m.size[0]) * m.size[1] * m.size[2], 0);
    std::size_t i = 0;
    for (int dz = -R; dz <= R; ++dz)
        for (int dy = -R; dy <= R; ++dy)
            for (int dx = -R; dx <= R; ++dx, ++i) {
                const double d2 = double(dx) * dx + double(dy) * dy + double(dz) * dz;
                if (d2 == 0.0) {
                    m.inside[i] = 1;
                    ++m.count;
                    continue;
                }
                const double r = interp.radius(c.dists.data(), dx, dy, dz);
                if (d2 <= r * r) {
                    m.inside[i] = 1;
                    ++m.count;
                }
            }
    return m;
}

double mask_iou(const LocalMask& a, const LocalMask& b) {
    int lo[3], hi[3];
    for (int k = 0; k < 3; ++k) {
        lo[k] = std::max(a.lo[k], b.lo[k]);
        hi[k] = std::min(a.lo[k] + a.size[k], b.lo[k] + b.size[k]);
        if (lo[k] >= hi[k]) return 0.0;
    }
    std::size_t inter = 0;
    for (int z = lo[2]; z < hi[2]; ++z)
        for (int y = lo[1]; y < hi[1]; ++y) {
            const std::uint8_t* ra = &a.inside[static_cast<std::size_t>((lo[0] - a.lo[0]) + a.size[0] * ((y - a.lo[1]) + a.size[1] * (z - a.lo[2])))];
            const std::uint8_t* rb = &b.inside[static_cast<std::size_t>((lo[0] - b.lo[0]) + b.size[0] * ((y - b.lo[1]) + b.size[1] * (z - b.lo[2])))];
            for (int x = 0; x < hi[0] - lo[0]; ++x) inter += ra[x] & rb[x];
        }
    const std::size_t uni = a.count + b.count - inter;
    return uni ? double(inter) / double(uni) : 0.0;
}

Mask rasterize(const StarCandidate& c, const RaySet& rays, Dims dims) {
    const RayInterpolator interp(rays, reach_of(c));
    const LocalMask m = rasterize_local(c, interp);
    Mask out(dims, 0);
    for (int z = 0; z < m.size[2]; ++z)
        for (int y = 0; y < m.size[1]; ++y)
            for (int x = 0; x < m.size[0]; ++x) {
                const int gx = x + m.lo[0], gy = y + m.lo[1], gz = z + m.lo[2];
                if (out.contains(gx, gy, gz) && m.inside[static_cast<std::size_t>(x + m.size[0] * (y + m.size[1] * z))]) {
                    out(gx, gy, gz) = 1;
                }
            }
    return out;
}

double poly_iou(const StarCandidate& a, const StarCandidate& b, const RayInterpolator& interp) {
    const int ra = reach_of(a), rb = reach_of(b);
    for (int k = 0; k < 3; ++k) {
        if (std::abs(a.center[k] - b.center[k]) > ra + rb) return 0.0;
    }
    return mask_iou(rasterize_local(a, interp), rasterize_local(b, interp));
}

double poly_iou(const StarCandidate& a, const StarCandidate& b, const RaySet& rays) {
    const int ra = reach_of(a), rb = reach_of(b);
    for (int k = 0; k < 3; ++k) {
        if (std::abs(a.center[k] - b.center[k]) > ra + rb) return 0.0;
    }
    return poly_iou(a, b, RayInterpolator(rays, std::max(ra, rb)));
}

StarCandidate candidate_at(const StarEncoding& enc, std::array<int, 3> voxel) {
    const Image& p = enc.prob;
    if (!p.contains(voxel[0], voxel[1], voxel[2])) throw std::invalid_argument("candidate_at: voxel outside the volume");
    const std::size_t j = p.index(voxel[0], voxel[1], voxel[2]);
    StarCandidate c;
    c.center = voxel;
    c.dists.assign(enc.at(j), enc.at(j) + enc.n_rays);
    c.score = p[j];
    return c;
}

Decoded decode_nms(const StarEncoding& enc, const RaySet& rays, double prob_thresh, double nms_thresh, int grid_step) {
    if (!(prob_thresh >= 0.0 && prob_thresh <= 1.0)) throw std::invalid_argument("decode_nms: prob_thresh must lie in [0, 1]");
    if (!(nms_thresh >= 0.0 && nms_thresh <= 1.0)) throw std::invalid_argument("decode_nms: nms_thresh must lie in [0, 1]");
    if (grid_step < 1) throw std::invalid_argument("decode_nms: grid_step must be >= 1");
    if (enc.n_rays != rays.size()) throw std::invalid_argument("decode_nms: ray count differs from the encoding");
    const Dims& d = enc.dims;

    std::vector<StarCandidate> cand;
    int reach = 0;
    for (int z = 0; z < d[2]; z += grid_step)
        for (int y = 0; y < d[1]; y += grid_step)
            for (int x = 0; x < d[0]; x += grid_step) {
                const float s = enc.prob(x, y, z);
                if (s > 0.0f && s >= prob_thresh) {
                    cand.push_back(candidate_at(enc, {x, y, z}));
                    reach = std::max(reach, reach_of(cand.back()));
                }
            }
    std::sort(cand.begin(), cand.end(), [](const StarCandidate& a, const StarCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.center < b.center;
    });

    Decoded out;
    out.n_candidates = cand.size();
    const RayInterpolator interp(rays, reach);
    std::vector<LocalMask> masks;
    std::vector<StarCandidate> kept;
    for (auto& c : cand) {
        LocalMask m = rasterize_local(c, interp);
        bool keep = true;
        if (nms_thresh < 1.0) {
            for (const auto& k : masks) {
                if (mask_iou(m, k) >= nms_thresh) {
                    keep = false;
                    break;
                }
            }
        }
        if (!keep) continue;
        masks.push_back(std::move(m));
        kept.push_back(std::move(c));
    }

    out.labels = LabelVolume(d, 0, enc.prob.spacing());
    Label next = 1;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const LocalMask& m = masks[i];
        std::size_t painted = 0;
        for (int z = 0; z < m.size[2]; ++z)
            for (int y = 0; y < m.size[1]; ++y)
                for (int x = 0; x < m.size[0]; ++x) {
                    const int gx = x + m.lo[0], gy = y + m.lo[1], gz = z + m.lo[2];
                    if (!out.labels.contains(gx, gy, gz)) continue;
                    if (!m.inside[static_cast<std::size_t>(x + m.size[0] * (y + m.size[1] * z))]) continue;
                    Label& dst = out.labels(gx, gy, gz);
                    if (dst == 0) {
                        dst = next;
                        ++painted;
                    }
                }
        if (painted) {
            out.kept.push_back(std::move(kept[i]));
            ++next;
        }
    }
    return out;
}

}  // namespace anystar
