#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "anystar/edt.hpp"
#include "anystar/volume.hpp"

namespace anystar {

struct RaySet {
    std::vector<Vec3> dirs;
    int size() const { return static_cast<int>(dirs.size()); }
};

/// Spherical Fibonacci lattice: z_i = 1 - (2i + 1) / n, azimuth stepping by
/// the golden angle.
RaySet make_rays(int n = 96);

struct StarEncoding {
    Dims dims{1, 1, 1};
    int n_rays = 0;
    /// Voxel-major: dists[j * n_rays + k] is ray k at voxel j.
    std::vector<float> dists;
    Image prob;

    const float* at(std::size_t voxel) const { return dists.data() + voxel * static_cast<std::size_t>(n_rays); }
};

/// Ray distance: length from the voxel center to the first point whose
/// nearest voxel carries a different label (outside the grid counts as
/// background), found by exact traversal of the voxel faces the ray crosses.
/// prob is the per-instance distance transform divided by its maximum.
StarEncoding encode(const LabelVolume& labels, const RaySet& rays, Spacing spacing = {1.0, 1.0, 1.0});

/// True when every voxel of the instance is joined to `center` by a segment,
/// sampled every 0.25 voxel, whose nearest voxels all belong to the instance.
bool is_star_convex(const LabelVolume& labels, Label id, Vec3 center);

struct StarCandidate {
    std::array<int, 3> center{0, 0, 0};
    std::vector<float> dists;
    double score = 0.0;
};

/// Radius in an arbitrary direction: inverse-distance-weighted mean over the
/// three rays closest to it. Integer offsets within `reach` are tabulated.
class RayInterpolator {
public:
    struct Entry {
        std::array<std::uint16_t, 3> ray;
        std::array<float, 3> weight;
    };

    RayInterpolator(const RaySet& rays, int reach);
    Entry lookup(int dx, int dy, int dz) const;
    double radius(const float* dists, int dx, int dy, int dz) const;
    int reach() const { return reach_; }
    const RaySet& rays() const { return rays_; }

private:
    Entry compute(Vec3 dir) const;

    RaySet rays_;
    int reach_;
    int side_;
    std::vector<Entry> table_;
};

/// Candidate voxels on a box around the center, unclipped.
struct LocalMask {
    std::array<int, 3> lo{0, 0, 0};
    Dims size{1, 1, 1};
    std::vector<std::uint8_t> inside;
    std::size_t count = 0;

    bool at(int x, int y, int z) const;
};

LocalMask rasterize_local(const StarCandidate& c, const RayInterpolator& interp);
double mask_iou(const LocalMask& a, const LocalMask& b);

/// Voxel x is inside iff |x - center| <= interpolated radius; the center is
/// always inside. Voxels outside `dims` are dropped.
Mask rasterize(const StarCandidate& c, const RaySet& rays, Dims dims);

/// Exact IoU of the two rasterized polyhedra; 0 when their boxes are disjoint.
double poly_iou(const StarCandidate& a, const StarCandidate& b, const RaySet& rays);
double poly_iou(const StarCandidate& a, const StarCandidate& b, const RayInterpolator& interp);

StarCandidate candidate_at(const StarEncoding& enc, std::array<int, 3> voxel);

struct Decoded {
    std::size_t n_candidates = 0;  // lattice points passing the threshold
    std::vector<StarCandidate> kept;
    LabelVolume labels;
};

/// Lattice voxels (stride grid_step) with prob >= prob_thresh and prob > 0
/// become candidates, ordered by score then center. Greedy suppression keeps
/// a candidate iff its IoU with every kept one is < nms_thresh; a threshold
/// of 1 or more keeps everything. Kept polyhedra are painted in order with
/// earlier ones winning; candidates left without voxels are dropped.
Decoded decode_nms(const StarEncoding& enc, const RaySet& rays, double prob_thresh, double nms_thresh,
                   int grid_step = 1);

}  // namespace anystar
