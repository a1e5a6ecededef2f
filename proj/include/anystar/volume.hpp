#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace anystar {

using Dims = std::array<int, 3>;
using Spacing = std::array<double, 3>;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

/// Dense 3D grid. Memory layout is x-fastest: index = x + nx * (y + ny * z),
/// which is also the on-disk order of the NIfTI writer. Voxel centers sit at
/// integer coordinates, so the physical extent along an axis of n voxels is
/// [-0.5, n - 0.5].
template <typename T>
class Volume3 {
public:
    using value_type = T;

    Volume3() : Volume3(Dims{1, 1, 1}) {}

    explicit Volume3(Dims dims, T fill = T{}, Spacing spacing = {1.0, 1.0, 1.0})
        : dims_(dims), spacing_(spacing) {
        for (int n : dims_) {
            if (n < 1) throw std::invalid_argument("Volume3: every dimension must be >= 1");
        }
        data_.assign(voxel_count(dims_), fill);
    }

    Volume3(Dims dims, std::vector<T> data, Spacing spacing = {1.0, 1.0, 1.0})
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        for (int n : dims_) {
            if (n < 1) throw std::invalid_argument("Volume3: every dimension must be >= 1");
        }
        if (data_.size() != voxel_count(dims_)) {
            throw std::invalid_argument("Volume3: data length does not match dims");
        }
    }

    static std::size_t voxel_count(Dims d) {
        return static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) *
               static_cast<std::size_t>(d[2]);
    }

    const Dims& dims() const { return dims_; }
    int nx() const { return dims_[0]; }
    int ny() const { return dims_[1]; }
    int nz() const { return dims_[2]; }
    std::size_t size() const { return data_.size(); }

    const Spacing& spacing() const { return spacing_; }
    void set_spacing(Spacing s) { spacing_ = s; }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(z));
    }

    bool contains(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims_[0] && y < dims_[1] && z < dims_[2];
    }

    T& operator()(int x, int y, int z) { return data_[index(x, y, z)]; }
    const T& operator()(int x, int y, int z) const { return data_[index(x, y, z)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Volume3& o) const {
        return dims_ == o.dims_ && spacing_ == o.spacing_ && data_ == o.data_;
    }

private:
    Dims dims_;
    Spacing spacing_;
    std::vector<T> data_;
};

using Label = std::int32_t;
using Image = Volume3<float>;
/// Instance map: 0 is background, 1..n are instances.
using LabelVolume = Volume3<Label>;

enum class PadMode { Zero, Reflect };

const char* to_string(PadMode mode);
PadMode pad_mode_from_string(const std::string& s);

/// Mirror an integer index into [0, n) about the volume faces at -0.5 and
/// n - 0.5 (edge voxels repeat: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...).
inline int reflect_index(int i, int n) {
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

/// Which mirrored copy of the volume an out-of-range index falls in along
/// one axis; 0 is the original extent.
inline int reflect_tile(int i, int n) {
    return i >= 0 ? i / n : -((-i - 1) / n) - 1;
}

/// Nearest voxel index with ties toward the lower index.
inline int nearest_index(double p) { return static_cast<int>(std::ceil(p - 0.5)); }

double trilinear_sample(const Image& vol, Vec3 p, PadMode pad);
Label nearest_sample(const LabelVolume& vol, Vec3 p, PadMode pad);

Image resample_to_grid(const Image& vol, Dims target);
LabelVolume resample_to_grid(const LabelVolume& vol, Dims target);

/// Number of distinct nonzero labels present.
int count_instances(const LabelVolume& labels);
/// Maximum label value (0 for an empty map).
Label max_label(const LabelVolume& labels);
/// Renumber nonzero labels to 1..n preserving ascending id order; absent ids
/// are dropped.
LabelVolume relabel_consecutive(const LabelVolume& labels);
/// True when labels are exactly {0} or {0..n} with every id 1..n present.
bool has_consecutive_ids(const LabelVolume& labels);

/// Assigns fresh ids to label fragments that come from mirrored copies of a
/// volume so every copy of an instance is its own instance. Ids from the
/// original extent (tile 0,0,0) are kept; each (tile, label) pair elsewhere
/// gets a new id above the source maximum, in order of first request.
class MirrorRelabeler {
public:
    explicit MirrorRelabeler(Label source_max) : next_(source_max + 1) {}

    Label operator()(Label label, int tx, int ty, int tz);

private:
    Label next_;
    std::map<std::array<int, 4>, Label> seen_;
    std::array<int, 4> last_key_{0, 0, 0, 0};
    Label last_id_ = 0;
};

/// Nearest-neighbor lookup with reflection padding where mirrored copies are
/// relabeled through `relabel`.
Label nearest_sample_mirrored(const LabelVolume& vol, Vec3 p, MirrorRelabeler& relabel);

template <typename T>
Volume3<T> crop(const Volume3<T>& vol, Dims offset, Dims size) {
    for (int a = 0; a < 3; ++a) {
        if (offset[a] < 0 || size[a] < 1 || offset[a] + size[a] > vol.dims()[a]) {
            throw std::invalid_argument("crop: window exceeds source volume");
        }
    }
    Volume3<T> out(size, T{}, vol.spacing());
    for (int z = 0; z < size[2]; ++z) {
        for (int y = 0; y < size[1]; ++y) {
            for (int x = 0; x < size[0]; ++x) {
                out(x, y, z) = vol(x + offset[0], y + offset[1], z + offset[2]);
            }
        }
    }
    return out;
}

}  // namespace anystar
