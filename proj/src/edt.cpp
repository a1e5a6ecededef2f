#include "anystar/edt.hpp"

#include <algorithm>
#include <limits>

namespace anystar {

namespace {

// Squared distance along one line to the nearest zero, where virtual zeros
// sit one step beyond each end.
void first_pass(const std::uint8_t* fg, std::size_t stride, int n, double step, double* out,
                std::size_t out_stride) {
    int last_zero = -1;
    std::vector<int> left(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (!fg[static_cast<std::size_t>(i) * stride]) last_zero = i;
        left[static_cast<std::size_t>(i)] = i - last_zero;
    }
    int next_zero = n;
    for (int i = n - 1; i >= 0; --i) {
        if (!fg[static_cast<std::size_t>(i) * stride]) next_zero = i;
        const int d = std::min(left[static_cast<std::size_t>(i)], next_zero - i);
        const double dist = static_cast<double>(d) * step;
        out[static_cast<std::size_t>(i) * out_stride] = dist * dist;
    }
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along a line of
// n samples plus virtual zero-valued samples at positions -1 and n.
struct EnvelopeScratch {
    std::vector<double> f, pos, z, out;
    std::vector<int> v;
};

void envelope_pass(double* line, std::size_t stride, int n, double step, EnvelopeScratch& s) {
    const int m = n + 2;
    s.f.assign(static_cast<std::size_t>(m), 0.0);
    s.pos.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) s.pos[static_cast<std::size_t>(i)] = static_cast<double>(i - 1) * step;
    for (int i = 0; i < n; ++i) s.f[static_cast<std::size_t>(i + 1)] = line[static_cast<std::size_t>(i) * stride];
    s.v.assign(static_cast<std::size_t>(m), 0);
    s.z.assign(static_cast<std::size_t>(m) + 1, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    s.v[0] = 0;
    s.z[0] = -inf;
    s.z[1] = inf;
    auto intersect = [&](int q, int p) {
        const double fq = s.f[static_cast<std::size_t>(q)] + s.pos[static_cast<std::size_t>(q)] * s.pos[static_cast<std::size_t>(q)];
        const double fp = s.f[static_cast<std::size_t>(p)] + s.pos[static_cast<std::size_t>(p)] * s.pos[static_cast<std::size_t>(p)];
        return (fq - fp) / (2.0 * (s.pos[static_cast<std::size_t>(q)] - s.pos[static_cast<std::size_t>(p)]));
    };
    for (int q = 1; q < m; ++q) {
        double sec = intersect(q, s.v[static_cast<std::size_t>(k)]);
        while (sec <= s.z[static_cast<std::size_t>(k)]) {
            --k;
            sec = intersect(q, s.v[static_cast<std::size_t>(k)]);
        }
        ++k;
        s.v[static_cast<std::size_t>(k)] = q;
        s.z[static_cast<std::size_t>(k)] = sec;
        s.z[static_cast<std::size_t>(k) + 1] = inf;
    }
    k = 0;
    for (int q = 1; q <= n; ++q) {
        const double x = s.pos[static_cast<std::size_t>(q)];
        while (s.z[static_cast<std::size_t>(k) + 1] < x) ++k;
        const int p = s.v[static_cast<std::size_t>(k)];
        const double d = x - s.pos[static_cast<std::size_t>(p)];
        line[static_cast<std::size_t>(q - 1) * stride] = d * d + s.f[static_cast<std::size_t>(p)];
    }
}

}  // namespace

Volume3<double> edt3(const Mask& mask, const Spacing& spacing) {
    const Dims& d = mask.dims();
    Volume3<double> dist(d, 0.0, spacing);
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(d[0]);
    const std::size_t sz = static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]);

    bool any = false;
    for (auto v : mask.data()) {
        if (v) {
            any = true;
            break;
        }
    }
    if (!any) return dist;

    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            const std::size_t base = mask.index(0, y, z);
            first_pass(mask.data().data() + base, sx, d[0], spacing[0], dist.data().data() + base, sx);
        }
    }
    EnvelopeScratch scratch;
    for (int z = 0; z < d[2]; ++z) {
        for (int x = 0; x < d[0]; ++x) {
            envelope_pass(dist.data().data() + mask.index(x, 0, z), sy, d[1], spacing[1], scratch);
        }
    }
    for (int y = 0; y < d[1]; ++y) {
        for (int x = 0; x < d[0]; ++x) {
            envelope_pass(dist.data().data() + mask.index(x, y, 0), sz, d[2], spacing[2], scratch);
        }
    }
    for (std::size_t i = 0; i < dist.size(); ++i) {
        dist[i] = mask[i] ? std::sqrt(dist[i]) : 0.0;
    }
    return dist;
}

}  // namespace anystar
