#pragma once

#include <complex>

#include "anystar/volume.hpp"

namespace anystar {

using Complex = std::complex<double>;
using ComplexVolume = Volume3<Complex>;

/// Unnormalized forward 3D DFT: X[k] = sum_x v[x] exp(-2 pi i k.x / n).
ComplexVolume dft3(const ComplexVolume& vol);
ComplexVolume dft3(const Image& vol);
/// Inverse 3D DFT including the 1/N factor, so idft3(dft3(v)) == v.
ComplexVolume idft3(const ComplexVolume& spectrum);

/// Real part of a complex volume as float.
Image real_part(const ComplexVolume& vol);

/// Signed frequency index of bin k on an axis of n bins: k for k <= n/2,
/// k - n above.
inline int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace anystar
