#include "anystar/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <new>

namespace anystar {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

ComplexVolume transform(const ComplexVolume& in, int sign) {
    // Planner output depends on buffer alignment, so always use fftw_malloc
    // buffers to keep results bit-identical from run to run.
    const std::size_t n = in.size();
    auto* src = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* dst = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!src || !dst) {
        fftw_free(src);
        fftw_free(dst);
        throw std::bad_alloc();
    }
    std::memcpy(src, in.data().data(), sizeof(fftw_complex) * n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        // FFTW is row-major with the last index fastest, so z,y,x.
        plan = fftw_plan_dft_3d(in.nz(), in.ny(), in.nx(), src, dst, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    ComplexVolume out(in.dims(), Complex{}, in.spacing());
    std::memcpy(static_cast<void*>(out.data().data()), dst, sizeof(fftw_complex) * n);
    fftw_free(src);
    fftw_free(dst);
    return out;
}

}  // namespace

ComplexVolume dft3(const ComplexVolume& vol) { return transform(vol, FFTW_FORWARD); }

ComplexVolume dft3(const Image& vol) {
    ComplexVolume c(vol.dims(), Complex{}, vol.spacing());
    for (std::size_t i = 0; i < vol.size(); ++i) c[i] = Complex(vol[i], 0.0);
    return dft3(c);
}

ComplexVolume idft3(const ComplexVolume& spectrum) {
    ComplexVolume out = transform(spectrum, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(out.size());
    for (auto& v : out.data()) v *= inv;
    return out;
}

Image real_part(const ComplexVolume& vol) {
    Image out(vol.dims(), 0.0f, vol.spacing());
    for (std::size_t i = 0; i < vol.size(); ++i) out[i] = static_cast<float>(vol[i].real());
    return out;
}

}  // namespace anystar
