#include "mw/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "mw/errors.hpp"

namespace mw {

namespace {

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t total = 1;
    for (int n : shape) {
        if (n < 1) throw ShapeMismatchError("fft shape entries must be >= 1");
        total *= static_cast<std::size_t>(n);
    }
    return total;
}

// FFTW planning is not thread-safe; execution of a plan on its own arrays is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void run(const std::vector<int>& shape, CVector& data, int sign) {
    if (static_cast<std::size_t>(data.size()) != shape_size(shape))
        throw ShapeMismatchError("fft data size does not match the shape");
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), ptr, ptr, sign,
                             FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace

void fft_forward(const std::vector<int>& shape, CVector& data) {
    run(shape, data, FFTW_FORWARD);
}

void fft_inverse(const std::vector<int>& shape, CVector& data) {
    run(shape, data, FFTW_BACKWARD);
    data /= static_cast<double>(data.size());
}

}  // namespace mw
