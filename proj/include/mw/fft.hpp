#pragma once

#include <vector>

#include "mw/hermitian.hpp"

namespace mw {

/// Complex DFT over an n-dimensional periodic grid, row-major with the last
/// axis fastest. Forward is unnormalized; inverse divides by the size.
void fft_forward(const std::vector<int>& shape, CVector& data);
void fft_inverse(const std::vector<int>& shape, CVector& data);

}  // namespace mw
