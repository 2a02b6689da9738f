// Row-wise DFTs over CMat blocks, backed by FFTW. Two scalings are exposed:
// the unitary pair (1/sqrt(N) both ways) used for signal blocks, and the raw
// unscaled forward sum used for channel frequency responses (a plain tap sum
// without normalization). Plans are cached per length; not thread-safe.
#pragma once

#include "core/matrix.hpp"

namespace cqmimo {

// Unitary transform of each row: X[v] = (1/sqrt(N)) * sum_n x[n] e^{-j2pi vn/N}.
CMat to_frequency(const CMat& block);

// Inverse of to_frequency; applying both recovers the input to float precision.
CMat from_frequency(const CMat& block);

// In-place unscaled forward DFT of one length-n row: X[v] = sum_n x[n] e^{-j2pi vn/N}.
void dft_row_unscaled(cplx* data, int n);

}  // namespace cqmimo
