#include "core/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

namespace cqmimo {

namespace {

// One cached FFTW plan per (length, direction), each with its own aligned
// buffer; callers copy through the buffer. Plans live for the process.
struct PlanEntry {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
};

PlanEntry& plan_for(int n, int sign) {
  static std::map<std::pair<int, int>, PlanEntry> cache;
  auto& entry = cache[{n, sign}];
  if (entry.plan == nullptr) {
    entry.buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    entry.plan = fftw_plan_dft_1d(n, entry.buf, entry.buf, sign, FFTW_ESTIMATE);
    if (entry.plan == nullptr) throw std::runtime_error("fft: plan creation failed");
  }
  return entry;
}

void run_rows(const CMat& in, CMat& out, int sign, double scale) {
  const int n = in.cols();
  PlanEntry& entry = plan_for(n, sign);
  for (int r = 0; r < in.rows(); ++r) {
    std::memcpy(entry.buf, in.row(r), sizeof(cplx) * static_cast<std::size_t>(n));
    fftw_execute(entry.plan);
    cplx* dst = out.row(r);
    const cplx* src = reinterpret_cast<const cplx*>(entry.buf);
    for (int c = 0; c < n; ++c) dst[c] = scale * src[c];
  }
}

}  // namespace

CMat to_frequency(const CMat& block) {
  if (block.cols() < 1) throw std::invalid_argument("to_frequency: empty block");
  CMat out(block.rows(), block.cols());
  run_rows(block, out, FFTW_FORWARD, 1.0 / std::sqrt(static_cast<double>(block.cols())));
  return out;
}

CMat from_frequency(const CMat& block) {
  if (block.cols() < 1) throw std::invalid_argument("from_frequency: empty block");
  CMat out(block.rows(), block.cols());
  run_rows(block, out, FFTW_BACKWARD, 1.0 / std::sqrt(static_cast<double>(block.cols())));
  return out;
}

void dft_row_unscaled(cplx* data, int n) {
  PlanEntry& entry = plan_for(n, FFTW_FORWARD);
  std::memcpy(entry.buf, data, sizeof(cplx) * static_cast<std::size_t>(n));
  fftw_execute(entry.plan);
  std::memcpy(static_cast<void*>(data), entry.buf, sizeof(cplx) * static_cast<std::size_t>(n));
}

}  // namespace cqmimo
