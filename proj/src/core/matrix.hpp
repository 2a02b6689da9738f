// Minimal dense complex matrix (row-major), sized for blocks of a few thousand
// entries. Deliberately not a linear-algebra library: the solvers this project
// needs (K x K Hermitian systems) live next to their callers.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cqmimo {

using cplx = std::complex<double>;

class CMat {
 public:
  CMat() = default;
  CMat(int rows, int cols)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  cplx& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  const cplx& operator()(int r, int c) const {
    return v_[static_cast<std::size_t>(r) * cols_ + c];
  }

  cplx* row(int r) { return v_.data() + static_cast<std::size_t>(r) * cols_; }
  const cplx* row(int r) const { return v_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<cplx>& data() { return v_; }
  const std::vector<cplx>& data() const { return v_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> v_;
};

}  // namespace cqmimo
