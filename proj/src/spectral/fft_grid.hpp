#pragma once

#include "cxeuler/fourier.hpp"

#include <fftw3.h>

#include <complex>
#include <cstddef>

namespace cxeuler::spectral::detail {

using fourier::Complex;

/// fftw_malloc'd array of N*N complex values.
class GridBuffer {
 public:
  explicit GridBuffer(std::size_t count);
  ~GridBuffer();
  GridBuffer(const GridBuffer&) = delete;
  GridBuffer& operator=(const GridBuffer&) = delete;

  Complex* data() { return data_; }
  const Complex* data() const { return data_; }
  fftw_complex* raw() { return reinterpret_cast<fftw_complex*>(data_); }
  std::size_t size() const { return count_; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  void clear();

 private:
  Complex* data_ = nullptr;
  std::size_t count_ = 0;
};

/// In-place 2-D complex transforms on an N x N grid, row index y.
/// to_physical: f(x) = sum_k f(k) e^{ik.x}; to_spectral includes the 1/N^2.
class FftGrid {
 public:
  explicit FftGrid(int n);
  ~FftGrid();
  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  int n() const { return n_; }
  std::size_t points() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }
  std::size_t slot(int kx, int ky) const;

  void to_physical(GridBuffer& b) const;
  void to_spectral(GridBuffer& b) const;

  /// Scatter a scalar field (component c) onto the spectral grid, scaled by mult(k).
  template <class Mult>
  void scatter(const fourier::FourierField& f, int c, GridBuffer& b, Mult mult) const {
    b.clear();
    for (std::size_t i = 0; i < f.mode_count(); ++i) {
      const Complex v = f.mode(i)[static_cast<std::size_t>(c)];
      if (v == Complex{}) continue;
      const auto k = f.wavevector(i);
      b[slot(k.x, k.y)] = mult(k) * v;
    }
  }

 private:
  int n_;
  GridBuffer scratch_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace cxeuler::spectral::detail
