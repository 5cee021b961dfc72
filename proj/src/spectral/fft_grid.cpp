#include "fft_grid.hpp"

#include <algorithm>
#include <new>
#include <stdexcept>

namespace cxeuler::spectral::detail {

GridBuffer::GridBuffer(std::size_t count) : count_(count) {
  data_ = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * count));
  if (!data_) throw std::bad_alloc();
  clear();
}

GridBuffer::~GridBuffer() { fftw_free(data_); }

void GridBuffer::clear() { std::fill(data_, data_ + count_, Complex{}); }

FftGrid::FftGrid(int n) : n_(n), scratch_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
  if (n < 1) throw std::invalid_argument("FftGrid: size must be positive");
  forward_ = fftw_plan_dft_2d(n, n, scratch_.raw(), scratch_.raw(), FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_2d(n, n, scratch_.raw(), scratch_.raw(), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw std::runtime_error("FftGrid: planning failed");
}

FftGrid::~FftGrid() {
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
}

std::size_t FftGrid::slot(int kx, int ky) const {
  const int ix = ((kx % n_) + n_) % n_;
  const int iy = ((ky % n_) + n_) % n_;
  return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(ix);
}

void FftGrid::to_physical(GridBuffer& b) const { fftw_execute_dft(backward_, b.raw(), b.raw()); }

void FftGrid::to_spectral(GridBuffer& b) const {
  fftw_execute_dft(forward_, b.raw(), b.raw());
  const double scale = 1.0 / static_cast<double>(points());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] *= scale;
}

}  // namespace cxeuler::spectral::detail
