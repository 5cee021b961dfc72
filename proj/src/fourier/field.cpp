#include "cxeuler/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace cxeuler::fourier {

double Wavevector::length() const {
  return std::sqrt(static_cast<double>(x) * x + static_cast<double>(y) * y);
}

double Wavevector::bracket() const {
  return std::sqrt(1.0 + static_cast<double>(x) * x + static_cast<double>(y) * y);
}

FourierField::FourierField(int dim, int cutoff, int components)
    : dim_(dim), cutoff_(cutoff), components_(components) {
  if (dim != 1 && dim != 2) throw FieldError("FourierField: dim must be 1 or 2");
  if (cutoff < 0) throw FieldError("FourierField: cutoff must be non-negative");
  if (components < 1) throw FieldError("FourierField: need at least one component");
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  mode_count_ = dim == 1 ? side : side * side;
  data_.assign(mode_count_ * static_cast<std::size_t>(components), Complex{});
}

FourierField FourierField::zeros_like(const FourierField& other) {
  return FourierField(other.dim_, other.cutoff_, other.components_);
}

bool FourierField::contains(Wavevector k) const {
  if (std::abs(k.x) > cutoff_) return false;
  if (dim_ == 1) return k.y == 0;
  return std::abs(k.y) <= cutoff_;
}

std::size_t FourierField::index(Wavevector k) const {
  const auto ix = static_cast<std::size_t>(k.x + cutoff_);
  if (dim_ == 1) return ix;
  return static_cast<std::size_t>(k.y + cutoff_) * static_cast<std::size_t>(side()) + ix;
}

Wavevector FourierField::wavevector(std::size_t mode_index) const {
  const auto s = static_cast<std::size_t>(side());
  if (dim_ == 1) return {static_cast<int>(mode_index) - cutoff_, 0};
  return {static_cast<int>(mode_index % s) - cutoff_, static_cast<int>(mode_index / s) - cutoff_};
}

Complex& FourierField::at(Wavevector k, int component) {
  if (!contains(k)) throw FieldError("FourierField::at: wavevector outside cutoff");
  return data_[index(k) * static_cast<std::size_t>(components_) + static_cast<std::size_t>(component)];
}

const Complex& FourierField::at(Wavevector k, int component) const {
  if (!contains(k)) throw FieldError("FourierField::at: wavevector outside cutoff");
  return data_[index(k) * static_cast<std::size_t>(components_) + static_cast<std::size_t>(component)];
}

Complex FourierField::get(Wavevector k, int component) const {
  if (!contains(k)) return {};
  return data_[index(k) * static_cast<std::size_t>(components_) + static_cast<std::size_t>(component)];
}

std::span<Complex> FourierField::coeffs(Wavevector k) {
  if (!contains(k)) throw FieldError("FourierField::coeffs: wavevector outside cutoff");
  return mode(index(k));
}

std::span<const Complex> FourierField::coeffs(Wavevector k) const {
  if (!contains(k)) throw FieldError("FourierField::coeffs: wavevector outside cutoff");
  return mode(index(k));
}

std::span<Complex> FourierField::mode(std::size_t mode_index) {
  const auto m = static_cast<std::size_t>(components_);
  return std::span<Complex>(data_).subspan(mode_index * m, m);
}

std::span<const Complex> FourierField::mode(std::size_t mode_index) const {
  const auto m = static_cast<std::size_t>(components_);
  return std::span<const Complex>(data_).subspan(mode_index * m, m);
}

double FourierField::magnitude(std::size_t mode_index) const {
  double sum = 0.0;
  for (const auto& c : mode(mode_index)) sum += std::norm(c);
  return std::sqrt(sum);
}

double FourierField::magnitude(Wavevector k) const {
  return contains(k) ? magnitude(index(k)) : 0.0;
}

FourierField FourierField::component(int c) const {
  if (c < 0 || c >= components_) throw FieldError("FourierField::component: bad index");
  FourierField out(dim_, cutoff_, 1);
  for (std::size_t i = 0; i < mode_count_; ++i) out.data_[i] = mode(i)[static_cast<std::size_t>(c)];
  return out;
}

void FourierField::set_component(int c, const FourierField& scalar) {
  if (c < 0 || c >= components_) throw FieldError("FourierField::set_component: bad index");
  if (scalar.components_ != 1 || scalar.dim_ != dim_ || scalar.cutoff_ != cutoff_)
    throw FieldError("FourierField::set_component: shape mismatch");
  for (std::size_t i = 0; i < mode_count_; ++i) mode(i)[static_cast<std::size_t>(c)] = scalar.data_[i];
}

FourierField FourierField::resized(int cutoff) const {
  FourierField out(dim_, cutoff, components_);
  for (std::size_t i = 0; i < mode_count_; ++i) {
    const Wavevector k = wavevector(i);
    if (!out.contains(k)) continue;
    auto dst = out.mode(out.index(k));
    auto src = mode(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

bool FourierField::is_real_valued(double tol) const {
  for (std::size_t i = 0; i < mode_count_; ++i) {
    const Wavevector k = wavevector(i);
    auto a = mode(i);
    auto b = mode(index(-k));
    for (std::size_t c = 0; c < a.size(); ++c)
      if (std::abs(a[c] - std::conj(b[c])) > tol) return false;
  }
  return true;
}

std::size_t FourierField::nonzero_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < mode_count_; ++i)
    if (magnitude(i) != 0.0) ++n;
  return n;
}

bool FourierField::same_shape(const FourierField& o) const {
  return dim_ == o.dim_ && cutoff_ == o.cutoff_ && components_ == o.components_;
}

void FourierField::check_shape(const FourierField& o, const char* what) const {
  if (!same_shape(o)) throw FieldError(std::string("FourierField::") + what + ": shape mismatch");
}

FourierField& FourierField::operator+=(const FourierField& o) {
  check_shape(o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  check_shape(o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

FourierField& FourierField::operator*=(Complex a) {
  for (auto& c : data_) c *= a;
  return *this;
}

}  // namespace cxeuler::fourier
