#pragma once

// Fourier-space fields on the 1-D and 2-D torus, Wiener/Sobolev norms,
// Galerkin-truncated products and analyticity-radius estimation.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxeuler::fourier {

using Complex = std::complex<double>;

/// Integer wavevector. The y entry is ignored (and must be zero) for 1-D fields.
struct Wavevector {
  int x = 0;
  int y = 0;

  friend bool operator==(const Wavevector&, const Wavevector&) = default;
  Wavevector operator-() const { return {-x, -y}; }
  Wavevector operator+(const Wavevector& o) const { return {x + o.x, y + o.y}; }
  Wavevector operator-(const Wavevector& o) const { return {x - o.x, y - o.y}; }

  /// Euclidean length |k|.
  double length() const;
  /// Japanese bracket <k> = (1 + |k|^2)^{1/2}.
  double bracket() const;
};

class FieldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense Fourier field: every wavevector with |k_i| <= cutoff carries an
/// m-component complex coefficient. Wavevectors never written are zero.
class FourierField {
 public:
  FourierField() = default;
  FourierField(int dim, int cutoff, int components = 1);

  static FourierField zeros_like(const FourierField& other);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int components() const { return components_; }
  int side() const { return 2 * cutoff_ + 1; }
  std::size_t mode_count() const { return mode_count_; }
  bool empty() const { return mode_count_ == 0; }

  bool contains(Wavevector k) const;
  std::size_t index(Wavevector k) const;
  Wavevector wavevector(std::size_t mode_index) const;

  Complex& at(Wavevector k, int component = 0);
  const Complex& at(Wavevector k, int component = 0) const;
  /// Coefficient of k, or zero when k lies outside the cutoff.
  Complex get(Wavevector k, int component = 0) const;

  std::span<Complex> coeffs(Wavevector k);
  std::span<const Complex> coeffs(Wavevector k) const;
  std::span<Complex> mode(std::size_t mode_index);
  std::span<const Complex> mode(std::size_t mode_index) const;

  /// Euclidean norm of the coefficient vector at k.
  double magnitude(Wavevector k) const;
  double magnitude(std::size_t mode_index) const;

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  FourierField component(int c) const;
  void set_component(int c, const FourierField& scalar);

  /// Copy into a field with a different cutoff, zero-padding or truncating.
  FourierField resized(int cutoff) const;

  /// coeff(-k) == conj(coeff(k)) within tol for all k.
  bool is_real_valued(double tol = 0.0) const;
  std::size_t nonzero_count() const;

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(Complex a);

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(Complex s, FourierField a) { return a *= s; }
  friend FourierField operator*(FourierField a, Complex s) { return a *= s; }

  bool same_shape(const FourierField& o) const;

 private:
  void check_shape(const FourierField& o, const char* what) const;

  int dim_ = 1;
  int cutoff_ = 0;
  int components_ = 1;
  std::size_t mode_count_ = 0;
  std::vector<Complex> data_;
};

enum class NormKind { wiener, sobolev };

/// Weights of the A^{r,s} (wiener) or H^s (sobolev) norm.
struct NormSpec {
  double r = 0.0;
  double s = 0.0;
  NormKind kind = NormKind::wiener;

  void validate() const;
};

/// sum <k>^s e^{r|k|} |f(k)| (wiener) or (sum <k>^{2s} |f(k)|^2)^{1/2} (sobolev).
double norm(const FourierField& f, const NormSpec& spec);
double wiener_norm(const FourierField& f, double r = 0.0, double s = 0.0);
double sobolev_norm(const FourierField& f, double s);

/// Convolution of two scalar fields, truncated to the smaller cutoff.
FourierField product(const FourierField& f, const FourierField& g);

/// Untruncated convolution: the result cutoff is the sum of the input cutoffs.
FourierField product_full(const FourierField& f, const FourierField& g);

/// Multiplication of every coefficient by i k_axis.
FourierField derivative(const FourierField& f, int axis);

/// Coefficients below this magnitude are excluded from radius fits.
inline constexpr double kRadiusFitFloor = 1e-13;

/// Fit of log|f(k)| = c - alpha log<k> - r|k| over k != 0 modes above the
/// floor. Returns r clamped at zero, or nullopt when fewer than three distinct
/// |k| values survive the floor.
struct RadiusFit {
  double radius = 0.0;
  double algebraic_exponent = 0.0;
  double intercept = 0.0;
  std::size_t modes_used = 0;
};
std::optional<RadiusFit> fit_analyticity_radius(const FourierField& f,
                                                double floor = kRadiusFitFloor);
std::optional<double> estimate_analyticity_radius(const FourierField& f,
                                                  double floor = kRadiusFitFloor);

// Serialization: {dim, K, modes:[{k:[..], re:[..], im:[..]}]} with zero modes
// omitted, and a CSV of (k, |f(k)|) pairs.
std::string to_json(const FourierField& f);
FourierField from_json(const std::string& text);
void write_decay_csv(std::ostream& os, const FourierField& f);

}  // namespace cxeuler::fourier
