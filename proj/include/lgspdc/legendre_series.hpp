#pragma once

// Legendre expansion of a smooth u-profile on [-1, 1] and its Fourier
// transform through spherical Bessel functions:
//   int_{-1}^{1} P_n(u) exp(i Phi u) du = 2 i^n j_n(Phi).
// Cost per Phi is O(terms), independent of how oscillatory exp(i Phi u) is.

#include <complex>
#include <functional>
#include <vector>

namespace lgspdc {

/// j_0(x) .. j_{count-1}(x) into out. Forward recurrence below n = |x|,
/// normalized backward (Miller) recurrence above.
void spherical_bessel_sequence(int count, double x, double* out);

class LegendreSeries {
 public:
  LegendreSeries() = default;
  explicit LegendreSeries(std::vector<std::complex<double>> coeffs) : c_(std::move(coeffs)) {}

  /// Projection on `terms` Legendre polynomials with a terms-point Gauss rule.
  static LegendreSeries fit(const std::function<std::complex<double>(double)>& h, int terms);
  /// Doubles terms (from 32) until the trailing quarter of coefficients is
  /// below tol * max |c_n|. Throws ConvergenceError past max_terms.
  static LegendreSeries fit_adaptive(const std::function<std::complex<double>(double)>& h, double tol = 1e-13,
                                     int max_terms = 4096);

  int size() const { return static_cast<int>(c_.size()); }
  const std::vector<std::complex<double>>& coefficients() const { return c_; }
  std::complex<double> value(double u) const;
  /// int_{-1}^{1} h(u) exp(i Phi u) du.
  std::complex<double> transform(double Phi) const;
  /// Same with caller-provided scratch of size() doubles.
  std::complex<double> transform(double Phi, double* bessel_scratch) const;

 private:
  std::vector<std::complex<double>> c_;
};

/// sum_n c_n 2 i^n j_n for precomputed j_n.
std::complex<double> legendre_transform_sum(const std::complex<double>* c, const double* bessel, int count);

}  // namespace lgspdc
