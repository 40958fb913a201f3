#pragma once

// Laguerre-Gaussian special functions and the closed-form coefficients of the
// coincidence-amplitude sums.
//
// Conventions: l is the common azimuthal magnitude (l_s = l, l_i = -l); the sums
// run over 0 <= m_s <= n_s and 0 <= m_i <= n_i. The complex beam parameter of
// beam k at normalized position u = 2z/L is g_k = 1 + i f_k u with
// f_k = L / (k_k w_k^2).

#include <complex>
#include <optional>
#include <string>

#include "lgspdc/dispersion.hpp"

namespace lgspdc {

using cplx = std::complex<double>;

inline constexpr int kDefaultIndexCap = 8;

struct ModeSpec {
  int l = 0;
  int n_s = 0;
  int n_i = 0;

  bool radially_degenerate() const { return n_s == n_i; }
  /// Common radial index; throws ContractViolation unless n_s == n_i.
  int n_si() const;
  void validate() const;
  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

/// Warning text when any index exceeds the cap (quadrature gets oscillatory).
std::optional<std::string> index_cap_warning(const ModeSpec& mode, int cap = kDefaultIndexCap);

struct WaistConfig {
  double w_p;
  double w_s;
  double w_i;
  void validate() const;
};

struct FocalConfig {
  double f_p;
  double f_si_d;
  void validate() const;
};

struct ComplexBeamParam {
  double f;
  double u;
  cplx value() const { return {1.0, f * u}; }
};

double focal_parameter(double length_m, double k, double waist_m);
double waist_from_focal(double length_m, double k, double f);

/// Degenerate-approximation waists consistent with (f_p, f_si^d):
/// w_si = sqrt(L / (k_d f_si^d)), w_p = sqrt(L / (k_p f_p)).
WaistConfig waists_from_focal(const FocalConfig& focal, double length_m, double k_p, double k_d);

double log_factorial(int n);

/// Generalized Laguerre polynomial by three-term recurrence.
double assoc_laguerre(int n, int alpha, double x);

/// x-space LG amplitude (radial part, no azimuthal phase), including the
/// (g*/g)^n Gouy factor and the (sqrt 2/(g w))^{|l|+1} envelope.
cplx lg_amplitude_x(int n, int l, double w, double r, double z, double k);

/// Closed-form coefficient of the full sum (waist-dependent, sign included).
double alpha_coeff(const ModeSpec& mode, int m_s, int m_i, const WaistConfig& waists, double length_m);

/// Waist-weighted combination of the three complex beam parameters.
cplx g_star(const ComplexBeamParam& g_p, const ComplexBeamParam& g_s, const ComplexBeamParam& g_i,
            const WaistConfig& waists);

/// G_{m_s,m_i}^{l,n_s,n_i}(u) of the full sum.
cplx G_term(const ModeSpec& mode, int m_s, int m_i, const ComplexBeamParam& g_p, const ComplexBeamParam& g_s,
            const ComplexBeamParam& g_i, const WaistConfig& waists);

/// Degenerate replacement: g_p^{m_s+m_i+l} g_d^{2n-m_s-m_i} / (g_d*)^{2n+l+1}.
cplx Gd_term(const ModeSpec& mode, int m_s, int m_i, const ComplexBeamParam& g_p, const ComplexBeamParam& g_d);

/// Coefficient of the degenerate sum; requires n_s == n_i.
double beta_coeff(const ModeSpec& mode, int m_s, int m_i, const FocalConfig& focal, double length_m, double k_p);

/// Pure-number part of beta (sign included).
double zeta_coeff(int l, int n_si, int m_s, int m_i);

/// beta / zeta = sqrt(L k_p) / (2 pi)^{5/2} sqrt(f_p) / (1 + f_p/f_si)^{M + l + 1}, M = m_s + m_i.
double beta_prefactor(const FocalConfig& focal, double length_m, double k_p, int l, int M);

/// h(k_p, k_d, gamma) = 2 (k_p (1 + gamma^2) - k_d) / (k_p (1 + 2 gamma^2)).
double h_bound(double k_p, double k_d, double gamma);

/// Factorization conj(g*) = (1 + i f1 u)(1 + i f2 u) with f1 >= f2 (real roots),
/// plus the first-order estimate f1 ~ f1 + f2 used when f2 is negligible.
struct BeamProductFactors {
  double sum;        // f1 + f2
  double product;    // f1 f2
  double f1;
  double f2;
  bool real_roots;
};

BeamProductFactors g_factorization(const WaistConfig& waists, double length_m, double k_p, double k_s, double k_i);

/// f1 with f2 neglected: (L/D) ((w_p^2+w_i^2)/k_s + (w_p^2+w_s^2)/k_i - (w_s^2+w_i^2)/k_p).
double f1_first_order(const WaistConfig& waists, double length_m, double k_p, double k_s, double k_i);

}  // namespace lgspdc
