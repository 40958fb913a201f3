#pragma once

// Coincidence amplitude of a signal/idler LG pair at one signal frequency.
//
// Four evaluation paths share one u-integral engine:
//   FullClosedForm    sum_{m_s,m_i} alpha * int G(u) exp(i Phi u) du       (waists)
//   DegenerateApprox  sum_{m_s,m_i} beta  * int G^d(u) exp(i Phi u) du     (focal params)
//   QuadraticKz       as DegenerateApprox with Phi from a 2nd-order expansion about Delta k = 0
//   NumericOracle     brute-force r/z integral of the x-space overlap (independent check)
//
// Amplitudes carry an arbitrary constant (unit pump spectrum, dropped chi^(2)
// and power prefactors) shared by all paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>

#include "lgspdc/dispersion.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/lgmodes.hpp"
#include "lgspdc/quadrature.hpp"

namespace lgspdc {

enum class Method { FullClosedForm, DegenerateApprox, QuadraticKz, NumericOracle };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct QuadratureSettings {
  int base_nodes = 32;
  int max_refinements = 7;
  double rel_tolerance = 1e-10;
  void validate() const;
};

struct AmplitudeRequest {
  ModeSpec mode;
  std::variant<WaistConfig, FocalConfig> geometry;
  double omega_s = 0.0;
  CrystalSpec crystal;
  Method method = Method::DegenerateApprox;
  void validate() const;
};

struct Amplitude {
  cplx value{};
  double error = 0.0;
  bool converged = false;
};

/// |Phi| above which [-1, 1] is split into ceil(|Phi|/pi) panels.
inline constexpr double kPanelThreshold = 50.0;
/// Gauss-Legendre points per panel before refinement when panels are in use.
inline constexpr int kPanelBaseNodes = 8;

namespace detail {

template <class F>
cplx apply_rule(F& integrand, double Phi, int panels, int nodes, double& abs_scale) {
  const quad::Rule& rule = quad::gauss_legendre(nodes);
  cplx sum{};
  double scale = 0.0;
  const double width = 2.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = -1.0 + p * width;
    const double half = 0.5 * width;
    const double mid = a + half;
    for (int j = 0; j < nodes; ++j) {
      const double u = mid + half * rule.nodes[j];
      const cplx h = integrand(u);
      const double w = half * rule.weights[j];
      sum += w * h * std::polar(1.0, Phi * u);
      scale += w * std::abs(h);
    }
  }
  abs_scale = scale;
  return sum;
}

}  // namespace detail

/// Adaptive Gauss-Legendre for int_{-1}^{1} h(u) exp(i Phi u) du. Doubles the
/// node count until successive estimates differ by less than
/// rel_tolerance * max(|I|, int |h|). Throws ConvergenceError (carrying the best
/// estimate) after max_refinements doublings.
template <class F>
Amplitude u_integral(F&& integrand, double Phi, const QuadratureSettings& s) {
  const int panels = std::abs(Phi) > kPanelThreshold ? static_cast<int>(std::ceil(std::abs(Phi) / std::numbers::pi)) : 1;
  int nodes = panels == 1 ? s.base_nodes : kPanelBaseNodes;
  double scale = 0.0;
  cplx prev = detail::apply_rule(integrand, Phi, panels, nodes, scale);
  double diff = 0.0;
  for (int r = 0; r < s.max_refinements; ++r) {
    nodes *= 2;
    const cplx cur = detail::apply_rule(integrand, Phi, panels, nodes, scale);
    diff = std::abs(cur - prev);
    if (diff <= s.rel_tolerance * std::max(std::abs(cur), scale)) return {cur, diff, true};
    prev = cur;
  }
  throw ConvergenceError("u_integral did not converge at Phi = " + std::to_string(Phi), prev, diff);
}

/// Degenerate-approximation integrand H(u) = sum beta_{m_s,m_i} G^d_{m_s,m_i}(u),
/// collapsed onto M = m_s + m_i. Depends only on (mode, f_p, f_si^d, L k_p).
class DegenerateProfile {
 public:
  DegenerateProfile(const ModeSpec& mode, const FocalConfig& focal, double length_m, double k_p);
  cplx operator()(double u) const;
  const FocalConfig& focal() const { return focal_; }
  const ModeSpec& mode() const { return mode_; }

 private:
  ModeSpec mode_;
  FocalConfig focal_;
  std::vector<double> coeff_by_M_;
};

/// Full closed-form integrand sum alpha_{m_s,m_i} G_{m_s,m_i}(u) at fixed signal/idler wave numbers.
class FullProfile {
 public:
  FullProfile(const ModeSpec& mode, const WaistConfig& waists, double length_m, double k_p, double k_s, double k_i);
  cplx operator()(double u) const;

 private:
  ModeSpec mode_;
  WaistConfig waists_;
  double f_p_, f_s_, f_i_;
  double wp2ws2_, wp2wi2_, ws2wi2_, inv_D_;
  std::vector<double> alpha_;  // row-major (m_s, m_i)
};

Amplitude coincidence_full(const DispersionModel& model, const ModeSpec& mode, const WaistConfig& waists,
                           double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s);

Amplitude coincidence_degenerate(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                                 double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s);

Amplitude coincidence_quadratic_kz(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                                   double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s);

struct OracleSettings {
  /// Radial integration stops at cutoff_factor * max(w).
  double cutoff_factor = 8.0;
  double rel_tolerance = 1e-9;
  int max_index = 2;
};

/// Brute-force x-space overlap of a Gaussian pump with LG signal (l_s, n_s)
/// and idler (l_i, n_i). The azimuthal integral is exact: 2 pi when
/// l_s + l_i = 0 (pump carries no OAM), otherwise the amplitude is exactly 0.
Amplitude coincidence_oracle(const DispersionModel& model, int l_s, int l_i, int n_s, int n_i,
                             const WaistConfig& waists, double omega_s, const CrystalSpec& crystal,
                             const OracleSettings& settings = {});

/// Dispatch on req.method; temperature is req.crystal.temperature_C.
Amplitude coincidence(const DispersionModel& model, const AmplitudeRequest& req, const QuadratureSettings& s);

}  // namespace lgspdc
