#include "lgspdc/lgmodes.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "lgspdc/errors.hpp"

namespace lgspdc {

namespace {

constexpr int kLogFactorialMax = 64;

const std::array<double, kLogFactorialMax + 1>& log_factorials() {
  static const auto table = [] {
    std::array<double, kLogFactorialMax + 1> t{};
    for (int i = 0; i <= kLogFactorialMax; ++i) t[i] = std::lgamma(i + 1.0);
    return t;
  }();
  return table;
}

void check_sum_indices(const ModeSpec& mode, int m_s, int m_i) {
  if (m_s < 0 || m_s > mode.n_s || m_i < 0 || m_i > mode.n_i)
    throw ContractViolation("summation index out of range: need 0 <= m_s <= n_s and 0 <= m_i <= n_i");
}

// log of sqrt(n_s! n_i! (n_s+l)! (n_i+l)!) (l+M)! / ((n_s-m_s)! (l+m_s)! m_s! (n_i-m_i)! (l+m_i)! m_i!)
double log_factorial_ratio(int l, int n_s, int n_i, int m_s, int m_i) {
  const double num = 0.5 * (log_factorial(n_s) + log_factorial(n_i) + log_factorial(n_s + l) +
                            log_factorial(n_i + l)) +
                     log_factorial(l + m_s + m_i);
  const double den = log_factorial(n_s - m_s) + log_factorial(l + m_s) + log_factorial(m_s) +
                     log_factorial(n_i - m_i) + log_factorial(l + m_i) + log_factorial(m_i);
  return num - den;
}

double parity(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

int ModeSpec::n_si() const {
  if (n_s != n_i) throw ContractViolation("degenerate path requires n_s == n_i");
  return n_s;
}

void ModeSpec::validate() const {
  if (l < 0) throw ContractViolation("mode l must be >= 0 (stored as |l|)");
  if (n_s < 0 || n_i < 0) throw ContractViolation("radial indices must be >= 0");
  if (l + 2 * std::max(n_s, n_i) + 1 > kLogFactorialMax)
    throw ContractViolation("mode indices exceed the log-factorial table");
}

std::optional<std::string> index_cap_warning(const ModeSpec& mode, int cap) {
  if (mode.l > cap || mode.n_s > cap || mode.n_i > cap)
    return "mode (l=" + std::to_string(mode.l) + ", n_s=" + std::to_string(mode.n_s) +
           ", n_i=" + std::to_string(mode.n_i) + ") exceeds index cap " + std::to_string(cap) +
           "; u-integrands become strongly oscillatory";
  return std::nullopt;
}

void WaistConfig::validate() const {
  if (!(w_p > 0.0 && w_s > 0.0 && w_i > 0.0)) throw ContractViolation("all waists must be > 0");
}

void FocalConfig::validate() const {
  if (!(f_p > 0.0 && f_si_d > 0.0)) throw ContractViolation("focal parameters must be > 0");
}

double focal_parameter(double length_m, double k, double waist_m) { return length_m / (k * waist_m * waist_m); }

double waist_from_focal(double length_m, double k, double f) { return std::sqrt(length_m / (k * f)); }

WaistConfig waists_from_focal(const FocalConfig& focal, double length_m, double k_p, double k_d) {
  const double w_si = waist_from_focal(length_m, k_d, focal.f_si_d);
  return {waist_from_focal(length_m, k_p, focal.f_p), w_si, w_si};
}

double log_factorial(int n) {
  if (n < 0 || n > kLogFactorialMax) throw ContractViolation("log_factorial argument out of table range");
  return log_factorials()[n];
}

double assoc_laguerre(int n, int alpha, double x) {
  if (n < 0) throw ContractViolation("assoc_laguerre: n must be >= 0");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

cplx lg_amplitude_x(int n, int l, double w, double r, double z, double k) {
  if (!(w > 0.0)) throw ContractViolation("lg_amplitude_x: waist must be > 0");
  const int al = std::abs(l);
  const cplx g(1.0, 2.0 * z / (k * w * w));
  const double norm = std::sqrt(std::exp(log_factorial(n) - log_factorial(n + al)) / std::numbers::pi);
  const cplx gouy = std::pow(std::conj(g) / g, n);
  const cplx envelope = std::pow(std::sqrt(2.0) / (g * w), al + 1);
  const double lag = assoc_laguerre(n, al, 2.0 * r * r / (w * w * std::norm(g)));
  return norm * gouy * std::exp(-r * r / (g * w * w)) * envelope * std::pow(r, al) * lag;
}

double alpha_coeff(const ModeSpec& mode, int m_s, int m_i, const WaistConfig& waists, double length_m) {
  check_sum_indices(mode, m_s, m_i);
  const int l = mode.l;
  const int M = m_s + m_i;
  const double wp2 = waists.w_p * waists.w_p;
  const double ws2 = waists.w_s * waists.w_s;
  const double wi2 = waists.w_i * waists.w_i;
  const double D = wp2 * ws2 + wp2 * wi2 + ws2 * wi2;
  const double log_mag = std::log(length_m) + (l + M - 1.5) * std::numbers::ln2 - 2.5 * std::log(std::numbers::pi) +
                         log_factorial_ratio(l, mode.n_s, mode.n_i, m_s, m_i) +
                         (2.0 * M + 2 * l + 1) * std::log(waists.w_p) + (2.0 * m_i + l + 1) * std::log(waists.w_s) +
                         (2.0 * m_s + l + 1) * std::log(waists.w_i) - (M + l + 1.0) * std::log(D);
  return parity(M) * std::exp(log_mag);
}

cplx g_star(const ComplexBeamParam& g_p, const ComplexBeamParam& g_s, const ComplexBeamParam& g_i,
            const WaistConfig& waists) {
  if (g_p.u != g_s.u || g_p.u != g_i.u) throw ContractViolation("g_star: beam parameters at different u");
  const double wp2 = waists.w_p * waists.w_p;
  const double ws2 = waists.w_s * waists.w_s;
  const double wi2 = waists.w_i * waists.w_i;
  const cplx gp = g_p.value();
  const cplx gs_c = std::conj(g_s.value());
  const cplx gi_c = std::conj(g_i.value());
  const double D = wp2 * ws2 + wp2 * wi2 + ws2 * wi2;
  return (wp2 * ws2 * gp * gs_c + wp2 * wi2 * gp * gi_c + ws2 * wi2 * gs_c * gi_c) / D;
}

cplx G_term(const ModeSpec& mode, int m_s, int m_i, const ComplexBeamParam& g_p, const ComplexBeamParam& g_s,
            const ComplexBeamParam& g_i, const WaistConfig& waists) {
  check_sum_indices(mode, m_s, m_i);
  const int l = mode.l;
  const cplx gp = g_p.value();
  const cplx gs = g_s.value();
  const cplx gi = g_i.value();
  const cplx gc = g_star(g_p, g_s, g_i, waists);
  const cplx num = std::pow(gp, m_s + m_i + l) * std::pow(gs, mode.n_s - m_s) * std::pow(gi, mode.n_i - m_i);
  const cplx den = std::pow(std::conj(gs), mode.n_s - m_i) * std::pow(std::conj(gi), mode.n_i - m_s) *
                   std::pow(gc, m_s + m_i + l + 1);
  return num / den;
}

cplx Gd_term(const ModeSpec& mode, int m_s, int m_i, const ComplexBeamParam& g_p, const ComplexBeamParam& g_d) {
  const int n = mode.n_si();
  check_sum_indices(mode, m_s, m_i);
  const int l = mode.l;
  const int M = m_s + m_i;
  const cplx gp = g_p.value();
  const cplx gd = g_d.value();
  return std::pow(gp, M + l) * std::pow(gd, 2 * n - M) / std::pow(std::conj(gd), 2 * n + l + 1);
}

double zeta_coeff(int l, int n_si, int m_s, int m_i) {
  if (m_s < 0 || m_s > n_si || m_i < 0 || m_i > n_si)
    throw ContractViolation("zeta_coeff: need 0 <= m_s, m_i <= n_si");
  return parity(m_s + m_i) * std::exp(log_factorial_ratio(l, n_si, n_si, m_s, m_i));
}

double beta_prefactor(const FocalConfig& focal, double length_m, double k_p, int l, int M) {
  const double two_pi = 2.0 * std::numbers::pi;
  return std::sqrt(length_m * k_p) / std::pow(two_pi, 2.5) * std::sqrt(focal.f_p) /
         std::pow(1.0 + focal.f_p / focal.f_si_d, M + l + 1);
}

double beta_coeff(const ModeSpec& mode, int m_s, int m_i, const FocalConfig& focal, double length_m, double k_p) {
  const int n = mode.n_si();
  check_sum_indices(mode, m_s, m_i);
  return beta_prefactor(focal, length_m, k_p, mode.l, m_s + m_i) * zeta_coeff(mode.l, n, m_s, m_i);
}

double h_bound(double k_p, double k_d, double gamma) {
  if (!(gamma > 0.0)) throw ContractViolation("h_bound: gamma must be > 0");
  const double g2 = gamma * gamma;
  return 2.0 * (k_p * (1.0 + g2) - k_d) / (k_p * (1.0 + 2.0 * g2));
}

double f1_first_order(const WaistConfig& w, double length_m, double k_p, double k_s, double k_i) {
  const double wp2 = w.w_p * w.w_p;
  const double ws2 = w.w_s * w.w_s;
  const double wi2 = w.w_i * w.w_i;
  const double D = wp2 * ws2 + wp2 * wi2 + ws2 * wi2;
  return length_m / D * ((wp2 + wi2) / k_s + (wp2 + ws2) / k_i - (ws2 + wi2) / k_p);
}

BeamProductFactors g_factorization(const WaistConfig& w, double length_m, double k_p, double k_s, double k_i) {
  const double wp2 = w.w_p * w.w_p;
  const double ws2 = w.w_s * w.w_s;
  const double wi2 = w.w_i * w.w_i;
  const double D = wp2 * ws2 + wp2 * wi2 + ws2 * wi2;
  BeamProductFactors out{};
  out.sum = f1_first_order(w, length_m, k_p, k_s, k_i);
  out.product = length_m * length_m * (k_p - k_s - k_i) / (k_p * k_s * k_i * D);
  const double disc = out.sum * out.sum - 4.0 * out.product;
  out.real_roots = disc >= 0.0;
  if (out.real_roots) {
    const double s = std::sqrt(disc);
    // Stable pair: larger root directly, smaller from the product.
    out.f1 = 0.5 * (out.sum + std::copysign(s, out.sum));
    out.f2 = out.product / out.f1;
    if (out.f2 > out.f1) std::swap(out.f1, out.f2);
  } else {
    out.f1 = out.f2 = 0.5 * out.sum;
  }
  return out;
}

}  // namespace lgspdc
