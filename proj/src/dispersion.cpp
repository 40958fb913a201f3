#include "lgspdc/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lgspdc/errors.hpp"

namespace lgspdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// KTP z-axis linear expansion, referenced to 25 C.
constexpr double kExpansionAlpha = 6.7e-6;
constexpr double kExpansionBeta = 11e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Derivatives (in micrometres) of K l^2 / (l^2 - P) = K + K P / (l^2 - P).
struct Pole {
  double v, d1, d2;
};

Pole pole_term(double K, double P, double l) {
  const double q = l * l - P;
  const double KP = K * P;
  return {K + KP / q, -2.0 * KP * l / (q * q), -2.0 * KP / (q * q) + 8.0 * KP * l * l / (q * q * q)};
}

// sum_m c[m] / l^m and its first two derivatives.
Pole inverse_poly(const double* c, double l) {
  Pole p{0.0, 0.0, 0.0};
  for (int m = 0; m < 4; ++m) {
    const double lm = std::pow(l, -m);
    p.v += c[m] * lm;
    p.d1 += -m * c[m] * lm / l;
    p.d2 += m * (m + 1.0) * c[m] * lm / (l * l);
  }
  return p;
}

}  // namespace

void CrystalSpec::validate() const {
  if (!(length_m > 0.0)) throw DomainError("crystal length_L must be > 0");
  if (!(poling_period_m > 0.0)) throw DomainError("crystal poling_period_Lambda must be > 0");
  if (!(pump_wavelength_m > 0.0)) throw DomainError("crystal pump_wavelength must be > 0");
  if (!std::isfinite(temperature_C)) throw DomainError("crystal temperature_T must be finite");
}

double CrystalSpec::pump_omega() const { return kTwoPi * kSpeedOfLight / pump_wavelength_m; }

double CrystalSpec::poling_period_at(double T) const {
  if (!poling_thermal_expansion) return poling_period_m;
  const double dT = T - 25.0;
  return poling_period_m * (1.0 + kExpansionAlpha * dT + kExpansionBeta * dT * dT);
}

DispersionModel::DispersionModel(std::string name, std::array<double, 6> sellmeier,
                                 std::vector<double> thermo_optic, std::pair<double, double> lambda_range_um,
                                 std::pair<double, double> temp_range_C)
    : name_(std::move(name)),
      sellmeier_(sellmeier),
      thermo_(std::move(thermo_optic)),
      lambda_range_um_(lambda_range_um),
      temp_range_C_(temp_range_C) {
  if (thermo_.size() != 5 && thermo_.size() != 9)
    throw ContractViolation("thermo_optic must hold [T_ref, a0..a3] or [T_ref, a0..a3, b0..b3]");
  if (thermo_.size() == 5) thermo_.resize(9, 0.0);
  if (!(lambda_range_um_.first > 0.0 && lambda_range_um_.second > lambda_range_um_.first))
    throw ContractViolation("lambda_range_um must be an increasing positive pair");
  if (!(temp_range_C_.second > temp_range_C_.first))
    throw ContractViolation("temp_range_C must be an increasing pair");
  for (double c : sellmeier_)
    if (!std::isfinite(c)) throw ContractViolation("sellmeier coefficients must be finite");
  for (double c : thermo_)
    if (!std::isfinite(c)) throw ContractViolation("thermo_optic coefficients must be finite");
}

const DispersionModel& DispersionModel::ktp_default() {
  static const DispersionModel model(
      "KTP-nz Fradkin1999 + Emanueli-Arie2003, T_ref calibrated (degenerate at 24.3 C)",
      {2.12725, 1.18431, 5.14852e-2, 0.6603, 100.00507, 9.68956e-3},
      {kDefaultReferenceTemperatureC, 9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6, -1.1882e-8, 10.459e-8,
       -9.8136e-8, 3.1481e-8},
      {0.39, 1.70}, {10.0, 80.0});
  return model;
}

DispersionModel DispersionModel::with_reference_temperature(double T_ref, std::string new_name) const {
  std::vector<double> t = thermo_;
  t[0] = T_ref;
  return DispersionModel(std::move(new_name), sellmeier_, std::move(t), lambda_range_um_, temp_range_C_);
}

void DispersionModel::check_wavelength(double wavelength_m) const {
  const double um = wavelength_m * 1e6;
  if (!(um >= lambda_range_um_.first))
    throw DomainError("wavelength " + fmt(um) + " um below model lower bound " + fmt(lambda_range_um_.first) +
                      " um (" + name_ + ")");
  if (!(um <= lambda_range_um_.second))
    throw DomainError("wavelength " + fmt(um) + " um above model upper bound " + fmt(lambda_range_um_.second) +
                      " um (" + name_ + ")");
}

void DispersionModel::check_temperature(double T) const {
  if (!(T >= temp_range_C_.first))
    throw DomainError("temperature " + fmt(T) + " C below model lower bound " + fmt(temp_range_C_.first) +
                      " C (" + name_ + ")");
  if (!(T <= temp_range_C_.second))
    throw DomainError("temperature " + fmt(T) + " C above model upper bound " + fmt(temp_range_C_.second) +
                      " C (" + name_ + ")");
}

double DispersionModel::index(double wavelength_m, double T) const { return index_derivatives(wavelength_m, T).n; }

IndexDerivatives DispersionModel::index_derivatives(double wavelength_m, double T) const {
  check_wavelength(wavelength_m);
  check_temperature(T);
  const double l = wavelength_m * 1e6;
  const auto& s = sellmeier_;
  const Pole p1 = pole_term(s[1], s[2], l);
  const Pole p2 = pole_term(s[3], s[4], l);
  const double S = s[0] + p1.v + p2.v - s[5] * l * l;
  const double S1 = p1.d1 + p2.d1 - 2.0 * s[5] * l;
  const double S2 = p1.d2 + p2.d2 - 2.0 * s[5];
  const double n0 = std::sqrt(S);
  const double n0_1 = S1 / (2.0 * n0);
  const double n0_2 = (S2 - 2.0 * n0_1 * n0_1) / (2.0 * n0);

  const double dT = T - thermo_[0];
  const Pole first = inverse_poly(&thermo_[1], l);
  const Pole second = inverse_poly(&thermo_[5], l);

  IndexDerivatives d;
  d.n = n0 + first.v * dT + second.v * dT * dT;
  d.dn_dlambda = (n0_1 + first.d1 * dT + second.d1 * dT * dT) * 1e6;
  d.d2n_dlambda2 = (n0_2 + first.d2 * dT + second.d2 * dT * dT) * 1e12;
  return d;
}

double refractive_index(const DispersionModel& model, double wavelength_m, double T) {
  return model.index(wavelength_m, T);
}

double wavenumber(const DispersionModel& model, double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("wavenumber: omega must be > 0");
  const double lambda = kTwoPi * kSpeedOfLight / omega;
  return model.index(lambda, T) * omega / kSpeedOfLight;
}

PhaseMismatch phase_mismatch(const DispersionModel& model, double omega_s, double T, const CrystalSpec& crystal) {
  const double omega_p = crystal.pump_omega();
  if (!(omega_s > 0.0 && omega_s < omega_p))
    throw DomainError("phase_mismatch: omega_s must lie in (0, omega_p)");
  const double omega_i = omega_p - omega_s;
  const double kp = wavenumber(model, omega_p, T);
  // Sum the lower-frequency term first so that s <-> i relabelling gives the same rounding.
  const double lo = std::min(omega_s, omega_i);
  const double hi = std::max(omega_s, omega_i);
  const double kpair = wavenumber(model, lo, T) + wavenumber(model, hi, T);
  PhaseMismatch pm;
  pm.delta_k = kp - kpair - kTwoPi / crystal.poling_period_at(T);
  pm.Phi = pm.delta_k * crystal.length_m / 2;
  return pm;
}

double group_velocity(const DispersionModel& model, double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("group_velocity: omega must be > 0");
  const double lambda = kTwoPi * kSpeedOfLight / omega;
  const IndexDerivatives d = model.index_derivatives(lambda, T);
  const double group_index = d.n - lambda * d.dn_dlambda;
  return kSpeedOfLight / group_index;
}

double gvd(const DispersionModel& model, double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("gvd: omega must be > 0");
  const double lambda = kTwoPi * kSpeedOfLight / omega;
  const IndexDerivatives d = model.index_derivatives(lambda, T);
  return lambda * lambda * lambda * d.d2n_dlambda2 / (kTwoPi * kSpeedOfLight * kSpeedOfLight);
}

namespace {

void check_stencil(const DispersionModel& model, double omega, double h) {
  const double lo = kTwoPi * kSpeedOfLight / (omega + h);
  const double hi = kTwoPi * kSpeedOfLight / (omega - h);
  if (!(omega - h > 0.0)) throw DomainError("finite-difference stencil reaches omega <= 0");
  model.check_wavelength(lo);
  model.check_wavelength(hi);
}

double first_derivative(const DispersionModel& model, double omega, double T, double h) {
  return (wavenumber(model, omega + h, T) - wavenumber(model, omega - h, T)) / (2.0 * h);
}

double second_derivative(const DispersionModel& model, double omega, double T, double h) {
  return (wavenumber(model, omega + h, T) - 2.0 * wavenumber(model, omega, T) + wavenumber(model, omega - h, T)) /
         (h * h);
}

}  // namespace

double group_velocity_numeric(const DispersionModel& model, double omega, double T, double rel_step) {
  const double h = rel_step * omega;
  check_stencil(model, omega, h);
  const double d1 = first_derivative(model, omega, T, h);
  const double d2 = first_derivative(model, omega, T, h / 2);
  return 1.0 / ((4.0 * d2 - d1) / 3.0);
}

double gvd_numeric(const DispersionModel& model, double omega, double T, double rel_step) {
  const double h = rel_step * omega;
  check_stencil(model, omega, h);
  const double d1 = second_derivative(model, omega, T, h);
  const double d2 = second_derivative(model, omega, T, h / 2);
  return (4.0 * d2 - d1) / 3.0;
}

double omega_from_r(double omega_r, const CrystalSpec& crystal) { return omega_r * crystal.pump_omega() / 2; }
double r_from_omega(double omega, const CrystalSpec& crystal) { return 2 * omega / crystal.pump_omega(); }

PhaseMatchRoots phase_matching_roots(const DispersionModel& model, double T, const CrystalSpec& crystal) {
  const double omega_p = crystal.pump_omega();
  auto dk = [&](double r) { return phase_mismatch(model, omega_from_r(r, crystal), T, crystal).delta_k; };
  const double at_degeneracy = dk(1.0);
  if (at_degeneracy < 0.0)
    throw NoPhaseMatching("no Delta k = 0 solution at T = " + fmt(T) + " C (Delta k at degeneracy = " +
                          fmt(at_degeneracy) + " 1/m)");
  if (at_degeneracy == 0.0) return {omega_p / 2, omega_p / 2, true};

  // Largest omega_r <= 1.5 whose idler still lies in the validity range.
  double hi = 1.5;
  const double lambda_max = model.lambda_range_um().second * 1e-6;
  const double lambda_min = model.lambda_range_um().first * 1e-6;
  const double r_idler_floor = 2.0 * crystal.pump_wavelength_m / lambda_max;  // idler omega_r lower bound
  hi = std::min(hi, 2.0 - r_idler_floor);
  hi = std::min(hi, 2.0 * crystal.pump_wavelength_m / lambda_min);
  if (dk(hi) > 0.0)
    throw NoPhaseMatching("Delta k stays positive up to omega_r = " + fmt(hi) + " at T = " + fmt(T) + " C");
  double lo = 1.0;
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (dk(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double r = 0.5 * (lo + hi);
  const double ws = omega_from_r(r, crystal);
  return {ws, omega_p - ws, false};
}

QuadraticPhase quadratic_phase(const DispersionModel& model, double T, const CrystalSpec& crystal) {
  const PhaseMatchRoots roots = phase_matching_roots(model, T, crystal);
  const double L = crystal.length_m;
  const double a = 1.0 / group_velocity(model, roots.omega_signal, T) -
                   1.0 / group_velocity(model, roots.omega_idler, T);
  const double G = gvd(model, roots.omega_signal, T) + gvd(model, roots.omega_idler, T);
  // Phi(omega_s) = L/2 [Delta k0 - a d - (G/2) d^2], Delta k0 = 0.
  return {roots.omega_signal, -0.5 * L * a, -0.5 * L * G};
}

double phi_half(const DispersionModel& model, double T, const CrystalSpec& crystal) {
  const PhaseMatchRoots roots = phase_matching_roots(model, T, crystal);
  const double L = crystal.length_m;
  const double a = 1.0 / group_velocity(model, roots.omega_signal, T) -
                   1.0 / group_velocity(model, roots.omega_idler, T);
  const double G = gvd(model, roots.omega_signal, T) + gvd(model, roots.omega_idler, T);
  if (roots.degenerate) return 0.0;
  return -3.0 * L * a * a / (4.0 * G);
}

double domega_dphi(const DispersionModel& model, double Phi, double T, const CrystalSpec& crystal) {
  const PhaseMatchRoots roots = phase_matching_roots(model, T, crystal);
  const double L = crystal.length_m;
  const double a = 1.0 / group_velocity(model, roots.omega_signal, T) -
                   1.0 / group_velocity(model, roots.omega_idler, T);
  const double G = gvd(model, roots.omega_signal, T) + gvd(model, roots.omega_idler, T);
  const double radicand = 0.25 * L * L * a * a - L * G * Phi;
  if (!(radicand > 0.0))
    throw DomainError("domega_dphi: radicand " + fmt(radicand) + " <= 0 at Phi = " + fmt(Phi) +
                      " (outside the quadratic model's reach)");
  return 1.0 / std::sqrt(radicand);
}

}  // namespace lgspdc
