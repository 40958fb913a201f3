#pragma once

// Temperature-dependent z-polarized KTP dispersion: refractive index, wave
// numbers, quasi-phase-matched mismatch and group-velocity quantities.
//
// Units: SI throughout (m, rad/s, 1/m), temperatures in degrees Celsius.
// Sellmeier and thermo-optic polynomials are evaluated with the wavelength in
// micrometres internally.

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace lgspdc {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Temperature at which the default model phase-matches degenerate
/// 405 -> 810 nm conversion in a 3.425 um grating, and the thermo-optic
/// reference temperature that realises it.
inline constexpr double kDefaultDegenerateTemperatureC = 24.3;
inline constexpr double kDefaultReferenceTemperatureC = 12.99625720004506;

/// Fixed physical context of every computation.
struct CrystalSpec {
  double length_m = 30e-3;
  double poling_period_m = 3.425e-6;
  double temperature_C = 24.5;
  double pump_wavelength_m = 405e-9;
  /// Scale the poling period with the KTP z-axis thermal expansion. Off by default.
  bool poling_thermal_expansion = false;

  void validate() const;
  double pump_omega() const;
  /// Grating period at temperature T (equals poling_period_m unless expansion is on).
  double poling_period_at(double T) const;
};

/// Index and its first two wavelength derivatives (SI: 1/m, 1/m^2).
struct IndexDerivatives {
  double n;
  double dn_dlambda;
  double d2n_dlambda2;
};

/// n_z(lambda, T) = sqrt(A + B l^2/(l^2-C) + D l^2/(l^2-E) - F l^2)
///                + n1(l) (T - T_ref) + n2(l) (T - T_ref)^2,
/// n1 = sum_m a_m / l^m, n2 = sum_m b_m / l^m (m = 0..3), l in micrometres.
///
/// thermo_optic layout: [T_ref, a0, a1, a2, a3, b0, b1, b2, b3]; the second-order
/// block may be omitted.
class DispersionModel {
 public:
  DispersionModel(std::string name, std::array<double, 6> sellmeier, std::vector<double> thermo_optic,
                  std::pair<double, double> lambda_range_um, std::pair<double, double> temp_range_C);

  /// Fradkin et al. (1999) n_z Sellmeier with the Emanueli & Arie (2003)
  /// thermo-optic dispersion; reference temperature calibrated so that a
  /// 3.425 um grating phase-matches degenerate 405 -> 810 nm conversion at
  /// kDefaultDegenerateTemperatureC (see docs/dispersion.md).
  static const DispersionModel& ktp_default();

  const std::string& name() const { return name_; }
  const std::array<double, 6>& sellmeier() const { return sellmeier_; }
  const std::vector<double>& thermo_optic() const { return thermo_; }
  std::pair<double, double> lambda_range_um() const { return lambda_range_um_; }
  std::pair<double, double> temp_range_C() const { return temp_range_C_; }
  double reference_temperature_C() const { return thermo_[0]; }

  /// Same coefficients with a different thermo-optic reference temperature.
  DispersionModel with_reference_temperature(double T_ref, std::string new_name) const;

  void check_wavelength(double wavelength_m) const;
  void check_temperature(double T) const;

  double index(double wavelength_m, double T) const;
  IndexDerivatives index_derivatives(double wavelength_m, double T) const;

 private:
  std::string name_;
  std::array<double, 6> sellmeier_;
  std::vector<double> thermo_;
  std::pair<double, double> lambda_range_um_;
  std::pair<double, double> temp_range_C_;
};

struct PhaseMismatch {
  double delta_k;  // 1/m
  double Phi;      // delta_k * L / 2
};

/// Signal/idler frequencies where Delta k = 0; signal is the higher frequency.
struct PhaseMatchRoots {
  double omega_signal;
  double omega_idler;
  bool degenerate;
};

/// Local quadratic model of Phi around the signal root.
struct QuadraticPhase {
  double omega_root;     // signal-side root
  double slope;          // dPhi/domega_s at the root (s)
  double curvature;      // d2Phi/domega_s^2 at the root (s^2)
  double operator()(double omega_s) const {
    const double d = omega_s - omega_root;
    return slope * d + 0.5 * curvature * d * d;
  }
};

double refractive_index(const DispersionModel& model, double wavelength_m, double T);
double wavenumber(const DispersionModel& model, double omega, double T);
PhaseMismatch phase_mismatch(const DispersionModel& model, double omega_s, double T, const CrystalSpec& crystal);

/// u_g = 1 / (dk/domega), analytic derivative of the Sellmeier form.
double group_velocity(const DispersionModel& model, double omega, double T);
/// G = d/domega (1/u_g) = d2k/domega2.
double gvd(const DispersionModel& model, double omega, double T);

/// Central-difference estimates with one Richardson step (h and h/2).
/// rel_step is relative to omega; throws DomainError if the stencil leaves the
/// validity range.
double group_velocity_numeric(const DispersionModel& model, double omega, double T, double rel_step = 2e-3);
double gvd_numeric(const DispersionModel& model, double omega, double T, double rel_step = 4e-3);

/// Bisection on omega_r in (1, 1.5] to 1e-12 relative. Throws NoPhaseMatching
/// when Delta k < 0 at degeneracy.
PhaseMatchRoots phase_matching_roots(const DispersionModel& model, double T, const CrystalSpec& crystal);

QuadraticPhase quadratic_phase(const DispersionModel& model, double T, const CrystalSpec& crystal);

/// Phi where |d omega / d Phi| falls to half its Phi = 0 value:
/// -3 L a^2 / (4 (G_s + G_i)), a = 1/u_gs - 1/u_gi, at the Delta k = 0 pair.
double phi_half(const DispersionModel& model, double T, const CrystalSpec& crystal);

/// |d omega_si / d Phi| = 1 / sqrt(L^2 a^2 / 4 - L (G_s + G_i) Phi) from the
/// quadratic wave-number model. Throws DomainError for a non-positive radicand.
double domega_dphi(const DispersionModel& model, double Phi, double T, const CrystalSpec& crystal);

/// omega_r = 2 omega / omega_p helpers.
double omega_from_r(double omega_r, const CrystalSpec& crystal);
double r_from_omega(double omega, const CrystalSpec& crystal);

}  // namespace lgspdc
