#include "lgspdc/amplitude.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace lgspdc {

namespace {

cplx ipow(cplx z, int e) {
  if (e < 0) return 1.0 / ipow(z, -e);
  cplx out(1.0, 0.0);
  cplx base = z;
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

constexpr int kMaxPow = 80;

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::FullClosedForm: return "full";
    case Method::DegenerateApprox: return "degenerate";
    case Method::QuadraticKz: return "quadratic-kz";
    case Method::NumericOracle: return "oracle";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "full") return Method::FullClosedForm;
  if (name == "degenerate") return Method::DegenerateApprox;
  if (name == "quadratic-kz") return Method::QuadraticKz;
  if (name == "oracle") return Method::NumericOracle;
  throw ConfigError("unknown method '" + name + "' (expected full, degenerate, quadratic-kz or oracle)");
}

void QuadratureSettings::validate() const {
  if (base_nodes < 16) throw ContractViolation("quadrature base_nodes must be >= 16");
  if (max_refinements < 1 || max_refinements > 12) throw ContractViolation("quadrature max_refinements must be in [1, 12]");
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0)) throw ContractViolation("quadrature rel_tolerance must be in (0, 1)");
}

void AmplitudeRequest::validate() const {
  mode.validate();
  crystal.validate();
  if (!(omega_s > 0.0)) throw ContractViolation("omega_s must be > 0");
  std::visit([](const auto& g) { g.validate(); }, geometry);
  const bool focal = std::holds_alternative<FocalConfig>(geometry);
  if (method == Method::FullClosedForm || method == Method::NumericOracle) {
    if (focal) throw ContractViolation(std::string(method_name(method)) + " path needs waists, got focal parameters");
  } else {
    if (!focal) throw ContractViolation(std::string(method_name(method)) + " path needs focal parameters, got waists");
    mode.n_si();
  }
}

DegenerateProfile::DegenerateProfile(const ModeSpec& mode, const FocalConfig& focal, double length_m, double k_p)
    : mode_(mode), focal_(focal) {
  mode.validate();
  focal.validate();
  const int n = mode.n_si();
  coeff_by_M_.assign(2 * n + 1, 0.0);
  for (int ms = 0; ms <= n; ++ms)
    for (int mi = 0; mi <= n; ++mi) coeff_by_M_[ms + mi] += beta_coeff(mode, ms, mi, focal, length_m, k_p);
}

cplx DegenerateProfile::operator()(double u) const {
  const int n = mode_.n_s;
  const int l = mode_.l;
  const cplx gp(1.0, focal_.f_p * u);
  const cplx gd(1.0, focal_.f_si_d * u);
  const cplx r = gp / gd;
  cplx poly = coeff_by_M_.back();
  for (int M = 2 * n - 1; M >= 0; --M) poly = poly * r + coeff_by_M_[M];
  return poly * ipow(gp, l) * ipow(gd, 2 * n) / ipow(std::conj(gd), 2 * n + l + 1);
}

FullProfile::FullProfile(const ModeSpec& mode, const WaistConfig& waists, double length_m, double k_p, double k_s,
                         double k_i)
    : mode_(mode), waists_(waists) {
  mode.validate();
  waists.validate();
  if (mode.l + mode.n_s + mode.n_i + 1 >= kMaxPow) throw ContractViolation("mode indices too large for full path");
  f_p_ = focal_parameter(length_m, k_p, waists.w_p);
  f_s_ = focal_parameter(length_m, k_s, waists.w_s);
  f_i_ = focal_parameter(length_m, k_i, waists.w_i);
  const double wp2 = waists.w_p * waists.w_p, ws2 = waists.w_s * waists.w_s, wi2 = waists.w_i * waists.w_i;
  wp2ws2_ = wp2 * ws2;
  wp2wi2_ = wp2 * wi2;
  ws2wi2_ = ws2 * wi2;
  inv_D_ = 1.0 / (wp2ws2_ + wp2wi2_ + ws2wi2_);
  alpha_.resize((mode.n_s + 1) * (mode.n_i + 1));
  for (int ms = 0; ms <= mode.n_s; ++ms)
    for (int mi = 0; mi <= mode.n_i; ++mi) alpha_[ms * (mode.n_i + 1) + mi] = alpha_coeff(mode, ms, mi, waists, length_m);
}

cplx FullProfile::operator()(double u) const {
  const int l = mode_.l, ns = mode_.n_s, ni = mode_.n_i;
  const cplx gp(1.0, f_p_ * u);
  const cplx gs(1.0, f_s_ * u);
  const cplx gi(1.0, f_i_ * u);
  const cplx gsc = std::conj(gs), gic = std::conj(gi);
  const cplx gst = (wp2ws2_ * gp * gsc + wp2wi2_ * gp * gic + ws2wi2_ * gsc * gic) * inv_D_;

  std::array<cplx, kMaxPow> gp_pow, igst_pow;
  const cplx igst = 1.0 / gst;
  gp_pow[0] = 1.0;
  igst_pow[0] = 1.0;
  const int top = l + ns + ni + 1;
  for (int k = 1; k <= top; ++k) {
    gp_pow[k] = gp_pow[k - 1] * gp;
    igst_pow[k] = igst_pow[k - 1] * igst;
  }
  cplx sum{};
  for (int ms = 0; ms <= ns; ++ms) {
    const cplx a = ipow(gs, ns - ms) / ipow(gic, ni - ms);
    for (int mi = 0; mi <= ni; ++mi) {
      const int M = ms + mi;
      const cplx b = ipow(gi, ni - mi) / ipow(gsc, ns - mi);
      sum += alpha_[ms * (ni + 1) + mi] * gp_pow[M + l] * a * b * igst_pow[M + l + 1];
    }
  }
  return sum;
}

namespace {

struct Wavenumbers {
  double k_p, k_s, k_i;
};

Wavenumbers wavenumbers_at(const DispersionModel& model, double omega_s, const CrystalSpec& crystal) {
  const double T = crystal.temperature_C;
  const double wp = crystal.pump_omega();
  if (!(omega_s > 0.0 && omega_s < wp)) throw DomainError("omega_s must lie in (0, omega_p)");
  return {wavenumber(model, wp, T), wavenumber(model, omega_s, T), wavenumber(model, wp - omega_s, T)};
}

// Overall factor turning int du [...] into the amplitude: (L/2) from dz, times 1/(2 pi)^... is inside alpha/beta.
}  // namespace

Amplitude coincidence_full(const DispersionModel& model, const ModeSpec& mode, const WaistConfig& waists,
                           double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s) {
  s.validate();
  const auto k = wavenumbers_at(model, omega_s, crystal);
  const FullProfile profile(mode, waists, crystal.length_m, k.k_p, k.k_s, k.k_i);
  const double Phi = phase_mismatch(model, omega_s, crystal.temperature_C, crystal).Phi;
  return u_integral(profile, Phi, s);
}

Amplitude coincidence_degenerate(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                                 double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s) {
  s.validate();
  const auto k = wavenumbers_at(model, omega_s, crystal);
  const DegenerateProfile profile(mode, focal, crystal.length_m, k.k_p);
  const double Phi = phase_mismatch(model, omega_s, crystal.temperature_C, crystal).Phi;
  return u_integral(profile, Phi, s);
}

Amplitude coincidence_quadratic_kz(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                                   double omega_s, const CrystalSpec& crystal, const QuadratureSettings& s) {
  s.validate();
  const auto k = wavenumbers_at(model, omega_s, crystal);
  const DegenerateProfile profile(mode, focal, crystal.length_m, k.k_p);
  const double Phi = quadratic_phase(model, crystal.temperature_C, crystal)(omega_s);
  return u_integral(profile, Phi, s);
}

Amplitude coincidence_oracle(const DispersionModel& model, int l_s, int l_i, int n_s, int n_i,
                             const WaistConfig& waists, double omega_s, const CrystalSpec& crystal,
                             const OracleSettings& settings) {
  waists.validate();
  crystal.validate();
  if (n_s < 0 || n_i < 0) throw ContractViolation("radial indices must be >= 0");
  const int cap = settings.max_index;
  if (std::abs(l_s) > cap || std::abs(l_i) > cap || n_s > cap || n_i > cap)
    throw CostGuardExceeded("oracle limited to |l|, n <= " + std::to_string(cap));
  if (l_s + l_i != 0) return {cplx{}, 0.0, true};

  const auto k = wavenumbers_at(model, omega_s, crystal);
  const double L = crystal.length_m;
  const double Phi = phase_mismatch(model, omega_s, crystal.temperature_C, crystal).Phi;
  const double r_max = settings.cutoff_factor * std::max({waists.w_p, waists.w_s, waists.w_i});

  // Transverse overlap at u = 2z/L with n_r Gauss-Legendre nodes on [0, r_max].
  auto radial = [&](double u, int n_r) {
    const double z = 0.5 * L * u;
    const quad::Rule& rule = quad::gauss_legendre(n_r);
    cplx acc{};
    for (int j = 0; j < n_r; ++j) {
      const double r = 0.5 * r_max * (rule.nodes[j] + 1.0);
      const cplx vp = lg_amplitude_x(0, 0, waists.w_p, r, z, k.k_p);
      const cplx vs = lg_amplitude_x(n_s, l_s, waists.w_s, r, z, k.k_s);
      const cplx vi = lg_amplitude_x(n_i, l_i, waists.w_i, r, z, k.k_i);
      acc += 0.5 * r_max * rule.weights[j] * r * vp * std::conj(vs) * std::conj(vi);
    }
    return acc;
  };
  auto radial_converged = [&](double u) {
    int n_r = 64;
    cplx prev = radial(u, n_r);
    for (int it = 0; it < 6; ++it) {
      n_r *= 2;
      const cplx cur = radial(u, n_r);
      if (std::abs(cur - prev) <= 0.1 * settings.rel_tolerance * std::abs(cur)) return cur;
      prev = cur;
    }
    return prev;
  };

  QuadratureSettings qs;
  qs.base_nodes = 16;
  qs.max_refinements = 6;
  qs.rel_tolerance = settings.rel_tolerance;
  Amplitude a = u_integral(radial_converged, Phi, qs);
  // Angular factor 2 pi, dz = (L/2) du, plane-wave normalization 1/(2 pi)^2 per transverse k-space pair.
  const double pref = 2.0 * std::numbers::pi * 0.5 * L / (4.0 * std::numbers::pi * std::numbers::pi);
  a.value *= pref;
  a.error *= pref;
  return a;
}

Amplitude coincidence(const DispersionModel& model, const AmplitudeRequest& req, const QuadratureSettings& s) {
  req.validate();
  switch (req.method) {
    case Method::FullClosedForm:
      return coincidence_full(model, req.mode, std::get<WaistConfig>(req.geometry), req.omega_s, req.crystal, s);
    case Method::DegenerateApprox:
      return coincidence_degenerate(model, req.mode, std::get<FocalConfig>(req.geometry), req.omega_s, req.crystal, s);
    case Method::QuadraticKz:
      return coincidence_quadratic_kz(model, req.mode, std::get<FocalConfig>(req.geometry), req.omega_s, req.crystal,
                                      s);
    case Method::NumericOracle:
      return coincidence_oracle(model, static_cast<int>(req.mode.l), -req.mode.l, req.mode.n_s, req.mode.n_i,
                                std::get<WaistConfig>(req.geometry), req.omega_s, req.crystal);
  }
  throw ContractViolation("unknown method");
}

}  // namespace lgspdc
