#include "lgspdc/rates.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_math.h>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>

#include "lgspdc/legendre_series.hpp"
#include "lgspdc/parallel.hpp"
#include "lgspdc/quadrature.hpp"
#include "lgspdc/search.hpp"

namespace lgspdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-thread FFT buffer and plan. FFTW_ESTIMATE keeps the plan (and therefore the
// arithmetic) identical from run to run.
struct FftWorkspace {
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;
  FftWorkspace() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    buf = fftw_alloc_complex(QTable::kFft);
    plan = fftw_plan_dft_1d(QTable::kFft, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftWorkspace() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

FftWorkspace& fft_workspace() {
  thread_local FftWorkspace ws;
  return ws;
}

double phi_at(const DispersionModel& model, const CrystalSpec& crystal, double omega_s) {
  return phase_mismatch(model, omega_s, crystal.temperature_C, crystal).Phi;
}

struct PanelNodes {
  std::vector<double> omega, weight, phi;
};

// Gauss-Legendre panels on [omega_p/2, omega_hi] with |Delta Phi| <= phase_step per panel.
PanelNodes half_window_nodes(const DispersionModel& model, const CrystalSpec& crystal, double omega_hi,
                             double phase_step, int nodes, double max_width) {
  const quad::Rule& rule = quad::gauss_legendre(nodes);
  PanelNodes out;
  double a = crystal.pump_omega() / 2;
  double phi_a = phi_at(model, crystal, a);
  while (a < omega_hi) {
    double w = max_width;
    double b, phi_b;
    for (;;) {
      b = std::min(a + w, omega_hi);
      phi_b = phi_at(model, crystal, b);
      if (std::abs(phi_b - phi_a) <= phase_step) break;
      w *= 0.5;
    }
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int j = 0; j < nodes; ++j) {
      const double om = mid + half * rule.nodes[j];
      out.omega.push_back(om);
      out.weight.push_back(half * rule.weights[j]);
      out.phi.push_back(phi_at(model, crystal, om));
    }
    a = b;
    phi_a = phi_b;
  }
  return out;
}

// |C|^2 at one frequency with the requested method.
double probability(const DispersionModel& model, const ModeSpec& mode,
                   const std::variant<WaistConfig, FocalConfig>& geometry, const CrystalSpec& crystal, Method method,
                   double omega_s, const QuadratureSettings& quad, bool& converged) {
  Amplitude a;
  switch (method) {
    case Method::FullClosedForm:
      a = coincidence_full(model, mode, std::get<WaistConfig>(geometry), omega_s, crystal, quad);
      break;
    case Method::DegenerateApprox:
      a = coincidence_degenerate(model, mode, std::get<FocalConfig>(geometry), omega_s, crystal, quad);
      break;
    case Method::QuadraticKz:
      a = coincidence_quadratic_kz(model, mode, std::get<FocalConfig>(geometry), omega_s, crystal, quad);
      break;
    case Method::NumericOracle: {
      const auto& w = std::get<WaistConfig>(geometry);
      a = coincidence_oracle(model, mode.l, -mode.l, mode.n_s, mode.n_i, w, omega_s, crystal);
      break;
    }
  }
  if (!a.converged) converged = false;
  return std::norm(a.value);
}

}  // namespace

void FrequencyWindow::validate() const {
  if (!(omega_r_lo > 0.0 && omega_r_lo < 1.0 && omega_r_hi > 1.0 && omega_r_hi < 2.0))
    throw ContractViolation("frequency window must satisfy 0 < omega_r_lo < 1 < omega_r_hi < 2");
  if (std::abs(omega_r_lo + omega_r_hi - 2.0) > 1e-12)
    throw ContractViolation("frequency window must be symmetric about omega_r = 1");
}

ResolvedWindow resolve_window(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& w) {
  w.validate();
  const auto [lam_min_um, lam_max_um] = model.lambda_range_um();
  const double lp_um = crystal.pump_wavelength_m * 1e6;
  const double r_min = 2.0 * lp_um / lam_max_um;  // longest allowed wavelength
  const double r_max = 2.0 * lp_um / lam_min_um;
  const double want = 1.0 - w.omega_r_lo;
  const double half = std::min({want, 1.0 - r_min, r_max - 1.0});
  const double omega_c = crystal.pump_omega() / 2;
  return {omega_c * (1.0 - half), omega_c * (1.0 + half), half < want};
}

const char* normalization_name(Normalization n) { return n == Normalization::GlobalMax ? "global-max" : "raw"; }

const char* route_name(RateRoute r) {
  switch (r) {
    case RateRoute::DirectFrequencyIntegral: return "direct";
    case RateRoute::PhaseKernel: return "kernel";
    case RateRoute::FullFrequencyGrid: return "full-grid";
  }
  return "unknown";
}

void SpectrumGrid::validate() const {
  if (points < 2) throw ContractViolation("spectrum grid needs at least 2 points");
  if (!(omega_r_lo > 0.0 && omega_r_hi > omega_r_lo && omega_r_hi < 2.0))
    throw ContractViolation("spectrum grid must satisfy 0 < omega_r_lo < omega_r_hi < 2");
}

double SpectrumGrid::at(int i) const {
  if (i == points - 1) return omega_r_hi;
  return omega_r_lo + (omega_r_hi - omega_r_lo) * i / (points - 1);
}

SpectrumResult spectrum(const DispersionModel& model, const ModeSpec& mode,
                        const std::variant<WaistConfig, FocalConfig>& geometry, const CrystalSpec& crystal,
                        Method method, const SpectrumGrid& grid, Normalization norm, const QuadratureSettings& quad,
                        int threads) {
  grid.validate();
  quad.validate();
  AmplitudeRequest probe{mode, geometry, crystal.pump_omega() / 2, crystal, method};
  probe.validate();
  SpectrumResult out;
  out.method = method;
  out.normalization = norm;
  out.omega_r.resize(grid.points);
  out.probability.resize(grid.points);
  std::vector<char> ok(grid.points, 1);
  parallel_for(grid.points, threads, [&](int i) {
    const double r = grid.at(i);
    out.omega_r[i] = r;
    bool conv = true;
    out.probability[i] = probability(model, mode, geometry, crystal, method, omega_from_r(r, crystal), quad, conv);
    ok[i] = conv;
  });
  out.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  out.raw_max = *std::max_element(out.probability.begin(), out.probability.end());
  if (norm == Normalization::GlobalMax && out.raw_max > 0.0)
    for (double& p : out.probability) p /= out.raw_max;
  return out;
}

SpectrumResult spectrum(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                        const CrystalSpec& crystal, const SpectrumGrid& grid, Normalization norm,
                        const QuadratureSettings& quad, int threads) {
  return spectrum(model, mode, std::variant<WaistConfig, FocalConfig>(focal), crystal, Method::DegenerateApprox, grid,
                  norm, quad, threads);
}

double peak_omega_r(const SpectrumResult& s) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(s.omega_r.size()); ++i) {
    if (s.omega_r[i] < 1.0) continue;
    if (best < 0 || s.probability[i] > s.probability[best]) best = i;
  }
  if (best < 0) throw ContractViolation("peak_omega_r: spectrum has no points with omega_r >= 1");
  // Vertex of the parabola through the best sample and its neighbours.
  if (best == 0 || best + 1 >= static_cast<int>(s.omega_r.size()) || s.omega_r[best - 1] < 1.0)
    return s.omega_r[best];
  const double y0 = s.probability[best - 1], y1 = s.probability[best], y2 = s.probability[best + 1];
  const double den = y0 - 2.0 * y1 + y2;
  if (!(den < 0.0)) return s.omega_r[best];
  const double h = s.omega_r[best + 1] - s.omega_r[best];
  return s.omega_r[best] + 0.5 * h * (y0 - y2) / den;
}

// ---------------------------------------------------------------- Q kernel

QTable::QTable(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window)
    : crystal_(crystal), window_(resolve_window(model, crystal, window)) {
  crystal.validate();
  k_p_ = wavenumber(model, crystal.pump_omega(), crystal.temperature_C);
  // Lag 2 doubles the phase, so 1.5 rad per panel keeps the worst panel at 3 rad.
  const PanelNodes nodes = half_window_nodes(model, crystal, window_.omega_hi, 1.5, 10,
                                             2e-3 * crystal.pump_omega() / 2);
  omega_nodes_ = static_cast<int>(nodes.omega.size());
  q_.assign(kHalf + 1, {0.0, 0.0});
  for (int n = 0; n < omega_nodes_; ++n) {
    const std::complex<double> rot = std::polar(1.0, nodes.phi[n] * kStep);
    std::complex<double> z(2.0 * nodes.weight[n], 0.0);  // both halves of the symmetric window
    for (int k = 0; k <= kHalf; ++k) {
      q_[k] += z;
      z *= rot;
    }
  }
  q_[0] = {q_[0].real(), 0.0};

  u_.resize(kGrid);
  for (int i = 0; i < kGrid; ++i) u_[i] = (i == kGrid - 1) ? 1.0 : -1.0 + i * kStep;
  wu_ = quad::uniform_weights(kGrid, kStep);

  // Spectrum of the Hermitian circulant lag array; real up to rounding.
  fftw_complex* buf = fftw_alloc_complex(kFft);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(kFft, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int m = 0; m < kFft; ++m) buf[m][0] = buf[m][1] = 0.0;
  for (int k = 0; k <= kHalf; ++k) {
    buf[k][0] = q_[k].real();
    buf[k][1] = q_[k].imag();
    if (k > 0) {
      buf[kFft - k][0] = q_[k].real();
      buf[kFft - k][1] = -q_[k].imag();
    }
  }
  fftw_execute(plan);
  qhat_.resize(kFft);
  for (int m = 0; m < kFft; ++m) qhat_[m] = buf[m][0];
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

std::complex<double> QTable::node(int k) const {
  if (k < -kHalf || k > kHalf) throw ContractViolation("QTable::node: lag index out of range");
  return k >= 0 ? q_[k] : std::conj(q_[-k]);
}

std::complex<double> QTable::at(double delta_u) const {
  if (!(std::abs(delta_u) <= 2.0)) throw ContractViolation("q_kernel: |delta_u| must be <= 2");
  const double x = delta_u / kStep;
  int k0 = static_cast<int>(std::floor(x)) - 1;  // stencil k0 .. k0+3
  k0 = std::clamp(k0, -kHalf, kHalf - 3);
  std::complex<double> sum{};
  for (int j = 0; j < 4; ++j) {
    double l = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != j) l *= (x - (k0 + m)) / static_cast<double>(j - m);
    sum += l * node(k0 + j);
  }
  return sum;
}

std::complex<double> q_kernel_direct(const DispersionModel& model, const CrystalSpec& crystal,
                                     const FrequencyWindow& window, double delta_u) {
  if (!(std::abs(delta_u) <= 2.0)) throw ContractViolation("q_kernel: |delta_u| must be <= 2");
  const ResolvedWindow w = resolve_window(model, crystal, window);
  // Finer panels and a different rule than the table, so the two are not the same sum.
  const PanelNodes nodes = half_window_nodes(model, crystal, w.omega_hi, 0.5, 16, 1e-3 * crystal.pump_omega() / 2);
  std::complex<double> sum{};
  for (std::size_t n = 0; n < nodes.omega.size(); ++n) sum += nodes.weight[n] * std::polar(1.0, nodes.phi[n] * delta_u);
  return 2.0 * sum;
}

RateResult pair_rate_kernel(const QTable& table, const ModeSpec& mode, const FocalConfig& focal) {
  const DegenerateProfile h(mode, focal, table.crystal().length_m, table.k_p());
  FftWorkspace& ws = fft_workspace();
  const auto& u = table.u_grid();
  const auto& wu = table.u_weights();
  for (int i = 0; i < QTable::kFft; ++i) ws.buf[i][0] = ws.buf[i][1] = 0.0;
  for (int i = 0; i < QTable::kGrid; ++i) {
    const std::complex<double> a = wu[i] * h(u[i]);
    ws.buf[i][0] = a.real();
    ws.buf[i][1] = a.imag();
  }
  fftw_execute_dft(ws.plan, ws.buf, ws.buf);
  const auto& qhat = table.spectrum();
  double sum = 0.0;
  for (int m = 0; m < QTable::kFft; ++m) sum += qhat[m] * (ws.buf[m][0] * ws.buf[m][0] + ws.buf[m][1] * ws.buf[m][1]);
  RateResult r;
  r.value = std::max(0.0, sum / QTable::kFft);
  r.route = RateRoute::PhaseKernel;
  r.converged = true;
  r.evaluations = QTable::kGrid;
  return r;
}

double pair_rate_kernel_bruteforce(const QTable& table, const ModeSpec& mode, const FocalConfig& focal) {
  const DegenerateProfile h(mode, focal, table.crystal().length_m, table.k_p());
  const auto& u = table.u_grid();
  const auto& wu = table.u_weights();
  std::vector<std::complex<double>> a(QTable::kGrid);
  for (int i = 0; i < QTable::kGrid; ++i) a[i] = wu[i] * h(u[i]);
  std::complex<double> sum{};
  for (int i = 0; i < QTable::kGrid; ++i)
    for (int j = 0; j < QTable::kGrid; ++j) sum += a[i] * std::conj(a[j]) * table.node(i - j);
  return sum.real();
}

RateResult pair_rate_direct(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                            const CrystalSpec& crystal, const FrequencyWindow& window,
                            const DirectRateSettings& settings) {
  const ResolvedWindow w = resolve_window(model, crystal, window);
  const double kp = wavenumber(model, crystal.pump_omega(), crystal.temperature_C);
  const DegenerateProfile h(mode, focal, crystal.length_m, kp);
  const LegendreSeries series =
      LegendreSeries::fit_adaptive([&](double u) { return h(u); }, settings.legendre_tolerance);
  std::vector<double> scratch(series.size());
  double p_max = 0.0;
  auto P = [&](double omega) {
    const double p = std::norm(series.transform(phi_at(model, crystal, omega), scratch.data()));
    p_max = std::max(p_max, p);
    return p;
  };
  const double omega_c = crystal.pump_omega() / 2;
  // P is symmetric about omega_p / 2 in this approximation: integrate the upper half.
  const auto est = quad::adaptive_gk(P, omega_c, w.omega_hi, settings.rel_tolerance, 0.0, 64, settings.max_intervals);
  RateResult r;
  r.route = RateRoute::DirectFrequencyIntegral;
  r.value = 2.0 * est.value;
  r.error_estimate = 2.0 * est.error;
  r.converged = est.converged;
  r.evaluations = est.evaluations;
  r.window_clipped = P(w.omega_hi) > kClipThreshold * p_max;
  return r;
}

// ---------------------------------------------------------------- full route

FullRateEngine::FullRateEngine(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window)
    : FullRateEngine(model, crystal, window, Settings{}) {}

FullRateEngine::FullRateEngine(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window,
                               const Settings& settings)
    : model_(&model), crystal_(crystal), window_(resolve_window(model, crystal, window)), settings_(settings) {
  crystal.validate();
  if (settings.blocks < 1) throw ContractViolation("FullRateEngine: blocks must be >= 1");
  k_p_ = wavenumber(model, crystal.pump_omega(), crystal.temperature_C);
  const double omega_p = crystal.pump_omega();
  const PanelNodes half = half_window_nodes(model, crystal, window_.omega_hi, settings.phase_step,
                                            settings.nodes_per_panel, settings.max_panel_width_r * omega_p / 2);
  // Interleave each upper node with its mirror image below omega_p / 2.
  for (std::size_t n = 0; n < half.omega.size(); ++n) {
    omega_.push_back(half.omega[n]);
    omega_.push_back(omega_p - half.omega[n]);
    weight_.push_back(half.weight[n]);
    weight_.push_back(half.weight[n]);
    phi_.push_back(half.phi[n]);
    phi_.push_back(half.phi[n]);
  }
  const int B = settings.blocks;
  const double lo = window_.omega_lo, hi = window_.omega_hi;
  const double width = (hi - lo) / B;
  block_nodes_.resize(B);
  for (int b = 0; b < B; ++b) {
    const double c = lo + (b + 0.5) * width;
    for (int j = 0; j < 4; ++j)
      block_nodes_[b][j] = c + 0.5 * width * std::cos(std::numbers::pi * (2.0 * j + 1.0) / 8.0);
  }
  block_of_.resize(omega_.size());
  lagrange_.resize(omega_.size());
  for (std::size_t n = 0; n < omega_.size(); ++n) {
    const int b = std::clamp(static_cast<int>((omega_[n] - lo) / width), 0, B - 1);
    block_of_[n] = b;
    for (int j = 0; j < 4; ++j) {
      double l = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != j) l *= (omega_[n] - block_nodes_[b][m]) / (block_nodes_[b][j] - block_nodes_[b][m]);
      lagrange_[n][j] = l;
    }
  }
}

RateResult FullRateEngine::rate(const ModeSpec& mode, const WaistConfig& waists) const {
  if (mode.n_s == mode.n_i && waists.w_s > waists.w_i) return rate_raw(mode, {waists.w_p, waists.w_i, waists.w_s});
  return rate_raw(mode, waists);
}

RateResult FullRateEngine::rate_raw(const ModeSpec& mode, const WaistConfig& waists) const {
  mode.validate();
  waists.validate();
  const DispersionModel& model = *model_;
  const double T = crystal_.temperature_C;
  const double L = crystal_.length_m;
  const double omega_p = crystal_.pump_omega();
  auto profile_at = [&](double omega) {
    return FullProfile(mode, waists, L, k_p_, wavenumber(model, omega, T), wavenumber(model, omega_p - omega, T));
  };
  // Term count from the most demanding of the centre and both window edges.
  int terms = 0;
  for (double om : {omega_p / 2, window_.omega_lo, window_.omega_hi}) {
    const FullProfile prof = profile_at(om);
    terms = std::max(terms, LegendreSeries::fit_adaptive([&](double u) { return prof(u); },
                                                         settings_.legendre_tolerance).size());
  }
  const int B = settings_.blocks;
  std::vector<std::vector<std::complex<double>>> coeff(4 * B);
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < 4; ++j) {
      const FullProfile prof = profile_at(block_nodes_[b][j]);
      coeff[4 * b + j] = LegendreSeries::fit([&](double u) { return prof(u); }, terms).coefficients();
    }
  std::vector<std::complex<double>> c(terms);
  std::vector<double> bessel(terms);
  double sum = 0.0, p_max = 0.0, p_edge = 0.0;
  for (std::size_t n = 0; n < omega_.size(); n += 2) {
    double pair = 0.0;
    for (std::size_t m = n; m < n + 2; ++m) {
      const int b = block_of_[m];
      const auto& l = lagrange_[m];
      const auto& c0 = coeff[4 * b];
      const auto& c1 = coeff[4 * b + 1];
      const auto& c2 = coeff[4 * b + 2];
      const auto& c3 = coeff[4 * b + 3];
      for (int k = 0; k < terms; ++k) c[k] = l[0] * c0[k] + l[1] * c1[k] + l[2] * c2[k] + l[3] * c3[k];
      spherical_bessel_sequence(terms, phi_[m], bessel.data());
      const double p = std::norm(legendre_transform_sum(c.data(), bessel.data(), terms));
      p_max = std::max(p_max, p);
      if (n + 2 == omega_.size()) p_edge = std::max(p_edge, p);
      pair += p;
    }
    sum += weight_[n] * pair;
  }
  RateResult r;
  r.value = sum;
  r.route = RateRoute::FullFrequencyGrid;
  r.converged = true;
  r.evaluations = static_cast<int>(omega_.size());
  r.window_clipped = p_edge > kClipThreshold * p_max;
  return r;
}

RateResult pair_rate_full_direct(const DispersionModel& model, const ModeSpec& mode, const WaistConfig& waists,
                                 const CrystalSpec& crystal, const FrequencyWindow& window, double rel_tolerance) {
  mode.validate();
  waists.validate();
  const ResolvedWindow w = resolve_window(model, crystal, window);
  const double T = crystal.temperature_C;
  const double omega_p = crystal.pump_omega();
  const double kp = wavenumber(model, omega_p, T);
  double p_max = 0.0;
  auto P = [&](double omega) {
    const FullProfile prof(mode, waists, crystal.length_m, kp, wavenumber(model, omega, T),
                           wavenumber(model, omega_p - omega, T));
    const LegendreSeries s = LegendreSeries::fit_adaptive([&](double u) { return prof(u); }, 1e-12);
    const double p = std::norm(s.transform(phi_at(model, crystal, omega)));
    p_max = std::max(p_max, p);
    return p;
  };
  const double omega_c = omega_p / 2;
  const auto upper = quad::adaptive_gk(P, omega_c, w.omega_hi, rel_tolerance, 0.0, 64, 400000);
  const auto lower = quad::adaptive_gk(P, w.omega_lo, omega_c, rel_tolerance, 0.0, 64, 400000);
  RateResult r;
  r.route = RateRoute::DirectFrequencyIntegral;
  r.value = upper.value + lower.value;
  r.error_estimate = upper.error + lower.error;
  r.converged = upper.converged && lower.converged;
  r.evaluations = upper.evaluations + lower.evaluations;
  r.window_clipped = std::max(P(w.omega_lo), P(w.omega_hi)) > kClipThreshold * p_max;
  return r;
}

// ---------------------------------------------------------------- waist surface

void WaistSurfaceSpec::validate() const {
  mode.validate();
  if (!(ws_min > 0.0 && ws_max > ws_min && wi_min > 0.0 && wi_max > wi_min))
    throw ContractViolation("waist ranges must satisfy 0 < min < max");
  if (points_s < 2 || points_i < 2) throw ContractViolation("waist surface needs at least 2 points per axis");
  if (fixed_w_p && !(*fixed_w_p > 0.0)) throw ContractViolation("fixed pump waist must be > 0");
  if (!(wp_min > 0.0 && wp_max > wp_min)) throw ContractViolation("pump waist range must satisfy 0 < min < max");
}

namespace {

std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = (i == 0) ? lo : (i == n - 1 ? hi : lo * std::pow(hi / lo, double(i) / (n - 1)));
  return v;
}

}  // namespace

WaistSurfaceResult waist_surface(const FullRateEngine& engine, const WaistSurfaceSpec& spec, int threads) {
  spec.validate();
  WaistSurfaceResult out;
  out.w_s = log_axis(spec.ws_min, spec.ws_max, spec.points_s);
  out.w_i = log_axis(spec.wi_min, spec.wi_max, spec.points_i);
  const int ni = spec.points_i;
  const int total = spec.points_s * ni;
  out.rate.assign(total, 0.0);
  out.w_p.assign(total, 0.0);
  LogSearchSettings wp_search;
  wp_search.coarse_points = 9;
  wp_search.rel_tolerance = 1e-3;

  auto best_over_wp = [&](double ws, double wi) -> std::pair<double, double> {
    if (spec.fixed_w_p) return {*spec.fixed_w_p, engine.rate(spec.mode, {*spec.fixed_w_p, ws, wi}).value};
    const Maximum1D m = maximize_log([&](double wp) { return engine.rate(spec.mode, {wp, ws, wi}).value; },
                                     spec.wp_min, spec.wp_max, wp_search);
    return {m.x, m.value};
  };

  parallel_for(total, threads, [&](int idx) {
    const int is = idx / ni, ii = idx % ni;
    const auto [wp, r] = best_over_wp(out.w_s[is], out.w_i[ii]);
    out.w_p[idx] = wp;
    out.rate[idx] = r;
  });

  int ib = 0;
  for (int k = 1; k < total; ++k)
    if (out.rate[k] > out.rate[ib]) ib = k;
  double ws = out.w_s[ib / ni], wi = out.w_i[ib % ni], wp = out.w_p[ib], best = out.rate[ib];

  if (spec.refine) {
    // Joint Nelder-Mead over log waists (w_p included unless it is fixed),
    // started from the grid argmax with one grid cell as the initial step.
    gsl_set_error_handler_off();  // report through return codes instead of abort()
    const bool free_wp = !spec.fixed_w_p;
    const int dim = free_wp ? 3 : 2;
    struct Ctx {
      const FullRateEngine* engine;
      const WaistSurfaceSpec* spec;
      std::exception_ptr error;
    } ctx{&engine, &spec, nullptr};
    // Exceptions must not cross the C library's frames: park them and stop.
    auto objective = [](const gsl_vector* x, void* p) -> double {
      auto* c = static_cast<Ctx*>(p);
      if (c->error) return GSL_POSINF;
      try {
        const double ws_ = std::exp(gsl_vector_get(x, 0)), wi_ = std::exp(gsl_vector_get(x, 1));
        const double wp_ = x->size == 3 ? std::exp(gsl_vector_get(x, 2)) : *c->spec->fixed_w_p;
        return -c->engine->rate(c->spec->mode, {wp_, ws_, wi_}).value;
      } catch (...) {
        c->error = std::current_exception();
        return GSL_POSINF;
      }
    };
    gsl_multimin_function fn{objective, static_cast<std::size_t>(dim), &ctx};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(dim), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(dim), gsl_vector_free);
    gsl_vector_set(x.get(), 0, std::log(ws));
    gsl_vector_set(x.get(), 1, std::log(wi));
    gsl_vector_set(step.get(), 0, std::log(spec.ws_max / spec.ws_min) / (spec.points_s - 1));
    gsl_vector_set(step.get(), 1, std::log(spec.wi_max / spec.wi_min) / (spec.points_i - 1));
    if (free_wp) {
      gsl_vector_set(x.get(), 2, std::log(wp));
      gsl_vector_set(step.get(), 2, 0.25);
    }
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> nm(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), step.get());
    for (int it = 0; it < 400; ++it) {
      if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS || ctx.error) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm.get()), 1e-4) == GSL_SUCCESS) break;
    }
    if (ctx.error) std::rethrow_exception(ctx.error);
    const double found = -gsl_multimin_fminimizer_minimum(nm.get());
    if (found > best) {
      const gsl_vector* xm = gsl_multimin_fminimizer_x(nm.get());
      best = found;
      ws = std::exp(gsl_vector_get(xm, 0));
      wi = std::exp(gsl_vector_get(xm, 1));
      if (free_wp) wp = std::exp(gsl_vector_get(xm, 2));
    }
  }
  out.ws_opt = ws;
  out.wi_opt = wi;
  out.wp_opt = wp;
  out.rate_max = std::max(best, out.rate[ib]);
  out.normalized.resize(total);
  for (int k = 0; k < total; ++k) out.normalized[k] = out.rate[k] / out.rate_max;
  return out;
}

}  // namespace lgspdc
