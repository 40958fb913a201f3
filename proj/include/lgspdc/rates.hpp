#pragma once

// Coincidence spectra and the pair collection rate
//   R_c = int d omega_s |C(omega_s)|^2
// over a symmetric window in omega_r = 2 omega / omega_p.
//
// Degenerate-approximation rates have two independent routes:
//   direct  adaptive Gauss-Kronrod over omega_s; each |C|^2 from a Legendre
//           expansion of the u-profile (see legendre_series.hpp)
//   kernel  R_c = sum_{i,j} a_i conj(a_j) Q((i - j) h) on a uniform u grid with
//           a_i = w_i H(u_i); Q is tabulated once per temperature at exactly the
//           lags the grid needs, and the double sum is done with one FFT.
// Full closed-form rates (waist surfaces) use a fixed Phi-resolving omega grid
// with the profile's Legendre coefficients interpolated across omega blocks.

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/dispersion.hpp"
#include "lgspdc/lgmodes.hpp"

namespace lgspdc {

struct FrequencyWindow {
  double omega_r_lo = 0.55;
  double omega_r_hi = 1.45;
  void validate() const;
};

/// Window in rad/s after clipping to the model's wavelength validity. Always
/// symmetric about omega_p / 2.
struct ResolvedWindow {
  double omega_lo;
  double omega_hi;
  bool clipped_to_model;
};

ResolvedWindow resolve_window(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& w);

enum class Normalization { GlobalMax, Raw };
const char* normalization_name(Normalization n);

struct SpectrumGrid {
  double omega_r_lo = 0.7;
  double omega_r_hi = 1.3;
  int points = 2001;
  void validate() const;
  double at(int i) const;
};

struct SpectrumResult {
  std::vector<double> omega_r;
  std::vector<double> probability;
  Normalization normalization = Normalization::GlobalMax;
  Method method = Method::DegenerateApprox;
  double raw_max = 0.0;
  bool converged = true;
};

/// P(omega_r) = |C|^2 on the grid with the requested method. The geometry must
/// match the method (focal parameters for degenerate / quadratic, waists for
/// full / oracle).
SpectrumResult spectrum(const DispersionModel& model, const ModeSpec& mode,
                        const std::variant<WaistConfig, FocalConfig>& geometry, const CrystalSpec& crystal,
                        Method method, const SpectrumGrid& grid, Normalization norm, const QuadratureSettings& quad,
                        int threads = 1);

/// Degenerate-approximation spectrum (the common case).
SpectrumResult spectrum(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                        const CrystalSpec& crystal, const SpectrumGrid& grid = {},
                        Normalization norm = Normalization::GlobalMax, const QuadratureSettings& quad = {},
                        int threads = 1);

/// omega_r of the spectral maximum on the upper half (omega_r >= 1) of a spectrum,
/// refined between grid points by a three-point parabola.
double peak_omega_r(const SpectrumResult& s);

enum class RateRoute { DirectFrequencyIntegral, PhaseKernel, FullFrequencyGrid };
const char* route_name(RateRoute r);

struct RateResult {
  double value = 0.0;
  RateRoute route = RateRoute::PhaseKernel;
  bool converged = true;
  double error_estimate = 0.0;
  bool window_clipped = false;
  int evaluations = 0;
};

/// P at the window edge above this fraction of the largest sampled P sets window_clipped.
inline constexpr double kClipThreshold = 1e-4;

/// Geometry-independent phase kernel Q(Delta u) = int d omega_s exp(i Phi Delta u) at one temperature.
class QTable {
 public:
  static constexpr int kHalf = 2048;              // lags k = -kHalf .. kHalf
  static constexpr int kPoints = 2 * kHalf + 1;   // 4097 tabulated lags
  static constexpr int kGrid = kHalf + 1;         // u grid points for the kernel route
  static constexpr double kStep = 2.0 / kHalf;    // lag spacing == u-grid spacing
  static constexpr int kFft = 8192;

  QTable(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window = {});

  /// Exact tabulated value at lag k * kStep, |k| <= kHalf.
  std::complex<double> node(int k) const;
  /// Cubic (4-point Lagrange) interpolation between tabulated lags; |delta_u| <= 2.
  std::complex<double> at(double delta_u) const;

  double temperature_C() const { return crystal_.temperature_C; }
  const CrystalSpec& crystal() const { return crystal_; }
  const ResolvedWindow& window() const { return window_; }
  double k_p() const { return k_p_; }
  const std::vector<double>& u_grid() const { return u_; }
  const std::vector<double>& u_weights() const { return wu_; }
  /// Real spectrum of the circulant lag array (length kFft), used by the kernel route.
  const std::vector<double>& spectrum() const { return qhat_; }
  int omega_nodes() const { return omega_nodes_; }

 private:
  CrystalSpec crystal_;
  ResolvedWindow window_;
  double k_p_;
  std::vector<std::complex<double>> q_;  // k = 0 .. kHalf
  std::vector<double> u_, wu_, qhat_;
  int omega_nodes_ = 0;
};

/// Q at an arbitrary lag from a fresh omega quadrature (no table, no interpolation).
std::complex<double> q_kernel_direct(const DispersionModel& model, const CrystalSpec& crystal,
                                     const FrequencyWindow& window, double delta_u);
inline std::complex<double> q_kernel(const QTable& table, double delta_u) { return table.at(delta_u); }

RateResult pair_rate_kernel(const QTable& table, const ModeSpec& mode, const FocalConfig& focal);
/// Same double sum evaluated term by term (O(N^2)); reference for the FFT path.
double pair_rate_kernel_bruteforce(const QTable& table, const ModeSpec& mode, const FocalConfig& focal);

struct DirectRateSettings {
  double rel_tolerance = 1e-7;
  double legendre_tolerance = 1e-12;
  int max_intervals = 400000;
};

RateResult pair_rate_direct(const DispersionModel& model, const ModeSpec& mode, const FocalConfig& focal,
                            const CrystalSpec& crystal, const FrequencyWindow& window = {},
                            const DirectRateSettings& settings = {});

/// R_c of the full closed form at fixed waists on a precomputed omega grid.
class FullRateEngine {
 public:
  struct Settings {
    int blocks = 32;                  // omega blocks for coefficient interpolation
    double phase_step = 3.0;          // max |Delta Phi| across one omega panel
    int nodes_per_panel = 10;
    double max_panel_width_r = 2e-3;  // in omega_r
    double legendre_tolerance = 1e-11;
  };
  FullRateEngine(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window = {});
  FullRateEngine(const DispersionModel& model, const CrystalSpec& crystal, const FrequencyWindow& window,
                 const Settings& settings);

  /// With n_s == n_i the waists are put in canonical order first, so
  /// rate(w_s, w_i) and rate(w_i, w_s) are bit-identical.
  RateResult rate(const ModeSpec& mode, const WaistConfig& waists) const;
  /// No canonical reordering (used to test the symmetry itself).
  RateResult rate_raw(const ModeSpec& mode, const WaistConfig& waists) const;
  const CrystalSpec& crystal() const { return crystal_; }
  int omega_nodes() const { return static_cast<int>(omega_.size()); }

 private:
  const DispersionModel* model_;
  CrystalSpec crystal_;
  ResolvedWindow window_;
  Settings settings_;
  double k_p_;
  std::vector<double> omega_, weight_, phi_;
  std::vector<int> block_of_;
  std::vector<std::array<double, 4>> lagrange_;  // interpolation weights per fine node
  std::vector<std::array<double, 4>> block_nodes_;
};

/// Adaptive omega integral of |coincidence_full|^2 (Legendre-evaluated); slow reference.
RateResult pair_rate_full_direct(const DispersionModel& model, const ModeSpec& mode, const WaistConfig& waists,
                                 const CrystalSpec& crystal, const FrequencyWindow& window = {},
                                 double rel_tolerance = 1e-7);

struct WaistSurfaceSpec {
  ModeSpec mode;
  double ws_min = 10e-6, ws_max = 80e-6;
  double wi_min = 10e-6, wi_max = 80e-6;
  int points_s = 15, points_i = 15;
  /// Pump waist held fixed when set; otherwise optimized at every grid point.
  std::optional<double> fixed_w_p;
  double wp_min = 5e-6, wp_max = 200e-6;
  /// Refine the grid argmax jointly over (w_p, w_s, w_i).
  bool refine = true;
  void validate() const;
};

struct WaistSurfaceResult {
  std::vector<double> w_s, w_i;   // axes (m)
  std::vector<double> rate;       // row-major [i_s * points_i + i_i], raw
  std::vector<double> w_p;        // pump waist used at each point
  std::vector<double> normalized; // rate / max
  double ws_opt = 0, wi_opt = 0, wp_opt = 0, rate_max = 0;
  bool all_converged = true;
};

WaistSurfaceResult waist_surface(const FullRateEngine& engine, const WaistSurfaceSpec& spec, int threads = 1);

}  // namespace lgspdc
