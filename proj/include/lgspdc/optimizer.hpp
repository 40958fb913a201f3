#pragma once

// Focal-parameter optimization of the degenerate-approximation pair rate:
// ridge f_si^opt(f_p), per-f_p maximum, global summit, mode tables, cross-mode
// penalties and temperature scans.
//
// The search routines take the rate as a plain function of (f_p, f_si) so the
// same code runs on the phase-kernel route, on a scaled copy of it (argmax
// invariance checks) or on any other surrogate.

#include <functional>
#include <vector>

#include "lgspdc/dispersion.hpp"
#include "lgspdc/lgmodes.hpp"
#include "lgspdc/rates.hpp"
#include "lgspdc/search.hpp"

namespace lgspdc {

using RateFn = std::function<double(double f_p, double f_si)>;

struct FocalBounds {
  double lo;
  double hi;
};

struct OptimizerSettings {
  FocalBounds f_p{0.05, 10.0};
  FocalBounds f_si{0.05, 20.0};
  int fsi_coarse_points = 25;
  int fp_coarse_points = 17;
  double rel_tolerance = 1e-3;
  void validate() const;
};

/// Kernel-route rate function for one mode at the table's temperature.
RateFn kernel_rate_fn(const QTable& table, const ModeSpec& mode);

struct RidgePoint {
  double f_p = 0;
  double f_si_opt = 0;
  double rate_max = 0;
  bool bimodal = false;
  int evaluations = 0;
};

struct Summit {
  double f_p_opt = 0;
  double f_si_opt = 0;
  double rate_max = 0;
};

/// Coarse log scan of f_si followed by golden-section refinement.
/// Throws BoundaryHit when the optimum stays on a bound after one 4x widening.
RidgePoint opt_fsi_given_fp(const RateFn& rate, double f_p, const OptimizerSettings& s);
RidgePoint opt_fsi_given_fp(const QTable& table, const ModeSpec& mode, double f_p, const OptimizerSettings& s = {});

/// Maximum over f_p of the ridge value.
Summit find_summit(const RateFn& rate, const OptimizerSettings& s);

struct SurfaceGrid {
  int f_p_points = 16;
  int f_si_points = 25;
  void validate() const;
};

struct RateSurface {
  std::vector<double> f_p_grid;
  std::vector<double> f_si_grid;
  std::vector<double> values;  // row-major [i_fp * f_si_points + j_fsi]
  std::vector<RidgePoint> ridge;
  Summit summit;
  double value(int i_fp, int j_fsi) const { return values[i_fp * f_si_grid.size() + j_fsi]; }
};

RateSurface rate_surface(const RateFn& rate, const SurfaceGrid& grid, const OptimizerSettings& s, int threads = 1);
RateSurface rate_surface(const QTable& table, const ModeSpec& mode, const SurfaceGrid& grid = {},
                         const OptimizerSettings& s = {}, int threads = 1);

struct ModeTableEntry {
  int l = 0;
  int n_si = 0;
  Summit summit;
  bool diagonal() const { return l == n_si; }
};

struct ModeTable {
  int l_max = 0;
  int n_max = 0;
  std::vector<ModeTableEntry> entries;  // ordered by (l, n_si)
  const ModeTableEntry& at(int l, int n_si) const;
};

ModeTable mode_table(const std::function<RateFn(const ModeSpec&)>& rate_for, int l_max, int n_max,
                     const OptimizerSettings& s, int threads = 1, int index_cap = kDefaultIndexCap);
ModeTable mode_table(const QTable& table, int l_max, int n_max, const OptimizerSettings& s = {}, int threads = 1,
                     int index_cap = kDefaultIndexCap);

/// R_c of mode b at mode a's optimal f_p (f_si re-optimized) over R_c^max of b.
double crossmode_penalty(const RateFn& rate_a, const RateFn& rate_b, const OptimizerSettings& s);
double crossmode_penalty(const QTable& table, const ModeSpec& a, const ModeSpec& b, const OptimizerSettings& s = {});

struct TempScanRow {
  double temperature_C = 0;
  double f_si_opt = 0;
  double rate_max = 0;
};

std::vector<TempScanRow> temp_scan(const DispersionModel& model, const CrystalSpec& crystal, const ModeSpec& mode,
                                   double f_p, const std::vector<double>& temperatures,
                                   const FrequencyWindow& window = {}, const OptimizerSettings& s = {},
                                   int threads = 1);

}  // namespace lgspdc
