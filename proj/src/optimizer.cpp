#include "lgspdc/optimizer.hpp"

#include <algorithm>
#include <memory>

#include "lgspdc/errors.hpp"
#include "lgspdc/parallel.hpp"

namespace lgspdc {

void OptimizerSettings::validate() const {
  if (!(f_p.lo > 0.0 && f_p.hi > f_p.lo)) throw ContractViolation("f_p bounds must satisfy 0 < lo < hi");
  if (!(f_si.lo > 0.0 && f_si.hi > f_si.lo)) throw ContractViolation("f_si bounds must satisfy 0 < lo < hi");
  if (fsi_coarse_points < 3 || fp_coarse_points < 3) throw ContractViolation("coarse scans need at least 3 points");
  if (!(rel_tolerance > 0.0 && rel_tolerance < 0.1)) throw ContractViolation("rel_tolerance must be in (0, 0.1)");
}

void SurfaceGrid::validate() const {
  if (f_p_points < 8 || f_si_points < 8) throw ContractViolation("rate surface grids must be at least 8 x 8");
}

RateFn kernel_rate_fn(const QTable& table, const ModeSpec& mode) {
  return [&table, mode](double f_p, double f_si) { return pair_rate_kernel(table, mode, {f_p, f_si}).value; };
}

RidgePoint opt_fsi_given_fp(const RateFn& rate, double f_p, const OptimizerSettings& s) {
  s.validate();
  LogSearchSettings ls;
  ls.coarse_points = s.fsi_coarse_points;
  ls.rel_tolerance = s.rel_tolerance;
  const Maximum1D m = maximize_log_widening([&](double f_si) { return rate(f_p, f_si); }, s.f_si.lo, s.f_si.hi, ls,
                                            "f_si optimum at f_p = " + std::to_string(f_p));
  return {f_p, m.x, m.value, m.bimodal, m.evaluations};
}

RidgePoint opt_fsi_given_fp(const QTable& table, const ModeSpec& mode, double f_p, const OptimizerSettings& s) {
  return opt_fsi_given_fp(kernel_rate_fn(table, mode), f_p, s);
}

Summit find_summit(const RateFn& rate, const OptimizerSettings& s) {
  s.validate();
  LogSearchSettings ls;
  ls.coarse_points = s.fp_coarse_points;
  ls.rel_tolerance = s.rel_tolerance;
  const Maximum1D m = maximize_log_widening([&](double f_p) { return opt_fsi_given_fp(rate, f_p, s).rate_max; },
                                            s.f_p.lo, s.f_p.hi, ls, "f_p optimum");
  const RidgePoint at = opt_fsi_given_fp(rate, m.x, s);
  return {m.x, at.f_si_opt, at.rate_max};
}

RateSurface rate_surface(const RateFn& rate, const SurfaceGrid& grid, const OptimizerSettings& s, int threads) {
  grid.validate();
  s.validate();
  RateSurface out;
  out.f_p_grid = log_grid(s.f_p.lo, s.f_p.hi, grid.f_p_points);
  out.f_si_grid = log_grid(s.f_si.lo, s.f_si.hi, grid.f_si_points);
  const int nfp = grid.f_p_points, nfs = grid.f_si_points;
  out.values.assign(static_cast<std::size_t>(nfp) * nfs, 0.0);
  out.ridge.resize(nfp);
  parallel_for(nfp, threads, [&](int i) {
    for (int j = 0; j < nfs; ++j) out.values[i * nfs + j] = rate(out.f_p_grid[i], out.f_si_grid[j]);
    out.ridge[i] = opt_fsi_given_fp(rate, out.f_p_grid[i], s);
  });
  out.summit = find_summit(rate, s);
  // The refined summit must dominate every ridge sample; keep the better one on a tolerance-level miss.
  for (const RidgePoint& r : out.ridge)
    if (r.rate_max > out.summit.rate_max) out.summit = {r.f_p, r.f_si_opt, r.rate_max};
  return out;
}

RateSurface rate_surface(const QTable& table, const ModeSpec& mode, const SurfaceGrid& grid,
                         const OptimizerSettings& s, int threads) {
  return rate_surface(kernel_rate_fn(table, mode), grid, s, threads);
}

const ModeTableEntry& ModeTable::at(int l, int n_si) const {
  for (const auto& e : entries)
    if (e.l == l && e.n_si == n_si) return e;
  throw ContractViolation("mode table has no entry (" + std::to_string(l) + ", " + std::to_string(n_si) + ")");
}

ModeTable mode_table(const std::function<RateFn(const ModeSpec&)>& rate_for, int l_max, int n_max,
                     const OptimizerSettings& s, int threads, int index_cap) {
  if (l_max < 0 || n_max < 0) throw ContractViolation("mode table bounds must be >= 0");
  if (l_max > index_cap || n_max > index_cap)
    throw ContractViolation("mode table bounds exceed the index cap " + std::to_string(index_cap));
  ModeTable out;
  out.l_max = l_max;
  out.n_max = n_max;
  for (int l = 0; l <= l_max; ++l)
    for (int n = 0; n <= n_max; ++n) out.entries.push_back({l, n, {}});
  parallel_for(static_cast<int>(out.entries.size()), threads, [&](int k) {
    auto& e = out.entries[k];
    e.summit = find_summit(rate_for({e.l, e.n_si, e.n_si}), s);
  });
  return out;
}

ModeTable mode_table(const QTable& table, int l_max, int n_max, const OptimizerSettings& s, int threads,
                     int index_cap) {
  return mode_table([&table](const ModeSpec& m) { return kernel_rate_fn(table, m); }, l_max, n_max, s, threads,
                    index_cap);
}

double crossmode_penalty(const RateFn& rate_a, const RateFn& rate_b, const OptimizerSettings& s) {
  const Summit a = find_summit(rate_a, s);
  const Summit b = find_summit(rate_b, s);
  const double at_a = opt_fsi_given_fp(rate_b, a.f_p_opt, s).rate_max;
  return std::clamp(at_a / b.rate_max, 0.0, 1.0);
}

double crossmode_penalty(const QTable& table, const ModeSpec& a, const ModeSpec& b, const OptimizerSettings& s) {
  return crossmode_penalty(kernel_rate_fn(table, a), kernel_rate_fn(table, b), s);
}

std::vector<TempScanRow> temp_scan(const DispersionModel& model, const CrystalSpec& crystal, const ModeSpec& mode,
                                   double f_p, const std::vector<double>& temperatures, const FrequencyWindow& window,
                                   const OptimizerSettings& s, int threads) {
  for (double T : temperatures) model.check_temperature(T);
  std::vector<TempScanRow> rows(temperatures.size());
  parallel_for(static_cast<int>(temperatures.size()), threads, [&](int k) {
    CrystalSpec c = crystal;
    c.temperature_C = temperatures[k];
    const QTable table(model, c, window);
    const RidgePoint r = opt_fsi_given_fp(table, mode, f_p, s);
    rows[k] = {temperatures[k], r.f_si_opt, r.rate_max};
  });
  return rows;
}

}  // namespace lgspdc
