#include "lgspdc/search.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lgspdc/errors.hpp"

namespace lgspdc {

namespace {

struct Best {
  double t, value;
};

// Prefer strictly larger values; on exact ties keep the smaller abscissa.
bool better(const Best& a, const Best& b) { return a.value > b.value || (a.value == b.value && a.t < b.t); }

Best golden(const std::function<double(double)>& g, double a, double b, double tol_log, Best seed, int& evals) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = g(c), fd = g(d);
  evals += 2;
  Best best = seed;
  if (better({c, fc}, best)) best = {c, fc};
  if (better({d, fd}, best)) best = {d, fd};
  while (b - a > tol_log) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = g(c);
      if (better({c, fc}, best)) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = g(d);
      if (better({d, fd}, best)) best = {d, fd};
    }
    ++evals;
  }
  return best;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo)) throw ContractViolation("log_grid: need 0 < lo < hi");
  if (n < 2) throw ContractViolation("log_grid: need at least 2 points");
  const double tl = std::log(lo), th = std::log(hi);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = i == 0 ? lo : (i == n - 1 ? hi : std::exp(tl + (th - tl) * i / (n - 1)));
  return x;
}

Maximum1D maximize_log(const std::function<double(double)>& f, double lo, double hi, const LogSearchSettings& s) {
  if (!(lo > 0.0 && hi > lo)) throw ContractViolation("maximize_log: need 0 < lo < hi");
  if (s.coarse_points < 3) throw ContractViolation("maximize_log: need at least 3 coarse points");
  const double tl = std::log(lo), th = std::log(hi);
  const int n = s.coarse_points;
  std::vector<double> t(n), v(n);
  auto g = [&](double tt) { return f(std::exp(tt)); };
  Maximum1D out;
  const std::vector<double> x = log_grid(lo, hi, n);
  for (int i = 0; i < n; ++i) {
    t[i] = (i == n - 1) ? th : tl + (th - tl) * i / (n - 1);
    v[i] = f(x[i]);
  }
  out.evaluations = n;
  int ib = 0;
  for (int i = 1; i < n; ++i)
    if (v[i] > v[ib]) ib = i;
  out.best_coarse_value = v[ib];
  out.at_lower = ib == 0;
  out.at_upper = ib == n - 1;

  // Local maxima of the coarse scan far enough from the global one get their own refinement.
  std::vector<int> starts{ib};
  int second = -1;
  for (int i = 0; i < n; ++i) {
    if (i == ib || std::abs(i - ib) <= s.bimodal_separation) continue;
    const bool left_ok = i == 0 || v[i] > v[i - 1];
    const bool right_ok = i == n - 1 || v[i] >= v[i + 1];
    if (left_ok && right_ok && (second < 0 || v[i] > v[second])) second = i;
  }
  if (second >= 0 && second != 0 && second != n - 1) {
    starts.push_back(second);
    out.bimodal = true;
  }

  const double tol_log = std::log1p(s.rel_tolerance);
  Best best{t[ib], v[ib]};
  for (int i0 : starts) {
    const double a = t[std::max(0, i0 - 1)];
    const double b = t[std::min(n - 1, i0 + 1)];
    const Best r = golden(g, a, b, tol_log, {t[i0], v[i0]}, out.evaluations);
    if (better(r, best)) best = r;
  }
  out.x = std::exp(best.t);
  if (best.t == tl) out.x = lo;
  if (best.t == th) out.x = hi;
  out.value = best.value;
  return out;
}

Maximum1D maximize_log_widening(const std::function<double(double)>& f, double lo, double hi,
                                const LogSearchSettings& s, const std::string& what) {
  const double tol = 1.0 + 2.0 * s.rel_tolerance;
  Maximum1D m = maximize_log(f, lo, hi, s);
  const bool low_hit = m.x <= lo * tol;
  const bool high_hit = m.x >= hi / tol;
  if (!low_hit && !high_hit) return m;
  const double lo2 = low_hit ? lo / 4.0 : lo;
  const double hi2 = high_hit ? hi * 4.0 : hi;
  const int evals = m.evaluations;
  m = maximize_log(f, lo2, hi2, s);
  m.evaluations += evals;
  if (m.x <= lo2 * tol)
    throw BoundaryHit(what + ": optimum on lower bound " + std::to_string(lo2) + " after widening", "lower", lo2);
  if (m.x >= hi2 / tol)
    throw BoundaryHit(what + ": optimum on upper bound " + std::to_string(hi2) + " after widening", "upper", hi2);
  return m;
}

}  // namespace lgspdc
