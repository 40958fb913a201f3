#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace lgspdc::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Gauss-Legendre rule with n points. Rules up to 4096 points are computed once
// and shared read-only; larger requests are built on the fly.
const Rule& gauss_legendre(int n);

// Weights of the extended closed formula exact for cubics
// (3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8) times the spacing.
// Requires at least 6 points.
std::vector<double> uniform_weights(std::size_t points, double spacing);

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

// Fixed-order Gauss-Kronrod pair used by adaptive_gk.
struct Kronrod21 {
  static constexpr int n = 21;
  static const double xgk[11];
  static const double wgk[11];
  static const double wg[5];
};

// Globally adaptive Gauss-Kronrod (G10/K21) for integrands returning double or
// std::complex<double>. Bisects the worst interval until the summed error
// estimate drops below max(abs_tol, rel_tol * |I|) or the interval budget is spent.
template <class F>
auto adaptive_gk(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                 int initial_intervals = 1, int max_intervals = 20000)
    -> Estimate<decltype(f(a))> {
  using T = decltype(f(a));
  struct Piece {
    double a, b;
    T value;
    double error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  Estimate<T> out;
  auto eval = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    T fc = f(c);
    T gk = fc * Kronrod21::wgk[10];
    T g{};
    for (int j = 0; j < 10; ++j) {
      const double dx = h * Kronrod21::xgk[j];
      T f1 = f(c - dx);
      T f2 = f(c + dx);
      gk += (f1 + f2) * Kronrod21::wgk[j];
      if (j % 2 == 1) g += (f1 + f2) * Kronrod21::wg[j / 2];
    }
    out.evaluations += Kronrod21::n;
    Piece p{lo, hi, gk * h, std::abs((gk - g) * h)};
    return p;
  };
  std::priority_queue<Piece> heap;
  T total{};
  double err = 0.0;
  const int init = std::max(1, initial_intervals);
  for (int i = 0; i < init; ++i) {
    const double lo = a + (b - a) * i / init;
    const double hi = (i + 1 == init) ? b : a + (b - a) * (i + 1) / init;
    Piece p = eval(lo, hi);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int count = init;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Piece left = eval(worst.a, mid);
    Piece right = eval(mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = esum;
  out.converged = esum <= std::max(abs_tol, rel_tol * std::abs(sum));
  return out;
}

}  // namespace lgspdc::quad
