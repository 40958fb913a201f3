#include "lgspdc/legendre_series.hpp"

#include <algorithm>
#include <cmath>

#include "lgspdc/errors.hpp"
#include "lgspdc/quadrature.hpp"

namespace lgspdc {

using cplx = std::complex<double>;

void spherical_bessel_sequence(int count, double x, double* out) {
  if (count <= 0) return;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax < 1e-8) {
    // Leading series term; higher orders vanish at this precision.
    out[0] = 1.0 - ax * ax / 6.0;
    double term = 1.0;
    for (int n = 1; n < count; ++n) {
      term *= ax / (2.0 * n + 1.0);
      out[n] = term;
      if (term < 1e-300) term = 0.0;
    }
  } else {
    const double s = std::sin(ax), c = std::cos(ax);
    const int n_fwd = std::min(count - 1, static_cast<int>(ax));
    out[0] = s / ax;
    if (count > 1 && n_fwd >= 1) out[1] = s / (ax * ax) - c / ax;
    for (int n = 1; n < n_fwd; ++n) out[n + 1] = (2.0 * n + 1.0) / ax * out[n] - out[n - 1];
    if (n_fwd < count - 1) {
      // Minimal solution above n ~ |x|: backward recurrence, then match the forward values.
      const int start = count + 24 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(count)));
      std::vector<double> back(count + 1, 0.0);
      double jp1 = 0.0, jc = 1e-280;  // j_{n+1}, j_n at n = start
      for (int n = start; n >= 1; --n) {
        if (n <= count) back[n] = jc;
        const double jm1 = (2.0 * n + 1.0) / ax * jc - jp1;
        jp1 = jc;
        jc = jm1;
        if (std::abs(jc) > 1e250) {
          jc *= 1e-250;
          jp1 *= 1e-250;
          for (int k = n; k <= count; ++k) back[k] *= 1e-250;
        }
      }
      back[0] = jc;
      double scale;
      if (n_fwd == 0) {
        scale = out[0] / back[0];
      } else {
        const double f0 = out[n_fwd - 1], f1 = out[n_fwd];
        // Normalize before squaring; the backward values can sit near the underflow limit.
        const double m = std::max(std::abs(back[n_fwd - 1]), std::abs(back[n_fwd]));
        const double b0 = back[n_fwd - 1] / m, b1 = back[n_fwd] / m;
        scale = (f0 * b0 + f1 * b1) / (b0 * b0 + b1 * b1) / m;
      }
      for (int n = n_fwd + 1; n < count; ++n) out[n] = scale * back[n];
    }
  }
  if (sign < 0.0)
    for (int n = 1; n < count; n += 2) out[n] = -out[n];
}

LegendreSeries LegendreSeries::fit(const std::function<cplx(double)>& h, int terms) {
  if (terms < 1) throw ContractViolation("LegendreSeries::fit needs terms >= 1");
  const quad::Rule& rule = quad::gauss_legendre(terms);
  std::vector<cplx> c(terms, cplx{});
  for (int j = 0; j < terms; ++j) {
    const double x = rule.nodes[j];
    const cplx wh = rule.weights[j] * h(x);
    double p_prev = 1.0, p = x;
    c[0] += wh;
    if (terms > 1) c[1] += wh * p;
    for (int n = 1; n + 1 < terms; ++n) {
      const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
      p_prev = p;
      p = p_next;
      c[n + 1] += wh * p;
    }
  }
  for (int n = 0; n < terms; ++n) c[n] *= 0.5 * (2.0 * n + 1.0);
  return LegendreSeries(std::move(c));
}

LegendreSeries LegendreSeries::fit_adaptive(const std::function<cplx(double)>& h, double tol, int max_terms) {
  double tail_ratio = 0.0;
  for (int terms = 32; terms <= max_terms; terms *= 2) {
    LegendreSeries s = fit(h, terms);
    double peak = 0.0, tail = 0.0;
    for (int n = 0; n < terms; ++n) {
      const double a = std::abs(s.c_[n]);
      peak = std::max(peak, a);
      if (n >= terms - terms / 4) tail = std::max(tail, a);
    }
    tail_ratio = peak > 0.0 ? tail / peak : 0.0;
    if (tail_ratio <= tol) {
      // Drop the negligible tail so transforms stay cheap.
      int keep = terms;
      while (keep > 1 && std::abs(s.c_[keep - 1]) <= 0.1 * tol * peak) --keep;
      s.c_.resize(keep);
      return s;
    }
  }
  throw ConvergenceError("Legendre expansion did not converge within " + std::to_string(max_terms) + " terms", {},
                         tail_ratio);
}

cplx LegendreSeries::value(double u) const {
  cplx sum{};
  double p_prev = 1.0, p = u;
  for (int n = 0; n < size(); ++n) {
    double pn;
    if (n == 0) {
      pn = 1.0;
    } else if (n == 1) {
      pn = u;
    } else {
      pn = ((2.0 * n - 1.0) * u * p - (n - 1.0) * p_prev) / n;
      p_prev = p;
      p = pn;
    }
    sum += c_[n] * pn;
  }
  return sum;
}

cplx legendre_transform_sum(const cplx* c, const double* bessel, int count) {
  // i^n cycles through 1, i, -1, -i.
  double re = 0.0, im = 0.0;
  for (int n = 0; n < count; ++n) {
    const double b = 2.0 * bessel[n];
    const cplx t = c[n] * b;
    switch (n & 3) {
      case 0: re += t.real(); im += t.imag(); break;
      case 1: re -= t.imag(); im += t.real(); break;
      case 2: re -= t.real(); im -= t.imag(); break;
      default: re += t.imag(); im -= t.real(); break;
    }
  }
  return {re, im};
}

cplx LegendreSeries::transform(double Phi, double* scratch) const {
  spherical_bessel_sequence(size(), Phi, scratch);
  return legendre_transform_sum(c_.data(), scratch, size());
}

cplx LegendreSeries::transform(double Phi) const {
  std::vector<double> scratch(size());
  return transform(Phi, scratch.data());
}

}  // namespace lgspdc
