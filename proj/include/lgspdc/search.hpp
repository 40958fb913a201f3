#pragma once

// One-dimensional maximization over a log-spaced positive interval: coarse scan,
// then golden-section refinement of the best bracket.

#include <functional>
#include <string>
#include <vector>

namespace lgspdc {

/// n log-spaced points from lo to hi; the endpoints are exactly lo and hi.
std::vector<double> log_grid(double lo, double hi, int n);

struct LogSearchSettings {
  int coarse_points = 25;
  /// Stop when the bracket's relative width falls below this.
  double rel_tolerance = 1e-3;
  /// Local maxima further apart than this many coarse cells are refined separately.
  int bimodal_separation = 2;
};

struct Maximum1D {
  double x = 0.0;
  double value = 0.0;
  bool at_lower = false;  // coarse maximum sat on the lower bound
  bool at_upper = false;
  bool bimodal = false;   // a second separated local maximum was refined
  double best_coarse_value = 0.0;
  int evaluations = 0;
};

/// Maximizes f on [lo, hi]. Exact ties resolve to the smaller x. The returned
/// value is never below the best coarse sample.
Maximum1D maximize_log(const std::function<double(double)>& f, double lo, double hi, const LogSearchSettings& s);

/// maximize_log with the bound policy: an optimum on a bound widens that bound
/// by 4x once; a second hit throws BoundaryHit naming `what` and the bound.
Maximum1D maximize_log_widening(const std::function<double(double)>& f, double lo, double hi,
                                const LogSearchSettings& s, const std::string& what);

}  // namespace lgspdc
