#pragma once

#include <functional>
#include <vector>

namespace sawchan {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when the spread of simplex values drops below
/// `tolerance` or after `max_evaluations` calls.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, double initial_step, double tolerance,
                          int max_evaluations);

} // namespace sawchan
