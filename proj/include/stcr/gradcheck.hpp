#pragma once

#include <functional>

#include "stcr/autodiff.hpp"

namespace stcr {

/// Scalar objective of a flat parameter vector, built on the graph so both the
/// reverse-mode gradient and plain evaluations are available.
using Objective = std::function<Var(const Var& params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  Index worst_coordinate = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares backward() against central differences on every coordinate.
/// Relative error per coordinate is |g - d| / max(|g|, |d|, 1e-8).
GradCheckReport finite_diff_report(const Objective& f, const Tensor& params, double eps);

double finite_diff_check(const Objective& f, const Tensor& params, double eps);

}  // namespace stcr
