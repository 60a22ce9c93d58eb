#include "stcr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stcr {

GradCheckReport finite_diff_report(const Objective& f, const Tensor& params, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("finite_diff_check: eps must be positive");
  const Var p = leaf(params);
  const Tensor analytic = backward(f(p)).of(p);

  GradCheckReport report;
  Tensor probe = params;
  for (Index i = 0; i < params.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + eps;
    const double up = f(constant(probe))->value.item();
    probe[i] = original - eps;
    const double down = f(constant(probe))->value.item();
    probe[i] = original;

    const double numeric = (up - down) / (2.0 * eps);
    const double g = analytic[i];
    const double denom = std::max({std::abs(g), std::abs(numeric), 1e-8});
    const double err = std::abs(g - numeric) / denom;
    if (err > report.max_relative_error || report.worst_coordinate < 0) {
      report = {err, i, g, numeric};
    }
  }
  return report;
}

double finite_diff_check(const Objective& f, const Tensor& params, double eps) {
  return finite_diff_report(f, params, eps).max_relative_error;
}

}  // namespace stcr
