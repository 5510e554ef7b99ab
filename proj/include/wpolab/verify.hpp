#pragma once

#include <string>
#include <vector>

namespace wpolab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
};

// The analytic-identity suite behind `wpolab verify`: expected Gaussian
// updates, the three-way Gaussian/quadratic equivalence, the per-sample
// reparameterization match, the stddev-channel score identity, the
// exponential-family counterexample, the zero-variance property, and the
// integration-by-parts quadrature identity. With corrupt_rescale set, the
// mean rescaling constant is deliberately perturbed by 5% so mutation
// sensitivity of the equivalence checks can be demonstrated.
std::vector<CheckResult> run_identity_checks(bool corrupt_rescale = false);

std::string format_check_line(const CheckResult& r);

}  // namespace wpolab
