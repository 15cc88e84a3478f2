#pragma once

#include <iosfwd>
#include <vector>

#include "mixht/exponent_opt.hpp"

namespace mixht {

// Mixture source for lossless coding of Y with a rate-limited helper observing
// X. The testing counterpart uses the uniform law on Y as the Y alternative and
// the class marginals as the X alternatives.
struct WakInstance {
  MixtureProblem problem;
  ClassStructure structure;
  double log_y = 0.0;  // log |Y|
};

// Validates the uniform-alternative restrictions; throws AssumptionViolation.
WakInstance make_wak_instance(const MixtureProblem& problem);
// Builds the restricted problem from a mixture of joints.
WakInstance make_wak_instance(const std::vector<Joint>& joints, const Dist& weights);

double wak_rate_zero(const WakInstance& inst, double r_c);
double wak_rate_eps(const WakInstance& inst, double r_c, double eps, const EpsilonOptions& options = {});

struct WakSurfacePoint {
  double r_c = 0.0, eps = 0.0, rate = 0.0;
};
std::vector<WakSurfacePoint> wak_surface(const WakInstance& inst, const std::vector<double>& rc_grid,
                                         const std::vector<double>& eps_grid, const EpsilonOptions& options = {});
// CSV "R_c,epsilon,R2".
void write_wak_surface_csv(std::ostream& os, const std::vector<WakSurfacePoint>& points);

}  // namespace mixht
