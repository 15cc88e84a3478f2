#include "mixht/wak.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "mixht/errors.hpp"

namespace mixht {

namespace {

bool is_iid_close(const SourceModel& m, const Dist& target) {
  if (m.alphabet_size() != target.size()) return false;
  for (std::size_t c = 0; c < m.context_count(); ++c)
    if (total_variation(m.transition(c), target) > kClassTolerance) return false;
  return true;
}

}  // namespace

WakInstance make_wak_instance(const MixtureProblem& problem) {
  problem.validate();
  WakInstance inst;
  inst.problem = problem;
  const std::size_t ny = problem.joints.front().y_size();
  const Dist chi = Dist::uniform(ny);
  for (const SourceModel& q : problem.y_alternatives)
    if (!is_iid_close(q, chi)) throw AssumptionViolation("every Y alternative must be the uniform law");

  inst.structure = classify(problem);
  const auto& marg = inst.structure.marginals;
  std::vector<bool> covered(marg.size(), false);
  for (const SourceModel& q : problem.x_alternatives) {
    bool matched = false;
    for (std::size_t s = 0; s < marg.size(); ++s)
      if (is_iid_close(q, marg[s])) {
        covered[s] = true;
        matched = true;
      }
    if (!matched) throw AssumptionViolation("every X alternative must be a class marginal");
  }
  for (bool c : covered)
    if (!c) throw AssumptionViolation("some class marginal is missing from the X alternatives");
  inst.log_y = std::log(static_cast<double>(ny));
  return inst;
}

WakInstance make_wak_instance(const std::vector<Joint>& joints, const Dist& weights) {
  if (joints.empty()) throw std::invalid_argument("no joints");
  MixtureProblem p;
  p.joints = joints;
  p.weights = weights;
  p.y_alternatives.push_back(SourceModel::iid(Dist::uniform(joints.front().y_size())));
  std::vector<Dist> seen;
  for (const Joint& j : joints) {
    const Dist m = j.x_marginal();
    bool dup = false;
    for (const Dist& d : seen) dup = dup || total_variation(d, m) <= kClassTolerance;
    if (!dup) {
      seen.push_back(m);
      p.x_alternatives.push_back(SourceModel::iid(m));
    }
  }
  return make_wak_instance(p);
}

double wak_rate_zero(const WakInstance& inst, double r_c) {
  return inst.log_y - compound_zero_exponent(inst.structure, r_c);
}

double wak_rate_eps(const WakInstance& inst, double r_c, double eps, const EpsilonOptions& options) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  return inst.log_y - mixture_epsilon_exponent(inst.problem, inst.structure, r_c, eps, options);
}

std::vector<WakSurfacePoint> wak_surface(const WakInstance& inst, const std::vector<double>& rc_grid,
                                         const std::vector<double>& eps_grid, const EpsilonOptions& options) {
  std::vector<WakSurfacePoint> out;
  out.reserve(rc_grid.size() * eps_grid.size());
  for (double r : rc_grid)
    for (double e : eps_grid) out.push_back({r, e, wak_rate_eps(inst, r, e, options)});
  return out;
}

void write_wak_surface_csv(std::ostream& os, const std::vector<WakSurfacePoint>& points) {
  os << "R_c,epsilon,R2\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.10f,%.10f,%.12f\n", p.r_c, p.eps, p.rate);
    os << buf;
  }
}

}  // namespace mixht
