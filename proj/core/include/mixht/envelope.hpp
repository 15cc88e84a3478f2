#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixht/info_core.hpp"

namespace mixht {

// Binary input observed through a BSC(delta) and a Z-channel(eps), mixed with
// weight alpha on the BSC branch.
struct BinaryScenario {
  double delta = 0.1;
  double eps = 0.8;
  double alpha = 0.5;

  void validate() const;
  Channel t1() const { return Channel::bsc(delta); }
  Channel t2() const { return Channel::z_channel(eps); }
};

// phi(p) = alpha h(T1 p) + (1 - alpha) h(T2 p) - lambda h(p), with p = P(X = 0).
double phi(const BinaryScenario& scn, double lambda, double p);
double phi_d1(const BinaryScenario& scn, double lambda, double p);
double phi_d2(const BinaryScenario& scn, double lambda, double p);

struct EnvelopePoint {
  double p = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  bool on_envelope = false;
};

struct EnvelopeOptions {
  std::size_t grid = 20001;
  bool refine = true;
  double refine_to = 1e-8;
};

// Greatest convex minorant of f on [0,1] sampled on a uniform grid plus the
// extra nodes, with optional local refinement around hull contact points.
std::vector<EnvelopePoint> lower_convex_envelope(const std::function<double(double)>& f,
                                                 const EnvelopeOptions& options = {},
                                                 const std::vector<double>& extra_nodes = {});
// Linear interpolation of psi at p.
double envelope_value(const std::vector<EnvelopePoint>& env, double p);

// Lower hull (monotone chain) of points sorted by abscissa; returns indices.
std::vector<std::size_t> lower_hull(const std::vector<double>& xs, const std::vector<double>& ys);

// Precomputed entropies on a grid for repeated envelope evaluation.
class EnvelopeEvaluator {
 public:
  EnvelopeEvaluator(double delta, double eps, double p_x, std::size_t grid = 20001);
  // psi^{alpha, lambda}(p_x).
  double psi_at_px(double alpha, double lambda) const;
  // F^alpha(x) = max over lambda in [0,1] of psi(p_x) + lambda x.
  double f_alpha(double alpha, double x, double* argmax_lambda = nullptr) const;
  double p_x() const { return p_x_; }
  double delta() const { return delta_; }
  double eps() const { return eps_; }

 private:
  double delta_, eps_, p_x_;
  std::vector<double> p_, h1_, h2_, h0_;
  std::size_t px_index_ = 0;
};

// F^alpha(x) at the distribution (p_x, 1 - p_x).
double f_alpha(const BinaryScenario& scn, double p_x, double x);

// Exponents of the two-member binary class with general Y-side offsets
// d_i: xi_1 from alpha = 1, xi_2 from alpha = 0 and theta from the min over alpha.
struct EnvelopeExponents {
  double theta = 0.0;
  double xi_bs = 0.0;
  double xi_z = 0.0;
  double alpha_star = 0.0;
};
EnvelopeExponents envelope_exponents(const EnvelopeEvaluator& ev, double r_c, double d_bs, double d_z);

struct LambdaBs {
  double lambda = 0.0;
  double limit = 0.0;            // (1 - 2 delta)^2
  bool below_limit = false;      // lambda < (1 - 2 delta)^2
  double second_derivative = 0.0;  // d^2 phi_BS at p_bs
  bool convex_at_point = false;
};
LambdaBs lambda_bs(const BinaryScenario& scn, double p_bs);

struct LambdaZ {
  double lambda = 0.0;
  double threshold = 0.0;        // (eps - lambda) / (eps (1 - lambda))
  bool below_eps = false;
  bool above_threshold = false;  // p_z >= threshold
};
LambdaZ lambda_z(const BinaryScenario& scn, double p_z);

double lambda_alpha(const BinaryScenario& scn, double p_l);

struct SignPoly {
  double a3 = 0.0, a2 = 0.0, a1 = 0.0, a0 = 0.0;
  std::vector<double> roots;  // real roots, ascending
  double s0 = 0.0, s1 = 0.0;
  double at(double p) const { return ((a3 * p + a2) * p + a1) * p + a0; }
};
// s(p) = phi''(p) p (1-p) q (1-q) (1 - eps p) with q = delta + (1 - 2 delta) p.
SignPoly sign_poly(const BinaryScenario& scn, double lambda);

// Real roots of a3 x^3 + a2 x^2 + a1 x + a0 (a3 != 0) by the trigonometric or
// Cardano formula followed by Newton polishing.
std::vector<double> cubic_roots(double a3, double a2, double a1, double a0);

struct PipelineInputs {
  BinaryScenario scenario{0.1, 0.8, 0.28};
  double p_bs = 0.075;
  double p0 = 0.6430;
  double grid_step = 1e-5;
};

struct PipelineReport {
  PipelineInputs inputs;
  // Step 1
  double lambda_bs = 0.0, d2_phi_bs = 0.0, x_bs = 0.0, f_bs = 0.0;
  // Step 2
  double p_u = 0.0, p_l = 0.0, residual_u = 0.0, residual_l = 0.0;
  double lambda_z = 0.0, threshold = 0.0, x_u = 0.0, f_z = 0.0;
  // Step 3
  double lambda_alpha = 0.0;
  SignPoly poly;
  double d2_phi_alpha = 0.0, x_l = 0.0, f_alpha = 0.0;
  bool step3_run = false;
  double r_c = 0.0;  // H(X) - x_BS
  double separation = 0.0;  // F^alpha(x^l) - max(F_BS, F_Z(x^u))
  bool verdict = false;
  std::vector<std::string> notes;
};

// Runs the three steps. Throws CheckFailed naming the first failed condition.
PipelineReport counterexample_pipeline(const PipelineInputs& in);

void to_json(nlohmann::json& j, const PipelineReport& r);

// CSV "p,phi,psi,on_envelope".
void write_envelope_csv(std::ostream& os, const std::vector<EnvelopePoint>& env);

struct SweepRecord {
  double p_bs = 0.0, alpha = 0.0;
  bool completed = false;
  bool verdict = false;
  double separation = 0.0;
  std::string failed_check;
};
// Runs the pipeline over a parameter grid; no optimality claims are made.
std::vector<SweepRecord> sweep(const BinaryScenario& base, double p0, const std::vector<double>& p_bs_values,
                               const std::vector<double>& alpha_values, double grid_step = 1e-5);

}  // namespace mixht
