#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixht/divergence_rates.hpp"
#include "mixht/ext_real.hpp"
#include "mixht/info_core.hpp"

namespace mixht {

// Growth profile c * n^power of the cap on matched alternative weights.
struct AltCapGrowth {
  double scale = 1.0;
  double power = 0.0;
  double at(std::size_t n) const;
};

struct MixtureProblem {
  std::vector<Joint> joints;
  Dist weights;
  std::vector<SourceModel> y_alternatives;
  std::vector<SourceModel> x_alternatives;
  double weight_floor = 0.01;  // gamma_p
  double alt_floor = 0.01;     // gamma_q
  AltCapGrowth alt_cap;        // Gamma_q(n)
  std::vector<double> rc_grid;

  std::size_t members() const { return joints.size(); }
  void validate() const;
};

void to_json(nlohmann::json& j, const MixtureProblem& p);
void from_json(const nlohmann::json& j, MixtureProblem& p);

struct ClassStructure {
  std::vector<Joint> joints;
  Dist weights;
  std::vector<Dist> marginals;                  // one per class
  std::vector<std::vector<std::size_t>> classes;  // member indices per class
  std::vector<std::size_t> class_of;           // class per member
  std::vector<double> d_star_y;                // per member
  std::vector<std::size_t> j_star;
  std::vector<double> d_star_x;                // per class
  std::vector<std::size_t> t_star;
  std::vector<double> d_star_pair;             // per member, d_y[i] + d_x[class_of[i]]

  std::size_t class_count() const { return classes.size(); }
  std::size_t members() const { return joints.size(); }
};

inline constexpr double kClassTolerance = 1e-9;

// Groups members by X-marginal (total variation within kClassTolerance) and
// fills the matched divergence rates. Throws AssumptionViolation when every
// alternative sits at infinite rate for some member or class.
ClassStructure classify(const MixtureProblem& problem);

enum class Objective { min_over_class, single_index };

struct SolverOptions {
  std::size_t grid_budget = 6000;  // base columns before refinement
  std::size_t refine_rounds = 3;
  double support_tol = 1e-13;
};

struct AuxiliaryResult {
  double value = 0.0;               // recomputed from the kernel
  Channel kernel;                   // P_{U|X}, |U| = support size
  double rate = 0.0;                // I(X;U)
  std::vector<double> member_values;  // I(Y_i;U) + d_i per member
};

// Maximises min_i [I(Y_i;U) + d_i] (or the single member `index`) subject to
// I(X;U) <= R_c over kernels P_{U|X}. The search runs over decompositions of
// P_X into posterior points, which turns the problem into a linear program in
// the mixing weights; posterior candidates are a simplex grid refined around
// the optimal support.
AuxiliaryResult optimize_auxiliary(const std::vector<Joint>& joints_in_class,
                                   const std::vector<double>& d_pairs, double r_c,
                                   Objective objective, std::size_t index = 0,
                                   const SolverOptions& options = {});

// I(X;U) and I(Y_i;U) + d_i for a given kernel.
AuxiliaryResult evaluate_kernel(const std::vector<Joint>& joints_in_class,
                                const std::vector<double>& d_pairs, const Channel& kernel);

AuxiliaryResult theta_s_solution(const ClassStructure& st, std::size_t s, double r_c,
                                 const SolverOptions& options = {});
AuxiliaryResult xi_i_solution(const ClassStructure& st, std::size_t i, double r_c,
                              const SolverOptions& options = {});
double theta_s(const ClassStructure& st, std::size_t s, double r_c);
double xi_i(const ClassStructure& st, std::size_t i, double r_c);
double compound_zero_exponent(const ClassStructure& st, double r_c);

inline constexpr double kStrictnessTol = 1e-7;

struct ExceptionalSet {
  std::vector<std::size_t> members;   // s with theta_s < min xi by more than kStrictnessTol
  std::vector<std::size_t> boundary;  // gap within [kStrictnessTol / 10, kStrictnessTol]
  std::vector<double> theta;          // per class
  std::vector<double> min_xi;         // per class
  double eps_low = 1.0;               // below: exponent is min_s theta_s
  double eps_high = 0.0;              // above: exponent is min_i xi_i
  bool gap_undetermined = false;      // eps_low < eps_high leaves a band open
  bool uniform_in_eps = false;        // some minimising class is outside the set
  double min_theta = 0.0;
  double min_xi_all = 0.0;

  // Compound exponent at level eps if the regimes determine it.
  std::optional<double> compound_epsilon_exponent(double eps) const;
};

ExceptionalSet exceptional_set(const ClassStructure& st, double r_c);

enum class Separability { not_falsified, falsified, indeterminate };
const char* to_string(Separability s);

struct ClassSeparability {
  std::size_t cls = 0;
  bool intersection_nonempty = false;
  double intersection_margin = 0.0;  // max_U min_i (value_i - xi_i) on the active rate set
  // Range of value_a - value_b over the optimiser set, per ordered pair (a < b).
  struct PairRange {
    std::size_t a = 0, b = 0;
    double lo = 0.0, hi = 0.0;
  };
  std::vector<PairRange> pair_ranges;
  Separability verdict = Separability::not_falsified;
};

struct SeparabilityReport {
  Separability verdict = Separability::not_falsified;
  std::vector<ClassSeparability> classes;
};

SeparabilityReport check_separability(const ClassStructure& st, double r_c, double tol = 1e-6);

struct StaircaseResult {
  double value = 0.0;
  std::size_t step = 0;                // position in the sorted order
  std::vector<std::size_t> order;      // pi^{-1}: sorted position -> member
  std::vector<double> sorted_xi;
  std::vector<double> breakpoints;     // partial sums of sorted weights
};

struct EpsilonOptions {
  bool assume_separable = false;
};

StaircaseResult mixture_epsilon_staircase(const ClassStructure& st, double r_c, double eps,
                                          const EpsilonOptions& options = {});
double mixture_epsilon_exponent(const MixtureProblem& problem, const ClassStructure& st,
                                double r_c, double eps, const EpsilonOptions& options = {});

// Pure staircase lookup: sorts xi ascending (stable) and picks the step whose
// half-open partial-sum interval contains eps.
StaircaseResult staircase_lookup(const std::vector<double>& xi, const Dist& weights, double eps);

struct ReducedTheta {
  ExtReal value;
  double expected = 0.0;  // xi of the l-th smallest member
  bool matches = false;
};

// l is 1-based.
ReducedTheta reduced_theta(const ClassStructure& st, std::size_t l, double r_c);

struct LagrangianResult {
  double value = 0.0;
  Channel kernel;
  double rate = 0.0;
  double exponent = 0.0;  // min_i [I(Y_i;U) + d_i] at the minimiser
};

LagrangianResult r_ht_mu(const std::vector<Joint>& joints_in_class,
                         const std::vector<double>& d_pairs, double mu,
                         const SolverOptions& options = {});

struct RelaxedLagrangianResult {
  double value = 0.0;
  double start_value = 0.0;  // value at the Markov extension of the R^mu optimiser
  std::size_t iterations = 0;
};

struct RelaxedOptions {
  std::size_t restarts = 4;
  std::size_t max_iterations = 400;
  unsigned long long seed = 20240611ULL;
};

RelaxedLagrangianResult r_ht_mu_alpha(const std::vector<Joint>& joints_in_class,
                                      const std::vector<double>& d_pairs, double mu, double alpha,
                                      const RelaxedOptions& options = {});

struct CurveSample {
  double r_c = 0.0;
  double value = 0.0;
  Channel kernel;
  std::string kernel_hash;
};

struct ExponentCurve {
  std::string name;
  std::vector<CurveSample> samples;
};

// FNV-1a over the kernel entries rounded to 1e-9.
std::string kernel_hash(const Channel& kernel);

ExponentCurve theta_curve(const ClassStructure& st, std::size_t s, const std::vector<double>& grid);
ExponentCurve xi_curve(const ClassStructure& st, std::size_t i, const std::vector<double>& grid);
ExponentCurve compound_curve(const ClassStructure& st, const std::vector<double>& grid);

// CSV rows "curve,R_c,value,kernel_hash" with a header line when requested.
void write_curve_csv(std::ostream& os, const std::vector<ExponentCurve>& curves, bool header = true);

}  // namespace mixht
