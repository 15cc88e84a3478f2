#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mixht/divergence_rates.hpp"
#include "mixht/exponent_opt.hpp"
#include "mixht/info_core.hpp"

namespace mixht {

inline constexpr std::uint64_t kStateGuard = std::uint64_t{1} << 24;

// Worker count for enumeration loops. Results do not depend on it: every
// output cell is reduced by a single worker in a fixed order.
void set_lab_workers(std::size_t workers);
std::size_t lab_workers();

std::uint64_t checked_power(std::size_t base, std::size_t exp);

// Law of (X^n, Y^n) stored as prob[x * |Y|^n + y], sequences coded in base
// |A| with the first symbol most significant.
struct BlockJoint {
  std::size_t n = 0, nx = 0, ny = 0;
  std::uint64_t x_count = 0, y_count = 0;
  std::vector<double> prob;

  static BlockJoint iid(const Joint& j, std::size_t n);
  static BlockJoint mixture(const std::vector<Joint>& joints, const Dist& weights, std::size_t n);
  double operator()(std::uint64_t x, std::uint64_t y) const { return prob[x * y_count + y]; }
  std::vector<double> x_marginal() const;
  std::vector<double> y_marginal() const;
};

// Compression map and randomised decision. `accept[y * messages + u]` is the
// probability of declaring the null hypothesis on (y^n, u); the type I error
// is the null mass of rejection and the type II error the alternative mass of
// acceptance. Reserved messages occupy the last indices and are named in
// `reserved`.
struct TestingScheme {
  std::size_t n = 0, nx = 0, ny = 0;
  std::size_t messages = 0;
  std::vector<std::size_t> compress;
  std::vector<double> accept;
  std::vector<std::string> reserved;

  double decide(std::uint64_t y, std::size_t u) const { return accept[y * messages + u]; }
  std::uint64_t x_count() const { return compress.size(); }
  std::uint64_t y_count() const { return messages ? accept.size() / messages : 0; }
  void validate() const;

  static TestingScheme constant(std::size_t n, std::size_t nx, std::size_t ny, double accept_prob);
  // phi(x) = x, no compression.
  static std::vector<std::size_t> identity_compression(std::size_t n, std::size_t nx);
  // phi(x) = index of the type of x (symbol counts).
  static std::vector<std::size_t> type_compression(std::size_t n, std::size_t nx, std::size_t* messages);
};

struct ErrorPair {
  double alpha = 0.0;
  double beta = 0.0;
  bool monte_carlo = false;
};

// Table of a law on Y^n x M, cell y * messages + u.
struct MessageLaw {
  std::uint64_t y_count = 0;
  std::size_t messages = 0;
  std::vector<double> prob;
  double at(std::uint64_t y, std::size_t u) const { return prob[y * messages + u]; }
};

MessageLaw induced_null(const std::vector<std::size_t>& compress, std::size_t messages, const BlockJoint& p);
MessageLaw induced_product(const std::vector<std::size_t>& compress, std::size_t messages,
                           const std::vector<double>& qy_block, const std::vector<double>& qx_block);
ErrorPair errors_from_laws(const MessageLaw& null, const MessageLaw& alt, const std::vector<double>& accept);

// Alternative (Q_Y, Q_X) evaluated as Q_{Y^n} x Q_{phi(X^n)}.
ErrorPair exact_errors(const TestingScheme& scheme, const Joint& null,
                       const std::pair<SourceModel, SourceModel>& alt);
ErrorPair exact_errors(const TestingScheme& scheme, const BlockJoint& null,
                       const std::pair<SourceModel, SourceModel>& alt);

struct CompoundErrors {
  double alpha_max = 0.0, beta_max = 0.0;
  std::vector<double> alpha;              // per member
  std::vector<std::vector<double>> beta;  // [j][t]
};
CompoundErrors compound_errors(const TestingScheme& scheme, const MixtureProblem& problem);

// Errors against the mixture classes: worst weights with floor gamma_p, and
// alternative weights in [0, Gamma_q(n)] for every (j, t) pair.
ErrorPair mixture_errors(const TestingScheme& scheme, const MixtureProblem& problem);

struct ThresholdResult {
  TestingScheme scheme;
  MessageLaw p_bar;                      // sum_l P_{Y_l^n phi(X_l^n)}
  MessageLaw q_max;                      // max_{j,t} Q_j x Q_{phi(X_t)}
  std::vector<std::vector<bool>> info_sets;  // per member, over cells
};

// Accepts where p_bar >= e^{nE} q_max. E = -inf accepts everything and
// E = +inf rejects everything.
ThresholdResult threshold_scheme(const MixtureProblem& problem, const std::vector<std::size_t>& compress,
                                 std::size_t messages, std::size_t n, double e);

struct ChangeOfMeasure {
  double lhs = 0.0;  // alpha + e^{nE} beta
  double rhs = 0.0;  // P[P <= e^{nE} Q]
  bool holds = false;
};
// For any decision table and any nonnegative measure q on the same cells.
ChangeOfMeasure change_of_measure(const MessageLaw& p, const MessageLaw& q, const std::vector<double>& accept,
                                  std::size_t n, double e);

struct LrtReport {
  std::size_t cells = 0;
  std::size_t maps = 0;
  std::vector<std::pair<double, double>> frontier;  // vertices (alpha, beta), alpha ascending
  std::vector<std::pair<double, double>> lrt_points;
  bool all_vertices_lrt = false;
};
inline constexpr std::size_t kLrtCellGuard = 20;
LrtReport lrt_optimality_check(const std::vector<std::size_t>& compress, std::size_t messages,
                               const BlockJoint& null, const std::pair<SourceModel, SourceModel>& alt);

struct TypicalSet {
  std::vector<bool> member;  // over sequences
  double probability = 0.0;  // under the reference law
  double center = 0.0;
  std::size_t size() const;
};
// {v : |iota_{P||Q}(v)/n - d*| < gamma} with d* the divergence rate.
TypicalSet typicality_set(const Dist& p, const SourceModel& q, std::size_t n, double gamma);
// {v : |[log qbar(v) - log q(v)]/n - a| < gamma}, probability under p_block.
TypicalSet ratio_set(const std::vector<double>& p_block, const std::vector<double>& q_block,
                     const std::vector<double>& qbar_block, std::size_t n, double a, double gamma);

// Two-terminal setting with common side sequence z: terminal 1 sees (x, z),
// terminal 2 sees (y, z). Pair codes are x_code * |Z|^n + z_code.
struct TwoTerminalScheme {
  std::size_t n = 0, nx = 0, ny = 0, nz = 1;
  std::size_t m1 = 0, m2 = 0;
  std::vector<std::size_t> phi1;  // over (x, z)
  std::vector<std::size_t> phi2;  // over (y, z)
  std::vector<double> accept;     // m1 x m2
  std::vector<std::string> reserved1, reserved2;
  void validate() const;
};

// Null P_{XYZ} (iid); alternative Q_Z x Q_{X|Z} x Q_{Y|Z} (iid).
struct TripleLaw {
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<double> prob;  // [x][y][z]
  double operator()(std::size_t x, std::size_t y, std::size_t z) const { return prob[(x * ny + y) * nz + z]; }
  void validate() const;
};

struct ConditionalAlternative {
  Dist z;
  Channel x_given_z;  // out = X, in = Z
  Channel y_given_z;  // out = Y, in = Z
};

ErrorPair exact_errors(const TwoTerminalScheme& scheme, const TripleLaw& null, const ConditionalAlternative& alt);

struct TransformSets {
  double gamma = 0.0;
  double a_z = 0.0, a_xz = 0.0, a_yz = 0.0;
  TypicalSet b0, b1, b2;
};

// Divergence offsets and supporting sets for moving between alternatives
// `from` and `to` (A = D(P||from) - D(P||to) per component). Throws
// AssumptionViolation when P is not absolutely continuous w.r.t. either.
TransformSets transform_sets(const TripleLaw& null, const ConditionalAlternative& from,
                             const ConditionalAlternative& to, std::size_t n, double gamma);

// Routes inputs outside the supporting sets to the reserved symbols e1/e2 and
// forces rejection whenever a reserved symbol is seen.
TwoTerminalScheme transform_scheme(const TwoTerminalScheme& scheme, const TransformSets& sets);

struct TransformCheck {
  ErrorPair source, target;
  double p_b0c = 0.0, p_b1c = 0.0, p_b2c = 0.0;
  double alpha_bound = 0.0, beta_bound = 0.0;
  bool alpha_holds = false, beta_holds = false;
  // With |Z| = 1 the z terms vanish and the factor tightens to
  // e^{n(A_XZ + A_YZ + 2 gamma)}.
  std::optional<double> beta_bound_trivial_z;
  bool beta_trivial_z_holds = false;
};
// Applies the transformation to a scheme for (P, from) and checks
// alpha_to <= alpha_from + P(B0^c) + P(B1^c) + P(B2^c) and
// beta_to <= e^{n(A_XZ + A_YZ - A_Z + 5 gamma)} beta_from.
TransformCheck check_transform(const TwoTerminalScheme& scheme, const TripleLaw& null,
                               const ConditionalAlternative& from, const ConditionalAlternative& to,
                               std::size_t n, double gamma);

// Adapters between the one-sided scheme and the two-terminal form with a
// trivial z and the y side uncompressed.
TwoTerminalScheme to_two_terminal(const TestingScheme& scheme);
TestingScheme to_one_sided(const TwoTerminalScheme& scheme);
TripleLaw triple_from_joint(const Joint& j);
ConditionalAlternative product_alternative(const Dist& qx, const Dist& qy);

struct MixSupResult {
  std::vector<double> probability;  // per component
  std::vector<double> d_star;       // per component
};
// Pr_{V ~ P_eta^n}{ min_tau iota_{P_mix || Q_tau}(V) < n (d*_eta - gamma) }.
MixSupResult mix_sup_probabilities(const std::vector<Dist>& components, const Dist& weights,
                                   const std::vector<SourceModel>& alternatives, std::size_t n, double gamma);
enum class Side { y, x };
MixSupResult mix_sup_check(const MixtureProblem& problem, std::size_t n, double gamma, Side side = Side::y);

struct MixSupSweep {
  std::vector<std::size_t> n;
  std::vector<MixSupResult> results;
  std::vector<bool> nonincreasing;  // per component
};
MixSupSweep mix_sup_sweep(const std::vector<Dist>& components, const Dist& weights,
                          const std::vector<SourceModel>& alternatives, const std::vector<std::size_t>& n_list,
                          double gamma);

inline constexpr std::uint64_t kErasure = ~std::uint64_t{0};

struct WakCode {
  std::size_t n = 0, nx = 0, ny = 0;
  std::size_t m1 = 0, m2 = 0;
  std::vector<std::size_t> phi1;      // over X^n
  std::vector<std::size_t> phi2;      // over Y^n
  std::vector<std::uint64_t> decode;  // m1 x m2 -> y code or kErasure
  void validate() const;
};

double wak_error(const WakCode& code, const BlockJoint& null);

struct WakToHt {
  TestingScheme scheme;
  double wak_error = 0.0;
  ErrorPair errors;  // alternative: uniform Y^n x P_{phi1(X^n)}
  double alpha_bound = 0.0, beta_bound = 0.0;
  bool alpha_holds = false, beta_holds = false;
};
WakToHt wak_to_ht(const WakCode& code, const BlockJoint& null, double eta);

enum class Binning { expected, greedy };

struct HtToWak {
  ErrorPair errors;            // of the testing scheme against uniform x P_phi
  double expected_error = 0.0;  // over uniform random binning
  double bound = 0.0;           // alpha + gamma beta + |Y|^n / (gamma m2)
  bool bound_holds = false;
  std::optional<WakCode> code;  // greedy mode
  double code_error = 0.0;
};
HtToWak ht_to_wak(const TestingScheme& scheme, const BlockJoint& null, double gamma, std::size_t m2,
                  Binning binning);

// Errors of codes built from independently drawn uniform binnings.
struct BinningSample {
  double mean = 0.0, stddev = 0.0;
  std::size_t samples = 0;
};
BinningSample sample_binnings(const TestingScheme& scheme, const BlockJoint& null, double gamma, std::size_t m2,
                              std::size_t samples, unsigned long long seed);

struct SlopeFit {
  double slope = 0.0, intercept = 0.0;
  std::vector<double> residuals;
};
// Least squares of -log beta_n against n.
SlopeFit fit_exponent(const std::vector<std::size_t>& n, const std::vector<double>& beta);
SlopeFit empirical_exponent(const std::function<TestingScheme(std::size_t)>& family, const Joint& null,
                            const std::pair<SourceModel, SourceModel>& alt, const std::vector<std::size_t>& n_list,
                            std::vector<ErrorPair>* errors = nullptr);

struct SweepRow {
  std::size_t n = 0;
  ErrorPair errors;
};
// CSV "n,alpha,beta,log_beta_over_n".
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

void to_json(nlohmann::json& j, const TestingScheme& s);
void from_json(const nlohmann::json& j, TestingScheme& s);
void to_json(nlohmann::json& j, const WakCode& c);
void to_json(nlohmann::json& j, const TwoTerminalScheme& s);

}  // namespace mixht
