#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mixht/errors.hpp"
#include "mixht/finite_n_lab.hpp"
#include "support/oracles.hpp"

using namespace mixht;

namespace {

Dist rand_dist(std::mt19937_64& rng, std::size_t k, double floor = 0.05) {
  return Dist::normalized(oracle::random_simplex(rng, k, floor));
}

Joint rand_joint(std::mt19937_64& rng, std::size_t nx = 2, std::size_t ny = 2) {
  std::vector<Dist> cols;
  for (std::size_t x = 0; x < nx; ++x) cols.push_back(rand_dist(rng, ny));
  return Joint::from_channel(rand_dist(rng, nx), Channel::from_columns(cols));
}

TestingScheme random_scheme(std::mt19937_64& rng, std::size_t n, std::size_t nx, std::size_t ny, bool types) {
  TestingScheme s;
  s.n = n;
  s.nx = nx;
  s.ny = ny;
  if (types) {
    s.compress = TestingScheme::type_compression(n, nx, &s.messages);
  } else {
    s.compress = TestingScheme::identity_compression(n, nx);
    s.messages = oracle::ipow(nx, n);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  s.accept.resize(oracle::ipow(ny, n) * s.messages);
  for (double& a : s.accept) a = u(rng) < 0.3 ? 0.0 : u(rng);
  return s;
}

// Direct summation over all (x^n, y^n).
ErrorPair brute_errors(const TestingScheme& s, const Joint& p, const Dist& qy, const Dist& qx) {
  const std::uint64_t xs = oracle::ipow(s.nx, s.n), ys = oracle::ipow(s.ny, s.n);
  ErrorPair e;
  for (std::uint64_t x = 0; x < xs; ++x) {
    const auto xd = oracle::digits(x, s.nx, s.n);
    const double qxv = oracle::iid_prob(qx.probs(), xd);
    for (std::uint64_t y = 0; y < ys; ++y) {
      const auto yd = oracle::digits(y, s.ny, s.n);
      double pv = 1.0;
      for (std::size_t k = 0; k < s.n; ++k) pv *= p(xd[k], yd[k]);
      const double acc = s.accept[y * s.messages + s.compress[x]];
      e.alpha += pv * (1.0 - acc);
      e.beta += oracle::iid_prob(qy.probs(), yd) * qxv * acc;
    }
  }
  return e;
}

std::pair<SourceModel, SourceModel> iid_alt(const Dist& qy, const Dist& qx) {
  return {SourceModel::iid(qy), SourceModel::iid(qx)};
}

MixtureProblem small_problem(std::mt19937_64& rng, std::size_t m, std::size_t k, std::size_t r) {
  MixtureProblem p;
  for (std::size_t i = 0; i < m; ++i) p.joints.push_back(rand_joint(rng));
  p.weights = rand_dist(rng, m, 0.5);
  for (std::size_t j = 0; j < k; ++j) p.y_alternatives.push_back(SourceModel::iid(rand_dist(rng, 2)));
  for (std::size_t t = 0; t < r; ++t) p.x_alternatives.push_back(SourceModel::iid(rand_dist(rng, 2)));
  return p;
}

}  // namespace

TEST(ExactErrors, ConstantSchemes) {
  const Joint p = Joint::from_channel(Dist({0.4, 0.6}), Channel::bsc(0.2));
  const auto alt = iid_alt(Dist::uniform(2), Dist({0.4, 0.6}));
  for (std::size_t n : {1u, 3u}) {
    const ErrorPair yes = exact_errors(TestingScheme::constant(n, 2, 2, 1.0), p, alt);
    EXPECT_NEAR(yes.alpha, 0.0, 1e-15);
    EXPECT_NEAR(yes.beta, 1.0, 1e-14);
    const ErrorPair no = exact_errors(TestingScheme::constant(n, 2, 2, 0.0), p, alt);
    EXPECT_NEAR(no.alpha, 1.0, 1e-14);
    EXPECT_NEAR(no.beta, 0.0, 1e-15);
  }
}

TEST(ExactErrors, SingleLetterByHand) {
  const Joint p({{0.4, 0.1}, {0.2, 0.3}});
  TestingScheme s;
  s.n = 1;
  s.nx = s.ny = 2;
  s.messages = 2;
  s.compress = {0, 1};
  s.accept = {1.0, 0.0, 0.5, 1.0};  // (y,u) = (0,0), (0,1), (1,0), (1,1)
  const ErrorPair e = exact_errors(s, p, iid_alt(Dist({0.5, 0.5}), Dist({0.8, 0.2})));
  // Rejection mass: P(x=1,y=0) * 1 + P(x=0,y=1) * 0.5.
  EXPECT_NEAR(e.alpha, 0.2 + 0.05, 1e-15);
  // Acceptance mass under Q: 0.5*0.8*1 + 0.5*0.8*0.5 + 0.5*0.2*1.
  EXPECT_NEAR(e.beta, 0.4 + 0.2 + 0.1, 1e-15);
  EXPECT_FALSE(e.monte_carlo);
}

TEST(ExactErrors, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 8; ++k) {
    const std::size_t nx = 2 + k % 2, ny = 2 + (k / 2) % 2, n = 1 + k % 3;
    const Joint p = rand_joint(rng, nx, ny);
    const Dist qy = rand_dist(rng, ny), qx = rand_dist(rng, nx);
    const TestingScheme s = random_scheme(rng, n, nx, ny, k % 2 == 0);
    const ErrorPair got = exact_errors(s, p, iid_alt(qy, qx));
    const ErrorPair want = brute_errors(s, p, qy, qx);
    EXPECT_NEAR(got.alpha, want.alpha, 1e-12);
    EXPECT_NEAR(got.beta, want.beta, 1e-12);
  }
}

TEST(ExactErrors, AffineInDecisionTable) {
  std::mt19937_64 rng(42);
  const Joint p = rand_joint(rng);
  const auto alt = iid_alt(rand_dist(rng, 2), rand_dist(rng, 2));
  const TestingScheme a = random_scheme(rng, 3, 2, 2, true);
  TestingScheme b = a;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : b.accept) v = u(rng);
  TestingScheme mix = a;
  const double t = 0.37;
  for (std::size_t c = 0; c < mix.accept.size(); ++c) mix.accept[c] = t * a.accept[c] + (1 - t) * b.accept[c];
  const ErrorPair ea = exact_errors(a, p, alt), eb = exact_errors(b, p, alt), em = exact_errors(mix, p, alt);
  EXPECT_NEAR(em.alpha, t * ea.alpha + (1 - t) * eb.alpha, 1e-14);
  EXPECT_NEAR(em.beta, t * ea.beta + (1 - t) * eb.beta, 1e-14);
}

TEST(ExactErrors, SymmetricHypothesesGiveComplementaryErrors) {
  // With Q equal to the product of the null marginals and an independent null,
  // the null and alternative laws coincide, so alpha + beta = 1.
  const Dist px({0.3, 0.7}), py({0.6, 0.4});
  const Joint p = Joint::from_channel(px, Channel::from_columns({py, py}));
  std::mt19937_64 rng(43);
  const TestingScheme s = random_scheme(rng, 3, 2, 2, false);
  const ErrorPair e = exact_errors(s, p, iid_alt(py, px));
  EXPECT_NEAR(e.alpha + e.beta, 1.0, 1e-13);
}

TEST(ExactErrors, WorkerCountDoesNotChangeBits) {
  std::mt19937_64 rng(44);
  const Joint p = rand_joint(rng, 3, 2);
  const auto alt = iid_alt(rand_dist(rng, 2), rand_dist(rng, 3));
  const TestingScheme s = random_scheme(rng, 5, 3, 2, true);
  set_lab_workers(1);
  const ErrorPair one = exact_errors(s, p, alt);
  set_lab_workers(4);
  const ErrorPair four = exact_errors(s, p, alt);
  set_lab_workers(1);
  EXPECT_EQ(one.alpha, four.alpha);
  EXPECT_EQ(one.beta, four.beta);
}

TEST(ExactErrors, GuardStopsEnumeration) {
  const Joint p = Joint::from_channel(Dist::uniform(2), Channel::bsc(0.1));
  EXPECT_THROW(BlockJoint::iid(p, 13), GuardExceeded);
  EXPECT_NO_THROW(BlockJoint::iid(p, 6));
}

TEST(Compound, SingleMemberReducesToExactErrors) {
  std::mt19937_64 rng(45);
  const MixtureProblem p = small_problem(rng, 1, 1, 1);
  const TestingScheme s = random_scheme(rng, 3, 2, 2, true);
  const CompoundErrors c = compound_errors(s, p);
  const ErrorPair e = exact_errors(s, p.joints[0], {p.y_alternatives[0], p.x_alternatives[0]});
  EXPECT_NEAR(c.alpha_max, e.alpha, 1e-14);
  EXPECT_NEAR(c.beta_max, e.beta, 1e-14);
}

TEST(Threshold, InfiniteExponents) {
  std::mt19937_64 rng(46);
  const MixtureProblem p = small_problem(rng, 2, 1, 1);
  const auto id = TestingScheme::identity_compression(2, 2);
  const ThresholdResult all = threshold_scheme(p, id, 4, 2, -std::numeric_limits<double>::infinity());
  for (double a : all.scheme.accept) EXPECT_EQ(a, 1.0);
  const ThresholdResult none = threshold_scheme(p, id, 4, 2, std::numeric_limits<double>::infinity());
  for (double a : none.scheme.accept) EXPECT_EQ(a, 0.0);
}

TEST(Threshold, BetaBoundedByExponent) {
  std::mt19937_64 rng(47);
  for (int k = 0; k < 6; ++k) {
    const std::size_t m = 1 + k % 2, ky = 1 + (k / 2) % 2, r = 1 + k % 2, n = 1 + k % 3;
    MixtureProblem p = small_problem(rng, m, ky, r);
    p.alt_cap = {1.5, 0.0};
    std::size_t messages = 0;
    const auto compress = TestingScheme::type_compression(n, 2, &messages);
    const double e = 0.2;
    const ThresholdResult t = threshold_scheme(p, compress, messages, n, e);
    const ErrorPair err = mixture_errors(t.scheme, p);
    EXPECT_LE(err.beta, 1.5 * ky * r * m * std::exp(-static_cast<double>(n) * e) + 1e-12);
  }
}

TEST(ChangeOfMeasure, HoldsForRandomTables) {
  std::mt19937_64 rng(48);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    MessageLaw p{8, 1, {}}, q{8, 1, {}};
    double tp = 0;
    for (int c = 0; c < 8; ++c) {
      p.prob.push_back(u(rng));
      tp += p.prob.back();
      q.prob.push_back(2.0 * u(rng));
    }
    for (double& v : p.prob) v /= tp;
    std::vector<double> acc(8);
    for (double& a : acc) a = u(rng);
    const ChangeOfMeasure c = change_of_measure(p, q, acc, 2, 0.3 * u(rng) - 0.1);
    EXPECT_TRUE(c.holds) << c.lhs << " vs " << c.rhs;
  }
}

TEST(Lrt, SingleLetterTwoMessages) {
  const Joint p({{0.4, 0.1}, {0.2, 0.3}});
  const LrtReport r = lrt_optimality_check({0, 1}, 2, BlockJoint::iid(p, 1),
                                           iid_alt(Dist::uniform(2), Dist::uniform(2)));
  EXPECT_EQ(r.cells, 4u);
  EXPECT_TRUE(r.all_vertices_lrt);
  ASSERT_GE(r.frontier.size(), 2u);
  EXPECT_NEAR(r.frontier.front().first, 0.0, 1e-15);
  EXPECT_NEAR(r.frontier.back().second, 0.0, 1e-15);
}

TEST(Lrt, IdenticalHypothesesLieOnTheDiagonal) {
  const Dist px({0.3, 0.7}), py({0.6, 0.4});
  const Joint p = Joint::from_channel(px, Channel::from_columns({py, py}));
  const LrtReport r = lrt_optimality_check({0, 1}, 2, BlockJoint::iid(p, 1), iid_alt(py, px));
  for (const auto& [a, b] : r.frontier) EXPECT_NEAR(a + b, 1.0, 1e-12);
  EXPECT_TRUE(r.all_vertices_lrt);
}

TEST(Lrt, SingletonMessageSet) {
  std::mt19937_64 rng(49);
  const Joint p = rand_joint(rng);
  const LrtReport r = lrt_optimality_check({0, 0, 0, 0}, 1, BlockJoint::iid(p, 2),
                                           iid_alt(rand_dist(rng, 2), rand_dist(rng, 2)));
  EXPECT_EQ(r.cells, 4u);
  EXPECT_TRUE(r.all_vertices_lrt);
}

TEST(Typicality, EqualLawsKeepEverything) {
  const Dist p({0.2, 0.5, 0.3});
  const TypicalSet t = typicality_set(p, SourceModel::iid(p), 4, 0.01);
  EXPECT_EQ(t.size(), 81u);
  EXPECT_NEAR(t.probability, 1.0, 1e-12);
}

TEST(Typicality, BernoulliAgainstDirectSummation) {
  // Symbol 1 has probability 0.3 under P and 0.5 under Q.
  const std::size_t n = 10;
  const double gamma = 0.1;
  const Dist p({0.7, 0.3}), q({0.5, 0.5});
  const double d = oracle::kl(p.probs(), q.probs());
  double want = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double iota = k * std::log(0.3 / 0.5) + (n - k) * std::log(0.7 / 0.5);
    if (std::abs(iota / n - d) < gamma) {
      const double binom = std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0));
      want += binom * std::pow(0.3, k) * std::pow(0.7, n - k);
      count += static_cast<std::size_t>(std::llround(binom));
    }
  }
  const TypicalSet t = typicality_set(p, SourceModel::iid(q), n, gamma);
  EXPECT_NEAR(t.probability, want, 1e-12);
  EXPECT_EQ(t.size(), count);
}

TEST(Transform, IdentityAlternativeKeepsBounds) {
  std::mt19937_64 rng(50);
  const Joint j = rand_joint(rng);
  const TripleLaw null = triple_from_joint(j);
  const ConditionalAlternative alt = product_alternative(rand_dist(rng, 2), rand_dist(rng, 2));
  const TwoTerminalScheme s = to_two_terminal(random_scheme(rng, 3, 2, 2, false));
  const TransformCheck c = check_transform(s, null, alt, alt, 3, 0.2);
  const TransformSets sets = transform_sets(null, alt, alt, 3, 0.2);
  EXPECT_DOUBLE_EQ(sets.a_z, 0.0);
  EXPECT_DOUBLE_EQ(sets.a_xz, 0.0);
  EXPECT_DOUBLE_EQ(sets.a_yz, 0.0);
  EXPECT_TRUE(c.alpha_holds);
  EXPECT_TRUE(c.beta_holds);
  EXPECT_NEAR(c.beta_bound, std::exp(3 * 5 * 0.2) * c.source.beta, 1e-12);
}

TEST(Transform, OneSidedTightBoundAndSwap) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 5; ++k) {
    const Joint j = rand_joint(rng);
    const TripleLaw null = triple_from_joint(j);
    const ConditionalAlternative a = product_alternative(rand_dist(rng, 2), rand_dist(rng, 2));
    const ConditionalAlternative b = product_alternative(rand_dist(rng, 2), rand_dist(rng, 2));
    const TwoTerminalScheme s = to_two_terminal(random_scheme(rng, 3, 2, 2, true));
    const TransformCheck fwd = check_transform(s, null, a, b, 3, 0.15);
    ASSERT_TRUE(fwd.beta_bound_trivial_z.has_value());
    EXPECT_TRUE(fwd.beta_trivial_z_holds);
    EXPECT_TRUE(fwd.alpha_holds);
    EXPECT_TRUE(fwd.beta_holds);
    const TransformCheck back = check_transform(s, null, b, a, 3, 0.15);
    EXPECT_TRUE(back.alpha_holds);
    EXPECT_TRUE(back.beta_holds);
    EXPECT_TRUE(back.beta_trivial_z_holds);
  }
}

TEST(Transform, OneSidedRoundTrip) {
  std::mt19937_64 rng(52);
  const TestingScheme s = random_scheme(rng, 2, 2, 2, true);
  const TestingScheme back = to_one_sided(to_two_terminal(s));
  EXPECT_EQ(back.compress, s.compress);
  EXPECT_EQ(back.accept, s.accept);
}

TEST(MixSup, MatchedAlternativeGivesZero) {
  const Dist p({0.2, 0.8});
  const MixSupResult r = mix_sup_probabilities({p}, Dist({1.0}), {SourceModel::iid(p)}, 6, 0.05);
  EXPECT_DOUBLE_EQ(r.probability[0], 0.0);
  EXPECT_DOUBLE_EQ(r.d_star[0], 0.0);
}

TEST(MixSup, MissingSupportGivesPowerLaw) {
  // Q puts no mass on symbol 2, which carries P-mass 0.2.
  const Dist p({0.5, 0.3, 0.2});
  for (std::size_t n : {1u, 3u, 5u}) {
    const MixSupResult r = mix_sup_probabilities({p}, Dist({1.0}), {SourceModel::iid(Dist({0.5, 0.5, 0.0}))}, n, 0.1);
    EXPECT_NEAR(r.probability[0], std::pow(0.8, n), 1e-12);
  }
}

TEST(MixSup, TwoComponentSweepNonincreasing) {
  const MixSupSweep s = mix_sup_sweep({Dist({0.2, 0.8}), Dist({0.8, 0.2})}, Dist({0.5, 0.5}),
                                      {SourceModel::iid(Dist({0.5, 0.5}))}, {2, 4, 6, 8}, 0.4);
  ASSERT_EQ(s.results.size(), 4u);
  for (bool b : s.nonincreasing) EXPECT_TRUE(b);
  EXPECT_NEAR(s.results[0].probability[0], 0.32, 1e-12);
  for (std::size_t k = 1; k < 4; ++k)
    for (std::size_t c = 0; c < 2; ++c)
      EXPECT_LE(s.results[k].probability[c], s.results[k - 1].probability[c] + 1e-12);
}

TEST(MixSup, MatchesEnumerationWhenNotMonotone) {
  const std::vector<Dist> comps = {Dist({0.2, 0.8}), Dist({0.7, 0.3})};
  const Dist w({0.5, 0.5}), q({0.5, 0.5});
  const double gamma = 0.2;
  const MixSupSweep s = mix_sup_sweep(comps, w, {SourceModel::iid(q)}, {2, 4, 6, 8}, gamma);
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t n = s.n[k];
    for (std::size_t c = 0; c < 2; ++c) {
      const double d = oracle::kl(comps[c].probs(), q.probs());
      double want = 0.0;
      for (std::uint64_t v = 0; v < oracle::ipow(2, n); ++v) {
        const auto seq = oracle::digits(v, 2, n);
        const double mix = 0.5 * oracle::iid_prob(comps[0].probs(), seq) + 0.5 * oracle::iid_prob(comps[1].probs(), seq);
        if (std::log(mix / oracle::iid_prob(q.probs(), seq)) < n * (d - gamma))
          want += oracle::iid_prob(comps[c].probs(), seq);
      }
      EXPECT_NEAR(s.results[k].probability[c], want, 1e-12);
    }
  }
  // The lattice of attainable densities makes the first component rise from n = 2 to n = 4.
  EXPECT_FALSE(s.nonincreasing[0]);
}

TEST(WakToHt, PerfectCodeHasZeroTypeOneError) {
  const Joint j = Joint::from_channel(Dist({0.4, 0.6}), Channel::bsc(0.2));
  const std::size_t n = 2;
  WakCode c;
  c.n = n;
  c.nx = c.ny = 2;
  c.m1 = 1;
  c.m2 = 4;
  c.phi1.assign(4, 0);
  c.phi2 = {0, 1, 2, 3};
  c.decode = {0, 1, 2, 3};
  const BlockJoint b = BlockJoint::iid(j, n);
  EXPECT_NEAR(wak_error(c, b), 0.0, 1e-15);
  const double eta = 8.0;
  const WakToHt r = wak_to_ht(c, b, eta);
  EXPECT_LE(r.errors.alpha, std::exp(-eta));
  EXPECT_TRUE(r.alpha_holds);
  EXPECT_TRUE(r.beta_holds);
  // With m2 = |Y|^n the miss-detection bound is at least one.
  EXPECT_GE(r.beta_bound, 1.0);
}

TEST(HtToWak, BoundAndMonteCarloAgreement) {
  std::mt19937_64 rng(53);
  const Joint j = rand_joint(rng);
  const std::size_t n = 3;
  const BlockJoint b = BlockJoint::iid(j, n);
  TestingScheme s;
  s.n = n;
  s.nx = s.ny = 2;
  s.compress = TestingScheme::type_compression(n, 2, &s.messages);
  s.accept.assign(8 * s.messages, 0.0);
  // Accept y^n whose type matches the message.
  for (std::uint64_t y = 0; y < 8; ++y) {
    std::size_t ones = 0;
    for (std::size_t d : oracle::digits(y, 2, n)) ones += d;
    s.accept[y * s.messages + ones] = 1.0;
  }
  const double gamma = 0.5;
  const HtToWak exp = ht_to_wak(s, b, gamma, 4, Binning::expected);
  EXPECT_TRUE(exp.bound_holds);
  const BinningSample mc = sample_binnings(s, b, gamma, 4, 10000, 7);
  EXPECT_NEAR(mc.mean, exp.expected_error, 3.0 * mc.stddev / std::sqrt(10000.0) + 1e-12);
  const HtToWak greedy = ht_to_wak(s, b, gamma, 4, Binning::greedy);
  ASSERT_TRUE(greedy.code.has_value());
  EXPECT_LE(greedy.code_error, exp.expected_error + 1e-12);
  EXPECT_NEAR(wak_error(*greedy.code, b), greedy.code_error, 1e-14);
}

TEST(HtToWak, FullBinCountIsErrorFreeOnCandidates) {
  const Joint j = Joint::from_channel(Dist::uniform(2), Channel::bsc(0.05));
  const std::size_t n = 2;
  const BlockJoint b = BlockJoint::iid(j, n);
  TestingScheme s;
  s.n = n;
  s.nx = s.ny = 2;
  s.compress = TestingScheme::identity_compression(n, 2);
  s.messages = 4;
  s.accept.assign(16, 0.0);
  for (std::uint64_t y = 0; y < 4; ++y) s.accept[y * 4 + y] = 1.0;
  const HtToWak r = ht_to_wak(s, b, 1.0, 4, Binning::greedy);
  ASSERT_TRUE(r.code.has_value());
  EXPECT_TRUE(r.bound_holds);
  EXPECT_LE(r.code_error, r.expected_error + 1e-12);
}

TEST(Slope, ExactExponentialAndConstant) {
  const std::vector<std::size_t> n = {1, 2, 3, 4, 5};
  std::vector<double> beta, flat;
  for (std::size_t k : n) {
    beta.push_back(0.7 * std::exp(-0.35 * static_cast<double>(k)));
    flat.push_back(0.25);
  }
  EXPECT_NEAR(fit_exponent(n, beta).slope, 0.35, 1e-12);
  EXPECT_NEAR(fit_exponent(n, flat).slope, 0.0, 1e-12);
  flat[2] = 0.0;
  EXPECT_THROW(fit_exponent(n, flat), AssumptionViolation);
}

TEST(Slope, ThresholdFamilyReachesExponent) {
  const Joint j = Joint::from_channel(Dist::uniform(2), Channel::bsc(0.1));
  const double e = 0.25;
  MixtureProblem p;
  p.joints = {j};
  p.weights = Dist({1.0});
  p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
  p.x_alternatives = {SourceModel::iid(Dist::uniform(2))};
  auto family = [&](std::size_t n) {
    return threshold_scheme(p, TestingScheme::identity_compression(n, 2), oracle::ipow(2, n), n, e).scheme;
  };
  std::vector<ErrorPair> errs;
  const SlopeFit f = empirical_exponent(family, j, {p.y_alternatives[0], p.x_alternatives[0]}, {2, 3, 4, 5, 6}, &errs);
  EXPECT_GE(f.slope, e - 0.1);
  EXPECT_EQ(errs.size(), 5u);
  std::ostringstream os;
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < errs.size(); ++k) rows.push_back({k + 2, errs[k]});
  write_sweep_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,alpha,beta,log_beta_over_n");
}

TEST(SchemeJson, RoundTripRejectsUnknownKeys) {
  std::mt19937_64 rng(54);
  const TestingScheme s = random_scheme(rng, 2, 2, 2, true);
  nlohmann::json j = s;
  const TestingScheme back = j.get<TestingScheme>();
  EXPECT_EQ(back.accept, s.accept);
  EXPECT_EQ(back.compress, s.compress);
  j["bogus"] = true;
  EXPECT_THROW(j.get<TestingScheme>(), std::invalid_argument);
}
