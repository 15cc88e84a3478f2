#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mixht/exponent_opt.hpp"
#include "support/oracles.hpp"

using namespace mixht;

namespace {

const Dist kPx({0.643, 0.357});

MixtureProblem binary_instance() {
  MixtureProblem p;
  p.joints = {Joint::from_channel(kPx, Channel::bsc(0.1)), Joint::from_channel(kPx, Channel::z_channel(0.8))};
  p.weights = Dist({0.5, 0.5});
  p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
  p.x_alternatives = {SourceModel::iid(kPx)};
  return p;
}

double d_oracle(const Joint& j) { return std::log(2.0) - oracle::entropy(j.y_marginal().probs()); }

}  // namespace

TEST(Classify, BinaryInstance) {
  const ClassStructure st = classify(binary_instance());
  ASSERT_EQ(st.class_count(), 1u);
  EXPECT_EQ(st.classes[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(st.d_star_x[0], 0.0, 1e-15);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(st.d_star_pair[i], d_oracle(st.joints[i]), 1e-14);
}

TEST(Classify, SplitsByMarginalAndPicksFirstMinimiser) {
  MixtureProblem p;
  p.joints = {Joint::from_channel(Dist({0.5, 0.5}), Channel::bsc(0.2)),
              Joint::from_channel(Dist({0.2, 0.8}), Channel::bsc(0.2)),
              Joint::from_channel(Dist({0.5, 0.5}), Channel::z_channel(0.3))};
  p.weights = Dist({0.3, 0.3, 0.4});
  p.y_alternatives = {SourceModel::iid(Dist({0.9, 0.1})), SourceModel::iid(Dist({0.5, 0.5})),
                      SourceModel::iid(Dist({0.5, 0.5}))};
  p.x_alternatives = {SourceModel::iid(Dist({0.5, 0.5}))};
  const ClassStructure st = classify(p);
  ASSERT_EQ(st.class_count(), 2u);
  EXPECT_EQ(st.class_of, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(st.j_star[0], 1u);
  EXPECT_NEAR(st.d_star_x[1], oracle::kl({0.2, 0.8}, {0.5, 0.5}), 1e-14);
}

TEST(Classify, InfiniteRatesRaise) {
  MixtureProblem p = binary_instance();
  p.y_alternatives = {SourceModel::iid(Dist({1.0, 0.0}))};
  EXPECT_THROW(classify(p), AssumptionViolation);
}

TEST(Exponents, EndpointValues) {
  const ClassStructure st = classify(binary_instance());
  const double hx = oracle::entropy(kPx.probs());
  for (std::size_t i = 0; i < 2; ++i) {
    const double full = mutual_information(st.joints[i]) + st.d_star_pair[i];
    EXPECT_NEAR(xi_i(st, i, hx), full, 1e-9);
    EXPECT_NEAR(xi_i(st, i, hx + 0.5), full, 1e-9);
    EXPECT_NEAR(xi_i(st, i, 0.0), st.d_star_pair[i], 1e-12);
  }
  EXPECT_NEAR(theta_s(st, 0, 0.0), std::min(st.d_star_pair[0], st.d_star_pair[1]), 1e-12);
  EXPECT_NEAR(theta_s(st, 0, hx),
              std::min(mutual_information(st.joints[0]) + st.d_star_pair[0],
                       mutual_information(st.joints[1]) + st.d_star_pair[1]),
              1e-9);
}

TEST(Exponents, MonotoneConcaveAndBelowXi) {
  const ClassStructure st = classify(binary_instance());
  std::vector<double> th;
  for (int g = 0; g <= 12; ++g) {
    const double rc = 0.05 * g;
    th.push_back(theta_s(st, 0, rc));
    EXPECT_LE(th.back(), std::min(xi_i(st, 0, rc), xi_i(st, 1, rc)) + 1e-9);
  }
  for (std::size_t g = 1; g < th.size(); ++g) EXPECT_GE(th[g], th[g - 1] - 1e-10);
  for (std::size_t g = 1; g + 1 < th.size(); ++g) EXPECT_GE(2 * th[g], th[g - 1] + th[g + 1] - 1e-8);
}

TEST(Exponents, LatticeOracleLowerBound) {
  const ClassStructure st = classify(binary_instance());
  oracle::BinaryAuxOracle o;
  o.p0 = kPx[0];
  o.steps = 24;
  for (std::size_t i = 0; i < 2; ++i) {
    const Channel ch = st.joints[i].y_given_x();
    o.t.push_back({{{ch(0, 0), ch(0, 1)}, {ch(1, 0), ch(1, 1)}}});
    o.d.push_back(st.d_star_pair[i]);
  }
  for (double rc : {0.1, 0.3, 0.5}) {
    const double lattice = o.solve(rc);
    const double solver = theta_s(st, 0, rc);
    EXPECT_GE(solver, lattice - 1e-9) << rc;
    EXPECT_LE(solver - lattice, 5e-3) << rc;
  }
}

TEST(Exponents, EvaluateKernelRecomputesObjective) {
  const ClassStructure st = classify(binary_instance());
  const std::vector<double> d = st.d_star_pair;
  const AuxiliaryResult r = optimize_auxiliary(st.joints, d, 0.3, Objective::min_over_class);
  const AuxiliaryResult e = evaluate_kernel(st.joints, d, r.kernel);
  EXPECT_NEAR(e.value, r.value, 1e-12);
  EXPECT_LE(e.rate, 0.3 + 1e-9);
  // The identity kernel reveals X completely.
  const AuxiliaryResult id = evaluate_kernel(st.joints, d, Channel::identity(2));
  EXPECT_NEAR(id.rate, oracle::entropy(kPx.probs()), 1e-14);
  EXPECT_NEAR(id.member_values[0], mutual_information(st.joints[0]) + d[0], 1e-14);
}

TEST(Exponents, CompoundIsMinOverClasses) {
  const ClassStructure st = classify(binary_instance());
  EXPECT_DOUBLE_EQ(compound_zero_exponent(st, 0.2), theta_s(st, 0, 0.2));
}

TEST(Staircase, LookupBreakpoints) {
  const std::vector<double> xi = {0.3, 0.1, 0.2};
  const Dist w({0.5, 0.2, 0.3});
  // Sorted order: 1 (0.2), 2 (0.3), 0 (0.5); breakpoints 0.2, 0.5, 1.0.
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.0).value, 0.1);
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.19).value, 0.1);
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.2).value, 0.2);
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.49).value, 0.2);
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.5).value, 0.3);
  EXPECT_DOUBLE_EQ(staircase_lookup(xi, w, 0.999).value, 0.3);
  const StaircaseResult r = staircase_lookup(xi, w, 0.3);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{1, 2, 0}));
  ASSERT_EQ(r.breakpoints.size(), 3u);
  EXPECT_NEAR(r.breakpoints[1], 0.5, 1e-15);
}

TEST(Staircase, TiesKeepInputOrder) {
  const StaircaseResult r = staircase_lookup({0.2, 0.2, 0.1}, Dist({0.3, 0.3, 0.4}), 0.5);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Epsilon, ZeroLevelMatchesCompound) {
  const MixtureProblem p = binary_instance();
  const ClassStructure st = classify(p);
  EpsilonOptions opt;
  opt.assume_separable = true;
  EXPECT_NEAR(mixture_epsilon_exponent(p, st, 0.3, 0.0, opt), xi_i(st, 0, 0.3) < xi_i(st, 1, 0.3)
                                                                   ? xi_i(st, 0, 0.3)
                                                                   : xi_i(st, 1, 0.3),
              1e-9);
}

TEST(ReducedTheta, FirstLevelIsThetaAndLastIsLargestXi) {
  const ClassStructure st = classify(binary_instance());
  const double rc = 0.2;
  const ReducedTheta r1 = reduced_theta(st, 1, rc);
  EXPECT_NEAR(r1.value.value(), theta_s(st, 0, rc), 1e-12);
  const ReducedTheta r2 = reduced_theta(st, 2, rc);
  EXPECT_TRUE(r2.matches);
  EXPECT_NEAR(r2.value.value(), std::max(xi_i(st, 0, rc), xi_i(st, 1, rc)), 1e-6);
  EXPECT_THROW(reduced_theta(st, 0, rc), std::out_of_range);
  EXPECT_THROW(reduced_theta(st, 3, rc), std::out_of_range);
}

TEST(Lagrangian, MatchesLegendreOfTheta) {
  const ClassStructure st = classify(binary_instance());
  const double hx = oracle::entropy(kPx.probs());
  for (double mu : {0.5, 1.0, 3.0}) {
    const LagrangianResult r = r_ht_mu(st.joints, st.d_star_pair, mu);
    double legendre = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 200; ++g) {
      const double rc = hx * g / 200.0;
      legendre = std::min(legendre, rc - mu * theta_s(st, 0, rc));
    }
    EXPECT_LE(r.value, legendre + 1e-7) << mu;
    EXPECT_GE(r.value, legendre - 2e-3) << mu;
    EXPECT_NEAR(r.value, r.rate - mu * r.exponent, 1e-12);
  }
  EXPECT_THROW(r_ht_mu(st.joints, st.d_star_pair, 0.0), std::invalid_argument);
}

TEST(Lagrangian, RelaxedNeverExceedsStart) {
  const ClassStructure st = classify(binary_instance());
  RelaxedOptions opt;
  opt.restarts = 2;
  opt.max_iterations = 100;
  const RelaxedLagrangianResult r = r_ht_mu_alpha(st.joints, st.d_star_pair, 1.0, 0.5, opt);
  EXPECT_LE(r.value, r.start_value + 1e-12);
}

TEST(Curves, HashStableAndCsvShape) {
  const Channel k({{0.25, 0.5}, {0.75, 0.5}});
  EXPECT_EQ(kernel_hash(k), kernel_hash(Channel({{0.25 + 1e-12, 0.5}, {0.75 - 1e-12, 0.5}})));
  EXPECT_NE(kernel_hash(k), kernel_hash(Channel::identity(2)));
  const ClassStructure st = classify(binary_instance());
  const std::vector<double> grid = {0.0, 0.2};
  std::ostringstream os;
  write_curve_csv(os, {theta_curve(st, 0, grid), xi_curve(st, 1, grid), compound_curve(st, grid)});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "curve,R_c,value,kernel_hash");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(ExceptionalSet, BinaryInstanceSeparatesBelowEntropy) {
  const ClassStructure st = classify(binary_instance());
  const ExceptionalSet es = exceptional_set(st, 0.385);
  EXPECT_EQ(es.members, (std::vector<std::size_t>{0}));
  EXPECT_LT(es.min_theta, es.min_xi_all);
  const ExceptionalSet none = exceptional_set(st, 0.0);
  EXPECT_TRUE(none.members.empty());
}

TEST(ProblemJson, UnknownKeysRejected) {
  nlohmann::json j = binary_instance();
  EXPECT_NO_THROW(j.get<MixtureProblem>());
  j["extra"] = 1;
  EXPECT_THROW(j.get<MixtureProblem>(), std::invalid_argument);
}
