// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mixht/envelope.hpp"
#include "mixht/errors.hpp"
#include "mixht/exponent_opt.hpp"
#include "mixht/finite_n_lab.hpp"
#include "mixht/wak.hpp"
#include "support/oracles.hpp"

using namespace mixht;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (!pass) detail << "; ";
    else detail.str("");
    pass = false;
    detail << why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int prec = 10) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

const Dist kPx({0.643, 0.357});

MixtureProblem binary_instance() {
  MixtureProblem p;
  p.joints = {Joint::from_channel(kPx, Channel::bsc(0.1)), Joint::from_channel(kPx, Channel::z_channel(0.8))};
  p.weights = Dist({0.5, 0.5});
  p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
  p.x_alternatives = {SourceModel::iid(kPx)};
  return p;
}

Dist rand_dist(std::mt19937_64& rng, std::size_t k, double floor = 0.05) {
  return Dist::normalized(oracle::random_simplex(rng, k, floor));
}

Joint rand_joint(std::mt19937_64& rng, std::size_t nx = 2, std::size_t ny = 2) {
  std::vector<Dist> cols;
  for (std::size_t x = 0; x < nx; ++x) cols.push_back(rand_dist(rng, ny));
  return Joint::from_channel(rand_dist(rng, nx), Channel::from_columns(cols));
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  PipelineReport r;
  try {
    r = counterexample_pipeline(PipelineInputs{});
  } catch (const CheckFailed& e) {
    v.fail(std::string("pipeline aborted: ") + e.what());
    return v;
  }
  const double elapsed = seconds_since(t0);
  struct Row {
    const char* name;
    double got, want;
  };
  const double roots[3] = {r.poly.roots.size() > 0 ? r.poly.roots[0] : NAN,
                           r.poly.roots.size() > 1 ? r.poly.roots[1] : NAN,
                           r.poly.roots.size() > 2 ? r.poly.roots[2] : NAN};
  const std::vector<Row> rows = {
      {"lambda_BS", r.lambda_bs, 0.52803387},  {"d2phi_BS", r.d2_phi_bs, 2.84939426},
      {"x_BS", r.x_bs, 0.26638446},            {"F_BS", r.f_bs, 0.43966987},
      {"lambda_Z", r.lambda_z, 0.57321580},    {"threshold", r.threshold, 0.66422385},
      {"x_u", r.x_u, 0.26639635},              {"F_Z", r.f_z, 0.44286263},
      {"lambda_alpha", r.lambda_alpha, 0.56621676}, {"root1", roots[0], -0.00499064},
      {"root2", roots[1], 0.69185491},         {"root3", roots[2], 1.14818192},
      {"s0", r.poly.s0, -0.00088049},          {"s1", r.poly.s1, 0.01019190},
      {"d2phi_alpha", r.d2_phi_alpha, 4.16978820}, {"x_l", r.x_l, 0.26637872},
      {"F_alpha", r.f_alpha, 0.44433586},
  };
  std::size_t ok = 0;
  for (const auto& row : rows) {
    const double err = std::abs(row.got - row.want);
    if (std::isfinite(err) && err <= 1e-6) ++ok;
    else v.fail(std::string(row.name) + " got " + num(row.got) + " want " + num(row.want));
  }
  const Row residuals[] = {{"residual_u", r.residual_u, 1.18947233e-5}, {"residual_l", r.residual_l, -5.73889703e-6}};
  for (const auto& row : residuals) {
    const double rel = std::abs(row.got - row.want) / std::abs(row.want);
    if (rel <= 1e-10) ++ok;
    else v.fail(std::string(row.name) + " got " + num(row.got, 12) + " want " + num(row.want, 12) + " rel " + num(rel, 3));
  }
  if (elapsed >= 10.0) v.fail("runtime " + num(elapsed, 3) + " s");
  if (v.pass) v.detail << ok << " values within tolerance in " << num(elapsed, 3) << " s";
  else v.detail << " [" << ok << "/" << rows.size() + 2 << " ok]";
  return v;
}

Verdict criterion2() {
  Verdict v;
  const PipelineReport r = counterexample_pipeline(PipelineInputs{});
  const double sep = r.f_alpha - r.f_z;
  if (std::abs(sep - 0.00147323) > 1e-6) v.fail("separation " + num(sep));
  const ClassStructure st = classify(binary_instance());
  const double rc = entropy(kPx) - r.x_bs;
  const double th = theta_s(st, 0, rc);
  const double x1 = xi_i(st, 0, rc), x2 = xi_i(st, 1, rc);
  if (!(th < std::min(x1, x2))) v.fail("theta " + num(th) + " not below min xi " + num(std::min(x1, x2)));
  if (v.pass)
    v.detail << "separation " << num(sep, 9) << "; at R_c=" << num(rc, 8) << " theta=" << num(th, 8)
             << " < min xi=" << num(std::min(x1, x2), 8);
  return v;
}

Verdict criterion3() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ClassStructure st = classify(binary_instance());
  const EnvelopeEvaluator ev(0.1, 0.8, kPx[0]);
  const double d_bs = st.d_star_pair[0], d_z = st.d_star_pair[1];
  const double hx = entropy(kPx);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double rc = hx * (k + 0.5) / 20.0;
    const EnvelopeExponents e = envelope_exponents(ev, rc, d_bs, d_z);
    worst = std::max({worst, std::abs(theta_s(st, 0, rc) - e.theta), std::abs(xi_i(st, 0, rc) - e.xi_bs),
                      std::abs(xi_i(st, 1, rc) - e.xi_z)});
  }
  if (worst > 1e-4) v.fail("binary instance max deviation " + num(worst, 3));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_grid = 0.0;
  for (int k = 0; k < 25; ++k) {
    const Dist px = rand_dist(rng, 2, 0.2);
    std::vector<Joint> joints;
    oracle::BinaryAuxOracle o;
    o.p0 = px[0];
    for (int i = 0; i < 2; ++i) {
      const double a = unif(rng), b = unif(rng);
      joints.push_back(Joint::from_channel(px, Channel({{a, b}, {1 - a, 1 - b}})));
      o.t.push_back({{{a, b}, {1 - a, 1 - b}}});
      o.d.push_back(0.1 * unif(rng));
    }
    const double rc = entropy(px) * (0.1 + 0.8 * unif(rng));
    const double lp = optimize_auxiliary(joints, o.d, rc, Objective::min_over_class).value;
    const double grid = o.solve(rc);
    worst_grid = std::max(worst_grid, std::abs(lp - grid));
    if (grid > lp + 1e-9) v.fail("instance " + std::to_string(k) + ": lattice kernel beats solver by " + num(grid - lp, 3));
  }
  if (worst_grid > 2e-3) v.fail("lattice oracle deviation " + num(worst_grid, 3));
  const double elapsed = seconds_since(t0);
  if (elapsed >= 120.0) v.fail("runtime " + num(elapsed, 3) + " s");
  if (v.pass)
    v.detail << "envelope max dev " << num(worst, 3) << " over 20 R_c; lattice oracle max dev " << num(worst_grid, 3)
             << " over 25 instances; " << num(elapsed, 3) << " s";
  return v;
}

Verdict criterion4() {
  Verdict v;
  // Concavity and monotonicity of theta and xi curves.
  std::mt19937_64 rng(4);
  std::vector<MixtureProblem> instances = {binary_instance()};
  for (int k = 0; k < 3; ++k) {
    MixtureProblem p;
    const Dist px = rand_dist(rng, 2, 0.2);
    for (int i = 0; i < 2; ++i) {
      const Joint j = rand_joint(rng);
      p.joints.push_back(Joint::from_channel(px, j.y_given_x()));
    }
    p.weights = Dist({0.5, 0.5});
    p.y_alternatives = {SourceModel::iid(rand_dist(rng, 2)), SourceModel::iid(rand_dist(rng, 2))};
    p.x_alternatives = {SourceModel::iid(rand_dist(rng, 2))};
    instances.push_back(p);
  }
  std::size_t checks = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const ClassStructure st = classify(instances[k]);
    const double hx = entropy(st.marginals[0]);
    std::vector<double> grid;
    for (int g = 0; g <= 16; ++g) grid.push_back(hx * g / 16.0);
    std::vector<std::vector<double>> curves(1 + st.members());
    for (double r : grid) {
      curves[0].push_back(theta_s(st, 0, r));
      for (std::size_t i = 0; i < st.members(); ++i) curves[1 + i].push_back(xi_i(st, i, r));
    }
    for (const auto& c : curves) {
      for (std::size_t g = 0; g + 1 < c.size(); ++g) {
        ++checks;
        if (c[g + 1] < c[g] - 1e-6) v.fail("instance " + std::to_string(k) + " curve decreases at grid " + std::to_string(g));
      }
      for (std::size_t g = 1; g + 1 < c.size(); ++g) {
        ++checks;
        if (c[g] < 0.5 * (c[g - 1] + c[g + 1]) - 1e-6) v.fail("instance " + std::to_string(k) + " curve not concave at grid " + std::to_string(g));
      }
    }
    for (std::size_t i = 0; i < st.members(); ++i)
      for (double extra : {0.0, 0.1}) {
        ++checks;
        const double want = mutual_information(st.joints[i]) + st.d_star_pair[i];
        const double got = xi_i(st, i, hx + extra);
        if (std::abs(got - want) > 1e-6) v.fail("xi at full rate off by " + num(got - want, 3));
      }
  }
  // Staircase monotonicity and breakpoints.
  {
    MixtureProblem p;
    for (int i = 0; i < 3; ++i) p.joints.push_back(rand_joint(rng));
    p.weights = Dist({0.2, 0.3, 0.5});
    p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
    p.x_alternatives = {SourceModel::iid(Dist::uniform(2))};
    const ClassStructure st = classify(p);
    EpsilonOptions opt;
    opt.assume_separable = true;
    const double rc = 0.3;
    double prev = -1.0;
    for (int e = 0; e < 100; ++e) {
      const double val = mixture_epsilon_exponent(p, st, rc, e / 100.0, opt);
      ++checks;
      if (val < prev - 1e-12) v.fail("staircase decreases at eps " + num(e / 100.0));
      prev = val;
    }
    const StaircaseResult base = mixture_epsilon_staircase(st, rc, 0.0, opt);
    for (std::size_t k = 0; k + 1 < base.breakpoints.size(); ++k) {
      const double b = base.breakpoints[k];
      ++checks;
      const double at = mixture_epsilon_exponent(p, st, rc, b, opt);
      const double below = mixture_epsilon_exponent(p, st, rc, std::nextafter(b, 0.0), opt);
      if (at != base.sorted_xi[k + 1] || below != base.sorted_xi[k]) v.fail("breakpoint " + std::to_string(k) + " misplaced");
    }
  }
  // Information-measure invariants.
  for (int k = 0; k < 200; ++k) {
    const std::size_t nx = 2 + k % 3, ny = 2 + (k / 3) % 3;
    const Joint j = rand_joint(rng, nx, ny);
    const Dist px = j.x_marginal(), py = j.y_marginal();
    std::vector<double> flat = j.flat();
    const double mi = mutual_information(j);
    checks += 4;
    if (std::abs(mi - (entropy(px) + entropy(py) - oracle::entropy(flat))) > 1e-12) v.fail("MI identity");
    if (mi < -1e-15) v.fail("negative MI");
    if (entropy(px) > std::log(static_cast<double>(nx)) + 1e-12) v.fail("entropy above log|X|");
    const Dist q = rand_dist(rng, nx);
    const double d = kl_divergence(px, q).value();
    if (d < 0.0 || std::abs(d - oracle::kl(px.probs(), q.probs())) > 1e-12) v.fail("KL mismatch");
  }
  if (v.pass) v.detail << checks << " property checks";
  return v;
}

Verdict criterion5() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t order = static_cast<std::size_t>(k % 3);
    const std::size_t a = 2 + (k % 2);
    const std::size_t contexts = oracle::ipow(a, order);
    oracle::Chain chain;
    chain.order = order;
    chain.alphabet = a;
    std::vector<Dist> rows;
    for (std::size_t c = 0; c < contexts; ++c) {
      chain.transition.push_back(oracle::random_simplex(rng, a, 0.1));
      rows.emplace_back(chain.transition.back());
    }
    chain.initial = oracle::random_simplex(rng, contexts, 0.1);
    const SourceModel q = order == 0 ? SourceModel::iid(rows[0]) : SourceModel::markov(order, rows, Dist(chain.initial));
    if (order == 0) chain.initial = {1.0};
    const auto pv = oracle::random_simplex(rng, a, 0.1);
    const double rate = divergence_rate(Dist(pv), q).value();
    for (std::size_t n = order + 1; n <= 8; ++n) {
      const double inc = oracle::block_kl(pv, chain, n + 1) - oracle::block_kl(pv, chain, n);
      worst = std::max(worst, std::abs(inc - rate));
      ++comparisons;
    }
  }
  const double elapsed = seconds_since(t0);
  if (worst > 1e-9) v.fail("max deviation " + num(worst, 3));
  if (elapsed >= 30.0) v.fail("runtime " + num(elapsed, 3) + " s");
  if (v.pass) v.detail << comparisons << " block increments, max deviation " << num(worst, 3) << ", " << num(elapsed, 3) << " s";
  return v;
}

ConditionalAlternative rand_conditional(std::mt19937_64& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
  std::vector<Dist> xc, yc;
  for (std::size_t z = 0; z < nz; ++z) {
    xc.push_back(rand_dist(rng, nx));
    yc.push_back(rand_dist(rng, ny));
  }
  return {rand_dist(rng, nz), Channel::from_columns(xc), Channel::from_columns(yc)};
}

Verdict criterion6() {
  Verdict v;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int instances = 24;
  std::size_t checks = 0;
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng() % (hi - lo + 1)); };
  for (int k = 0; k < instances; ++k) {
    const std::string tag = "instance " + std::to_string(k) + ": ";
    const std::size_t n = pick(1, 4);

    // Threshold regions for a mixture problem.
    MixtureProblem p;
    const std::size_t m = pick(1, 2), ky = pick(1, 2), rx = pick(1, 2);
    for (std::size_t i = 0; i < m; ++i) p.joints.push_back(rand_joint(rng));
    p.weights = rand_dist(rng, m, 0.5);
    for (std::size_t j = 0; j < ky; ++j) p.y_alternatives.push_back(SourceModel::iid(rand_dist(rng, 2)));
    for (std::size_t t = 0; t < rx; ++t) p.x_alternatives.push_back(SourceModel::iid(rand_dist(rng, 2)));
    p.alt_cap = {1.0 + 2.0 * unif(rng), 0.0};
    const std::size_t xc = oracle::ipow(2, n);
    const std::size_t messages = std::min<std::size_t>(xc, pick(1, 4));
    std::vector<std::size_t> compress(xc);
    for (auto& u : compress) u = rng() % messages;
    const double e = -0.2 + 0.8 * unif(rng);
    const ThresholdResult th = threshold_scheme(p, compress, messages, n, e);

    std::vector<MessageLaw> nulls, alts;
    for (const Joint& j : p.joints) nulls.push_back(induced_null(compress, messages, BlockJoint::iid(j, n)));
    for (const auto& qy : p.y_alternatives)
      for (const auto& qx : p.x_alternatives)
        alts.push_back(induced_product(compress, messages, qy.block_probabilities(n), qx.block_probabilities(n)));
    for (const auto& pl : nulls)
      for (const auto& ql : alts) {
        ++checks;
        const ChangeOfMeasure c = change_of_measure(pl, ql, th.scheme.accept, n, e);
        if (!c.holds) v.fail(tag + "change of measure " + num(c.lhs) + " < " + num(c.rhs));
      }
    ++checks;
    if (!change_of_measure(th.p_bar, th.q_max, th.scheme.accept, n, e).holds) v.fail(tag + "change of measure on the region");
    const double beta = mixture_errors(th.scheme, p).beta;
    const double cap = p.alt_cap.at(n) * static_cast<double>(ky * rx * m) * std::exp(-static_cast<double>(n) * e);
    ++checks;
    if (beta > cap * (1.0 + 1e-12)) v.fail(tag + "mixture miss-detection " + num(beta) + " above " + num(cap));

    // Code transformation between two alternatives, both directions.
    {
      const std::size_t nz = pick(1, 2);
      const std::size_t nt = std::min<std::size_t>(n, nz == 2 ? 2 : 3);
      TripleLaw law;
      law.nx = law.ny = 2;
      law.nz = nz;
      law.prob = oracle::random_simplex(rng, 4 * nz, 0.05);
      const ConditionalAlternative a = rand_conditional(rng, 2, 2, nz), b = rand_conditional(rng, 2, 2, nz);
      const double gamma = 0.05 + 0.45 * unif(rng);
      for (int dir = 0; dir < 2; ++dir) {
        TwoTerminalScheme s;
        s.n = nt;
        s.nx = s.ny = 2;
        s.nz = nz;
        s.m1 = pick(1, 3);
        s.m2 = pick(1, 3);
        const std::size_t zc = oracle::ipow(nz, nt);
        s.phi1.resize(oracle::ipow(2, nt) * zc);
        s.phi2.resize(oracle::ipow(2, nt) * zc);
        for (auto& u : s.phi1) u = rng() % s.m1;
        for (auto& u : s.phi2) u = rng() % s.m2;
        s.accept.resize(s.m1 * s.m2);
        for (auto& x : s.accept) x = unif(rng) < 0.3 ? unif(rng) : static_cast<double>(rng() % 2);
        const TransformCheck c = dir == 0 ? check_transform(s, law, a, b, nt, gamma) : check_transform(s, law, b, a, nt, gamma);
        checks += 2;
        if (!c.alpha_holds) v.fail(tag + "transform alpha bound, direction " + std::to_string(dir));
        if (!c.beta_holds) v.fail(tag + "transform beta bound, direction " + std::to_string(dir));
      }
    }

    // WAK codes and testing schemes in both directions.
    {
      const std::size_t nw = std::min<std::size_t>(n, 3);
      const Joint j = rand_joint(rng);
      const BlockJoint b = BlockJoint::iid(j, nw);
      const std::size_t yc = oracle::ipow(2, nw);
      WakCode code;
      code.n = nw;
      code.nx = code.ny = 2;
      code.m1 = pick(1, 4);
      code.m2 = pick(1, yc);
      code.phi1.resize(oracle::ipow(2, nw));
      code.phi2.resize(yc);
      for (auto& u : code.phi1) u = rng() % code.m1;
      for (auto& u : code.phi2) u = rng() % code.m2;
      code.decode.resize(code.m1 * code.m2);
      for (auto& y : code.decode) y = unif(rng) < 0.1 ? kErasure : rng() % yc;
      const WakToHt w = wak_to_ht(code, b, 3.0 * unif(rng));
      checks += 2;
      if (!w.alpha_holds) v.fail(tag + "WAK to test alpha bound");
      if (!w.beta_holds) v.fail(tag + "WAK to test beta bound");

      TestingScheme s;
      s.n = nw;
      s.nx = s.ny = 2;
      s.messages = pick(1, 4);
      s.compress.resize(oracle::ipow(2, nw));
      for (auto& u : s.compress) u = rng() % s.messages;
      s.accept.resize(yc * s.messages);
      for (auto& x : s.accept) x = unif(rng);
      const double gamma = 0.5 + 3.5 * unif(rng);
      const HtToWak h = ht_to_wak(s, b, gamma, pick(1, 8), Binning::greedy);
      checks += 2;
      if (!h.bound_holds) v.fail(tag + "test to WAK expected-error bound");
      if (h.code_error > h.expected_error + 1e-12) v.fail(tag + "greedy binning worse than expectation");
    }
  }
  if (v.pass) v.detail << instances << " randomized instances, " << checks << " exact inequality checks";
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::mt19937_64 rng(7);
  std::vector<WakInstance> instances;
  instances.push_back(make_wak_instance({Joint::from_channel(kPx, Channel::bsc(0.1)),
                                         Joint::from_channel(Dist({0.3, 0.7}), Channel::z_channel(0.8))},
                                        Dist({0.4, 0.6})));
  instances.push_back(make_wak_instance(binary_instance().joints, Dist({0.5, 0.5})));
  for (int k = 0; k < 4; ++k) {
    std::vector<Joint> js;
    for (int i = 0; i < 2 + k % 2; ++i) js.push_back(rand_joint(rng, 2, 2 + k % 2));
    instances.push_back(make_wak_instance(js, rand_dist(rng, js.size(), 0.5)));
  }
  double worst = 0.0;
  std::size_t checks = 0;
  EpsilonOptions opt;
  opt.assume_separable = true;
  for (const auto& inst : instances) {
    const double hx = entropy(inst.structure.marginals[0]);
    for (double f : {0.0, 0.3, 0.7, 1.1}) {
      const double rc = f * hx;
      for (double eps : {0.0, 0.2, 0.45, 0.8}) {
        const double r2 = wak_rate_eps(inst, rc, eps, opt);
        const double e = mixture_epsilon_exponent(inst.problem, inst.structure, rc, eps, opt);
        worst = std::max(worst, std::abs(r2 + e - inst.log_y));
        ++checks;
      }
      worst = std::max(worst, std::abs(wak_rate_zero(inst, rc) + compound_zero_exponent(inst.structure, rc) - inst.log_y));
      ++checks;
    }
  }
  if (worst > 1e-9) v.fail("max duality gap " + num(worst, 3));
  if (v.pass) v.detail << checks << " identities on " << instances.size() << " instances, max gap " << num(worst, 3);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    std::printf("CRITERION %zu %s: %s\n", k + 1, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
