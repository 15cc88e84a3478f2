#include "mixht_cli/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "mixht/envelope.hpp"
#include "mixht/errors.hpp"
#include "mixht/finite_n_lab.hpp"
#include "mixht/wak.hpp"

namespace mixht::cli {

namespace {

using json = nlohmann::json;

// Configuration content is unusable as given.
class BadConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_keys(const json& cfg, const std::set<std::string>& allowed, const std::string& where) {
  if (!cfg.is_object()) throw BadConfig(where + ": configuration must be a JSON object");
  for (const auto& [key, _] : cfg.items())
    if (!allowed.count(key)) throw BadConfig(where + ": unknown key '" + key + "'");
}

double number_or(const json& cfg, const char* key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number()) throw BadConfig(std::string("'") + key + "' must be a number");
  return cfg.at(key).get<double>();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

json load_config(const RunConfig& rc) {
  json cfg = json::object();
  if (!rc.instance_path.empty()) {
    std::ifstream in(rc.instance_path);
    if (!in) throw BadConfig("cannot read config file '" + rc.instance_path + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw BadConfig(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw BadConfig("config must be a JSON object");
  }
  if (!rc.params.is_object()) throw BadConfig("parameter overrides must form an object");
  cfg.merge_patch(rc.params);
  return cfg;
}

std::vector<double> grid_from(const json& g) {
  if (g.is_array()) return g.get<std::vector<double>>();
  if (g.is_string()) return parse_grid(g.get<std::string>());
  if (g.is_object()) {
    require_keys(g, {"start", "stop", "step"}, "rc_grid");
    std::ostringstream s;
    s.precision(17);
    s << g.at("start").get<double>() << ':' << g.at("stop").get<double>() << ':' << g.at("step").get<double>();
    return parse_grid(s.str());
  }
  throw BadConfig("rc_grid must be an array, a range object or an 'a:b:step' string");
}

struct Outcome {
  json doc = json::object();
  std::string csv;
  int exit_code = kOk;
  std::string message;
};

// ---------------------------------------------------------------------------
// exponents

Outcome run_exponents(const json& cfg_in, const RunConfig& rc, bool has_instance) {
  static const std::set<std::string> keys = {"joints",  "weights", "y_alternatives", "x_alternatives",
                                             "gamma_p", "gamma_q", "Gamma_q",        "rc_grid",
                                             "curves"};
  require_keys(cfg_in, keys, "exponents");
  json cfg = cfg_in;
  if (!has_instance || !cfg.contains("joints")) {
    json base;
    to_json(base, binary_counterexample_problem());
    base.merge_patch(cfg);
    cfg = base;
  }
  std::vector<std::string> wanted = {"theta", "xi"};
  if (cfg.contains("curves")) {
    wanted = cfg.at("curves").get<std::vector<std::string>>();
    cfg.erase("curves");
  }
  for (const auto& w : wanted)
    if (w != "theta" && w != "xi" && w != "compound") throw BadConfig("unknown curve '" + w + "'");
  const json grid_json = cfg.contains("rc_grid") ? cfg.at("rc_grid") : json::array();
  cfg.erase("rc_grid");
  MixtureProblem problem;
  from_json(cfg, problem);
  problem.rc_grid = rc.rc_grid ? parse_grid(*rc.rc_grid) : grid_from(grid_json);
  if (problem.rc_grid.empty()) throw BadConfig("empty R_c grid");
  const ClassStructure st = classify(problem);

  std::vector<ExponentCurve> curves;
  for (const auto& w : wanted) {
    if (w == "theta")
      for (std::size_t s = 0; s < st.class_count(); ++s) curves.push_back(theta_curve(st, s, problem.rc_grid));
    if (w == "xi")
      for (std::size_t i = 0; i < st.members(); ++i) curves.push_back(xi_curve(st, i, problem.rc_grid));
    if (w == "compound") curves.push_back(compound_curve(st, problem.rc_grid));
  }

  Outcome out;
  if (rc.format == Format::csv) {
    std::ostringstream os;
    write_curve_csv(os, curves, true);
    out.csv = os.str();
  }
  json jc = json::array();
  for (const auto& c : curves) {
    json samples = json::array();
    for (const auto& s : c.samples) samples.push_back({{"R_c", s.r_c}, {"value", s.value}, {"kernel_hash", s.kernel_hash}});
    jc.push_back({{"name", c.name}, {"samples", samples}});
  }
  out.doc["curves"] = jc;
  out.doc["d_star_pair"] = st.d_star_pair;
  return out;
}

// ---------------------------------------------------------------------------
// envelope

Outcome run_envelope(const json& cfg, const RunConfig& rc) {
  require_keys(cfg, {"delta", "eps", "alpha", "lambda", "p_x", "grid", "rc_grid"}, "envelope");
  BinaryScenario scn{number_or(cfg, "delta", 0.1), number_or(cfg, "eps", 0.8), number_or(cfg, "alpha", 0.28)};
  scn.validate();
  const double lambda = number_or(cfg, "lambda", 0.5);
  const double p_x = number_or(cfg, "p_x", 0.643);
  const auto grid = static_cast<std::size_t>(number_or(cfg, "grid", 20001));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw BadConfig("lambda must lie in [0, 1]");
  if (!(p_x > 0.0 && p_x < 1.0)) throw BadConfig("p_x must lie in (0, 1)");
  if (grid < 3) throw BadConfig("grid needs at least three points");

  EnvelopeOptions opt;
  opt.grid = grid;
  const auto env = lower_convex_envelope([&](double p) { return phi(scn, lambda, p); }, opt, {p_x});

  std::vector<double> rc_values;
  if (rc.rc_grid) rc_values = parse_grid(*rc.rc_grid);
  else if (cfg.contains("rc_grid")) rc_values = grid_from(cfg.at("rc_grid"));

  Outcome out;
  if (rc.format == Format::csv) {
    std::ostringstream os;
    write_envelope_csv(os, env);
    out.csv = os.str();
  }
  json pts = json::array();
  for (const auto& e : env) pts.push_back({{"p", e.p}, {"phi", e.phi}, {"psi", e.psi}, {"on_envelope", e.on_envelope}});
  out.doc["lambda"] = lambda;
  out.doc["psi_at_p_x"] = envelope_value(env, p_x);
  out.doc["points"] = pts;
  if (!rc_values.empty()) {
    const EnvelopeEvaluator ev(scn.delta, scn.eps, p_x, grid);
    const Dist px({p_x, 1.0 - p_x});
    const double d_bs = std::log(2.0) - entropy(scn.t1().apply(px));
    const double d_z = std::log(2.0) - entropy(scn.t2().apply(px));
    json ex = json::array();
    for (double r : rc_values) {
      const auto e = envelope_exponents(ev, r, d_bs, d_z);
      ex.push_back({{"R_c", r}, {"theta", e.theta}, {"xi_1", e.xi_bs}, {"xi_2", e.xi_z}, {"alpha_star", e.alpha_star}});
    }
    out.doc["exponents"] = ex;
  }
  return out;
}

// ---------------------------------------------------------------------------
// counterexample

struct Reference {
  const char* name;
  double expected;
  bool relative;
};

double reference_value(const PipelineReport& r, const std::string& name) {
  if (name == "lambda_bs") return r.lambda_bs;
  if (name == "d2_phi_bs") return r.d2_phi_bs;
  if (name == "x_bs") return r.x_bs;
  if (name == "F_bs") return r.f_bs;
  if (name == "lambda_z") return r.lambda_z;
  if (name == "threshold") return r.threshold;
  if (name == "x_u") return r.x_u;
  if (name == "F_z") return r.f_z;
  if (name == "lambda_alpha") return r.lambda_alpha;
  if (name == "root_1") return r.poly.roots.size() > 0 ? r.poly.roots[0] : NAN;
  if (name == "root_2") return r.poly.roots.size() > 1 ? r.poly.roots[1] : NAN;
  if (name == "root_3") return r.poly.roots.size() > 2 ? r.poly.roots[2] : NAN;
  if (name == "s_0") return r.poly.s0;
  if (name == "s_1") return r.poly.s1;
  if (name == "d2_phi_alpha") return r.d2_phi_alpha;
  if (name == "x_l") return r.x_l;
  if (name == "F_alpha") return r.f_alpha;
  if (name == "separation") return r.separation;
  if (name == "residual_u") return r.residual_u;
  if (name == "residual_l") return r.residual_l;
  return NAN;
}

const std::vector<Reference>& references() {
  static const std::vector<Reference> table = {
      {"lambda_bs", 0.52803387, false},     {"d2_phi_bs", 2.84939426, false},
      {"x_bs", 0.26638446, false},          {"F_bs", 0.43966987, false},
      {"lambda_z", 0.57321580, false},      {"threshold", 0.66422385, false},
      {"x_u", 0.26639635, false},           {"F_z", 0.44286263, false},
      {"lambda_alpha", 0.56621676, false},  {"root_1", -0.00499064, false},
      {"root_2", 0.69185491, false},        {"root_3", 1.14818192, false},
      {"s_0", -0.00088049, false},          {"s_1", 0.01019190, false},
      {"d2_phi_alpha", 4.16978820, false},  {"x_l", 0.26637872, false},
      {"F_alpha", 0.44433586, false},       {"separation", 0.00147323, false},
      {"residual_u", 1.18947233e-5, true},  {"residual_l", -5.73889703e-6, true},
  };
  return table;
}

Outcome run_counterexample(const json& cfg, const RunConfig& rc, bool defaults) {
  require_keys(cfg, {"delta", "eps", "alpha", "p_bs", "p0", "grid_step"}, "counterexample");
  PipelineInputs in;
  in.scenario = {number_or(cfg, "delta", 0.1), number_or(cfg, "eps", 0.8), number_or(cfg, "alpha", 0.28)};
  in.p_bs = number_or(cfg, "p_bs", 0.075);
  in.p0 = number_or(cfg, "p0", 0.643);
  in.grid_step = number_or(cfg, "grid_step", 1e-5);
  try {
    in.scenario.validate();
  } catch (const std::exception& e) {
    throw BadConfig(e.what());
  }

  Outcome out;
  PipelineReport rep;
  try {
    rep = counterexample_pipeline(in);
  } catch (const CheckFailed& e) {
    out.exit_code = kCheckFailed;
    out.message = std::string("check failed: ") + e.what();
    out.doc["failed_check"] = e.check();
    out.doc["detail"] = e.what();
    if (rc.format == Format::csv) out.csv = "failed_check\n" + e.check() + "\n";
    return out;
  }
  json report;
  to_json(report, rep);
  out.doc["report"] = report;
  out.doc["verdict"] = rep.verdict;

  std::ostringstream csv;
  if (defaults) {
    const double rel_tol = 1e-10;
    json table = json::array();
    bool all = true;
    csv << "quantity,computed,reference,error,tolerance,kind,status\n";
    for (const auto& ref : references()) {
      const double v = reference_value(rep, ref.name);
      const double err = ref.relative ? std::abs(v - ref.expected) / std::abs(ref.expected) : std::abs(v - ref.expected);
      const double tol = ref.relative ? rel_tol : rc.tolerance;
      const bool pass = std::isfinite(v) && err <= tol;
      all = all && pass;
      table.push_back({{"quantity", ref.name}, {"computed", v}, {"reference", ref.expected}, {"error", err},
                       {"tolerance", tol}, {"kind", ref.relative ? "relative" : "absolute"},
                       {"status", pass ? "PASS" : "FAIL"}});
      csv << ref.name << ',' << fmt("%.12g", v) << ',' << fmt("%.12g", ref.expected) << ',' << fmt("%.3e", err)
          << ',' << fmt("%.1e", tol) << ',' << (ref.relative ? "relative" : "absolute") << ','
          << (pass ? "PASS" : "FAIL") << '\n';
    }
    out.doc["table"] = table;
    out.doc["all_pass"] = all;
    if (!all) {
      out.exit_code = kCheckFailed;
      out.message = "reference table has failing rows";
    }
  } else {
    csv << "quantity,computed\n";
    for (const auto& ref : references()) csv << ref.name << ',' << fmt("%.12g", reference_value(rep, ref.name)) << '\n';
  }
  if (!rep.verdict && out.message.empty()) out.message = "separation not established";
  if (rc.format == Format::csv) out.csv = csv.str();
  return out;
}

// ---------------------------------------------------------------------------
// simulate

Joint default_joint() { return Joint::from_channel(Dist::uniform(2), Channel::bsc(0.1)); }

SourceModel model_from(const json& cfg, const char* key, const Dist& fallback) {
  if (!cfg.contains(key)) return SourceModel::iid(fallback);
  const json& v = cfg.at(key);
  if (v.is_array()) return SourceModel::iid(v.get<Dist>());
  return v.get<SourceModel>();
}

std::vector<std::size_t> compression_for(const std::string& kind, std::size_t n, std::size_t nx, std::size_t* messages) {
  if (kind == "identity") {
    *messages = static_cast<std::size_t>(checked_power(nx, n));
    return TestingScheme::identity_compression(n, nx);
  }
  if (kind == "type") return TestingScheme::type_compression(n, nx, messages);
  if (kind == "constant") {
    *messages = 1;
    return std::vector<std::size_t>(checked_power(nx, n), 0);
  }
  throw BadConfig("compression must be identity, type or constant");
}

Outcome run_simulate(const json& cfg, const RunConfig& rc) {
  require_keys(cfg, {"joint", "y_alternative", "x_alternative", "compression", "exponent", "n"}, "simulate");
  const Joint joint = cfg.contains("joint") ? cfg.at("joint").get<Joint>() : default_joint();
  const SourceModel qy = model_from(cfg, "y_alternative", Dist::uniform(joint.y_size()));
  const SourceModel qx = model_from(cfg, "x_alternative", Dist::uniform(joint.x_size()));
  const std::string compression = cfg.value("compression", std::string("identity"));
  const double e = number_or(cfg, "exponent", 0.0);
  std::vector<std::size_t> ns = {1, 2, 3, 4};
  if (rc.n_range) ns = parse_range(*rc.n_range);
  else if (cfg.contains("n")) ns = cfg.at("n").is_string() ? parse_range(cfg.at("n").get<std::string>())
                                                             : cfg.at("n").get<std::vector<std::size_t>>();

  MixtureProblem single;
  single.joints = {joint};
  single.weights = Dist({1.0});
  single.y_alternatives = {qy};
  single.x_alternatives = {qx};
  const auto alt = std::make_pair(qy, qx);

  Outcome out;
  std::vector<SweepRow> rows;
  json jr = json::array();
  bool checks = true;
  for (std::size_t n : ns) {
    if (n == 0) throw BadConfig("block length must be positive");
    std::size_t messages = 0;
    const auto compress = compression_for(compression, n, joint.x_size(), &messages);
    const ThresholdResult th = threshold_scheme(single, compress, messages, n, e);
    const ErrorPair err = exact_errors(th.scheme, joint, alt);
    const ChangeOfMeasure com = change_of_measure(th.p_bar, th.q_max, th.scheme.accept, n, e);
    checks = checks && com.holds;
    rows.push_back({n, err});
    jr.push_back({{"n", n}, {"alpha", err.alpha}, {"beta", err.beta}, {"messages", messages},
                  {"change_of_measure", {{"lhs", com.lhs}, {"rhs", com.rhs}, {"holds", com.holds}}}});
  }
  out.doc["rows"] = jr;
  bool positive = rows.size() >= 2;
  for (const auto& r : rows) positive = positive && r.errors.beta > 0.0;
  std::set<std::size_t> distinct(ns.begin(), ns.end());
  if (positive && distinct.size() >= 2) {
    std::vector<double> betas;
    for (const auto& r : rows) betas.push_back(r.errors.beta);
    const SlopeFit f = fit_exponent(ns, betas);
    out.doc["slope"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"residuals", f.residuals}};
  }
  if (rc.format == Format::csv) {
    std::ostringstream os;
    write_sweep_csv(os, rows);
    out.csv = os.str();
  }
  if (!checks) {
    out.exit_code = kCheckFailed;
    out.message = "change-of-measure inequality violated";
  }
  return out;
}

// ---------------------------------------------------------------------------
// transform

std::pair<Dist, Dist> product_from(const json& cfg, const char* key, const Dist& x, const Dist& y) {
  if (!cfg.contains(key)) return {x, y};
  const json& v = cfg.at(key);
  require_keys(v, {"x", "y"}, key);
  return {v.at("x").get<Dist>(), v.at("y").get<Dist>()};
}

Outcome run_transform(const json& cfg, const RunConfig& rc) {
  require_keys(cfg, {"joint", "source", "target", "n", "gamma", "exponent"}, "transform");
  const Joint joint = cfg.contains("joint") ? cfg.at("joint").get<Joint>() : default_joint();
  const auto src = product_from(cfg, "source", Dist({0.6, 0.4}), Dist({0.3, 0.7}));
  const auto tgt = product_from(cfg, "target", Dist::uniform(joint.x_size()), Dist::uniform(joint.y_size()));
  const double nd = number_or(cfg, "n", 3);
  if (nd < 1 || nd != std::floor(nd)) throw BadConfig("n must be a positive integer");
  const auto n = static_cast<std::size_t>(nd);
  const double gamma = number_or(cfg, "gamma", 0.2);
  const double e = number_or(cfg, "exponent", 0.0);
  if (!(gamma > 0.0)) throw BadConfig("gamma must be positive");

  const TripleLaw tri = triple_from_joint(joint);
  auto scheme_for = [&](const std::pair<Dist, Dist>& q) {
    MixtureProblem p;
    p.joints = {joint};
    p.weights = Dist({1.0});
    p.y_alternatives = {SourceModel::iid(q.second)};
    p.x_alternatives = {SourceModel::iid(q.first)};
    const std::size_t messages = static_cast<std::size_t>(checked_power(joint.x_size(), n));
    return threshold_scheme(p, TestingScheme::identity_compression(n, joint.x_size()), messages, n, e).scheme;
  };
  const ConditionalAlternative from = product_alternative(src.first, src.second);
  const ConditionalAlternative to = product_alternative(tgt.first, tgt.second);

  struct Dir {
    const char* name;
    TransformCheck check;
  };
  std::vector<Dir> dirs = {
      {"forward", check_transform(to_two_terminal(scheme_for(src)), tri, from, to, n, gamma)},
      {"reverse", check_transform(to_two_terminal(scheme_for(tgt)), tri, to, from, n, gamma)},
  };

  Outcome out;
  std::ostringstream csv;
  csv << "direction,alpha_source,beta_source,alpha_target,beta_target,alpha_bound,beta_bound,alpha_holds,beta_holds\n";
  json jd = json::array();
  bool all = true;
  for (const auto& d : dirs) {
    const auto& c = d.check;
    all = all && c.alpha_holds && c.beta_holds;
    csv << d.name << ',' << fmt("%.15g", c.source.alpha) << ',' << fmt("%.15g", c.source.beta) << ','
        << fmt("%.15g", c.target.alpha) << ',' << fmt("%.15g", c.target.beta) << ',' << fmt("%.15g", c.alpha_bound)
        << ',' << fmt("%.15g", c.beta_bound) << ',' << (c.alpha_holds ? "true" : "false") << ','
        << (c.beta_holds ? "true" : "false") << '\n';
    json row = {{"direction", d.name},
                {"source", {{"alpha", c.source.alpha}, {"beta", c.source.beta}}},
                {"target", {{"alpha", c.target.alpha}, {"beta", c.target.beta}}},
                {"p_b0c", c.p_b0c},
                {"p_b1c", c.p_b1c},
                {"p_b2c", c.p_b2c},
                {"alpha_bound", c.alpha_bound},
                {"beta_bound", c.beta_bound},
                {"alpha_holds", c.alpha_holds},
                {"beta_holds", c.beta_holds}};
    if (c.beta_bound_trivial_z) row["beta_bound_trivial_z"] = *c.beta_bound_trivial_z;
    jd.push_back(row);
  }
  out.doc["directions"] = jd;
  if (rc.format == Format::csv) out.csv = csv.str();
  if (!all) {
    out.exit_code = kCheckFailed;
    out.message = "transformation bound violated";
  }
  return out;
}

// ---------------------------------------------------------------------------
// wak

Outcome run_wak(const json& cfg, const RunConfig& rc) {
  require_keys(cfg, {"joints", "weights", "rc_grid", "epsilon", "assume_separable"}, "wak");
  const std::vector<Joint> fallback = {Joint::from_channel(Dist({0.643, 0.357}), Channel::bsc(0.1)),
                                       Joint::from_channel(Dist({0.3, 0.7}), Channel::z_channel(0.8))};
  const std::vector<Joint> joints = cfg.contains("joints") ? cfg.at("joints").get<std::vector<Joint>>() : fallback;
  const Dist weights = cfg.contains("weights") ? cfg.at("weights").get<Dist>()
                       : cfg.contains("joints") ? Dist::uniform(joints.size())
                                                : Dist({0.4, 0.6});
  std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  if (rc.rc_grid) grid = parse_grid(*rc.rc_grid);
  else if (cfg.contains("rc_grid")) grid = grid_from(cfg.at("rc_grid"));
  std::vector<double> eps = {0.0, 0.25, 0.5, 0.75};
  if (cfg.contains("epsilon")) eps = cfg.at("epsilon").get<std::vector<double>>();
  for (double e : eps)
    if (!(e >= 0.0 && e < 1.0)) throw BadConfig("epsilon values must lie in [0, 1)");
  EpsilonOptions opt;
  opt.assume_separable = cfg.value("assume_separable", false);

  const WakInstance inst = make_wak_instance(joints, weights);
  Outcome out;
  std::vector<WakSurfacePoint> pts;
  json jp = json::array();
  bool dual = true;
  for (double r : grid) {
    for (double e : eps) {
      const double rate = wak_rate_eps(inst, r, e, opt);
      const double ex = mixture_epsilon_exponent(inst.problem, inst.structure, r, e, opt);
      const double gap = rate + ex - inst.log_y;
      dual = dual && std::abs(gap) <= 1e-9;
      pts.push_back({r, e, rate});
      jp.push_back({{"R_c", r}, {"epsilon", e}, {"R2", rate}, {"exponent", ex}, {"duality_gap", gap}});
    }
  }
  json zero = json::array();
  for (double r : grid) zero.push_back({{"R_c", r}, {"R2", wak_rate_zero(inst, r)}});
  out.doc["surface"] = jp;
  out.doc["zero_error"] = zero;
  out.doc["log_y"] = inst.log_y;
  if (rc.format == Format::csv) {
    std::ostringstream os;
    write_wak_surface_csv(os, pts);
    out.csv = os.str();
  }
  if (!dual) {
    out.exit_code = kCheckFailed;
    out.message = "rate and exponent do not sum to log|Y|";
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"exponents", "envelope", "counterexample", "simulate", "transform", "wak"};
  return s;
}

std::string version() { return MIXHT_VERSION; }

std::vector<double> parse_grid(const std::string& text) {
  double a = 0, b = 0, h = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw BadConfig("grid must look like a:b:step, got '" + text + "'");
  }
  if (!(h > 0.0) || b < a) throw BadConfig("grid needs step > 0 and a <= b");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) g.push_back(a + static_cast<double>(k) * h);
  return g;
}

std::vector<std::size_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw BadConfig("bad range '" + text + "'");
    }
    if (pos != s.size() || v < 1) throw BadConfig("bad range '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  if (dots == std::string::npos) return {to_int(text)};
  const std::size_t a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
  if (b < a) throw BadConfig("empty range '" + text + "'");
  std::vector<std::size_t> r;
  for (std::size_t n = a; n <= b; ++n) r.push_back(n);
  return r;
}

std::string config_hash(const nlohmann::json& effective) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : effective.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run(const RunConfig& config) {
  RunResult res;
  try {
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), config.subcommand) == subs.end()) {
      throw BadConfig("unknown subcommand '" + config.subcommand + "'");
    }
    if (!(config.tolerance > 0.0)) throw BadConfig("tolerance must be positive");
    set_lab_workers(config.workers);
    const json cfg = load_config(config);

    json flags = {{"format", config.format == Format::csv ? "csv" : "json"},
                  {"seed", config.seed},
                  {"tolerance", config.tolerance}};
    if (config.rc_grid) flags["rc_grid"] = *config.rc_grid;
    if (config.n_range) flags["n"] = *config.n_range;
    const json effective = {{"subcommand", config.subcommand}, {"config", cfg}, {"flags", flags}};
    res.repro = {{"config_hash", config_hash(effective)}, {"seed", config.seed}, {"version", version()}};

    const bool has_instance = !config.instance_path.empty();
    Outcome out;
    const std::string& s = config.subcommand;
    if (s == "exponents") out = run_exponents(cfg, config, has_instance);
    else if (s == "envelope") out = run_envelope(cfg, config);
    else if (s == "counterexample") out = run_counterexample(cfg, config, !has_instance && cfg.empty());
    else if (s == "simulate") out = run_simulate(cfg, config);
    else if (s == "transform") out = run_transform(cfg, config);
    else out = run_wak(cfg, config);

    res.exit_code = out.exit_code;
    res.message = out.message;
    if (config.format == Format::csv) {
      res.output = out.csv;
    } else {
      out.doc["subcommand"] = s;
      out.doc["reproducibility"] = res.repro;
      res.output = out.doc.dump(2) + "\n";
    }
  } catch (const BadConfig& e) {
    res.exit_code = kBadConfig;
    res.message = e.what();
  } catch (const json::exception& e) {
    res.exit_code = kBadConfig;
    res.message = std::string("malformed config: ") + e.what();
  } catch (const GuardExceeded& e) {
    res.exit_code = kBadConfig;
    res.message = e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = kBadConfig;
    res.message = e.what();
  } catch (const CheckFailed& e) {
    res.exit_code = kCheckFailed;
    res.message = e.what();
  } catch (const AssumptionViolation& e) {
    res.exit_code = kCheckFailed;
    res.message = std::string("assumption violated: ") + e.what();
  } catch (const std::exception& e) {
    res.exit_code = kCheckFailed;
    res.message = e.what();
  }
  return res;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"mixht: error exponents and finite-length checks for testing against mixture sources"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  RunConfig rc;
  std::string format = "json";
  std::vector<std::string> sets;
  std::string rc_grid, n_range;

  const std::vector<std::pair<std::string, std::string>> descriptions = {
      {"exponents", "theta/xi curves over an R_c grid"},
      {"envelope", "lower convex envelope of phi and envelope-derived exponents"},
      {"counterexample", "three-step separation pipeline with the reference table"},
      {"simulate", "exact (alpha_n, beta_n) of threshold schemes over a range of n"},
      {"transform", "code transformation bounds between two alternatives"},
      {"wak", "minimum helper-assisted compression rates"},
  };
  for (const auto& [name, desc] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", rc.instance_path, "JSON instance/config file");
    sub->add_option("--out", rc.out_path, "output file (default stdout)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--workers", rc.workers, "worker threads (0 = all cores)");
    sub->add_option("--seed", rc.seed, "random seed");
    sub->add_option("--tolerance", rc.tolerance, "absolute tolerance for reference checks");
    sub->add_option("--rc-grid", rc_grid, "R_c grid a:b:step");
    sub->add_option("--n", n_range, "block lengths a..b");
    sub->add_option("--set", sets, "override key=value (value parsed as JSON)");
    sub->callback([&rc, name = name] { rc.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  rc.format = format == "csv" ? Format::csv : Format::json;
  if (!rc_grid.empty()) rc.rc_grid = rc_grid;
  if (!n_range.empty()) rc.n_range = n_range;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      return kBadConfig;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      rc.params[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      rc.params[key] = value;
    }
  }

  const RunResult res = run(rc);
  if (!res.message.empty()) std::cerr << (res.exit_code == kOk ? "note: " : "error: ") << res.message << '\n';

  if (!res.output.empty()) {
    if (rc.out_path.empty()) {
      std::cout << res.output;
    } else {
      std::ofstream f(rc.out_path, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot write '" << rc.out_path << "'\n";
        return kBadConfig;
      }
      f << res.output;
    }
  }
  if (rc.format == Format::csv && !res.repro.is_null()) {
    if (rc.out_path.empty()) {
      std::cerr << "reproducibility: " << res.repro.dump() << '\n';
    } else {
      std::ofstream f(rc.out_path + ".repro.json", std::ios::binary);
      f << res.repro.dump(2) << '\n';
    }
  }
  return res.exit_code;
}

}  // namespace mixht::cli
