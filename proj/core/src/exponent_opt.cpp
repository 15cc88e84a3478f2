#include "mixht/exponent_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "mixht/errors.hpp"
#include "mixht/simplex_lp.hpp"

namespace mixht {

double AltCapGrowth::at(std::size_t n) const {
  return scale * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), power);
}

void MixtureProblem::validate() const {
  if (joints.empty()) throw std::invalid_argument("MixtureProblem: no joints");
  const std::size_t nx = joints.front().x_size(), ny = joints.front().y_size();
  for (const auto& j : joints)
    if (j.x_size() != nx || j.y_size() != ny)
      throw std::invalid_argument("MixtureProblem: joints must share alphabets");
  if (weights.size() != joints.size())
    throw std::invalid_argument("MixtureProblem: one weight per joint required");
  if (y_alternatives.empty() || x_alternatives.empty())
    throw std::invalid_argument("MixtureProblem: alternative families must be nonempty");
  for (const auto& q : y_alternatives)
    if (q.alphabet_size() != ny) throw std::invalid_argument("MixtureProblem: Y alternative alphabet");
  for (const auto& q : x_alternatives)
    if (q.alphabet_size() != nx) throw std::invalid_argument("MixtureProblem: X alternative alphabet");
  if (!(weight_floor > 0.0 && weight_floor < 1.0)) throw std::invalid_argument("gamma_p must lie in (0,1)");
  if (!(alt_floor > 0.0 && alt_floor < 1.0)) throw std::invalid_argument("gamma_q must lie in (0,1)");
  if (!(alt_cap.scale >= 1.0) || !(alt_cap.power >= 0.0))
    throw std::invalid_argument("Gamma_q growth needs scale >= 1 and power >= 0");
  for (double r : rc_grid)
    if (!(r >= 0.0)) throw std::invalid_argument("R_c grid values must be nonnegative");
}

void to_json(nlohmann::json& j, const MixtureProblem& p) {
  j = nlohmann::json{{"joints", p.joints},
                     {"weights", p.weights},
                     {"y_alternatives", p.y_alternatives},
                     {"x_alternatives", p.x_alternatives},
                     {"gamma_p", p.weight_floor},
                     {"gamma_q", p.alt_floor},
                     {"Gamma_q", {{"scale", p.alt_cap.scale}, {"power", p.alt_cap.power}}},
                     {"rc_grid", p.rc_grid}};
}

void from_json(const nlohmann::json& j, MixtureProblem& p) {
  static const std::vector<std::string> known = {"joints",  "weights", "y_alternatives",
                                                 "x_alternatives", "gamma_p", "gamma_q",
                                                 "Gamma_q", "rc_grid"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("MixtureProblem: unknown key '" + key + "'");
  p = MixtureProblem{};
  p.joints = j.at("joints").get<std::vector<Joint>>();
  p.weights = j.contains("weights") ? j.at("weights").get<Dist>() : Dist::uniform(p.joints.size());
  p.y_alternatives = j.at("y_alternatives").get<std::vector<SourceModel>>();
  p.x_alternatives = j.at("x_alternatives").get<std::vector<SourceModel>>();
  if (j.contains("gamma_p")) p.weight_floor = j.at("gamma_p").get<double>();
  if (j.contains("gamma_q")) p.alt_floor = j.at("gamma_q").get<double>();
  if (j.contains("Gamma_q")) {
    const auto& g = j.at("Gamma_q");
    if (g.is_number()) {
      p.alt_cap.scale = g.get<double>();
    } else {
      p.alt_cap.scale = g.value("scale", 1.0);
      p.alt_cap.power = g.value("power", 0.0);
    }
  }
  if (j.contains("rc_grid")) {
    const auto& g = j.at("rc_grid");
    if (g.is_array()) {
      p.rc_grid = g.get<std::vector<double>>();
    } else {
      const double a = g.at("start").get<double>(), b = g.at("stop").get<double>(),
                   h = g.at("step").get<double>();
      if (!(h > 0.0)) throw std::invalid_argument("rc_grid step must be positive");
      for (std::size_t k = 0; a + k * h <= b + 1e-12; ++k) p.rc_grid.push_back(a + k * h);
    }
  }
  p.validate();
}

ClassStructure classify(const MixtureProblem& problem) {
  problem.validate();
  ClassStructure st;
  st.joints = problem.joints;
  st.weights = problem.weights;
  const std::size_t m = problem.members();
  st.class_of.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Dist px = problem.joints[i].x_marginal();
    std::size_t s = 0;
    while (s < st.marginals.size() && total_variation(px, st.marginals[s]) > kClassTolerance) ++s;
    if (s == st.marginals.size()) {
      st.marginals.push_back(px);
      st.classes.emplace_back();
    }
    st.classes[s].push_back(i);
    st.class_of[i] = s;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const MatchResult r = best_match(problem.joints[i].y_marginal(), problem.y_alternatives);
    if (r.assumption_violated)
      throw AssumptionViolation("member " + std::to_string(i) +
                                ": every Y alternative has infinite divergence rate");
    st.d_star_y.push_back(r.rate.value());
    st.j_star.push_back(r.best_index);
  }
  for (const Dist& px : st.marginals) {
    const MatchResult r = best_match(px, problem.x_alternatives);
    if (r.assumption_violated)
      throw AssumptionViolation("class marginal: every X alternative has infinite divergence rate");
    st.d_star_x.push_back(r.rate.value());
    st.t_star.push_back(r.best_index);
  }
  for (std::size_t i = 0; i < m; ++i)
    st.d_star_pair.push_back(pair_rate(st.d_star_y[i], st.d_star_x[st.class_of[i]]));
  return st;
}

namespace {

using Point = std::vector<double>;

struct ClassData {
  Point px;
  double hx = 0.0;
  std::vector<Channel> channels;
  std::vector<double> hy;  // H(Y_i)
  std::vector<double> d;
};

ClassData make_class_data(const std::vector<Joint>& joints, const std::vector<double>& d_pairs) {
  if (joints.empty()) throw std::invalid_argument("empty class");
  if (d_pairs.size() != joints.size()) throw std::invalid_argument("one d-rate per member required");
  ClassData c;
  const Dist px = joints.front().x_marginal();
  for (const auto& j : joints) {
    if (j.x_size() != px.size()) throw std::invalid_argument("class members must share X alphabet");
    if (total_variation(j.x_marginal(), px) > kClassTolerance)
      throw std::invalid_argument("class members must share the X marginal");
    c.channels.push_back(j.y_given_x());
    c.hy.push_back(entropy(j.y_marginal()));
  }
  c.px = px.probs();
  c.hx = entropy(px);
  c.d = d_pairs;
  return c;
}

double output_entropy(const Channel& ch, const Point& q) {
  double h = 0.0;
  for (std::size_t y = 0; y < ch.outputs(); ++y) {
    double v = 0.0;
    for (std::size_t x = 0; x < q.size(); ++x) v += ch(y, x) * q[x];
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

std::size_t binom_capped(std::size_t n, std::size_t k, std::size_t cap) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (r > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(r));
}

void compositions(std::size_t parts, std::size_t total, Point& cur, std::size_t pos, std::size_t left,
                  std::vector<Point>& out) {
  if (pos + 1 == parts) {
    cur[pos] = static_cast<double>(left) / static_cast<double>(total);
    out.push_back(cur);
    return;
  }
  for (std::size_t k = 0; k <= left; ++k) {
    cur[pos] = static_cast<double>(k) / static_cast<double>(total);
    compositions(parts, total, cur, pos + 1, left - k, out);
  }
}

struct Grid {
  std::vector<Point> points;
  double spacing = 1.0;
};

Grid base_grid(std::size_t dim, const Point& px, std::size_t budget) {
  Grid g;
  if (dim == 1) {
    g.points = {{1.0}};
    return g;
  }
  std::size_t r = 1;
  while (r < 2000 && binom_capped(r + 1 + dim - 1, dim - 1, budget) <= budget) ++r;
  Point cur(dim);
  compositions(dim, r, cur, 0, r, g.points);
  g.points.push_back(px);
  g.spacing = 1.0 / static_cast<double>(r);
  return g;
}

bool in_simplex(const Point& q) {
  for (double v : q)
    if (v < -1e-15 || v > 1.0 + 1e-15) return false;
  return true;
}

std::vector<Point> neighbours(const Point& q, double h) {
  std::vector<Point> out;
  const std::size_t d = q.size();
  if (d == 2) {
    for (int j = -10; j <= 10; ++j) {
      if (j == 0) continue;
      Point p{q[0] + j * h, q[1] - j * h};
      if (in_simplex(p)) {
        p[0] = std::clamp(p[0], 0.0, 1.0);
        p[1] = 1.0 - p[0];
        out.push_back(p);
      }
    }
    return out;
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      if (a == b) continue;
      for (int j = 1; j <= 5; ++j) {
        Point p = q;
        p[a] += j * h;
        p[b] -= j * h;
        if (in_simplex(p)) {
          for (double& v : p) v = std::max(v, 0.0);
          out.push_back(p);
        }
      }
    }
  return out;
}

// Linear program over mixing weights of posterior points. Values are
// value_i(w) = H(Y_i) + d_i - sum_k w_k H(T_i q_k).
struct ColumnLp {
  struct Floor {
    std::size_t member;
    double floor;  // value_member >= floor
  };
  struct TRow {
    std::size_t member;
    double offset;  // t <= value_member - offset
  };
  std::optional<double> rate;      // I(X;U) <= rate (or == when rate_equality)
  bool rate_equality = false;
  std::vector<TRow> t_rows;
  std::vector<Floor> floors;
  double c_t = 0.0;                 // objective weight on t
  double c_h = 0.0;                 // objective weight on sum_k w_k H(q_k)
  std::vector<double> c_value;      // objective weights on value_i
};

struct ColumnSolution {
  bool ok = false;
  std::vector<Point> support;
  std::vector<double> weights;
  double objective = 0.0;
};

ColumnSolution solve_columns(const ClassData& c, const ColumnLp& layout, const std::vector<Point>& cols) {
  const std::size_t K = cols.size(), d = c.px.size(), m = c.channels.size();
  const bool has_t = !layout.t_rows.empty();
  const std::size_t nv = K + (has_t ? 1 : 0);
  std::vector<double> hq(K);
  std::vector<std::vector<double>> hyq(m, std::vector<double>(K));
  for (std::size_t k = 0; k < K; ++k) {
    hq[k] = entropy(cols[k]);
    for (std::size_t i = 0; i < m; ++i) hyq[i][k] = output_entropy(c.channels[i], cols[k]);
  }
  lp::Problem prob;
  prob.num_vars = nv;
  prob.objective.assign(nv, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double o = layout.c_h * hq[k];
    for (std::size_t i = 0; i < layout.c_value.size(); ++i) o -= layout.c_value[i] * hyq[i][k];
    prob.objective[k] = o;
  }
  if (has_t) prob.objective[K] = layout.c_t;
  for (std::size_t x = 0; x < d; ++x) {
    lp::Constraint row{std::vector<double>(nv, 0.0), lp::Sense::eq, c.px[x]};
    for (std::size_t k = 0; k < K; ++k) row.coef[k] = cols[k][x];
    prob.constraints.push_back(std::move(row));
  }
  if (layout.rate) {
    lp::Constraint row{std::vector<double>(nv, 0.0), layout.rate_equality ? lp::Sense::eq : lp::Sense::ge,
                       c.hx - *layout.rate};
    for (std::size_t k = 0; k < K; ++k) row.coef[k] = hq[k];
    prob.constraints.push_back(std::move(row));
  }
  for (const auto& tr : layout.t_rows) {
    lp::Constraint row{std::vector<double>(nv, 0.0), lp::Sense::le,
                       c.hy[tr.member] + c.d[tr.member] - tr.offset};
    for (std::size_t k = 0; k < K; ++k) row.coef[k] = hyq[tr.member][k];
    row.coef[K] = 1.0;
    prob.constraints.push_back(std::move(row));
  }
  for (const auto& f : layout.floors) {
    lp::Constraint row{std::vector<double>(nv, 0.0), lp::Sense::le,
                       c.hy[f.member] + c.d[f.member] - f.floor};
    for (std::size_t k = 0; k < K; ++k) row.coef[k] = hyq[f.member][k];
    prob.constraints.push_back(std::move(row));
  }
  // A free t is modelled as t >= 0 after shifting: values are >= 0 when
  // offsets are nonpositive; otherwise split into t+ - t-.
  bool needs_free_t = false;
  for (const auto& tr : layout.t_rows)
    if (tr.offset > 0.0) needs_free_t = true;
  if (needs_free_t) {
    prob.num_vars += 1;
    prob.objective.push_back(-layout.c_t);
    for (auto& row : prob.constraints) row.coef.push_back(0.0);
    for (std::size_t r = d + (layout.rate ? 1 : 0); r < d + (layout.rate ? 1 : 0) + layout.t_rows.size(); ++r)
      prob.constraints[r].coef.back() = -1.0;
  }
  const lp::Solution sol = lp::solve(prob);
  ColumnSolution out;
  if (sol.status != lp::Status::optimal) return out;
  out.ok = true;
  out.objective = sol.objective;
  for (std::size_t k = 0; k < K; ++k)
    if (sol.x[k] > 1e-13) {
      out.support.push_back(cols[k]);
      out.weights.push_back(sol.x[k]);
    }
  return out;
}

ColumnSolution solve_refined(const ClassData& c, const ColumnLp& layout, const SolverOptions& opt) {
  Grid g = base_grid(c.px.size(), c.px, opt.grid_budget);
  std::vector<Point> cols = g.points;
  ColumnSolution sol = solve_columns(c, layout, cols);
  if (!sol.ok || c.px.size() == 1) return sol;
  const bool binary = c.px.size() == 2;
  const std::size_t rounds = binary ? opt.refine_rounds : opt.refine_rounds + 1;
  double h = g.spacing / (binary ? 10.0 : 5.0);
  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<Point> next = sol.support;
    for (const auto& q : sol.support) {
      const auto nb = neighbours(q, h);
      next.insert(next.end(), nb.begin(), nb.end());
    }
    // Keep the base grid so the refined problem stays feasible and never
    // loses the previous optimum.
    cols.insert(cols.end(), next.begin(), next.end());
    ColumnSolution refined = solve_columns(c, layout, cols);
    if (refined.ok) sol = std::move(refined);
    h /= binary ? 10.0 : 5.0;
  }
  return sol;
}

Channel kernel_from_support(const ClassData& c, const ColumnSolution& sol) {
  const std::size_t d = c.px.size(), K = sol.support.size();
  std::vector<Dist> columns;
  for (std::size_t x = 0; x < d; ++x) {
    std::vector<double> col(K, 0.0);
    double mass = 0.0;
    if (c.px[x] > 0.0)
      for (std::size_t k = 0; k < K; ++k) mass += col[k] = sol.weights[k] * sol.support[k][x] / c.px[x];
    if (mass <= 0.0) {
      std::fill(col.begin(), col.end(), 0.0);
      col[0] = 1.0;
    }
    columns.push_back(Dist::normalized(std::move(col)));
  }
  return Channel::from_columns(columns);
}

AuxiliaryResult evaluate(const ClassData& c, const Channel& kernel) {
  AuxiliaryResult r;
  r.kernel = kernel;
  const std::size_t d = c.px.size(), U = kernel.outputs();
  double cond_hx = 0.0;
  std::vector<double> cond_hy(c.channels.size(), 0.0);
  for (std::size_t u = 0; u < U; ++u) {
    double pu = 0.0;
    Point post(d);
    for (std::size_t x = 0; x < d; ++x) pu += post[x] = c.px[x] * kernel(u, x);
    if (pu <= 0.0) continue;
    for (double& v : post) v /= pu;
    cond_hx += pu * entropy(post);
    for (std::size_t i = 0; i < c.channels.size(); ++i) cond_hy[i] += pu * output_entropy(c.channels[i], post);
  }
  r.rate = std::max(c.hx - cond_hx, 0.0);
  r.value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.channels.size(); ++i) {
    r.member_values.push_back(std::max(c.hy[i] - cond_hy[i], 0.0) + c.d[i]);
    r.value = std::min(r.value, r.member_values.back());
  }
  return r;
}

ColumnLp rate_lp(const ClassData& c, double r_c, const std::vector<std::size_t>& members) {
  ColumnLp layout;
  if (r_c < c.hx) layout.rate = r_c;
  for (std::size_t i : members) layout.t_rows.push_back({i, 0.0});
  layout.c_t = 1.0;
  return layout;
}

std::vector<std::size_t> all_members(const ClassData& c) {
  std::vector<std::size_t> v(c.channels.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

AuxiliaryResult evaluate_kernel(const std::vector<Joint>& joints_in_class,
                                const std::vector<double>& d_pairs, const Channel& kernel) {
  const ClassData c = make_class_data(joints_in_class, d_pairs);
  if (kernel.inputs() != c.px.size()) throw std::invalid_argument("kernel input size mismatch");
  return evaluate(c, kernel);
}

AuxiliaryResult optimize_auxiliary(const std::vector<Joint>& joints_in_class,
                                   const std::vector<double>& d_pairs, double r_c, Objective objective,
                                   std::size_t index, const SolverOptions& options) {
  if (!(r_c >= 0.0)) throw std::invalid_argument("R_c must be nonnegative");
  const ClassData c = make_class_data(joints_in_class, d_pairs);
  std::vector<std::size_t> members;
  if (objective == Objective::single_index) {
    if (index >= c.channels.size()) throw std::out_of_range("member index out of range");
    members = {index};
  } else {
    members = all_members(c);
  }
  const ColumnSolution sol = solve_refined(c, rate_lp(c, r_c, members), options);
  if (!sol.ok) throw std::runtime_error("auxiliary LP did not reach optimality");
  AuxiliaryResult r = evaluate(c, kernel_from_support(c, sol));
  if (objective == Objective::single_index) r.value = r.member_values[index];
  return r;
}

namespace {

std::vector<Joint> class_joints(const ClassStructure& st, std::size_t s) {
  std::vector<Joint> out;
  for (std::size_t i : st.classes[s]) out.push_back(st.joints[i]);
  return out;
}

std::vector<double> class_d(const ClassStructure& st, std::size_t s) {
  std::vector<double> out;
  for (std::size_t i : st.classes[s]) out.push_back(st.d_star_pair[i]);
  return out;
}

std::vector<Joint> subset_joints(const ClassStructure& st, const std::vector<std::size_t>& ids) {
  std::vector<Joint> out;
  for (std::size_t i : ids) out.push_back(st.joints[i]);
  return out;
}

std::vector<double> subset_d(const ClassStructure& st, const std::vector<std::size_t>& ids) {
  std::vector<double> out;
  for (std::size_t i : ids) out.push_back(st.d_star_pair[i]);
  return out;
}

}  // namespace

AuxiliaryResult theta_s_solution(const ClassStructure& st, std::size_t s, double r_c,
                                 const SolverOptions& options) {
  if (s >= st.class_count()) throw std::out_of_range("class index out of range");
  return optimize_auxiliary(class_joints(st, s), class_d(st, s), r_c, Objective::min_over_class, 0, options);
}

AuxiliaryResult xi_i_solution(const ClassStructure& st, std::size_t i, double r_c,
                              const SolverOptions& options) {
  if (i >= st.members()) throw std::out_of_range("member index out of range");
  return optimize_auxiliary({st.joints[i]}, {st.d_star_pair[i]}, r_c, Objective::single_index, 0, options);
}

double theta_s(const ClassStructure& st, std::size_t s, double r_c) {
  return theta_s_solution(st, s, r_c).value;
}

double xi_i(const ClassStructure& st, std::size_t i, double r_c) { return xi_i_solution(st, i, r_c).value; }

double compound_zero_exponent(const ClassStructure& st, double r_c) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < st.class_count(); ++s) v = std::min(v, theta_s(st, s, r_c));
  return v;
}

std::optional<double> ExceptionalSet::compound_epsilon_exponent(double eps) const {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0,1)");
  if (uniform_in_eps || eps < eps_low) return min_theta;
  if (eps > eps_high) return min_xi_all;
  return std::nullopt;
}

ExceptionalSet exceptional_set(const ClassStructure& st, double r_c) {
  ExceptionalSet out;
  std::vector<double> xi(st.members());
  for (std::size_t i = 0; i < st.members(); ++i) xi[i] = xi_i(st, i, r_c);
  out.min_theta = std::numeric_limits<double>::infinity();
  out.min_xi_all = *std::min_element(xi.begin(), xi.end());
  double low = std::numeric_limits<double>::infinity(), high = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < st.class_count(); ++s) {
    const double th = theta_s(st, s, r_c);
    double mx = std::numeric_limits<double>::infinity();
    for (std::size_t i : st.classes[s]) mx = std::min(mx, xi[i]);
    out.theta.push_back(th);
    out.min_xi.push_back(mx);
    out.min_theta = std::min(out.min_theta, th);
    const double gap = mx - th;
    const double size = static_cast<double>(st.classes[s].size());
    if (gap > kStrictnessTol) {
      out.members.push_back(s);
      low = std::min(low, 1.0 / size);
      high = std::max(high, (size - 1.0) / size);
    } else if (gap > kStrictnessTol / 10.0) {
      out.boundary.push_back(s);
    }
  }
  out.eps_low = std::min(low, 1.0);
  out.eps_high = std::max(high, 0.0);
  out.gap_undetermined = !out.members.empty() && out.eps_low <= out.eps_high;
  for (std::size_t s = 0; s < st.class_count(); ++s) {
    const bool minimiser = out.theta[s] <= out.min_theta + kStrictnessTol;
    const bool in_set = std::find(out.members.begin(), out.members.end(), s) != out.members.end();
    if (minimiser && !in_set) out.uniform_in_eps = true;
  }
  return out;
}

const char* to_string(Separability s) {
  switch (s) {
    case Separability::not_falsified: return "not_falsified";
    case Separability::falsified: return "falsified";
    case Separability::indeterminate: return "indeterminate";
  }
  return "unknown";
}

SeparabilityReport check_separability(const ClassStructure& st, double r_c, double tol) {
  SeparabilityReport report;
  const SolverOptions opt;
  for (std::size_t s = 0; s < st.class_count(); ++s) {
    ClassSeparability cs;
    cs.cls = s;
    const auto& ids = st.classes[s];
    if (ids.size() == 1) {
      cs.intersection_nonempty = true;
      report.classes.push_back(cs);
      continue;
    }
    const ClassData c = make_class_data(subset_joints(st, ids), subset_d(st, ids));
    const std::size_t k = ids.size();
    std::vector<double> xi(k);
    for (std::size_t a = 0; a < k; ++a) xi[a] = xi_i(st, ids[a], r_c);

    const bool active = r_c < c.hx;
    ColumnLp inter;
    if (active) {
      inter.rate = r_c;
      inter.rate_equality = true;
    }
    for (std::size_t a = 0; a < k; ++a) inter.t_rows.push_back({a, xi[a]});
    inter.c_t = 1.0;
    const ColumnSolution isol = solve_refined(c, inter, opt);
    if (!isol.ok) {
      cs.verdict = Separability::indeterminate;
      report.classes.push_back(cs);
      continue;
    }
    cs.intersection_margin = isol.objective;
    cs.intersection_nonempty = isol.objective >= -tol;
    if (!cs.intersection_nonempty) {
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
          ClassSeparability::PairRange pr{a, b, std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()};
          for (std::size_t owner = 0; owner < k; ++owner) {
            for (double sign : {1.0, -1.0}) {
              ColumnLp ex;
              if (active) {
                ex.rate = r_c;
                ex.rate_equality = true;
              }
              ex.floors.push_back({owner, xi[owner] - tol});
              ex.c_value.assign(k, 0.0);
              ex.c_value[a] = sign;
              ex.c_value[b] = -sign;
              const ColumnSolution es = solve_refined(c, ex, opt);
              if (!es.ok) {
                cs.verdict = Separability::indeterminate;
                continue;
              }
              const AuxiliaryResult ev = evaluate(c, kernel_from_support(c, es));
              const double diff = ev.member_values[a] - ev.member_values[b];
              pr.lo = std::min(pr.lo, diff);
              pr.hi = std::max(pr.hi, diff);
            }
          }
          if (pr.lo < -10.0 * tol && pr.hi > 10.0 * tol) cs.verdict = Separability::falsified;
          cs.pair_ranges.push_back(pr);
        }
    }
    report.classes.push_back(cs);
  }
  for (const auto& cs : report.classes) {
    if (cs.verdict == Separability::falsified) report.verdict = Separability::falsified;
    else if (cs.verdict == Separability::indeterminate && report.verdict != Separability::falsified)
      report.verdict = Separability::indeterminate;
  }
  return report;
}

StaircaseResult staircase_lookup(const std::vector<double>& xi, const Dist& weights, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0,1)");
  if (xi.size() != weights.size() || xi.empty()) throw std::invalid_argument("one weight per exponent");
  StaircaseResult r;
  r.order.resize(xi.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) { return xi[a] < xi[b]; });
  double cum = 0.0;
  for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
    r.sorted_xi.push_back(xi[r.order[pos]]);
    cum += weights[r.order[pos]];
    r.breakpoints.push_back(cum);
  }
  r.step = r.order.size() - 1;
  for (std::size_t pos = 0; pos < r.order.size(); ++pos)
    if (eps < r.breakpoints[pos]) {
      r.step = pos;
      break;
    }
  r.value = r.sorted_xi[r.step];
  return r;
}

StaircaseResult mixture_epsilon_staircase(const ClassStructure& st, double r_c, double eps,
                                          const EpsilonOptions& options) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0,1)");
  for (double w : st.weights)
    if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be strictly positive");
  if (!options.assume_separable) {
    const SeparabilityReport rep = check_separability(st, r_c);
    if (rep.verdict != Separability::not_falsified)
      throw AssumptionViolation(std::string("order-invariance check ") + to_string(rep.verdict));
  }
  std::vector<double> xi(st.members());
  for (std::size_t i = 0; i < st.members(); ++i) xi[i] = xi_i(st, i, r_c);
  return staircase_lookup(xi, st.weights, eps);
}

double mixture_epsilon_exponent(const MixtureProblem& problem, const ClassStructure& st, double r_c,
                                double eps, const EpsilonOptions& options) {
  if (problem.members() != st.members()) throw std::invalid_argument("problem and structure disagree");
  return mixture_epsilon_staircase(st, r_c, eps, options).value;
}

ReducedTheta reduced_theta(const ClassStructure& st, std::size_t l, double r_c) {
  if (l == 0 || l > st.members()) throw std::out_of_range("l must lie in [1, m]");
  std::vector<double> xi(st.members());
  for (std::size_t i = 0; i < st.members(); ++i) xi[i] = xi_i(st, i, r_c);
  std::vector<std::size_t> order(st.members());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xi[a] < xi[b]; });
  std::vector<bool> removed(st.members(), false);
  for (std::size_t pos = 0; pos + 1 < l; ++pos) removed[order[pos]] = true;

  ReducedTheta out;
  out.value = ExtReal::infinity();
  for (std::size_t s = 0; s < st.class_count(); ++s) {
    std::vector<std::size_t> keep;
    for (std::size_t i : st.classes[s])
      if (!removed[i]) keep.push_back(i);
    if (keep.empty()) continue;
    const double v = optimize_auxiliary(subset_joints(st, keep), subset_d(st, keep), r_c,
                                        Objective::min_over_class)
                         .value;
    out.value = min(out.value, ExtReal(v));
  }
  out.expected = xi[order[l - 1]];
  out.matches = out.value.is_finite() && std::abs(out.value.value() - out.expected) <= 1e-6;
  return out;
}

LagrangianResult r_ht_mu(const std::vector<Joint>& joints_in_class, const std::vector<double>& d_pairs,
                         double mu, const SolverOptions& options) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  const ClassData c = make_class_data(joints_in_class, d_pairs);
  ColumnLp layout;
  for (std::size_t i = 0; i < c.channels.size(); ++i) layout.t_rows.push_back({i, 0.0});
  layout.c_t = mu;
  layout.c_h = 1.0;
  const ColumnSolution sol = solve_refined(c, layout, options);
  if (!sol.ok) throw std::runtime_error("Lagrangian LP did not reach optimality");
  const AuxiliaryResult ev = evaluate(c, kernel_from_support(c, sol));
  LagrangianResult r;
  r.kernel = ev.kernel;
  r.rate = ev.rate;
  r.exponent = ev.value;
  r.value = ev.rate - mu * ev.value;
  return r;
}

namespace {

// Objective of the relaxed Lagrangian on a joint P(u, cell) where each cell
// is (x, y_1, ..., y_m) in the support of the product reference measure.
struct RelaxedModel {
  std::size_t U = 0, nx = 0, ny = 0, m = 0;
  std::vector<std::size_t> cell_x;
  std::vector<std::vector<std::size_t>> cell_y;  // [cell][member]
  std::vector<double> ref;                       // reference mass per cell
  std::vector<double> d;
  double mu = 0.0, alpha = 0.0;

  double value(const std::vector<double>& p) const {
    const std::size_t C = ref.size();
    std::vector<double> pu(U, 0.0), pc(C, 0.0), px(nx, 0.0);
    std::vector<double> pux(U * nx, 0.0);
    std::vector<std::vector<double>> pyi(m, std::vector<double>(ny, 0.0));
    std::vector<std::vector<double>> puyi(m, std::vector<double>(U * ny, 0.0));
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t c = 0; c < C; ++c) {
        const double v = p[u * C + c];
        pu[u] += v;
        pc[c] += v;
        pux[u * nx + cell_x[c]] += v;
        for (std::size_t i = 0; i < m; ++i) puyi[i][u * ny + cell_y[c][i]] += v;
      }
    for (std::size_t c = 0; c < C; ++c) {
      px[cell_x[c]] += pc[c];
      for (std::size_t i = 0; i < m; ++i) pyi[i][cell_y[c][i]] += pc[c];
    }
    const double h_all = entropy(p), h_u = entropy(pu), h_c = entropy(pc), h_x = entropy(px),
                 h_ux = entropy(pux);
    const double i_cu = h_u + h_c - h_all;
    const double i_u_y_given_x = h_ux + h_c - h_x - h_all;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i)
      worst = std::min(worst, entropy(pyi[i]) + h_u - entropy(puyi[i]) + d[i]);
    double div = 0.0;
    for (std::size_t c = 0; c < C; ++c)
      if (pc[c] > 0.0) div += pc[c] * std::log(pc[c] / ref[c]);
    return i_cu - mu * worst + alpha * i_u_y_given_x + (alpha + 1.0) * div;
  }
};

std::vector<double> softmax(const std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += p[k] = std::exp(z[k] - mx);
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

RelaxedLagrangianResult r_ht_mu_alpha(const std::vector<Joint>& joints_in_class,
                                      const std::vector<double>& d_pairs, double mu, double alpha,
                                      const RelaxedOptions& options) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const ClassData c = make_class_data(joints_in_class, d_pairs);
  const LagrangianResult start = r_ht_mu(joints_in_class, d_pairs, mu);

  RelaxedModel model;
  model.nx = c.px.size();
  model.ny = c.channels.front().outputs();
  model.m = c.channels.size();
  model.d = c.d;
  model.mu = mu;
  model.alpha = alpha;
  model.U = std::max(start.kernel.outputs(), model.nx + model.m);
  // Enumerate the support of P_X * prod_i P_{Y_i|X}.
  std::vector<std::size_t> ys(model.m, 0);
  for (std::size_t x = 0; x < model.nx; ++x) {
    if (c.px[x] <= 0.0) continue;
    std::fill(ys.begin(), ys.end(), 0);
    while (true) {
      double mass = c.px[x];
      for (std::size_t i = 0; i < model.m; ++i) mass *= c.channels[i](ys[i], x);
      if (mass > 0.0) {
        model.cell_x.push_back(x);
        model.cell_y.push_back(ys);
        model.ref.push_back(mass);
      }
      std::size_t pos = 0;
      while (pos < model.m && ++ys[pos] == model.ny) ys[pos++] = 0;
      if (pos == model.m) break;
    }
  }
  const std::size_t C = model.ref.size(), dim = model.U * C;
  std::vector<double> markov(dim, 0.0);
  for (std::size_t u = 0; u < start.kernel.outputs(); ++u)
    for (std::size_t cc = 0; cc < C; ++cc) markov[u * C + cc] = model.ref[cc] * start.kernel(u, model.cell_x[cc]);

  RelaxedLagrangianResult out;
  out.start_value = model.value(markov);
  out.value = out.start_value;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t restart = 0; restart <= options.restarts; ++restart) {
    std::vector<double> z(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      z[k] = markov[k] > 0.0 ? std::log(markov[k]) : -30.0;
      if (restart > 0) z[k] = std::max(z[k], -8.0) + 0.5 * noise(rng);
    }
    double f = model.value(softmax(z));
    double step = 1.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      std::vector<double> g(dim);
      constexpr double fd = 1e-6;
      for (std::size_t k = 0; k < dim; ++k) {
        const double keep = z[k];
        z[k] = keep + fd;
        const double fp = model.value(softmax(z));
        z[k] = keep - fd;
        const double fm = model.value(softmax(z));
        z[k] = keep;
        g[k] = (fp - fm) / (2.0 * fd);
      }
      double gn = 0.0;
      for (double v : g) gn += v * v;
      if (gn < 1e-20) break;
      bool moved = false;
      while (step > 1e-12) {
        std::vector<double> trial(z);
        for (std::size_t k = 0; k < dim; ++k) trial[k] -= step * g[k];
        const double ft = model.value(softmax(trial));
        if (ft < f - 1e-4 * step * gn) {
          z = std::move(trial);
          f = ft;
          step *= 2.0;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      ++out.iterations;
      if (!moved) break;
    }
    out.value = std::min(out.value, f);
  }
  return out;
}

std::string kernel_hash(const Channel& kernel) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::int64_t>(kernel.outputs()));
  mix(static_cast<std::int64_t>(kernel.inputs()));
  for (std::size_t u = 0; u < kernel.outputs(); ++u)
    for (std::size_t x = 0; x < kernel.inputs(); ++x) mix(std::llround(kernel(u, x) * 1e9));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

CurveSample sample_of(double r_c, const AuxiliaryResult& r) {
  return {r_c, r.value, r.kernel, kernel_hash(r.kernel)};
}

}  // namespace

ExponentCurve theta_curve(const ClassStructure& st, std::size_t s, const std::vector<double>& grid) {
  ExponentCurve c{"theta_" + std::to_string(s + 1), {}};
  for (double r : grid) c.samples.push_back(sample_of(r, theta_s_solution(st, s, r)));
  return c;
}

ExponentCurve xi_curve(const ClassStructure& st, std::size_t i, const std::vector<double>& grid) {
  ExponentCurve c{"xi_" + std::to_string(i + 1), {}};
  for (double r : grid) c.samples.push_back(sample_of(r, xi_i_solution(st, i, r)));
  return c;
}

ExponentCurve compound_curve(const ClassStructure& st, const std::vector<double>& grid) {
  ExponentCurve c{"compound", {}};
  for (double r : grid) {
    AuxiliaryResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < st.class_count(); ++s) {
      AuxiliaryResult a = theta_s_solution(st, s, r);
      if (a.value < best.value) best = std::move(a);
    }
    c.samples.push_back(sample_of(r, best));
  }
  return c;
}

void write_curve_csv(std::ostream& os, const std::vector<ExponentCurve>& curves, bool header) {
  if (header) os << "curve,R_c,value,kernel_hash\n";
  char buf[64];
  for (const auto& c : curves)
    for (const auto& s : c.samples) {
      std::snprintf(buf, sizeof buf, "%.10f,%.12f", s.r_c, s.value);
      os << c.name << ',' << buf << ',' << s.kernel_hash << '\n';
    }
}

}  // namespace mixht
