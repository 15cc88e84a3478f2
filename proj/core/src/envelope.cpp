#include "mixht/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "mixht/errors.hpp"

namespace mixht {

namespace {

constexpr double kGolden = 0.6180339887498949;

void check_unit(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " outside [0,1]");
}

// Golden-section maximisation of a unimodal function on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, double tol, double* arg) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  // Endpoints matter when the maximiser sits on the boundary.
  double best_x = f1 >= f2 ? x1 : x2, best = std::max(f1, f2);
  for (double e : {a, b}) {
    const double v = f(e);
    if (v > best) {
      best = v;
      best_x = e;
    }
  }
  if (arg) *arg = best_x;
  return best;
}

}  // namespace

void BinaryScenario::validate() const {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2)");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

double phi(const BinaryScenario& scn, double lambda, double p) {
  check_unit(p, "p");
  const double c = 1.0 - 2.0 * scn.delta;
  return scn.alpha * binary_entropy(scn.delta + c * p) + (1.0 - scn.alpha) * binary_entropy(scn.eps * p) -
         lambda * binary_entropy(p);
}

double phi_d1(const BinaryScenario& scn, double lambda, double p) {
  check_unit(p, "p");
  const double c = 1.0 - 2.0 * scn.delta, q = scn.delta + c * p, r = scn.eps * p;
  return scn.alpha * c * std::log((1.0 - q) / q) + (1.0 - scn.alpha) * scn.eps * std::log((1.0 - r) / r) -
         lambda * std::log((1.0 - p) / p);
}

double phi_d2(const BinaryScenario& scn, double lambda, double p) {
  check_unit(p, "p");
  const double c = 1.0 - 2.0 * scn.delta, q = scn.delta + c * p, r = scn.eps * p;
  return -scn.alpha * c * c / (q * (1.0 - q)) - (1.0 - scn.alpha) * scn.eps * scn.eps / (r * (1.0 - r)) +
         lambda / (p * (1.0 - p));
}

std::vector<std::size_t> lower_hull(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<std::size_t> h;
  h.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (h.size() >= 2) {
      const std::size_t a = h[h.size() - 2], b = h.back();
      const double cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (xs[k] - xs[a]);
      if (cross <= 0.0) h.pop_back();
      else break;
    }
    h.push_back(k);
  }
  return h;
}

std::vector<EnvelopePoint> lower_convex_envelope(const std::function<double(double)>& f,
                                                 const EnvelopeOptions& options,
                                                 const std::vector<double>& extra_nodes) {
  if (options.grid < 3) throw std::invalid_argument("envelope grid needs at least 3 points");
  std::vector<double> xs;
  for (std::size_t k = 0; k < options.grid; ++k) xs.push_back(static_cast<double>(k) / (options.grid - 1));
  for (double e : extra_nodes) {
    check_unit(e, "envelope node");
    xs.push_back(e);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = f(xs[k]);
  std::vector<std::size_t> hull = lower_hull(xs, ys);

  if (options.refine) {
    double h = 1.0 / static_cast<double>(options.grid - 1);
    while (h > options.refine_to) {
      h *= 0.5;
      std::vector<double> add;
      for (std::size_t v = 0; v < hull.size(); ++v) {
        const std::size_t idx = hull[v];
        const bool long_left = v > 0 && hull[v - 1] + 1 < idx;
        const bool long_right = v + 1 < hull.size() && hull[v + 1] > idx + 1;
        if (!long_left && !long_right) continue;
        for (double cand : {xs[idx] - h, xs[idx] + h})
          if (cand > 0.0 && cand < 1.0) add.push_back(cand);
      }
      if (add.empty()) break;
      std::vector<double> merged_x, merged_y;
      std::sort(add.begin(), add.end());
      std::size_t i = 0, j = 0;
      while (i < xs.size() || j < add.size()) {
        if (j == add.size() || (i < xs.size() && xs[i] <= add[j])) {
          if (j < add.size() && i < xs.size() && xs[i] == add[j]) ++j;
          merged_x.push_back(xs[i]);
          merged_y.push_back(ys[i]);
          ++i;
        } else {
          if (merged_x.empty() || merged_x.back() != add[j]) {
            merged_x.push_back(add[j]);
            merged_y.push_back(f(add[j]));
          }
          ++j;
        }
      }
      xs.swap(merged_x);
      ys.swap(merged_y);
      hull = lower_hull(xs, ys);
    }
  }

  std::vector<EnvelopePoint> out(xs.size());
  std::size_t seg = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (seg + 1 < hull.size() && hull[seg + 1] < k) ++seg;
    double psi;
    if (seg + 1 >= hull.size() || hull[seg] == k) {
      psi = ys[k];
    } else {
      const std::size_t a = hull[seg], b = hull[seg + 1];
      const double t = (xs[k] - xs[a]) / (xs[b] - xs[a]);
      psi = ys[a] + t * (ys[b] - ys[a]);
    }
    psi = std::min(psi, ys[k]);
    out[k] = {xs[k], ys[k], psi, std::abs(ys[k] - psi) <= 1e-10};
  }
  return out;
}

double envelope_value(const std::vector<EnvelopePoint>& env, double p) {
  if (env.empty()) throw std::invalid_argument("empty envelope");
  check_unit(p, "p");
  auto it = std::lower_bound(env.begin(), env.end(), p, [](const EnvelopePoint& e, double v) { return e.p < v; });
  if (it == env.end()) return env.back().psi;
  if (it->p == p || it == env.begin()) return it->psi;
  const auto prev = it - 1;
  const double t = (p - prev->p) / (it->p - prev->p);
  return prev->psi + t * (it->psi - prev->psi);
}

EnvelopeEvaluator::EnvelopeEvaluator(double delta, double eps, double p_x, std::size_t grid)
    : delta_(delta), eps_(eps), p_x_(p_x) {
  BinaryScenario{delta, eps, 0.5}.validate();
  check_unit(p_x, "p_x");
  if (grid < 3) throw std::invalid_argument("grid too small");
  for (std::size_t k = 0; k < grid; ++k) p_.push_back(static_cast<double>(k) / (grid - 1));
  auto pos = std::lower_bound(p_.begin(), p_.end(), p_x);
  if (pos == p_.end() || *pos != p_x) pos = p_.insert(pos, p_x);
  px_index_ = static_cast<std::size_t>(pos - p_.begin());
  const double c = 1.0 - 2.0 * delta;
  for (double p : p_) {
    h1_.push_back(binary_entropy(delta + c * p));
    h2_.push_back(binary_entropy(eps * p));
    h0_.push_back(binary_entropy(p));
  }
}

double EnvelopeEvaluator::psi_at_px(double alpha, double lambda) const {
  const std::size_t n = p_.size();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = alpha * h1_[k] + (1.0 - alpha) * h2_[k] - lambda * h0_[k];
  const std::vector<std::size_t> hull = lower_hull(p_, f);
  const auto it = std::lower_bound(hull.begin(), hull.end(), px_index_);
  if (*it == px_index_) return f[px_index_];
  const std::size_t b = *it, a = *(it - 1);
  const double t = (p_[px_index_] - p_[a]) / (p_[b] - p_[a]);
  return f[a] + t * (f[b] - f[a]);
}

double EnvelopeEvaluator::f_alpha(double alpha, double x, double* argmax_lambda) const {
  return golden_max([&](double lam) { return psi_at_px(alpha, lam) + lam * x; }, 0.0, 1.0, 1e-9,
                    argmax_lambda);
}

double f_alpha(const BinaryScenario& scn, double p_x, double x) {
  scn.validate();
  if (!(x >= 0.0 && x <= std::numbers::ln2 + 1e-15)) throw std::invalid_argument("x outside [0, ln 2]");
  return EnvelopeEvaluator(scn.delta, scn.eps, p_x).f_alpha(scn.alpha, x);
}

EnvelopeExponents envelope_exponents(const EnvelopeEvaluator& ev, double r_c, double d_bs, double d_z) {
  if (!(r_c >= 0.0)) throw std::invalid_argument("R_c must be nonnegative");
  const double p = ev.p_x(), c = 1.0 - 2.0 * ev.delta();
  const double hx = binary_entropy(p);
  const double x = std::max(hx - r_c, 0.0);
  const double c1 = binary_entropy(ev.delta() + c * p) + d_bs;
  const double c2 = binary_entropy(ev.eps() * p) + d_z;
  EnvelopeExponents out;
  out.xi_bs = c1 - ev.f_alpha(1.0, x);
  out.xi_z = c2 - ev.f_alpha(0.0, x);
  double arg = 0.0;
  const double neg = golden_max(
      [&](double a) { return -(a * c1 + (1.0 - a) * c2 - ev.f_alpha(a, x)); }, 0.0, 1.0, 1e-7, &arg);
  out.theta = -neg;
  out.alpha_star = arg;
  return out;
}

LambdaBs lambda_bs(const BinaryScenario& scn, double p_bs) {
  if (!(p_bs > 0.0 && p_bs < 0.5)) throw std::invalid_argument("p_bs must lie in (0, 1/2)");
  const double c = 1.0 - 2.0 * scn.delta;
  LambdaBs r;
  r.limit = c * c;
  if (0.5 - p_bs < 1e-7) {
    r.lambda = r.limit;
  } else {
    r.lambda = c * std::log((1.0 - scn.delta - c * p_bs) / (scn.delta + c * p_bs)) / std::log((1.0 - p_bs) / p_bs);
  }
  r.below_limit = r.lambda < r.limit;
  BinaryScenario bs = scn;
  bs.alpha = 1.0;
  r.second_derivative = phi_d2(bs, r.lambda, p_bs);
  r.convex_at_point = r.second_derivative > 0.0;
  return r;
}

LambdaZ lambda_z(const BinaryScenario& scn, double p_z) {
  if (!(p_z > 0.0 && p_z < 1.0)) throw std::invalid_argument("p_z must lie in (0, 1)");
  LambdaZ r;
  r.lambda = std::log1p(-scn.eps * p_z) / std::log1p(-p_z);
  r.threshold = (scn.eps - r.lambda) / (scn.eps * (1.0 - r.lambda));
  r.below_eps = r.lambda < scn.eps;
  r.above_threshold = p_z >= r.threshold;
  return r;
}

double lambda_alpha(const BinaryScenario& scn, double p_l) {
  if (!(p_l > 0.0 && p_l < 1.0)) throw std::invalid_argument("p_l must lie in (0, 1)");
  const double a = scn.alpha, d = scn.delta, e = scn.eps, c = 1.0 - 2.0 * d;
  const double num = a * binary_entropy(d + c * p_l) + (1.0 - a) * binary_entropy(e * p_l) - a * binary_entropy(d) -
                     p_l * (a * c * std::log((1.0 - d - c * p_l) / (d + c * p_l)) +
                            (1.0 - a) * e * std::log((1.0 - e * p_l) / (e * p_l)));
  const double den = binary_entropy(p_l) - p_l * std::log((1.0 - p_l) / p_l);
  return num / den;
}

std::vector<double> cubic_roots(double a3, double a2, double a1, double a0) {
  if (a3 == 0.0) throw std::invalid_argument("leading coefficient is zero");
  const double b = a2 / a3, c = a1 / a3, d = a0 / a3;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc < 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double th = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(r * std::cos(th - 2.0 * std::numbers::pi * k / 3.0) - b / 3.0);
  } else {
    const double s = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) - b / 3.0);
    if (disc == 0.0 && p != 0.0) roots.push_back(-std::cbrt(-q / 2.0) - b / 3.0);
  }
  for (double& x : roots)
    for (int it = 0; it < 4; ++it) {
      const double f = ((a3 * x + a2) * x + a1) * x + a0;
      const double df = (3.0 * a3 * x + 2.0 * a2) * x + a1;
      if (df == 0.0) break;
      x -= f / df;
    }
  std::sort(roots.begin(), roots.end());
  return roots;
}

SignPoly sign_poly(const BinaryScenario& scn, double lambda) {
  const double a = scn.alpha, d = scn.delta, e = scn.eps, c = 1.0 - 2.0 * d, l = lambda;
  SignPoly s;
  s.a3 = c * c * e * (l - 1.0);
  s.a2 = c * c * (-(1.0 + e) * l + (1.0 - e) * a + 2.0 * e);
  s.a1 = d * (1.0 - d) * (e * (5.0 - 5.0 * a - l) - 4.0 * l + 4.0 * a) + e * (a - 1.0) + l - a;
  s.a0 = (1.0 - d) * d * (e * (a - 1.0) + l);
  if (s.a3 != 0.0) s.roots = cubic_roots(s.a3, s.a2, s.a1, s.a0);
  s.s0 = s.at(0.0);
  s.s1 = s.at(1.0);
  return s;
}

PipelineReport counterexample_pipeline(const PipelineInputs& in) {
  const BinaryScenario& scn = in.scenario;
  scn.validate();
  if (!(in.grid_step > 0.0 && in.grid_step < 0.1)) throw std::invalid_argument("grid step must lie in (0, 0.1)");
  if (!(in.p0 > 0.0 && in.p0 < 1.0)) throw std::invalid_argument("p0 must lie in (0, 1)");
  PipelineReport r;
  r.inputs = in;
  const double d = scn.delta, e = scn.eps, a = scn.alpha, c = 1.0 - 2.0 * d;

  const LambdaBs lb = lambda_bs(scn, in.p_bs);
  r.lambda_bs = lb.lambda;
  r.d2_phi_bs = lb.second_derivative;
  if (!lb.below_limit) throw CheckFailed("lambda_bs_below_limit", "lambda_BS >= (1-2delta)^2");
  if (!lb.convex_at_point) throw CheckFailed("phi_bs_convex_at_p_bs", "second derivative is not positive");
  r.x_bs = binary_entropy(in.p_bs);
  r.f_bs = binary_entropy(d + c * in.p_bs);
  if (!(in.p0 > in.p_bs && in.p0 < 1.0 - in.p_bs))
    throw CheckFailed("p0_in_bracket", "p0 must lie in (p_BS, 1 - p_BS)");
  r.r_c = binary_entropy(in.p0) - r.x_bs;

  auto g = [&](double p) { return in.p0 * binary_entropy(p) / p - r.x_bs; };
  const auto k_end = static_cast<long long>(std::floor(1.0 / in.grid_step));
  long long k = static_cast<long long>(std::floor(in.p0 / in.grid_step)) + 1;
  bool found = false;
  for (; k <= k_end; ++k) {
    const double p = static_cast<double>(k) * in.grid_step;
    if (p >= 1.0) break;
    if (g(p) <= 0.0) {
      found = true;
      break;
    }
  }
  if (!found) throw CheckFailed("bracket_found", "h(p)/p never crosses h(p_BS)/p0 on the grid");
  r.p_l = static_cast<double>(k) * in.grid_step;
  r.p_u = static_cast<double>(k - 1) * in.grid_step;
  if (!(r.p_u > in.p0)) throw CheckFailed("bracket_found", "crossing lies at p0");
  r.residual_u = g(r.p_u);
  r.residual_l = g(r.p_l);

  const LambdaZ lz = lambda_z(scn, r.p_u);
  r.lambda_z = lz.lambda;
  r.threshold = lz.threshold;
  if (!lz.below_eps) throw CheckFailed("lambda_z_below_eps", "lambda_Z >= eps");
  if (!lz.above_threshold) throw CheckFailed("p_u_above_threshold", "p^u below (eps-lambda)/(eps(1-lambda))");
  r.x_u = in.p0 * binary_entropy(r.p_u) / r.p_u;
  r.f_z = in.p0 * binary_entropy(e * r.p_u) / r.p_u;

  if (a == 0.0 || a == 1.0) {
    r.notes.push_back("alpha at an endpoint: the mixed bound reduces to a single channel, step 3 skipped");
    r.verdict = false;
    r.separation = 0.0;
    return r;
  }
  r.step3_run = true;
  r.lambda_alpha = lambda_alpha(scn, r.p_l);
  r.poly = sign_poly(scn, r.lambda_alpha);
  r.d2_phi_alpha = phi_d2(scn, r.lambda_alpha, r.p_l);
  if (!(r.poly.s0 < 0.0)) throw CheckFailed("s0_negative", "s(0) >= 0");
  if (!(r.poly.s1 > 0.0)) throw CheckFailed("s1_positive", "s(1) <= 0");
  if (!(r.d2_phi_alpha > 0.0)) throw CheckFailed("phi_alpha_convex_at_p_l", "second derivative is not positive");
  r.x_l = in.p0 * binary_entropy(r.p_l) / r.p_l;
  const double w = in.p0 / r.p_l;
  r.f_alpha = w * (a * binary_entropy(d + c * r.p_l) + (1.0 - a) * binary_entropy(e * r.p_l)) +
              (1.0 - w) * a * binary_entropy(d);
  r.separation = r.f_alpha - std::max(r.f_bs, r.f_z);
  r.verdict = r.separation > 0.0;
  return r;
}

void to_json(nlohmann::json& j, const PipelineReport& r) {
  j = nlohmann::json{
      {"inputs",
       {{"delta", r.inputs.scenario.delta},
        {"eps", r.inputs.scenario.eps},
        {"alpha", r.inputs.scenario.alpha},
        {"p_bs", r.inputs.p_bs},
        {"p0", r.inputs.p0},
        {"grid_step", r.inputs.grid_step}}},
      {"step1", {{"lambda_bs", r.lambda_bs}, {"d2_phi_bs", r.d2_phi_bs}, {"x_bs", r.x_bs}, {"F_bs", r.f_bs}}},
      {"step2",
       {{"p_u", r.p_u},
        {"p_l", r.p_l},
        {"residual_u", r.residual_u},
        {"residual_l", r.residual_l},
        {"lambda_z", r.lambda_z},
        {"threshold", r.threshold},
        {"x_u", r.x_u},
        {"F_z", r.f_z}}},
      {"R_c", r.r_c},
      {"separation", r.separation},
      {"verdict", r.verdict},
      {"notes", r.notes}};
  if (r.step3_run)
    j["step3"] = {{"lambda_alpha", r.lambda_alpha},
                  {"s_coefficients", {r.poly.a3, r.poly.a2, r.poly.a1, r.poly.a0}},
                  {"s_roots", r.poly.roots},
                  {"s0", r.poly.s0},
                  {"s1", r.poly.s1},
                  {"d2_phi_alpha", r.d2_phi_alpha},
                  {"x_l", r.x_l},
                  {"F_alpha", r.f_alpha}};
}

void write_envelope_csv(std::ostream& os, const std::vector<EnvelopePoint>& env) {
  os << "p,phi,psi,on_envelope\n";
  char buf[96];
  for (const auto& e : env) {
    std::snprintf(buf, sizeof buf, "%.10f,%.12f,%.12f,%d\n", e.p, e.phi, e.psi, e.on_envelope ? 1 : 0);
    os << buf;
  }
}

std::vector<SweepRecord> sweep(const BinaryScenario& base, double p0, const std::vector<double>& p_bs_values,
                               const std::vector<double>& alpha_values, double grid_step) {
  std::vector<SweepRecord> out;
  for (double pb : p_bs_values)
    for (double al : alpha_values) {
      SweepRecord rec{pb, al, false, false, 0.0, {}};
      PipelineInputs in{{base.delta, base.eps, al}, pb, p0, grid_step};
      try {
        const PipelineReport rep = counterexample_pipeline(in);
        rec.completed = true;
        rec.verdict = rep.verdict;
        rec.separation = rep.separation;
      } catch (const CheckFailed& e) {
        rec.failed_check = e.check();
      }
      out.push_back(rec);
    }
  return out;
}

}  // namespace mixht
