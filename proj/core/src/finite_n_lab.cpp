#include "mixht/finite_n_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>

#include "mixht/errors.hpp"

namespace mixht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

std::atomic<std::size_t> g_workers{0};

void guard(std::uint64_t states, const char* what) {
  if (states > kStateGuard) {
    throw GuardExceeded(std::string(what) + ": " + std::to_string(states) + " states exceed the guard of " +
                        std::to_string(kStateGuard));
  }
}

// Runs f(begin, end) over [0, count) split into contiguous chunks.
template <class F>
void parallel_rows(std::uint64_t count, F&& f) {
  const std::size_t workers = std::min<std::uint64_t>(lab_workers(), std::max<std::uint64_t>(count, 1));
  if (workers <= 1 || count < 64) {
    f(std::uint64_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::uint64_t b = w * chunk;
    const std::uint64_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  for (auto& t : pool) t.join();
}

// n-fold product of a single-letter table over coordinates with sizes `dims`.
// The letter index and the block index are both row-major in the coordinates,
// and every coordinate is coded with its first symbol most significant.
std::vector<double> block_table(const std::vector<double>& letter, const std::vector<std::size_t>& dims,
                                std::size_t n) {
  const std::size_t c = dims.size();
  std::vector<std::uint64_t> cur(c, 1);
  std::vector<double> table{1.0};
  std::uint64_t total = 1;
  for (std::size_t d : dims) total *= checked_power(d, n);
  guard(total, "block table");
  std::vector<std::size_t> a(c);
  std::vector<std::uint64_t> idx(c);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::vector<std::uint64_t> next(c);
    std::uint64_t next_total = 1;
    for (std::size_t k = 0; k < c; ++k) {
      next[k] = cur[k] * dims[k];
      next_total *= next[k];
    }
    std::vector<double> out(next_total, 0.0);
    for (std::uint64_t flat = 0; flat < table.size(); ++flat) {
      const double v = table[flat];
      if (v == 0.0) continue;
      std::uint64_t rem = flat;
      for (std::size_t k = c; k-- > 0;) {
        idx[k] = rem % cur[k];
        rem /= cur[k];
      }
      for (std::size_t l = 0; l < letter.size(); ++l) {
        if (letter[l] == 0.0) continue;
        std::size_t lr = l;
        for (std::size_t k = c; k-- > 0;) {
          a[k] = lr % dims[k];
          lr /= dims[k];
        }
        std::uint64_t o = 0;
        for (std::size_t k = 0; k < c; ++k) o = o * next[k] + (idx[k] * dims[k] + a[k]);
        out[o] = v * letter[l];
      }
    }
    table = std::move(out);
    cur = std::move(next);
  }
  return table;
}

std::vector<double> pushforward(const std::vector<std::size_t>& map, std::size_t size, const std::vector<double>& p) {
  std::vector<double> out(size, 0.0);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += p[i];
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

bool leq(double a, double b) { return a <= b + kSlack * std::max(1.0, std::abs(b)); }

// Scale factor e^{n e} with the conventions for infinite exponents.
double growth(std::size_t n, double e) {
  if (e == -kInf) return 0.0;
  if (e == kInf) return kInf;
  return std::exp(static_cast<double>(n) * e);
}

double finite_kl(const std::vector<double>& p, const std::vector<double>& q, const char* what) {
  const ExtReal d = kl_divergence(Dist::normalized(p), Dist::normalized(q));
  if (!d.is_finite()) {
    throw AssumptionViolation(std::string("null law is not absolutely continuous w.r.t. ") + what);
  }
  return d.value();
}

void check_alt_sizes(std::size_t nx, std::size_t ny, const std::pair<SourceModel, SourceModel>& alt) {
  if (alt.first.alphabet_size() != ny || alt.second.alphabet_size() != nx) {
    throw std::invalid_argument("alternative alphabets do not match the null law");
  }
}

}  // namespace

void set_lab_workers(std::size_t workers) { g_workers.store(workers); }

std::size_t lab_workers() {
  const std::size_t w = g_workers.load();
  if (w) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t checked_power(std::size_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > (std::numeric_limits<std::uint64_t>::max() >> 1) / base) {
      throw GuardExceeded("sequence space overflows 64 bits");
    }
    r *= base;
  }
  return r;
}

// ---------------------------------------------------------------------------

BlockJoint BlockJoint::iid(const Joint& j, std::size_t n) {
  BlockJoint b;
  b.n = n;
  b.nx = j.x_size();
  b.ny = j.y_size();
  b.x_count = checked_power(b.nx, n);
  b.y_count = checked_power(b.ny, n);
  guard(b.x_count * b.y_count, "block joint");
  b.prob = block_table(j.flat(), {b.nx, b.ny}, n);
  return b;
}

BlockJoint BlockJoint::mixture(const std::vector<Joint>& joints, const Dist& weights, std::size_t n) {
  if (joints.empty() || joints.size() != weights.size()) throw std::invalid_argument("mixture size mismatch");
  BlockJoint out = iid(joints.front(), n);
  for (double& v : out.prob) v *= weights[0];
  for (std::size_t l = 1; l < joints.size(); ++l) {
    const BlockJoint b = iid(joints[l], n);
    if (b.nx != out.nx || b.ny != out.ny) throw std::invalid_argument("mixture alphabets differ");
    for (std::size_t c = 0; c < b.prob.size(); ++c) out.prob[c] += weights[l] * b.prob[c];
  }
  return out;
}

std::vector<double> BlockJoint::x_marginal() const {
  std::vector<double> m(x_count, 0.0);
  for (std::uint64_t x = 0; x < x_count; ++x)
    for (std::uint64_t y = 0; y < y_count; ++y) m[x] += prob[x * y_count + y];
  return m;
}

std::vector<double> BlockJoint::y_marginal() const {
  std::vector<double> m(y_count, 0.0);
  for (std::uint64_t x = 0; x < x_count; ++x)
    for (std::uint64_t y = 0; y < y_count; ++y) m[y] += prob[x * y_count + y];
  return m;
}

// ---------------------------------------------------------------------------

void TestingScheme::validate() const {
  if (messages == 0) throw std::invalid_argument("scheme needs at least one message");
  if (compress.size() != checked_power(nx, n)) throw std::invalid_argument("compression table is not total on X^n");
  for (std::size_t u : compress)
    if (u >= messages) throw std::invalid_argument("compression value outside the message set");
  if (accept.size() != checked_power(ny, n) * messages) throw std::invalid_argument("decision table has wrong size");
  for (double a : accept)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("decision entries must lie in [0, 1]");
  if (reserved.size() > messages) throw std::invalid_argument("more reserved symbols than messages");
}

TestingScheme TestingScheme::constant(std::size_t n, std::size_t nx, std::size_t ny, double accept_prob) {
  TestingScheme s;
  s.n = n;
  s.nx = nx;
  s.ny = ny;
  s.messages = 1;
  s.compress.assign(checked_power(nx, n), 0);
  s.accept.assign(checked_power(ny, n), accept_prob);
  return s;
}

std::vector<std::size_t> TestingScheme::identity_compression(std::size_t n, std::size_t nx) {
  std::vector<std::size_t> c(checked_power(nx, n));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = i;
  return c;
}

std::vector<std::size_t> TestingScheme::type_compression(std::size_t n, std::size_t nx, std::size_t* messages) {
  const std::uint64_t count = checked_power(nx, n);
  guard(count, "type compression");
  std::map<std::vector<std::size_t>, std::size_t> index;
  std::vector<std::size_t> c(count);
  for (std::uint64_t x = 0; x < count; ++x) {
    std::vector<std::size_t> t(nx, 0);
    for (std::size_t s : decode_sequence(x, nx, n)) ++t[s];
    auto [it, inserted] = index.emplace(std::move(t), index.size());
    c[x] = it->second;
  }
  if (messages) *messages = index.size();
  return c;
}

// ---------------------------------------------------------------------------

MessageLaw induced_null(const std::vector<std::size_t>& compress, std::size_t messages, const BlockJoint& p) {
  if (compress.size() != p.x_count) throw std::invalid_argument("compression does not match the block law");
  MessageLaw law;
  law.y_count = p.y_count;
  law.messages = messages;
  law.prob.assign(p.y_count * messages, 0.0);
  parallel_rows(p.y_count, [&](std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t y = b; y < e; ++y) {
      double* row = &law.prob[y * messages];
      for (std::uint64_t x = 0; x < p.x_count; ++x) row[compress[x]] += p.prob[x * p.y_count + y];
    }
  });
  return law;
}

MessageLaw induced_product(const std::vector<std::size_t>& compress, std::size_t messages,
                           const std::vector<double>& qy_block, const std::vector<double>& qx_block) {
  if (compress.size() != qx_block.size()) throw std::invalid_argument("compression does not match the X law");
  const std::vector<double> qu = pushforward(compress, messages, qx_block);
  MessageLaw law;
  law.y_count = qy_block.size();
  law.messages = messages;
  law.prob.resize(law.y_count * messages);
  for (std::uint64_t y = 0; y < law.y_count; ++y)
    for (std::size_t u = 0; u < messages; ++u) law.prob[y * messages + u] = qy_block[y] * qu[u];
  return law;
}

ErrorPair errors_from_laws(const MessageLaw& null, const MessageLaw& alt, const std::vector<double>& accept) {
  if (null.prob.size() != accept.size() || alt.prob.size() != accept.size()) {
    throw std::invalid_argument("decision table does not match the laws");
  }
  double a = 0.0, b = 0.0, ca = 0.0, cb = 0.0;
  for (std::size_t c = 0; c < accept.size(); ++c) {
    // Kahan summation keeps the result independent of table size effects.
    const double ta = null.prob[c] * (1.0 - accept[c]) - ca;
    const double sa = a + ta;
    ca = (sa - a) - ta;
    a = sa;
    const double tb = alt.prob[c] * accept[c] - cb;
    const double sb = b + tb;
    cb = (sb - b) - tb;
    b = sb;
  }
  return {clamp01(a), clamp01(b), false};
}

ErrorPair exact_errors(const TestingScheme& scheme, const BlockJoint& null,
                       const std::pair<SourceModel, SourceModel>& alt) {
  scheme.validate();
  if (null.n != scheme.n || null.nx != scheme.nx || null.ny != scheme.ny) {
    throw std::invalid_argument("scheme and null law disagree on block length or alphabets");
  }
  check_alt_sizes(null.nx, null.ny, alt);
  const MessageLaw p = induced_null(scheme.compress, scheme.messages, null);
  const MessageLaw q = induced_product(scheme.compress, scheme.messages, alt.first.block_probabilities(scheme.n),
                                       alt.second.block_probabilities(scheme.n));
  return errors_from_laws(p, q, scheme.accept);
}

ErrorPair exact_errors(const TestingScheme& scheme, const Joint& null,
                       const std::pair<SourceModel, SourceModel>& alt) {
  return exact_errors(scheme, BlockJoint::iid(null, scheme.n), alt);
}

CompoundErrors compound_errors(const TestingScheme& scheme, const MixtureProblem& problem) {
  problem.validate();
  scheme.validate();
  CompoundErrors out;
  std::vector<MessageLaw> nulls;
  for (const Joint& j : problem.joints) {
    const BlockJoint b = BlockJoint::iid(j, scheme.n);
    const MessageLaw p = induced_null(scheme.compress, scheme.messages, b);
    double a = 0.0;
    for (std::size_t c = 0; c < p.prob.size(); ++c) a += p.prob[c] * (1.0 - scheme.accept[c]);
    out.alpha.push_back(clamp01(a));
  }
  std::vector<std::vector<double>> qu;
  for (const SourceModel& t : problem.x_alternatives)
    qu.push_back(pushforward(scheme.compress, scheme.messages, t.block_probabilities(scheme.n)));
  for (const SourceModel& j : problem.y_alternatives) {
    const std::vector<double> qy = j.block_probabilities(scheme.n);
    std::vector<double> row;
    for (const auto& q : qu) {
      double b = 0.0;
      for (std::uint64_t y = 0; y < qy.size(); ++y) {
        double inner = 0.0;
        for (std::size_t u = 0; u < scheme.messages; ++u) inner += q[u] * scheme.decide(y, u);
        b += qy[y] * inner;
      }
      row.push_back(clamp01(b));
    }
    out.beta.push_back(std::move(row));
  }
  out.alpha_max = *std::max_element(out.alpha.begin(), out.alpha.end());
  for (const auto& row : out.beta)
    for (double b : row) out.beta_max = std::max(out.beta_max, b);
  return out;
}

ErrorPair mixture_errors(const TestingScheme& scheme, const MixtureProblem& problem) {
  const CompoundErrors c = compound_errors(scheme, problem);
  const double floor = problem.weight_floor;
  double sum = 0.0;
  for (double a : c.alpha) sum += a;
  const double slack = 1.0 - floor * static_cast<double>(c.alpha.size());
  const double alpha = floor * sum + slack * c.alpha_max;
  double beta = 0.0;
  for (const auto& row : c.beta)
    for (double b : row) beta += b;
  beta *= problem.alt_cap.at(scheme.n);
  return {alpha, beta, false};
}

// ---------------------------------------------------------------------------

ThresholdResult threshold_scheme(const MixtureProblem& problem, const std::vector<std::size_t>& compress,
                                 std::size_t messages, std::size_t n, double e) {
  problem.validate();
  if (std::isnan(e)) throw std::invalid_argument("threshold exponent is NaN");
  const std::size_t nx = problem.joints.front().x_size();
  const std::size_t ny = problem.joints.front().y_size();

  std::vector<MessageLaw> members;
  for (const Joint& j : problem.joints)
    members.push_back(induced_null(compress, messages, BlockJoint::iid(j, n)));

  ThresholdResult r;
  r.p_bar = members.front();
  for (std::size_t l = 1; l < members.size(); ++l)
    for (std::size_t c = 0; c < r.p_bar.prob.size(); ++c) r.p_bar.prob[c] += members[l].prob[c];

  r.q_max.y_count = r.p_bar.y_count;
  r.q_max.messages = messages;
  r.q_max.prob.assign(r.p_bar.prob.size(), 0.0);
  std::vector<std::vector<double>> qx;
  for (const SourceModel& t : problem.x_alternatives) qx.push_back(t.block_probabilities(n));
  for (const SourceModel& j : problem.y_alternatives) {
    const std::vector<double> qy = j.block_probabilities(n);
    for (const auto& q : qx) {
      const MessageLaw law = induced_product(compress, messages, qy, q);
      for (std::size_t c = 0; c < law.prob.size(); ++c) r.q_max.prob[c] = std::max(r.q_max.prob[c], law.prob[c]);
    }
  }

  const double f = growth(n, e);
  auto above = [&](double p, double q, bool strict) {
    if (e == kInf) return false;
    if (q == 0.0) return strict ? p > 0.0 : true;
    const double bar = f * q;
    return strict ? p > bar : p >= bar;
  };

  TestingScheme& s = r.scheme;
  s.n = n;
  s.nx = nx;
  s.ny = ny;
  s.messages = messages;
  s.compress = compress;
  s.accept.resize(r.p_bar.prob.size());
  for (std::size_t c = 0; c < s.accept.size(); ++c) s.accept[c] = above(r.p_bar.prob[c], r.q_max.prob[c], false);
  for (const MessageLaw& m : members) {
    std::vector<bool> set(m.prob.size());
    for (std::size_t c = 0; c < set.size(); ++c) set[c] = above(m.prob[c], r.q_max.prob[c], true);
    r.info_sets.push_back(std::move(set));
  }
  s.validate();
  return r;
}

ChangeOfMeasure change_of_measure(const MessageLaw& p, const MessageLaw& q, const std::vector<double>& accept,
                                  std::size_t n, double e) {
  if (p.prob.size() != accept.size() || q.prob.size() != accept.size()) {
    throw std::invalid_argument("decision table does not match the measures");
  }
  double alpha = 0.0, beta = 0.0, rhs = 0.0;
  const double f = growth(n, e);
  for (std::size_t c = 0; c < accept.size(); ++c) {
    alpha += p.prob[c] * (1.0 - accept[c]);
    beta += q.prob[c] * accept[c];
    if (p.prob[c] <= f * q.prob[c] || (q.prob[c] == 0.0 && p.prob[c] == 0.0)) rhs += p.prob[c];
  }
  ChangeOfMeasure out;
  out.lhs = alpha + (beta == 0.0 ? 0.0 : f * beta);
  out.rhs = rhs;
  out.holds = leq(out.rhs, out.lhs);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

}  // namespace

LrtReport lrt_optimality_check(const std::vector<std::size_t>& compress, std::size_t messages,
                               const BlockJoint& null, const std::pair<SourceModel, SourceModel>& alt) {
  check_alt_sizes(null.nx, null.ny, alt);
  const MessageLaw p = induced_null(compress, messages, null);
  const MessageLaw q =
      induced_product(compress, messages, alt.first.block_probabilities(null.n), alt.second.block_probabilities(null.n));
  LrtReport rep;
  rep.cells = p.prob.size();
  if (rep.cells > kLrtCellGuard) {
    throw GuardExceeded("decision maps over " + std::to_string(rep.cells) + " cells exceed the limit of " +
                        std::to_string(kLrtCellGuard));
  }
  rep.maps = std::size_t{1} << rep.cells;

  std::vector<std::pair<double, double>> points;
  points.reserve(rep.maps);
  double pa = 0.0, qa = 0.0;  // accepted mass under P and Q
  std::uint64_t gray = 0;
  points.emplace_back(1.0 - pa, qa);
  for (std::uint64_t i = 1; i < rep.maps; ++i) {
    const std::uint64_t g = i ^ (i >> 1);
    const std::uint64_t flip = g ^ gray;
    const std::size_t c = static_cast<std::size_t>(__builtin_ctzll(flip));
    if (g & flip) {
      pa += p.prob[c];
      qa += q.prob[c];
    } else {
      pa -= p.prob[c];
      qa -= q.prob[c];
    }
    gray = g;
    points.emplace_back(1.0 - pa, qa);
  }

  std::sort(points.begin(), points.end());
  const double scale = 1e-12;
  std::vector<std::pair<double, double>> hull;
  for (const auto& pt : points) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), pt) <= scale) hull.pop_back();
    hull.push_back(pt);
  }
  // Keep the decreasing part: vertices up to the first minimum of beta.
  std::size_t last = 0;
  for (std::size_t i = 1; i < hull.size(); ++i)
    if (hull[i].second < hull[last].second - scale) last = i;
  hull.resize(last + 1);
  // Collapse duplicates at alpha = 0 (keep the lowest beta).
  rep.frontier.clear();
  for (const auto& v : hull) {
    if (!rep.frontier.empty() && std::abs(rep.frontier.back().first - v.first) <= scale) {
      rep.frontier.back().second = std::min(rep.frontier.back().second, v.second);
      continue;
    }
    rep.frontier.push_back(v);
  }

  std::vector<std::size_t> order(rep.cells);
  for (std::size_t c = 0; c < rep.cells; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // p_a / q_a > p_b / q_b without division.
    return p.prob[a] * q.prob[b] > p.prob[b] * q.prob[a];
  });
  double pp = 0.0, qq = 0.0;
  rep.lrt_points.emplace_back(1.0, 0.0);
  for (std::size_t c : order) {
    pp += p.prob[c];
    qq += q.prob[c];
    rep.lrt_points.emplace_back(1.0 - pp, qq);
  }

  rep.all_vertices_lrt = true;
  for (const auto& v : rep.frontier) {
    bool found = false;
    for (const auto& l : rep.lrt_points) {
      if (std::abs(l.first - v.first) <= 1e-10 && std::abs(l.second - v.second) <= 1e-10) {
        found = true;
        break;
      }
    }
    if (!found) rep.all_vertices_lrt = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::size_t TypicalSet::size() const { return static_cast<std::size_t>(std::count(member.begin(), member.end(), true)); }

TypicalSet typicality_set(const Dist& p, const SourceModel& q, std::size_t n, double gamma) {
  if (p.size() != q.alphabet_size()) throw std::invalid_argument("alphabet mismatch");
  const std::uint64_t count = checked_power(p.size(), n);
  guard(count, "typicality set");
  const std::vector<double> pb = block_table(p.probs(), {p.size()}, n);
  const std::vector<double> qb = q.block_probabilities(n);
  bool abs_cont = true;
  for (std::uint64_t v = 0; v < count; ++v)
    if (pb[v] > 0.0 && qb[v] == 0.0) abs_cont = false;
  const ExtReal d = divergence_rate(p, q);
  TypicalSet s;
  s.center = d.to_double();
  s.member.resize(count);
  for (std::uint64_t v = 0; v < count; ++v) {
    const double iota = information_density(pb[v], qb[v], abs_cont);
    bool in;
    if (!d.is_finite()) {
      in = iota == kInf;
    } else {
      in = std::isfinite(iota) && std::abs(iota / static_cast<double>(n) - s.center) < gamma;
    }
    s.member[v] = in;
    if (in) s.probability += pb[v];
  }
  return s;
}

TypicalSet ratio_set(const std::vector<double>& p_block, const std::vector<double>& q_block,
                     const std::vector<double>& qbar_block, std::size_t n, double a, double gamma) {
  if (p_block.size() != q_block.size() || q_block.size() != qbar_block.size()) {
    throw std::invalid_argument("block tables differ in size");
  }
  TypicalSet s;
  s.center = a;
  s.member.resize(p_block.size());
  for (std::size_t v = 0; v < p_block.size(); ++v) {
    bool in = false;
    if (q_block[v] > 0.0 && qbar_block[v] > 0.0) {
      const double r = (std::log(qbar_block[v]) - std::log(q_block[v])) / static_cast<double>(n);
      in = std::abs(r - a) < gamma;
    }
    s.member[v] = in;
    if (in) s.probability += p_block[v];
  }
  return s;
}

// ---------------------------------------------------------------------------

void TwoTerminalScheme::validate() const {
  const std::uint64_t zc = checked_power(nz, n);
  if (phi1.size() != checked_power(nx, n) * zc) throw std::invalid_argument("phi1 is not total on X^n x Z^n");
  if (phi2.size() != checked_power(ny, n) * zc) throw std::invalid_argument("phi2 is not total on Y^n x Z^n");
  for (auto u : phi1)
    if (u >= m1) throw std::invalid_argument("phi1 value outside M1");
  for (auto u : phi2)
    if (u >= m2) throw std::invalid_argument("phi2 value outside M2");
  if (accept.size() != m1 * m2) throw std::invalid_argument("decision table must be M1 x M2");
  for (double a : accept)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("decision entries must lie in [0, 1]");
}

void TripleLaw::validate() const {
  if (prob.size() != nx * ny * nz || prob.empty()) throw std::invalid_argument("triple law has wrong size");
  double s = 0.0;
  for (double v : prob) {
    if (v < 0.0) throw std::invalid_argument("negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > kStochasticTol) throw std::invalid_argument("triple law does not sum to one");
}

namespace {

std::vector<double> conditional_pair(const Dist& z, const Channel& given_z) {
  // Single-letter table over (a, z), row-major in a.
  std::vector<double> t(given_z.outputs() * z.size());
  for (std::size_t a = 0; a < given_z.outputs(); ++a)
    for (std::size_t c = 0; c < z.size(); ++c) t[a * z.size() + c] = given_z(a, c) * z[c];
  return t;
}

std::vector<double> channel_pair(const Channel& given_z) {
  std::vector<double> t(given_z.outputs() * given_z.inputs());
  for (std::size_t a = 0; a < given_z.outputs(); ++a)
    for (std::size_t c = 0; c < given_z.inputs(); ++c) t[a * given_z.inputs() + c] = given_z(a, c);
  return t;
}

void check_alternative(const TripleLaw& null, const ConditionalAlternative& alt) {
  if (alt.z.size() != null.nz || alt.x_given_z.inputs() != null.nz || alt.y_given_z.inputs() != null.nz ||
      alt.x_given_z.outputs() != null.nx || alt.y_given_z.outputs() != null.ny) {
    throw std::invalid_argument("alternative alphabets do not match the null law");
  }
}

}  // namespace

ErrorPair exact_errors(const TwoTerminalScheme& scheme, const TripleLaw& null, const ConditionalAlternative& alt) {
  scheme.validate();
  null.validate();
  check_alternative(null, alt);
  if (scheme.nx != null.nx || scheme.ny != null.ny || scheme.nz != null.nz) {
    throw std::invalid_argument("scheme alphabets do not match the null law");
  }
  const std::size_t n = scheme.n;
  const std::uint64_t xc = checked_power(null.nx, n), yc = checked_power(null.ny, n), zc = checked_power(null.nz, n);
  guard(xc * yc * zc, "two-terminal enumeration");
  const std::vector<double> pb = block_table(null.prob, {null.nx, null.ny, null.nz}, n);

  std::vector<double> rows(yc, 0.0);
  parallel_rows(yc, [&](std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t y = b; y < e; ++y) {
      double acc = 0.0;
      for (std::uint64_t x = 0; x < xc; ++x)
        for (std::uint64_t z = 0; z < zc; ++z) {
          const double v = pb[(x * yc + y) * zc + z];
          if (v == 0.0) continue;
          acc += v * scheme.accept[scheme.phi1[x * zc + z] * scheme.m2 + scheme.phi2[y * zc + z]];
        }
      rows[y] = acc;
    }
  });
  double accepted = 0.0;
  for (double r : rows) accepted += r;

  const std::vector<double> qz = block_table(alt.z.probs(), {null.nz}, n);
  const std::vector<double> qxz = block_table(channel_pair(alt.x_given_z), {null.nx, null.nz}, n);
  const std::vector<double> qyz = block_table(channel_pair(alt.y_given_z), {null.ny, null.nz}, n);
  double beta = 0.0;
  for (std::uint64_t z = 0; z < zc; ++z) {
    if (qz[z] == 0.0) continue;
    std::vector<double> a1(scheme.m1, 0.0), a2(scheme.m2, 0.0);
    for (std::uint64_t x = 0; x < xc; ++x) a1[scheme.phi1[x * zc + z]] += qxz[x * zc + z];
    for (std::uint64_t y = 0; y < yc; ++y) a2[scheme.phi2[y * zc + z]] += qyz[y * zc + z];
    double inner = 0.0;
    for (std::size_t u1 = 0; u1 < scheme.m1; ++u1) {
      if (a1[u1] == 0.0) continue;
      for (std::size_t u2 = 0; u2 < scheme.m2; ++u2) inner += a1[u1] * a2[u2] * scheme.accept[u1 * scheme.m2 + u2];
    }
    beta += qz[z] * inner;
  }
  return {clamp01(1.0 - accepted), clamp01(beta), false};
}

TransformSets transform_sets(const TripleLaw& null, const ConditionalAlternative& from,
                             const ConditionalAlternative& to, std::size_t n, double gamma) {
  null.validate();
  check_alternative(null, from);
  check_alternative(null, to);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  std::vector<double> pz(null.nz, 0.0), pxz(null.nx * null.nz, 0.0), pyz(null.ny * null.nz, 0.0);
  for (std::size_t x = 0; x < null.nx; ++x)
    for (std::size_t y = 0; y < null.ny; ++y)
      for (std::size_t z = 0; z < null.nz; ++z) {
        const double v = null(x, y, z);
        pz[z] += v;
        pxz[x * null.nz + z] += v;
        pyz[y * null.nz + z] += v;
      }
  const std::vector<double> qxz = conditional_pair(from.z, from.x_given_z);
  const std::vector<double> qyz = conditional_pair(from.z, from.y_given_z);
  const std::vector<double> bxz = conditional_pair(to.z, to.x_given_z);
  const std::vector<double> byz = conditional_pair(to.z, to.y_given_z);

  TransformSets s;
  s.gamma = gamma;
  s.a_z = finite_kl(pz, from.z.probs(), "Q_Z") - finite_kl(pz, to.z.probs(), "target Q_Z");
  s.a_xz = finite_kl(pxz, qxz, "Q_XZ") - finite_kl(pxz, bxz, "target Q_XZ");
  s.a_yz = finite_kl(pyz, qyz, "Q_YZ") - finite_kl(pyz, byz, "target Q_YZ");

  s.b0 = ratio_set(block_table(pz, {null.nz}, n), block_table(from.z.probs(), {null.nz}, n),
                   block_table(to.z.probs(), {null.nz}, n), n, s.a_z, gamma);
  s.b1 = ratio_set(block_table(pxz, {null.nx, null.nz}, n), block_table(qxz, {null.nx, null.nz}, n),
                   block_table(bxz, {null.nx, null.nz}, n), n, s.a_xz, gamma);
  s.b2 = ratio_set(block_table(pyz, {null.ny, null.nz}, n), block_table(qyz, {null.ny, null.nz}, n),
                   block_table(byz, {null.ny, null.nz}, n), n, s.a_yz, gamma);
  return s;
}

TwoTerminalScheme transform_scheme(const TwoTerminalScheme& scheme, const TransformSets& sets) {
  scheme.validate();
  const std::uint64_t zc = checked_power(scheme.nz, scheme.n);
  if (sets.b0.member.size() != zc || sets.b1.member.size() != scheme.phi1.size() ||
      sets.b2.member.size() != scheme.phi2.size()) {
    throw std::invalid_argument("supporting sets do not match the scheme");
  }
  TwoTerminalScheme out = scheme;
  out.m1 = scheme.m1 + 1;
  out.m2 = scheme.m2 + 1;
  const std::size_t e1 = scheme.m1, e2 = scheme.m2;
  for (std::size_t c = 0; c < out.phi1.size(); ++c)
    if (!sets.b0.member[c % zc] || !sets.b1.member[c]) out.phi1[c] = e1;
  for (std::size_t c = 0; c < out.phi2.size(); ++c)
    if (!sets.b0.member[c % zc] || !sets.b2.member[c]) out.phi2[c] = e2;
  out.accept.assign(out.m1 * out.m2, 0.0);
  for (std::size_t u1 = 0; u1 < scheme.m1; ++u1)
    for (std::size_t u2 = 0; u2 < scheme.m2; ++u2)
      out.accept[u1 * out.m2 + u2] = scheme.accept[u1 * scheme.m2 + u2];
  out.reserved1.push_back("e1");
  out.reserved2.push_back("e2");
  return out;
}

TransformCheck check_transform(const TwoTerminalScheme& scheme, const TripleLaw& null,
                               const ConditionalAlternative& from, const ConditionalAlternative& to, std::size_t n,
                               double gamma) {
  if (scheme.n != n) throw std::invalid_argument("block length mismatch");
  const TransformSets sets = transform_sets(null, from, to, n, gamma);
  const TwoTerminalScheme target = transform_scheme(scheme, sets);
  TransformCheck c;
  c.source = exact_errors(scheme, null, from);
  c.target = exact_errors(target, null, to);
  c.p_b0c = std::max(0.0, 1.0 - sets.b0.probability);
  c.p_b1c = std::max(0.0, 1.0 - sets.b1.probability);
  c.p_b2c = std::max(0.0, 1.0 - sets.b2.probability);
  const double dn = static_cast<double>(n);
  c.alpha_bound = c.source.alpha + c.p_b0c + c.p_b1c + c.p_b2c;
  c.beta_bound = std::exp(dn * (sets.a_xz + sets.a_yz - sets.a_z + 5.0 * gamma)) * c.source.beta;
  c.alpha_holds = leq(c.target.alpha, c.alpha_bound);
  c.beta_holds = leq(c.target.beta, c.beta_bound);
  if (null.nz == 1) {
    c.beta_bound_trivial_z = std::exp(dn * (sets.a_xz + sets.a_yz + 2.0 * gamma)) * c.source.beta;
    c.beta_trivial_z_holds = leq(c.target.beta, *c.beta_bound_trivial_z);
  }
  return c;
}

TwoTerminalScheme to_two_terminal(const TestingScheme& scheme) {
  scheme.validate();
  TwoTerminalScheme t;
  t.n = scheme.n;
  t.nx = scheme.nx;
  t.ny = scheme.ny;
  t.nz = 1;
  t.m1 = scheme.messages;
  const std::uint64_t yc = scheme.y_count();
  t.m2 = yc;
  t.phi1 = scheme.compress;
  t.phi2.resize(yc);
  for (std::uint64_t y = 0; y < yc; ++y) t.phi2[y] = y;
  t.accept.resize(t.m1 * t.m2);
  for (std::size_t u = 0; u < t.m1; ++u)
    for (std::uint64_t y = 0; y < yc; ++y) t.accept[u * t.m2 + y] = scheme.decide(y, u);
  t.reserved1 = scheme.reserved;
  return t;
}

TestingScheme to_one_sided(const TwoTerminalScheme& scheme) {
  scheme.validate();
  if (scheme.nz != 1) throw std::invalid_argument("one-sided form needs a trivial side alphabet");
  TestingScheme s;
  s.n = scheme.n;
  s.nx = scheme.nx;
  s.ny = scheme.ny;
  s.messages = scheme.m1;
  s.compress = scheme.phi1;
  const std::uint64_t yc = scheme.phi2.size();
  s.accept.resize(yc * s.messages);
  for (std::uint64_t y = 0; y < yc; ++y)
    for (std::size_t u = 0; u < s.messages; ++u) s.accept[y * s.messages + u] = scheme.accept[u * scheme.m2 + scheme.phi2[y]];
  s.reserved = scheme.reserved1;
  return s;
}

TripleLaw triple_from_joint(const Joint& j) {
  TripleLaw t;
  t.nx = j.x_size();
  t.ny = j.y_size();
  t.nz = 1;
  t.prob = j.flat();
  return t;
}

ConditionalAlternative product_alternative(const Dist& qx, const Dist& qy) {
  return {Dist::point_mass(1, 0), Channel::from_columns({qx}), Channel::from_columns({qy})};
}

// ---------------------------------------------------------------------------

MixSupResult mix_sup_probabilities(const std::vector<Dist>& components, const Dist& weights,
                                   const std::vector<SourceModel>& alternatives, std::size_t n, double gamma) {
  if (components.empty() || components.size() != weights.size()) throw std::invalid_argument("mixture size mismatch");
  if (alternatives.empty()) throw std::invalid_argument("no alternatives");
  const std::size_t a = components.front().size();
  const std::uint64_t count = checked_power(a, n);
  guard(count, "mixture supremum");

  std::vector<std::vector<double>> pb;
  for (const Dist& c : components) pb.push_back(block_table(c.probs(), {a}, n));
  std::vector<double> mix(count, 0.0);
  for (std::size_t l = 0; l < pb.size(); ++l)
    for (std::uint64_t v = 0; v < count; ++v) mix[v] += weights[l] * pb[l][v];

  // min over tau of the information density of the mixture, per sequence.
  std::vector<double> min_iota(count, kInf);
  for (const SourceModel& q : alternatives) {
    const std::vector<double> qb = q.block_probabilities(n);
    bool abs_cont = true;
    for (std::uint64_t v = 0; v < count; ++v)
      if (mix[v] > 0.0 && qb[v] == 0.0) abs_cont = false;
    for (std::uint64_t v = 0; v < count; ++v)
      min_iota[v] = std::min(min_iota[v], information_density(mix[v], qb[v], abs_cont));
  }

  MixSupResult r;
  for (std::size_t eta = 0; eta < components.size(); ++eta) {
    double d = kInf;
    for (const SourceModel& q : alternatives) d = std::min(d, divergence_rate(components[eta], q).to_double());
    const double threshold = static_cast<double>(n) * (d - gamma);
    double prob = 0.0;
    for (std::uint64_t v = 0; v < count; ++v)
      if (min_iota[v] < threshold) prob += pb[eta][v];
    r.d_star.push_back(d);
    r.probability.push_back(clamp01(prob));
  }
  return r;
}

MixSupResult mix_sup_check(const MixtureProblem& problem, std::size_t n, double gamma, Side side) {
  problem.validate();
  if (side == Side::y) {
    std::vector<Dist> comps;
    for (const Joint& j : problem.joints) comps.push_back(j.y_marginal());
    return mix_sup_probabilities(comps, problem.weights, problem.y_alternatives, n, gamma);
  }
  const ClassStructure st = classify(problem);
  std::vector<double> w;
  for (const auto& cls : st.classes) {
    double s = 0.0;
    for (std::size_t i : cls) s += problem.weights[i];
    w.push_back(s);
  }
  return mix_sup_probabilities(st.marginals, Dist::normalized(w), problem.x_alternatives, n, gamma);
}

MixSupSweep mix_sup_sweep(const std::vector<Dist>& components, const Dist& weights,
                          const std::vector<SourceModel>& alternatives, const std::vector<std::size_t>& n_list,
                          double gamma) {
  MixSupSweep s;
  s.n = n_list;
  for (std::size_t n : n_list) s.results.push_back(mix_sup_probabilities(components, weights, alternatives, n, gamma));
  s.nonincreasing.assign(components.size(), true);
  for (std::size_t k = 1; k < s.results.size(); ++k)
    for (std::size_t eta = 0; eta < components.size(); ++eta)
      if (s.results[k].probability[eta] > s.results[k - 1].probability[eta] + kSlack) s.nonincreasing[eta] = false;
  return s;
}

// ---------------------------------------------------------------------------

void WakCode::validate() const {
  if (m1 == 0 || m2 == 0) throw std::invalid_argument("message sets must be nonempty");
  if (phi1.size() != checked_power(nx, n)) throw std::invalid_argument("phi1 is not total on X^n");
  const std::uint64_t yc = checked_power(ny, n);
  if (phi2.size() != yc) throw std::invalid_argument("phi2 is not total on Y^n");
  for (auto u : phi1)
    if (u >= m1) throw std::invalid_argument("phi1 value outside M1");
  for (auto u : phi2)
    if (u >= m2) throw std::invalid_argument("phi2 value outside M2");
  if (decode.size() != m1 * m2) throw std::invalid_argument("decoder must be total on M1 x M2");
  for (auto y : decode)
    if (y != kErasure && y >= yc) throw std::invalid_argument("decoder output outside Y^n");
}

double wak_error(const WakCode& code, const BlockJoint& null) {
  code.validate();
  if (null.x_count != code.phi1.size() || null.y_count != code.phi2.size()) {
    throw std::invalid_argument("code does not match the block law");
  }
  double err = 0.0;
  for (std::uint64_t x = 0; x < null.x_count; ++x)
    for (std::uint64_t y = 0; y < null.y_count; ++y)
      if (code.decode[code.phi1[x] * code.m2 + code.phi2[y]] != y) err += null(x, y);
  return clamp01(err);
}

namespace {

std::vector<double> message_marginal(const MessageLaw& law) {
  std::vector<double> pu(law.messages, 0.0);
  for (std::uint64_t y = 0; y < law.y_count; ++y)
    for (std::size_t u = 0; u < law.messages; ++u) pu[u] += law.at(y, u);
  return pu;
}

MessageLaw uniform_alternative(const std::vector<std::size_t>& compress, std::size_t messages, const BlockJoint& null) {
  return induced_product(compress, messages, std::vector<double>(null.y_count, 1.0 / static_cast<double>(null.y_count)),
                         null.x_marginal());
}

}  // namespace

WakToHt wak_to_ht(const WakCode& code, const BlockJoint& null, double eta) {
  WakToHt r;
  r.wak_error = wak_error(code, null);
  const MessageLaw p = induced_null(code.phi1, code.m1, null);
  const std::vector<double> pu = message_marginal(p);
  const double t = std::exp(-eta) / static_cast<double>(code.m2);

  TestingScheme& s = r.scheme;
  s.n = code.n;
  s.nx = code.nx;
  s.ny = code.ny;
  s.messages = code.m1;
  s.compress = code.phi1;
  s.accept.assign(p.prob.size(), 0.0);
  for (std::uint64_t y = 0; y < p.y_count; ++y)
    for (std::size_t u = 0; u < code.m1; ++u)
      if (pu[u] > 0.0 && p.at(y, u) / pu[u] > t) s.accept[y * code.m1 + u] = 1.0;

  r.errors = errors_from_laws(p, uniform_alternative(code.phi1, code.m1, null), s.accept);
  r.alpha_bound = r.wak_error + std::exp(-eta);
  r.beta_bound = std::exp(eta) * static_cast<double>(code.m2) / static_cast<double>(null.y_count);
  r.alpha_holds = leq(r.errors.alpha, r.alpha_bound);
  r.beta_holds = leq(r.errors.beta, r.beta_bound);
  return r;
}

namespace {

struct Candidates {
  MessageLaw law;
  std::vector<std::vector<std::uint64_t>> of_message;  // sorted candidate ys per u
  std::vector<std::vector<std::size_t>> messages_of;   // us whose candidate set holds y
  std::vector<std::vector<bool>> member;               // [u][y]
};

Candidates candidates(const TestingScheme& scheme, const BlockJoint& null, double gamma) {
  Candidates c;
  c.law = induced_null(scheme.compress, scheme.messages, null);
  const std::vector<double> pu = message_marginal(c.law);
  const double t = gamma / static_cast<double>(null.y_count);
  c.of_message.resize(scheme.messages);
  c.messages_of.resize(null.y_count);
  c.member.assign(scheme.messages, std::vector<bool>(null.y_count, false));
  for (std::size_t u = 0; u < scheme.messages; ++u) {
    if (pu[u] == 0.0) continue;
    for (std::uint64_t y = 0; y < null.y_count; ++y)
      if (c.law.at(y, u) / pu[u] > t) {
        c.of_message[u].push_back(y);
        c.messages_of[y].push_back(u);
        c.member[u][y] = true;
      }
  }
  return c;
}

// Exact decoding error of a fixed binning of Y^n into m2 bins.
double binning_error(const Candidates& c, const std::vector<std::size_t>& bin, std::size_t m2) {
  double correct = 0.0;
  std::vector<std::size_t> occ(m2);
  for (std::size_t u = 0; u < c.of_message.size(); ++u) {
    std::fill(occ.begin(), occ.end(), 0);
    for (auto y : c.of_message[u]) ++occ[bin[y]];
    for (auto y : c.of_message[u])
      if (occ[bin[y]] == 1) correct += c.law.at(y, u);
  }
  return clamp01(1.0 - correct);
}

}  // namespace

HtToWak ht_to_wak(const TestingScheme& scheme, const BlockJoint& null, double gamma, std::size_t m2, Binning binning) {
  scheme.validate();
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (m2 == 0) throw std::invalid_argument("bin count must be positive");
  HtToWak r;
  const Candidates c = candidates(scheme, null, gamma);
  r.errors = errors_from_laws(c.law, uniform_alternative(scheme.compress, scheme.messages, null), scheme.accept);

  const double keep = 1.0 - 1.0 / static_cast<double>(m2);
  double correct = 0.0;
  for (std::size_t u = 0; u < scheme.messages; ++u) {
    const double survive = std::pow(keep, static_cast<double>(c.of_message[u].size()) - 1.0);
    for (auto y : c.of_message[u]) correct += c.law.at(y, u) * survive;
  }
  r.expected_error = clamp01(1.0 - correct);
  r.bound = r.errors.alpha + gamma * r.errors.beta +
            static_cast<double>(null.y_count) / (gamma * static_cast<double>(m2));
  r.bound_holds = leq(r.expected_error, r.bound);

  if (binning == Binning::greedy) {
    const std::uint64_t yc = null.y_count;
    constexpr std::size_t kFree = ~std::size_t{0};
    std::vector<std::size_t> bin(yc, kFree);
    // Conditional expectation of correct decoding given the bins fixed so far.
    std::vector<std::vector<std::size_t>> occ(scheme.messages, std::vector<std::size_t>(m2, 0));
    std::vector<std::size_t> open(scheme.messages);
    for (std::size_t u = 0; u < scheme.messages; ++u) open[u] = c.of_message[u].size();
    const double inv = 1.0 / static_cast<double>(m2);
    auto message_score = [&](std::size_t u) {
      double s = 0.0;
      for (auto y : c.of_message[u]) {
        const double p = c.law.at(y, u);
        if (p == 0.0) continue;
        if (bin[y] != kFree) {
          if (occ[u][bin[y]] == 1) s += p * std::pow(keep, static_cast<double>(open[u]));
        } else {
          std::size_t free_bins = 0;
          for (std::size_t b = 0; b < m2; ++b) free_bins += occ[u][b] == 0;
          s += p * static_cast<double>(free_bins) * inv * std::pow(keep, static_cast<double>(open[u]) - 1.0);
        }
      }
      return s;
    };
    for (std::uint64_t y = 0; y < yc; ++y) {
      std::size_t best = 0;
      double best_score = -1.0;
      for (std::size_t b = 0; b < m2; ++b) {
        bin[y] = b;
        double score = 0.0;
        for (std::size_t u : c.messages_of[y]) {
          ++occ[u][b];
          --open[u];
          score += message_score(u);
          --occ[u][b];
          ++open[u];
        }
        if (score > best_score + 1e-15) {
          best_score = score;
          best = b;
        }
      }
      bin[y] = best;
      for (std::size_t u : c.messages_of[y]) {
        ++occ[u][best];
        --open[u];
      }
    }

    WakCode code;
    code.n = scheme.n;
    code.nx = scheme.nx;
    code.ny = scheme.ny;
    code.m1 = scheme.messages;
    code.m2 = m2;
    code.phi1 = scheme.compress;
    code.phi2 = bin;
    code.decode.assign(code.m1 * m2, kErasure);
    for (std::size_t u = 0; u < code.m1; ++u) {
      std::vector<std::size_t> count(m2, 0);
      for (auto y : c.of_message[u]) ++count[bin[y]];
      for (auto y : c.of_message[u])
        if (count[bin[y]] == 1) code.decode[u * m2 + bin[y]] = y;
    }
    r.code_error = wak_error(code, null);
    r.code = std::move(code);
  }
  return r;
}

BinningSample sample_binnings(const TestingScheme& scheme, const BlockJoint& null, double gamma, std::size_t m2,
                              std::size_t samples, unsigned long long seed) {
  scheme.validate();
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  const Candidates c = candidates(scheme, null, gamma);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m2 - 1);
  std::vector<std::size_t> bin(null.y_count);
  double sum = 0.0, sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& b : bin) b = pick(rng);
    const double e = binning_error(c, bin, m2);
    sum += e;
    sq += e * e;
  }
  BinningSample out;
  out.samples = samples;
  out.mean = sum / static_cast<double>(samples);
  const double var = (sq - sum * out.mean) / static_cast<double>(samples - 1);
  out.stddev = std::sqrt(std::max(0.0, var));
  return out;
}

// ---------------------------------------------------------------------------

SlopeFit fit_exponent(const std::vector<std::size_t>& n, const std::vector<double>& beta) {
  if (n.size() != beta.size() || n.size() < 2) throw std::invalid_argument("need at least two (n, beta) pairs");
  std::vector<double> y;
  for (double b : beta) {
    if (!(b > 0.0)) throw AssumptionViolation("beta_n = 0 has no finite exponent");
    y.push_back(-std::log(b));
  }
  const double k = static_cast<double>(n.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sx += static_cast<double>(n[i]);
    sy += y[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = static_cast<double>(n[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("block lengths must not all coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n.size(); ++i) f.residuals.push_back(y[i] - (f.intercept + f.slope * static_cast<double>(n[i])));
  return f;
}

SlopeFit empirical_exponent(const std::function<TestingScheme(std::size_t)>& family, const Joint& null,
                            const std::pair<SourceModel, SourceModel>& alt, const std::vector<std::size_t>& n_list,
                            std::vector<ErrorPair>* errors) {
  std::vector<double> beta;
  for (std::size_t n : n_list) {
    const ErrorPair e = exact_errors(family(n), null, alt);
    beta.push_back(e.beta);
    if (errors) errors->push_back(e);
  }
  return fit_exponent(n_list, beta);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "n,alpha,beta,log_beta_over_n\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    const double lb = std::log(r.errors.beta) / static_cast<double>(r.n);
    std::snprintf(buf, sizeof buf, "%zu,%.15g,%.15g,%.15g\n", r.n, r.errors.alpha, r.errors.beta, lb);
    os << buf;
  }
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const TestingScheme& s) {
  j = nlohmann::json{{"n", s.n},         {"nx", s.nx},       {"ny", s.ny}, {"messages", s.messages},
                     {"compress", s.compress}, {"accept", s.accept}, {"reserved", s.reserved}};
}

void from_json(const nlohmann::json& j, TestingScheme& s) {
  static const char* keys[] = {"n", "nx", "ny", "messages", "compress", "accept", "reserved"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(keys), std::end(keys), [&](const char* k) { return it.key() == k; }) == std::end(keys)) {
      throw std::invalid_argument("unknown scheme key: " + it.key());
    }
  }
  s.n = j.at("n").get<std::size_t>();
  s.nx = j.at("nx").get<std::size_t>();
  s.ny = j.at("ny").get<std::size_t>();
  s.messages = j.at("messages").get<std::size_t>();
  s.compress = j.at("compress").get<std::vector<std::size_t>>();
  s.accept = j.at("accept").get<std::vector<double>>();
  s.reserved = j.value("reserved", std::vector<std::string>{});
  s.validate();
}

void to_json(nlohmann::json& j, const WakCode& c) {
  nlohmann::json dec = nlohmann::json::array();
  for (auto y : c.decode) dec.push_back(y == kErasure ? nlohmann::json(-1) : nlohmann::json(y));
  j = nlohmann::json{{"n", c.n},       {"nx", c.nx},     {"ny", c.ny},    {"m1", c.m1},
                     {"m2", c.m2},     {"phi1", c.phi1}, {"phi2", c.phi2}, {"decode", dec}};
}

void to_json(nlohmann::json& j, const TwoTerminalScheme& s) {
  j = nlohmann::json{{"n", s.n},           {"nx", s.nx},         {"ny", s.ny},     {"nz", s.nz},
                     {"m1", s.m1},         {"m2", s.m2},         {"phi1", s.phi1}, {"phi2", s.phi2},
                     {"accept", s.accept}, {"reserved1", s.reserved1}, {"reserved2", s.reserved2}};
}

}  // namespace mixht
