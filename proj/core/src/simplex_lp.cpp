#include "mixht/simplex_lp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixht::lp {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  // Row `rows_` holds reduced costs for a maximisation (negated objective).
  double& cost(std::size_t c) { return at(rows_, c); }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

// Runs simplex iterations on columns [0, active_cols). Returns status.
Status iterate(Tableau& t, std::vector<std::size_t>& basis, std::size_t active_cols,
               const Options& opt, std::size_t& pivots) {
  std::size_t degenerate_run = 0;
  while (true) {
    if (pivots >= opt.max_pivots) return Status::iteration_limit;
    const bool bland = degenerate_run > 50;
    std::size_t enter = active_cols;
    double best = opt.tolerance;
    for (std::size_t c = 0; c < active_cols; ++c) {
      const double rc = -t.cost(c);
      if (rc > best) {
        enter = c;
        if (bland) break;
        best = rc;
      }
    }
    if (enter == active_cols) return Status::optimal;

    std::size_t leave = t.rows();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= opt.tolerance) continue;
      const double q = t.rhs(r) / a;
      if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave < t.rows() && basis[r] < basis[leave])) {
        ratio = q;
        leave = r;
      }
    }
    if (leave == t.rows()) return Status::unbounded;
    degenerate_run = ratio <= opt.tolerance ? degenerate_run + 1 : 0;
    t.pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

Solution solve(const Problem& problem, const Options& opt) {
  const std::size_t n = problem.num_vars;
  if (problem.objective.size() != n) throw std::invalid_argument("lp: objective size mismatch");
  for (const auto& c : problem.constraints)
    if (c.coef.size() != n) throw std::invalid_argument("lp: constraint size mismatch");

  // Normalise to nonnegative right-hand sides.
  std::vector<Constraint> rows = problem.constraints;
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      for (double& v : r.coef) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == Sense::le) r.sense = Sense::ge;
      else if (r.sense == Sense::ge) r.sense = Sense::le;
    }
  }
  const std::size_t m = rows.size();
  std::size_t slacks = 0, arts = 0;
  for (const auto& r : rows) {
    if (r.sense != Sense::eq) ++slacks;
    if (r.sense != Sense::le) ++arts;
  }
  const std::size_t art_begin = n + slacks;
  const std::size_t total = art_begin + arts;

  Tableau t(m, total);
  std::vector<std::size_t> basis(m);
  std::size_t s = n, a = art_begin;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t.at(r, c) = rows[r].coef[c];
    t.rhs(r) = rows[r].rhs;
    if (rows[r].sense == Sense::le) {
      t.at(r, s) = 1.0;
      basis[r] = s++;
    } else {
      if (rows[r].sense == Sense::ge) t.at(r, s++) = -1.0;
      t.at(r, a) = 1.0;
      basis[r] = a++;
    }
  }

  Solution sol;
  // Phase 1: maximise -sum(artificials).
  if (arts > 0) {
    for (std::size_t c = art_begin; c < total; ++c) t.cost(c) = 1.0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis[r] >= art_begin)
        for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= t.at(r, c);
    const Status st = iterate(t, basis, total, opt, sol.pivots);
    if (st == Status::iteration_limit) {
      sol.status = st;
      return sol;
    }
    double scale = 1.0;
    for (const auto& r : rows) scale = std::max(scale, std::abs(r.rhs));
    if (-t.at(m, total) > 1e-9 * scale) {
      sol.status = Status::infeasible;
      return sol;
    }
    // Drive remaining artificials out of the basis.
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < art_begin) continue;
      std::size_t pc = art_begin;
      double best = 1e-9;
      for (std::size_t c = 0; c < art_begin; ++c)
        if (std::abs(t.at(r, c)) > best) {
          best = std::abs(t.at(r, c));
          pc = c;
        }
      if (pc < art_begin) {
        t.pivot(r, pc);
        basis[r] = pc;
      }
    }
    for (std::size_t c = art_begin; c < total; ++c)
      for (std::size_t r = 0; r <= m; ++r) t.at(r, c) = 0.0;
  }

  // Phase 2 reduced costs.
  for (std::size_t c = 0; c <= total; ++c) t.at(m, c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) t.cost(c) = -problem.objective[c];
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = basis[r];
    if (b >= n) continue;
    const double f = t.cost(b);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= f * t.at(r, c);
  }
  const Status st = iterate(t, basis, art_begin, opt, sol.pivots);
  sol.status = st;
  if (st != Status::optimal) return sol;

  // Recover the basic solution from the original data. Redundant rows whose
  // artificial stayed basic are skipped.
  std::vector<std::size_t> live_rows, live_cols;
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < art_begin) {
      live_rows.push_back(r);
      live_cols.push_back(basis[r]);
    }
  auto column_entry = [&](std::size_t r, std::size_t c) -> double {
    if (c < n) return rows[r].coef[c];
    std::size_t k = n;
    for (std::size_t rr = 0; rr < m; ++rr) {
      if (rows[rr].sense == Sense::eq) continue;
      if (k == c) {
        if (rr != r) return 0.0;
        return rows[rr].sense == Sense::le ? 1.0 : -1.0;
      }
      ++k;
    }
    return 0.0;
  };
  const Eigen::Index k = static_cast<Eigen::Index>(live_rows.size());
  Eigen::MatrixXd bmat(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs(i) = rows[live_rows[i]].rhs;
    for (Eigen::Index j = 0; j < k; ++j) bmat(i, j) = column_entry(live_rows[i], live_cols[j]);
  }
  Eigen::VectorXd xb = k > 0 ? Eigen::VectorXd(bmat.fullPivLu().solve(rhs)) : Eigen::VectorXd();

  sol.x.assign(n, 0.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = xb(j);
    const double tab = t.rhs(live_rows[j]);
    // Keep the tableau value if the LU answer is not a better fit.
    const double use = std::isfinite(v) && std::abs(v - tab) < 1e-6 ? v : tab;
    if (live_cols[j] < n) sol.x[live_cols[j]] = std::max(use, 0.0);
  }
  sol.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) sol.objective += problem.objective[c] * sol.x[c];
  return sol;
}

}  // namespace mixht::lp
