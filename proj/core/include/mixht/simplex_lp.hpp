#pragma once

#include <cstddef>
#include <vector>

namespace mixht::lp {

enum class Sense { le, ge, eq };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Constraint {
  std::vector<double> coef;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

// maximize objective . x subject to the constraints and x >= 0.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
};

struct Solution {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

struct Options {
  double tolerance = 1e-11;
  std::size_t max_pivots = 200000;
};

// Dense two-phase tableau simplex. Entering variable by largest reduced cost,
// switching to Bland's rule after a run of degenerate pivots. The final basic
// solution is recomputed from the basis matrix by LU to shed tableau drift.
Solution solve(const Problem& problem, const Options& options = {});

const char* to_string(Status s);

}  // namespace mixht::lp
