#include "mixht_cli/cli.hpp"

namespace mixht::cli {

MixtureProblem binary_counterexample_problem() {
  const Dist px({0.643, 0.357});
  MixtureProblem p;
  p.joints = {Joint::from_channel(px, Channel::bsc(0.1)), Joint::from_channel(px, Channel::z_channel(0.8))};
  p.weights = Dist({0.5, 0.5});
  p.y_alternatives = {SourceModel::iid(Dist::uniform(2))};
  p.x_alternatives = {SourceModel::iid(px)};
  for (int k = 0; k <= 12; ++k) p.rc_grid.push_back(0.05 * k);
  return p;
}

}  // namespace mixht::cli
