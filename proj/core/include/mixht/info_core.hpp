#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "mixht/ext_real.hpp"

namespace mixht {

inline constexpr double kStochasticTol = 1e-12;

// Probability vector over {0, ..., size-1}.
class Dist {
 public:
  Dist() = default;
  // Validates nonnegativity and unit mass within kStochasticTol.
  explicit Dist(std::vector<double> probs);

  // Divides by the total mass. The only path that rescales input.
  static Dist normalized(std::vector<double> weights);
  static Dist uniform(std::size_t size);
  static Dist point_mass(std::size_t size, std::size_t at);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

 private:
  std::vector<double> p_;
};

// Stochastic matrix stored out x in; column j is the output law given input j.
class Channel {
 public:
  Channel() = default;
  // Row-major out x in table; every column must be a Dist.
  explicit Channel(const std::vector<std::vector<double>>& rows);
  static Channel from_columns(const std::vector<Dist>& columns);
  static Channel identity(std::size_t size);
  static Channel bsc(double delta);
  // Column 0 is (eps, 1-eps), column 1 is (0, 1).
  static Channel z_channel(double eps);

  std::size_t inputs() const { return in_; }
  std::size_t outputs() const { return out_; }
  double operator()(std::size_t y, std::size_t x) const { return m_[y * in_ + x]; }
  Dist column(std::size_t x) const;
  Dist apply(const Dist& input) const;
  std::vector<std::vector<double>> rows() const;

 private:
  std::size_t out_ = 0, in_ = 0;
  std::vector<double> m_;
};

// Joint law on X x Y stored with rows indexed by x.
class Joint {
 public:
  Joint() = default;
  explicit Joint(const std::vector<std::vector<double>>& rows);
  // P(x, y) = px(x) * ch(y | x).
  static Joint from_channel(const Dist& px, const Channel& y_given_x);

  std::size_t x_size() const { return nx_; }
  std::size_t y_size() const { return ny_; }
  double operator()(std::size_t x, std::size_t y) const { return m_[x * ny_ + y]; }
  Dist x_marginal() const;
  Dist y_marginal() const;
  // Conditional of Y given X; rows with zero mass get the uniform column.
  Channel y_given_x() const;
  std::vector<std::vector<double>> rows() const;
  const std::vector<double>& flat() const { return m_; }

 private:
  std::size_t nx_ = 0, ny_ = 0;
  std::vector<double> m_;
};

// Binary entropy in nats with h(0) = h(1) = 0.
double binary_entropy(double p);
double entropy(const Dist& p);
double entropy(const std::vector<double>& p);
ExtReal kl_divergence(const Dist& p, const Dist& q);
double mutual_information(const Joint& j);
double total_variation(const Dist& p, const Dist& q);

// Information density log(p(u)/q(u)) with the conventions for zeros:
// 0 when q(u) = 0 and p << q, +inf when q(u) = 0 and p is not << q,
// -inf when p(u) = 0 < q(u). The result is an IEEE double.
double information_density(double p_u, double q_u, bool p_abs_cont_q);

void to_json(nlohmann::json& j, const Dist& d);
void from_json(const nlohmann::json& j, Dist& d);
void to_json(nlohmann::json& j, const Channel& c);
void from_json(const nlohmann::json& j, Channel& c);
void to_json(nlohmann::json& j, const Joint& p);
void from_json(const nlohmann::json& j, Joint& p);

}  // namespace mixht
