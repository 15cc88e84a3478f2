#include "mixht/info_core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mixht {

namespace {

void check_stochastic(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty vector");
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kStochasticTol)
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(total) +
                                " differs from 1");
}

std::size_t common_width(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument(std::string(what) + ": empty matrix");
  for (const auto& r : rows)
    if (r.size() != rows.front().size())
      throw std::invalid_argument(std::string(what) + ": ragged matrix");
  return rows.front().size();
}

void same_alphabet(const Dist& p, const Dist& q) {
  if (p.size() != q.size()) throw std::invalid_argument("alphabet size mismatch");
}

}  // namespace

Dist::Dist(std::vector<double> probs) : p_(std::move(probs)) { check_stochastic(p_, "Dist"); }

Dist Dist::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Dist::normalized: bad weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("Dist::normalized: zero mass");
  for (double& w : weights) w /= total;
  Dist d;
  d.p_ = std::move(weights);
  return d;
}

Dist Dist::uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("Dist::uniform: empty alphabet");
  return Dist::normalized(std::vector<double>(size, 1.0));
}

Dist Dist::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw std::invalid_argument("Dist::point_mass: index out of range");
  std::vector<double> p(size, 0.0);
  p[at] = 1.0;
  return Dist(std::move(p));
}

Channel::Channel(const std::vector<std::vector<double>>& rows) {
  in_ = common_width(rows, "Channel");
  out_ = rows.size();
  m_.reserve(in_ * out_);
  for (const auto& r : rows) m_.insert(m_.end(), r.begin(), r.end());
  for (std::size_t x = 0; x < in_; ++x) {
    std::vector<double> col(out_);
    for (std::size_t y = 0; y < out_; ++y) col[y] = (*this)(y, x);
    check_stochastic(col, "Channel column");
  }
}

Channel Channel::from_columns(const std::vector<Dist>& columns) {
  if (columns.empty()) throw std::invalid_argument("Channel: no columns");
  std::vector<std::vector<double>> rows(columns.front().size(),
                                        std::vector<double>(columns.size()));
  for (std::size_t x = 0; x < columns.size(); ++x) {
    if (columns[x].size() != rows.size()) throw std::invalid_argument("Channel: ragged columns");
    for (std::size_t y = 0; y < rows.size(); ++y) rows[y][x] = columns[x][y];
  }
  return Channel(rows);
}

Channel Channel::identity(std::size_t size) {
  std::vector<std::vector<double>> rows(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < size; ++i) rows[i][i] = 1.0;
  return Channel(rows);
}

Channel Channel::bsc(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("bsc: delta outside [0,1]");
  return Channel({{1.0 - delta, delta}, {delta, 1.0 - delta}});
}

Channel Channel::z_channel(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("z_channel: eps outside [0,1]");
  return Channel({{eps, 0.0}, {1.0 - eps, 1.0}});
}

Dist Channel::column(std::size_t x) const {
  std::vector<double> col(out_);
  for (std::size_t y = 0; y < out_; ++y) col[y] = (*this)(y, x);
  return Dist::normalized(std::move(col));
}

Dist Channel::apply(const Dist& input) const {
  if (input.size() != in_) throw std::invalid_argument("Channel::apply: size mismatch");
  std::vector<double> out(out_, 0.0);
  for (std::size_t y = 0; y < out_; ++y)
    for (std::size_t x = 0; x < in_; ++x) out[y] += (*this)(y, x) * input[x];
  return Dist::normalized(std::move(out));
}

std::vector<std::vector<double>> Channel::rows() const {
  std::vector<std::vector<double>> r(out_, std::vector<double>(in_));
  for (std::size_t y = 0; y < out_; ++y)
    for (std::size_t x = 0; x < in_; ++x) r[y][x] = (*this)(y, x);
  return r;
}

Joint::Joint(const std::vector<std::vector<double>>& rows) {
  ny_ = common_width(rows, "Joint");
  nx_ = rows.size();
  for (const auto& r : rows) m_.insert(m_.end(), r.begin(), r.end());
  check_stochastic(m_, "Joint");
}

Joint Joint::from_channel(const Dist& px, const Channel& y_given_x) {
  if (px.size() != y_given_x.inputs()) throw std::invalid_argument("Joint: size mismatch");
  std::vector<std::vector<double>> rows(px.size(), std::vector<double>(y_given_x.outputs()));
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t y = 0; y < y_given_x.outputs(); ++y) rows[x][y] = px[x] * y_given_x(y, x);
  return Joint(rows);
}

Dist Joint::x_marginal() const {
  std::vector<double> p(nx_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) p[x] += (*this)(x, y);
  return Dist::normalized(std::move(p));
}

Dist Joint::y_marginal() const {
  std::vector<double> p(ny_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) p[y] += (*this)(x, y);
  return Dist::normalized(std::move(p));
}

Channel Joint::y_given_x() const {
  std::vector<Dist> cols;
  for (std::size_t x = 0; x < nx_; ++x) {
    std::vector<double> c(ny_);
    double mass = 0.0;
    for (std::size_t y = 0; y < ny_; ++y) mass += c[y] = (*this)(x, y);
    cols.push_back(mass > 0.0 ? Dist::normalized(std::move(c)) : Dist::uniform(ny_));
  }
  return Channel::from_columns(cols);
}

std::vector<std::vector<double>> Joint::rows() const {
  std::vector<std::vector<double>> r(nx_, std::vector<double>(ny_));
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) r[x][y] = (*this)(x, y);
  return r;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double entropy(const Dist& p) { return entropy(p.probs()); }

ExtReal kl_divergence(const Dist& p, const Dist& q) {
  same_alphabet(p, q);
  double d = 0.0;
  for (std::size_t u = 0; u < p.size(); ++u) {
    if (p[u] == 0.0) continue;
    if (q[u] == 0.0) return ExtReal::infinity();
    d += p[u] * std::log(p[u] / q[u]);
  }
  return ExtReal(std::max(d, 0.0));
}

double mutual_information(const Joint& j) {
  const Dist px = j.x_marginal(), py = j.y_marginal();
  double i = 0.0;
  for (std::size_t x = 0; x < j.x_size(); ++x)
    for (std::size_t y = 0; y < j.y_size(); ++y) {
      const double v = j(x, y);
      if (v > 0.0) i += v * std::log(v / (px[x] * py[y]));
    }
  return std::max(i, 0.0);
}

double total_variation(const Dist& p, const Dist& q) {
  same_alphabet(p, q);
  double s = 0.0;
  for (std::size_t u = 0; u < p.size(); ++u) s += std::abs(p[u] - q[u]);
  return 0.5 * s;
}

double information_density(double p_u, double q_u, bool p_abs_cont_q) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (q_u == 0.0) return p_abs_cont_q ? 0.0 : inf;
  if (p_u == 0.0) return -inf;
  return std::log(p_u / q_u);
}

void to_json(nlohmann::json& j, const Dist& d) { j = d.probs(); }
void from_json(const nlohmann::json& j, Dist& d) { d = Dist(j.get<std::vector<double>>()); }
void to_json(nlohmann::json& j, const Channel& c) { j = c.rows(); }
void from_json(const nlohmann::json& j, Channel& c) {
  c = Channel(j.get<std::vector<std::vector<double>>>());
}
void to_json(nlohmann::json& j, const Joint& p) { j = p.rows(); }
void from_json(const nlohmann::json& j, Joint& p) {
  p = Joint(j.get<std::vector<std::vector<double>>>());
}

}  // namespace mixht
