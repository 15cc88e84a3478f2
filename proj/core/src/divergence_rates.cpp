#include "mixht/divergence_rates.hpp"

#include <cmath>
#include <stdexcept>

namespace mixht {

namespace {

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

}  // namespace

std::vector<std::size_t> decode_sequence(std::uint64_t code, std::size_t base, std::size_t n) {
  std::vector<std::size_t> seq(n);
  for (std::size_t t = n; t-- > 0;) {
    seq[t] = static_cast<std::size_t>(code % base);
    code /= base;
  }
  return seq;
}

SourceModel SourceModel::iid(Dist marginal) {
  SourceModel m;
  m.kind_ = Kind::iid;
  m.order_ = 0;
  m.transition_ = {std::move(marginal)};
  m.initial_ = Dist({1.0});
  return m;
}

SourceModel SourceModel::markov(std::size_t order, std::vector<Dist> transition, Dist initial) {
  if (transition.empty()) throw std::invalid_argument("SourceModel: empty transition table");
  const std::size_t a = transition.front().size();
  for (const auto& row : transition)
    if (row.size() != a) throw std::invalid_argument("SourceModel: ragged transition table");
  if (transition.size() != ipow(a, order))
    throw std::invalid_argument("SourceModel: transition needs |A|^order rows");
  if (initial.size() != ipow(a, order))
    throw std::invalid_argument("SourceModel: initial law needs |A|^order entries");
  SourceModel m;
  m.kind_ = order == 0 ? Kind::iid : Kind::markov;
  m.order_ = order;
  m.transition_ = std::move(transition);
  m.initial_ = std::move(initial);
  return m;
}

double SourceModel::sequence_probability(const std::vector<std::size_t>& seq) const {
  const std::size_t a = alphabet_size();
  for (std::size_t s : seq)
    if (s >= a) throw std::invalid_argument("sequence symbol outside alphabet");
  const std::size_t n = seq.size();
  if (n < order_) {
    // Marginalise the initial law over the unseen tail of the context.
    std::size_t prefix = 0;
    for (std::size_t s : seq) prefix = prefix * a + s;
    const std::size_t tail = ipow(a, order_ - n);
    double total = 0.0;
    for (std::size_t r = 0; r < tail; ++r) total += initial_[prefix * tail + r];
    return total;
  }
  std::size_t ctx = 0;
  for (std::size_t t = 0; t < order_; ++t) ctx = ctx * a + seq[t];
  double prob = initial_[ctx];
  const std::size_t modulus = ipow(a, order_);
  for (std::size_t t = order_; t < n && prob > 0.0; ++t) {
    prob *= transition_[ctx][seq[t]];
    if (order_ > 0) ctx = (ctx * a + seq[t]) % modulus;
  }
  return prob;
}

double SourceModel::sequence_probability(std::uint64_t code, std::size_t n) const {
  return sequence_probability(decode_sequence(code, alphabet_size(), n));
}

std::vector<double> SourceModel::block_probabilities(std::size_t n) const {
  const std::size_t total = ipow(alphabet_size(), n);
  std::vector<double> out(total);
  for (std::size_t c = 0; c < total; ++c) out[c] = sequence_probability(c, n);
  return out;
}

ExtReal divergence_rate(const Dist& p, const SourceModel& q) {
  if (p.size() != q.alphabet_size()) throw std::invalid_argument("divergence_rate: alphabet mismatch");
  if (q.order() == 0) return kl_divergence(p, q.transition(0));

  const std::size_t a = p.size();
  double cross = 0.0;
  for (std::size_t ctx = 0; ctx < q.context_count(); ++ctx) {
    double w = 1.0;
    for (std::size_t s : decode_sequence(ctx, a, q.order())) w *= p[s];
    if (w == 0.0) continue;
    if (q.initial()[ctx] == 0.0) return ExtReal::infinity();
    const Dist& row = q.transition(ctx);
    for (std::size_t x = 0; x < a; ++x) {
      if (p[x] == 0.0) continue;
      if (row[x] == 0.0) return ExtReal::infinity();
      cross -= w * p[x] * std::log(row[x]);
    }
  }
  return ExtReal(std::max(cross - entropy(p), 0.0));
}

MatchResult best_match(const Dist& p, const std::vector<SourceModel>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("best_match: no candidates");
  MatchResult best{0, divergence_rate(p, candidates[0]), false};
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    const ExtReal r = divergence_rate(p, candidates[j]);
    if (r < best.rate) best = {j, r, false};
  }
  best.assumption_violated = best.rate.is_infinite();
  return best;
}

void to_json(nlohmann::json& j, const SourceModel& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < m.context_count(); ++c) rows.push_back(m.transition(c).probs());
  j = nlohmann::json{{"kind", m.kind() == SourceModel::Kind::iid ? "iid" : "markov"},
                     {"order", m.order()},
                     {"transition", rows},
                     {"initial", m.initial().probs()}};
}

void from_json(const nlohmann::json& j, SourceModel& m) {
  for (const auto& [key, _] : j.items())
    if (key != "kind" && key != "order" && key != "transition" && key != "initial" && key != "dist")
      throw std::invalid_argument("SourceModel: unknown key '" + key + "'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "iid") {
    if (j.contains("dist")) {
      m = SourceModel::iid(j.at("dist").get<Dist>());
    } else {
      const auto rows = j.at("transition").get<std::vector<Dist>>();
      if (rows.size() != 1) throw std::invalid_argument("SourceModel: iid needs one row");
      m = SourceModel::iid(rows.front());
    }
    return;
  }
  if (kind != "markov") throw std::invalid_argument("SourceModel: kind must be iid or markov");
  m = SourceModel::markov(j.at("order").get<std::size_t>(), j.at("transition").get<std::vector<Dist>>(),
                          j.at("initial").get<Dist>());
}

}  // namespace mixht
