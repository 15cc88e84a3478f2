#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "mixht/ext_real.hpp"
#include "mixht/info_core.hpp"

namespace mixht {

// Alternative-hypothesis process on a finite alphabet: iid, or a stationary
// Markov chain of finite order k. Contexts (x_1, ..., x_k) are indexed in base
// |A| with x_1 as the most significant digit.
class SourceModel {
 public:
  enum class Kind { iid, markov };

  SourceModel() = default;
  static SourceModel iid(Dist marginal);
  static SourceModel markov(std::size_t order, std::vector<Dist> transition, Dist initial);

  Kind kind() const { return kind_; }
  std::size_t order() const { return order_; }
  std::size_t alphabet_size() const { return transition_.front().size(); }
  std::size_t context_count() const { return transition_.size(); }
  const Dist& transition(std::size_t context) const { return transition_[context]; }
  const Dist& initial() const { return initial_; }

  // Probability of a sequence of any length (lengths below the order use the
  // marginal of the initial law).
  double sequence_probability(const std::vector<std::size_t>& seq) const;
  // Same for the sequence encoded in base |A| with the first symbol most
  // significant.
  double sequence_probability(std::uint64_t code, std::size_t n) const;
  // Probabilities of all |A|^n sequences, indexed by code.
  std::vector<double> block_probabilities(std::size_t n) const;

 private:
  Kind kind_ = Kind::iid;
  std::size_t order_ = 0;
  std::vector<Dist> transition_;
  Dist initial_;
};

struct MatchResult {
  std::size_t best_index = 0;
  ExtReal rate;
  // Every candidate is at infinite rate.
  bool assumption_violated = false;
};

ExtReal divergence_rate(const Dist& p, const SourceModel& q);
MatchResult best_match(const Dist& p, const std::vector<SourceModel>& candidates);
inline double pair_rate(double d_i, double d_s) { return d_i + d_s; }

// Digits of `code` in base `base`, most significant first, padded to n.
std::vector<std::size_t> decode_sequence(std::uint64_t code, std::size_t base, std::size_t n);

void to_json(nlohmann::json& j, const SourceModel& m);
void from_json(const nlohmann::json& j, SourceModel& m);

}  // namespace mixht
