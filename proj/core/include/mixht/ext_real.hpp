#pragma once

#include <iosfwd>
#include <limits>

#include "mixht/errors.hpp"

namespace mixht {

// A real number or +infinity. Forms without a value throw IndeterminateForm
// instead of producing NaN.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v);  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal infinity() { return ExtReal(Tag{}); }

  constexpr bool is_finite() const { return !inf_; }
  constexpr bool is_infinite() const { return inf_; }

  // Finite value; throws std::domain_error on +infinity.
  double value() const;
  // Finite value or IEEE +inf.
  constexpr double to_double() const {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  ExtReal& operator+=(const ExtReal& o);
  ExtReal& operator-=(const ExtReal& o);

  friend ExtReal operator+(ExtReal a, const ExtReal& b) { return a += b; }
  friend ExtReal operator-(ExtReal a, const ExtReal& b) { return a -= b; }
  // Scaling by a nonnegative factor; 0 * inf is indeterminate.
  friend ExtReal operator*(double s, const ExtReal& a);
  friend ExtReal operator*(const ExtReal& a, double s) { return s * a; }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.inf_) return false;
    return b.inf_ || a.v_ < b.v_;
  }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return !(b < a); }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return !(a < b); }

 private:
  struct Tag {};
  constexpr explicit ExtReal(Tag) : inf_(true) {}

  double v_ = 0.0;
  bool inf_ = false;
};

ExtReal min(const ExtReal& a, const ExtReal& b);
std::ostream& operator<<(std::ostream& os, const ExtReal& x);

}  // namespace mixht
