#include "mixht/ext_real.hpp"

#include <cmath>
#include <ostream>

namespace mixht {

ExtReal::ExtReal(double v) {
  if (std::isnan(v)) throw IndeterminateForm("ExtReal: NaN is not an extended real");
  if (v == -std::numeric_limits<double>::infinity())
    throw IndeterminateForm("ExtReal: -inf is not representable");
  if (std::isinf(v)) {
    inf_ = true;
  } else {
    v_ = v;
  }
}

double ExtReal::value() const {
  if (inf_) throw std::domain_error("ExtReal::value on +inf");
  return v_;
}

ExtReal& ExtReal::operator+=(const ExtReal& o) {
  if (o.inf_) {
    inf_ = true;
  } else if (!inf_) {
    v_ += o.v_;
  }
  return *this;
}

ExtReal& ExtReal::operator-=(const ExtReal& o) {
  if (o.inf_) throw IndeterminateForm(inf_ ? "inf - inf" : "finite - inf");
  if (!inf_) v_ -= o.v_;
  return *this;
}

ExtReal operator*(double s, const ExtReal& a) {
  if (std::isnan(s) || s < 0.0) throw IndeterminateForm("ExtReal scale must be >= 0");
  if (a.inf_) {
    if (s == 0.0) throw IndeterminateForm("0 * inf");
    return ExtReal::infinity();
  }
  return ExtReal(s * a.v_);
}

ExtReal min(const ExtReal& a, const ExtReal& b) { return b < a ? b : a; }

std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
  if (x.is_infinite()) return os << "inf";
  return os << x.value();
}

}  // namespace mixht
