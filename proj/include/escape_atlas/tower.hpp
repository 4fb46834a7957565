#pragma once

// Extended-exponent ("level-index") real arithmetic.
//
// A TowerReal stores a non-negative magnitude as exp applied `height` times
// to a mantissa in [0,1).  Iterated exponentials like exp(exp(exp(r)))
// stay comparable long after ordinary floats overflow.  Ordering is
// lexicographic on (height, mantissa) and agrees with real ordering for
// every representable value because normalization makes representations
// unique: value ranges for consecutive heights tile [0, inf) without
// overlap.
//
// Conversion chains run in __float128 so that mantissa quantization is the
// only appreciable error source; with an 80-bit long double mantissa a
// from_real/to_real round trip stays within a couple of ulps across the
// whole double range.

#include <cmath>
#include <complex>
#include <compare>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

#include <quadmath.h>

namespace escape_atlas {

// Thrown when subtracting near-equal magnitudes whose difference is below
// the representation's resolution.  Meaningless at tower scale; consumers
// compare rather than subtract.
class tower_cancellation_error : public std::runtime_error {
 public:
  tower_cancellation_error() : std::runtime_error("indeterminate cancellation of near-equal towers") {}
};

namespace detail {
// Largest argument for which expq stays inside long double range.
inline constexpr long double kMaxExpArg = 11356.0L;
}  // namespace detail

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;
inline constexpr double kPi = 3.141592653589793;
inline constexpr double kHalfPi = 1.5707963267948966;

class TowerReal {
 public:
  static constexpr int kMaxHeight = 64;

  // Zero is (height 0, mantissa 0).
  constexpr TowerReal() = default;

  static TowerReal from_real(long double x) {
    if (std::isnan(x) || std::isinf(x) || x < 0.0L)
      throw std::domain_error("tower_from_real: input must be finite and non-negative");
    if (x == 0.0L) return {};
    int h = 0;
    __float128 q = x;
    while (q >= (__float128)1.0) {
      q = logq(q);
      ++h;
    }
    long double m = static_cast<long double>(q);
    if (m >= 1.0L) m = nextafterl(1.0L, 0.0L);
    if (m < 0.0L) m = 0.0L;
    return TowerReal(h, m, false);
  }

  // Value e^L for a machine-range L (L may be negative; deep negatives
  // underflow to zero, which is the representation floor).
  static TowerReal from_log(long double L) {
    if (std::isnan(L)) throw std::domain_error("tower from_log: NaN");
    if (L < 0.0L) return from_real(expl(L));
    TowerReal t = from_real(L);
    return t.exp_shift();
  }

  // Re-normalizes an arbitrary (height, mantissa) pair.
  static TowerReal normalized(int height, long double mantissa) {
    if (std::isnan(mantissa) || std::isinf(mantissa))
      throw std::domain_error("tower normalized: non-finite mantissa");
    if (height < 0) throw std::domain_error("tower normalized: negative height");
    while (mantissa < 0.0L) {
      if (height == 0) throw std::domain_error("tower normalized: negative value");
      mantissa = expl(mantissa);  // exp^h(m) = exp^(h-1)(e^m), e^m in (0,1)
      --height;
    }
    TowerReal tail = from_real(mantissa);
    int h = height + tail.height_;
    if (h > kMaxHeight) return TowerReal(kMaxHeight, tail.mantissa_, true);
    return TowerReal(h, tail.mantissa_, false);
  }

  int height() const { return height_; }
  long double mantissa() const { return mantissa_; }
  bool saturated() const { return saturated_; }
  bool is_zero() const { return height_ == 0 && mantissa_ == 0.0L && !saturated_; }

  // nullopt when the value exceeds long double range (or is saturated).
  std::optional<long double> to_real() const {
    if (saturated_) return std::nullopt;
    __float128 q = mantissa_;
    for (int i = 0; i < height_; ++i) {
      if (q > (__float128)detail::kMaxExpArg) return std::nullopt;
      q = expq(q);
    }
    return static_cast<long double>(q);
  }

  std::optional<double> to_double() const {
    auto v = to_real();
    if (!v || *v > 1.7976931348623157e308L) return std::nullopt;
    return static_cast<double>(*v);
  }

  // exp is a pure height shift: exp(exp^h(m)) = exp^(h+1)(m).
  TowerReal exp_shift() const {
    if (saturated_ || height_ >= kMaxHeight) return TowerReal(kMaxHeight, mantissa_, true);
    return TowerReal(height_ + 1, mantissa_, false);
  }

  // ln undoes the shift exactly; defined for values >= 1 (height >= 1).
  TowerReal ln_shift() const {
    if (saturated_) return *this;
    if (height_ == 0) throw std::domain_error("tower_ln: value below 1");
    return TowerReal(height_ - 1, mantissa_, false);
  }

  friend std::strong_ordering operator<=>(const TowerReal& a, const TowerReal& b) {
    // Saturated values collapse to a single top element.
    if (a.saturated_ != b.saturated_)
      return a.saturated_ ? std::strong_ordering::greater : std::strong_ordering::less;
    if (a.saturated_ && b.saturated_) return std::strong_ordering::equal;
    if (a.height_ != b.height_) return a.height_ <=> b.height_;
    if (a.mantissa_ < b.mantissa_) return std::strong_ordering::less;
    if (a.mantissa_ > b.mantissa_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const TowerReal& a, const TowerReal& b) { return (a <=> b) == std::strong_ordering::equal; }

  // "T(h;m)" with the mantissa printed to max_digits10 so parsing recovers
  // the exact stored value.
  std::string str() const {
    char buf[64];
    if (saturated_) {
      std::snprintf(buf, sizeof buf, "T(sat;%d;%.21Lg)", height_, mantissa_);
    } else {
      std::snprintf(buf, sizeof buf, "T(%d;%.21Lg)", height_, mantissa_);
    }
    return buf;
  }

  static TowerReal parse(const std::string& s) {
    int h = 0;
    long double m = 0.0L;
    char tail = 0;
    if (std::sscanf(s.c_str(), "T(sat;%d;%Lg%c", &h, &m, &tail) == 3 && tail == ')')
      return TowerReal(h, m, true);
    if (std::sscanf(s.c_str(), "T(%d;%Lg%c", &h, &m, &tail) == 3 && tail == ')') {
      if (h < 0 || m < 0.0L || m >= 1.0L) throw std::domain_error("tower parse: not normalized: " + s);
      return TowerReal(h, m, false);
    }
    throw std::domain_error("tower parse: bad format: " + s);
  }

  friend TowerReal tower_add(const TowerReal& a, const TowerReal& b);
  friend TowerReal tower_sub(const TowerReal& a, const TowerReal& b);
  friend TowerReal tower_mul(const TowerReal& a, const TowerReal& b);

 private:
  TowerReal(int h, long double m, bool sat) : height_(h), mantissa_(m), saturated_(sat) {}

  int height_ = 0;
  long double mantissa_ = 0.0L;
  bool saturated_ = false;
};

inline TowerReal tower_from_real(long double x) { return TowerReal::from_real(x); }
inline std::strong_ordering tower_compare(const TowerReal& a, const TowerReal& b) { return a <=> b; }
inline TowerReal tower_exp(const TowerReal& a) { return a.exp_shift(); }
inline TowerReal tower_ln(const TowerReal& a) { return a.ln_shift(); }

// Addition is exact (as float) whenever both operands convert to machine
// range.  Beyond that the sum is formed on the logs, and the smaller term
// is dropped once its contribution falls below the representation's
// resolution at the larger term's scale.  Deterministic by construction.
inline TowerReal tower_add(const TowerReal& a, const TowerReal& b) {
  if (a.saturated_ || b.saturated_) return a.saturated_ ? a : b;
  const TowerReal& hi = (a < b) ? b : a;
  const TowerReal& lo = (a < b) ? a : b;
  if (lo.is_zero()) return hi;
  auto A = hi.to_real();
  auto B = lo.to_real();
  if (A && B) {
    long double s = *A + *B;
    if (!std::isinf(s)) return TowerReal::from_real(s);
  }
  // hi (or the sum) exceeds machine range, so log(hi) >= ~11356.
  if (lo.height_ == 0) return hi;  // lo < 1: relative effect ~1e-4936, below resolution
  TowerReal la = tower_ln(hi);
  TowerReal lb = tower_ln(lo);
  auto La = la.to_real();
  if (!La) return hi;  // correction <= ln 2 on a log >= 1e4932: below resolution
  auto Lb = lb.to_real();
  long double d = *La - *Lb;
  if (d > 45.0L) return hi;  // exp(-d) < 3e-20: below mantissa resolution
  return TowerReal::from_log(*La + log1pl(expl(-d)));
}

// a - b for a >= b.  Exact in machine range; at tower scale only a
// resolution-absorbed difference is allowed -- near-equal huge operands
// raise tower_cancellation_error.
inline TowerReal tower_sub(const TowerReal& a, const TowerReal& b) {
  if (a.saturated_ || b.saturated_) throw tower_cancellation_error();
  if (b > a) throw std::domain_error("tower_sub: negative result");
  if (b.is_zero()) return a;
  auto A = a.to_real();
  auto B = b.to_real();
  if (A && B) return TowerReal::from_real(*A - *B);
  // a beyond machine range
  if (b.height_ == 0) return a;
  TowerReal la = tower_ln(a);
  TowerReal lb = tower_ln(b);
  auto La = la.to_real();
  auto Lb = lb.to_real();
  if (La && Lb) {
    long double d = *La - *Lb;
    if (d > 45.0L) return a;
    throw tower_cancellation_error();
  }
  // log(a) itself beyond machine range
  if (Lb) return a;  // ratio b/a is astronomically small
  if (la == lb) throw tower_cancellation_error();
  return a;
}

inline TowerReal tower_mul(const TowerReal& a, const TowerReal& b) {
  if (a.saturated_ || b.saturated_) {
    if (a.is_zero() || b.is_zero()) return {};
    return a.saturated_ ? a : b;
  }
  if (a.is_zero() || b.is_zero()) return {};
  auto A = a.to_real();
  auto B = b.to_real();
  if (A && B) {
    long double p = *A * *B;
    if (!std::isinf(p)) return TowerReal::from_real(p);
  }
  const TowerReal& hi = (a < b) ? b : a;
  const TowerReal& lo = (a < b) ? a : b;
  TowerReal la = tower_ln(hi);
  auto La = la.to_real();
  if (La) {
    long double LB;
    if (lo.height_ == 0) {
      LB = logl(*lo.to_real());  // negative log of a sub-1 factor
    } else {
      auto Lb = tower_ln(lo).to_real();
      LB = *Lb;  // lo <= hi and log(hi) is machine-range, so log(lo) is too
    }
    long double L = *La + LB;
    if (L < 0.0L && la.height_ >= 1 && !std::isfinite(expl(L))) return {};
    return TowerReal::from_log(L);
  }
  // log(hi) beyond machine range; only a comparably huge factor matters
  if (lo.height_ == 0) return hi;
  TowerReal lb = tower_ln(lo);
  if (lb.to_real()) return hi;  // log-contribution below resolution
  return tower_exp(tower_add(la, lb));
}

// A signed magnitude at tower scale.  Used for quantities like log|f(z)|
// that carry a sign but whose magnitude may be astronomically large.
struct SignedTower {
  int sign = 0;  // -1, 0, +1
  TowerReal mag;

  static SignedTower of_real(long double v) {
    if (std::isnan(v)) throw std::domain_error("SignedTower: NaN");
    if (v == 0.0L) return {};
    return {v > 0.0L ? 1 : -1, TowerReal::from_real(std::fabs(v))};
  }
  // sign * e^P where P is the log of the magnitude.
  static SignedTower of_log(int sign, long double P) {
    if (sign == 0) return {};
    TowerReal m = TowerReal::from_log(P);
    if (m.is_zero()) return {};
    return {sign, m};
  }

  std::optional<long double> to_real() const {
    if (sign == 0) return 0.0L;
    auto m = mag.to_real();
    if (!m) return std::nullopt;
    return sign > 0 ? *m : -*m;
  }

  friend std::strong_ordering operator<=>(const SignedTower& a, const SignedTower& b) {
    if (a.sign != b.sign) return a.sign <=> b.sign;
    if (a.sign >= 0) return a.mag <=> b.mag;
    return b.mag <=> a.mag;
  }
  friend bool operator==(const SignedTower& a, const SignedTower& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

  std::string str() const {
    if (sign == 0) return "0";
    return (sign > 0 ? std::string("+") : std::string("-")) + mag.str();
  }
};

// value = e^(signed log).  Negative logs of non-machine magnitude underflow
// to zero (the representation floor).
inline TowerReal signed_exp(const SignedTower& s) {
  if (s.sign == 0) return TowerReal::from_real(1.0L);
  if (s.sign > 0) return tower_exp(s.mag);
  auto m = s.mag.to_real();
  if (!m) return {};
  return TowerReal::from_real(expl(-*m));
}

// log of a tower value as a signed quantity (values < 1 have negative log).
inline SignedTower signed_log(const TowerReal& t) {
  if (t.is_zero()) throw std::domain_error("signed_log: log of zero");
  if (t.height() >= 1) {
    TowerReal l = tower_ln(t);
    if (l.is_zero()) return {};
    return {1, l};
  }
  return SignedTower::of_real(logl(*t.to_real()));
}

// s + delta for a machine-range delta.  Exact in machine range; at tower
// scale the delta is absorbed (it is below resolution there).
inline SignedTower signed_add_real(const SignedTower& s, long double delta) {
  if (delta == 0.0L) return s;
  auto v = s.to_real();
  if (v) {
    long double r = *v + delta;
    if (!std::isinf(r)) return SignedTower::of_real(r);
  }
  return s;
}

// Log-coordinates of a complex value: signed tower log-modulus plus a
// principal-branch argument.  The argument is meaningful only while the
// underlying magnitudes are small enough to reduce mod 2*pi; past that
// arg_known is cleared rather than fabricating angles.
struct LogComplex {
  SignedTower logmod;
  double arg = 0.0;
  bool arg_known = true;

  std::optional<std::complex<double>> to_complex() const {
    if (!arg_known) return std::nullopt;
    auto l = logmod.to_real();
    if (!l || *l > 709.0L || *l < -745.0L) {
      if (l && *l < -745.0L) return std::complex<double>(0.0, 0.0);
      return std::nullopt;
    }
    double r = static_cast<double>(expl(*l));
    return std::complex<double>(r * std::cos(arg), r * std::sin(arg));
  }
};

// Normalizes an angle to (-pi, pi].
inline double normalize_angle(long double theta) {
  long double t = remainderl(theta, 2.0L * kPiL);
  if (t <= -kPiL) t += 2.0L * kPiL;
  return static_cast<double>(t);
}

}  // namespace escape_atlas
