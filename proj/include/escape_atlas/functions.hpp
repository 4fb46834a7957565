#pragma once

// Catalog of entire functions under study, with evaluation both in machine
// range and in log coordinates.  The log path carries orbits through
// magnitudes like exp(exp(e^(r^2))) where ordinary complex arithmetic is
// long gone.
//
//   Exp        f(z) = exp(z)
//   RotExp     f(z) = i exp(z)
//   HardyG     g_a(z) = a exp(e^(z^2) + sin z),  a > 0
//   ExpFamily  h_a(z) = a exp(z),                a in (0, 1/e)
//
// For HardyG, with z = x+iy and g(z) = R e^(i theta):
//   log R = e^(x^2-y^2) cos 2xy + sin x cosh y + log a
//   theta = e^(x^2-y^2) sin 2xy + cos x sinh y
// Evaluation always goes through these forms, never through naive
// exponentiation.

#include <algorithm>
#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_atlas/tower.hpp"

namespace escape_atlas {

enum class FunctionKind { Exp, RotExp, HardyG, ExpFamily };

inline const char* kind_name(FunctionKind k) {
  switch (k) {
    case FunctionKind::Exp: return "exp";
    case FunctionKind::RotExp: return "rot_exp";
    case FunctionKind::HardyG: return "hardy_g";
    case FunctionKind::ExpFamily: return "exp_family";
  }
  return "?";
}

inline FunctionKind kind_from_name(const std::string& s) {
  if (s == "exp") return FunctionKind::Exp;
  if (s == "rot_exp") return FunctionKind::RotExp;
  if (s == "hardy_g") return FunctionKind::HardyG;
  if (s == "exp_family") return FunctionKind::ExpFamily;
  throw std::domain_error("unknown function kind: " + s);
}

struct FunctionSpec {
  FunctionKind kind = FunctionKind::Exp;
  double alpha = 0.0;  // used by HardyG and ExpFamily only

  static FunctionSpec exponential() { return {FunctionKind::Exp, 0.0}; }
  static FunctionSpec rotated_exponential() { return {FunctionKind::RotExp, 0.0}; }
  static FunctionSpec hardy(double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("hardy_g requires alpha > 0");
    return {FunctionKind::HardyG, alpha};
  }
  static FunctionSpec exp_family(double alpha) {
    if (!(alpha > 0.0 && alpha < std::exp(-1.0)))
      throw std::domain_error("exp_family requires alpha in (0, 1/e)");
    return {FunctionKind::ExpFamily, alpha};
  }

  bool uses_alpha() const { return kind == FunctionKind::HardyG || kind == FunctionKind::ExpFamily; }
  double log_alpha() const { return uses_alpha() ? std::log(alpha) : 0.0; }

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

inline void to_json(nlohmann::json& j, const FunctionSpec& f) {
  j = nlohmann::json{{"kind", kind_name(f.kind)}};
  if (f.uses_alpha()) j["alpha"] = f.alpha;
}

inline void from_json(const nlohmann::json& j, FunctionSpec& f) {
  FunctionKind k = kind_from_name(j.at("kind").get<std::string>());
  double a = j.value("alpha", 0.0);
  switch (k) {
    case FunctionKind::Exp: f = FunctionSpec::exponential(); break;
    case FunctionKind::RotExp: f = FunctionSpec::rotated_exponential(); break;
    case FunctionKind::HardyG: f = FunctionSpec::hardy(a); break;
    case FunctionKind::ExpFamily: f = FunctionSpec::exp_family(a); break;
  }
}

struct EvalResult {
  std::optional<std::complex<double>> value;  // present when in machine range
  LogComplex logrep;
  // Set once an orbit's argument (and hence subsequent moduli) can no
  // longer be tracked at tower scale.
  bool resolution_lost = false;
  bool logmod_known = true;
};

namespace detail {

// sign and log of |v| for a signed machine quantity
struct SignedLog {
  int sign = 0;
  long double log_abs = 0.0L;

  static SignedLog of(long double v) {
    if (v == 0.0L) return {};
    return {v > 0.0L ? 1 : -1, logl(std::fabs(v))};
  }
  long double value() const { return sign == 0 ? 0.0L : sign * expl(log_abs); }
};

// Compare as the represented values sign*e^log_abs.
inline std::strong_ordering signed_log_compare(const SignedLog& a, const SignedLog& b) {
  if (a.sign != b.sign) return a.sign <=> b.sign;
  if (a.sign == 0) return std::strong_ordering::equal;
  auto mag = (a.log_abs < b.log_abs)   ? std::strong_ordering::less
             : (a.log_abs > b.log_abs) ? std::strong_ordering::greater
                                       : std::strong_ordering::equal;
  return a.sign > 0 ? mag : (mag == std::strong_ordering::less     ? std::strong_ordering::greater
                             : mag == std::strong_ordering::greater ? std::strong_ordering::less
                                                                    : std::strong_ordering::equal);
}

// Signed sum of terms sigma_i * e^(l_i), returned in the same form.
// Exact up to long double rounding; cancellation near zero loses relative
// accuracy exactly where the sum itself is small, which is benign for the
// log-modulus use.
inline SignedLog signed_log_sum(std::vector<SignedLog> terms) {
  std::erase_if(terms, [](const SignedLog& t) { return t.sign == 0; });
  if (terms.empty()) return {};
  std::sort(terms.begin(), terms.end(),
            [](const SignedLog& a, const SignedLog& b) { return a.log_abs > b.log_abs; });
  SignedLog acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) {
    const SignedLog& t = terms[i];
    if (acc.sign == 0) { acc = t; continue; }
    long double d = acc.log_abs - t.log_abs;
    if (d > 64.0L * 0.6931L) continue;  // below resolution of the accumulator
    long double factor = (acc.sign == t.sign) ? 1.0L + expl(-d) : 1.0L - expl(-d);
    if (factor == 0.0L) { acc = {}; continue; }
    if (factor < 0.0L) {  // d == 0 only; sign flips
      acc.sign = -acc.sign;
      acc.log_abs += logl(-factor);
    } else {
      acc.log_abs += logl(factor);
    }
  }
  return acc;
}

inline long double log_cosh(long double y) {
  long double a = std::fabs(y);
  if (a > 30.0L) return a - 0.6931471805599453094L + log1pl(expl(-2.0L * a));
  return logl(coshl(a));
}
inline long double log_sinh_abs(long double y) {
  long double a = std::fabs(y);
  if (a > 30.0L) return a - 0.6931471805599453094L + log1pl(-expl(-2.0L * a));
  return logl(sinhl(a));
}

// Arguments larger than this cannot be reduced mod 2*pi at useful accuracy.
inline constexpr long double kArgTrackLimit = 1e12L;

// HardyG log-modulus and continuous angle, as signed-log terms.
struct HardyEval {
  SignedLog logmod;      // value of log|g(z)| as sign * e^l
  long double theta = 0.0L;
  bool theta_ok = true;  // false when theta overflows or cannot be reduced
};

inline HardyEval hardy_parts(double alpha, std::complex<double> z) {
  const long double x = z.real();
  const long double y = z.imag();
  const long double re_z2 = x * x - y * y;
  const long double im_z2 = 2.0L * x * y;
  const long double la = logl((long double)alpha);

  HardyEval out;
  if (y == 0.0L) {
    // real axis: theta vanishes identically and log|g| = e^(x^2) + sin x + log a
    SignedLog t1{1, re_z2};
    SignedLog t2 = SignedLog::of(sinl(x));
    SignedLog t3 = SignedLog::of(la);
    out.logmod = signed_log_sum({t1, t2, t3});
    out.theta = 0.0L;
    out.theta_ok = true;
    return out;
  }

  const long double c2 = cosl(im_z2);
  const long double s2 = sinl(im_z2);
  SignedLog t1 = (c2 == 0.0L) ? SignedLog{} : SignedLog{c2 > 0.0L ? 1 : -1, re_z2 + logl(std::fabs(c2))};
  long double sx = sinl(x);
  SignedLog t2 = (sx == 0.0L) ? SignedLog{} : SignedLog{sx > 0.0L ? 1 : -1, logl(std::fabs(sx)) + log_cosh(y)};
  SignedLog t3 = SignedLog::of(la);
  out.logmod = signed_log_sum({t1, t2, t3});

  // theta = e^(x^2-y^2) sin 2xy + cos x sinh y
  SignedLog u1 = (s2 == 0.0L) ? SignedLog{} : SignedLog{s2 > 0.0L ? 1 : -1, re_z2 + logl(std::fabs(s2))};
  long double cx = cosl(x);
  SignedLog u2{};
  if (cx != 0.0L && y != 0.0L) {
    int sgn = ((cx > 0.0L) == (y > 0.0L)) ? 1 : -1;
    u2 = SignedLog{sgn, logl(std::fabs(cx)) + log_sinh_abs(y)};
  }
  SignedLog th = signed_log_sum({u1, u2});
  if (th.sign == 0) {
    out.theta = 0.0L;
    out.theta_ok = true;
  } else if (th.log_abs < logl(kArgTrackLimit)) {
    out.theta = th.value();
    out.theta_ok = std::fabs(out.theta) < kArgTrackLimit && std::fabs(im_z2) < kArgTrackLimit;
  } else {
    out.theta = 0.0L;
    out.theta_ok = false;
  }
  return out;
}

inline SignedTower to_signed_tower(const SignedLog& s) {
  if (s.sign == 0) return {};
  return SignedTower::of_log(s.sign, s.log_abs);
}

}  // namespace detail

// Strictly ordering-compatible stand-in for eval(f,z).logrep.logmod, cheap
// enough for dense circle scans (no tower construction).
struct LogModKey {
  detail::SignedLog v;
  friend std::strong_ordering operator<=>(const LogModKey& a, const LogModKey& b) {
    return detail::signed_log_compare(a.v, b.v);
  }
  friend bool operator==(const LogModKey& a, const LogModKey& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }
  // log|f(z)| as a long double; +-inf when beyond range
  long double approx() const {
    if (v.sign == 0) return 0.0L;
    if (v.log_abs > 11300.0L) return v.sign > 0 ? HUGE_VALL : -HUGE_VALL;
    return v.sign * expl(v.log_abs);
  }
};

inline LogModKey log_modulus_key(const FunctionSpec& f, std::complex<double> z) {
  switch (f.kind) {
    case FunctionKind::Exp:
    case FunctionKind::RotExp:
      return {detail::SignedLog::of((long double)z.real())};
    case FunctionKind::ExpFamily:
      return {detail::SignedLog::of((long double)z.real() + (long double)f.log_alpha())};
    case FunctionKind::HardyG:
      return {detail::hardy_parts(f.alpha, z).logmod};
  }
  return {};
}

inline EvalResult eval(const FunctionSpec& f, std::complex<double> z) {
  EvalResult r;
  switch (f.kind) {
    case FunctionKind::Exp:
    case FunctionKind::RotExp:
    case FunctionKind::ExpFamily: {
      long double l = (long double)z.real();
      if (f.kind == FunctionKind::ExpFamily) l += (long double)f.log_alpha();
      r.logrep.logmod = SignedTower::of_real(l);
      long double im = z.imag();
      if (f.kind == FunctionKind::RotExp) im += (long double)kHalfPi;
      if (std::fabs((long double)z.imag()) < detail::kArgTrackLimit) {
        r.logrep.arg = normalize_angle(im);
        r.logrep.arg_known = true;
      } else {
        r.logrep.arg_known = false;
      }
      break;
    }
    case FunctionKind::HardyG: {
      detail::HardyEval h = detail::hardy_parts(f.alpha, z);
      r.logrep.logmod = detail::to_signed_tower(h.logmod);
      if (h.theta_ok) {
        r.logrep.arg = normalize_angle(h.theta);
        r.logrep.arg_known = true;
      } else {
        r.logrep.arg_known = false;
      }
      break;
    }
  }
  r.value = r.logrep.to_complex();
  return r;
}

// f'(z).  Closed forms: exp-type derivatives equal the function value (up
// to the alpha factor already inside), and g'(z) = g(z) (2z e^(z^2) + cos z).
inline EvalResult derivative(const FunctionSpec& f, std::complex<double> z) {
  if (f.kind != FunctionKind::HardyG) return eval(f, z);

  EvalResult g = eval(f, z);
  const long double x = z.real(), y = z.imag();
  const long double re_z2 = x * x - y * y;
  const long double im_z2 = 2.0L * x * y;
  EvalResult r;
  if (re_z2 < 11000.0L && std::fabs(im_z2) < detail::kArgTrackLimit) {
    // h = 2z e^(z^2) + cos z, computed with the e^(x^2-y^2) factor kept in
    // long double to avoid double overflow
    std::complex<long double> zl(x, y);
    std::complex<long double> e_z2 = expl(re_z2) * std::complex<long double>(cosl(im_z2), sinl(im_z2));
    std::complex<long double> h = 2.0L * zl * e_z2 + std::complex<long double>(cosl(x) * coshl(y), -sinl(x) * sinhl(y));
    long double habs = sqrtl(h.real() * h.real() + h.imag() * h.imag());
    if (habs == 0.0L) {
      r.logrep.logmod = {};
      r.logrep.arg_known = true;
      r.value = std::complex<double>(0, 0);
      return r;
    }
    r.logrep.logmod = signed_add_real(g.logrep.logmod, logl(habs));
    long double ha = atan2l(h.imag(), h.real());
    if (g.logrep.arg_known) {
      r.logrep.arg = normalize_angle((long double)g.logrep.arg + ha);
      r.logrep.arg_known = true;
    } else {
      r.logrep.arg_known = false;
    }
  } else {
    // dominant term only: |h| ~ 2|z| e^(x^2-y^2)
    long double log_h = re_z2 + logl(2.0L * std::abs(std::complex<long double>(x, y)));
    r.logrep.logmod = signed_add_real(g.logrep.logmod, log_h);
    r.logrep.arg_known = false;
  }
  r.value = r.logrep.to_complex();
  return r;
}

// Orbit f^1(z) ... f^n(z).  Once an entry leaves machine range the orbit
// continues in log coordinates where the catalog has closed forms; when the
// argument of a tower-scale value would be needed but is undefined, the
// remaining entries carry resolution_lost instead of fabricated values.
inline std::vector<EvalResult> eval_iterate(const FunctionSpec& f, std::complex<double> z, int n) {
  if (n < 1) throw std::domain_error("eval_iterate: n must be >= 1");
  std::vector<EvalResult> orbit;
  orbit.reserve(n);

  bool machine = true;
  std::complex<double> w = z;
  LogComplex state;  // valid when !machine
  bool lost = false;

  for (int k = 0; k < n; ++k) {
    if (lost) {
      EvalResult r;
      r.resolution_lost = true;
      r.logmod_known = false;
      r.logrep.arg_known = false;
      orbit.push_back(r);
      continue;
    }
    EvalResult r;
    if (machine) {
      r = eval(f, w);
      if (r.value) {
        w = *r.value;
      } else {
        machine = false;
        state = r.logrep;
      }
    } else {
      // log-coordinate step
      if (!state.arg_known) {
        lost = true;
        r.resolution_lost = true;
        r.logmod_known = false;
        r.logrep.arg_known = false;
        orbit.push_back(r);
        continue;
      }
      const bool on_positive_axis = state.arg == 0.0;
      const bool on_negative_axis = state.arg == kPi;
      TowerReal modulus = signed_exp(state.logmod);

      if (f.kind == FunctionKind::HardyG) {
        if (!on_positive_axis && !on_negative_axis) {
          lost = true;
          r.resolution_lost = true;
          r.logmod_known = false;
          r.logrep.arg_known = false;
          orbit.push_back(r);
          continue;
        }
        // log g(x) = e^(x^2) + sin x + log a; the bounded terms are exact
        // while x is machine-resolvable and absorbed (below resolution)
        // beyond that
        TowerReal ex2 = tower_exp(tower_mul(modulus, modulus));
        long double delta = 0.0L;
        auto xr = modulus.to_real();
        if (xr && *xr < 1e15L) {
          long double signed_x = on_positive_axis ? *xr : -*xr;
          delta = sinl(signed_x) + (long double)f.log_alpha();
        }
        r.logrep.logmod = signed_add_real(SignedTower{1, ex2}, delta);
        r.logrep.arg = 0.0;
        r.logrep.arg_known = true;
      } else {
        if (!on_positive_axis) {
          lost = true;
          r.resolution_lost = true;
          r.logmod_known = false;
          r.logrep.arg_known = false;
          orbit.push_back(r);
          continue;
        }
        // positive real axis: log|f| = |state| (+ log a), arg stays 0
        SignedTower lm{state.logmod.sign == 0 ? 0 : 1, modulus};
        if (modulus.is_zero()) lm = {};
        if (f.kind == FunctionKind::ExpFamily) lm = signed_add_real(lm, (long double)f.log_alpha());
        r.logrep.logmod = lm;
        r.logrep.arg = f.kind == FunctionKind::RotExp ? kHalfPi : 0.0;
        r.logrep.arg_known = true;
        if (f.kind == FunctionKind::RotExp) {
          // value is now purely imaginary with tower modulus; the next
          // step's argument cannot be tracked
        }
      }
      r.value = r.logrep.to_complex();
      if (r.value) {
        machine = true;
        w = *r.value;
      } else {
        state = r.logrep;
      }
    }
    orbit.push_back(r);
  }
  return orbit;
}

}  // namespace escape_atlas
