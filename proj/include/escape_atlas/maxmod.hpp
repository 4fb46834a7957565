#pragma once

// Maximum and minimum modulus on circles, iterated max-modulus ladders
// M^n(R,f), the covering constants psi_c / D_tau / epsilon(r), growth
// inequality checks, and tracing of the maximum-modulus locus.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_atlas/functions.hpp"
#include "escape_atlas/tower.hpp"

namespace escape_atlas {

// ---------------------------------------------------------------------------
// circle scans

struct CircleExtremum {
  SignedTower logmod;                // log of the extremal modulus
  std::vector<double> angles;        // all angles attaining it within tolerance
};

namespace detail {

inline int scan_samples(double r) { return std::max(4096, (int)(64.0 * r)); }

// |A - B| <= tol for signed-log quantities A, B (as log-moduli this is
// value-relative closeness: |f| >= (1-tol) M means the logs differ by at
// most ~tol absolutely).
inline bool logmod_close(const SignedLog& a, const SignedLog& b, long double tol) {
  if (a.sign == b.sign && a.sign != 0) {
    // indistinguishable at the representation's resolution counts as equal
    long double scale = std::max(std::fabs(a.log_abs), std::fabs(b.log_abs));
    if (std::fabs(a.log_abs - b.log_abs) <= 8.0L * 1.0842e-19L * scale) return true;
  }
  SignedLog diff = signed_log_sum({a, SignedLog{-b.sign, b.log_abs}});
  if (diff.sign == 0) return true;
  return diff.log_abs <= logl(tol);
}

// Golden-section refinement of one extremum of theta -> key(theta).
template <typename KeyFn>
double golden_refine(const KeyFn& key, double lo, double hi, bool maximize) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  auto kc = key(c), kd = key(d);
  while (b - a > 1e-12) {
    bool pick_left = maximize ? (kd < kc) : (kc < kd);
    if (pick_left) {
      b = d; d = c; kd = kc;
      c = b - phi * (b - a);
      kc = key(c);
    } else {
      a = c; c = d; kc = kd;
      d = a + phi * (b - a);
      kd = key(d);
    }
  }
  return 0.5 * (a + b);
}

template <bool Maximize>
CircleExtremum scan_extremum(const FunctionSpec& f, double r) {
  const int n = scan_samples(r);
  auto key = [&](double theta) {
    return log_modulus_key(f, {r * std::cos(theta), r * std::sin(theta)});
  };
  std::vector<LogModKey> k(n);
  for (int i = 0; i < n; ++i) k[i] = key(2.0 * kPi * i / n);

  auto better = [](const LogModKey& a, const LogModKey& b) {
    return Maximize ? (b < a) : (a < b);
  };
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (better(k[i], k[best])) best = i;

  // refine every local extremum that is not hopelessly far from the best
  std::vector<std::pair<double, LogModKey>> candidates;
  for (int i = 0; i < n; ++i) {
    const LogModKey& prev = k[(i + n - 1) % n];
    const LogModKey& next = k[(i + 1) % n];
    bool local = Maximize ? (!(k[i] < prev) && !(k[i] < next)) : (!(prev < k[i]) && !(next < k[i]));
    if (!local) continue;
    if (k[i].v.sign == k[best].v.sign && k[i].v.sign != 0 &&
        std::fabs(k[i].v.log_abs - k[best].v.log_abs) > 60.0L &&
        better(k[best], k[i]))
      continue;  // dwarfed by the global extremum
    double lo = 2.0 * kPi * (i - 1) / n;
    double hi = 2.0 * kPi * (i + 1) / n;
    auto kfn = [&](double t) { return key(t); };
    double t = golden_refine(kfn, lo, hi, Maximize);
    candidates.emplace_back(t, key(t));
  }

  LogModKey bestk = candidates.empty() ? k[best] : candidates[0].second;
  for (auto& [t, kk] : candidates)
    if (better(kk, bestk)) bestk = kk;

  CircleExtremum out;
  out.logmod = to_signed_tower(bestk.v);
  for (auto& [t, kk] : candidates) {
    if (logmod_close(kk.v, bestk.v, 1e-9L)) out.angles.push_back(normalize_angle(t));
  }
  std::sort(out.angles.begin(), out.angles.end());
  // drop angle duplicates produced by adjacent refinement brackets
  out.angles.erase(std::unique(out.angles.begin(), out.angles.end(),
                               [](double a, double b) { return std::fabs(a - b) < 1e-9; }),
                   out.angles.end());
  if (out.angles.size() > 1 && std::fabs(out.angles.front() + kPi) < 1e-9 &&
      std::fabs(out.angles.back() - kPi) < 1e-9)
    out.angles.pop_back();  // -pi and pi are the same angle
  return out;
}

}  // namespace detail

// log M(r, f) for a (possibly tower-scale) radius, by the closed forms:
//   Exp/RotExp: r        ExpFamily: r + log a
//   HardyG:     e^(r^2) + |sin r| + log a   (valid from Hardy's threshold on;
//               bounded terms are absorbed once r is beyond sin resolution)
inline SignedTower log_max_modulus_tower(const FunctionSpec& f, const TowerReal& r) {
  switch (f.kind) {
    case FunctionKind::Exp:
    case FunctionKind::RotExp: {
      if (r.is_zero()) return {};
      return SignedTower{1, r};
    }
    case FunctionKind::ExpFamily:
      return signed_add_real(SignedTower{r.is_zero() ? 0 : 1, r}, (long double)f.log_alpha());
    case FunctionKind::HardyG: {
      TowerReal ex2 = tower_exp(tower_mul(r, r));
      long double delta = (long double)f.log_alpha();
      auto xr = r.to_real();
      if (xr && *xr < 1e15L) delta += std::fabs(sinl(*xr));
      return signed_add_real(SignedTower{1, ex2}, delta);
    }
  }
  return {};
}

// Hardy's closed form is used from this radius on; below it the circle is
// scanned.  Cross-checked against full scans down to r = 1 in the tests.
inline constexpr double kHardyClosedFormMinR = 2.0;

inline CircleExtremum max_modulus_sampled(const FunctionSpec& f, double r) {
  if (!(r > 0)) throw std::domain_error("max_modulus: r must be positive");
  CircleExtremum out = detail::scan_extremum<true>(f, r);
  if (f.kind == FunctionKind::HardyG && out.angles.size() > 1) {
    // For HardyG the two axis lobes carry log-moduli e^(r^2) +- sin r whose
    // difference sits below floating resolution once e^(r^2) is large, so
    // the scan can tie.  At the exact axis points the dominant terms cancel
    // structurally and the comparison reduces to sin r vs -sin r.
    bool has_pos = false, has_neg = false;
    for (double a : out.angles) {
      if (std::fabs(a) < 1e-6) has_pos = true;
      if (std::fabs(std::fabs(a) - kPi) < 1e-6) has_neg = true;
    }
    double s = std::sin(r);
    if (has_pos && has_neg && std::fabs(s) > 1e-12) {
      std::erase_if(out.angles, [&](double a) {
        bool near_pos = std::fabs(a) < 1e-6;
        bool near_neg = std::fabs(std::fabs(a) - kPi) < 1e-6;
        return s > 0 ? near_neg : near_pos;
      });
    }
  }
  return out;
}

inline CircleExtremum min_modulus_sampled(const FunctionSpec& f, double r) {
  if (!(r > 0)) throw std::domain_error("min_modulus: r must be positive");
  return detail::scan_extremum<false>(f, r);
}

inline CircleExtremum max_modulus(const FunctionSpec& f, double r) {
  if (!(r > 0)) throw std::domain_error("max_modulus: r must be positive");
  switch (f.kind) {
    case FunctionKind::Exp:
    case FunctionKind::RotExp:
    case FunctionKind::ExpFamily:
      return {log_max_modulus_tower(f, TowerReal::from_real(r)), {0.0}};
    case FunctionKind::HardyG: {
      if (r < kHardyClosedFormMinR) return max_modulus_sampled(f, r);
      double s = std::sin(r);
      CircleExtremum out;
      out.logmod = log_max_modulus_tower(f, TowerReal::from_real(r));
      if (std::fabs(s) < 1e-12) {
        out.angles = {0.0, kPi};
      } else {
        out.angles = {s > 0 ? 0.0 : kPi};
      }
      return out;
    }
  }
  return {};
}

inline CircleExtremum min_modulus(const FunctionSpec& f, double r) {
  if (!(r > 0)) throw std::domain_error("min_modulus: r must be positive");
  switch (f.kind) {
    case FunctionKind::Exp:
    case FunctionKind::RotExp:
      return {SignedTower::of_real(-(long double)r), {kPi}};
    case FunctionKind::ExpFamily:
      return {SignedTower::of_real(-(long double)r + (long double)f.log_alpha()), {kPi}};
    case FunctionKind::HardyG:
      return min_modulus_sampled(f, r);
  }
  return {};
}

// ---------------------------------------------------------------------------
// ladders

struct MaxModLadder {
  double base_R = 0;
  std::vector<TowerReal> entries;  // entries[n] = M^n(base_R, f)
  bool escape_certified = false;
};

inline MaxModLadder build_ladder(const FunctionSpec& f, double R, int n) {
  if (!(R > 0)) throw std::domain_error("build_ladder: R must be positive");
  if (n < 1) throw std::domain_error("build_ladder: n must be >= 1");
  MaxModLadder l;
  l.base_R = R;
  l.entries.reserve(n + 1);
  l.entries.push_back(TowerReal::from_real(R));
  for (int k = 0; k < n; ++k) {
    const TowerReal& cur = l.entries.back();
    SignedTower logM;
    auto rd = cur.to_double();
    if (f.kind == FunctionKind::HardyG && rd && *rd < kHardyClosedFormMinR) {
      logM = max_modulus(f, *rd).logmod;  // sampled below Hardy's threshold
    } else {
      logM = log_max_modulus_tower(f, cur);
    }
    l.entries.push_back(signed_exp(logM));
  }
  l.escape_certified = l.entries[1] > l.entries[0];
  return l;
}

// ---------------------------------------------------------------------------
// psi_c and the covering constants

struct PsiCResult {
  double value = 0;           // (inf ratio - 1)/2 over the window; +inf sentinel possible
  int attained_n = 0;         // n attaining the minimum
  std::vector<double> log_ratios;  // log(M^n(cr)/M^n(r)), +inf where beyond machine range
  bool ratios_monotone = true;     // nondecreasing over the window
};

inline PsiCResult psi_c(const FunctionSpec& f, double c, double r, int n_max = 4) {
  if (!(c > 1.0)) throw std::domain_error("psi_c: c must exceed 1");
  if (!(r > 0.0)) throw std::domain_error("psi_c: r must be positive");
  if (n_max < 1) throw std::domain_error("psi_c: n_max must be >= 1");
  MaxModLadder lc = build_ladder(f, c * r, n_max);
  MaxModLadder lr = build_ladder(f, r, n_max);
  PsiCResult out;
  double best = HUGE_VAL;
  for (int n = 1; n <= n_max; ++n) {
    SignedTower a = signed_log(lc.entries[n]);
    SignedTower b = signed_log(lr.entries[n]);
    auto av = a.to_real(), bv = b.to_real();
    double d;
    if (av && bv) {
      d = (double)(*av - *bv);
    } else {
      d = HUGE_VAL;  // ratio of logs beyond machine range
    }
    out.log_ratios.push_back(d);
    double ratio = std::isinf(d) ? HUGE_VAL : (double)expl((long double)d);
    if (ratio < best) {
      best = ratio;
      out.attained_n = n;
    }
    if (n >= 2 && out.log_ratios[n - 1] < out.log_ratios[n - 2]) out.ratios_monotone = false;
  }
  out.value = std::isinf(best) ? HUGE_VAL : 0.5 * (best - 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// hyperbolic diameter of the unit circle inside A(1/tau, tau)
//
// Numeric geodesic evaluation in the log-strip model {|x| < log tau} with
// the curvature -1 density (pi/2a)/cos(pi x/(2a)).  Distances between
// core-circle points are minimized over both winding directions and over a
// family of off-core bulge paths; the core arc wins, which the result
// records.  The extremal pair is antipodal.

struct DtauResult {
  double d_tau = 0;          // exp(2 * max distance)
  double max_distance = 0;
  double core_excess_min = 0;  // min over tested bulges of (bulge - core) length
  bool core_is_shortest = false;
  std::string normalization = "curvature -1";
};

namespace detail {

// length of the path t -> (x(t), y(t)) in the strip metric, Simpson rule
template <typename XF, typename YF>
double strip_path_length(double a, const XF& x, const YF& y, int segments) {
  auto integrand = [&](double t) {
    const double h = 1e-6;
    double dx = (x(t + h) - x(t - h)) / (2 * h);
    double dy = (y(t + h) - y(t - h)) / (2 * h);
    double density = (kPi / (2 * a)) / std::cos(kPi * x(t) / (2 * a));
    return density * std::hypot(dx, dy);
  };
  double sum = 0;
  for (int i = 0; i < segments; ++i) {
    double t0 = (double)i / segments, t1 = (double)(i + 1) / segments;
    double tm = 0.5 * (t0 + t1);
    sum += (t1 - t0) / 6.0 * (integrand(t0) + 4 * integrand(tm) + integrand(t1));
  }
  return sum;
}

}  // namespace detail

inline DtauResult dtau(double tau) {
  if (!(tau > 1.0)) throw std::domain_error("dtau: tau must exceed 1");
  const double a = std::log(tau);

  // distance between core points at vertical separation d (in the strip)
  auto core_dist = [&](double d, double* excess_min, bool* core_best) {
    auto xline = [](double) { return 0.0; };
    double best = HUGE_VAL, core_len = HUGE_VAL;
    double emin = HUGE_VAL;
    for (double dd : {d, 2 * kPi - d}) {
      if (dd <= 0) continue;
      auto yline = [dd](double t) { return dd * t; };
      double line = detail::strip_path_length(a, xline, yline, 256);
      core_len = std::min(core_len, line);
      best = std::min(best, line);
      for (double amp : {-0.8, -0.5, -0.2, 0.2, 0.5, 0.8}) {
        double A = amp * a;
        auto xb = [A](double t) { return A * std::sin(kPi * t); };
        double bl = detail::strip_path_length(a, xb, yline, 512);
        emin = std::min(emin, bl - line);
        best = std::min(best, bl);
      }
    }
    if (excess_min) *excess_min = emin;
    if (core_best) *core_best = best >= core_len * (1 - 1e-9);
    return best;
  };

  DtauResult out;
  for (int i = 1; i <= 32; ++i) {
    double phi = kPi * i / 32.0;
    double excess = 0;
    bool core_best = false;
    double dist = core_dist(phi, &excess, &core_best);
    if (dist > out.max_distance) {
      out.max_distance = dist;
      out.core_excess_min = excess;
      out.core_is_shortest = core_best;
    }
  }
  out.d_tau = std::exp(2.0 * out.max_distance);
  return out;
}

// ---------------------------------------------------------------------------
// epsilon(r)

struct EpsilonResult {
  double tau = 0, c = 0;
  double d_tau = 0;
  double covering_exponent = 0;  // log d_tau; the exponent used below
  double psi = 0;
  double epsilon = 0;
  bool epqeq_holds = false;  // 2/epsilon < psi
  double C_param = 0;
  int psi_attained_n = 0;
  bool psi_monotone = true;
  std::string normalization = "curvature -1";
};

// epsilon = 2 C^(1-1/X) / psi^(1/X) with X the covering exponent.
inline double epsilon_from_psi(double psi, double C, double X) {
  return 2.0 * std::pow(C, 1.0 - 1.0 / X) / std::pow(psi, 1.0 / X);
}

inline EpsilonResult epsilon_r(const FunctionSpec& f, double lambda, double lambda_p,
                               double lambda_pp, double r, double C_param, int n_max = 4) {
  if (!(1.0 < lambda && lambda < lambda_p && lambda_p < lambda_pp))
    throw std::domain_error("epsilon_r: need 1 < lambda < lambda' < lambda''");
  if (!(C_param > 1.0)) throw std::domain_error("epsilon_r: C must exceed 1");
  EpsilonResult out;
  out.tau = std::min(lambda, lambda_pp / lambda_p);
  out.c = 0.5 * (1.0 + lambda);
  DtauResult d = dtau(out.tau);
  out.d_tau = d.d_tau;
  out.covering_exponent = std::log(d.d_tau);
  PsiCResult p = psi_c(f, out.c, r, n_max);
  out.psi = p.value;
  out.psi_attained_n = p.attained_n;
  out.psi_monotone = p.ratios_monotone;
  out.C_param = C_param;
  out.epsilon = epsilon_from_psi(out.psi, C_param, out.covering_exponent);
  out.epqeq_holds = 2.0 / out.epsilon < out.psi;
  return out;
}

// ---------------------------------------------------------------------------
// growth inequality checks

// log M(s, f^n) for the n-th iterate, on (possibly tower-scale) s.
// Exp and ExpFamily have exact closed forms (the circle maximum of every
// iterate sits on the positive real axis); HardyG uses the real-axis
// witness max(|f^n(s)|, |f^n(-s)|) = f^(n-1)(M(s,f)), a lower bound that
// is reported as such.
struct IterateMaxMod {
  SignedTower logmod;
  bool exact = true;  // false when the value is a certified lower bound
};

inline IterateMaxMod log_max_modulus_iterate(const FunctionSpec& f, const TowerReal& s, int n) {
  if (n < 1) throw std::domain_error("log_max_modulus_iterate: n must be >= 1");
  switch (f.kind) {
    case FunctionKind::Exp: {
      // log M(s, exp^n) = exp^(n-1)(s)
      TowerReal t = s;
      for (int i = 1; i < n; ++i) t = tower_exp(t);
      return {SignedTower{t.is_zero() ? 0 : 1, t}, true};
    }
    case FunctionKind::ExpFamily: {
      // the orbit of s on the positive axis: log v_{k+1} = v_k + log a
      TowerReal v = s;
      SignedTower logv;
      for (int i = 0; i < n; ++i) {
        logv = signed_add_real(SignedTower{v.is_zero() ? 0 : 1, v}, (long double)f.log_alpha());
        v = signed_exp(logv);
      }
      return {logv, true};
    }
    case FunctionKind::HardyG: {
      SignedTower logv = log_max_modulus_tower(f, s);
      for (int i = 1; i < n; ++i) {
        // real-axis step: log g(v) = e^(v^2) + sin v + log a
        TowerReal v = signed_exp(logv);
        TowerReal ex2 = tower_exp(tower_mul(v, v));
        long double delta = (long double)f.log_alpha();
        auto vr = v.to_real();
        if (vr && *vr < 1e15L) delta += sinl(*vr);
        logv = signed_add_real(SignedTower{1, ex2}, delta);
      }
      return {logv, n == 1};
    }
    case FunctionKind::RotExp: {
      if (n == 1) return {SignedTower{s.is_zero() ? 0 : 1, s}, true};
      throw std::domain_error("log_max_modulus_iterate: no closed form for rot_exp iterates");
    }
  }
  return {};
}

struct LemmaCheck {
  std::string lemma;  // "Mrc", "MrcIter", "Mdrfn"
  double r = 0;
  double param = 0;  // c or d
  int n = 1;
  bool holds = false;
  std::string method;
  std::string lhs, rhs;  // tower-formatted witnesses
};

struct GrowthLemmaReport {
  FunctionSpec f;
  std::vector<LemmaCheck> checks;
  int violations = 0;
  // smallest grid r from which a combination holds for all larger grid r
  std::map<std::string, double> empirical_thresholds;
};

inline void to_json(nlohmann::json& j, const LemmaCheck& c) {
  j = nlohmann::json{{"lemma", c.lemma},
                     {"params", {{"r", c.r}, {"param", c.param}, {"n", c.n}}},
                     {"holds", c.holds},
                     {"witness", {{"method", c.method}, {"log_lhs", c.lhs}, {"log_rhs", c.rhs}}}};
}

inline void to_json(nlohmann::json& j, const GrowthLemmaReport& r) {
  j = nlohmann::json{{"function", r.f}, {"violations", r.violations}, {"checks", r.checks},
                     {"empirical_thresholds", r.empirical_thresholds}};
}

inline GrowthLemmaReport check_growth_lemmas(const FunctionSpec& f, const std::vector<double>& r_grid,
                                             const std::vector<double>& c_list,
                                             const std::vector<double>& d_list, int n_max) {
  GrowthLemmaReport rep;
  rep.f = f;
  auto scaled = [](const SignedTower& logm, double c) {
    SignedTower s = logm;
    s.mag = tower_mul(s.mag, TowerReal::from_real((long double)c));
    return s;
  };
  for (double r : r_grid) {
    for (double c : c_list) {
      SignedTower logM_r = log_max_modulus_tower(f, TowerReal::from_real(r));
      double rc = std::pow(r, c);
      // M(r^c) >= M(r)^c
      {
        LemmaCheck chk{"Mrc", r, c, 1, false, "closed form", "", ""};
        SignedTower lhs = log_max_modulus_tower(f, TowerReal::from_real(rc));
        SignedTower rhs = scaled(logM_r, c);
        chk.holds = !(lhs < rhs);
        chk.lhs = lhs.str();
        chk.rhs = rhs.str();
        rep.checks.push_back(chk);
      }
      // M^n(r^c) >= M^n(r)^c
      {
        MaxModLadder lc = build_ladder(f, rc, n_max);
        MaxModLadder lr = build_ladder(f, r, n_max);
        for (int n = 1; n <= n_max; ++n) {
          LemmaCheck chk{"MrcIter", r, c, n, false, "ladder", "", ""};
          SignedTower lhs = signed_log(lc.entries[n]);
          SignedTower rhs = scaled(signed_log(lr.entries[n]), c);
          chk.holds = !(lhs < rhs);
          chk.lhs = lhs.str();
          chk.rhs = rhs.str();
          rep.checks.push_back(chk);
        }
      }
    }
    for (double d : d_list) {
      MaxModLadder lr = build_ladder(f, r, n_max);
      for (int n = 1; n <= n_max; ++n) {
        LemmaCheck chk{"Mdrfn", r, d, n, false, "", "", ""};
        IterateMaxMod lhs = log_max_modulus_iterate(f, TowerReal::from_real(d * r), n);
        SignedTower rhs = signed_log(lr.entries[n]);
        chk.method = lhs.exact ? "closed form" : "real-axis witness (lower bound)";
        chk.holds = !(lhs.logmod < rhs);
        chk.lhs = lhs.logmod.str();
        chk.rhs = rhs.str();
        rep.checks.push_back(chk);
      }
    }
  }
  for (auto& c : rep.checks)
    if (!c.holds) ++rep.violations;

  // per-combination empirical thresholds over the grid
  std::map<std::string, std::map<double, bool>> by_combo;
  for (auto& c : rep.checks) {
    char id[64];
    std::snprintf(id, sizeof id, "%s c=%g n=%d", c.lemma.c_str(), c.param, c.n);
    by_combo[id][c.r] = by_combo[id].count(c.r) ? (by_combo[id][c.r] && c.holds) : c.holds;
  }
  for (auto& [id, rows] : by_combo) {
    double from = HUGE_VAL;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      if (it->second) from = it->first;
      else break;
    }
    if (!std::isinf(from)) rep.empirical_thresholds[id] = from;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// maximum-modulus locus

struct LocusCurve {
  enum class Kind { PositiveRay, NegativeRay, Generic };
  Kind kind = Kind::Generic;
  std::vector<std::complex<double>> points;
  std::vector<double> radii;
  std::vector<double> angles;
};

inline const char* locus_kind_name(LocusCurve::Kind k) {
  switch (k) {
    case LocusCurve::Kind::PositiveRay: return "positive-ray";
    case LocusCurve::Kind::NegativeRay: return "negative-ray";
    case LocusCurve::Kind::Generic: return "generic";
  }
  return "?";
}

// Sweeps radii and links argmax angles across consecutive radii by nearest
// angle; a circular jump above the threshold starts a new curve.
inline std::vector<LocusCurve> trace_maxmod_locus(const FunctionSpec& f, double r_min, double r_max,
                                                  double step, double jump_threshold = 0.2) {
  if (!(0 < r_min && r_min < r_max)) throw std::domain_error("trace_maxmod_locus: need 0 < r_min < r_max");
  if (!(step > 0)) throw std::domain_error("trace_maxmod_locus: step must be positive");
  std::vector<LocusCurve> done, open;
  for (double r = r_min; r <= r_max + 0.5 * step; r += step) {
    std::vector<double> angles = (f.kind == FunctionKind::HardyG)
                                     ? max_modulus_sampled(f, r).angles
                                     : max_modulus(f, r).angles;
    std::vector<bool> used(angles.size(), false);
    std::vector<LocusCurve> still_open;
    for (auto& curve : open) {
      double prev = curve.angles.back();
      int pick = -1;
      double best = HUGE_VAL;
      for (size_t i = 0; i < angles.size(); ++i) {
        if (used[i]) continue;
        double dist = std::fabs(std::remainder(angles[i] - prev, 2 * kPi));
        if (dist < best) { best = dist; pick = (int)i; }
      }
      if (pick >= 0 && best <= jump_threshold) {
        used[pick] = true;
        curve.angles.push_back(angles[pick]);
        curve.radii.push_back(r);
        curve.points.emplace_back(r * std::cos(angles[pick]), r * std::sin(angles[pick]));
        still_open.push_back(std::move(curve));
      } else {
        done.push_back(std::move(curve));
      }
    }
    open = std::move(still_open);
    for (size_t i = 0; i < angles.size(); ++i) {
      if (used[i]) continue;
      LocusCurve c;
      c.angles.push_back(angles[i]);
      c.radii.push_back(r);
      c.points.emplace_back(r * std::cos(angles[i]), r * std::sin(angles[i]));
      open.push_back(std::move(c));
    }
  }
  for (auto& c : open) done.push_back(std::move(c));

  for (auto& c : done) {
    bool all_pos = true, all_neg = true;
    for (double a : c.angles) {
      if (std::fabs(a) > 1e-3) all_pos = false;
      if (std::fabs(std::fabs(a) - kPi) > 1e-3) all_neg = false;
    }
    c.kind = all_pos   ? LocusCurve::Kind::PositiveRay
             : all_neg ? LocusCurve::Kind::NegativeRay
                       : LocusCurve::Kind::Generic;
  }
  std::sort(done.begin(), done.end(),
            [](const LocusCurve& a, const LocusCurve& b) { return a.radii.front() < b.radii.front(); });
  return done;
}

}  // namespace escape_atlas
