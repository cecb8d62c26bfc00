#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "coolwalk/error.hpp"
#include "coolwalk/numeric.hpp"
#include "coolwalk/rng.hpp"

namespace coolwalk {

// Site law families for the i.i.d. environment. omega is the probability of a
// right step at a site; rho = (1 - omega) / omega.
struct TwoPoint {
  double omega_hi = 0.0;
  double omega_lo = 0.0;
  double p = 0.0;  // weight of omega_hi
};

struct BetaLaw {
  double a = 0.0;
  double b = 0.0;
};

struct Discrete {
  std::vector<double> omega;
  std::vector<double> prob;
};

using EnvFamily = std::variant<TwoPoint, BetaLaw, Discrete>;

// Calibration templates: exactly one scalar left free.
struct TwoPointTemplate {
  double omega_hi = 0.0;
  double omega_lo = 0.0;  // p is free
};

struct BetaTemplate {
  double b = 0.0;  // a is free
};

namespace detail {

struct Atoms {
  std::vector<double> omega;
  std::vector<double> prob;
};

inline Atoms atoms_of(const EnvFamily& family) {
  Atoms a;
  if (const auto* tp = std::get_if<TwoPoint>(&family)) {
    a.omega = {tp->omega_hi, tp->omega_lo};
    a.prob = {tp->p, 1.0 - tp->p};
  } else if (const auto* d = std::get_if<Discrete>(&family)) {
    a.omega = d->omega;
    a.prob = d->prob;
  }
  return a;
}

// Commensurability of the distinct log-rho values (continued fractions with a
// bounded denominator). A commensurable support makes log rho_0 lattice.
inline bool log_rho_lattice(const std::vector<double>& omega) {
  std::vector<double> logs;
  for (double w : omega) {
    const double lr = std::log((1.0 - w) / w);
    if (std::abs(lr) > 1e-14) logs.push_back(lr);
  }
  if (logs.size() <= 1) return true;  // single atom: trivially lattice
  const double ref = logs[0];
  for (std::size_t i = 1; i < logs.size(); ++i) {
    double r = logs[i] / ref;
    // continued fraction expansion, denominators up to 1024
    double x = r;
    std::int64_t p_prev = 1, p_cur = static_cast<std::int64_t>(std::floor(x));
    std::int64_t q_prev = 0, q_cur = 1;
    bool rational = std::abs(r - static_cast<double>(p_cur)) < 1e-9;
    for (int it = 0; it < 40 && !rational; ++it) {
      const double frac = x - std::floor(x);
      if (frac < 1e-12) break;
      x = 1.0 / frac;
      const std::int64_t a_i = static_cast<std::int64_t>(std::floor(x));
      const std::int64_t p_next = a_i * p_cur + p_prev;
      const std::int64_t q_next = a_i * q_cur + q_prev;
      if (q_next > 1024) break;
      p_prev = p_cur; p_cur = p_next;
      q_prev = q_cur; q_cur = q_next;
      if (std::abs(r - static_cast<double>(p_cur) / static_cast<double>(q_cur)) < 1e-9) {
        rational = true;
      }
    }
    if (!rational) return false;
  }
  return true;
}

}  // namespace detail

// A calibrated, immutable environment distribution. Construction validates
// the support, requires right transience (<log rho> < 0), solves for the
// regularity index kappa, and records the derived speed.
class EnvDist {
 public:
  static EnvDist make(EnvFamily family) {
    EnvDist d(std::move(family));
    d.validate();
    // Environments with every rho below 1 have no finite regularity index
    // (the moment function never returns to 1); they are plain ballistic
    // walks, kept with kappa = +inf.
    try {
      d.kappa_ = d.solve_kappa_internal();
    } catch (const Error& e) {
      if (e.code() != "no_root") throw;
      d.kappa_ = std::numeric_limits<double>::infinity();
    }
    d.speed_ = d.kappa_ <= 1.0 ? 0.0
                               : (1.0 - d.rho_moment(1.0)) / (1.0 + d.rho_moment(1.0));
    d.ellipticity_finite_ =
        std::isfinite(d.kappa_) ? d.check_ellipticity(d.kappa_ * 1.1) : true;
    d.lattice_flag_ = d.detect_lattice();
    return d;
  }

  double kappa() const { return kappa_; }
  double speed() const { return speed_; }
  bool lattice_flagged() const { return lattice_flag_; }
  bool ellipticity_finite() const { return ellipticity_finite_; }
  const EnvFamily& family() const { return family_; }

  // <rho_0^s>. Exact finite sum for atomic families; tanh-sinh quadrature for
  // BetaLaw (relative error ~1e-10 inside the finite-moment range s < a).
  double rho_moment(double s) const {
    if (s < 0.0) fail("bad_argument", "rho_moment needs s >= 0");
    if (s == 0.0) return 1.0;
    if (const auto* bl = std::get_if<BetaLaw>(&family_)) {
      if (s >= bl->a) {
        fail("non_finite_moment",
             "<rho^s> diverges for BetaLaw(a=" + std::to_string(bl->a) +
                 ") at s=" + std::to_string(s));
      }
      const double a = bl->a, b = bl->b;
      const double norm = -log_beta(a, b);
      return integrate_01(
          [&](double w) {
            return std::exp(norm + (a - s - 1.0) * std::log(w) +
                            (b + s - 1.0) * std::log1p(-w));
          },
          1e-11);
    }
    const auto atoms = detail::atoms_of(family_);
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.omega.size(); ++i) {
      const double rho = (1.0 - atoms.omega[i]) / atoms.omega[i];
      acc += atoms.prob[i] * std::pow(rho, s);
    }
    return acc;
  }

  double log_rho_mean() const {
    if (const auto* bl = std::get_if<BetaLaw>(&family_)) {
      const double a = bl->a, b = bl->b;
      const double norm = -log_beta(a, b);
      return integrate_01(
          [&](double w) {
            return (std::log1p(-w) - std::log(w)) *
                   std::exp(norm + (a - 1.0) * std::log(w) + (b - 1.0) * std::log1p(-w));
          },
          1e-11);
    }
    const auto atoms = detail::atoms_of(family_);
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.omega.size(); ++i) {
      acc += atoms.prob[i] * std::log((1.0 - atoms.omega[i]) / atoms.omega[i]);
    }
    return acc;
  }

  double mean_omega() const { return site_moment(1, 0); }

  // <omega^u (1-omega)^d>; the annealed weight of u up-steps and d down-steps
  // taken from one site.
  double site_moment(int u, int d) const {
    if (const auto* bl = std::get_if<BetaLaw>(&family_)) {
      const double a = bl->a, b = bl->b;
      const double norm = -log_beta(a, b);
      return integrate_01(
          [&](double w) {
            return std::exp(norm + (a + u - 1.0) * std::log(w) +
                            (b + d - 1.0) * std::log1p(-w));
          },
          1e-11);
    }
    const auto atoms = detail::atoms_of(family_);
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.omega.size(); ++i) {
      acc += atoms.prob[i] * std::pow(atoms.omega[i], u) * std::pow(1.0 - atoms.omega[i], d);
    }
    return acc;
  }

  double sample_site(RngStream& rng) const {
    if (const auto* tp = std::get_if<TwoPoint>(&family_)) {
      return rng.bernoulli(tp->p) ? tp->omega_hi : tp->omega_lo;
    }
    if (const auto* bl = std::get_if<BetaLaw>(&family_)) {
      return rng.beta(bl->a, bl->b);
    }
    const auto& d = std::get<Discrete>(family_);
    double u = rng.uniform();
    for (std::size_t i = 0; i + 1 < d.omega.size(); ++i) {
      if (u < d.prob[i]) return d.omega[i];
      u -= d.prob[i];
    }
    return d.omega.back();
  }

 private:
  explicit EnvDist(EnvFamily family) : family_(std::move(family)) {}

  void validate() const {
    const auto check_omega = [](double w) {
      if (!(w > 0.0 && w < 1.0)) fail("bad_argument", "omega must lie strictly in (0,1)");
    };
    if (const auto* tp = std::get_if<TwoPoint>(&family_)) {
      check_omega(tp->omega_hi);
      check_omega(tp->omega_lo);
      if (!(tp->p > 0.0 && tp->p < 1.0)) fail("bad_argument", "TwoPoint weight p must be in (0,1)");
    } else if (const auto* bl = std::get_if<BetaLaw>(&family_)) {
      if (!(bl->a > 0.0 && bl->b > 0.0)) fail("bad_argument", "BetaLaw needs a,b > 0");
    } else {
      const auto& d = std::get<Discrete>(family_);
      if (d.omega.empty() || d.omega.size() != d.prob.size()) {
        fail("bad_argument", "Discrete needs matching non-empty omega/prob lists");
      }
      double total = 0.0;
      for (std::size_t i = 0; i < d.omega.size(); ++i) {
        check_omega(d.omega[i]);
        if (!(d.prob[i] > 0.0)) fail("bad_argument", "Discrete probabilities must be positive");
        total += d.prob[i];
      }
      if (std::abs(total - 1.0) > 1e-12) {
        fail("bad_argument", "Discrete probabilities must sum to 1 within 1e-12");
      }
    }
    if (!(log_rho_mean() < 0.0)) {
      fail("non_transient", "<log rho> >= 0: environment is not right-transient");
    }
  }

  bool check_ellipticity(double s) const {
    if (const auto* bl = std::get_if<BetaLaw>(&family_)) return s < bl->a;
    return true;  // atomic families have all moments
  }

  bool detect_lattice() const {
    if (std::holds_alternative<BetaLaw>(family_)) return false;
    return detail::log_rho_lattice(detail::atoms_of(family_).omega);
  }

  // Unique positive root of <rho^s> = 1. The map s -> <rho^s> is convex with
  // slope <log rho> < 0 at 0, so the root brackets cleanly once the moment
  // exceeds 1 (or diverges, for BetaLaw).
  double solve_kappa_internal() const {
    auto f = [&](double s) -> double {
      try {
        return rho_moment(s) - 1.0;
      } catch (const Error& e) {
        if (e.code() == "non_finite_moment") return std::numeric_limits<double>::infinity();
        throw;
      }
    };
    double lo = 1e-6;
    if (f(lo) >= 0.0) {
      // root below 1e-6 would mean <log rho> ~ 0; treat as non-transient scale
      fail("no_root", "<rho^s> does not dip below 1 near 0");
    }
    double hi = lo;
    bool bracketed = false;
    while (hi < 1024.0) {
      hi *= 2.0;
      if (f(hi) >= 0.0) {
        bracketed = true;
        break;
      }
      lo = hi;
    }
    if (!bracketed) fail("no_root", "<rho^s> stays below 1 on the search bracket");
    // convexity sanity on the bracket
    {
      const double fm = f(0.5 * (lo + hi));
      const double fl = f(lo), fh = std::isfinite(f(hi)) ? f(hi) : fm + 1.0;
      if (fm > 0.5 * (fl + fh) + 1e-9) {
        fail("no_root", "moment function failed convexity check on bracket");
      }
    }
    // bisection with a secant refinement to absolute tolerance 1e-10
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      const double fhi_b = f(hi);
      if (std::isfinite(fhi_b) && fhi_b > flo) {
        const double sec = hi - fhi_b * (hi - lo) / (fhi_b - flo);
        if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
      }
      const double fm = f(mid);
      if (fm < 0.0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  EnvFamily family_;
  double kappa_ = 0.0;
  double speed_ = 0.0;
  bool lattice_flag_ = false;
  bool ellipticity_finite_ = true;
};

inline double rho_moment(const EnvDist& dist, double s) { return dist.rho_moment(s); }

inline double solve_kappa(const EnvDist& dist) {
  if (!std::isfinite(dist.kappa())) {
    fail("no_root", "<rho^s> stays below 1 for every s: no finite regularity index");
  }
  return dist.kappa();
}

inline double speed(const EnvDist& dist) { return dist.speed(); }

inline double sample_site(const EnvDist& dist, RngStream& rng) {
  return dist.sample_site(rng);
}

// Monotone bisection on the free parameter until solve_kappa hits the target.
inline EnvDist calibrate_to_kappa(const TwoPointTemplate& tmpl, double target_kappa,
                                  double tol = 1e-8) {
  if (!(target_kappa > 0.0)) fail("unreachable_target", "target kappa must be positive");
  auto kappa_at = [&](double p) -> double {
    try {
      return EnvDist::make(TwoPoint{tmpl.omega_hi, tmpl.omega_lo, p}).kappa();
    } catch (const Error& e) {
      if (e.code() == "non_transient" || e.code() == "no_root") return 0.0;
      throw;
    }
  };
  // kappa increases with the weight on the more rightward atom
  double lo = 1e-9, hi = 1.0 - 1e-9;
  if (tmpl.omega_hi < tmpl.omega_lo) std::swap(lo, hi);
  const double k_lo = kappa_at(lo), k_hi = kappa_at(hi);
  if (!((k_lo - target_kappa) * (k_hi - target_kappa) <= 0.0)) {
    fail("unreachable_target", "no TwoPoint weight attains the requested kappa");
  }
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double km = kappa_at(mid);
    if (std::abs(km - target_kappa) < tol * 0.1) {
      lo = hi = mid;
      break;
    }
    if ((km < target_kappa) == (k_lo < target_kappa)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return EnvDist::make(TwoPoint{tmpl.omega_hi, tmpl.omega_lo, 0.5 * (lo + hi)});
}

inline EnvDist calibrate_to_kappa(const BetaTemplate& tmpl, double target_kappa,
                                  double tol = 1e-8) {
  if (!(target_kappa > 0.0)) fail("unreachable_target", "target kappa must be positive");
  auto kappa_at = [&](double a) -> double {
    try {
      return EnvDist::make(BetaLaw{a, tmpl.b}).kappa();
    } catch (const Error& e) {
      if (e.code() == "non_transient" || e.code() == "no_root") return 0.0;
      throw;
    }
  };
  double lo = tmpl.b + 1e-9;  // transience needs a > b
  double hi = tmpl.b + 1.0;
  while (kappa_at(hi) < target_kappa) {
    hi = tmpl.b + (hi - tmpl.b) * 2.0;
    if (hi - tmpl.b > 1e6) fail("unreachable_target", "no BetaLaw shape attains the requested kappa");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double km = kappa_at(mid);
    if (std::abs(km - target_kappa) < tol * 0.1) return EnvDist::make(BetaLaw{mid, tmpl.b});
    (km < target_kappa ? lo : hi) = mid;
  }
  return EnvDist::make(BetaLaw{0.5 * (lo + hi), tmpl.b});
}

}  // namespace coolwalk
