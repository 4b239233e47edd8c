#include "lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace tps::pinn::detail {

namespace {

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

struct Probe {
  double step{};
  double value{};
  double slope{};  // directional derivative
};

// Minimizer of the cubic through two probes, safeguarded into the bracket.
double interpolate(const Probe& a, const Probe& b) {
  const double lo = std::min(a.step, b.step);
  const double hi = std::max(a.step, b.step);
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double cand = b.step - (b.step - a.step) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    if (std::isfinite(cand)) t = cand;
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(t, lo + margin, hi - margin);
}

}  // namespace

LbfgsOutcome lbfgs_minimize(const Objective& f, Eigen::VectorXd& x, std::size_t iterations, std::size_t memory,
                            std::size_t max_line_search,
                            const std::function<void(std::size_t, double)>& on_iteration) {
  LbfgsOutcome out;
  Eigen::VectorXd g(x.size());
  double fx = f(x, g);
  ++out.evaluations;
  out.value = fx;

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd trial(x.size());
  Eigen::VectorXd g_trial(x.size());

  for (std::size_t it = 0; it < iterations; ++it) {
    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd d = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    d = -d;
    double slope0 = g.dot(d);
    if (!(slope0 < 0.0)) {  // lost descent: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope0 = -g.squaredNorm();
    }
    const double first_step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(d.norm(), 1e-300)) : 1.0;

    // strong-Wolfe search with bracketing and cubic zoom
    const Probe origin{0.0, fx, slope0};
    Probe prev = origin;
    Probe lo{}, hi{};
    bool bracketed = false;
    bool accepted = false;
    double step = first_step;
    Probe cur{};
    for (std::size_t ls = 0; ls < max_line_search; ++ls) {
      trial = x + step * d;
      const double ft = f(trial, g_trial);
      ++out.evaluations;
      cur = {step, ft, g_trial.dot(d)};
      if (!bracketed) {
        if (!std::isfinite(ft) || ft > fx + kC1 * step * slope0 || (ls > 0 && ft >= prev.value)) {
          lo = prev;
          hi = cur;
          bracketed = true;
        } else if (std::abs(cur.slope) <= -kC2 * slope0) {
          accepted = true;
          break;
        } else if (cur.slope >= 0.0) {
          lo = cur;
          hi = prev;
          bracketed = true;
        } else {
          prev = cur;
          step *= 2.0;
          continue;
        }
      } else {
        if (!std::isfinite(ft) || ft > fx + kC1 * step * slope0 || ft >= lo.value) {
          hi = cur;
        } else {
          if (std::abs(cur.slope) <= -kC2 * slope0) {
            accepted = true;
            break;
          }
          if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = cur;
        }
      }
      if (!std::isfinite(hi.value)) {
        step = 0.5 * (lo.step + hi.step);
      } else {
        step = interpolate(lo, hi);
      }
      if (std::abs(hi.step - lo.step) < 1e-14 * std::max(1.0, lo.step)) break;
    }
    if (!accepted) {
      // fall back to the best sufficient-decrease point found, if any
      if (bracketed && lo.step > 0.0 && lo.value < fx) {
        step = lo.step;
        trial = x + step * d;
        const double ft = f(trial, g_trial);
        ++out.evaluations;
        cur = {step, ft, g_trial.dot(d)};
      } else {
        out.stalled = true;
        break;
      }
    }

    Eigen::VectorXd s = trial - x;
    Eigen::VectorXd y = g_trial - g;
    const double sy = s.dot(y);
    x = trial;
    g = g_trial;
    fx = cur.value;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    ++out.iterations;
    out.value = fx;
    if (on_iteration) on_iteration(it, fx);
  }
  return out;
}

}  // namespace tps::pinn::detail
