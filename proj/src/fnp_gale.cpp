#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wgs/fnp.hpp"

namespace wgs {

namespace {

// b·ln u and its gradient for the CES / Cobb-Douglas utility forms.
struct LogUtility {
  const DemandSpec& spec;
  double budget;

  double value(const Bundle& y) const {
    if (const auto* cd = std::get_if<CobbDouglas>(&spec)) {
      double s = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (cd->alpha[j] <= 0.0) continue;
        if (y[j] <= 0.0) return -kInf;
        s += cd->alpha[j] * std::log(y[j]);
      }
      return budget * s;
    }
    const auto& ces = std::get<Ces>(spec);
    const double r = (ces.sigma - 1.0) / ces.sigma;
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
      if (ces.beta[j] > 0.0 && y[j] > 0.0) s += std::pow(ces.beta[j], 1.0 / ces.sigma) * std::pow(y[j], r);
    if (s <= 0.0) return -kInf;
    return budget * std::log(s) / r;
  }

  void gradient(const Bundle& y, Bundle& g) const {
    if (const auto* cd = std::get_if<CobbDouglas>(&spec)) {
      for (std::size_t j = 0; j < y.size(); ++j)
        g[j] = cd->alpha[j] > 0.0 ? budget * cd->alpha[j] / y[j] : 0.0;
      return;
    }
    const auto& ces = std::get<Ces>(spec);
    const double r = (ces.sigma - 1.0) / ces.sigma;
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
      if (ces.beta[j] > 0.0 && y[j] > 0.0) s += std::pow(ces.beta[j], 1.0 / ces.sigma) * std::pow(y[j], r);
    for (std::size_t j = 0; j < y.size(); ++j)
      g[j] = ces.beta[j] > 0.0 ? budget * std::pow(ces.beta[j], 1.0 / ces.sigma) * std::pow(y[j], -1.0 / ces.sigma) / s
                               : 0.0;
  }
};

double stationarity(double v, double lo, double hi, double slope, double price) {
  // Relative violation of the box-constrained first-order condition for one variable.
  if (hi <= lo) return 0.0;
  if (v <= lo) return std::max(0.0, slope) / price;
  if (v >= hi) return std::max(0.0, -slope) / price;
  return std::abs(slope) / price;
}

}  // namespace

FnpResult fnp_gale_convex(const DemandSpec& spec, const FnpInput& in, const GaleConvexOptions& opts) {
  if (!std::holds_alternative<Ces>(spec) && !std::holds_alternative<CobbDouglas>(spec))
    throw std::invalid_argument("the two-price convex program needs a CES or Cobb-Douglas utility");
  const std::size_t m = in.start.size();
  const auto& p = in.start.value;
  const auto q = in.caps;
  const auto& c = in.held;
  FnpResult r;
  r.prices = in.start;
  r.demand_tol = 1e-6;
  if (in.budget <= 0.0) {
    r.bundle.assign(m, 0.0);
    return r;
  }
  const LogUtility f{spec, in.budget};

  // y1 is bought at the low prices (bounded by holdings), y2 at the caps.
  Bundle y1 = c;
  Bundle y2(m, 0.0);
  {
    const auto at_cap = demand(spec, std::vector<double>(q.begin(), q.end()), in.budget).bundle;
    for (std::size_t j = 0; j < m; ++j) y2[j] = std::max(0.0, at_cap[j] - c[j]);
  }
  Bundle y(m), g(m), n1(m), n2(m), ny(m), scale(m);
  auto objective = [&](const Bundle& a, const Bundle& b2, Bundle& total) {
    for (std::size_t j = 0; j < m; ++j) total[j] = a[j] + b2[j];
    return f.value(total) - dot(p, a) - dot(q, b2);
  };
  double value = objective(y1, y2, y);
  double step = 1.0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    f.gradient(y, g);
    double res = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      res = std::max(res, stationarity(y1[j], 0.0, c[j], g[j] - p[j], p[j]));
      res = std::max(res, stationarity(y2[j], 0.0, kInf, g[j] - q[j], q[j]));
      scale[j] = y[j] / std::max(g[j], p[j]);
    }
    r.residual = res;
    if (res <= opts.tolerance) break;
    step = std::min(1.0, step * 2.0);
    bool moved = false;
    while (step > 1e-20) {
      double predicted = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        n1[j] = std::clamp(y1[j] + step * scale[j] * (g[j] - p[j]), 0.0, c[j]);
        n2[j] = std::max(0.0, y2[j] + step * scale[j] * (g[j] - q[j]));
        predicted += (g[j] - p[j]) * (n1[j] - y1[j]) + (g[j] - q[j]) * (n2[j] - y2[j]);
      }
      const double next = objective(n1, n2, ny);
      if (std::isfinite(next) && next >= value + 1e-4 * predicted) {
        moved = true;
        y1.swap(n1);
        y2.swap(n2);
        y.swap(ny);
        value = next;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  f.gradient(y, g);
  r.converged = r.residual <= 1e-6;
  r.steps = it;

  for (std::size_t j = 0; j < m; ++j) {
    // When both prices coincide the low-price variable is filled first.
    if (p[j] == q[j]) {
      const double shift = std::min(y2[j], c[j] - y1[j]);
      y1[j] += shift;
      y2[j] -= shift;
    }
    if (r.prices.at_cap[j]) continue;
    if (y2[j] > 1e-12 * std::max(1.0, y[j]) || g[j] >= q[j] * (1.0 - kCapTol)) {
      r.prices.value[j] = q[j];
      r.prices.at_cap[j] = 1;
    } else {
      r.prices.value[j] = std::clamp(g[j], p[j], q[j]);
    }
  }
  // Report the closed-form demand at p̃; goods below their cap keep exactly the holdings.
  const auto x = demand(spec, r.prices.value, in.budget).bundle;
  r.bundle.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    r.bundle[j] = r.prices.at_cap[j] ? std::max(c[j], x[j]) : c[j];
  return r;
}

}  // namespace wgs
