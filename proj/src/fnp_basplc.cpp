#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wgs/fnp.hpp"

namespace wgs {

namespace {

// Fill state of one good: index of the first segment that is not full and the
// amount already taken from it.
struct Position {
  std::size_t segment = 0;
  double fill = 0.0;
};

Position locate(const std::vector<Segment>& segs, double amount) {
  Position pos;
  while (pos.segment < segs.size()) {
    const double len = segs[pos.segment].length;
    if (amount < len * (1.0 - 1e-12)) {
      pos.fill = std::max(0.0, amount);
      return pos;
    }
    amount -= len;
    ++pos.segment;
  }
  return pos;
}

bool same_ratio(double a, double b) { return std::abs(a - b) <= kCapTol * std::max(a, b); }

}  // namespace

FnpResult fnp_basplc(const Basplc& utility, const FnpInput& in, const GaleCertificate& cert) {
  const std::size_t m = in.start.size();
  const auto q = in.caps;
  const double b = in.budget;
  const double cap = utility.cap;
  FnpResult r;
  r.prices = in.start;
  r.bundle = in.held;
  r.gale = cert;
  if (b <= 0.0 || !(cert.bang_per_buck > 0.0)) return r;

  auto& price = r.prices.value;
  auto& flag = r.prices.at_cap;
  std::vector<Position> pos(m);
  double util = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    pos[j] = locate(utility.goods[j], in.held[j]);
    util += segment_utility(utility.goods[j], in.held[j]);
  }
  auto active = [&](std::size_t j) { return pos[j].segment < utility.goods[j].size(); };
  auto rate = [&](std::size_t j) { return utility.goods[j][pos[j].segment].rate; };
  auto take_rest = [&](std::size_t j) {
    const auto& s = utility.goods[j][pos[j].segment];
    util += s.rate * (s.length - pos[j].fill);
    pos[j].fill = 0.0;
    ++pos[j].segment;
  };
  auto set_cap = [&](std::size_t j) {
    price[j] = q[j];
    flag[j] = 1;
  };

  double beta = cert.bang_per_buck;
  auto bound = [&] { return std::min(cap, b * beta); };
  auto finished = [&] { return util >= bound() * (1.0 - 1e-12); };

  // Stage I: restore complementarity for goods whose active segment beats β.
  for (std::size_t j = 0; j < m; ++j) {
    while (active(j) && rate(j) / price[j] > beta * (1.0 + kCapTol)) {
      const double target = rate(j) / beta;
      if (target < q[j] * (1.0 - kCapTol)) {
        price[j] = target;
        break;
      }
      set_cap(j);
      if (rate(j) / q[j] > beta * (1.0 + kCapTol)) take_rest(j);
      else break;
    }
  }

  // Stage II.
  std::vector<std::uint8_t> in_a(m, 0);
  for (std::size_t j = 0; j < m; ++j)
    if (active(j) && rate(j) > 0.0 && same_ratio(rate(j) / price[j], beta)) in_a[j] = 1;

  bool in_run = false;
  while (!finished()) {
    std::size_t capped = m;
    for (std::size_t j = 0; j < m && capped == m; ++j)
      if (in_a[j] && flag[j]) capped = j;
    if (capped < m) {
      in_run = false;
      const auto& s = utility.goods[capped][pos[capped].segment];
      const double room = s.length - pos[capped].fill;
      const double wanted = (bound() - util) / s.rate;
      if (room <= wanted) {
        take_rest(capped);
        in_a[capped] = 0;
        continue;
      }
      pos[capped].fill += wanted;
      util = bound();
      break;
    }

    bool any_a = false;
    double alpha_cap = kInf;
    for (std::size_t j = 0; j < m; ++j)
      if (in_a[j]) {
        any_a = true;
        alpha_cap = std::min(alpha_cap, q[j] / price[j]);
      }
    const double alpha_bound = util > 0.0 ? b * beta / util : kInf;
    double alpha_enter = kInf;
    for (std::size_t j = 0; j < m; ++j)
      if (!in_a[j] && active(j) && rate(j) > 0.0) alpha_enter = std::min(alpha_enter, beta * price[j] / rate(j));
    const double alpha = std::min({alpha_cap, alpha_bound, alpha_enter});
    if (!std::isfinite(alpha)) throw std::logic_error("capped piecewise-linear price raising has no event");

    if (any_a && !in_run) {
      ++r.steps;
      in_run = true;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_a[j]) continue;
      if (same_ratio(alpha, q[j] / price[j]) || price[j] * alpha >= q[j] * (1.0 - kCapTol)) set_cap(j);
      else price[j] *= alpha;
    }
    if (alpha >= alpha_bound) {
      beta = util / b;
      break;
    }
    beta /= alpha;
    for (std::size_t j = 0; j < m; ++j)
      if (!in_a[j] && active(j) && rate(j) > 0.0 && same_ratio(rate(j) / price[j], beta)) in_a[j] = 1;
  }

  for (std::size_t j = 0; j < m; ++j) {
    double amount = 0.0;
    for (std::size_t t = 0; t < pos[j].segment; ++t) amount += utility.goods[j][t].length;
    r.bundle[j] = std::max(in.held[j], amount + pos[j].fill);
  }
  GaleCertificate out;
  out.utility = util;
  out.bang_per_buck = beta;
  const bool capped = std::isfinite(cap) && util >= cap * (1.0 - 1e-12);
  out.gamma = capped ? std::max(0.0, b / cap - 1.0 / beta) : 0.0;
  if (!capped) out.bang_per_buck = util / b;
  r.gale = out;
  return r;
}

}  // namespace wgs
