#include "wgs/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wgs {

namespace {

void require_positive(std::span<const double> p) {
  for (double x : p)
    if (!(x > 0.0)) throw std::invalid_argument("prices must be positive");
}

Bundle ces_demand(const Ces& d, std::span<const double> p, double b) {
  const std::size_t m = p.size();
  Bundle x(m, 0.0);
  if (b <= 0.0) return x;
  std::vector<double> w(m, -kInf);
  double top = -kInf;
  for (std::size_t k = 0; k < m; ++k) {
    if (d.beta[k] <= 0.0) continue;
    w[k] = std::log(d.beta[k]) + (1.0 - d.sigma) * std::log(p[k]);
    top = std::max(top, w[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    if (d.beta[k] > 0.0) sum += std::exp(w[k] - top);
  const double log_denominator = top + std::log(sum);
  for (std::size_t j = 0; j < m; ++j) {
    if (d.beta[j] <= 0.0) continue;
    x[j] = std::exp(std::log(d.beta[j]) - d.sigma * std::log(p[j]) + std::log(b) - log_denominator);
  }
  return x;
}

Bundle cobb_douglas_demand(const CobbDouglas& d, std::span<const double> p, double b) {
  Bundle x(p.size(), 0.0);
  if (b <= 0.0) return x;
  for (std::size_t j = 0; j < p.size(); ++j) x[j] = b * d.alpha[j] / p[j];
  return x;
}

// Goods whose bang-per-buck is within relative kCapTol of the best.
std::vector<std::size_t> mbb_set(const Linear& d, std::span<const double> p) {
  double best = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, d.v[j] / p[j]);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (d.v[j] / p[j] >= best * (1.0 - kCapTol)) out.push_back(j);
  return out;
}

Bundle linear_demand(const Linear& d, std::span<const double> p, double b) {
  Bundle x(p.size(), 0.0);
  if (b <= 0.0 || p.empty()) return x;
  const auto s = mbb_set(d, p);
  x[s.front()] = b / p[s.front()];
  return x;
}

Bundle simple_part(const std::variant<Ces, CobbDouglas>& part, std::span<const double> p, double b) {
  return std::visit([&](const auto& d) -> Bundle {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, Ces>) return ces_demand(d, p, b);
    else return cobb_douglas_demand(d, p, b);
  }, part);
}

DemandAnswer finish(Bundle x, std::span<const double> p) {
  DemandAnswer a;
  a.spend = dot(p, x);
  a.bundle = std::move(x);
  return a;
}

struct SegmentRef {
  std::size_t good;
  std::size_t index;
  double ratio;
  double length;
  bool held;
};

}  // namespace

double segment_utility(const std::vector<Segment>& segments, double amount) {
  double u = 0.0;
  for (const auto& s : segments) {
    if (amount <= 0.0) break;
    const double take = std::min(amount, s.length);
    u += take * s.rate;
    amount -= take;
  }
  return u;
}

double basplc_utility(const Basplc& utility, const Bundle& y) {
  double u = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) u += segment_utility(utility.goods[j], y[j]);
  return u;
}

double basplc_capped_utility(const Basplc& utility, const Bundle& y) {
  return std::min(utility.cap, basplc_utility(utility, y));
}

DemandAnswer gale_demand_basplc(const Basplc& utility, std::span<const double> p, double b,
                                const Bundle* held) {
  require_positive(p);
  const std::size_t m = p.size();
  DemandAnswer answer;
  answer.bundle.assign(m, 0.0);
  GaleCertificate cert;
  if (b <= 0.0) {
    answer.gale = cert;
    return answer;
  }

  std::vector<SegmentRef> order;
  for (std::size_t j = 0; j < m; ++j) {
    double before = 0.0;
    for (std::size_t t = 0; t < utility.goods[j].size(); ++t) {
      const auto& s = utility.goods[j][t];
      if (s.rate <= 0.0) break;
      // The held part of a segment is its own piece so that, among equal
      // ratios, every holding is covered before any segment is extended.
      const double mine = held ? std::clamp((*held)[j] - before, 0.0, s.length) : 0.0;
      if (mine > kTol * 1e-3) order.push_back({j, t, s.rate / p[j], mine, true});
      if (s.length - mine > 0.0) order.push_back({j, t, s.rate / p[j], s.length - mine, false});
      before += s.length;
    }
  }
  std::sort(order.begin(), order.end(), [](const SegmentRef& a, const SegmentRef& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.good != b.good) return a.good < b.good;
    if (a.index != b.index) return a.index < b.index;
    return a.held > b.held;
  });
  // Within runs of (numerically) equal ratio, held pieces go first. Pieces of
  // one good keep their relative order since segment ratios differ strictly.
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && order[hi].ratio >= order[lo].ratio * (1.0 - kCapTol)) ++hi;
    std::stable_partition(order.begin() + lo, order.begin() + hi, [](const SegmentRef& s) { return s.held; });
    lo = hi;
  }

  const double cap = utility.cap;
  double u = 0.0;
  std::size_t next = 0;
  bool partial = false;
  double partial_ratio = 0.0;
  for (; next < order.size(); ++next) {
    const auto& ref = order[next];
    const auto& seg = utility.goods[ref.good][ref.index];
    const double target = std::min(b * ref.ratio, cap);
    if (target <= u) break;
    const double amount = std::min(ref.length, (target - u) / seg.rate);
    answer.bundle[ref.good] += amount;
    u += amount * seg.rate;
    if (amount < ref.length) {
      partial = true;
      partial_ratio = ref.ratio;
      ++next;
      break;
    }
  }
  cert.utility = u;
  const bool capped = std::isfinite(cap) && u >= cap * (1.0 - kCapTol);
  if (capped) {
    if (partial) {
      cert.bang_per_buck = partial_ratio;
    } else {
      const double following = next < order.size() ? order[next].ratio : 0.0;
      cert.bang_per_buck = std::max(cap / b, following);
    }
    cert.gamma = std::max(0.0, b / cap - 1.0 / cert.bang_per_buck);
  } else {
    cert.bang_per_buck = u / b;
    cert.gamma = 0.0;
  }
  answer.spend = dot(p, answer.bundle);
  answer.gale = cert;
  return answer;
}

double gale_kkt_residual(const Basplc& utility, std::span<const double> p, double b,
                         const Bundle& y, const GaleCertificate& cert) {
  double worst = 0.0;
  const double u = basplc_utility(utility, y);
  if (cert.gamma < 0.0) worst = std::max(worst, -cert.gamma);
  if (std::isfinite(utility.cap)) {
    worst = std::max(worst, (u - utility.cap) / utility.cap);
    if (cert.gamma > 0.0) worst = std::max(worst, std::abs(u - utility.cap) / utility.cap);
  }
  if (b <= 0.0 || u <= 0.0) {
    // Zero bundle is only optimal when no segment has positive rate or b = 0.
    if (b > 0.0)
      for (const auto& segs : utility.goods)
        if (!segs.empty() && segs.front().rate > 0.0) return 1.0;
    return worst;
  }
  const double lambda = b / u - cert.gamma;  // money value of one unit of utility
  if (cert.bang_per_buck > 0.0)
    worst = std::max(worst, std::abs(lambda * cert.bang_per_buck - 1.0));
  for (std::size_t j = 0; j < y.size(); ++j) {
    double left = y[j];
    for (const auto& s : utility.goods[j]) {
      const double x = std::clamp(left, 0.0, s.length);
      left -= x;
      const double marginal = s.rate * lambda;
      const double full = s.length * (1.0 - 1e-12);
      if (x >= full) {
        worst = std::max(worst, (p[j] - marginal) / p[j]);
      } else if (x > 1e-15 * s.length) {
        worst = std::max(worst, std::abs(marginal - p[j]) / p[j]);
      } else {
        worst = std::max(worst, (marginal - p[j]) / p[j]);
      }
    }
    if (left > kTol) worst = std::max(worst, left);
  }
  return worst;
}

DemandAnswer demand(const DemandSpec& spec, std::span<const double> p, double b) {
  require_positive(p);
  return std::visit([&](const auto& d) -> DemandAnswer {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      return finish(linear_demand(d, p, b), p);
    } else if constexpr (std::is_same_v<T, Ces>) {
      return finish(ces_demand(d, p, b), p);
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      return finish(cobb_douglas_demand(d, p, b), p);
    } else if constexpr (std::is_same_v<T, Conic>) {
      Bundle x(p.size(), 0.0);
      for (const auto& part : d.parts) {
        const Bundle y = simple_part(part.demand, p, b);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += part.lambda * y[j];
      }
      return finish(std::move(x), p);
    } else {
      return gale_demand_basplc(d, p, b);
    }
  }, spec);
}

DemandAnswer demand_monotone(const DemandSpec& spec, std::span<const double> p, double b,
                             std::span<const double> p2, double b2, const Bundle& x) {
  require_positive(p2);
  if (const auto* lin = std::get_if<Linear>(&spec)) {
    Bundle y(p2.size(), 0.0);
    if (b2 <= 0.0) return finish(std::move(y), p2);
    const auto s = mbb_set(*lin, p2);
    std::vector<std::size_t> keep;
    for (std::size_t j : s)
      if (p2[j] == p[j] && x[j] > 0.0) keep.push_back(j);
    double spent = 0.0;
    for (std::size_t j : keep) {
      y[j] = x[j];
      spent += p2[j] * x[j];
    }
    const std::size_t sink = keep.empty() ? s.front() : keep.front();
    y[sink] += std::max(0.0, b2 - spent) / p2[sink];
    (void)b;
    return finish(std::move(y), p2);
  }
  if (const auto* gale = std::get_if<Basplc>(&spec)) return gale_demand_basplc(*gale, p2, b2, &x);
  return demand(spec, p2, b2);
}

std::optional<double> elasticity_bound(const DemandSpec& spec) {
  return std::visit([](const auto& d) -> std::optional<double> {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Ces>) {
      return d.sigma;
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      return 1.0;
    } else if constexpr (std::is_same_v<T, Conic>) {
      double f = 0.0;
      for (const auto& part : d.parts)
        f = std::max(f, std::visit([](const auto& q) {
          if constexpr (std::is_same_v<std::decay_t<decltype(q)>, Ces>) return q.sigma;
          else return 1.0;
        }, part.demand));
      return f;
    } else {
      return std::nullopt;
    }
  }, spec);
}

std::vector<std::uint8_t> interest_set(const DemandSpec& spec) {
  const std::size_t m = goods_count(spec);
  std::vector<std::uint8_t> out(m, 0);
  std::visit([&](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      for (std::size_t j = 0; j < m; ++j) out[j] = d.v[j] > 0.0;
    } else if constexpr (std::is_same_v<T, Ces>) {
      for (std::size_t j = 0; j < m; ++j) out[j] = d.beta[j] > 0.0;
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      for (std::size_t j = 0; j < m; ++j) out[j] = d.alpha[j] > 0.0;
    } else if constexpr (std::is_same_v<T, Conic>) {
      for (const auto& part : d.parts) {
        if (part.lambda <= 0.0) continue;
        std::visit([&](const auto& q) {
          const std::vector<double>* w = nullptr;
          if constexpr (std::is_same_v<std::decay_t<decltype(q)>, Ces>) w = &q.beta;
          else w = &q.alpha;
          for (std::size_t j = 0; j < m; ++j) out[j] = out[j] || (*w)[j] > 0.0;
        }, part.demand);
      }
    } else {
      for (std::size_t j = 0; j < m; ++j) out[j] = !d.goods[j].empty() && d.goods[j].front().rate > 0.0;
    }
  }, spec);
  return out;
}

double homogeneous_utility(const DemandSpec& spec, const Bundle& x) {
  return std::visit([&](const auto& d) -> double {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      return dot(d.v, x);
    } else if constexpr (std::is_same_v<T, Ces>) {
      const double r = (d.sigma - 1.0) / d.sigma;
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (d.beta[j] > 0.0) s += std::pow(d.beta[j], 1.0 / d.sigma) * std::pow(x[j], r);
      return std::pow(s, 1.0 / r);
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (d.alpha[j] > 0.0) s += d.alpha[j] * std::log(x[j]);
      return std::exp(s);
    } else if constexpr (std::is_same_v<T, Basplc>) {
      return basplc_capped_utility(d, x);
    } else {
      throw std::invalid_argument("conic demand has no utility representation");
    }
  }, spec);
}

}  // namespace wgs
