#include "mtgraph/prox_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mtgraph/errors.hpp"

namespace mtgraph {

namespace {

constexpr int kCellsPerLevel = 400;

}  // namespace

SearchInterval oracle_interval(double v, const ProxProblem& problem) {
  double total = 0.0;
  double lo = v;
  double hi = v;
  for (const auto& a : problem.anchors) {
    total += a.c;
    lo = std::min(lo, a.b);
    hi = std::max(hi, a.b);
  }
  const double margin = 10.0 * problem.gamma * total;
  return {lo - margin, hi + margin};
}

double brute_force_prox_oracle(double v, const ScalarObjective& objective, double gamma,
                               SearchInterval interval, double grid_step,
                               std::span<const Anchor> anchors) {
  if (!(gamma > 0.0)) throw InvalidArgument("oracle gamma must be positive");
  if (!(grid_step > 0.0)) throw InvalidArgument("oracle grid step must be positive");
  if (!(interval.lo < interval.hi)) throw InvalidArgument("oracle interval is empty");
  if (!anchors.empty()) {
    double total = 0.0;
    for (const auto& a : anchors) total += a.c;
    const double margin = 10.0 * gamma * total;
    for (const auto& a : anchors) {
      if (a.b - margin < interval.lo || a.b + margin > interval.hi) {
        throw InvalidArgument("oracle interval does not cover anchors with the required margin");
      }
    }
    if (v < interval.lo || v > interval.hi) {
      throw InvalidArgument("oracle interval does not contain v");
    }
  }

  const long double lv = v;
  const long double inv_two_gamma = 1.0L / (2.0L * static_cast<long double>(gamma));
  auto total = [&](long double x) {
    const long double d = x - lv;
    return objective(x) + d * d * inv_two_gamma;
  };

  long double lo = interval.lo;
  long double hi = interval.hi;
  for (;;) {
    const long double spacing = (hi - lo) / kCellsPerLevel;
    long double best_x = lo;
    long double best_f = total(lo);
    for (int i = 1; i <= kCellsPerLevel; ++i) {
      const long double x = lo + spacing * i;
      const long double f = total(x);
      if (f < best_f) {
        best_f = f;
        best_x = x;
      }
    }
    const long double new_lo = std::max(lo, best_x - spacing);
    const long double new_hi = std::min(hi, best_x + spacing);
    lo = new_lo;
    hi = new_hi;
    if (spacing <= grid_step) break;
  }

  // Ternary refinement inside the final bracket.
  for (int iter = 0; iter < 200 && hi - lo > 1e-15L * (1.0L + std::fabs(lo)); ++iter) {
    const long double m1 = lo + (hi - lo) / 3.0L;
    const long double m2 = hi - (hi - lo) / 3.0L;
    if (total(m1) < total(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

ScalarObjective elastic_net_sum_objective(const ProxProblem& problem) {
  const std::vector<Anchor> anchors = problem.anchors;
  const long double beta = problem.beta;
  return [anchors, beta](long double x) {
    long double sum = 0.0L;
    for (const auto& a : anchors) {
      const long double d = x - static_cast<long double>(a.b);
      sum += static_cast<long double>(a.c) * (std::fabs(d) + 0.5L * beta * d * d);
    }
    return sum;
  };
}

}  // namespace mtgraph
