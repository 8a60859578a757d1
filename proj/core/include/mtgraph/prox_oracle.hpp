#pragma once

#include <functional>
#include <span>

#include "mtgraph/prox.hpp"

namespace mtgraph {

/// Scalar objective evaluated in extended precision.
using ScalarObjective = std::function<long double(long double)>;

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Interval covering v and every anchor with a margin of 10 * gamma * sum_j c_j.
SearchInterval oracle_interval(double v, const ProxProblem& problem);

/// Grid minimizer of objective(x) + (x - v)^2 / (2 gamma) over `interval`.
///
/// Brute-force reference for testing the closed forms. The grid is searched
/// coarse-to-fine (each level re-grids the two cells around the previous
/// winner) until the spacing reaches `grid_step`, then one ternary-search pass
/// refines inside the last bracket. Valid for objectives that are convex on
/// the interval; accuracy is within `grid_step`.
///
/// When `anchors` is non-empty the interval must cover each anchor and v with
/// the margin of oracle_interval, otherwise InvalidArgument is thrown.
double brute_force_prox_oracle(double v, const ScalarObjective& objective, double gamma,
                               SearchInterval interval, double grid_step,
                               std::span<const Anchor> anchors = {});

/// Objective of an elastic-net-sum problem (beta taken from the problem).
ScalarObjective elastic_net_sum_objective(const ProxProblem& problem);

}  // namespace mtgraph
