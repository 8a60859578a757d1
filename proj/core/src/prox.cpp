#include "mtgraph/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mtgraph/errors.hpp"

namespace mtgraph {

namespace {

// Boundary shared by the end of the flat piece at anchor n and the start of
// the affine piece after it: b - gamma * ((C - P) - P) + beta*gamma*(C*b - Sb),
// where P is the coefficient mass up to and including anchor n. Every
// boundary goes through this one expression so adjacent pieces meet exactly.
inline double boundary(double b, double total, double prefix, double gamma, double beta,
                       double weighted_sum) {
  return b - gamma * ((total - prefix) - prefix) + beta * gamma * (total * b - weighted_sum);
}

inline double affine_piece(double v, double total, double prefix, double gamma, double beta,
                           double weighted_sum) {
  return (v + gamma * ((total - prefix) - prefix) + beta * gamma * weighted_sum) /
         (1.0 + beta * gamma * total);
}

void sort_and_merge(std::vector<double>& b, std::vector<double>& c) {
  // Insertion sort: neighborhoods are small.
  for (std::size_t i = 1; i < b.size(); ++i) {
    const double bi = b[i];
    const double ci = c[i];
    std::size_t j = i;
    while (j > 0 && b[j - 1] > bi) {
      b[j] = b[j - 1];
      c[j] = c[j - 1];
      --j;
    }
    b[j] = bi;
    c[j] = ci;
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (out > 0 && b[out - 1] == b[i]) {
      c[out - 1] += c[i];
    } else {
      b[out] = b[i];
      c[out] = c[i];
      ++out;
    }
  }
  b.resize(out);
  c.resize(out);
}

struct L0Candidates {
  bool includes_v = false;
  double best = 0.0;  // selected value
};

// Shared two-case analysis; `emit` receives every anchor in the argmin set.
template <class Emit>
L0Candidates l0_analysis(double v, std::span<const double> b, std::span<const double> c,
                         double gamma, double lambda, Emit&& emit) {
  L0Candidates result;
  if (b.empty()) {
    result.includes_v = true;
    result.best = v;
    return result;
  }
  const double inv_two_gamma = 1.0 / (2.0 * gamma);
  double f_min = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  bool v_is_anchor = false;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double gap = b[j] - v;
    const double reward = lambda * c[j];
    const double penalty = gap * gap * inv_two_gamma;
    f_min = std::min(f_min, penalty - reward);
    scale = std::max(scale, penalty + reward);
    v_is_anchor = v_is_anchor || b[j] == v;
  }
  const double tol = 16.0 * std::numeric_limits<double>::epsilon() * scale;

  bool take_anchors = true;
  if (!v_is_anchor) {
    if (f_min > tol) {
      take_anchors = false;
      result.includes_v = true;
    } else if (f_min >= -tol) {
      result.includes_v = true;
    }
  }

  bool have_best = false;
  auto consider = [&](double x) {
    if (!have_best || std::abs(x) < std::abs(result.best) ||
        (std::abs(x) == std::abs(result.best) && x < result.best)) {
      result.best = x;
      have_best = true;
    }
  };
  if (result.includes_v) consider(v);
  if (take_anchors) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double gap = b[j] - v;
      const double f = gap * gap * inv_two_gamma - lambda * c[j];
      if (f <= f_min + tol) {
        emit(b[j]);
        consider(b[j]);
      }
    }
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

ProxProblem ProxProblem::make(std::vector<Anchor> anchors, double gamma, double beta,
                              double lambda) {
  std::vector<double> b;
  std::vector<double> c;
  b.reserve(anchors.size());
  c.reserve(anchors.size());
  for (const auto& a : anchors) {
    if (!(a.c > 0.0) || !std::isfinite(a.c) || !std::isfinite(a.b)) {
      throw InvalidArgument("anchor coefficients must be positive and anchors finite");
    }
    b.push_back(a.b);
    c.push_back(a.c);
  }
  sort_and_merge(b, c);
  ProxProblem problem;
  problem.anchors.reserve(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) problem.anchors.push_back(Anchor{b[j], c[j]});
  problem.gamma = gamma;
  problem.beta = beta;
  problem.lambda = lambda;
  problem.validate();
  return problem;
}

void ProxProblem::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be nonnegative");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    if (!(anchors[j].c > 0.0) || !std::isfinite(anchors[j].c)) {
      throw InvalidArgument("anchor coefficient " + std::to_string(j) + " must be positive");
    }
    if (!std::isfinite(anchors[j].b)) {
      throw InvalidArgument("anchor " + std::to_string(j) + " is not finite");
    }
    if (j > 0 && !(anchors[j - 1].b < anchors[j].b)) {
      throw InvalidArgument("anchors must be strictly increasing (merge duplicates first)");
    }
  }
}

ProxPartition elastic_net_partition(const ProxProblem& problem) {
  problem.validate();
  ProxPartition part;
  const auto& a = problem.anchors;
  if (a.empty()) {
    part.head_end = std::numeric_limits<double>::infinity();
    return part;
  }
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& anchor : a) {
    total += anchor.c;
    weighted += anchor.c * anchor.b;
  }
  const double g = problem.gamma;
  const double beta = problem.beta;
  part.head_end = boundary(a.front().b, total, 0.0, g, beta, weighted);
  double prefix = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double lo = boundary(a[n].b, total, prefix, g, beta, weighted);
    prefix += a[n].c;
    const double hi = boundary(a[n].b, total, prefix, g, beta, weighted);
    part.at_anchor.push_back(Interval{lo, hi});
    const double next_hi = n + 1 < a.size() ? boundary(a[n + 1].b, total, prefix, g, beta, weighted)
                                            : std::numeric_limits<double>::infinity();
    part.after_anchor.push_back(Interval{hi, next_hi});
  }
  return part;
}

namespace detail {

double prox_elastic_net_sorted(double v, std::span<const double> b, std::span<const double> c,
                               double gamma, double beta) {
  const std::size_t count = b.size();
  if (count == 0) return v;
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    total += c[j];
    weighted += c[j] * b[j];
  }
  if (v < boundary(b[0], total, 0.0, gamma, beta, weighted)) {
    return std::min(affine_piece(v, total, 0.0, gamma, beta, weighted), b[0]);
  }
  double prefix = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    prefix += c[n];
    if (v < boundary(b[n], total, prefix, gamma, beta, weighted)) return b[n];
    const double x = affine_piece(v, total, prefix, gamma, beta, weighted);
    if (n + 1 == count) return std::max(x, b[n]);
    if (v < boundary(b[n + 1], total, prefix, gamma, beta, weighted)) {
      return std::clamp(x, b[n], b[n + 1]);
    }
  }
  return v;  // unreachable: the last piece is unbounded
}

double prox_l0_selected(double v, std::span<const double> b, std::span<const double> c,
                        double gamma, double lambda) {
  return l0_analysis(v, b, c, gamma, lambda, [](double) {}).best;
}

}  // namespace detail

double prox_elastic_net_sum(double v, const ProxProblem& problem) {
  problem.validate();
  std::vector<double> b;
  std::vector<double> c;
  b.reserve(problem.anchors.size());
  c.reserve(problem.anchors.size());
  for (const auto& a : problem.anchors) {
    b.push_back(a.b);
    c.push_back(a.c);
  }
  return detail::prox_elastic_net_sorted(v, b, c, problem.gamma, problem.beta);
}

double prox_l1_sum(double v, const ProxProblem& problem) {
  ProxProblem l1 = problem;
  l1.beta = 0.0;
  return prox_elastic_net_sum(v, l1);
}

ProxResult prox_l0_sum(double v, const ProxProblem& problem) {
  if (problem.anchors.empty()) problem.validate();
  // Anchors only need to be distinct here; merge any duplicates.
  std::vector<double> b;
  std::vector<double> c;
  for (const auto& a : problem.anchors) {
    b.push_back(a.b);
    c.push_back(a.c);
  }
  sort_and_merge(b, c);
  ProxProblem checked = problem;
  checked.anchors.clear();
  for (std::size_t j = 0; j < b.size(); ++j) checked.anchors.push_back(Anchor{b[j], c[j]});
  checked.validate();

  ProxResult result;
  const auto info = l0_analysis(v, b, c, problem.gamma, problem.lambda,
                                [&](double x) { result.values.push_back(x); });
  if (info.includes_v) result.values.push_back(v);
  std::sort(result.values.begin(), result.values.end());
  result.values.erase(std::unique(result.values.begin(), result.values.end()), result.values.end());
  result.selected = info.best;
  return result;
}

Eigen::VectorXd reweight_coefficients(const Eigen::VectorXd& delta, double base_p,
                                      double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("reweighting epsilon must be positive");
  return (base_p / (epsilon + delta.array().abs())).matrix();
}

// ---------------------------------------------------------------------------

void Regularizer::validate() const {
  switch (kind) {
    case Kind::reweighted_l1:
      if (!(epsilon > 0.0)) throw InvalidArgument("reweighted_l1 requires epsilon > 0");
      break;
    case Kind::l0:
      if (!(lambda > 0.0)) throw InvalidArgument("l0 requires lambda > 0");
      break;
    case Kind::elastic_net:
      if (!(beta >= 0.0)) throw InvalidArgument("elastic_net requires beta >= 0");
      break;
    case Kind::l1:
    case Kind::squared_l2:
      break;
  }
}

std::string_view to_string(Regularizer::Kind kind) {
  switch (kind) {
    case Regularizer::Kind::l1: return "l1";
    case Regularizer::Kind::reweighted_l1: return "reweighted_l1";
    case Regularizer::Kind::l0: return "l0";
    case Regularizer::Kind::elastic_net: return "elastic_net";
    case Regularizer::Kind::squared_l2: return "squared_l2";
  }
  return "unknown";
}

Regularizer::Kind parse_regularizer_kind(std::string_view name) {
  for (auto kind : {Regularizer::Kind::l1, Regularizer::Kind::reweighted_l1, Regularizer::Kind::l0,
                    Regularizer::Kind::elastic_net, Regularizer::Kind::squared_l2}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown regularizer '" + std::string(name) + "'");
}

std::string describe(const Regularizer& regularizer) {
  std::ostringstream os;
  os << to_string(regularizer.kind);
  switch (regularizer.kind) {
    case Regularizer::Kind::reweighted_l1: os << "(eps=" << regularizer.epsilon << ')'; break;
    case Regularizer::Kind::l0: os << "(lambda=" << regularizer.lambda << ')'; break;
    case Regularizer::Kind::elastic_net: os << "(beta=" << regularizer.beta << ')'; break;
    default: break;
  }
  return os.str();
}

void SocialStepWorkspace::reserve(std::size_t neighbors) {
  b_.reserve(neighbors);
  c_.reserve(neighbors);
}

void prox_social_step(const Eigen::VectorXd& psi_k, std::span<const NeighborEstimate> neighbors,
                      double step, const Regularizer& regularizer, SocialStepWorkspace& ws,
                      Eigen::VectorXd& out) {
  out = psi_k;
  if (neighbors.empty() || step == 0.0) return;
  if (!(step > 0.0)) throw InvalidArgument("social step size must be nonnegative");
  const auto dim = psi_k.size();
  for (const auto& n : neighbors) {
    if (n.psi == nullptr || n.psi->size() != dim) {
      throw InvalidArgument("neighbor estimate dimension mismatch");
    }
  }

  if (regularizer.kind == Regularizer::Kind::squared_l2) {
    double mass = 0.0;
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(dim);
    for (const auto& n : neighbors) {
      mass += n.p;
      pull += n.p * *n.psi;
    }
    out = (psi_k + 2.0 * step * pull) / (1.0 + 2.0 * step * mass);
    return;
  }

  const double beta = regularizer.kind == Regularizer::Kind::elastic_net ? regularizer.beta : 0.0;
  for (Eigen::Index m = 0; m < dim; ++m) {
    const double v = psi_k[m];
    ws.b_.clear();
    ws.c_.clear();
    for (const auto& n : neighbors) {
      const double anchor = (*n.psi)[m];
      double coeff = n.p;
      if (regularizer.kind == Regularizer::Kind::reweighted_l1) {
        coeff /= regularizer.epsilon + std::abs(v - anchor);
      }
      ws.b_.push_back(anchor);
      ws.c_.push_back(coeff);
    }
    sort_and_merge(ws.b_, ws.c_);
    if (regularizer.kind == Regularizer::Kind::l0) {
      out[m] = detail::prox_l0_selected(v, ws.b_, ws.c_, step, regularizer.lambda);
    } else {
      out[m] = detail::prox_elastic_net_sorted(v, ws.b_, ws.c_, step, beta);
    }
  }
}

Eigen::VectorXd prox_social_step(const Eigen::VectorXd& psi_k,
                                 std::span<const NeighborEstimate> neighbors, double step,
                                 const Regularizer& regularizer) {
  SocialStepWorkspace ws;
  ws.reserve(neighbors.size());
  Eigen::VectorXd out;
  prox_social_step(psi_k, neighbors, step, regularizer, ws, out);
  return out;
}

}  // namespace mtgraph
