#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mtgraph {

/// Symmetric K x K link indicator; diagonal must be false.
using Adjacency = std::vector<std::vector<bool>>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// One directed view of an undirected link, as seen from its owning agent.
struct Link {
  std::size_t neighbor = 0;
  double rho = 0.0;  ///< directed weight rho_{k,neighbor}
  double p = 0.0;    ///< symmetrized weight (rho_kl + rho_lk) / 2
};

/// Undirected link k < l with its symmetrized weight.
struct Edge {
  std::size_t first = 0;
  std::size_t second = 0;
  double p = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Connected, undirected agent graph with per-link co-regularization weights.
///
/// Immutable after construction. Neighbor lists exclude the agent itself and
/// are sorted by neighbor index.
class Network {
 public:
  /// Validates the adjacency (symmetric, zero diagonal, connected) and the
  /// directed weights (positive on every link), then symmetrizes them.
  static Network from_adjacency(const Adjacency& adjacency, const Eigen::MatrixXd& rho,
                                std::optional<std::vector<Point2>> coordinates = std::nullopt);

  std::size_t size() const noexcept { return links_.size(); }
  std::span<const Link> links(std::size_t agent) const { return links_.at(agent); }
  std::size_t degree(std::size_t agent) const { return links_.at(agent).size(); }

  /// Symmetrized weight p_kl; zero when k and l are not linked.
  double p(std::size_t k, std::size_t l) const;
  bool linked(std::size_t k, std::size_t l) const;

  std::vector<Edge> edges() const;
  Adjacency adjacency() const;

  /// Coordinates the network was built from, when it came from points.
  const std::optional<std::vector<Point2>>& coordinates() const noexcept { return coordinates_; }

 private:
  std::vector<std::vector<Link>> links_;
  std::optional<std::vector<Point2>> coordinates_;
};

/// Directed weights rho_kl = 1 / card(N_k) on every link of `adjacency`.
Eigen::MatrixXd uniform_degree_weights(const Adjacency& adjacency);

Network build_network(const Adjacency& adjacency, const Eigen::MatrixXd& rho);

/// Links each agent to its `k_neighbors` nearest agents (Euclidean distance,
/// ties to the lower index) and keeps a link if either endpoint selected it.
/// When `rho` is null the directed weights default to 1 / card(N_k).
Network knn_network(std::span<const Point2> points, std::size_t k_neighbors,
                    const Eigen::MatrixXd* rho = nullptr);

Network ring_network(std::size_t agents);

/// Connected components of an adjacency, each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> connected_components(const Adjacency& adjacency);

/// Unweighted graph Laplacian D - A.
Eigen::MatrixXd laplacian(const Network& network);

// Topology files
//
// Line-oriented text; '#' starts a comment. Records:
//
//   knn <k>                                  global k-NN directive
//   agent id=<i> [x=<x> y=<y>] [neighbors=<j>,<j>,...]
//
// Agent ids must cover 0..K-1 exactly once. Either every agent carries
// coordinates and a `knn` directive is present, or every agent lists its
// neighbors explicitly (listing a link from one side is enough; links are
// symmetrized). Directed weights default to 1 / card(N_k).
Network parse_topology(std::istream& in);
Network load_topology(const std::string& path);
void write_topology(std::ostream& out, const Network& network);

}  // namespace mtgraph
