#include "mtgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mtgraph/errors.hpp"

namespace mtgraph {

namespace {

void check_square(const Adjacency& adjacency) {
  const auto k = adjacency.size();
  if (k == 0) throw InvalidArgument("network needs at least one agent");
  for (std::size_t i = 0; i < k; ++i) {
    if (adjacency[i].size() != k) {
      throw InvalidArgument("adjacency row " + std::to_string(i) + " has " +
                            std::to_string(adjacency[i].size()) + " entries, expected " +
                            std::to_string(k));
    }
  }
}

std::string describe_components(const std::vector<std::vector<std::size_t>>& components) {
  std::ostringstream os;
  os << "graph is disconnected: " << components.size() << " components";
  for (std::size_t c = 0; c < components.size(); ++c) {
    os << (c == 0 ? " [" : ", [");
    const auto& members = components[c];
    for (std::size_t i = 0; i < members.size() && i < 8; ++i) os << (i ? " " : "") << members[i];
    if (members.size() > 8) os << " ... (" << members.size() << " agents)";
    os << ']';
  }
  return os.str();
}

}  // namespace

std::vector<std::vector<std::size_t>> connected_components(const Adjacency& adjacency) {
  const auto k = adjacency.size();
  std::vector<int> label(k, -1);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t start = 0; start < k; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    std::vector<std::size_t> stack{start};
    label[start] = id;
    while (!stack.empty()) {
      const auto node = stack.back();
      stack.pop_back();
      components.back().push_back(node);
      for (std::size_t other = 0; other < k; ++other) {
        if ((adjacency[node][other] || adjacency[other][node]) && label[other] < 0) {
          label[other] = id;
          stack.push_back(other);
        }
      }
    }
    std::sort(components.back().begin(), components.back().end());
  }
  return components;
}

Network Network::from_adjacency(const Adjacency& adjacency, const Eigen::MatrixXd& rho,
                                std::optional<std::vector<Point2>> coordinates) {
  check_square(adjacency);
  const auto k = adjacency.size();
  if (rho.rows() != static_cast<Eigen::Index>(k) || rho.cols() != static_cast<Eigen::Index>(k)) {
    throw InvalidArgument("weight matrix must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (adjacency[i][i]) throw InvalidArgument("self-loop at agent " + std::to_string(i));
    for (std::size_t j = i + 1; j < k; ++j) {
      if (adjacency[i][j] != adjacency[j][i]) {
        throw InvalidArgument("adjacency is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (adjacency[i][j] && !(rho(i, j) > 0.0 && std::isfinite(rho(i, j)))) {
        throw InvalidArgument("link weight rho(" + std::to_string(i) + ", " + std::to_string(j) +
                              ") must be positive and finite");
      }
    }
  }
  auto components = connected_components(adjacency);
  if (components.size() > 1) {
    auto message = describe_components(components);
    throw DisconnectedGraph(message, std::move(components));
  }
  if (coordinates && coordinates->size() != k) {
    throw InvalidArgument("coordinate count does not match agent count");
  }

  Network net;
  net.links_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!adjacency[i][j]) continue;
      net.links_[i].push_back(Link{j, rho(i, j), 0.5 * (rho(i, j) + rho(j, i))});
    }
  }
  net.coordinates_ = std::move(coordinates);
  return net;
}

double Network::p(std::size_t k, std::size_t l) const {
  for (const auto& link : links_.at(k)) {
    if (link.neighbor == l) return link.p;
  }
  return 0.0;
}

bool Network::linked(std::size_t k, std::size_t l) const {
  const auto& row = links_.at(k);
  return std::any_of(row.begin(), row.end(), [l](const Link& link) { return link.neighbor == l; });
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  for (std::size_t k = 0; k < links_.size(); ++k) {
    for (const auto& link : links_[k]) {
      if (link.neighbor > k) out.push_back(Edge{k, link.neighbor, link.p});
    }
  }
  return out;
}

Adjacency Network::adjacency() const {
  Adjacency adj(size(), std::vector<bool>(size(), false));
  for (std::size_t k = 0; k < size(); ++k) {
    for (const auto& link : links_[k]) adj[k][link.neighbor] = true;
  }
  return adj;
}

Eigen::MatrixXd uniform_degree_weights(const Adjacency& adjacency) {
  check_square(adjacency);
  const auto k = adjacency.size();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto degree = std::count(adjacency[i].begin(), adjacency[i].end(), true);
    if (degree == 0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (adjacency[i][j]) rho(i, j) = 1.0 / static_cast<double>(degree);
    }
  }
  return rho;
}

Network build_network(const Adjacency& adjacency, const Eigen::MatrixXd& rho) {
  return Network::from_adjacency(adjacency, rho);
}

Network knn_network(std::span<const Point2> points, std::size_t k_neighbors,
                    const Eigen::MatrixXd* rho) {
  const auto k = points.size();
  if (k_neighbors == 0) throw InvalidArgument("k_neighbors must be positive");
  if (k <= k_neighbors) {
    throw InvalidArgument("k-NN needs more agents (" + std::to_string(k) + ") than k_neighbors (" +
                          std::to_string(k_neighbors) + ")");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw InvalidArgument("coordinate of agent " + std::to_string(i) + " is not finite");
    }
    for (std::size_t j = i + 1; j < k; ++j) {
      if (points[i].x == points[j].x && points[i].y == points[j].y) {
        throw InvalidArgument("duplicate coordinates for agents " + std::to_string(i) + " and " +
                              std::to_string(j));
      }
    }
  }

  Adjacency adj(k, std::vector<bool>(k, false));
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    ranked.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      ranked.emplace_back(dx * dx + dy * dy, j);
    }
    // Pair ordering breaks distance ties by the lower index.
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                      ranked.end());
    for (std::size_t n = 0; n < k_neighbors; ++n) {
      adj[i][ranked[n].second] = true;
      adj[ranked[n].second][i] = true;
    }
  }

  std::vector<Point2> coords(points.begin(), points.end());
  auto components = connected_components(adj);
  if (components.size() > 1) {
    auto message = describe_components(components) + "; try a larger k_neighbors (currently " +
                   std::to_string(k_neighbors) + ")";
    throw DisconnectedGraph(message, std::move(components));
  }
  if (rho != nullptr) return Network::from_adjacency(adj, *rho, std::move(coords));
  return Network::from_adjacency(adj, uniform_degree_weights(adj), std::move(coords));
}

Network ring_network(std::size_t agents) {
  if (agents < 2) throw InvalidArgument("a ring needs at least 2 agents");
  Adjacency adj(agents, std::vector<bool>(agents, false));
  for (std::size_t i = 0; i < agents; ++i) {
    const auto next = (i + 1) % agents;
    adj[i][next] = adj[next][i] = true;
  }
  return build_network(adj, uniform_degree_weights(adj));
}

Eigen::MatrixXd laplacian(const Network& network) {
  const auto k = network.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& link : network.links(i)) {
      lap(i, link.neighbor) -= 1.0;
      lap(i, i) += 1.0;
    }
  }
  return lap;
}

// ---------------------------------------------------------------------------
// Topology files

namespace {

struct AgentRecord {
  std::optional<Point2> point;
  std::optional<std::vector<std::size_t>> neighbors;
  std::size_t line = 0;
};

std::size_t parse_index(const std::string& text, std::size_t line, const std::string& field) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text.front() == '-') {
    throw ConfigError({"line " + std::to_string(line) + ": field '" + field +
                       "' expects a non-negative integer, got '" + text + "'"});
  }
  return static_cast<std::size_t>(value);
}

double parse_real(const std::string& text, std::size_t line, const std::string& field) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty()) {
    throw ConfigError({"line " + std::to_string(line) + ": field '" + field +
                       "' expects a number, got '" + text + "'"});
  }
  return value;
}

}  // namespace

Network parse_topology(std::istream& in) {
  std::map<std::size_t, AgentRecord> agents;
  std::optional<std::size_t> knn;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream line(raw);
    std::string keyword;
    if (!(line >> keyword)) continue;
    if (keyword == "knn") {
      std::string value;
      if (!(line >> value)) {
        throw ConfigError({"line " + std::to_string(line_no) + ": 'knn' needs a neighbor count"});
      }
      knn = parse_index(value, line_no, "knn");
      continue;
    }
    if (keyword != "agent") {
      throw ConfigError({"line " + std::to_string(line_no) + ": unknown record '" + keyword +
                         "' (expected 'agent' or 'knn')"});
    }
    AgentRecord record;
    record.line = line_no;
    std::optional<std::size_t> id;
    std::optional<double> x;
    std::optional<double> y;
    std::string token;
    while (line >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) {
        throw ConfigError({"line " + std::to_string(line_no) + ": expected key=value, got '" +
                           token + "'"});
      }
      const auto key = token.substr(0, eq);
      const auto value = token.substr(eq + 1);
      if (key == "id") {
        id = parse_index(value, line_no, key);
      } else if (key == "x") {
        x = parse_real(value, line_no, key);
      } else if (key == "y") {
        y = parse_real(value, line_no, key);
      } else if (key == "neighbors") {
        std::vector<std::size_t> list;
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
          if (!item.empty()) list.push_back(parse_index(item, line_no, key));
        }
        record.neighbors = std::move(list);
      } else {
        throw ConfigError({"line " + std::to_string(line_no) + ": unknown field '" + key + "'"});
      }
    }
    if (!id) throw ConfigError({"line " + std::to_string(line_no) + ": agent record without id"});
    if (x.has_value() != y.has_value()) {
      throw ConfigError({"line " + std::to_string(line_no) + ": x and y must be given together"});
    }
    if (x) record.point = Point2{*x, *y};
    if (!agents.emplace(*id, record).second) {
      throw ConfigError({"line " + std::to_string(line_no) + ": duplicate agent id " +
                         std::to_string(*id)});
    }
  }

  const auto k = agents.size();
  if (k == 0) throw ConfigError({"topology file declares no agents"});
  if (agents.rbegin()->first != k - 1) {
    throw ConfigError({"agent ids must cover 0.." + std::to_string(k - 1) + " exactly"});
  }

  if (knn) {
    std::vector<Point2> points;
    points.reserve(k);
    for (const auto& [id, record] : agents) {
      if (!record.point) {
        throw ConfigError({"line " + std::to_string(record.line) + ": agent " + std::to_string(id) +
                           " needs x and y under a knn directive"});
      }
      if (record.neighbors) {
        throw ConfigError({"line " + std::to_string(record.line) +
                           ": explicit neighbors cannot be combined with a knn directive"});
      }
      points.push_back(*record.point);
    }
    return knn_network(points, *knn);
  }

  Adjacency adj(k, std::vector<bool>(k, false));
  bool have_all_points = true;
  for (const auto& [id, record] : agents) {
    if (!record.neighbors) {
      throw ConfigError({"line " + std::to_string(record.line) + ": agent " + std::to_string(id) +
                         " lists no neighbors and no knn directive is present"});
    }
    have_all_points = have_all_points && record.point.has_value();
    for (const auto other : *record.neighbors) {
      if (other >= k) {
        throw ConfigError({"line " + std::to_string(record.line) + ": neighbor " +
                           std::to_string(other) + " is not a declared agent"});
      }
      if (other == id) {
        throw ConfigError({"line " + std::to_string(record.line) + ": agent " +
                           std::to_string(id) + " lists itself as a neighbor"});
      }
      adj[id][other] = adj[other][id] = true;
    }
  }
  std::optional<std::vector<Point2>> coords;
  if (have_all_points) {
    coords.emplace();
    for (const auto& entry : agents) coords->push_back(*entry.second.point);
  }
  return Network::from_adjacency(adj, uniform_degree_weights(adj), std::move(coords));
}

Network load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open topology file '" + path + "'"});
  return parse_topology(in);
}

void write_topology(std::ostream& out, const Network& network) {
  out << "# agents: " << network.size() << '\n';
  const auto& coords = network.coordinates();
  out.precision(17);
  for (std::size_t k = 0; k < network.size(); ++k) {
    out << "agent id=" << k;
    if (coords) out << " x=" << (*coords)[k].x << " y=" << (*coords)[k].y;
    out << " neighbors=";
    const auto links = network.links(k);
    for (std::size_t i = 0; i < links.size(); ++i) out << (i ? "," : "") << links[i].neighbor;
    out << '\n';
  }
}

}  // namespace mtgraph
