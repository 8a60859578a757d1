#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mtgraph/metrics.hpp"
#include "mtgraph/solver.hpp"

namespace mtgraph {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// 16 lowercase hex digits.
std::string digest_hex(std::uint64_t digest);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

/// First line of every text artifact: "# config_digest=<hex>".
void write_digest_header(std::ostream& out, std::uint64_t digest);

/// Columns iteration,msd,msd_db; iterations start at 1.
void write_curve_csv(std::ostream& out, const LearningCurve& curve, std::uint64_t digest);

struct SweepRow {
  double eta = 0.0;
  std::string regularizer;
  double msd_loc_db = 0.0;
  std::size_t n_runs = 0;
};

/// Columns eta,regularizer,msd_loc_db,n_runs.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t digest);

/// "key = value" lines after the digest header.
void write_summary(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries,
                   std::uint64_t digest);

/// Columns iteration,agent,coordinate,value.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Compact little-endian dump: magic "MTGT", version, seed, run, digest,
/// iterations + 1, K, M, then every w_{k,i} as float64.
void write_trajectory_binary(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_binary(std::istream& in);

/// Reference solutions keyed by configuration digest: magic "MTGR",
/// version, digest, residual, K, M, blocks as float64.
struct StoredReference {
  std::uint64_t digest = 0;
  double residual = 0.0;
  std::vector<Eigen::VectorXd> blocks;
};

void write_reference(std::ostream& out, const StoredReference& reference);
StoredReference read_reference(std::istream& in);

void save_reference(const std::string& path, const StoredReference& reference);
/// Returns false when the file does not exist; throws on a corrupt file or
/// a digest mismatch.
bool load_reference(const std::string& path, std::uint64_t expected_digest, StoredReference& out);

}  // namespace mtgraph
