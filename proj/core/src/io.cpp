#include "mtgraph/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "mtgraph/errors.hpp"

namespace mtgraph {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::string format_number(double value) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

void write_digest_header(std::ostream& out, std::uint64_t digest) {
  out << "# config_digest=" << digest_hex(digest) << '\n';
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve, std::uint64_t digest) {
  write_digest_header(out, digest);
  out << "iteration,msd,msd_db\n";
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double v = curve.values[i];
    out << (i + 1) << ',' << format_number(v) << ','
        << (v > 0.0 ? format_number(10.0 * std::log10(v)) : std::string("-inf")) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t digest) {
  write_digest_header(out, digest);
  out << "eta,regularizer,msd_loc_db,n_runs\n";
  for (const auto& r : rows) {
    out << format_number(r.eta) << ',' << r.regularizer << ',' << format_number(r.msd_loc_db) << ','
        << r.n_runs << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries,
                   std::uint64_t digest) {
  write_digest_header(out, digest);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.config_digest != 0) write_digest_header(out, trajectory.config_digest);
  out << "iteration,agent,coordinate,value\n";
  for (std::size_t i = 0; i < trajectory.estimates.size(); ++i) {
    const auto& row = trajectory.estimates[i];
    for (std::size_t k = 0; k < row.size(); ++k) {
      for (Eigen::Index m = 0; m < row[k].size(); ++m) {
        out << i << ',' << k << ',' << m << ',' << format_number(row[k][m]) << '\n';
      }
    }
  }
}

namespace {

constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw Error("truncated binary file");
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void put_magic(std::ostream& out, const char* magic) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw Error(std::string("bad magic, expected ") + std::string(magic, 4));
  }
  if (get<std::uint32_t>(in) != kFormatVersion) throw Error("unsupported binary format version");
}

}  // namespace

void write_trajectory_binary(std::ostream& out, const Trajectory& t) {
  put_magic(out, "MTGT");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, t.seed);
  put<std::uint64_t>(out, t.run);
  put<std::uint64_t>(out, t.config_digest);
  put<std::uint64_t>(out, t.estimates.size());
  put<std::uint64_t>(out, t.agents());
  put<std::uint64_t>(out, t.dimension());
  for (const auto& row : t.estimates) {
    for (const auto& w : row) {
      for (Eigen::Index m = 0; m < w.size(); ++m) put<double>(out, w[m]);
    }
  }
  if (!out) throw Error("failed to write trajectory");
}

Trajectory read_trajectory_binary(std::istream& in) {
  expect_magic(in, "MTGT");
  Trajectory t;
  t.seed = get<std::uint64_t>(in);
  t.run = get<std::uint64_t>(in);
  t.config_digest = get<std::uint64_t>(in);
  const auto steps = get<std::uint64_t>(in);
  const auto agents = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  t.estimates.assign(steps, std::vector<Eigen::VectorXd>(agents, Eigen::VectorXd(dim)));
  for (auto& row : t.estimates) {
    for (auto& w : row) {
      for (Eigen::Index m = 0; m < w.size(); ++m) w[m] = get<double>(in);
    }
  }
  return t;
}

void write_reference(std::ostream& out, const StoredReference& r) {
  put_magic(out, "MTGR");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, r.digest);
  put<double>(out, r.residual);
  put<std::uint64_t>(out, r.blocks.size());
  put<std::uint64_t>(out, r.blocks.empty() ? 0 : r.blocks.front().size());
  for (const auto& b : r.blocks) {
    for (Eigen::Index m = 0; m < b.size(); ++m) put<double>(out, b[m]);
  }
  if (!out) throw Error("failed to write reference");
}

StoredReference read_reference(std::istream& in) {
  expect_magic(in, "MTGR");
  StoredReference r;
  r.digest = get<std::uint64_t>(in);
  r.residual = get<double>(in);
  const auto agents = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  r.blocks.assign(agents, Eigen::VectorXd(dim));
  for (auto& b : r.blocks) {
    for (Eigen::Index m = 0; m < b.size(); ++m) b[m] = get<double>(in);
  }
  return r;
}

void save_reference(const std::string& path, const StoredReference& reference) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    write_reference(out, reference);
  }
  std::filesystem::rename(tmp, p);
}

bool load_reference(const std::string& path, std::uint64_t expected_digest, StoredReference& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  out = read_reference(in);
  if (out.digest != expected_digest) {
    throw Error("reference cache " + path + " holds digest " + digest_hex(out.digest) +
                ", expected " + digest_hex(expected_digest));
  }
  return true;
}

}  // namespace mtgraph
