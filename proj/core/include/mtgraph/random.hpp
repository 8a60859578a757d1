#pragma once

#include <cstdint>
#include <random>

namespace mtgraph {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purpose tags so that different consumers of one (seed, run, agent) key
/// never share a stream.
enum class StreamPurpose : std::uint64_t {
  samples = 1,
  initialization = 2,
  model_generation = 3,
  test_samples = 4,
  surrogate = 5,
  topology = 6,
};

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run, std::uint64_t agent,
                                    StreamPurpose purpose) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ run);
  h = mix64(h ^ agent);
  return mix64(h ^ static_cast<std::uint64_t>(purpose));
}

/// Random source owned by one agent in one Monte-Carlo run.
///
/// Each agent draws exactly one sample per iteration, so the sample at
/// iteration i is the i-th draw of the stream keyed by (seed, run, agent);
/// changing the topology or other agents never reshuffles it.
class AgentStream {
 public:
  AgentStream() = default;
  AgentStream(std::uint64_t seed, std::uint64_t run, std::uint64_t agent, StreamPurpose purpose)
      : engine_(stream_seed(seed, run, agent, purpose)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_{0};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mtgraph
