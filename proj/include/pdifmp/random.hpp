#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pdifmp {

/// Random stream indexed by a root seed and a key path such as
/// (generation, slot, attempt). Streams with different keys are independent
/// Mersenne Twister instances seeded through std::seed_seq, so results depend
/// only on the key and never on which thread consumes the stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> key = {})
      : engine_(make_seq(seed, key)) {}

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::mt19937_64 make_seq(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * key.size() + 1);
    auto push = [&words](std::uint64_t v) {
      words.push_back(static_cast<std::uint32_t>(v));
      words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    words.push_back(static_cast<std::uint32_t>(key.size()));
    for (auto k : key) push(k);
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream families, used as the first key component.
inline constexpr std::uint64_t kStreamObserved = 1;
inline constexpr std::uint64_t kStreamPilot = 2;
inline constexpr std::uint64_t kStreamSmc = 3;
inline constexpr std::uint64_t kStreamEnsemble = 4;
inline constexpr std::uint64_t kStreamTimeAverage = 5;
inline constexpr std::uint64_t kStreamRejection = 6;

}  // namespace pdifmp
