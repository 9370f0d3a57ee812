#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace proxsdca {

// Uniform index sampler over a fixed engine. std::mt19937_64 is fully specified by the
// standard; the index map (Lemire's multiply-shift with rejection) is ours, so draws are
// reproducible across standard libraries, unlike std::uniform_int_distribution.
class IndexSampler {
 public:
  explicit IndexSampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n).
  std::size_t draw(std::size_t n) {
    const auto range = static_cast<std::uint64_t>(n);
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

// Independent stream used for the random-output iteration pick.
inline std::uint64_t output_stream_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

}  // namespace proxsdca
