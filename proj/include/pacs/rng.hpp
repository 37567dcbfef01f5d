#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace pacs {

/// Derives an independent seed for a named substream ("shuffle", "draws",
/// "tie-break", ...) of a single root seed. `index` separates per-draw or
/// per-item streams so parallel and serial replays agree.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                             std::uint64_t index = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n). Rejection sampling over raw 64-bit draws,
  /// so the sequence does not depend on the standard library's distributions.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pacs
