#pragma once

#include <cstdint>
#include <limits>

namespace chahak {

// Counter-based random stream. Every (seed, key...) tuple names an independent
// stream, so parallel loops that derive one stream per work item produce the
// same numbers regardless of scheduling order.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
            std::uint64_t c = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  // Standard normal (Box-Muller, no cached second variate).
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  double beta(double a, double b);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace chahak
