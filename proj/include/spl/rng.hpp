#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace spl {

// Seedable stream with a fixed, documented derivation: std::mt19937_64 (whose
// output sequence the standard pins down) feeding hand-written transforms.
// std::*_distribution is avoided because its algorithms vary by library.
//
//   uniform()   = (next() >> 11) * 2^-53           in [0, 1)
//   normal()    = Box-Muller, cosine branch only   (one draw per two uniforms)
//   below(n)    = rejection sampling on next()     in [0, n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates, from the back.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // `count` distinct indices from [0, n), in the order drawn.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace spl
