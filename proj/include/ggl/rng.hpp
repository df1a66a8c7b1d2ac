#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace ggl {

// Counter-based SplitMix64 stream. Substreams are derived from the parent key,
// a purpose label and integer indices, so draws do not depend on call order
// elsewhere in the program.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0);

  uint64_t next_u64();
  double uniform();                      // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // Box-Muller, pairs are cached
  uint64_t below(uint64_t n);            // unbiased integer in [0, n)

  Rng substream(std::string_view purpose, std::initializer_list<uint64_t> idx = {}) const;

  template <class It>
  void shuffle(It first, It last) {
    auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      uint64_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  std::vector<int> permutation(int n);

  uint64_t key() const { return key_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

uint64_t mix64(uint64_t z);
uint64_t fnv1a(std::string_view s);

}  // namespace ggl
