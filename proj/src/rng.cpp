#include "ggl/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace ggl {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(uint64_t seed) : key_(mix64(seed + kGolden)) {}

uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

uint64_t Rng::below(uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Rng Rng::substream(std::string_view purpose, std::initializer_list<uint64_t> idx) const {
  Rng out(0);
  uint64_t k = mix64(key_ ^ fnv1a(purpose));
  for (uint64_t i : idx) k = mix64(k + (i + 1) * kGolden);
  out.key_ = k;
  return out;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  shuffle(p.begin(), p.end());
  return p;
}

}  // namespace ggl
