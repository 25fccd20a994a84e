#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace soniclog {

// splitmix64 finalizer, used to derive independent child seeds (per tree,
// per trial, per stage) from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 raw output is pinned by the standard; the bounded draw below is
// ours, so sequences are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Lemire multiply-shift reduction onto [0, n).
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // First k entries of a Fisher-Yates pass over [0, n); result sorted
  // ascending so downstream tie-breaking stays index-ordered.
  std::vector<int> sample_indices(int n, int k);

 private:
  std::mt19937_64 engine_;
};

inline std::vector<int> Rng::sample_indices(int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace soniclog
