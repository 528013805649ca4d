// Seeding and substream derivation.
//
// Every stage draws from its own mt19937_64 stream whose seed is derived from
// the single user-facing seed and a stage tag:
//   stream_seed(seed, tag) = splitmix64(seed XOR fnv1a64(tag))
// Stage tags are fixed strings ("generate", "split", "select:<outcome>", ...),
// so one --seed reproduces the whole run while stages stay decoupled.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "corisk/error.hpp"

namespace corisk {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, const std::string& tag) {
  return splitmix64(seed ^ fnv1a64(tag));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, const std::string& tag) {
  return std::mt19937_64(stream_seed(seed, tag));
}

// Deterministic sample of k distinct indices from [0, n), in random order
// (partial Fisher-Yates on an index vector).
inline std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

inline std::vector<int> shuffled_indices(int n, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// k index groups with sizes differing by at most one, deterministic under the
// seed; the first (n mod k) groups carry the extra element.
inline std::vector<std::vector<int>> partition_groups(int n, int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::Input, "partition_groups: k must be >= 1");
  if (n < k) throw Error(ErrorKind::Size, "partition_groups: fewer subjects than groups");
  std::mt19937_64 rng = make_stream(seed, "groups");
  std::vector<int> idx = shuffled_indices(n, rng);
  std::vector<std::vector<int>> groups(k);
  int base = n / k, extra = n % k, at = 0;
  for (int g = 0; g < k; ++g) {
    int sz = base + (g < extra ? 1 : 0);
    groups[g].assign(idx.begin() + at, idx.begin() + at + sz);
    std::sort(groups[g].begin(), groups[g].end());
    at += sz;
  }
  return groups;
}

}  // namespace corisk
