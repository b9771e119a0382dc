#pragma once

#include <cstdint>
#include <initializer_list>

namespace kspec {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream seed for a (base, key...) tuple; used so results never depend on
/// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t key : keys) h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ull));
  return h;
}

}  // namespace kspec
