#include "szlab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace szlab {

Parallelism Parallelism::resolve(int requested) {
  if (requested > 0) return {requested};
  if (const char* env = std::getenv("SZLAB_WORKERS")) {
    try {
      int k = std::stoi(env);
      if (k > 0) return {k};
    } catch (...) {
    }
  }
  return {1};
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t s = root;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace szlab
