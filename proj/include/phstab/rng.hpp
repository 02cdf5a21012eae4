#pragma once

#include <cmath>
#include <cstdint>

namespace phstab {

// Counter-based pseudo-random streams. Every draw is a pure function of
// (seed, path_index, substream key, counter), so ensembles produce identical
// output for any parallel schedule as long as each path owns its streams.

inline std::uint64_t avalanche64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine_key(std::uint64_t key, std::uint64_t word) {
  return avalanche64((key ^ word) + 0x9e3779b97f4a7c15ULL);
}

class RngStream {
 public:
  RngStream() = default;

  RngStream(std::uint64_t seed, std::uint64_t path_index)
      : seed_(seed), path_(path_index) {
    key_ = combine_key(combine_key(0x243f6a8885a308d3ULL, seed), path_index);
  }

  // Fresh stream for a (step, tag) pair; independent of draws already made.
  RngStream substream(std::uint64_t step, std::uint64_t tag) const {
    RngStream s;
    s.seed_ = seed_;
    s.path_ = path_;
    s.key_ = combine_key(combine_key(key_, step), tag);
    return s;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return avalanche64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path_index() const { return path_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t path_ = 0;
  std::uint64_t key_ = 0x243f6a8885a308d3ULL;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RngStream derive_stream(std::uint64_t seed, std::uint64_t path_index) {
  return RngStream(seed, path_index);
}

}  // namespace phstab
