#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace misbelief {

// Keyed random stream: the state of stream (seed, key) depends only on that
// pair, so path i draws the same numbers whatever the path count or schedule.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t key = 0);

  static RandomStream for_path(std::uint64_t master_seed, std::uint64_t path_index) {
    return RandomStream(master_seed, path_index);
  }

  std::uint64_t next_u64() { return engine_(); }
  // uniform on the open interval (0, 1)
  double uniform();
  double normal();
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace misbelief
