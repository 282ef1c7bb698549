#include "ibandit/seeds.hpp"

namespace ib {

std::string to_string(Stream stream) {
  switch (stream) {
    case Stream::Pool: return "pool";
    case Stream::Reward: return "reward";
    case Stream::Policy: return "policy";
    case Stream::Env: return "env";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

std::uint64_t seed_schedule(std::uint64_t base_seed, std::uint64_t replication, Stream stream) {
  return derive_seed(base_seed, replication, static_cast<std::uint64_t>(stream));
}

}  // namespace ib
