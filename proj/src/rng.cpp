#include "selinf/rng.hpp"

namespace selinf {

namespace {

// splitmix64 finalizer; decorrelates nearby seeds.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the name
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix(seed ^ mix(h));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix(seed ^ mix(index + 0x51ed2701ull));
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
}

double RngStream::normal() {
  return std::normal_distribution<double>(0.0, 1.0)(gen_);
}

int RngStream::uniform_int(int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(gen_);
}

Eigen::VectorXd RngStream::normal_vector(int dim) {
  Eigen::VectorXd v(dim);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < dim; ++i) v[i] = d(gen_);
  return v;
}

RngStream RngStream::substream(std::string_view name) const {
  return RngStream(derive_seed(seed_, name));
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(derive_seed(seed_, index));
}

}  // namespace selinf
