#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace selinf {

// Derives a child seed from a parent seed and a stream name (or index).
// All randomness in the project flows from one top-level seed split into
// named sub-streams (fit, chain, bootstrap, ...), so components can be
// re-run independently with reproducible results.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// A seeded random stream. One stream per chain / per bootstrap loop;
// streams are never shared across concurrent workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  double uniform();                       // U[0,1)
  double normal();                        // N(0,1)
  int uniform_int(int n);                 // {0, ..., n-1}
  Eigen::VectorXd normal_vector(int dim);

  RngStream substream(std::string_view name) const;
  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace selinf
