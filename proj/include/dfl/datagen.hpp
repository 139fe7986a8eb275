#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dfl/linalg.hpp"
#include "dfl/problem.hpp"

namespace dfl {

enum class BDistribution { Bernoulli, Gaussian };

std::string to_string(BDistribution d);
BDistribution b_distribution_from_string(const std::string& s);

struct DatasetSpec {
  Index n = 100;
  Index p = 5;
  int deg = 6;
  /// Half-width w of the multiplicative noise U[1 - w, 1 + w].
  double noise = 0.5;
  std::uint64_t seed = 0;
  BDistribution b_dist = BDistribution::Bernoulli;
  /// Index of the first instance. Instances are drawn from per-index
  /// streams, so a split at offset N continues the same distribution with
  /// the same B.
  Index offset = 0;

  void validate() const;
};

/// Synthetic predict-then-optimize data. costs are prediction-space vectors
/// (length problem.pred_dim()), solutions are exact optima over the LP
/// variables of the min-sense cost problem.cost_map().full_cost(cost).
struct PtoDataset {
  DatasetSpec spec;
  std::shared_ptr<const Problem> problem;
  Matrix features;   // N x p
  Matrix costs;      // N x K
  Matrix solutions;  // N x num_vars

  Index size() const { return features.rows(); }
};

/// Stream tags; every stream is CounterRng(seed).substream(tag), with a
/// further .substream(instance index) for per-instance draws.
inline constexpr std::uint64_t kStreamB = 0x42;          // "B"
inline constexpr std::uint64_t kStreamFeatures = 0x707369;  // "psi"
inline constexpr std::uint64_t kStreamNoise = 0x7869;      // "xi"

/// The K x p coefficient matrix shared by every instance of a seed.
Matrix generate_b(const DatasetSpec& spec, Index k);

/// [(1/3.5^deg) max(0, (B psi)_j / sqrt(p) + 3)^deg + 1] * xi_j.
Vector cost_from_features(const Matrix& b, const Vector& psi, int deg, const Vector& xi);

PtoDataset generate(const DatasetSpec& spec, std::shared_ptr<const Problem> problem);

/// Text format documented in docs/formats.md. Numbers use %.17g so the round
/// trip is exact.
void save_dataset(const PtoDataset& ds, const std::string& path);
/// Throws std::runtime_error("schema error: ...") on malformed input and
/// "verification failed: instance i ..." when a stored solution is not
/// optimal. Up to verify_count instances, chosen by a seeded draw, are
/// re-solved.
PtoDataset load_dataset(const std::string& path, int verify_count = 10);

}  // namespace dfl
