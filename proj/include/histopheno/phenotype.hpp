#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histopheno/cellgraph.hpp"
#include "histopheno/common.hpp"

namespace histopheno {

// k-medoid clustering result. Medoids are bit-identical copies of input
// vectors; assignments align with the data order handed to kmedoids.
struct PhenotypeModel {
  int k = 0;
  std::vector<CFVector> medoids;
  std::vector<int> medoid_indices;  // positions of the medoids in the input data
  std::vector<int> assignments;
  double total_cost = 0.0;
  std::uint64_t seed = 0;
  int restarts = 0;
};

namespace detail {

// Core alternating k-medoids (nearest-medoid assignment, within-cluster
// medoid update) accepting k >= 1; k = 1 is kept callable for diagnostics.
// cost_trace, when given, records the total cost after every assignment
// step of the winning restart.
PhenotypeModel kmedoids_core(const std::vector<CFVector>& data, int k, int restarts,
                             std::uint64_t seed, int threads = 1,
                             std::vector<double>* cost_trace = nullptr);

}  // namespace detail

// Best of `restarts` independently seeded runs by total cost (ties to the
// lowest restart index). Deterministic given (data, k, restarts, seed)
// regardless of thread count.
PhenotypeModel kmedoids(const std::vector<CFVector>& data, int k, int restarts,
                        std::uint64_t seed, int threads = 1);

// Index of the nearest medoid under chi-squared distance; ties break to the
// lowest medoid index. All-zero vectors are not assignable.
int assign(const PhenotypeModel& model, const CFVector& h);

struct KSelectionRow {
  int k = 0;
  double min_inter_medoid_distance = 0.0;
  double max_feature_spearman = 0.0;  // signed; high positive = redundant features
  bool distance_ok = false;
  bool correlation_ok = false;
};

struct KSelectionReport {
  std::vector<KSelectionRow> rows;
  int chosen_k = 0;
  bool fallback = false;  // no candidate met both criteria
  double distance_threshold = 0.2;
  double correlation_threshold = 0.8;
};

inline constexpr double kDefaultMedoidDistanceThreshold = 0.2;
inline constexpr double kDefaultFeatureCorrelationThreshold = 0.8;

// Evaluates each k in [k_min, k_max]: phenotypes must stay dissimilar
// (min pairwise inter-medoid chi-squared distance >= distance threshold) and
// the per-slide phenotype-ratio features must not be redundant (max pairwise
// Spearman correlation <= correlation threshold). Chooses the largest k
// passing both; when none passes, falls back to the k with the largest
// minimum inter-medoid distance and sets the fallback flag.
KSelectionReport select_k(const std::vector<CFVector>& data,
                          const std::vector<std::string>& slide_of, int k_min, int k_max,
                          std::uint64_t seed, int restarts = 100, int threads = 1,
                          double distance_threshold = kDefaultMedoidDistanceThreshold,
                          double correlation_threshold = kDefaultFeatureCorrelationThreshold);

// Deterministic per-k seed used by select_k for each candidate fit, exposed
// so a final model refit at the chosen k reproduces the explored one.
std::uint64_t select_k_fit_seed(std::uint64_t seed, int k);

// JSON round-trip for model persistence (full-precision medoids).
std::string model_to_json(const PhenotypeModel& model);
PhenotypeModel model_from_json(const std::string& text);

}  // namespace histopheno
