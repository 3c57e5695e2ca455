#include "histopheno/phenotype.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "histopheno/parallel.hpp"
#include "histopheno/rng.hpp"
#include "histopheno/stats.hpp"

namespace histopheno {

namespace {

double point_distance(const std::vector<CFVector>& data, int a, int b) {
  return chi_squared_distance(data[a].h, data[b].h);
}

// Nearest medoid of point i; ties break to the lowest medoid index.
std::pair<int, double> nearest_medoid(const std::vector<CFVector>& data,
                                      const std::vector<int>& medoids, int i) {
  int best = 0;
  double best_d = point_distance(data, i, medoids[0]);
  for (int c = 1; c < static_cast<int>(medoids.size()); ++c) {
    const double d = point_distance(data, i, medoids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

struct RunResult {
  std::vector<int> medoids;
  std::vector<int> assignments;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> cost_trace;
};

RunResult run_once(const std::vector<CFVector>& data, int k, std::uint64_t run_seed) {
  const int n = static_cast<int>(data.size());
  Rng rng(run_seed);

  // Random distinct initial medoids via partial Fisher-Yates.
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> medoids(pool.begin(), pool.begin() + k);

  RunResult result;
  std::vector<int> assignments(n, -1);
  std::vector<int> prev;
  constexpr int kMaxIterations = 300;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto [c, d] = nearest_medoid(data, medoids, i);
      assignments[i] = c;
      cost += d;
    }
    result.cost_trace.push_back(cost);
    if (assignments == prev) break;
    prev = assignments;

    // Reseed any emptied cluster to the point farthest from its nearest
    // medoid, then refresh the assignment before updating medoids.
    std::vector<int> counts(k, 0);
    for (const int a : assignments) ++counts[a];
    bool repaired = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int farthest = -1;
      double farthest_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
        const double d = nearest_medoid(data, medoids, i).second;
        if (d > farthest_d) {
          farthest_d = d;
          farthest = i;
        }
      }
      if (farthest < 0) break;  // fewer distinct points than clusters
      medoids[c] = farthest;
      repaired = true;
    }
    if (repaired) {
      double cost2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto [c, d] = nearest_medoid(data, medoids, i);
        assignments[i] = c;
        cost2 += d;
      }
      result.cost_trace.push_back(cost2);
      prev = assignments;
    }

    // Within-cluster medoid update: member minimizing intra-cluster cost.
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) members[assignments[i]].push_back(i);
    for (int c = 0; c < k; ++c) {
      const auto& m = members[c];
      if (m.empty()) continue;
      int best = medoids[c];
      double best_cost = std::numeric_limits<double>::infinity();
      for (const int candidate : m) {
        double candidate_cost = 0.0;
        for (const int other : m) candidate_cost += point_distance(data, candidate, other);
        if (candidate_cost < best_cost ||
            (candidate_cost == best_cost && candidate < best)) {
          best_cost = candidate_cost;
          best = candidate;
        }
      }
      medoids[c] = best;
    }
  }

  double final_cost = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [c, d] = nearest_medoid(data, medoids, i);
    assignments[i] = c;
    final_cost += d;
  }
  result.medoids = std::move(medoids);
  result.assignments = std::move(assignments);
  result.cost = final_cost;
  return result;
}

}  // namespace

namespace detail {

PhenotypeModel kmedoids_core(const std::vector<CFVector>& data, int k, int restarts,
                             std::uint64_t seed, int threads,
                             std::vector<double>* cost_trace) {
  if (k < 1) throw ValidationError("kmedoids: k must be at least 1");
  if (static_cast<int>(data.size()) < k) {
    throw ValidationError("kmedoids: insufficient data for requested k");
  }
  if (restarts < 1) throw ValidationError("kmedoids: restarts must be positive");
  for (const CFVector& v : data) {
    if (v.edge_count <= 0) {
      throw ValidationError("kmedoids: input contains an empty connection-frequency vector");
    }
  }

  std::vector<RunResult> runs(restarts);
  parallel_for(static_cast<std::size_t>(restarts), threads, [&](std::size_t r) {
    runs[r] = run_once(data, k, Rng::derived(seed, r).next_u64());
  });

  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (runs[r].cost < runs[best].cost) best = r;  // tie keeps the lowest index
  }

  PhenotypeModel model;
  model.k = k;
  model.seed = seed;
  model.restarts = restarts;
  model.total_cost = runs[best].cost;
  model.medoid_indices = runs[best].medoids;
  model.assignments = std::move(runs[best].assignments);
  model.medoids.reserve(k);
  for (const int idx : runs[best].medoids) model.medoids.push_back(data[idx]);
  if (cost_trace) *cost_trace = std::move(runs[best].cost_trace);
  return model;
}

}  // namespace detail

PhenotypeModel kmedoids(const std::vector<CFVector>& data, int k, int restarts,
                        std::uint64_t seed, int threads) {
  if (k < 2) throw ValidationError("kmedoids: k must be at least 2");
  return detail::kmedoids_core(data, k, restarts, seed, threads, nullptr);
}

int assign(const PhenotypeModel& model, const CFVector& h) {
  if (model.k < 1 || model.medoids.empty()) {
    throw ValidationError("assign: invalid model");
  }
  if (h.edge_count <= 0) {
    throw ValidationError("assign: tile has no connections and cannot be phenotyped");
  }
  int best = 0;
  double best_d = chi_squared_distance(h, model.medoids[0]);
  for (int c = 1; c < static_cast<int>(model.medoids.size()); ++c) {
    const double d = chi_squared_distance(h, model.medoids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::uint64_t select_k_fit_seed(std::uint64_t seed, int k) {
  return Rng::derived(seed, 0x6b00 + static_cast<std::uint64_t>(k)).next_u64();
}

KSelectionReport select_k(const std::vector<CFVector>& data,
                          const std::vector<std::string>& slide_of, int k_min, int k_max,
                          std::uint64_t seed, int restarts, int threads,
                          double distance_threshold, double correlation_threshold) {
  if (data.empty()) throw ValidationError("select_k: empty data");
  if (slide_of.size() != data.size()) {
    throw ValidationError("select_k: slide grouping does not match data");
  }
  if (k_min < 2 || k_max > 12 || k_min > k_max) {
    throw ValidationError("select_k: k range must lie within [2, 12]");
  }
  if (static_cast<int>(data.size()) < k_max) {
    throw ValidationError("select_k: insufficient data for upper end of k range");
  }
  const std::set<std::string> slide_set(slide_of.begin(), slide_of.end());
  if (slide_set.size() < 2) {
    throw ValidationError("select_k: the correlation criterion needs at least 2 slides");
  }
  std::vector<std::string> slides(slide_set.begin(), slide_set.end());
  std::map<std::string, int> slide_index;
  for (std::size_t s = 0; s < slides.size(); ++s) slide_index[slides[s]] = static_cast<int>(s);

  KSelectionReport report;
  report.distance_threshold = distance_threshold;
  report.correlation_threshold = correlation_threshold;

  for (int k = k_min; k <= k_max; ++k) {
    const PhenotypeModel model =
        detail::kmedoids_core(data, k, restarts, select_k_fit_seed(seed, k), threads, nullptr);

    KSelectionRow row;
    row.k = k;
    row.min_inter_medoid_distance = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        row.min_inter_medoid_distance =
            std::min(row.min_inter_medoid_distance,
                     chi_squared_distance(model.medoids[a], model.medoids[b]));
      }
    }

    // Per-slide phenotype ratios over the clustering pool.
    std::vector<std::vector<double>> ratio(slides.size(), std::vector<double>(k, 0.0));
    std::vector<double> totals(slides.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int s = slide_index[slide_of[i]];
      ratio[s][model.assignments[i]] += 1.0;
      totals[s] += 1.0;
    }
    for (std::size_t s = 0; s < slides.size(); ++s) {
      for (int p = 0; p < k; ++p) ratio[s][p] /= totals[s];
    }

    row.max_feature_spearman = -std::numeric_limits<double>::infinity();
    bool any_pair = false;
    for (int p = 0; p < k; ++p) {
      for (int q = p + 1; q < k; ++q) {
        std::vector<double> fp(slides.size()), fq(slides.size());
        for (std::size_t s = 0; s < slides.size(); ++s) {
          fp[s] = ratio[s][p];
          fq[s] = ratio[s][q];
        }
        double rho;
        try {
          rho = stats::spearman(fp, fq);
        } catch (const ValidationError&) {
          continue;  // constant feature carries no redundancy signal
        }
        row.max_feature_spearman = std::max(row.max_feature_spearman, rho);
        any_pair = true;
      }
    }
    if (!any_pair) row.max_feature_spearman = 0.0;

    row.distance_ok = row.min_inter_medoid_distance >= distance_threshold;
    row.correlation_ok = row.max_feature_spearman <= correlation_threshold;
    report.rows.push_back(row);
  }

  report.chosen_k = 0;
  for (const KSelectionRow& row : report.rows) {
    if (row.distance_ok && row.correlation_ok) report.chosen_k = row.k;
  }
  if (report.chosen_k == 0) {
    report.fallback = true;
    const KSelectionRow* best = &report.rows.front();
    for (const KSelectionRow& row : report.rows) {
      if (row.min_inter_medoid_distance > best->min_inter_medoid_distance) best = &row;
    }
    report.chosen_k = best->k;
  }
  return report;
}

std::string model_to_json(const PhenotypeModel& model) {
  nlohmann::json j;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["restarts"] = model.restarts;
  j["total_cost"] = model.total_cost;
  j["distance"] = "chi_squared";
  j["library_version"] = std::string(kVersion);
  nlohmann::json medoids = nlohmann::json::array();
  for (const CFVector& m : model.medoids) {
    nlohmann::json entry;
    entry["h"] = m.h;
    entry["edge_count"] = m.edge_count;
    medoids.push_back(entry);
  }
  j["medoids"] = medoids;
  j["medoid_indices"] = model.medoid_indices;
  return j.dump(2) + "\n";
}

PhenotypeModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  PhenotypeModel model;
  try {
    model.k = j.at("k").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.restarts = j.at("restarts").get<int>();
    model.total_cost = j.at("total_cost").get<double>();
    for (const auto& entry : j.at("medoids")) {
      CFVector m;
      const auto& h = entry.at("h");
      if (h.size() != static_cast<std::size_t>(kPairCount)) {
        throw ParseError("model JSON: medoid vector must have 10 entries");
      }
      for (int i = 0; i < kPairCount; ++i) m.h[i] = h[i].get<double>();
      m.edge_count = entry.at("edge_count").get<std::int64_t>();
      model.medoids.push_back(m);
    }
    if (j.contains("medoid_indices")) {
      model.medoid_indices = j.at("medoid_indices").get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  if (static_cast<int>(model.medoids.size()) != model.k) {
    throw ParseError("model JSON: medoid count does not match k");
  }
  return model;
}

}  // namespace histopheno
