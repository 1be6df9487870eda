#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bootroute::sim {

/**
 * Statistical model of one candidate's consistency score: a distribution
 * with mean mu and variance sigma2, clipped to [0,1]. The moment claims the
 * simulator checks are exact pre-clipping, so parameters should keep the
 * clipped mass under 1%; clip_mass() reports it and results carry a warning
 * flag when it is exceeded.
 *
 * Families:
 *   uniform            uniform on [mu - sqrt(3 s2), mu + sqrt(3 s2)]
 *   truncated_normal   normal(mu, s2), censored at the bounds
 *   bernoulli_mixture  two-point mixture mu +/- sqrt(s2), p = 1/2 each
 */
struct ConsistencyModel {
  enum class Family { uniform, truncated_normal, bernoulli_mixture };
  Family family = Family::truncated_normal;
  double mu = 0.8;
  double sigma2 = 0.04;
  std::uint64_t seed = 1;

  double clip_mass() const;  // probability mass outside [0,1] pre-clip
};

struct MergePolicy {
  enum class Kind { mean, best_of, weighted };
  Kind kind = Kind::mean;
  // weighted: emphasis over candidates in descending score order; padded
  // with the last weight and normalized to sum 1.
  std::vector<double> weights;
};

// Merges candidate scores under the policy. Weighted sorts a copy
// descending; mean and best_of use the scores as given.
double merge_scores(const MergePolicy& policy, std::vector<double> scores);

struct VarianceStats {
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;  // unbiased (n-1)
  bool clip_warning = false;
};

struct PollutionResult {
  double mean_merged_score = 0.0;
  bool clip_warning = false;
};

struct KSweepRow {
  double expected_consistency = 0.0;  // E[S_k], top-k-of-N under the policy
  double total_cost = 0.0;            // k * cost_per_candidate + merge_cost
  double objective = 0.0;             // E[S_k] - lambda * total_cost
};

// ---------------------------------------------------------------------------
// Monte-Carlo kernels. OpenMP-parallel over fixed trial blocks whose partial
// moments fold in block order, so results are bit-identical for any thread
// count; per-trial counter-based seeding keeps them schedule-independent.
// Serial twins live in sim::reference for cross-checking and benchmarks.
// ---------------------------------------------------------------------------

// Samples k iid scores per trial, mean-merges, returns the moments of the
// merged score across trials. Checks the variance-shrink law sigma2/k.
VarianceStats simulate_merge_variance(const ConsistencyModel& model, int k, std::int64_t trials);

// True iff merged_score <= mean(scores) + 1e-12. Mean merge attains the
// bound with equality; a merge model scoring above it is non-conforming.
bool check_mean_bound(std::span<const double> scores, double merged_score);

// 1 - product of per-step consistencies; any zero step absorbs to 1.
double cumulative_error(std::span<const double> per_step_consistencies);

// Pool of n_good + n_bad candidates per trial; with_filter keeps the top-k
// by oracle-ranked score before merging, otherwise everything is merged.
// oracle_fidelity 1 ranks by the true score, 0 ranks at random; between,
// ranking keys blend score with independent noise.
PollutionResult simulate_pool_pollution(const ConsistencyModel& good, const ConsistencyModel& bad,
                                        int n_good, int n_bad, const MergePolicy& policy,
                                        bool with_filter, int k, std::int64_t trials,
                                        double oracle_fidelity = 1.0);

// E[S_k], cost and objective for every k in 1..N under top-k-of-N selection
// with the given merge policy. One N-candidate sample per trial is shared
// across all k (common random numbers).
std::map<int, KSweepRow> sweep_k_objective(const ConsistencyModel& model,
                                           double cost_per_candidate, double merge_cost,
                                           double lambda, int N, std::int64_t trials,
                                           const MergePolicy& policy = {});

// "k,expected_consistency,total_cost,objective" rows, k ascending.
std::string ksweep_to_csv(const std::map<int, KSweepRow>& rows);

namespace reference {

// Serial implementations kept for testing and the benchmark target; plain
// trial-order loops, no OpenMP.
VarianceStats simulate_merge_variance(const ConsistencyModel& model, int k, std::int64_t trials);
PollutionResult simulate_pool_pollution(const ConsistencyModel& good, const ConsistencyModel& bad,
                                        int n_good, int n_bad, const MergePolicy& policy,
                                        bool with_filter, int k, std::int64_t trials,
                                        double oracle_fidelity = 1.0);
std::map<int, KSweepRow> sweep_k_objective(const ConsistencyModel& model,
                                           double cost_per_candidate, double merge_cost,
                                           double lambda, int N, std::int64_t trials,
                                           const MergePolicy& policy = {});

}  // namespace reference

// Per-trial deterministic sampling, shared by both implementations.
namespace detail {

struct TrialRng {
  std::uint64_t state;
  TrialRng(std::uint64_t seed, std::uint64_t trial);
  std::uint64_t next_u64();
  double next_unit();   // [0,1)
  double next_gauss();  // standard normal, Box-Muller
};

double sample_score(const ConsistencyModel& model, TrialRng& rng);

}  // namespace detail

}  // namespace bootroute::sim
