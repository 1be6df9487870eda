#include "bootroute/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bootroute::sim {

namespace detail {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial) {
  // Counter-based: the stream for trial i depends only on (seed, i), never
  // on which thread runs it.
  state = seed ^ (0x9E3779B97F4A7C15ULL * (trial + 1));
  splitmix64(state);
}

std::uint64_t TrialRng::next_u64() { return splitmix64(state); }

double TrialRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double TrialRng::next_gauss() {
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sample_score(const ConsistencyModel& model, TrialRng& rng) {
  double value = 0.0;
  double sigma = std::sqrt(model.sigma2);
  switch (model.family) {
    case ConsistencyModel::Family::uniform: {
      double half = std::sqrt(3.0 * model.sigma2);
      value = model.mu + (2.0 * rng.next_unit() - 1.0) * half;
      break;
    }
    case ConsistencyModel::Family::truncated_normal:
      value = model.mu + sigma * rng.next_gauss();
      break;
    case ConsistencyModel::Family::bernoulli_mixture:
      value = rng.next_unit() < 0.5 ? model.mu - sigma : model.mu + sigma;
      break;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace detail

namespace {

constexpr std::int64_t kTrialBlock = 8192;
constexpr double kClipWarnThreshold = 0.01;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> normalized_weights(const MergePolicy& policy, std::size_t k) {
  std::vector<double> w(policy.weights);
  if (w.empty()) w.push_back(1.0);
  while (w.size() < k) w.push_back(w.back());
  w.resize(k);
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (sum <= 0.0) throw std::invalid_argument("weighted merge needs positive weights");
  for (auto& x : w) x /= sum;
  return w;
}

// Runs `body(block_first, block_last, block_index)` over [0, trials) in
// fixed-size blocks. Parallelism is an implementation detail: partials are
// stored per block and folded in index order by the caller, so scheduling
// never changes the result.
template <typename Body>
void for_each_block(std::int64_t trials, std::int64_t nblocks, const Body& body) {
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    std::int64_t first = b * kTrialBlock;
    std::int64_t last = std::min(trials, first + kTrialBlock);
    body(first, last, b);
  }
}

std::int64_t block_count(std::int64_t trials) {
  return (trials + kTrialBlock - 1) / kTrialBlock;
}

double pollution_trial(const ConsistencyModel& good, const ConsistencyModel& bad, int n_good,
                       int n_bad, const MergePolicy& policy, bool with_filter, int k,
                       double oracle_fidelity, detail::TrialRng& rng) {
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(n_good + n_bad));
  for (int i = 0; i < n_good; ++i) scores.push_back(detail::sample_score(good, rng));
  for (int i = 0; i < n_bad; ++i) scores.push_back(detail::sample_score(bad, rng));
  if (!with_filter) return merge_scores(policy, std::move(scores));

  // Oracle ranking key: true score blended with independent noise.
  std::vector<std::pair<double, double>> keyed;  // (key, score)
  keyed.reserve(scores.size());
  for (double s : scores) {
    double key = oracle_fidelity * s + (1.0 - oracle_fidelity) * rng.next_unit();
    keyed.emplace_back(key, s);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + k, keyed.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) kept.push_back(keyed[static_cast<std::size_t>(i)].second);
  return merge_scores(policy, std::move(kept));
}

std::uint64_t pollution_seed(const ConsistencyModel& good, const ConsistencyModel& bad) {
  return good.seed * 31 + bad.seed;
}

void validate_pollution_args(int n_good, int n_bad, int k, std::int64_t trials,
                             double oracle_fidelity) {
  if (k < 1 || n_good + n_bad < k) {
    throw std::invalid_argument("pool pollution requires n_good + n_bad >= k >= 1");
  }
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (oracle_fidelity < 0.0 || oracle_fidelity > 1.0) {
    throw std::invalid_argument("oracle_fidelity must lie in [0,1]");
  }
}

// Shared by the parallel and serial k-sweeps: top-k merge for every k from
// one sorted sample.
void ksweep_trial(const ConsistencyModel& model, int N, const MergePolicy& policy,
                  detail::TrialRng& rng, std::vector<double>& scratch,
                  std::vector<double>& per_k_sums) {
  scratch.clear();
  for (int i = 0; i < N; ++i) scratch.push_back(detail::sample_score(model, rng));
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  switch (policy.kind) {
    case MergePolicy::Kind::mean: {
      double prefix = 0.0;
      for (int k = 1; k <= N; ++k) {
        prefix += scratch[static_cast<std::size_t>(k - 1)];
        per_k_sums[static_cast<std::size_t>(k - 1)] += prefix / k;
      }
      break;
    }
    case MergePolicy::Kind::best_of: {
      for (int k = 1; k <= N; ++k) per_k_sums[static_cast<std::size_t>(k - 1)] += scratch[0];
      break;
    }
    case MergePolicy::Kind::weighted: {
      for (int k = 1; k <= N; ++k) {
        auto w = normalized_weights(policy, static_cast<std::size_t>(k));
        double merged = 0.0;
        for (int i = 0; i < k; ++i) merged += w[static_cast<std::size_t>(i)] * scratch[static_cast<std::size_t>(i)];
        per_k_sums[static_cast<std::size_t>(k - 1)] += merged;
      }
      break;
    }
  }
}

std::map<int, KSweepRow> ksweep_from_sums(const std::vector<double>& per_k_sums,
                                          std::int64_t trials, double cost_per_candidate,
                                          double merge_cost, double lambda, int N) {
  std::map<int, KSweepRow> rows;
  for (int k = 1; k <= N; ++k) {
    KSweepRow row;
    row.expected_consistency = per_k_sums[static_cast<std::size_t>(k - 1)] / static_cast<double>(trials);
    row.total_cost = k * cost_per_candidate + merge_cost;
    row.objective = row.expected_consistency - lambda * row.total_cost;
    rows[k] = row;
  }
  return rows;
}

}  // namespace

double ConsistencyModel::clip_mass() const {
  double sigma = std::sqrt(sigma2);
  switch (family) {
    case Family::uniform: {
      double half = std::sqrt(3.0 * sigma2);
      if (half <= 0.0) return (mu < 0.0 || mu > 1.0) ? 1.0 : 0.0;
      double lo = mu - half;
      double hi = mu + half;
      double below = std::clamp((0.0 - lo) / (hi - lo), 0.0, 1.0);
      double above = std::clamp((hi - 1.0) / (hi - lo), 0.0, 1.0);
      return below + above;
    }
    case Family::truncated_normal: {
      if (sigma <= 0.0) return (mu < 0.0 || mu > 1.0) ? 1.0 : 0.0;
      return normal_cdf((0.0 - mu) / sigma) + (1.0 - normal_cdf((1.0 - mu) / sigma));
    }
    case Family::bernoulli_mixture: {
      double mass = 0.0;
      if (mu - sigma < 0.0 || mu - sigma > 1.0) mass += 0.5;
      if (mu + sigma > 1.0 || mu + sigma < 0.0) mass += 0.5;
      return mass;
    }
  }
  return 0.0;
}

double merge_scores(const MergePolicy& policy, std::vector<double> scores) {
  if (scores.empty()) throw std::invalid_argument("merge over empty score set");
  switch (policy.kind) {
    case MergePolicy::Kind::mean:
      return std::accumulate(scores.begin(), scores.end(), 0.0) /
             static_cast<double>(scores.size());
    case MergePolicy::Kind::best_of:
      return *std::max_element(scores.begin(), scores.end());
    case MergePolicy::Kind::weighted: {
      std::sort(scores.begin(), scores.end(), std::greater<>());
      auto w = normalized_weights(policy, scores.size());
      double merged = 0.0;
      for (std::size_t i = 0; i < scores.size(); ++i) merged += w[i] * scores[i];
      return merged;
    }
  }
  throw std::logic_error("unknown merge policy");
}

VarianceStats simulate_merge_variance(const ConsistencyModel& model, int k,
                                      std::int64_t trials) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::int64_t nblocks = block_count(trials);
  std::vector<double> block_sum(static_cast<std::size_t>(nblocks), 0.0);
  std::vector<double> block_sumsq(static_cast<std::size_t>(nblocks), 0.0);
  for_each_block(trials, nblocks, [&](std::int64_t first, std::int64_t last, std::int64_t b) {
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::int64_t t = first; t < last; ++t) {
      detail::TrialRng rng(model.seed, static_cast<std::uint64_t>(t));
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += detail::sample_score(model, rng);
      double merged = acc / k;
      sum += merged;
      sumsq += merged * merged;
    }
    block_sum[static_cast<std::size_t>(b)] = sum;
    block_sumsq[static_cast<std::size_t>(b)] = sumsq;
  });
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) {
    sum += block_sum[static_cast<std::size_t>(b)];
    sumsq += block_sumsq[static_cast<std::size_t>(b)];
  }
  VarianceStats stats;
  stats.empirical_mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    stats.empirical_variance = std::max(
        0.0,
        (sumsq - sum * sum / static_cast<double>(trials)) / static_cast<double>(trials - 1));
  }
  stats.clip_warning = model.clip_mass() > kClipWarnThreshold;
  return stats;
}

bool check_mean_bound(std::span<const double> scores, double merged_score) {
  if (scores.empty()) throw std::invalid_argument("check_mean_bound over empty score set");
  double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                static_cast<double>(scores.size());
  return merged_score <= mean + 1e-12;
}

double cumulative_error(std::span<const double> per_step_consistencies) {
  double product = 1.0;
  for (double s : per_step_consistencies) {
    if (s < 0.0 || s > 1.0) {
      throw std::invalid_argument("per-step consistency outside [0,1]");
    }
    product *= s;
  }
  return 1.0 - product;
}

PollutionResult simulate_pool_pollution(const ConsistencyModel& good, const ConsistencyModel& bad,
                                        int n_good, int n_bad, const MergePolicy& policy,
                                        bool with_filter, int k, std::int64_t trials,
                                        double oracle_fidelity) {
  validate_pollution_args(n_good, n_bad, k, trials, oracle_fidelity);
  std::uint64_t seed = pollution_seed(good, bad);
  std::int64_t nblocks = block_count(trials);
  std::vector<double> block_sum(static_cast<std::size_t>(nblocks), 0.0);
  for_each_block(trials, nblocks, [&](std::int64_t first, std::int64_t last, std::int64_t b) {
    double sum = 0.0;
    for (std::int64_t t = first; t < last; ++t) {
      detail::TrialRng rng(seed, static_cast<std::uint64_t>(t));
      sum += pollution_trial(good, bad, n_good, n_bad, policy, with_filter, k, oracle_fidelity,
                             rng);
    }
    block_sum[static_cast<std::size_t>(b)] = sum;
  });
  double sum = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) sum += block_sum[static_cast<std::size_t>(b)];
  PollutionResult result;
  result.mean_merged_score = sum / static_cast<double>(trials);
  result.clip_warning =
      good.clip_mass() > kClipWarnThreshold || bad.clip_mass() > kClipWarnThreshold;
  return result;
}

std::map<int, KSweepRow> sweep_k_objective(const ConsistencyModel& model,
                                           double cost_per_candidate, double merge_cost,
                                           double lambda, int N, std::int64_t trials,
                                           const MergePolicy& policy) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  std::int64_t nblocks = block_count(trials);
  std::vector<std::vector<double>> block_sums(
      static_cast<std::size_t>(nblocks), std::vector<double>(static_cast<std::size_t>(N), 0.0));
  for_each_block(trials, nblocks, [&](std::int64_t first, std::int64_t last, std::int64_t b) {
    std::vector<double> scratch;
    scratch.reserve(static_cast<std::size_t>(N));
    auto& sums = block_sums[static_cast<std::size_t>(b)];
    for (std::int64_t t = first; t < last; ++t) {
      detail::TrialRng rng(model.seed, static_cast<std::uint64_t>(t));
      ksweep_trial(model, N, policy, rng, scratch, sums);
    }
  });
  std::vector<double> per_k_sums(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t b = 0; b < nblocks; ++b) {
    for (int k = 0; k < N; ++k) {
      per_k_sums[static_cast<std::size_t>(k)] +=
          block_sums[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
    }
  }
  return ksweep_from_sums(per_k_sums, trials, cost_per_candidate, merge_cost, lambda, N);
}

std::string ksweep_to_csv(const std::map<int, KSweepRow>& rows) {
  std::ostringstream out;
  out << "k,expected_consistency,total_cost,objective\n";
  out.precision(9);
  for (const auto& [k, row] : rows) {
    out << k << ',' << row.expected_consistency << ',' << row.total_cost << ','
        << row.objective << '\n';
  }
  return out.str();
}

namespace reference {

VarianceStats simulate_merge_variance(const ConsistencyModel& model, int k,
                                      std::int64_t trials) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    detail::TrialRng rng(model.seed, static_cast<std::uint64_t>(t));
    double acc = 0.0;
    for (int i = 0; i < k; ++i) acc += detail::sample_score(model, rng);
    double merged = acc / k;
    sum += merged;
    sumsq += merged * merged;
  }
  VarianceStats stats;
  stats.empirical_mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    stats.empirical_variance = std::max(
        0.0,
        (sumsq - sum * sum / static_cast<double>(trials)) / static_cast<double>(trials - 1));
  }
  stats.clip_warning = model.clip_mass() > kClipWarnThreshold;
  return stats;
}

PollutionResult simulate_pool_pollution(const ConsistencyModel& good, const ConsistencyModel& bad,
                                        int n_good, int n_bad, const MergePolicy& policy,
                                        bool with_filter, int k, std::int64_t trials,
                                        double oracle_fidelity) {
  validate_pollution_args(n_good, n_bad, k, trials, oracle_fidelity);
  std::uint64_t seed = pollution_seed(good, bad);
  double sum = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    detail::TrialRng rng(seed, static_cast<std::uint64_t>(t));
    sum += pollution_trial(good, bad, n_good, n_bad, policy, with_filter, k, oracle_fidelity,
                           rng);
  }
  PollutionResult result;
  result.mean_merged_score = sum / static_cast<double>(trials);
  result.clip_warning =
      good.clip_mass() > kClipWarnThreshold || bad.clip_mass() > kClipWarnThreshold;
  return result;
}

std::map<int, KSweepRow> sweep_k_objective(const ConsistencyModel& model,
                                           double cost_per_candidate, double merge_cost,
                                           double lambda, int N, std::int64_t trials,
                                           const MergePolicy& policy) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  std::vector<double> per_k_sums(static_cast<std::size_t>(N), 0.0);
  std::vector<double> scratch;
  scratch.reserve(static_cast<std::size_t>(N));
  for (std::int64_t t = 0; t < trials; ++t) {
    detail::TrialRng rng(model.seed, static_cast<std::uint64_t>(t));
    ksweep_trial(model, N, policy, rng, scratch, per_k_sums);
  }
  return ksweep_from_sums(per_k_sums, trials, cost_per_candidate, merge_cost, lambda, N);
}

}  // namespace reference

}  // namespace bootroute::sim
