#pragma once
// Instance generation (adversarial families, random synthetic, trace-driven),
// CSV ingestion and serialization, experiment orchestration, and summaries.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "osdm/core.hpp"
#include "osdm/oracle.hpp"
#include "osdm/pald.hpp"

namespace osdm {

// ---------------------------------------------------------------------------
// Generators.

enum class GenFamily {
  XDecreasingS,
  XDecreasingBase,
  XDecreasingT,
  RoroWorstCase,
  RandomSynthetic,
};

std::string to_string(GenFamily f);
GenFamily gen_family_from_string(const std::string& s);

struct GenSpec {
  GenFamily family = GenFamily::XDecreasingS;
  CostParams params;   // price bounds and cost model; T/S are family-derived
                       // where the family dictates them
  double x = 0.0;      // x-decreasing families: target best price;
                       // RandomSynthetic: upper price of the sampling band
                       // (0 = params.p_max)
  int n = 200;         // descent resolution
  int m = 50;          // batch size
  double iota = 0.0;   // price offset; 0 = default 1e-6 * p_min
  double sigma = 0.9;  // RoroWorstCase: max demand chunk, in (0,1)
  int K_rounds = 0;    // RoroWorstCase: extra doubling rounds beyond round 0
  std::uint64_t seed = 0;
};

// Builds one instance of the requested family. Deterministic given spec.
Instance gen(const GenSpec& spec);

// Draws a random cost-parameter set that satisfies the admissibility
// assumptions (c + epsilon <= 1, smoothing coefficients at most half the
// price gap) AND yields well-formed, nonincreasing analytic thresholds and
// finite ratios; rejection-samples until both hold. Deterministic given seed.
CostParams random_admissible_params(std::uint64_t seed, bool tracking);

// ---------------------------------------------------------------------------
// Trace ingestion.

struct PriceSeries {
  std::vector<std::int64_t> timestamps;  // epoch seconds, uniform spacing
  std::vector<double> prices;            // floored and capped
  std::int64_t spacing_seconds = 0;
  double p_min = 1.0;  // = p_floor
  double p_max = 0.0;  // = cap value (nearest-rank cap_quantile)
};

// Reads `timestamp,price` CSV (ISO-8601 timestamps, uniform spacing); floors
// prices at p_floor and caps them at the nearest-rank cap_quantile value.
// Throws std::runtime_error naming the offending line on malformed input.
PriceSeries load_prices(const std::string& path, double p_floor = 1.0,
                        double cap_quantile = 0.999);

struct TraceConfig {
  std::string price_csv;
  std::string demand_csv;
  int bucket_minutes = 15;
  int T = 48;                       // slots per instance window
  std::string window_start;         // ISO-8601; empty = series start
  double prop_base = 0.8;           // probability a task is base demand
  double storage_multiplier = 1.0;  // S = multiplier after peak normalization
  int deadline_horizon = 16;        // deadlines uniform in [t+1, min(t+h, T)]
  bool tracking = false;            // emit a tracking-mode instance
  std::uint64_t seed = 0;
  CostParams params;  // cost-model knobs; p_min/p_max/S/T are derived
};

struct TraceTask {
  std::string task_id;
  std::int64_t start = 0;  // epoch seconds
  std::int64_t end = 0;
};

// Reads `task_id,start,end` CSV with ISO-8601 timestamps.
std::vector<TraceTask> load_tasks(const std::string& path);

// Buckets tasks into slots with fractional weights, normalizes demand so the
// second-largest daily-peak slot equals 1.0 (storage sizing rule), splits
// tasks into base vs flexible with Bernoulli(prop_base), and draws flexible
// deadlines uniformly from [t+1, min(t+deadline_horizon, T)].
Instance build_trace_instance(const TraceConfig& cfg, const PriceSeries& prices,
                              const std::vector<TraceTask>& tasks);

// ---------------------------------------------------------------------------
// Serialization.

// Instance CSV: header `t,p,b,f,deadline,a` (deadline empty when f = 0;
// a empty in Switching mode); params in a key=value sidecar at
// `path + ".params"` using exactly the CostParams field names.
void write_instance_csv(const std::string& path, const Instance& instance);
Instance read_instance_csv(const std::string& path);

// Schedule CSV: header `t,x,z,s`.
void write_schedule_csv(const std::string& path, const Schedule& schedule);
Schedule read_schedule_csv(const std::string& path);

// Cost breakdown as JSON.
void write_cost_json(const std::string& path, const CostBreakdown& cost);

// Threshold CSV: header `kind,j,u,y` with kind in
// {base, flex_purchase, flex_delivery}.
void write_thresholds_csv(const std::string& path, const PaldThresholds& th);
PaldThresholds read_thresholds_csv(const std::string& path);

// key=value config file (one pair per line; '#' comments).
std::map<std::string, std::string> read_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// Experiments.

struct ExperimentConfig {
  std::vector<std::string> algs;  // paad | pald | doubling-roro | immediate |
                                  // uniform
  std::string opt_method = "auto";  // auto | lp | alt | brute
  PaldThresholds pald_thresholds;   // used by "pald" when non-empty
  int threads = 0;                  // 0 = hardware concurrency
  std::uint64_t seed = 0;
};

struct ResultRow {
  std::string instance;
  std::string alg;
  double ecr = 0.0;
  CostBreakdown cost;
  double opt_cost = 0.0;
  std::string opt_method;
  int steps = 0;
  double ms_per_step = 0.0;
  std::string error;  // nonempty when this (instance, alg) pair failed
};

// Runs every algorithm on every instance; failures become rows with the
// error tag set and the run continues. Row order is (instance index, alg
// index) regardless of completion order.
std::vector<ResultRow> run_experiment(const std::vector<Instance>& instances,
                                      const ExperimentConfig& config);

// Results CSV with header
// `instance,alg,ecr,cost_total,cost_purchase,cost_smoothing,cost_delivery,
//  cost_delivery_switching,opt_cost,opt_method,steps,ms_per_step`.
void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows);

struct AlgSummary {
  std::string alg;
  int count = 0;  // rows with a finite ECR
  int errors = 0;
  double mean = 0.0, median = 0.0, p95 = 0.0, min = 0.0, max = 0.0;
  std::vector<double> cdf;  // 101 nearest-rank quantiles of ECR (q = 0..100%)
};

// Per-algorithm aggregates over the finite-ECR rows (nearest-rank order
// statistics).
std::vector<AlgSummary> summarize(const std::vector<ResultRow>& rows);

void write_summary_csv(const std::string& path,
                       const std::vector<AlgSummary>& summaries);

}  // namespace osdm
