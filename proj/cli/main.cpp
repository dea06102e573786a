// osdm command-line tool: instance generation, algorithm runs, offline
// optima, PALD training, threshold identity verification, and batch
// experiments.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "osdm/baselines.hpp"
#include "osdm/core.hpp"
#include "osdm/oracle.hpp"
#include "osdm/paad.hpp"
#include "osdm/pald.hpp"
#include "osdm/ratios.hpp"
#include "osdm/threshold.hpp"
#include "osdm/workbench.hpp"

namespace fs = std::filesystem;
using namespace osdm;

namespace {

// ---------------------------------------------------------------------------
// Shared option plumbing.

struct ParamFlags {
  CostParams params;
  std::string smoothing = "Switching";
  std::string delivery = "Constant";

  void attach(CLI::App* cmd) {
    cmd->add_option("--p-min", params.p_min, "Price floor");
    cmd->add_option("--p-max", params.p_max, "Price cap");
    cmd->add_option("--gamma", params.gamma,
                    "Purchase switching coefficient (Switching mode)");
    cmd->add_option("--delta", params.delta, "Delivery switching coefficient");
    cmd->add_option("--eta", params.eta,
                    "Purchase tracking coefficient (Tracking mode)");
    cmd->add_option("--c", params.c, "Storage-dependent delivery rate scale");
    cmd->add_option("--epsilon", params.epsilon,
                    "Storage-independent delivery rate offset");
    cmd->add_option("--storage", params.S, "Storage capacity S");
    cmd->add_option("--horizon", params.T, "Horizon length T");
    cmd->add_option("--smoothing", smoothing,
                    "Smoothing mode: Switching | Tracking");
    cmd->add_option("--delivery", delivery,
                    "Delivery mode: Decreasing | Increasing | Constant");
  }

  CostParams resolve() const {
    CostParams p = params;
    p.smoothing_mode = smoothing_mode_from_string(smoothing);
    p.delivery_mode = delivery_mode_from_string(delivery);
    return p;
  }
};

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw std::runtime_error("config key '" + key + "': expected boolean, got '" +
                           s + "'");
}

std::string iso_from_epoch(std::int64_t epoch) {
  std::time_t tt = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

// Lists the instance CSVs in a directory (files ending in ".csv"; the
// key=value sidecars end in ".csv.params" and are skipped), sorted by name.
std::vector<std::string> list_instance_csvs(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string p = entry.path().string();
    if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0)
      paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw std::runtime_error("no instance CSVs found in " + dir);
  return paths;
}

Schedule run_alg(const std::string& alg, const Instance& inst,
                 const PaldThresholds& th) {
  if (alg == "paad") return paad_run(inst);
  if (alg == "pald") return pald_run(inst, th);
  if (alg == "doubling-roro") return doubling_roro_run(inst);
  if (alg == "immediate") return naive_run(inst, NaivePolicy::Immediate);
  if (alg == "uniform") return naive_run(inst, NaivePolicy::UniformSpread);
  throw std::runtime_error("unknown algorithm: " + alg);
}

void report_infeasible(const Instance& inst, const Schedule& sched,
                       const std::string& what) {
  const std::vector<Violation> v = check_feasible(inst, sched);
  if (v.empty()) return;
  std::cerr << what << ": schedule violates " << v.size()
            << " constraint(s); first: " << v.front().what << "\n";
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const GenSpec& base_spec, const std::string& out,
            const std::string& out_dir, int count) {
  if (count < 1) throw std::runtime_error("--count must be >= 1");
  if (count > 1 || !out_dir.empty()) {
    const std::string dir = out_dir.empty() ? "." : out_dir;
    fs::create_directories(dir);
    for (int i = 0; i < count; ++i) {
      GenSpec spec = base_spec;
      spec.seed = base_spec.seed + static_cast<std::uint64_t>(i);
      Instance inst = gen(spec);
      char name[64];
      std::snprintf(name, sizeof(name), "inst_%04d.csv", i);
      const std::string path = dir + "/" + name;
      write_instance_csv(path, inst);
      std::cout << path << "  label=" << inst.label << "  T=" << inst.T()
                << "  demand=" << inst.total_demand() << "\n";
    }
    return 0;
  }
  Instance inst = gen(base_spec);
  write_instance_csv(out, inst);
  std::cout << out << "  label=" << inst.label << "  T=" << inst.T()
            << "  demand=" << inst.total_demand() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const std::string& instance_path, const std::string& alg,
            const std::string& thresholds_path,
            const std::string& schedule_out, const std::string& cost_out) {
  Instance inst = read_instance_csv(instance_path);
  PaldThresholds th;
  if (alg == "pald") {
    th = thresholds_path.empty() ? analytic_knots(inst.params, 10)
                                 : read_thresholds_csv(thresholds_path);
  }
  Schedule sched = run_alg(alg, inst, th);
  report_infeasible(inst, sched, alg);
  CostBreakdown cost = evaluate_cost(inst, sched);
  if (!schedule_out.empty()) write_schedule_csv(schedule_out, sched);
  if (!cost_out.empty()) write_cost_json(cost_out, cost);
  std::cout << alg << " cost: total=" << cost.total
            << " purchase=" << cost.purchase
            << " purchase_smoothing=" << cost.purchase_smoothing
            << " delivery=" << cost.delivery
            << " delivery_switching=" << cost.delivery_switching << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// opt

int cmd_opt(const std::string& instance_path, const std::string& method,
            double grid_step, const std::string& schedule_out,
            const std::string& cost_out) {
  Instance inst = read_instance_csv(instance_path);
  OptResult res;
  std::string used = method;
  if (method == "auto") {
    if (inst.params.c == 0.0 || inst.params.S == 0.0) {
      res = opt_lp(inst);
      used = "lp";
    } else {
      res = opt_bilinear(inst);
      used = "alt";
    }
  } else if (method == "lp") {
    res = opt_lp(inst);
  } else if (method == "alt") {
    res = opt_bilinear(inst);
  } else if (method == "brute") {
    res = opt_bruteforce(inst, grid_step);
  } else {
    throw std::runtime_error("unknown --method: " + method);
  }
  report_infeasible(inst, res.schedule, "opt(" + used + ")");
  CostBreakdown cost = evaluate_cost(inst, res.schedule);
  if (!schedule_out.empty()) write_schedule_csv(schedule_out, res.schedule);
  if (!cost_out.empty()) write_cost_json(cost_out, cost);
  std::cout << "opt(" << used << ") cost=" << res.cost
            << " (evaluated " << cost.total << ")";
  if (res.iterations > 0) std::cout << " iterations=" << res.iterations;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& instances_dir, int K, double rho_mult,
              double rho_abs, int grid, const TrainConfig& tc,
              const std::string& thresholds_out, const std::string& loss_out) {
  std::vector<Instance> instances;
  for (const std::string& p : list_instance_csvs(instances_dir))
    instances.push_back(read_instance_csv(p));
  const CostParams& P = instances.front().params;
  const bool tracking = P.smoothing_mode == SmoothingMode::Tracking;

  double rho = rho_abs;
  if (rho <= 0.0) {
    const RatioSet r = ratios(P);
    rho = rho_mult * (tracking ? r.alpha_T : r.alpha);
  }

  RobustSetSpec base_set;
  base_set.mode = tracking ? RobustSetMode::BaseT : RobustSetMode::BaseS;
  base_set.rho = rho;
  base_set.params = P;
  base_set.grid = grid;
  RobustSetSpec flex_set = base_set;
  flex_set.mode = tracking ? RobustSetMode::FlexT : RobustSetMode::FlexS;

  // K is fixed by the training routine's initializer; expose it anyway so the
  // CLI surface matches the library default.
  (void)K;
  TrainResult res = train_pald_s(instances, base_set, flex_set, tc);
  write_thresholds_csv(thresholds_out, res.thresholds);
  if (!loss_out.empty()) {
    std::ofstream out(loss_out);
    if (!out) throw std::runtime_error("cannot write " + loss_out);
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < res.loss_trace.size(); ++i)
      out << i << ',' << res.loss_trace[i] << '\n';
  }
  std::cout << "trained on " << instances.size() << " instances, rho=" << rho
            << "\n";
  std::cout << "loss: init=" << res.loss_trace.front()
            << " best=" << *std::min_element(res.loss_trace.begin(),
                                             res.loss_trace.end())
            << " (" << res.loss_trace.size() - 1 << " epochs)\n";
  std::cout << "thresholds written to " << thresholds_out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(int sets, std::uint64_t seed, const std::string& out_path,
               double tol_scale) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  *out << "param_set,w,v,residual\n";
  int bad = 0;
  double worst = 0.0;
  const int WG = 101, VG = 21;
  for (int set_i = 0; set_i < sets; ++set_i) {
    const CostParams p = random_admissible_params(
        seed + static_cast<std::uint64_t>(set_i), set_i % 2 == 1);
    const double tol = tol_scale * p.p_max;
    // Base identity over the progress grid (v column empty).
    for (int i = 0; i < WG; ++i) {
      const double w = static_cast<double>(i) / (WG - 1);
      const double r = base_identity_residual(p, w);
      *out << set_i << ',' << w << ",," << r << '\n';
      if (std::abs(r) > tol) ++bad;
      worst = std::max(worst, std::abs(r) / p.p_max);
    }
    // Flexible identity over the triangle v <= w.
    for (int i = 0; i < VG; ++i) {
      const double w = static_cast<double>(i) / (VG - 1);
      for (int j = 0; j <= i; ++j) {
        const double v = static_cast<double>(j) / (VG - 1);
        const double r = flex_identity_residual(p, w, v);
        *out << set_i << ',' << w << ',' << v << ',' << r << '\n';
        if (std::abs(r) > tol) ++bad;
        worst = std::max(worst, std::abs(r) / p.p_max);
      }
    }
  }
  std::cerr << "verify: " << sets << " parameter sets, worst |residual|/p_max="
            << worst << (bad ? " FAIL" : " ok") << "\n";
  return bad == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              bool write_instances) {
  std::map<std::string, std::string> cfg = read_config_file(config_path);
  auto get = [&](const std::string& key, const std::string& dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : it->second;
  };
  auto get_d = [&](const std::string& key, double dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : std::stod(it->second);
  };
  auto get_i = [&](const std::string& key, int dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : std::stoi(it->second);
  };

  CostParams params;
  params.p_min = get_d("p_min", params.p_min);
  params.p_max = get_d("p_max", params.p_max);
  params.gamma = get_d("gamma", params.gamma);
  params.delta = get_d("delta", params.delta);
  params.eta = get_d("eta", params.eta);
  params.c = get_d("c", params.c);
  params.epsilon = get_d("epsilon", params.epsilon);
  params.S = get_d("S", params.S);
  params.T = get_i("T", params.T);
  params.smoothing_mode =
      smoothing_mode_from_string(get("smoothing_mode", "Switching"));
  params.delivery_mode =
      delivery_mode_from_string(get("delivery_mode", "Constant"));

  const std::string source = get("source", "gen");
  const int count = get_i("count", 1);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(std::stoull(get("seed", "0")));

  std::vector<Instance> instances;
  if (source == "gen") {
    GenSpec spec;
    spec.family = gen_family_from_string(get("family", "RandomSynthetic"));
    spec.params = params;
    spec.x = get_d("x", spec.x);
    spec.n = get_i("n", spec.n);
    spec.m = get_i("m", spec.m);
    spec.iota = get_d("iota", spec.iota);
    spec.sigma = get_d("sigma", spec.sigma);
    spec.K_rounds = get_i("K_rounds", spec.K_rounds);
    for (int i = 0; i < count; ++i) {
      spec.seed = seed + static_cast<std::uint64_t>(i);
      instances.push_back(gen(spec));
    }
  } else if (source == "trace") {
    TraceConfig tc;
    tc.price_csv = get("price_csv", "");
    tc.demand_csv = get("demand_csv", "");
    if (tc.price_csv.empty() || tc.demand_csv.empty())
      throw std::runtime_error(
          "trace source requires price_csv and demand_csv keys");
    tc.bucket_minutes = get_i("bucket_minutes", tc.bucket_minutes);
    tc.T = get_i("T", params.T);
    tc.window_start = get("window_start", "");
    tc.prop_base = get_d("prop_base", tc.prop_base);
    tc.storage_multiplier = get_d("storage_multiplier", tc.storage_multiplier);
    tc.deadline_horizon = get_i("deadline_horizon", tc.deadline_horizon);
    tc.tracking = parse_bool(get("tracking", "false"), "tracking");
    tc.params = params;
    const int stride = get_i("window_stride", 0);

    const PriceSeries prices = load_prices(tc.price_csv);
    const std::vector<TraceTask> tasks = load_tasks(tc.demand_csv);
    std::int64_t start0 = prices.timestamps.front();
    if (!tc.window_start.empty()) {
      // Resolve the configured start against the series to allow striding.
      bool found = false;
      for (std::int64_t ts : prices.timestamps) {
        if (iso_from_epoch(ts) == tc.window_start) {
          start0 = ts;
          found = true;
          break;
        }
      }
      if (!found)
        throw std::runtime_error("window_start not found in price series: " +
                                 tc.window_start);
    }
    const std::int64_t last_start =
        prices.timestamps.back() -
        static_cast<std::int64_t>(tc.T - 1) * prices.spacing_seconds;
    for (int i = 0; i < count; ++i) {
      const std::int64_t start =
          start0 + static_cast<std::int64_t>(i) * stride *
                       prices.spacing_seconds;
      if (start > last_start) {
        std::cerr << "bench: window " << i
                  << " runs past the price series; stopping at " << i
                  << " instances\n";
        break;
      }
      TraceConfig tci = tc;
      tci.window_start = iso_from_epoch(start);
      tci.seed = seed + static_cast<std::uint64_t>(i);
      Instance inst = build_trace_instance(tci, prices, tasks);
      char label[64];
      std::snprintf(label, sizeof(label), "trace_%04d", i);
      inst.label = label;
      instances.push_back(std::move(inst));
    }
  } else {
    throw std::runtime_error("config key 'source' must be gen or trace");
  }
  if (instances.empty()) throw std::runtime_error("no instances to run");

  ExperimentConfig ec;
  ec.algs = split_csv_list(get("algs", "paad,pald,immediate,uniform"));
  ec.opt_method = get("opt_method", "auto");
  ec.threads = get_i("threads", 0);
  ec.seed = seed;
  const std::string th_path = get("thresholds", "");
  if (!th_path.empty()) ec.pald_thresholds = read_thresholds_csv(th_path);

  fs::create_directories(out_dir);
  if (write_instances) {
    const std::string idir = out_dir + "/instances";
    fs::create_directories(idir);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "inst_%04zu.csv", i);
      write_instance_csv(idir + "/" + name, instances[i]);
    }
  }

  const std::vector<ResultRow> rows = run_experiment(instances, ec);
  write_results_csv(out_dir + "/results.csv", rows);
  const std::vector<AlgSummary> summaries = summarize(rows);
  write_summary_csv(out_dir + "/summary.csv", summaries);

  std::printf("%-14s %6s %7s %8s %8s %8s %8s %8s\n", "alg", "n", "errors",
              "mean", "median", "p95", "min", "max");
  for (const AlgSummary& s : summaries)
    std::printf("%-14s %6d %7d %8.4f %8.4f %8.4f %8.4f %8.4f\n",
                s.alg.c_str(), s.count, s.errors, s.mean, s.median, s.p95,
                s.min, s.max);
  std::cout << "results: " << out_dir << "/results.csv\nsummary: " << out_dir
            << "/summary.csv\n";
  int errors = 0;
  for (const ResultRow& r : rows)
    if (!r.error.empty()) ++errors;
  if (errors > 0)
    std::cerr << "bench: " << errors << " (instance, alg) pair(s) failed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Online smoothed demand management: algorithms, oracles, experiments"};
  app.require_subcommand(1);

  // gen -----------------------------------------------------------------
  auto* g = app.add_subcommand("gen", "Generate an instance CSV");
  ParamFlags g_params;
  g_params.params.p_min = 10.0;
  g_params.params.p_max = 200.0;
  g_params.params.gamma = 10.0;
  g_params.params.delta = 5.0;
  g_params.params.c = 0.2;
  g_params.params.epsilon = 0.05;
  g_params.params.S = 1.0;
  g_params.params.T = 48;
  g_params.delivery = "Decreasing";
  g_params.attach(g);
  std::string g_family = "RandomSynthetic";
  GenSpec g_spec;
  std::string g_out = "instance.csv", g_out_dir;
  int g_count = 1;
  g->add_option("--family", g_family,
                "XDecreasingS | XDecreasingBase | XDecreasingT | RoroWorstCase "
                "| RandomSynthetic");
  auto* g_x = g->add_option("--x", g_spec.x,
                            "x-decreasing target price / random price band cap");
  g->add_option("--n", g_spec.n, "Descent resolution");
  g->add_option("--m", g_spec.m, "Batch size");
  g->add_option("--iota", g_spec.iota, "Price offset (0 = 1e-6 * p_min)");
  g->add_option("--sigma", g_spec.sigma, "RoroWorstCase demand chunk");
  g->add_option("--k-rounds", g_spec.K_rounds,
                "RoroWorstCase extra doubling rounds");
  g->add_option("--seed", g_spec.seed, "RNG seed");
  g->add_option("--count", g_count, "Number of instances (seeds seed+i)");
  g->add_option("--out", g_out, "Output CSV path (count=1)");
  g->add_option("--out-dir", g_out_dir, "Output directory (count>1)");

  // run -----------------------------------------------------------------
  auto* r = app.add_subcommand("run", "Run an online algorithm on an instance");
  std::string r_instance, r_alg = "paad", r_th, r_sched = "schedule.csv",
              r_cost = "cost.json";
  r->add_option("--instance", r_instance, "Instance CSV")->required();
  r->add_option("--alg", r_alg,
                "paad | pald | doubling-roro | immediate | uniform");
  r->add_option("--thresholds", r_th,
                "Threshold CSV for pald (default: analytic, K=10)");
  r->add_option("--schedule-out", r_sched, "Schedule CSV output");
  r->add_option("--cost-out", r_cost, "Cost breakdown JSON output");

  // opt -----------------------------------------------------------------
  auto* o = app.add_subcommand("opt", "Compute the offline optimum");
  std::string o_instance, o_method = "auto", o_sched = "opt_schedule.csv",
              o_cost = "opt_cost.json";
  double o_grid = 0.25;
  o->add_option("--instance", o_instance, "Instance CSV")->required();
  o->add_option("--method", o_method, "auto | lp | alt | brute");
  o->add_option("--grid-step", o_grid, "Decision grid for --method brute");
  o->add_option("--schedule-out", o_sched, "Schedule CSV output");
  o->add_option("--cost-out", o_cost, "Cost breakdown JSON output");

  // train ---------------------------------------------------------------
  auto* t = app.add_subcommand("train", "Train PALD thresholds");
  std::string t_dir, t_th_out = "thresholds.csv", t_loss_out = "loss.csv";
  int t_K = 10, t_grid = 201;
  double t_rho_mult = 5.0, t_rho = 0.0;
  TrainConfig t_tc;
  t->add_option("--instances", t_dir, "Directory of instance CSVs")
      ->required();
  t->add_option("--K", t_K, "Knots per threshold");
  t->add_option("--rho-mult", t_rho_mult,
                "Robustness budget as a multiple of the optimal ratio");
  t->add_option("--rho", t_rho, "Absolute robustness budget (overrides mult)");
  t->add_option("--grid", t_grid, "Constraint sample grid");
  t->add_option("--lr", t_tc.lr, "Learning rate");
  t->add_option("--epochs", t_tc.epochs, "Training epochs");
  t->add_option("--fd-step", t_tc.fd_step,
                "Finite-difference step (0 = 1e-3 * price range)");
  t->add_option("--seed", t_tc.seed, "RNG seed");
  t->add_option("--thresholds-out", t_th_out, "Threshold CSV output");
  t->add_option("--loss-out", t_loss_out, "Loss trace CSV output");

  // verify ----------------------------------------------------------------
  auto* v = app.add_subcommand(
      "verify", "Check threshold identities; dump residual CSV");
  v->alias("verify-thresholds");
  int v_sets = 20;
  std::uint64_t v_seed = 20260816;
  std::string v_out;
  double v_tol = 1e-7;
  v->add_option("--sets", v_sets, "Number of random parameter sets");
  v->add_option("--seed", v_seed, "RNG seed");
  v->add_option("--out", v_out, "Residual CSV path (default stdout)");
  v->add_option("--tol-scale", v_tol, "Failure tolerance as multiple of p_max");

  // bench ---------------------------------------------------------------
  auto* b = app.add_subcommand("bench", "Batch experiment from a config file");
  std::string b_config, b_out = "bench_out";
  bool b_write_instances = false;
  b->add_option("--config", b_config, "key=value config file")->required();
  b->add_option("--out-dir", b_out, "Output directory");
  b->add_flag("--write-instances", b_write_instances,
              "Also write the generated instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) {
      g_spec.family = gen_family_from_string(g_family);
      g_spec.params = g_params.resolve();
      if (!*g_x && g_spec.family != GenFamily::RandomSynthetic &&
          g_spec.family != GenFamily::RoroWorstCase)
        g_spec.x = g_spec.params.p_min;
      return cmd_gen(g_spec, g_out, g_out_dir, g_count);
    }
    if (r->parsed()) return cmd_run(r_instance, r_alg, r_th, r_sched, r_cost);
    if (o->parsed())
      return cmd_opt(o_instance, o_method, o_grid, o_sched, o_cost);
    if (t->parsed())
      return cmd_train(t_dir, t_K, t_rho_mult, t_rho, t_grid, t_tc, t_th_out,
                       t_loss_out);
    if (v->parsed()) return cmd_verify(v_sets, v_seed, v_out, v_tol);
    if (b->parsed()) return cmd_bench(b_config, b_out, b_write_instances);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
