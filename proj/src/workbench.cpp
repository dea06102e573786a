#include "osdm/workbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "osdm/baselines.hpp"
#include "osdm/paad.hpp"
#include "osdm/ratios.hpp"

namespace osdm {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double default_iota(const GenSpec& spec) {
  return spec.iota > 0.0 ? spec.iota : 1e-6 * spec.params.p_min;
}

void check_gen_spec(const GenSpec& spec) {
  const CostParams& P = spec.params;
  if (spec.n < 1 || spec.m < 1)
    throw std::invalid_argument("gen: n and m must be >= 1");
  if (spec.family != GenFamily::RoroWorstCase &&
      spec.family != GenFamily::RandomSynthetic) {
    if (spec.x < P.p_min || spec.x > P.p_max)
      throw std::invalid_argument("gen: x must lie in [p_min, p_max]");
  }
  if (spec.family == GenFamily::RoroWorstCase &&
      (spec.sigma <= 0.0 || spec.sigma >= 1.0))
    throw std::invalid_argument("gen: sigma must lie in (0, 1)");
  if (P.p_min <= 0.0 || P.p_max < P.p_min)
    throw std::invalid_argument("gen: invalid price bounds");
}

// Shared price layout of the x-decreasing families:
// K blocks of m * p_max interleaved with K-1 single descents, then the cheap
// block, then the final expensive batch. `wide_singles` doubles the single
// descent steps (tracking variant); `final_batch` is the trailing batch size.
std::vector<double> xdec_prices(const GenSpec& spec, int K, bool wide_singles,
                                int final_batch) {
  const CostParams& P = spec.params;
  const double rho_step = (P.p_max - P.p_min) / spec.n;
  const double cheap = std::min(spec.x + default_iota(spec), P.p_max);
  std::vector<double> prices;
  for (int j = 1; j <= K; ++j) {
    for (int i = 0; i < spec.m; ++i) prices.push_back(P.p_max);
    if (j < K) {
      const double level = P.p_max - static_cast<double>(j) * rho_step;
      prices.push_back(level);
      if (wide_singles) prices.push_back(level);
    }
  }
  for (int i = 0; i < spec.m; ++i) prices.push_back(cheap);
  for (int i = 0; i < final_batch; ++i) prices.push_back(P.p_max);
  return prices;
}

int xdec_K(const GenSpec& spec) {
  const CostParams& P = spec.params;
  const double rho_step = (P.p_max - P.p_min) / spec.n;
  return static_cast<int>(
      std::ceil((P.p_max - spec.x) / rho_step - 1e-12));
}

Instance gen_xdec(const GenSpec& spec) {
  const int K = xdec_K(spec);
  const bool tracking = spec.family == GenFamily::XDecreasingT;
  std::vector<double> prices =
      xdec_prices(spec, K, tracking, tracking ? spec.m : 1);

  Instance inst;
  inst.params = spec.params;
  inst.params.T = static_cast<int>(prices.size());
  inst.seed = spec.seed;
  const int T = inst.params.T;
  inst.steps.resize(T);
  for (int t = 1; t <= T; ++t) inst.steps[t - 1].p = prices[t - 1];

  switch (spec.family) {
    case GenFamily::XDecreasingS:
      inst.params.S = 0.0;
      inst.params.smoothing_mode = SmoothingMode::Switching;
      inst.steps[0].f = 1.0;
      inst.steps[0].deadline = T;
      inst.label = "xdec_s";
      break;
    case GenFamily::XDecreasingBase:
      inst.params.S = 1.0;
      inst.params.smoothing_mode = SmoothingMode::Switching;
      inst.steps[T - 1].b = 1.0;
      inst.label = "xdec_base";
      break;
    default: {  // XDecreasingT
      inst.params.S = 0.0;
      inst.params.smoothing_mode = SmoothingMode::Tracking;
      inst.params.gamma = 0.0;
      inst.steps[0].f = 1.0;
      inst.steps[0].deadline = T;
      // Tracking target 1/m on the cheap batch (the second-to-last batch).
      const int cheap_start = T - 2 * spec.m;  // 0-based
      for (int i = 0; i < spec.m; ++i)
        inst.steps[cheap_start + i].a = 1.0 / spec.m;
      inst.label = "xdec_t";
      break;
    }
  }
  inst.label += "_x" + fmt_double(spec.x);
  return inst;
}

// Adaptive adversary against doubling-RORO (materialized): descending prices
// from p_max, a p_max spike after every nonzero purchase, demand chunks of
// size <= sigma until each round's target is assigned, then a descent to
// p_min held for m steps; the next round's trigger demand forces a doubling.
Instance gen_roro_worst(const GenSpec& spec) {
  CostParams P = spec.params;
  P.c = 0.0;
  P.epsilon = 0.0;
  P.delta = 0.0;
  P.S = 0.0;
  P.smoothing_mode = SmoothingMode::Switching;
  P.delivery_mode = DeliveryMode::Constant;

  const double upsilon = 0.01;
  const double step = (P.p_max - P.p_min) / spec.n;
  const double alpha_roro = ratios(P).alpha_RORO;

  std::vector<Step> steps;
  std::vector<RoroInstanceState> R;
  R.push_back(RoroInstanceState{
      0, 1.0, make_roro_threshold(P, alpha_roro, 1.0), 0.0, 0.0, 0.0});
  double last_decision = 0.0;

  // Mirrors one doubling-RORO step against the presented (price, demand).
  auto present = [&](double price, double f) {
    if (f > 0.0) {
      RoroInstanceState& cur = R.back();
      if (cur.assigned + f <= cur.d_hat) {
        cur.assigned += f;
      } else {
        RoroInstanceState next;
        next.j = cur.j + 1;
        next.d_hat = std::pow(2.0, next.j);
        next.threshold = make_roro_threshold(P, alpha_roro, next.d_hat);
        next.assigned = f;
        R.push_back(std::move(next));
      }
    }
    double x = 0.0;
    for (RoroInstanceState& inst : R) {
      const double xi = roro_step(inst, price, P.gamma);
      inst.w += xi;
      inst.x_prev = xi;
      x += xi;
    }
    last_decision = x;
    Step st;
    st.p = price;
    st.f = f;
    if (f > 0.0) st.deadline = 1;  // patched to T after materialization
    steps.push_back(st);
  };

  for (int round = 0; round <= spec.K_rounds; ++round) {
    double pending = std::pow(2.0, round) - spec.sigma + upsilon;
    double cur_price = P.p_max;
    int guard = 0;
    // Descend with spikes until the round's demand is assigned and satisfied.
    while (true) {
      if (++guard > 1000000)
        throw std::runtime_error("gen: adaptive adversary did not terminate");
      double price, f = 0.0;
      if (last_decision > 1e-15) {
        price = P.p_max;  // punish the purchase; no demand on spike steps
      } else {
        price = cur_price;
        if (pending > 1e-15) {
          f = std::min(spec.sigma, pending);
          pending -= f;
        }
        cur_price = std::max(P.p_min, cur_price - step);
      }
      present(price, f);
      if (pending <= 1e-15 && R.back().w >= R.back().assigned - 1e-12) break;
    }
    // Finish the descent and hold the best price for m steps.
    while (cur_price > P.p_min + 1e-15) {
      present(cur_price, 0.0);
      cur_price = std::max(P.p_min, cur_price - step);
    }
    for (int i = 0; i < spec.m; ++i) present(P.p_min, 0.0);
  }

  const int T = static_cast<int>(steps.size());
  for (Step& st : steps)
    if (st.f > 0.0) st.deadline = T;
  P.T = T;

  Instance inst;
  inst.params = P;
  inst.steps = std::move(steps);
  inst.label = "roro_worst_sigma" + fmt_double(spec.sigma);
  inst.seed = spec.seed;
  return inst;
}

Instance gen_random(const GenSpec& spec) {
  CostParams P = spec.params;
  if (P.T < 2) throw std::invalid_argument("gen: RandomSynthetic needs T >= 2");
  std::mt19937_64 rng(spec.seed);
  double band_hi = spec.x > 0.0 ? spec.x : P.p_max;
  band_hi = std::clamp(band_hi, P.p_min, P.p_max);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> logp(std::log(P.p_min),
                                              std::log(band_hi));
  std::uniform_real_distribution<double> fsize(0.1, 1.0);
  std::uniform_real_distribution<double> bsize(0.05, 0.5);

  Instance inst;
  inst.params = P;
  inst.seed = spec.seed;
  inst.label = "random_seed" + std::to_string(spec.seed);
  const int T = P.T;
  inst.steps.resize(T);
  for (int t = 1; t <= T; ++t) {
    Step& st = inst.steps[t - 1];
    st.p = std::exp(logp(rng));
    if (u01(rng) < 0.3 && t < T) {
      st.f = fsize(rng);
      std::uniform_int_distribution<int> dl(t + 1, std::min(t + 16, T));
      st.deadline = dl(rng);
    }
    if (u01(rng) < 0.2) st.b = bsize(rng);
  }
  if (inst.total_demand() <= 0.0) {
    inst.steps[0].f = 0.5;
    inst.steps[0].deadline = std::min(17, T);
  }
  if (P.smoothing_mode == SmoothingMode::Tracking) {
    const double D = inst.total_demand();
    for (Step& st : inst.steps) st.a = D / T;
    std::uniform_int_distribution<int> kd(2, 4);
    const int k = std::min(kd(rng), T);
    std::set<int> shed;
    std::uniform_int_distribution<int> slot(0, T - 1);
    while (static_cast<int>(shed.size()) < k) shed.insert(slot(rng));
    for (int idx : shed) inst.steps[idx].a = 0.0;
  }
  return inst;
}

}  // namespace

std::string to_string(GenFamily f) {
  switch (f) {
    case GenFamily::XDecreasingS: return "XDecreasingS";
    case GenFamily::XDecreasingBase: return "XDecreasingBase";
    case GenFamily::XDecreasingT: return "XDecreasingT";
    case GenFamily::RoroWorstCase: return "RoroWorstCase";
    default: return "RandomSynthetic";
  }
}

GenFamily gen_family_from_string(const std::string& s) {
  if (s == "XDecreasingS") return GenFamily::XDecreasingS;
  if (s == "XDecreasingBase") return GenFamily::XDecreasingBase;
  if (s == "XDecreasingT") return GenFamily::XDecreasingT;
  if (s == "RoroWorstCase") return GenFamily::RoroWorstCase;
  if (s == "RandomSynthetic") return GenFamily::RandomSynthetic;
  throw std::invalid_argument("unknown generator family: " + s);
}

CostParams random_admissible_params(std::uint64_t seed, bool tracking) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    CostParams p;
    p.p_min = 1.0 + 49.0 * U(rng);
    p.p_max = p.p_min + 10.0 + 290.0 * U(rng);
    const double half_gap = 0.5 * (p.p_max - p.p_min);
    const int dm = static_cast<int>(3.0 * U(rng)) % 3;
    p.delivery_mode = dm == 0   ? DeliveryMode::Decreasing
                      : dm == 1 ? DeliveryMode::Increasing
                                : DeliveryMode::Constant;
    if (p.delivery_mode == DeliveryMode::Constant) {
      p.c = 0.0;
      p.epsilon = 0.6 * U(rng);
    } else {
      p.c = 0.05 + 0.5 * U(rng);
      p.epsilon = (1.0 - p.c) * 0.8 * U(rng);
    }
    p.smoothing_mode =
        tracking ? SmoothingMode::Tracking : SmoothingMode::Switching;
    if (tracking) {
      p.gamma = 0.0;
      p.eta = half_gap * (0.05 + 0.9 * U(rng)) * 0.5;
      p.delta = half_gap * (0.05 + 0.9 * U(rng)) * 0.5;
    } else {
      p.eta = 0.0;
      const double budget = half_gap * (0.1 + 0.85 * U(rng));
      const double split = 0.2 + 0.6 * U(rng);
      p.gamma = budget * split;
      p.delta = budget * (1.0 - split);
    }
    const int horizons[4] = {12, 24, 48, 96};
    p.T = horizons[static_cast<int>(4.0 * U(rng)) % 4];
    p.S = 1.0;
    // Keep only draws where every construction this set feeds is
    // well-defined: finite ratios and nonincreasing analytic thresholds
    // (narrow price bands can push a threshold coefficient positive even
    // under the admissibility bounds; such sets are outside the family).
    try {
      (void)ratios(p);
      (void)base_identity_residual(p, 0.5);
      (void)flex_identity_residual(p, 0.5, 0.25);
      return p;
    } catch (const std::exception&) {
      continue;
    }
  }
  throw std::runtime_error(
      "random_admissible_params: no valid draw in 1000 attempts");
}

Instance gen(const GenSpec& spec) {
  check_gen_spec(spec);
  Instance inst;
  switch (spec.family) {
    case GenFamily::XDecreasingS:
    case GenFamily::XDecreasingBase:
    case GenFamily::XDecreasingT:
      inst = gen_xdec(spec);
      break;
    case GenFamily::RoroWorstCase:
      inst = gen_roro_worst(spec);
      break;
    default:
      inst = gen_random(spec);
      break;
  }
  const std::vector<Violation> viols = validate(inst);
  if (!viols.empty())
    throw std::runtime_error("gen: generated instance invalid: " +
                             viols.front().what);
  return inst;
}

// ---------------------------------------------------------------------------
// Time and CSV helpers.

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t parse_iso8601(const std::string& s, const std::string& context) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int got = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h,
                        &mi, &sec);
  if (got < 6 || (sep != 'T' && sep != ' '))
    throw std::runtime_error("malformed ISO-8601 timestamp '" + s + "' " +
                             context);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || sec < 0 || sec > 60)
    throw std::runtime_error("out-of-range timestamp '" + s + "' " + context);
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, int line_no, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed number '" + s + "' at line " +
                             std::to_string(line_no));
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

double nearest_rank(std::vector<double> sorted_vals, double q) {
  const std::size_t n = sorted_vals.size();
  const std::size_t rank = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(q * static_cast<double>(n) - 1e-12)));
  return sorted_vals[std::min(rank, n) - 1];
}

}  // namespace

PriceSeries load_prices(const std::string& path, double p_floor,
                        double cap_quantile) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  ++line_no;
  if (trim(line) != "timestamp,price")
    throw std::runtime_error(path + ": expected header 'timestamp,price'");

  PriceSeries series;
  std::vector<double> raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 2)
      throw std::runtime_error(path + ": expected 2 fields at line " +
                               std::to_string(line_no));
    series.timestamps.push_back(parse_iso8601(
        trim(cells[0]), "at " + path + ":" + std::to_string(line_no)));
    raw.push_back(parse_double(trim(cells[1]), line_no, path));
  }
  if (raw.size() < 2)
    throw std::runtime_error(path + ": need at least 2 price rows");

  series.spacing_seconds = series.timestamps[1] - series.timestamps[0];
  if (series.spacing_seconds <= 0)
    throw std::runtime_error(path + ": non-increasing timestamps at line 3");
  for (std::size_t i = 1; i < series.timestamps.size(); ++i) {
    if (series.timestamps[i] - series.timestamps[i - 1] !=
        series.spacing_seconds)
      throw std::runtime_error(path + ": non-uniform spacing at line " +
                               std::to_string(i + 2));
  }

  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  const double cap = nearest_rank(sorted, cap_quantile);
  series.p_min = p_floor;
  series.p_max = std::max(cap, p_floor);
  series.prices.reserve(raw.size());
  for (double v : raw)
    series.prices.push_back(std::clamp(v, series.p_min, series.p_max));
  return series;
}

std::vector<TraceTask> load_tasks(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  ++line_no;
  if (trim(line) != "task_id,start,end")
    throw std::runtime_error(path + ": expected header 'task_id,start,end'");
  std::vector<TraceTask> tasks;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 3)
      throw std::runtime_error(path + ": expected 3 fields at line " +
                               std::to_string(line_no));
    TraceTask task;
    task.task_id = trim(cells[0]);
    const std::string ctx = "at " + path + ":" + std::to_string(line_no);
    task.start = parse_iso8601(trim(cells[1]), ctx);
    task.end = parse_iso8601(trim(cells[2]), ctx);
    if (task.end < task.start)
      throw std::runtime_error(path + ": task ends before it starts at line " +
                               std::to_string(line_no));
    tasks.push_back(std::move(task));
  }
  return tasks;
}

Instance build_trace_instance(const TraceConfig& cfg,
                              const PriceSeries& prices,
                              const std::vector<TraceTask>& tasks) {
  if (cfg.prop_base < 0.5 || cfg.prop_base > 1.0)
    throw std::invalid_argument(
        "build_trace_instance: prop_base must lie in [0.5, 1]");
  const std::int64_t bucket = static_cast<std::int64_t>(cfg.bucket_minutes) * 60;
  if (prices.spacing_seconds != bucket)
    throw std::runtime_error(
        "build_trace_instance: price spacing does not match the bucket size");
  if (tasks.empty())
    throw std::runtime_error("build_trace_instance: empty demand");

  const std::size_t n_slots = prices.timestamps.size();
  std::size_t start_idx = 0;
  if (!cfg.window_start.empty()) {
    const std::int64_t want =
        parse_iso8601(cfg.window_start, "in window_start");
    bool found = false;
    for (std::size_t i = 0; i < n_slots; ++i) {
      if (prices.timestamps[i] == want) {
        start_idx = i;
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error(
          "build_trace_instance: window start not in the price series");
  }
  const int T = cfg.T;
  if (start_idx + static_cast<std::size_t>(T) > n_slots)
    throw std::runtime_error(
        "build_trace_instance: window not covered by the price series");

  // Fractional task weights over the whole series (for peak normalization).
  auto slot_weight = [&](const TraceTask& task, std::size_t slot) {
    const std::int64_t s0 = prices.timestamps[slot];
    const std::int64_t s1 = s0 + bucket;
    const std::int64_t lo = std::max(task.start, s0);
    const std::int64_t hi = std::min(task.end, s1);
    return hi > lo ? static_cast<double>(hi - lo) / bucket : 0.0;
  };
  std::vector<double> full_weight(n_slots, 0.0);
  for (const TraceTask& task : tasks)
    for (std::size_t i = 0; i < n_slots; ++i)
      full_weight[i] += slot_weight(task, i);

  // Storage sizing: S = 1 matches the second-largest daily peak slot.
  std::map<std::int64_t, double> daily_peak;
  for (std::size_t i = 0; i < n_slots; ++i) {
    const std::int64_t day = prices.timestamps[i] / 86400;
    daily_peak[day] = std::max(daily_peak[day], full_weight[i]);
  }
  std::vector<double> peaks;
  for (const auto& [day, peak] : daily_peak) peaks.push_back(peak);
  std::sort(peaks.begin(), peaks.end(), std::greater<double>());
  const double norm = peaks.size() >= 2 ? peaks[1] : peaks[0];
  if (norm <= 0.0)
    throw std::runtime_error("build_trace_instance: empty demand");
  const double scale = 1.0 / norm;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Instance inst;
  inst.params = cfg.params;
  inst.params.p_min = prices.p_min;
  inst.params.p_max = prices.p_max;
  inst.params.S = cfg.storage_multiplier;
  inst.params.T = T;
  inst.params.smoothing_mode =
      cfg.tracking ? SmoothingMode::Tracking : SmoothingMode::Switching;
  if (cfg.tracking) inst.params.gamma = 0.0;
  inst.seed = cfg.seed;
  inst.label = "trace_start" + std::to_string(start_idx);
  inst.steps.resize(T);
  for (int t = 1; t <= T; ++t)
    inst.steps[t - 1].p = prices.prices[start_idx + t - 1];

  std::vector<double> flex_arrival(T + 1, 0.0);
  for (const TraceTask& task : tasks) {
    const bool base = u01(rng) < cfg.prop_base;
    double total = 0.0;
    int first_slot = 0;  // 1-based within the window
    for (int t = 1; t <= T; ++t) {
      const double w = slot_weight(task, start_idx + t - 1) * scale;
      if (w > 0.0 && first_slot == 0) first_slot = t;
      if (base) {
        inst.steps[t - 1].b += w;
      } else {
        total += w;
      }
    }
    if (!base && total > 0.0) {
      // A flexible task arriving at the horizon's last slot has no deadline
      // room; serve it as base demand instead.
      if (first_slot >= T)
        inst.steps[T - 1].b += total;
      else
        flex_arrival[first_slot] += total;
    }
  }
  for (int t = 1; t <= T; ++t) {
    if (flex_arrival[t] > 0.0) {
      inst.steps[t - 1].f = flex_arrival[t];
      std::uniform_int_distribution<int> dl(
          t + 1, std::min(t + cfg.deadline_horizon, T));
      inst.steps[t - 1].deadline = dl(rng);
    }
  }

  if (cfg.tracking) {
    const double D = inst.total_demand();
    for (Step& st : inst.steps) st.a = D / T;
    std::uniform_int_distribution<int> kd(2, 4);
    const int k = std::min(kd(rng), T);
    std::set<int> shed;
    std::uniform_int_distribution<int> slot(0, T - 1);
    while (static_cast<int>(shed.size()) < k) shed.insert(slot(rng));
    for (int idx : shed) inst.steps[idx].a = 0.0;
  }

  const std::vector<Violation> viols = validate(inst);
  if (!viols.empty())
    throw std::runtime_error("build_trace_instance: invalid instance: " +
                             viols.front().what);
  return inst;
}

// ---------------------------------------------------------------------------
// Serialization.

void write_instance_csv(const std::string& path, const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const bool tracking =
      instance.params.smoothing_mode == SmoothingMode::Tracking;
  out << "t,p,b,f,deadline,a\n";
  for (int t = 1; t <= instance.T(); ++t) {
    const Step& st = instance.steps[t - 1];
    out << t << ',' << fmt_double(st.p) << ',' << fmt_double(st.b) << ','
        << fmt_double(st.f) << ',';
    if (st.f > 0.0) out << st.deadline;
    out << ',';
    if (tracking) out << fmt_double(st.a);
    out << '\n';
  }

  std::ofstream side(path + ".params");
  if (!side) throw std::runtime_error("cannot write " + path + ".params");
  const CostParams& P = instance.params;
  side << "p_min=" << fmt_double(P.p_min) << '\n'
       << "p_max=" << fmt_double(P.p_max) << '\n'
       << "gamma=" << fmt_double(P.gamma) << '\n'
       << "delta=" << fmt_double(P.delta) << '\n'
       << "eta=" << fmt_double(P.eta) << '\n'
       << "c=" << fmt_double(P.c) << '\n'
       << "epsilon=" << fmt_double(P.epsilon) << '\n'
       << "S=" << fmt_double(P.S) << '\n'
       << "T=" << P.T << '\n'
       << "smoothing_mode=" << to_string(P.smoothing_mode) << '\n'
       << "delivery_mode=" << to_string(P.delivery_mode) << '\n'
       << "label=" << instance.label << '\n'
       << "seed=" << instance.seed << '\n';
}

Instance read_instance_csv(const std::string& path) {
  std::map<std::string, std::string> side = read_config_file(path + ".params");
  auto need = [&](const std::string& key) {
    auto it = side.find(key);
    if (it == side.end())
      throw std::runtime_error(path + ".params: missing key '" + key + "'");
    return it->second;
  };
  Instance inst;
  CostParams& P = inst.params;
  P.p_min = parse_double(need("p_min"), 0, path + ".params");
  P.p_max = parse_double(need("p_max"), 0, path + ".params");
  P.gamma = parse_double(need("gamma"), 0, path + ".params");
  P.delta = parse_double(need("delta"), 0, path + ".params");
  P.eta = parse_double(need("eta"), 0, path + ".params");
  P.c = parse_double(need("c"), 0, path + ".params");
  P.epsilon = parse_double(need("epsilon"), 0, path + ".params");
  P.S = parse_double(need("S"), 0, path + ".params");
  P.T = static_cast<int>(parse_double(need("T"), 0, path + ".params"));
  P.smoothing_mode = smoothing_mode_from_string(need("smoothing_mode"));
  P.delivery_mode = delivery_mode_from_string(need("delivery_mode"));
  if (side.count("label")) inst.label = side["label"];
  if (side.count("seed"))
    inst.seed = static_cast<std::uint64_t>(std::stoull(side["seed"]));

  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || trim(line) != "t,p,b,f,deadline,a")
    throw std::runtime_error(path + ": expected header 't,p,b,f,deadline,a'");
  ++line_no;
  inst.steps.resize(P.T);
  int seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 6)
      throw std::runtime_error(path + ": expected 6 fields at line " +
                               std::to_string(line_no));
    const int t =
        static_cast<int>(parse_double(trim(cells[0]), line_no, path));
    if (t < 1 || t > P.T)
      throw std::runtime_error(path + ": step index out of range at line " +
                               std::to_string(line_no));
    Step& st = inst.steps[t - 1];
    st.p = parse_double(trim(cells[1]), line_no, path);
    st.b = parse_double(trim(cells[2]), line_no, path);
    st.f = parse_double(trim(cells[3]), line_no, path);
    const std::string dl = trim(cells[4]);
    if (!dl.empty())
      st.deadline = static_cast<int>(parse_double(dl, line_no, path));
    const std::string a = trim(cells[5]);
    if (!a.empty()) st.a = parse_double(a, line_no, path);
    ++seen;
  }
  if (seen != P.T)
    throw std::runtime_error(path + ": expected " + std::to_string(P.T) +
                             " rows, found " + std::to_string(seen));
  return inst;
}

void write_schedule_csv(const std::string& path, const Schedule& schedule) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,x,z,s\n";
  for (std::size_t t = 0; t < schedule.x.size(); ++t)
    out << (t + 1) << ',' << fmt_double(schedule.x[t]) << ','
        << fmt_double(schedule.z[t]) << ',' << fmt_double(schedule.s[t])
        << '\n';
}

Schedule read_schedule_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,x,z,s")
    throw std::runtime_error(path + ": expected header 't,x,z,s'");
  Schedule sched;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 4)
      throw std::runtime_error(path + ": expected 4 fields at line " +
                               std::to_string(line_no));
    sched.x.push_back(parse_double(trim(cells[1]), line_no, path));
    sched.z.push_back(parse_double(trim(cells[2]), line_no, path));
    sched.s.push_back(parse_double(trim(cells[3]), line_no, path));
  }
  return sched;
}

void write_cost_json(const std::string& path, const CostBreakdown& cost) {
  nlohmann::json j;
  j["purchase"] = cost.purchase;
  j["purchase_smoothing"] = cost.purchase_smoothing;
  j["delivery"] = cost.delivery;
  j["delivery_switching"] = cost.delivery_switching;
  j["total"] = cost.total;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_thresholds_csv(const std::string& path, const PaldThresholds& th) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "kind,j,u,y\n";
  auto dump = [&](const char* kind, const PwaThreshold& t) {
    const int K = t.K();
    for (int j = 0; j < K; ++j)
      out << kind << ',' << j << ','
          << fmt_double(static_cast<double>(j) / (K - 1)) << ','
          << fmt_double(t.y[j]) << '\n';
  };
  dump("base", th.base);
  dump("flex_purchase", th.flex_purchase);
  dump("flex_delivery", th.flex_delivery);
}

PaldThresholds read_thresholds_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "kind,j,u,y")
    throw std::runtime_error(path + ": expected header 'kind,j,u,y'");
  PaldThresholds th;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 4)
      throw std::runtime_error(path + ": expected 4 fields at line " +
                               std::to_string(line_no));
    const std::string kind = trim(cells[0]);
    const int j = static_cast<int>(parse_double(trim(cells[1]), line_no, path));
    const double y = parse_double(trim(cells[3]), line_no, path);
    PwaThreshold* target = nullptr;
    if (kind == "base") target = &th.base;
    else if (kind == "flex_purchase") target = &th.flex_purchase;
    else if (kind == "flex_delivery") target = &th.flex_delivery;
    else
      throw std::runtime_error(path + ": unknown kind '" + kind +
                               "' at line " + std::to_string(line_no));
    if (static_cast<int>(target->y.size()) <= j) target->y.resize(j + 1, 0.0);
    target->y[j] = y;
  }
  return th;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": expected key=value at line " +
                               std::to_string(line_no));
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments.

namespace {

std::string sanitize_cell(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

OptResult compute_opt(const Instance& inst, const std::string& method) {
  if (method == "lp") return opt_lp(inst);
  if (method == "alt") return opt_bilinear(inst);
  if (method == "brute") return opt_bruteforce(inst, 0.25);
  if (method == "auto") {
    if (inst.params.c == 0.0 || inst.params.S == 0.0) return opt_lp(inst);
    return opt_bilinear(inst);
  }
  throw std::invalid_argument("unknown OPT method: " + method);
}

}  // namespace

std::vector<ResultRow> run_experiment(const std::vector<Instance>& instances,
                                      const ExperimentConfig& config) {
  static const std::set<std::string> known = {"paad", "pald", "doubling-roro",
                                              "immediate", "uniform"};
  for (const std::string& alg : config.algs)
    if (!known.count(alg))
      throw std::invalid_argument("unknown algorithm: " + alg);

  const std::size_t n_inst = instances.size();
  const std::size_t n_alg = config.algs.size();
  std::vector<ResultRow> rows(n_inst * n_alg);

  auto process_instance = [&](std::size_t i) {
    const Instance& inst = instances[i];
    const std::string label =
        inst.label.empty() ? "instance_" + std::to_string(i) : inst.label;

    double opt_cost = 0.0;
    std::string opt_method_used;
    std::string opt_error;
    try {
      const OptResult opt = compute_opt(inst, config.opt_method);
      opt_cost = opt.cost;
      opt_method_used = to_string(opt.method);
    } catch (const std::exception& e) {
      opt_error = e.what();
    }

    for (std::size_t a = 0; a < n_alg; ++a) {
      ResultRow& row = rows[i * n_alg + a];
      row.instance = label;
      row.alg = config.algs[a];
      row.steps = inst.T();
      row.opt_cost = opt_cost;
      row.opt_method = opt_method_used;
      if (!opt_error.empty()) {
        row.ecr = std::nan("");
        row.error = "opt failed: " + opt_error;
        continue;
      }
      try {
        const auto t0 = std::chrono::steady_clock::now();
        Schedule sched;
        if (row.alg == "paad") {
          sched = paad_run(inst);
        } else if (row.alg == "pald") {
          const PaldThresholds th =
              config.pald_thresholds.base.K() >= 2
                  ? config.pald_thresholds
                  : analytic_knots(inst.params, 10);
          sched = pald_run(inst, th);
        } else if (row.alg == "doubling-roro") {
          sched = doubling_roro_run(inst);
        } else if (row.alg == "immediate") {
          sched = naive_run(inst, NaivePolicy::Immediate);
        } else {
          sched = naive_run(inst, NaivePolicy::UniformSpread);
        }
        const auto t1 = std::chrono::steady_clock::now();
        const std::vector<Violation> viols = check_feasible(inst, sched);
        if (!viols.empty())
          throw std::runtime_error("infeasible schedule: " +
                                   viols.front().what);
        row.cost = evaluate_cost(inst, sched);
        row.ecr = ecr(inst, row.cost.total, opt_cost);
        const double ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.ms_per_step = ms / std::max(1, inst.T());
      } catch (const std::exception& e) {
        row.ecr = std::nan("");
        row.error = e.what();
      }
    }
  };

  unsigned threads = config.threads > 0
                         ? static_cast<unsigned>(config.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, n_inst));
  if (threads <= 1 || n_inst <= 1) {
    for (std::size_t i = 0; i < n_inst; ++i) process_instance(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n_inst) return;
          process_instance(i);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return rows;
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "instance,alg,ecr,cost_total,cost_purchase,cost_smoothing,"
         "cost_delivery,cost_delivery_switching,opt_cost,opt_method,steps,"
         "ms_per_step\n";
  for (const ResultRow& row : rows) {
    const std::string method = row.error.empty()
                                   ? row.opt_method
                                   : "error: " + sanitize_cell(row.error);
    out << sanitize_cell(row.instance) << ',' << row.alg << ','
        << fmt_double(row.ecr) << ',' << fmt_double(row.cost.total) << ','
        << fmt_double(row.cost.purchase) << ','
        << fmt_double(row.cost.purchase_smoothing) << ','
        << fmt_double(row.cost.delivery) << ','
        << fmt_double(row.cost.delivery_switching) << ','
        << fmt_double(row.opt_cost) << ',' << method << ',' << row.steps << ','
        << fmt_double(row.ms_per_step) << '\n';
  }
}

std::vector<AlgSummary> summarize(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, int> errors;
  for (const ResultRow& row : rows) {
    if (!values.count(row.alg)) {
      order.push_back(row.alg);
      values[row.alg] = {};
      errors[row.alg] = 0;
    }
    if (row.error.empty() && std::isfinite(row.ecr))
      values[row.alg].push_back(row.ecr);
    else
      ++errors[row.alg];
  }

  std::vector<AlgSummary> out;
  for (const std::string& alg : order) {
    AlgSummary s;
    s.alg = alg;
    s.errors = errors[alg];
    std::vector<double>& v = values[alg];
    s.count = static_cast<int>(v.size());
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      double acc = 0.0;
      for (double e : v) acc += e;
      s.mean = acc / v.size();
      s.median = nearest_rank(v, 0.5);
      s.p95 = nearest_rank(v, 0.95);
      s.min = v.front();
      s.max = v.back();
      s.cdf.reserve(101);
      for (int q = 0; q <= 100; ++q)
        s.cdf.push_back(nearest_rank(v, q / 100.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const std::string& path,
                       const std::vector<AlgSummary>& summaries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alg,count,errors,mean,median,p95,min,max\n";
  for (const AlgSummary& s : summaries)
    out << s.alg << ',' << s.count << ',' << s.errors << ','
        << fmt_double(s.mean) << ',' << fmt_double(s.median) << ','
        << fmt_double(s.p95) << ',' << fmt_double(s.min) << ','
        << fmt_double(s.max) << '\n';
  out << "alg,cdf_q,ecr\n";
  for (const AlgSummary& s : summaries)
    for (std::size_t q = 0; q < s.cdf.size(); ++q)
      out << s.alg << ',' << q << ',' << fmt_double(s.cdf[q]) << '\n';
}

}  // namespace osdm
