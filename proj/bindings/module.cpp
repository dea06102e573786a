// Python bindings for the OSDM library: problem model, ratios, thresholds,
// online algorithms, offline oracles, generators, and the experiment driver.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "osdm/baselines.hpp"
#include "osdm/core.hpp"
#include "osdm/lambert.hpp"
#include "osdm/oracle.hpp"
#include "osdm/paad.hpp"
#include "osdm/pald.hpp"
#include "osdm/ratios.hpp"
#include "osdm/threshold.hpp"
#include "osdm/workbench.hpp"

namespace py = pybind11;
using namespace osdm;

PYBIND11_MODULE(osdm_py, m) {
  m.doc() =
      "Online smoothed demand management: PAAD, PALD, baselines, oracles, "
      "generators, and experiments";

  // ---------------------------------------------------------------- core
  py::enum_<SmoothingMode>(m, "SmoothingMode")
      .value("Switching", SmoothingMode::Switching)
      .value("Tracking", SmoothingMode::Tracking);
  py::enum_<DeliveryMode>(m, "DeliveryMode")
      .value("Decreasing", DeliveryMode::Decreasing)
      .value("Increasing", DeliveryMode::Increasing)
      .value("Constant", DeliveryMode::Constant);

  py::class_<CostParams>(m, "CostParams")
      .def(py::init<>())
      .def_readwrite("p_min", &CostParams::p_min)
      .def_readwrite("p_max", &CostParams::p_max)
      .def_readwrite("gamma", &CostParams::gamma)
      .def_readwrite("delta", &CostParams::delta)
      .def_readwrite("eta", &CostParams::eta)
      .def_readwrite("c", &CostParams::c)
      .def_readwrite("epsilon", &CostParams::epsilon)
      .def_readwrite("S", &CostParams::S)
      .def_readwrite("T", &CostParams::T)
      .def_readwrite("smoothing_mode", &CostParams::smoothing_mode)
      .def_readwrite("delivery_mode", &CostParams::delivery_mode);

  py::class_<Step>(m, "Step")
      .def(py::init<>())
      .def_readwrite("p", &Step::p)
      .def_readwrite("b", &Step::b)
      .def_readwrite("f", &Step::f)
      .def_readwrite("deadline", &Step::deadline)
      .def_readwrite("a", &Step::a);

  py::class_<Instance>(m, "Instance")
      .def(py::init<>())
      .def_readwrite("steps", &Instance::steps)
      .def_readwrite("params", &Instance::params)
      .def_readwrite("label", &Instance::label)
      .def_readwrite("seed", &Instance::seed)
      .def_property_readonly("T", &Instance::T)
      .def("total_demand", &Instance::total_demand);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("x", &Schedule::x)
      .def_readwrite("z", &Schedule::z)
      .def_readwrite("s", &Schedule::s);

  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def(py::init<>())
      .def_readwrite("purchase", &CostBreakdown::purchase)
      .def_readwrite("purchase_smoothing", &CostBreakdown::purchase_smoothing)
      .def_readwrite("delivery", &CostBreakdown::delivery)
      .def_readwrite("delivery_switching", &CostBreakdown::delivery_switching)
      .def_readwrite("total", &CostBreakdown::total);

  py::class_<Violation>(m, "Violation")
      .def_readonly("what", &Violation::what)
      .def_readonly("t", &Violation::t)
      .def_readonly("magnitude", &Violation::magnitude)
      .def("__repr__",
           [](const Violation& v) { return "<Violation: " + v.what + ">"; });

  m.def("delivery_rate_factor", &delivery_rate_factor, py::arg("params"),
        py::arg("s_prev"));
  m.def("validate", &validate, py::arg("instance"));
  m.def("evaluate_cost", &evaluate_cost, py::arg("instance"),
        py::arg("schedule"));
  m.def("check_feasible", &check_feasible, py::arg("instance"),
        py::arg("schedule"), py::arg("tol") = 1e-9);
  m.def("derive_storage", &derive_storage, py::arg("x"), py::arg("z"));

  // ------------------------------------------------------------- ratios
  py::class_<RatioSet>(m, "RatioSet")
      .def_readonly("alpha", &RatioSet::alpha)
      .def_readonly("alpha_T", &RatioSet::alpha_T)
      .def_readonly("alpha_B", &RatioSet::alpha_B)
      .def_readonly("alpha_RORO", &RatioSet::alpha_RORO)
      .def_readonly("alpha_IF", &RatioSet::alpha_IF)
      .def_readonly("alpha_IB", &RatioSet::alpha_IB);
  m.def("ratios", &ratios, py::arg("params"));
  m.def("lambert_w0", &lambert_w0, py::arg("x"));
  m.def("alpha_residual", &alpha_residual);
  m.def("alpha_T_residual", &alpha_T_residual);
  m.def("alpha_B_residual", &alpha_B_residual);
  m.def("alpha_RORO_residual", &alpha_RORO_residual);
  m.def("alpha_IF_residual", &alpha_IF_residual);

  // --------------------------------------------------------- thresholds
  py::enum_<ThresholdKind>(m, "ThresholdKind")
      .value("BaseS", ThresholdKind::BaseS)
      .value("FlexPurchaseS", ThresholdKind::FlexPurchaseS)
      .value("FlexDeliveryS", ThresholdKind::FlexDeliveryS)
      .value("BaseT", ThresholdKind::BaseT)
      .value("FlexPurchaseT", ThresholdKind::FlexPurchaseT)
      .value("FlexDeliveryT", ThresholdKind::FlexDeliveryT);

  py::class_<AnalyticThreshold>(m, "AnalyticThreshold")
      .def_property_readonly("A", &AnalyticThreshold::A)
      .def_property_readonly("B", &AnalyticThreshold::B)
      .def_property_readonly("rate", &AnalyticThreshold::rate)
      .def("value_at", &AnalyticThreshold::value_at, py::arg("w"))
      .def("integral", &AnalyticThreshold::integral, py::arg("w0"),
           py::arg("w1"))
      .def("inverse", &AnalyticThreshold::inverse, py::arg("price"));
  m.def("make_threshold", &make_threshold, py::arg("kind"), py::arg("params"),
        py::arg("d"), py::arg("ratio_override") = 0.0);
  m.def("base_identity_residual", &base_identity_residual, py::arg("params"),
        py::arg("w"));
  m.def("flex_identity_residual", &flex_identity_residual, py::arg("params"),
        py::arg("w"), py::arg("v"));

  // --------------------------------------------------- paad / pald / roro
  m.def(
      "paad_run",
      [](const Instance& inst) { return paad_run(inst); },
      py::arg("instance"));

  py::class_<PwaThreshold>(m, "PwaThreshold")
      .def(py::init<>())
      .def_readwrite("y", &PwaThreshold::y)
      .def_property_readonly("K", &PwaThreshold::K);
  py::class_<PaldThresholds>(m, "PaldThresholds")
      .def(py::init<>())
      .def_readwrite("base", &PaldThresholds::base)
      .def_readwrite("flex_purchase", &PaldThresholds::flex_purchase)
      .def_readwrite("flex_delivery", &PaldThresholds::flex_delivery);

  py::enum_<RobustSetMode>(m, "RobustSetMode")
      .value("BaseS", RobustSetMode::BaseS)
      .value("FlexS", RobustSetMode::FlexS)
      .value("BaseT", RobustSetMode::BaseT)
      .value("FlexT", RobustSetMode::FlexT);
  py::class_<RobustSetSpec>(m, "RobustSetSpec")
      .def(py::init<>())
      .def_readwrite("mode", &RobustSetSpec::mode)
      .def_readwrite("rho", &RobustSetSpec::rho)
      .def_readwrite("params", &RobustSetSpec::params)
      .def_readwrite("grid", &RobustSetSpec::grid);
  py::class_<MembershipResult>(m, "MembershipResult")
      .def_readonly("ok", &MembershipResult::ok)
      .def_readonly("worst_violation", &MembershipResult::worst_violation)
      .def_readonly("where", &MembershipResult::where)
      .def_readonly("at_w", &MembershipResult::at_w)
      .def_readonly("at_v", &MembershipResult::at_v);

  m.def("membership", &membership, py::arg("thresholds"), py::arg("set"),
        py::arg("tol"));
  m.def("project", &project, py::arg("thresholds"), py::arg("set"));
  m.def(
      "pald_run",
      [](const Instance& inst, const PaldThresholds& th) {
        return pald_run(inst, th);
      },
      py::arg("instance"), py::arg("thresholds"));
  m.def("analytic_knots", &analytic_knots, py::arg("params"), py::arg("K"),
        py::arg("ratio_override") = 0.0);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("fd_step", &TrainConfig::fd_step)
      .def_readwrite("seed", &TrainConfig::seed);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("thresholds", &TrainResult::thresholds)
      .def_readonly("init", &TrainResult::init)
      .def_readonly("loss_trace", &TrainResult::loss_trace)
      .def_readonly("opt_costs", &TrainResult::opt_costs);
  m.def("train_pald_s", &train_pald_s, py::arg("instances"),
        py::arg("base_set"), py::arg("flex_set"), py::arg("config"));

  m.def("doubling_roro_run", &doubling_roro_run, py::arg("instance"));
  py::enum_<NaivePolicy>(m, "NaivePolicy")
      .value("Immediate", NaivePolicy::Immediate)
      .value("UniformSpread", NaivePolicy::UniformSpread);
  m.def("naive_run", &naive_run, py::arg("instance"), py::arg("policy"));

  // -------------------------------------------------------------- oracle
  py::class_<OptResult>(m, "OptResult")
      .def_readonly("cost", &OptResult::cost)
      .def_readonly("schedule", &OptResult::schedule)
      .def_readonly("iterations", &OptResult::iterations);
  m.def("opt_lp", &opt_lp, py::arg("instance"));
  m.def("opt_bilinear", &opt_bilinear, py::arg("instance"),
        py::arg("max_iters") = 100, py::arg("tol") = 1e-8);
  m.def("opt_bruteforce", &opt_bruteforce, py::arg("instance"),
        py::arg("grid_step"));
  m.def("ecr", &ecr, py::arg("instance"), py::arg("alg_cost"),
        py::arg("opt_cost"));

  // ----------------------------------------------------------- workbench
  py::enum_<GenFamily>(m, "GenFamily")
      .value("XDecreasingS", GenFamily::XDecreasingS)
      .value("XDecreasingBase", GenFamily::XDecreasingBase)
      .value("XDecreasingT", GenFamily::XDecreasingT)
      .value("RoroWorstCase", GenFamily::RoroWorstCase)
      .value("RandomSynthetic", GenFamily::RandomSynthetic);
  py::class_<GenSpec>(m, "GenSpec")
      .def(py::init<>())
      .def_readwrite("family", &GenSpec::family)
      .def_readwrite("params", &GenSpec::params)
      .def_readwrite("x", &GenSpec::x)
      .def_readwrite("n", &GenSpec::n)
      .def_readwrite("m", &GenSpec::m)
      .def_readwrite("iota", &GenSpec::iota)
      .def_readwrite("sigma", &GenSpec::sigma)
      .def_readwrite("K_rounds", &GenSpec::K_rounds)
      .def_readwrite("seed", &GenSpec::seed);
  m.def("gen", &gen, py::arg("spec"));
  m.def("random_admissible_params", &random_admissible_params, py::arg("seed"),
        py::arg("tracking"));

  py::class_<PriceSeries>(m, "PriceSeries")
      .def_readonly("timestamps", &PriceSeries::timestamps)
      .def_readonly("prices", &PriceSeries::prices)
      .def_readonly("spacing_seconds", &PriceSeries::spacing_seconds)
      .def_readonly("p_min", &PriceSeries::p_min)
      .def_readonly("p_max", &PriceSeries::p_max);
  py::class_<TraceTask>(m, "TraceTask")
      .def(py::init<>())
      .def_readwrite("task_id", &TraceTask::task_id)
      .def_readwrite("start", &TraceTask::start)
      .def_readwrite("end", &TraceTask::end);
  py::class_<TraceConfig>(m, "TraceConfig")
      .def(py::init<>())
      .def_readwrite("price_csv", &TraceConfig::price_csv)
      .def_readwrite("demand_csv", &TraceConfig::demand_csv)
      .def_readwrite("bucket_minutes", &TraceConfig::bucket_minutes)
      .def_readwrite("T", &TraceConfig::T)
      .def_readwrite("window_start", &TraceConfig::window_start)
      .def_readwrite("prop_base", &TraceConfig::prop_base)
      .def_readwrite("storage_multiplier", &TraceConfig::storage_multiplier)
      .def_readwrite("deadline_horizon", &TraceConfig::deadline_horizon)
      .def_readwrite("tracking", &TraceConfig::tracking)
      .def_readwrite("seed", &TraceConfig::seed)
      .def_readwrite("params", &TraceConfig::params);
  m.def("load_prices", &load_prices, py::arg("path"),
        py::arg("p_floor") = 1.0, py::arg("cap_quantile") = 0.999);
  m.def("load_tasks", &load_tasks, py::arg("path"));
  m.def("build_trace_instance", &build_trace_instance, py::arg("config"),
        py::arg("prices"), py::arg("tasks"));

  m.def("write_instance_csv", &write_instance_csv, py::arg("path"),
        py::arg("instance"));
  m.def("read_instance_csv", &read_instance_csv, py::arg("path"));
  m.def("write_schedule_csv", &write_schedule_csv, py::arg("path"),
        py::arg("schedule"));
  m.def("read_schedule_csv", &read_schedule_csv, py::arg("path"));
  m.def("write_cost_json", &write_cost_json, py::arg("path"), py::arg("cost"));
  m.def("write_thresholds_csv", &write_thresholds_csv, py::arg("path"),
        py::arg("thresholds"));
  m.def("read_thresholds_csv", &read_thresholds_csv, py::arg("path"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("algs", &ExperimentConfig::algs)
      .def_readwrite("opt_method", &ExperimentConfig::opt_method)
      .def_readwrite("pald_thresholds", &ExperimentConfig::pald_thresholds)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("seed", &ExperimentConfig::seed);
  py::class_<ResultRow>(m, "ResultRow")
      .def_readonly("instance", &ResultRow::instance)
      .def_readonly("alg", &ResultRow::alg)
      .def_readonly("ecr", &ResultRow::ecr)
      .def_readonly("cost", &ResultRow::cost)
      .def_readonly("opt_cost", &ResultRow::opt_cost)
      .def_readonly("opt_method", &ResultRow::opt_method)
      .def_readonly("steps", &ResultRow::steps)
      .def_readonly("ms_per_step", &ResultRow::ms_per_step)
      .def_readonly("error", &ResultRow::error);
  py::class_<AlgSummary>(m, "AlgSummary")
      .def_readonly("alg", &AlgSummary::alg)
      .def_readonly("count", &AlgSummary::count)
      .def_readonly("errors", &AlgSummary::errors)
      .def_readonly("mean", &AlgSummary::mean)
      .def_readonly("median", &AlgSummary::median)
      .def_readonly("p95", &AlgSummary::p95)
      .def_readonly("min", &AlgSummary::min)
      .def_readonly("max", &AlgSummary::max)
      .def_readonly("cdf", &AlgSummary::cdf);
  m.def("run_experiment", &run_experiment, py::arg("instances"),
        py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("write_results_csv", &write_results_csv, py::arg("path"),
        py::arg("rows"));
  m.def("summarize", &summarize, py::arg("rows"));
  m.def("write_summary_csv", &write_summary_csv, py::arg("path"),
        py::arg("summaries"));
}
