#include <cmath>
#include <random>

#include "doctest.h"
#include "osdm/core.hpp"
#include "osdm/workbench.hpp"
#include "test_util.hpp"

using namespace osdm;
using testutil::default_params;
using testutil::random_instance;

namespace {

// Deliver-on-due schedule: x_t = z_t = b_t + (flexible due at t).
Schedule forced_schedule(const Instance& inst) {
  const int T = inst.T();
  Schedule sched;
  sched.x.assign(T, 0.0);
  sched.z.assign(T, 0.0);
  for (int t = 1; t <= T; ++t) {
    double due = inst.steps[t - 1].b;
    for (int tau = 1; tau <= t; ++tau) {
      const Step& st = inst.steps[tau - 1];
      if (st.f > 0.0 && st.deadline == t) due += st.f;
    }
    sched.x[t - 1] = due;
    sched.z[t - 1] = due;
  }
  sched.s = derive_storage(sched.x, sched.z);
  return sched;
}

}  // namespace

TEST_CASE("validate accepts an admissible instance") {
  CostParams p = default_params();
  p.c = 0.2;
  p.epsilon = 0.05;  // c + epsilon = 0.25
  Instance inst = random_instance(p, 1, 12);
  CHECK(validate(inst).empty());
}

TEST_CASE("validate flags an out-of-bounds price") {
  Instance inst = random_instance(default_params(), 2, 8);
  inst.steps[3].p = inst.params.p_max * 2.0;
  auto v = validate(inst);
  REQUIRE(!v.empty());
  bool found = false;
  for (const auto& violation : v)
    if (violation.t == 4 && violation.what.find("price") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("validate flags tracking target exceeding demand") {
  CostParams p = testutil::default_tracking_params();
  Instance inst = random_instance(p, 3, 8);
  double total = inst.total_demand();
  // Push the cumulative target one unit above total demand.
  inst.steps[0].a += total + 1.0;
  for (int t = 1; t < inst.T(); ++t) inst.steps[t].a = 0.0;
  auto v = validate(inst);
  bool found = false;
  for (const auto& violation : v)
    if (violation.what.find("target") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("evaluate_cost zero demand, all-zero schedule") {
  CostParams p = default_params();
  p.T = 4;
  Instance inst;
  inst.params = p;
  inst.steps.assign(4, Step{100.0, 0.0, 0.0, 0, 0.0});
  Schedule sched;
  sched.x.assign(4, 0.0);
  sched.z.assign(4, 0.0);
  sched.s.assign(4, 0.0);
  CHECK(evaluate_cost(inst, sched).total == 0.0);
}

TEST_CASE("evaluate_cost single-step switching example") {
  // T=1, x=z=1, p=10, gamma=2, delta=1, c=eps=0:
  // 10 + 2*(1+1) + 0 + 1*(1+1) = 16.
  CostParams p;
  p.p_min = 1.0;
  p.p_max = 100.0;
  p.gamma = 2.0;
  p.delta = 1.0;
  p.T = 1;
  p.smoothing_mode = SmoothingMode::Switching;
  p.delivery_mode = DeliveryMode::Constant;
  Instance inst;
  inst.params = p;
  inst.steps = {Step{10.0, 1.0, 0.0, 0, 0.0}};
  Schedule sched;
  sched.x = {1.0};
  sched.z = {1.0};
  sched.s = {0.0};
  CostBreakdown cost = evaluate_cost(inst, sched);
  CHECK(cost.purchase == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cost.purchase_smoothing == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(cost.delivery == doctest::Approx(0.0));
  CHECK(cost.delivery_switching == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cost.total == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("evaluate_cost decreasing-mode delivery factor at empty storage") {
  // Decreasing, S=1, s0=0, z1=1, p=10, c=0.2, eps=0.05:
  // factor = c - c*s/S + eps = 0.25 -> delivery cost 2.5.
  CostParams p;
  p.p_min = 1.0;
  p.p_max = 100.0;
  p.c = 0.2;
  p.epsilon = 0.05;
  p.S = 1.0;
  p.T = 1;
  p.delivery_mode = DeliveryMode::Decreasing;
  Instance inst;
  inst.params = p;
  inst.steps = {Step{10.0, 1.0, 0.0, 0, 0.0}};
  Schedule sched;
  sched.x = {1.0};
  sched.z = {1.0};
  sched.s = {0.0};
  CHECK(evaluate_cost(inst, sched).delivery ==
        doctest::Approx(2.5).epsilon(1e-12));
  CHECK(delivery_rate_factor(p, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  // At full storage the decreasing factor drops to eps.
  CHECK(delivery_rate_factor(p, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("forced deliver-on-due schedule is feasible on 1000 random instances") {
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    CostParams p = (i % 2 == 0) ? default_params()
                                : testutil::default_tracking_params();
    Instance inst = random_instance(p, 1000 + i, 16);
    Schedule sched = forced_schedule(inst);
    auto v = check_feasible(inst, sched, 1e-9);
    if (!v.empty()) {
      CAPTURE(i);
      CAPTURE(v.front().what);
      CHECK(v.empty());
      break;
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("check_feasible catches late delivery and storage overflow") {
  CostParams p = default_params();
  p.T = 4;
  Instance inst;
  inst.params = p;
  inst.steps.assign(4, Step{50.0, 0.0, 0.0, 0, 0.0});
  inst.steps[0].f = 1.0;
  inst.steps[0].deadline = 2;

  // Delivering after the deadline: cumulative coverage fails at t = 2.
  Schedule late;
  late.x = {0.0, 0.0, 1.0, 0.0};
  late.z = {0.0, 0.0, 1.0, 0.0};
  late.s = derive_storage(late.x, late.z);
  auto v = check_feasible(inst, late, 1e-9);
  bool cumulative = false;
  for (const auto& viol : v)
    if (viol.t == 2) cumulative = true;
  CHECK(cumulative);

  // Storage above S.
  Schedule overfull;
  overfull.x = {2.0, 0.0, 0.0, 0.0};
  overfull.z = {0.0, 1.0, 0.5, 0.5};
  overfull.s = derive_storage(overfull.x, overfull.z);
  v = check_feasible(inst, overfull, 1e-9);
  bool storage = false;
  for (const auto& viol : v)
    if (viol.what.find("storage") != std::string::npos) storage = true;
  CHECK(storage);
}

TEST_CASE("cost components sum to total on 1000 random schedules") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    CostParams p = (i % 2 == 0) ? default_params()
                                : testutil::default_tracking_params();
    Instance inst = random_instance(p, 2000 + i, 8);
    Schedule sched;
    for (int t = 0; t < inst.T(); ++t) {
      sched.x.push_back(2.0 * U(rng));
      sched.z.push_back(2.0 * U(rng));
    }
    sched.s = derive_storage(sched.x, sched.z);
    CostBreakdown cost = evaluate_cost(inst, sched);
    const double sum = cost.purchase + cost.purchase_smoothing +
                       cost.delivery + cost.delivery_switching;
    CHECK(std::abs(cost.total - sum) <= 1e-12 * std::max(1.0, std::abs(sum)));
  }
}

TEST_CASE("derive_storage matches the schedule storage exactly") {
  Instance inst = random_instance(default_params(), 9, 12);
  Schedule sched = forced_schedule(inst);
  std::vector<double> s = derive_storage(sched.x, sched.z);
  REQUIRE(s.size() == sched.s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == sched.s[i]);
}
