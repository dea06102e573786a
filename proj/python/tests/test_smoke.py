"""End-to-end smoke tests for the osdm_py bindings."""

import math
import os
import sys

import pytest

import osdm_py as om


def default_params():
    p = om.CostParams()
    p.p_min = 10.0
    p.p_max = 200.0
    p.gamma = 10.0
    p.delta = 5.0
    p.c = 0.2
    p.epsilon = 0.05
    p.S = 1.0
    p.T = 48
    p.smoothing_mode = om.SmoothingMode.Switching
    p.delivery_mode = om.DeliveryMode.Decreasing
    return p


def test_lambert():
    assert om.lambert_w0(0.0) == 0.0
    assert om.lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-12)
    assert om.lambert_w0(-1.0 / math.e) == pytest.approx(-1.0, abs=1e-6)


def test_ratios_and_orderings():
    r = om.ratios(default_params())
    assert r.alpha == pytest.approx(5.729741, abs=1e-5)
    assert abs(om.alpha_residual(default_params(), r.alpha)) < 1e-9
    assert r.alpha_B < r.alpha
    assert r.alpha_IF < r.alpha
    assert r.alpha_IB < r.alpha_B


def test_cost_example():
    # Single step, x = z = 1, p = 10, gamma = 2, delta = 1, no delivery cost:
    # purchase 10, purchase smoothing 2*(|1-0|+|0-1|) = 4, delivery switching
    # 1*(|1-0|+|0-1|) = 2 -> total 16.
    p = om.CostParams()
    p.p_min = 1.0
    p.p_max = 100.0
    p.gamma = 2.0
    p.delta = 1.0
    p.T = 1
    inst = om.Instance()
    inst.params = p
    s = om.Step()
    s.p = 10.0
    s.b = 1.0
    inst.steps = [s]
    sched = om.Schedule()
    sched.x = [1.0]
    sched.z = [1.0]
    sched.s = [0.0]
    cost = om.evaluate_cost(inst, sched)
    assert cost.total == pytest.approx(16.0, abs=1e-12)


def test_identity_residuals():
    p = default_params()
    for w in (0.0, 0.3, 0.7, 1.0):
        assert abs(om.base_identity_residual(p, w)) < 1e-8
        assert abs(om.flex_identity_residual(p, w, 0.5 * w)) < 1e-8


def test_paad_feasible_and_competitive():
    spec = om.GenSpec()
    spec.family = om.GenFamily.RandomSynthetic
    spec.params = default_params()
    spec.params.T = 24
    spec.seed = 3
    inst = om.gen(spec)
    assert not om.validate(inst)
    sched = om.paad_run(inst)
    assert not om.check_feasible(inst, sched, 1e-9)
    cost = om.evaluate_cost(inst, sched)
    opt = om.opt_bilinear(inst)
    ratio = om.ecr(inst, cost.total, opt.cost)
    assert ratio <= om.ratios(inst.params).alpha + 1e-6


def test_pald_matches_paad_on_analytic_thresholds():
    spec = om.GenSpec()
    spec.family = om.GenFamily.RandomSynthetic
    spec.params = default_params()
    spec.params.T = 24
    spec.seed = 11
    inst = om.gen(spec)
    th = om.analytic_knots(inst.params, 10)
    sched = om.pald_run(inst, th)
    assert not om.check_feasible(inst, sched, 1e-9)
    paad_cost = om.evaluate_cost(inst, om.paad_run(inst)).total
    pald_cost = om.evaluate_cost(inst, sched).total
    assert pald_cost == pytest.approx(paad_cost, rel=0.05)


def test_projection_membership():
    params = default_params()
    rset = om.RobustSetSpec()
    rset.mode = om.RobustSetMode.BaseS
    rset.rho = 5.0 * om.ratios(params).alpha
    rset.params = params
    th = om.analytic_knots(params, 10)
    proj = om.project(th, rset)
    res = om.membership(proj, rset, 1e-7)
    assert res.ok, res.where


def test_instance_roundtrip(tmp_path):
    spec = om.GenSpec()
    spec.family = om.GenFamily.RandomSynthetic
    spec.params = default_params()
    spec.params.T = 12
    spec.seed = 5
    inst = om.gen(spec)
    path = str(tmp_path / "inst.csv")
    om.write_instance_csv(path, inst)
    back = om.read_instance_csv(path)
    assert back.T == inst.T
    assert back.params.p_max == inst.params.p_max
    assert back.total_demand() == pytest.approx(inst.total_demand(), abs=1e-12)


def test_run_experiment():
    instances = []
    for seed in range(3):
        spec = om.GenSpec()
        spec.family = om.GenFamily.RandomSynthetic
        spec.params = default_params()
        spec.params.T = 16
        spec.seed = seed
        instances.append(om.gen(spec))
    cfg = om.ExperimentConfig()
    cfg.algs = ["paad", "immediate"]
    cfg.threads = 1
    rows = om.run_experiment(instances, cfg)
    assert len(rows) == 6
    assert all(not r.error for r in rows)
    assert all(math.isfinite(r.ecr) and r.ecr >= 1.0 - 1e-9 for r in rows)


def test_trace_ingestion():
    data_dir = os.path.join(os.path.dirname(__file__), "..", "..", "data")
    prices = om.load_prices(os.path.join(data_dir, "prices.csv"))
    tasks = om.load_tasks(os.path.join(data_dir, "tasks.csv"))
    assert len(prices.prices) == 672
    assert prices.spacing_seconds == 900
    cfg = om.TraceConfig()
    cfg.T = 48
    cfg.seed = 1
    cfg.params = default_params()
    inst = om.build_trace_instance(cfg, prices, tasks)
    assert inst.T == 48
    assert not om.validate(inst)
    sched = om.paad_run(inst)
    assert not om.check_feasible(inst, sched, 1e-9)
