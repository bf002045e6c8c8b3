import numpy as np
import pytest

from hyperlab import models
from hyperlab.errors import FrontExplosion
from hyperlab.fronts import front_tracking_run
from hyperlab.piecewise import PiecewiseConstantFn
from hyperlab.riemann import evaluate_fan, rh_residual, solve_riemann_scalar
from hyperlab.schemes import SchemeConfig

BURGERS = models.burgers()


def audit_rh(model, sol, tol=1e-9, include_np=False):
    worst = 0.0
    for ep in sol.epochs:
        for f in ep.fronts:
            if f.kind == "non-physical" and not include_np:
                continue
            worst = max(worst, rh_residual(model, f.u_l, f.u_r, f.speed))
    return worst


class TestScalarFronts:
    def test_single_shock_exact_forever(self):
        cfg = SchemeConfig(eps=1.0, T=4.0, domain=(-5.0, 5.0), delta=0.05)
        data = PiecewiseConstantFn.riemann([1.0], [0.0])
        sol = front_tracking_run(BURGERS, data, cfg)
        assert len(sol.events) == 0
        assert len(sol.epochs[0].fronts) == 1
        f = sol.epochs[0].fronts[0]
        assert f.speed == pytest.approx(0.5, abs=1e-12)
        pc = sol.state(4.0)
        assert pc.xs[0] == pytest.approx(2.0, abs=1e-12)

    def test_merging_shocks(self):
        # jumps 2/1/0 at x = 0, 1: speeds 1.5 and 0.5 collide at (t,x)=(1,1.5)
        cfg = SchemeConfig(eps=1.0, T=3.0, domain=(-5.0, 10.0), delta=0.05)
        data = PiecewiseConstantFn(np.array([0.0, 1.0]),
                                   np.array([[2.0], [1.0], [0.0]]))
        sol = front_tracking_run(BURGERS, data, cfg)
        assert len(sol.events) == 1
        ev = sol.events[0]
        assert ev["t"] == pytest.approx(1.0, abs=1e-12)
        assert ev["x"] == pytest.approx(1.5, abs=1e-12)
        after = sol.epochs[-1].fronts
        assert len(after) == 1
        assert after[0].speed == pytest.approx(1.0, abs=1e-12)

    def test_rarefaction_split_count_and_accuracy(self):
        cfg = SchemeConfig(eps=1.0, T=1.0, domain=(-2.0, 3.0), delta=0.05)
        data = PiecewiseConstantFn.riemann([0.0], [1.0])
        sol = front_tracking_run(BURGERS, data, cfg)
        fronts = sol.epochs[0].fronts
        assert len(fronts) == 20
        assert all(f.strength <= 0.05 + 1e-12 for f in fronts)
        fan = solve_riemann_scalar(BURGERS, [0.0], [1.0])
        pc = sol.state(1.0)
        xs = np.linspace(-1.5, 2.5, 2001)
        ref = np.array([evaluate_fan(fan, x)[0] for x in xs])
        err = np.trapezoid(np.abs(pc(xs)[:, 0] - ref), xs)
        C = err / 0.05
        assert C <= 2.0  # recorded constant: err <= C*delta

    def test_rh_audit(self):
        for data in [PiecewiseConstantFn.riemann([0.0], [1.0]),
                     PiecewiseConstantFn(np.array([0.0, 1.0]),
                                         np.array([[2.0], [1.0], [0.0]]))]:
            cfg = SchemeConfig(eps=1.0, T=2.0, domain=(-5.0, 8.0), delta=0.05)
            sol = front_tracking_run(BURGERS, data, cfg)
            assert audit_rh(BURGERS, sol) <= 1e-9

    def test_shock_rarefaction_interaction(self):
        # shock catches a rarefaction tail: multiple events, stays exact RH
        data = PiecewiseConstantFn(np.array([-1.0, 0.0]),
                                   np.array([[0.0], [1.0], [-0.2]]))
        cfg = SchemeConfig(eps=1.0, T=3.0, domain=(-6.0, 6.0), delta=0.1)
        sol = front_tracking_run(BURGERS, data, cfg)
        assert len(sol.events) >= 2
        assert audit_rh(BURGERS, sol) <= 1e-9
        # mass conserved exactly (all physical fronts RH-exact)
        a, b = -5.0, 5.0
        m0 = sol.state(0.0).integral(a, b)
        mT = sol.state(3.0).integral(a, b)
        flux = BURGERS.f(np.array([0.0])) - BURGERS.f(np.array([-0.2]))
        assert np.max(np.abs(mT - m0 - 3.0 * flux)) <= 1e-10


class TestSystemFronts:
    def test_psystem_two_wave_data(self):
        m = models.p_system()
        data = PiecewiseConstantFn.riemann([1.0, 0.0], [1.05, 0.02])
        cfg = SchemeConfig(eps=1.0, T=0.5, domain=(-2.0, 2.0), delta=0.01)
        sol = front_tracking_run(m, data, cfg)
        assert audit_rh(m, sol) <= 1e-9
        kinds = {f.kind for f in sol.epochs[0].fronts}
        assert kinds <= {"shock", "rarefaction", "contact"}

    def test_psystem_interaction_rh_exact(self):
        # two Riemann data whose waves interact
        m = models.p_system()
        data = PiecewiseConstantFn(np.array([0.0, 0.3]),
                                   np.array([[1.0, 0.0], [1.04, 0.015], [1.0, 0.03]]))
        cfg = SchemeConfig(eps=1.0, T=1.0, domain=(-3.0, 3.0), delta=0.02)
        sol = front_tracking_run(m, data, cfg)
        assert len(sol.events) >= 1
        assert audit_rh(m, sol) <= 1e-9
        assert sol.total_nonphysical_strength() == 0.0

    def test_nonphysical_merging_budget(self):
        m = models.p_system()
        data = PiecewiseConstantFn(np.array([0.0, 0.3]),
                                   np.array([[1.0, 0.0], [1.04, 0.015], [1.0, 0.03]]))
        cfg = SchemeConfig(eps=1.0, T=1.0, domain=(-3.0, 3.0), delta=0.02,
                           rho_np=5e-3)
        sol = front_tracking_run(m, data, cfg)
        nps = [f for ep in sol.epochs for f in ep.fronts
               if f.kind == "non-physical"]
        if nps:  # budget: total strength bounded by rho_np x interactions
            assert sol.np_total <= cfg.rho_np * max(1, len(sol.events))
        # physical fronts still exact
        assert audit_rh(m, sol) <= 1e-9

    def test_mass_conservation_exact(self):
        m = models.p_system()
        data = PiecewiseConstantFn.riemann([1.0, 0.0], [1.05, 0.02])
        cfg = SchemeConfig(eps=1.0, T=1.0, domain=(-3.0, 3.0), delta=0.01)
        sol = front_tracking_run(m, data, cfg)
        a, b = -2.5, 2.5
        m0 = sol.state(0.0).integral(a, b)
        mT = sol.state(1.0).integral(a, b)
        flux = m.f(np.array([1.0, 0.0])) - m.f(np.array([1.05, 0.02]))
        assert np.max(np.abs(mT - m0 - 1.0 * flux)) <= 1e-9


class TestGuards:
    def test_front_cap(self):
        cfg = SchemeConfig(eps=1.0, T=1.0, domain=(-2.0, 3.0), delta=0.001,
                           front_cap=100)
        data = PiecewiseConstantFn.riemann([0.0], [1.0])
        with pytest.raises(FrontExplosion):
            front_tracking_run(BURGERS, data, cfg)

    def test_deterministic(self):
        data = PiecewiseConstantFn(np.array([-1.0, 0.0]),
                                   np.array([[0.0], [1.0], [-0.2]]))
        cfg = SchemeConfig(eps=1.0, T=3.0, domain=(-6.0, 6.0), delta=0.1)
        a = front_tracking_run(BURGERS, data, cfg)
        b = front_tracking_run(BURGERS, data, cfg)
        assert [e["t"] for e in a.events] == [e["t"] for e in b.events]
        pa, pb = a.state(3.0), b.state(3.0)
        assert np.array_equal(pa.xs, pb.xs) and np.array_equal(pa.vals, pb.vals)
