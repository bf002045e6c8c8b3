"""Verification and error analysis.

Solutions enter through lightweight views exposing the profile at any time
as a PiecewiseConstantFn.  Space integrals against the C^2 bump test
functions are then evaluated in closed form; time integrals use composite
Gauss-Legendre panels split at the solution's own kink times (grid
solutions, being piecewise constant in time, integrate exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (DegenerateData, MissingEntropyPair, OracleUnavailable,
                     QuadratureUnderResolved)
from .fronts import FrontTrackingSolution
from .models import FluxModel, eigensystem
from .piecewise import GridSolution, PiecewiseConstantFn, as_state, grid_tv
from .riemann import (WaveFan, evaluate_fan, liu_admissible, rh_residual,
                      solve_strengths, _field_classes)

TIME_PAD = 1e-6
# sup |d/dy (1 - y^2)^3| over [-1, 1], attained at y = 1/sqrt(5)
PSI_DERIV_MAX = 96.0 / (25.0 * math.sqrt(5.0))


# ---------------------------------------------------------------------------
# basic functionals

def total_variation(obj, a=None, b=None, t=None):
    """Total variation of a profile over the open interval (a, b).

    Accepts a PiecewiseConstantFn, a GridSolution (with t), or a plain
    snapshot row (interval ignored for rows)."""
    if isinstance(obj, PiecewiseConstantFn):
        return obj.tv(a, b)
    if isinstance(obj, GridSolution):
        tt = obj.times[-1] if t is None else t
        return obj.as_piecewise(tt).tv(a, b)
    return grid_tv(np.asarray(obj))


def l1_distance(a, b, interval, cells=8192):
    """L1 distance over [lo, hi]: exact for two piecewise-constant profiles,
    midpoint quadrature when callables are involved."""
    lo, hi = interval
    if isinstance(a, PiecewiseConstantFn) and isinstance(b, PiecewiseConstantFn):
        return a.l1_distance(b, lo, hi)
    xs = lo + (hi - lo) * (np.arange(cells) + 0.5) / cells
    dx = (hi - lo) / cells

    def sample(f):
        if isinstance(f, PiecewiseConstantFn):
            return f(xs)
        return np.stack([as_state(f(x)) for x in xs])

    va, vb = sample(a), sample(b)
    return float(np.sum(np.linalg.norm(va - vb, axis=1)) * dx)


# ---------------------------------------------------------------------------
# solution views

class _StateCache:
    def state(self, t):
        cache = self.__dict__.setdefault("_state_cache", {})
        key = float(t)
        out = cache.get(key)
        if out is None:
            out = self._state(key)
            cache[key] = out
        return out


class GridView(_StateCache):
    """A stored grid run, held piecewise constant in time between snapshots."""

    piecewise_in_time = True

    def __init__(self, sol: GridSolution):
        self.sol = sol
        self.t_span = (float(sol.times[0]), float(sol.times[-1]))
        self.x_span = (sol.x0, sol.xmax)
        self.dx = sol.dx

    def _state(self, t):
        return self.sol.as_piecewise(t)

    def segments(self, t0, t1):
        """(ta, tb, profile) pieces on which the solution is frozen."""
        ts = [float(t) for t in self.sol.times if t0 < t < t1]
        knots = [t0] + ts + [t1]
        return [(a, b, self.state(a)) for a, b in zip(knots[:-1], knots[1:])
                if b > a + 1e-15]


class FanView(_StateCache):
    """Self-similar Riemann solution centered at (t0, x0)."""

    piecewise_in_time = False

    def __init__(self, fan: WaveFan, x0=0.0, t0=0.0, t_span=(0.0, 1.0),
                 x_span=(-2.0, 2.0), rarefaction_step=0.002):
        self.fan = fan
        self.x0 = x0
        self.t0 = t0
        self.t_span = t_span
        self.x_span = x_span
        self.rarefaction_step = rarefaction_step

    def _state(self, t):
        dt = t - self.t0
        xs, vals = [], [self.fan.left]
        if dt <= 0:
            if self.fan.waves:
                xs.append(self.x0)
                vals.append(self.fan.right)
            else:
                return PiecewiseConstantFn.constant(self.fan.left)
            return PiecewiseConstantFn(np.array(xs), np.stack(vals))
        for w in self.fan.waves:
            if w.kind == "rarefaction":
                k = max(2, int(math.ceil((w.speed_r - w.speed_l)
                                         / self.rarefaction_step)))
                sp = np.linspace(w.speed_l, w.speed_r, k + 1)
                mids = 0.5 * (sp[:-1] + sp[1:])
                prof = np.stack([evaluate_fan(self.fan, m) for m in mids])
                for j in range(k):
                    xs.append(self.x0 + sp[j] * dt)
                    vals.append(prof[j])
                xs.append(self.x0 + sp[-1] * dt)
                vals.append(w.u_r)
            else:
                xs.append(self.x0 + w.speed * dt)
                vals.append(w.u_r)
        # guard against zero-width pieces from equal speeds
        keep_x, keep_v = [], [vals[0]]
        prev = -np.inf
        for x, v in zip(xs, vals[1:]):
            if x <= prev:
                keep_v[-1] = v
                continue
            keep_x.append(x)
            keep_v.append(v)
            prev = x
        if not keep_x:
            return PiecewiseConstantFn.constant(self.fan.left)
        return PiecewiseConstantFn(np.array(keep_x), np.stack(keep_v))

    def _lines(self):
        speeds = []
        for w in self.fan.waves:
            if w.kind == "rarefaction":
                speeds.extend([w.speed_l, w.speed_r])
            else:
                speeds.append(w.speed)
        return speeds

    def kink_times(self, t0, t1, x_values):
        out = []
        for s in self._lines():
            if s == 0.0:
                continue
            for a in x_values:
                tc = self.t0 + (a - self.x0) / s
                if t0 < tc < t1:
                    out.append(tc)
        return sorted(out)


class FrontTrackingView(_StateCache):
    piecewise_in_time = False

    def __init__(self, sol: FrontTrackingSolution, x_span):
        self.sol = sol
        self.t_span = (0.0, sol.T)
        self.x_span = x_span

    def _state(self, t):
        return self.sol.state(t)

    def kink_times(self, t0, t1, x_values):
        out = [e["t"] for e in self.sol.events if t0 < e["t"] < t1]
        epochs = self.sol.epochs
        for j, ep in enumerate(epochs):
            te = epochs[j + 1].t if j + 1 < len(epochs) else self.sol.T
            lo, hi = max(ep.t, t0), min(te, t1)
            if hi <= lo:
                continue
            for f in ep.fronts:
                if f.speed == 0.0:
                    continue
                for a in x_values:
                    tc = ep.t + (a - float(f.pos)) / f.speed
                    if lo < tc < hi:
                        out.append(tc)
        return sorted(out)


def as_view(obj, x_span=None):
    if isinstance(obj, (GridView, FanView, FrontTrackingView)):
        return obj
    if isinstance(obj, GridSolution):
        return GridView(obj)
    if isinstance(obj, FrontTrackingSolution):
        if x_span is None:
            raise ValueError("front tracking view needs an x_span")
        return FrontTrackingView(obj, x_span)
    raise TypeError(f"cannot view {type(obj).__name__} as a solution")


# ---------------------------------------------------------------------------
# C^2 bump test functions with analytic norms and antiderivatives

def _psi(y):
    y = np.clip(y, -1.0, 1.0)
    return (1.0 - y * y) ** 3


def _dpsi(y):
    y = np.clip(y, -1.0, 1.0)
    return -6.0 * y * (1.0 - y * y) ** 2


def _Psi(y):
    """Antiderivative of the bump profile, zero at the left edge."""
    y = np.clip(y, -1.0, 1.0)
    val = y - y ** 3 + 0.6 * y ** 5 - y ** 7 / 7.0
    return val + 16.0 / 35.0  # shift so _Psi(-1) = 0


@dataclass(frozen=True)
class BumpTestFn:
    """phi(t, x) = psi((t - tc)/st) * psi((x - xc)/sx); the time factor is 1
    when tc is None (constant across the strip)."""

    xc: float
    sx: float
    tc: Optional[float] = None
    st: Optional[float] = None

    @property
    def w1inf(self):
        m = max(1.0, PSI_DERIV_MAX / self.sx)
        if self.tc is not None:
            m = max(m, PSI_DERIV_MAX / self.st)
        return m

    def T(self, t):
        return 1.0 if self.tc is None else float(_psi((t - self.tc) / self.st))

    def Tp(self, t):
        return 0.0 if self.tc is None else float(_dpsi((t - self.tc) / self.st) / self.st)

    def T_antideriv(self, t):
        if self.tc is None:
            return t
        return float(self.st * _Psi((t - self.tc) / self.st))

    def x_edges(self):
        return (self.xc - self.sx, self.xc + self.sx)

    def describe(self):
        return {"xc": self.xc, "sx": self.sx, "tc": self.tc, "st": self.st}


def profile_integrals(pc: PiecewiseConstantFn, values, bump: BumpTestFn):
    """Closed-form (I, J) = (int g X dx, int g X' dx) for piecewise-constant
    g given by `values` on the pieces of pc."""
    lo, hi = bump.x_edges()
    cuts = np.concatenate([[lo], np.clip(pc.xs, lo, hi), [hi]])
    y = (cuts - bump.xc) / bump.sx
    P = _Psi(y)
    p = _psi(y)
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    I = np.sum(vals * (bump.sx * np.diff(P))[:, None], axis=0)
    J = np.sum(vals * np.diff(p)[:, None], axis=0)
    return I, J


@dataclass
class TestFamily:
    bumps: list
    descriptor: dict

    def __iter__(self):
        return iter(self.bumps)


def default_family(t0, t1, x0, x1, scales=3) -> TestFamily:
    """Tensor bumps at dyadic scales with half-overlapping translates, plus
    time-constant variants; norms are known analytically."""
    bumps = []
    Lx = x1 - x0
    tc, st = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
    for lev in range(scales):
        sx = Lx / 2 ** (lev + 1)
        centers = np.arange(x0, x1 + 0.5 * sx, sx)
        for c in centers:
            bumps.append(BumpTestFn(float(c), float(sx)))
            bumps.append(BumpTestFn(float(c), float(sx), tc, st))
    return TestFamily(bumps, {
        "profile": "(1-y^2)^3", "scales": scales, "x_span": (x0, x1),
        "t_span": (t0, t1), "count": len(bumps),
        "deriv_sup": PSI_DERIV_MAX})


# ---------------------------------------------------------------------------
# strip residuals (weak form and entropy form)

def _gauss_panels(t0, t1, kinks, min_panels=16, order=10):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    cuts = sorted({t0, t1, *[k for k in kinks if t0 < k < t1]})
    refined = [t0]
    width_cap = (t1 - t0) / min_panels
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(math.ceil((b - a) / width_cap - 1e-12)))
        refined.extend(a + (b - a) * np.arange(1, m + 1) / m)
    out = []
    for a, b in zip(refined[:-1], refined[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        out.append((mid + half * nodes, half * weights))
    return out


def _eval_quantity(model, vals, what):
    if what == "conservation":
        return vals, model.f(vals)
    if what == "entropy":
        model.require_entropy_pair()
        return (np.asarray(model.entropy(vals), dtype=float),
                np.asarray(model.entropy_flux(vals), dtype=float))
    raise ValueError(what)


def strip_expressions(view, model, bumps, t0, t1, what="conservation"):
    """The bracketed expression of the approximate weak form on the strip:
    int u(t0) phi(t0) - int u(t1) phi(t1) + int int (u phi_t + f(u) phi_x),
    evaluated for every bump at once (the solution is queried per time node,
    not per test function).

    Vector-valued for the conservation form, scalar (shape (1,)) for the
    entropy form, with (u, f) replaced by (eta, q)."""
    pc0, pc1 = view.state(t0), view.state(t1)
    g0, _ = _eval_quantity(model, pc0.vals, what)
    g1, _ = _eval_quantity(model, pc1.vals, what)
    exprs = []
    for bump in bumps:
        I0, _ = profile_integrals(pc0, g0, bump)
        I1, _ = profile_integrals(pc1, g1, bump)
        exprs.append(bump.T(t0) * I0 - bump.T(t1) * I1)

    if view.piecewise_in_time:
        for a, b, pc in view.segments(t0, t1):
            gv, fv = _eval_quantity(model, pc.vals, what)
            for i, bump in enumerate(bumps):
                I, _ = profile_integrals(pc, gv, bump)
                _, J = profile_integrals(pc, fv, bump)
                exprs[i] = exprs[i] + I * (bump.T(b) - bump.T(a))
                exprs[i] = exprs[i] + J * (bump.T_antideriv(b) - bump.T_antideriv(a))
        return exprs

    kinks = set()
    for bump in bumps:
        kinks.update(view.kink_times(t0, t1, bump.x_edges()))
    for ts, ws in _gauss_panels(t0, t1, sorted(kinks)):
        for t, w in zip(ts, ws):
            pc = view.state(t)
            gv, fv = _eval_quantity(model, pc.vals, what)
            for i, bump in enumerate(bumps):
                I, _ = profile_integrals(pc, gv, bump)
                _, J = profile_integrals(pc, fv, bump)
                exprs[i] = exprs[i] + w * (bump.Tp(t) * I + bump.T(t) * J)
    return exprs


def strip_expression(view, model, bump, t0, t1, what="conservation"):
    return strip_expressions(view, model, [bump], t0, t1, what)[0]


def _check_resolution(view, family):
    if isinstance(view, GridView):
        smallest = min(b.sx for b in family)
        if smallest < 4 * view.dx:
            raise QuadratureUnderResolved(
                f"test scale {smallest:g} below 4 cells ({4 * view.dx:g})")


def weak_residual(view, model, t_span=None, family=None, time_pad=TIME_PAD):
    """max over the family of |expr| / ((t1 - t0 + pad) * |phi|_W1inf)."""
    view = as_view(view)
    t0, t1 = t_span if t_span is not None else view.t_span
    if family is None:
        family = default_family(t0, t1, *view.x_span)
    _check_resolution(view, family)
    worst = 0.0
    exprs = strip_expressions(view, model, family.bumps, t0, t1, "conservation")
    for bump, expr in zip(family, exprs):
        worst = max(worst, float(np.linalg.norm(np.atleast_1d(expr)))
                    / ((t1 - t0 + time_pad) * bump.w1inf))
    return worst


def entropy_residual(view, model, t_span=None, family=None, time_pad=TIME_PAD):
    """min over the (nonnegative) family of the entropy surplus, scaled like
    weak_residual; values below zero flag entropy violation."""
    view = as_view(view)
    model.require_entropy_pair()
    t0, t1 = t_span if t_span is not None else view.t_span
    if family is None:
        family = default_family(t0, t1, *view.x_span)
    _check_resolution(view, family)
    best = np.inf
    exprs = strip_expressions(view, model, family.bumps, t0, t1, "entropy")
    for bump, expr in zip(family, exprs):
        best = min(best, float(np.ravel(expr)[0])
                   / ((t1 - t0 + time_pad) * bump.w1inf))
    return best


# ---------------------------------------------------------------------------
# the eps-approximate-solution certificate

@dataclass
class EpsCertificate:
    eps: float
    initial_excess: float
    lipschitz_excess: float
    weak_excess: float
    entropy_excess: float
    family: dict
    tests: list = field(default_factory=list)


def _eps_from_bound(defect, dt, norm):
    """Smallest eps with defect <= eps*(dt + eps)*norm."""
    if defect <= 0:
        return 0.0
    c = defect / norm
    return 0.5 * (-dt + math.sqrt(dt * dt + 4.0 * c))


def certify_eps_approx(view, model, M, initial_data=None, family=None,
                       n_probe=7, entropy=True) -> EpsCertificate:
    """Certificate of Lipschitz-in-time, weak-form, and entropy inequalities
    over a finite, documented test family; a lower bound on the true eps."""
    view = as_view(view)
    t0, T = view.t_span
    probes = np.linspace(t0, T, n_probe)
    x0, x1 = view.x_span
    if family is None:
        family = default_family(t0, T, x0, x1)
    _check_resolution(view, family)
    tests = []

    initial_excess = 0.0
    if initial_data is not None:
        initial_excess = view.state(t0).l1_distance(initial_data, x0, x1)
        tests.append({"kind": "initial", "value": initial_excess})

    states = {float(t): view.state(t) for t in probes}
    lip = 0.0
    for i in range(n_probe):
        for j in range(i + 1, n_probe):
            ta, tb = float(probes[i]), float(probes[j])
            d = states[ta].l1_distance(states[tb], x0, x1)
            excess = max(0.0, d - M * (tb - ta))
            lip = max(lip, excess)
            tests.append({"kind": "lipschitz", "t": (ta, tb), "value": excess})

    strips = [(float(a), float(b)) for a, b in zip(probes[:-1], probes[1:])]
    strips.append((float(probes[0]), float(probes[-1])))
    weak = 0.0
    ent = 0.0
    use_entropy = entropy and model.has_entropy_pair()
    for (ta, tb) in strips:
        exprs = strip_expressions(view, model, family.bumps, ta, tb,
                                  "conservation")
        surpluses = strip_expressions(view, model, family.bumps, ta, tb,
                                      "entropy") if use_entropy else None
        for i, bump in enumerate(family):
            defect = float(np.linalg.norm(np.atleast_1d(exprs[i])))
            e = _eps_from_bound(defect, tb - ta, bump.w1inf)
            weak = max(weak, e)
            tests.append({"kind": "weak", "t": (ta, tb),
                          "bump": bump.describe(), "defect": defect, "eps": e})
            if use_entropy:
                s = float(np.ravel(surpluses[i])[0])
                e = _eps_from_bound(max(0.0, -s), tb - ta, bump.w1inf)
                ent = max(ent, e)
                tests.append({"kind": "entropy", "t": (ta, tb),
                              "bump": bump.describe(), "surplus": s, "eps": e})

    eps = max(initial_excess, lip, weak, ent)
    return EpsCertificate(eps, initial_excess, lip, weak, ent,
                          dict(family.descriptor), tests)


# ---------------------------------------------------------------------------
# jump detection

@dataclass
class JumpRecord:
    t: float
    xi: float
    u_minus: np.ndarray
    u_plus: np.ndarray
    speed: float
    rh_residual: float
    window_radius: float
    defect: float
    liu_margin: Optional[float] = None
    entropy_margin: Optional[float] = None


def _conservative_location(xs, prof, dx, p_minus, p_plus):
    """Position of the step with states (p-, p+) carrying the window's mass."""
    A, B = xs[0] - 0.5 * dx, xs[-1] + 0.5 * dx
    mass = float(np.sum(prof) * dx)
    return (mass - (B * p_plus - A * p_minus)) / (p_minus - p_plus)


def detect_jumps(sol: GridSolution, t, r=None, threshold=0.05, model=None):
    """Scan one snapshot for approximate jumps: one-sided window averages
    give the candidate states, a conservative (mass) location per snapshot
    in a centered 5-snapshot window gives the least-squares speed, and the
    windowed L1 defect against the fitted traveling step accepts or rejects.
    """
    dx = sol.dx
    if r is None:
        r = 10 * dx
    w = max(2, int(round(r / dx)))
    if w < 2:
        raise ValueError("window radius must cover at least 2 cells")
    jt = sol.time_index(t)
    row = sol.states[jt]
    ncells = sol.ncells
    csum = np.concatenate([np.zeros((1, sol.n)), np.cumsum(row, axis=0)])

    sizes = np.zeros(ncells + 1)
    for k in range(w, ncells - w + 1):
        um = (csum[k] - csum[k - w]) / w
        up = (csum[k + w] - csum[k]) / w
        sizes[k] = np.linalg.norm(up - um)
    candidates = [k for k in range(w, ncells - w + 1)
                  if sizes[k] > threshold
                  and sizes[k] >= sizes[max(k - 1, 0)]
                  and sizes[k] >= sizes[min(k + 1, ncells)]]
    candidates.sort(key=lambda k: -sizes[k])
    chosen = []
    for k in candidates:
        if all(abs(k - c) >= 2 * w for c in chosen):
            chosen.append(k)
    chosen.sort()

    # centered snapshot window for speed fitting
    lo = max(0, jt - 2)
    hi = min(len(sol.times), jt + 3)
    win = list(range(lo, hi))
    t_c = float(sol.times[jt])
    centers = sol.centers()

    records = []
    edges = sol.edges()
    w4 = max(1, w // 4)  # trim the inner quarter: keeps layers out of means
    for k in chosen:
        um = (csum[k - w4] - csum[k - w]) / (w - w4)
        up = (csum[k + w] - csum[k + w4]) / (w - w4)
        e = (up - um) / np.linalg.norm(up - um)
        du = up - um
        if model is not None:
            lam0 = float(du @ (model.f(up) - model.f(um)) / (du @ du))
        else:
            lam0 = 0.0
        xi_c = _conservative_location(centers[k - w:k + w],
                                      sol.states[jt][k - w:k + w] @ e, dx,
                                      float(np.mean(sol.states[jt][k - w:k] @ e)),
                                      float(np.mean(sol.states[jt][k:k + w] @ e)))

        def window_at(pos):
            km = int(round((pos - sol.x0) / dx))
            if km - w < 0 or km + w > ncells:
                return None
            return km

        # track the jump with the predicted speed, one location per snapshot
        ts, xis = [], []
        for m in win:
            tm = float(sol.times[m])
            km = window_at(xi_c + lam0 * (tm - t_c))
            if km is None:
                continue
            pm = float(np.mean(sol.states[m][km - w:km] @ e))
            pp = float(np.mean(sol.states[m][km:km + w] @ e))
            if abs(pm - pp) < 1e-12:
                continue
            ts.append(tm)
            xis.append(_conservative_location(centers[km - w:km + w],
                                              sol.states[m][km - w:km + w] @ e,
                                              dx, pm, pp))
        if len(ts) >= 2:
            tarr, xarr = np.array(ts), np.array(xis)
            tbar = tarr.mean()
            denom = float(np.sum((tarr - tbar) ** 2))
            speed = float(np.sum((tarr - tbar) * (xarr - xarr.mean())) / denom) \
                if denom > 0 else lam0
            xi0 = float(xarr.mean() + speed * (t_c - tbar))
        else:
            speed = lam0
            xi0 = float(edges[k])

        # windowed L1 defect against the fitted traveling step, window
        # centered on the fitted line per snapshot
        defect = 0.0
        tspan = 0.0
        for m in win:
            tm = float(sol.times[m])
            pos = xi0 + speed * (tm - t_c)
            km = window_at(pos)
            if km is None:
                continue
            xs = centers[km - w:km + w]
            U = np.where((xs < pos)[:, None], um[None, :], up[None, :])
            d = float(np.sum(np.linalg.norm(sol.states[m][km - w:km + w] - U,
                                            axis=1)) * dx)
            wgt = float(sol.times[min(m + 1, hi - 1)] - sol.times[max(m - 1, lo)]) / 2
            defect += d * max(wgt, dx)
            tspan += max(wgt, dx)
        size = float(np.linalg.norm(up - um))
        rate = defect / max(tspan, 1e-300)
        # a genuine jump concentrates: its windowed L1 defect per unit time
        # stays well below |jump| * r, while smooth profiles saturate it
        if rate > 0.35 * size * r:
            continue

        rec = JumpRecord(float(sol.times[jt]), xi0, um, up, speed,
                         rh_residual(model, um, up, speed) if model else np.nan,
                         r, rate)
        if model is not None:
            try:
                rec.liu_margin = liu_admissible(model, um, up, 0 if model.n == 1
                                                else _dominant_family(model, um, up)).margin
            except Exception:
                rec.liu_margin = None
            if model.has_entropy_pair():
                rec.entropy_margin = float(
                    speed * (model.entropy(up) - model.entropy(um))
                    - (model.entropy_flux(up) - model.entropy_flux(um)))
        records.append(rec)
    return records


def _dominant_family(model, um, up):
    es = eigensystem(model, 0.5 * (um + up))
    comps = np.abs(es.left @ (up - um))
    return int(np.argmax(comps))


# ---------------------------------------------------------------------------
# interval partition and the local error decomposition

def interval_partition(fn, eps):
    """Greedy left-to-right partition points so every open interval between
    consecutive points has total variation below eps."""
    if isinstance(fn, GridSolution):
        fn = fn.as_piecewise(fn.times[-1])
    jumps = fn.jumps()
    points = []
    acc = 0.0
    for x, j in zip(fn.xs, jumps):
        if acc + j >= eps:
            points.append(float(x))
            acc = 0.0
        else:
            acc += j
    return points


@dataclass
class ErrorDecomposition:
    tau: float
    eps: float
    partition: list
    h_ladder: list
    jump_terms: np.ndarray      # (n_h, n_points)  A-type, 1/h included
    interval_terms: np.ndarray  # (n_h, n_intervals)  B-type, 1/h included
    measured_rate: np.ndarray   # (n_h,) |sol(tau+h) - oracle_h|/h
    v_samples: list
    oracle_note: str

    def total(self):
        return self.jump_terms.sum(axis=1) + self.interval_terms.sum(axis=1)


def _linear_evolution(model, pc, u_mid, h):
    """Constant-coefficient evolution of pc by characteristic translation of
    the eigencomponents of Df(u_mid)."""
    es = eigensystem(model, u_mid)
    cuts = np.unique(np.concatenate([pc.xs + lam * h for lam in es.lambdas]))
    mids = 0.5 * (np.concatenate([[cuts[0] - 1.0], cuts])
                  + np.concatenate([cuts, [cuts[-1] + 1.0]]))
    vals = np.zeros((mids.size, model.n))
    for i in range(model.n):
        shifted = pc(mids - es.lambdas[i] * h)
        vals += np.outer(shifted @ es.left[i], es.right[i])
    return PiecewiseConstantFn(cuts, vals)


def error_decomposition(view, model, oracle, tau, eps, h_ladder,
                        conservative_snap=None) -> ErrorDecomposition:
    """Split the instantaneous error at time tau into per-jump terms (vs the
    detected traveling step) and per-interval terms (vs the frozen-matrix
    linear evolution), for each h in the ladder.

    V(t) interval endpoints are snapped outward by conservative_snap (one
    cell for grid views) so the reported variation is an over-estimate."""
    view = as_view(view)
    if conservative_snap is None:
        conservative_snap = view.dx if isinstance(view, GridView) else 0.0
    u_tau = view.state(tau)
    points = interval_partition(u_tau, eps)
    x_lo, x_hi = view.x_span
    knots = [x_lo] + points + [x_hi]
    h_ladder = list(h_ladder)

    A = np.zeros((len(h_ladder), len(points)))
    B = np.zeros((len(h_ladder), len(knots) - 1))
    rates = np.zeros(len(h_ladder))
    tiny = 1e-12

    v_samples = []
    for (a, b) in zip(knots[:-1], knots[1:]):
        row = []
        for frac in (0.0, 0.5, 1.0):
            t = tau + frac * max(h_ladder)
            lo = a + (t - tau) - conservative_snap
            hi = b - (t - tau) + conservative_snap
            row.append(view.state(t).tv(lo, hi) if hi > lo else 0.0)
        v_samples.append(row)

    for hi_idx, h in enumerate(h_ladder):
        sol_h = view.state(tau + h)
        try:
            ora_h = oracle.evolve(u_tau, h)
        except Exception as exc:
            raise OracleUnavailable(str(exc)) from exc
        rates[hi_idx] = (sol_h.l1_distance(ora_h, x_lo, x_hi)) / h

        for kp, x in enumerate(points):
            um = u_tau(np.array([x - tiny]))[0]
            up = u_tau(np.array([x + tiny]))[0]
            du = up - um
            nn = float(du @ du)
            lam = float(du @ (model.f(up) - model.f(um)) / nn) if nn > 0 else 0.0
            step = PiecewiseConstantFn(np.array([x + lam * h]), np.stack([um, up]))
            lo, hi = x - h, x + h
            A[hi_idx, kp] = (sol_h.l1_distance(step, lo, hi)
                             + ora_h.l1_distance(step, lo, hi)) / h

        for ki, (a, b) in enumerate(zip(knots[:-1], knots[1:])):
            lo, hi = a + h, b - h
            if ki == 0:
                lo = a
            if ki == len(knots) - 2:
                hi = b
            if hi <= lo:
                continue
            mid_state = u_tau(np.array([0.5 * (a + b)]))[0]
            W = _linear_evolution(model, u_tau, mid_state, h)
            B[hi_idx, ki] = (sol_h.l1_distance(W, lo, hi)
                             + ora_h.l1_distance(W, lo, hi)) / h

    return ErrorDecomposition(tau, eps, points, h_ladder, A, B, rates,
                              v_samples, getattr(oracle, "note", ""))


# ---------------------------------------------------------------------------
# oracles

class FineGodunovOracle:
    """Reference evolution: the upwind scheme on a refine-times-finer grid.

    Evolution spans must be multiples of the fine grid step.  Scalar models
    with speeds in [0, 1] make this an L1-contraction, so semigroup error
    bounds computed against it are rigorous up to projection."""

    def __init__(self, model, dx, domain, boundary="constant"):
        self.model = model
        self.dx = dx
        self.domain = domain
        self.boundary = boundary
        self.note = f"godunov dx={dx:g} on {domain}"

    def evolve(self, pc: PiecewiseConstantFn, h) -> PiecewiseConstantFn:
        from .schemes import SchemeConfig, godunov_run
        steps = int(round(h / self.dx))
        if steps == 0:
            return pc
        if abs(steps * self.dx - h) > 1e-9 * max(h, 1.0):
            raise OracleUnavailable(
                f"span {h:g} is not a multiple of the oracle step {self.dx:g}")
        cfg = SchemeConfig(eps=self.dx, T=steps * self.dx, domain=self.domain,
                           boundary=self.boundary)
        sol = godunov_run(self.model, pc, cfg)
        return sol.as_piecewise(sol.times[-1])


class ExactFanOracle:
    """Exact evolution for single-jump data via the Riemann fan."""

    def __init__(self, model, rarefaction_step=0.002):
        self.model = model
        self.rarefaction_step = rarefaction_step
        self.note = "exact fan"

    def evolve(self, pc: PiecewiseConstantFn, h) -> PiecewiseConstantFn:
        from .riemann import riemann_solver_for
        pcs = pc.simplified(0.0)
        if pcs.xs.size != 1:
            raise OracleUnavailable("exact fan oracle needs single-jump data")
        fan = riemann_solver_for(self.model)(pcs.vals[0], pcs.vals[1])
        return FanView(fan, x0=float(pcs.xs[0]), t0=0.0,
                       rarefaction_step=self.rarefaction_step).state(h)


def semigroup_error_bound(path, oracle, T, L):
    """(bound, actual) with bound = L * sum_j |path(t_{j+1}) -
    oracle_{dt}(path(t_j))| and actual = |path(T) - oracle_T(path(0))|."""
    if isinstance(path, GridSolution):
        items = [(float(t), path.as_piecewise(t)) for t in path.times]
        x_lo, x_hi = path.x0, path.xmax
    else:
        items = [(float(t), pc) for t, pc in path]
        xs_all = np.concatenate([pc.xs for _, pc in items])
        x_lo, x_hi = float(xs_all.min()) - 1.0, float(xs_all.max()) + 1.0
    if getattr(oracle, "domain", None) is not None:
        x_lo, x_hi = oracle.domain
    bound = 0.0
    for (ta, pa), (tb, pb) in zip(items[:-1], items[1:]):
        evolved = oracle.evolve(pa, tb - ta)
        bound += pb.l1_distance(evolved, x_lo, x_hi)
    bound *= L
    final = oracle.evolve(items[0][1], items[-1][0] - items[0][0])
    actual = items[-1][1].l1_distance(final, x_lo, x_hi)
    return bound, actual


# ---------------------------------------------------------------------------
# strength decomposition of the pointwise jump between two profiles

def q_decomposition(model, u: PiecewiseConstantFn, v: PiecewiseConstantFn,
                    interval=None):
    """Per-family shock-strength components q_i(x) of the jump from u(x) to
    v(x) (shock branches on both sides), plus their integrated total.

    Scalar models reduce to q_1 = v - u exactly, so the total equals the L1
    distance."""
    if interval is None:
        xs_all = np.concatenate([u.xs, v.xs])
        if xs_all.size == 0:
            interval = (-1.0, 1.0)
        else:
            interval = (float(xs_all.min()) - 1.0, float(xs_all.max()) + 1.0)
    lo, hi = interval
    cuts = np.unique(np.concatenate([[lo], np.clip(u.xs, lo, hi),
                                     np.clip(v.xs, lo, hi), [hi]]))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    lengths = np.diff(cuts)
    uu, vv = u(mids), v(mids)

    if model.n == 1:
        q = (vv - uu)
        total = float(np.sum(np.abs(q[:, 0]) * lengths))
        return cuts, q, total

    fields = _field_classes(model, uu.mean(axis=0), vv.mean(axis=0))
    q = np.zeros((mids.size, model.n))
    for r in range(mids.size):
        if np.allclose(uu[r], vv[r], atol=1e-15):
            continue
        q[r] = solve_strengths(model, uu[r], vv[r], fields,
                               rarefaction_as_shocks=True)
    total = float(np.sum(np.abs(q) * lengths[:, None]))
    return cuts, q, total


# ---------------------------------------------------------------------------
# convergence-rate fits

@dataclass
class RateFit:
    model_id: str
    C: float
    p: Optional[float]
    r2: float
    points: list


def rate_fit(points, model_id="power") -> RateFit:
    """Least squares in log space: error = C * eps^p, or C * sqrt(eps)|ln eps|
    (shape fixed, only C fitted)."""
    pts = [(float(e), float(err)) for e, err in points]
    if len(pts) < 3:
        raise DegenerateData("need at least 3 points")
    eps = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.any(err <= 0) or np.any(eps <= 0):
        raise DegenerateData("eps and errors must be positive")
    y = np.log(err)
    if model_id == "power":
        x = np.log(eps)
        if np.ptp(x) == 0:
            raise DegenerateData("eps values must differ")
        A = np.stack([np.ones_like(x), x], axis=1)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        yhat = A @ coef
        C, p = float(np.exp(coef[0])), float(coef[1])
    elif model_id == "sqrtlog":
        shape = np.log(np.sqrt(eps) * np.abs(np.log(eps)))
        c0 = float(np.mean(y - shape))
        yhat = c0 + shape
        C, p = float(np.exp(c0)), None
    else:
        raise DegenerateData(f"unknown rate model {model_id!r}")
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(model_id, C, p, r2, pts)
