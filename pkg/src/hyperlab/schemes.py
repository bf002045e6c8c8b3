"""Approximation schemes: grid methods producing GridSolution trajectories.

All runs are deterministic; identical config and data give bit-identical
output.  Grid schemes store snapshots only at requested times (plus t=0 and
t=T) unless store_all is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (BlowupBeforeRestart, CFLViolation, ConfigError,
                     NewtonFailure, NonfiniteState, SpeedRangeViolation,
                     SubcharacteristicViolation)
from .models import FluxModel, eigenvalues
from .piecewise import GridSolution, PiecewiseConstantFn, as_state
from .riemann import evaluate_fan, riemann_solver_for


@dataclass
class SchemeConfig:
    """Shared configuration for all runs.

    eps is the scheme's accuracy knob (grid size for Godunov/Glimm/MOL,
    viscosity for the parabolic runs, time step for backward Euler and the
    mollification restarts).  dx/dt override the scheme defaults where a
    separate spatial grid exists; CFL limits are enforced per scheme.
    """

    eps: float
    T: float
    domain: tuple
    boundary: str = "constant"
    dx: Optional[float] = None
    dt: Optional[float] = None
    snapshot_times: Optional[Sequence] = None
    store_all: bool = False
    delta: float = 0.05
    rho_np: float = 0.0
    sequence: str = "reversed-digit"
    mollifier_width: Optional[float] = None
    mollifier_kernel: str = "poly"
    a2: Optional[float] = None
    b_matrix: object = None
    front_cap: int = 20000
    speed_bound: Optional[float] = None

    def __post_init__(self):
        a, b = self.domain
        if not (b > a):
            raise ConfigError("domain must satisfy a < b")
        if self.eps <= 0 or self.T < 0:
            raise ConfigError("need eps > 0 and T >= 0")
        if self.boundary not in ("constant", "periodic"):
            raise ConfigError(f"unknown boundary treatment {self.boundary!r}")


# ---------------------------------------------------------------------------
# shared plumbing

def _make_grid(cfg, dx):
    a, b = cfg.domain
    ncells = int(round((b - a) / dx))
    if ncells < 4:
        raise ConfigError("domain too small for the requested resolution")
    if abs(ncells * dx - (b - a)) > 1e-9 * (b - a):
        dx = (b - a) / ncells
    return a, (b - a) / ncells, ncells


def initial_cells(model, data, x0, dx, ncells):
    """Initial cell states: exact averages for piecewise-constant data,
    midpoint samples for callables, pass-through for arrays."""
    if isinstance(data, PiecewiseConstantFn):
        vals = data.cell_averages(x0, dx, ncells)
        if vals.shape[1] != model.n:
            raise ConfigError("data dimension does not match the model")
        return vals
    if callable(data):
        centers = x0 + dx * (np.arange(ncells) + 0.5)
        return np.stack([as_state(data(x), model.n) for x in centers])
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (ncells, model.n):
        raise ConfigError(f"data shape {arr.shape} does not match grid "
                          f"({ncells} cells, n={model.n})")
    return arr.copy()


def _data_states(u0, cap=96):
    """Deterministic subsample of distinct initial states for speed checks."""
    rows = np.unique(u0.round(12), axis=0)
    if rows.shape[0] > cap:
        idx = np.linspace(0, rows.shape[0] - 1, cap).astype(int)
        rows = rows[idx]
    return rows


def _check_speed_range(model, u0, lo, hi, tol=1e-9):
    for u in _data_states(u0):
        lam = eigenvalues(model, u)
        if np.any(lam < lo - tol) or np.any(lam > hi + tol):
            raise SpeedRangeViolation(
                f"speeds {lam} outside [{lo}, {hi}] at u={u}; "
                f"normalize the model first")


def _max_speed(model, u0, override=None, pad=1.0):
    if override is not None:
        return float(override)
    worst = 0.0
    for u in _data_states(u0):
        worst = max(worst, float(np.max(np.abs(eigenvalues(model, u)))))
    return pad * worst if worst > 0 else 1.0


def _pad(u, boundary):
    if boundary == "periodic":
        return np.concatenate([u[-1:], u, u[:1]], axis=0)
    return np.concatenate([u[:1], u, u[-1:]], axis=0)


def _record_steps(nsteps, dt, cfg):
    if cfg.store_all:
        return list(range(nsteps + 1))
    idxs = {0, nsteps}
    if cfg.snapshot_times is not None:
        for t in cfg.snapshot_times:
            idxs.add(min(max(int(round(t / dt)), 0), nsteps))
    return sorted(idxs)


def _check_finite(u):
    if not np.all(np.isfinite(u)):
        raise NonfiniteState("non-finite cell state (blow-up?)")


def _collect(model, cfg, x0, dx, dt, u0, stepper, nsteps, meta):
    record = _record_steps(nsteps, dt, cfg)
    times, rows = [], []
    u = u0
    rec = set(record)
    if 0 in rec:
        times.append(0.0)
        rows.append(u.copy())
    for j in range(1, nsteps + 1):
        u = stepper(u, j)
        if j % 64 == 0:
            _check_finite(u)
        if j in rec:
            _check_finite(u)
            times.append(j * dt)
            rows.append(u.copy())
    return GridSolution(x0, dx, np.array(times), np.stack(rows), meta=meta)


# ---------------------------------------------------------------------------
# Godunov and Glimm

def godunov_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Upwind scheme u_{j+1,k} = u_{j,k} + f(u_{j,k-1}) - f(u_{j,k}) on a
    unit-CFL grid dt = dx = eps.  Requires speeds in [0, 1]."""
    x0, dx, ncells = _make_grid(cfg, cfg.eps)
    dt = dx
    u0 = initial_cells(model, data, x0, dx, ncells)
    _check_speed_range(model, u0, 0.0, 1.0)
    nsteps = int(round(cfg.T / dt))

    def step(u, j):
        up = _pad(u, cfg.boundary)
        fl = model.f(up[:-2])
        fc = model.f(up[1:-1])
        return u + (fl - fc)

    meta = {"scheme": "godunov", "eps": cfg.eps, "dx": dx, "dt": dt,
            "cfl": {"rule": "dt = dx, speeds in [0,1]"},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


def reversed_digit_theta(j: int) -> float:
    """Decimal digits of j in inverse order, placed after the radix point."""
    if j < 1:
        raise ValueError("index must be a positive integer")
    s = str(int(j))
    return int(s[::-1]) / 10 ** len(s)


def theta_sequence(name: str, nsteps: int) -> np.ndarray:
    if name == "reversed-digit":
        return np.array([reversed_digit_theta(j) for j in range(1, nsteps + 1)])
    if name.startswith("constant:"):
        c = float(name.split(":", 1)[1])
        return np.full(nsteps, c)
    if name == "midpoint":
        return (np.arange(1, nsteps + 1) - 0.5) / nsteps
    raise ConfigError(f"unknown sampling sequence {name!r}")


def uniformity_defect(thetas, lambdas) -> float:
    """max over probes of |#{theta_j <= lam}/N - lam|."""
    thetas = np.sort(np.asarray(thetas, dtype=float))
    N = thetas.size
    if N == 0:
        raise ValueError("empty sequence")
    lams = np.atleast_1d(np.asarray(lambdas, dtype=float))
    counts = np.searchsorted(thetas, lams, side="right")
    return float(np.max(np.abs(counts / N - lams)))


def glimm_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Riemann fans on the unit-CFL grid restarted by sampling at
    x = (k + theta_j) dx.  The restart values are the new cell states."""
    x0, dx, ncells = _make_grid(cfg, cfg.eps)
    dt = dx
    u0 = initial_cells(model, data, x0, dx, ncells)
    if isinstance(data, PiecewiseConstantFn):
        # sampling restarts want cell values, not averages: snap each cell
        # to the data value at its center (exact for data aligned with grid)
        centers = x0 + dx * (np.arange(ncells) + 0.5)
        u0 = data(centers)
    _check_speed_range(model, u0, 0.0, 1.0)
    nsteps = int(round(cfg.T / dt))
    thetas = theta_sequence(cfg.sequence, nsteps)
    solver = riemann_solver_for(model)
    fan_cache = {}

    def step(u, j):
        theta = thetas[j - 1]
        up = _pad(u, cfg.boundary)
        jumpy = np.nonzero(np.any(up[:-2] != up[1:-1], axis=1))[0]
        out = u.copy()
        for k in jumpy:
            ul, ur = up[k], up[k + 1]
            key = (ul.tobytes(), ur.tobytes())
            fan = fan_cache.get(key)
            if fan is None:
                fan = solver(ul, ur)
                fan_cache[key] = fan
            out[k] = evaluate_fan(fan, theta)
        return out

    meta = {"scheme": "glimm", "eps": cfg.eps, "dx": dx, "dt": dt,
            "sequence": cfg.sequence, "theta": thetas,
            "cfl": {"rule": "dt = dx, speeds in [0,1]"},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


# ---------------------------------------------------------------------------
# method of lines

def method_of_lines_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """dU_k/dt = (f(U_{k-1}) - f(U_k))/eps integrated with classical RK4,
    time step at most eps/2.  Requires speeds in [0, 1] (upwind left)."""
    x0, dx, ncells = _make_grid(cfg, cfg.eps)
    u0 = initial_cells(model, data, x0, dx, ncells)
    _check_speed_range(model, u0, 0.0, 1.0)
    dt_max = 0.5 * dx
    if cfg.dt is not None:
        if cfg.dt > dt_max * (1 + 1e-12):
            raise CFLViolation(f"dt={cfg.dt} exceeds eps/2={dt_max}")
        dt_max = cfg.dt
    nsteps = max(1, int(math.ceil(cfg.T / dt_max - 1e-12)))
    dt = cfg.T / nsteps if cfg.T > 0 else dt_max

    def rhs(u):
        up = _pad(u, cfg.boundary)
        return (model.f(up[:-2]) - model.f(up[1:-1])) / dx

    def step(u, j):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        return u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    meta = {"scheme": "method-of-lines", "eps": cfg.eps, "dx": dx, "dt": dt,
            "cfl": {"rule": "dt <= eps/2", "dt_max": 0.5 * dx},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


# ---------------------------------------------------------------------------
# parabolic runs (viscous / nonlinear diffusion)

def _b_selector(model, spec):
    """Diffusion-matrix selector: None/'identity', 'zero', 'diag:...', or a
    callable u -> (n, n) matrix."""
    if spec is None or spec == "identity":
        return None  # identity fast path
    if spec == "zero":
        return lambda u: np.zeros((model.n, model.n))
    if isinstance(spec, str) and spec.startswith("diag:"):
        d = np.array([float(v) for v in spec.split(":", 1)[1].split(",")])
        if d.size != model.n:
            raise ConfigError("diag entries must match the model dimension")
        D = np.diag(d)
        return lambda u: D
    if callable(spec):
        return spec
    raise ConfigError(f"bad diffusion selector {spec!r}")


def _parabolic_run(model, data, cfg, b_spec, scheme_name):
    eps = cfg.eps
    dx = cfg.dx if cfg.dx is not None else eps / 4.0
    x0, dx, ncells = _make_grid(cfg, dx)
    u0 = initial_cells(model, data, x0, dx, ncells)
    M = _max_speed(model, u0, cfg.speed_bound, pad=1.05)
    B_fn = _b_selector(model, b_spec)

    if B_fn is None:
        lam_b_min, max_b = 1.0, 1.0
    else:
        mats = [np.asarray(B_fn(u), dtype=float) for u in _data_states(u0)]
        lam_b_min = min(float(np.min(np.linalg.eigvalsh(0.5 * (m + m.T))))
                        for m in mats)
        max_b = max(float(np.linalg.norm(m, 2)) for m in mats)
        if lam_b_min < -1e-12:
            raise ConfigError("diffusion matrix must be positive semidefinite")
        lam_b_min = max(lam_b_min, 0.0)

    # the hyperbolic flux needs Lax-Friedrichs stabilization only when the
    # parabolic term does not resolve the layer (cell Peclet above 2)
    resolved = M * dx <= 2.0 * eps * lam_b_min
    alpha = 0.0 if resolved else M

    dt_hyp = dx / (2.0 * M)
    dt_par = dx * dx / (4.0 * eps * max_b) if eps * max_b > 0 else np.inf
    dt_max = min(dt_hyp, dt_par)
    if cfg.dt is not None:
        if cfg.dt > dt_max * (1 + 1e-12):
            raise CFLViolation(
                f"dt={cfg.dt} exceeds min(dx/(2M), dx^2/(4 eps |B|)) = {dt_max:.3e}")
        dt_max = cfg.dt
    nsteps = max(1, int(math.ceil(cfg.T / dt_max - 1e-12)))
    dt = cfg.T / nsteps if cfg.T > 0 else dt_max

    identity = B_fn is None

    def step(u, j):
        up = _pad(u, cfg.boundary)
        fm = model.f(up)
        du = up[1:] - up[:-1]                      # (ncells+1, n) face jumps
        F = 0.5 * (fm[:-1] + fm[1:])
        if alpha:
            F = F - 0.5 * alpha * du
        if identity:
            D = du / dx
        else:
            Bmats = np.stack([np.asarray(B_fn(s), dtype=float) for s in up])
            Bface = 0.5 * (Bmats[:-1] + Bmats[1:])
            D = np.einsum("kij,kj->ki", Bface, du) / dx
        return u - (dt / dx) * (F[1:] - F[:-1]) + (eps * dt / dx) * (D[1:] - D[:-1])

    meta = {"scheme": scheme_name, "eps": eps, "dx": dx, "dt": dt,
            "cfl": {"rule": "dt <= min(dx/(2M), dx^2/(4 eps |B|))",
                    "M": M, "dt_max": float(dt_max), "lf_alpha": alpha},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


def viscous_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Explicit scheme for u_t + f(u)_x = eps u_xx: central second difference
    for the diffusion, conservative flux differencing for f(u)_x (with
    Lax-Friedrichs stabilization whenever the mesh does not resolve the
    viscous layer).  Requires dx <= eps/4."""
    dx = cfg.dx if cfg.dx is not None else cfg.eps / 4.0
    if dx > cfg.eps / 4.0 * (1 + 1e-12):
        raise CFLViolation(f"dx={dx} must satisfy dx <= eps/4 = {cfg.eps / 4}")
    return _parabolic_run(model, data, replace(cfg, dx=dx), None, "viscous")


def nonlinear_diffusion_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Explicit scheme for u_t + f(u)_x = eps (B(u) u_x)_x with face-averaged
    B; B = identity reproduces viscous_run bit for bit, B = 0 is the pure
    Lax-Friedrichs hyperbolic run."""
    return _parabolic_run(model, data, cfg, cfg.b_matrix, "nonlinear-diffusion")


# ---------------------------------------------------------------------------
# Jin-Xin relaxation

def jin_xin_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Relaxation system u_t + v_x = 0, v_t + a^2 u_x = (f(u) - v)/eps,
    upwinded along the characteristic variables v -+ a u, with the stiff
    source handled implicitly (exact since it is linear in v)."""
    eps = cfg.eps
    dx = cfg.dx if cfg.dx is not None else eps / 2.0
    x0, dx, ncells = _make_grid(cfg, dx)
    u0 = initial_cells(model, data, x0, dx, ncells)
    M = _max_speed(model, u0, cfg.speed_bound, pad=1.0)
    a2 = cfg.a2 if cfg.a2 is not None else max(1.0, (1.1 * M) ** 2)
    if a2 < M ** 2 * (1 - 1e-12):
        raise SubcharacteristicViolation(
            f"a^2 = {a2} below max f'(u)^2 = {M ** 2} on the data hull")
    a = math.sqrt(a2)
    dt_max = 0.9 * dx / a
    if cfg.dt is not None:
        if cfg.dt > dx / a * (1 + 1e-12):
            raise CFLViolation(f"dt={cfg.dt} exceeds dx/a={dx / a}")
        dt_max = cfg.dt
    nsteps = max(1, int(math.ceil(cfg.T / dt_max - 1e-12)))
    dt = cfg.T / nsteps if cfg.T > 0 else dt_max
    c = a * dt / dx

    v0 = model.f(u0)
    state = {"v": v0}

    def step(u, j):
        v = state["v"]
        wp = v + a * u
        wm = v - a * u
        wpp = _pad(wp, cfg.boundary)
        wmp = _pad(wm, cfg.boundary)
        wp_new = wp - c * (wpp[1:-1] - wpp[:-2])
        wm_new = wm + c * (wmp[2:] - wmp[1:-1])
        u_new = (wp_new - wm_new) / (2 * a)
        v_star = 0.5 * (wp_new + wm_new)
        r = dt / eps
        state["v"] = (v_star + r * model.f(u_new)) / (1.0 + r)
        return u_new

    meta = {"scheme": "jin-xin", "eps": eps, "dx": dx, "dt": dt, "a2": a2,
            "cfl": {"rule": "dt <= dx/a", "dt_max": dx / a},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


# ---------------------------------------------------------------------------
# backward Euler

def backward_euler_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Implicit step w = v - (eps/dx)(f(w_k) - f(w_{k-1})) solved by marching
    left to right with a per-cell Newton iteration.  Requires speeds in
    [1, 2] so the implicit system is well posed and upwinding is one-sided."""
    eps = cfg.eps  # time step
    dx = cfg.dx if cfg.dx is not None else eps / 4.0
    x0, dx, ncells = _make_grid(cfg, dx)
    u0 = initial_cells(model, data, x0, dx, ncells)
    _check_speed_range(model, u0, 1.0, 2.0)
    nsteps = int(round(cfg.T / eps))
    if abs(nsteps * eps - cfg.T) > 1e-9 * max(cfg.T, 1.0):
        nsteps = max(1, int(math.ceil(cfg.T / eps - 1e-12)))
    dt = cfg.T / nsteps if cfg.T > 0 else eps
    c = dt / dx
    eye = np.eye(model.n)

    def step(v, j):
        w = np.empty_like(v)
        fw_prev = model.f(v[0])  # constant extension: far-left state steady
        for k in range(v.shape[0]):
            target = v[k] + c * fw_prev
            wk = v[k].copy()
            ok = False
            for _ in range(40):
                F = wk + c * model.f(wk) - target
                if np.linalg.norm(F) <= 1e-13 * (1.0 + np.linalg.norm(target)):
                    ok = True
                    break
                J = eye + c * model.jac(wk)
                try:
                    wk = wk - np.linalg.solve(J, F)
                except np.linalg.LinAlgError as exc:
                    raise NewtonFailure(f"singular implicit system in cell {k}") from exc
            if not ok:
                raise NewtonFailure(f"implicit solve stalled in cell {k}")
            w[k] = wk
            fw_prev = model.f(wk)
        return w

    meta = {"scheme": "backward-euler", "eps": eps, "dx": dx, "dt": dt,
            "cfl": {"rule": "unconditionally stable; speeds in [1,2]"},
            "boundary": cfg.boundary}
    return _collect(model, cfg, x0, dx, dt, u0, step, nsteps, meta)


# ---------------------------------------------------------------------------
# periodic mollification (scalar)

def mollifier_kernel(name, width, dx):
    """Discrete unit-mass mollifier on the grid; C^2 bump profiles."""
    r = max(1, int(round(width / dx)))
    y = np.arange(-r, r + 1) * (dx / width)
    y = np.clip(y, -1.0, 1.0)
    if name == "poly":
        w = (1.0 - y * y) ** 3
    elif name == "cos3":
        w = np.cos(0.5 * np.pi * y) ** 3
    else:
        raise ConfigError(f"unknown mollifier kernel {name!r}")
    w[np.abs(y) >= 1.0] = 0.0
    s = w.sum()
    if s <= 0:
        raise ConfigError("mollifier width below grid resolution")
    return w / s


def _pl_cell_averages(y, u, edges):
    """Exact cell averages of the piecewise-linear interpolant through
    (y_i, u_i), extended by its end values outside [y_0, y_-1]."""
    yy = np.concatenate([[min(edges[0], y[0]) - 1.0], y,
                         [max(edges[-1], y[-1]) + 1.0]])
    uu = np.concatenate([u[:1], u, u[-1:]])
    # antiderivative at the nodes
    F_nodes = np.concatenate([[0.0], np.cumsum(0.5 * (uu[1:] + uu[:-1]) * np.diff(yy))])
    k = np.clip(np.searchsorted(yy, edges, side="right") - 1, 0, yy.size - 2)
    t = (edges - yy[k]) / (yy[k + 1] - yy[k])
    u_at = uu[k] * (1 - t) + uu[k + 1] * t
    F = F_nodes[k] + 0.5 * (uu[k] + u_at) * (edges - yy[k])
    return np.diff(F) / np.diff(edges)


def blowup_time(model, x, u):
    """1 / max(0, -min d/dx f'(u(x))) for scalar profiles (inf if no decay)."""
    h = 1e-7 * (1.0 + np.abs(u))
    fp = (model.f((u + h)[:, None])[:, 0] - model.f((u - h)[:, None])[:, 0]) / (2 * h)
    slope = np.gradient(fp, x)
    mn = float(np.min(slope))
    if mn >= 0:
        return np.inf
    return 1.0 / (-mn)


def mollification_run(model: FluxModel, data, cfg: SchemeConfig) -> GridSolution:
    """Scalar only: exact characteristic transport on each restart interval
    followed by convolution with a C^2 mollifier of width mollifier_width.

    Raises BlowupBeforeRestart when the restart interval eps is not shorter
    than the classical blow-up time of the current profile."""
    if model.n != 1:
        raise ConfigError("mollification_run is scalar-only")
    dx = cfg.dx if cfg.dx is not None else (cfg.domain[1] - cfg.domain[0]) / 2048
    x0, dx, ncells = _make_grid(cfg, dx)
    centers = x0 + dx * (np.arange(ncells) + 0.5)
    edges = x0 + dx * np.arange(ncells + 1)
    u = initial_cells(model, data, x0, dx, ncells)[:, 0]
    width = cfg.mollifier_width if cfg.mollifier_width is not None else 4 * dx
    kern = mollifier_kernel(cfg.mollifier_kernel, width, dx)
    r = (kern.size - 1) // 2

    times = [0.0]
    rows = [u.copy()[:, None]]
    t = 0.0
    while t < cfg.T - 1e-12:
        tau = min(cfg.eps, cfg.T - t)
        t_blow = blowup_time(model, centers, u)
        if tau >= t_blow:
            raise BlowupBeforeRestart(
                f"restart interval {tau:g} reaches the classical blow-up time "
                f"{t_blow:g}", t_blowup=t_blow)
        h = 1e-7 * (1.0 + np.abs(u))
        fp = (model.f((u + h)[:, None])[:, 0] - model.f((u - h)[:, None])[:, 0]) / (2 * h)
        y = centers + fp * tau
        if np.any(np.diff(y) <= 0):
            raise BlowupBeforeRestart(
                f"characteristics cross within the restart interval {tau:g}",
                t_blowup=t_blow)
        u = _pl_cell_averages(y, u, edges)
        padded = np.concatenate([np.full(r, u[0]), u, np.full(r, u[-1])])
        u = np.convolve(padded, kern, mode="valid")
        t += tau
        times.append(t)
        rows.append(u.copy()[:, None])
        _check_finite(u)

    meta = {"scheme": "mollification", "eps": cfg.eps, "dx": dx,
            "kernel": cfg.mollifier_kernel, "width": width,
            "cfl": {"rule": "eps < blow-up time of the current profile"},
            "boundary": cfg.boundary}
    return GridSolution(x0, dx, np.array(times), np.stack(rows), meta=meta)


# ---------------------------------------------------------------------------
# dispatch

SCHEMES = {
    "godunov": godunov_run,
    "glimm": glimm_run,
    "method-of-lines": method_of_lines_run,
    "viscous": viscous_run,
    "jin-xin": jin_xin_run,
    "backward-euler": backward_euler_run,
    "mollification": mollification_run,
    "nonlinear-diffusion": nonlinear_diffusion_run,
}


def run_scheme(model, data, scheme, cfg):
    """Dispatch by scheme id; front tracking lives in hyperlab.fronts."""
    if scheme == "front-tracking":
        from .fronts import front_tracking_run
        return front_tracking_run(model, data, cfg)
    try:
        fn = SCHEMES[scheme]
    except KeyError:
        raise ConfigError(f"unknown scheme {scheme!r}") from None
    return fn(model, data, cfg)
