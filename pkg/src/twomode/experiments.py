"""Sweep engine behind the command line: ground-state sweeps, scaling fits,
dynamics time series and fringe profiles, all returned as lists of rows."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dynamics as dyn
from .expansion import (
    ExpansionGeometry,
    default_grid,
    density,
    density_noise,
    mode_reference_density,
)
from .hamiltonian import TwoModeParams, ground_state, spectral_gap
from .observables import (
    phase_state_decomposition,
    squeezing_report,
    summarize_number_distribution,
    summarize_phase_distribution,
    uncertainty_report,
    predicted_rotated_resolution,
    phase_resolution,
    UndefinedResolutionError,
)


def parse_n_list(entries) -> list[int]:
    """Integers, or ``"pair:N"`` entries expanding to ``N, N+1``."""
    out: list[int] = []
    for e in entries:
        if isinstance(e, str) and e.startswith("pair:"):
            n = int(e.split(":", 1)[1])
            out += [n, n + 1]
        else:
            out.append(int(e))
    if not out or min(out) < 1:
        raise ValueError("n_list must contain integers >= 1")
    return out


def default_g_grid(points: int = 61, lo: float = 1e-2, hi: float = 1e6) -> np.ndarray:
    """Signed log grid: ``-hi .. -lo``, ``0``, ``lo .. hi`` with ``points`` per branch."""
    pos = np.logspace(math.log10(lo), math.log10(hi), points)
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass
class SweepSpec:
    n_list: list[int]
    g_param_grid: Sequence[float] = field(default_factory=lambda: list(default_g_grid()))
    delta_e: float = 1.0
    outputs: Optional[list[str]] = None  # observable columns to keep; None keeps all

    def __post_init__(self):
        self.n_list = parse_n_list(self.n_list)
        grid = np.asarray(self.g_param_grid, dtype=float)
        if grid.size == 0 or not np.all(np.isfinite(grid)):
            raise ValueError("g_param_grid must be non-empty and finite")
        if not self.delta_e > 0:
            raise ValueError("delta_e must be positive")
        self.g_param_grid = [float(x) for x in grid]


@dataclass
class ScalingSpec:
    n_range: list[int]
    branch: str = "attractive"
    fit_window: tuple[int, int] = (10, 200)
    optimize_g: bool = False

    def __post_init__(self):
        if self.branch not in ("attractive", "repulsive"):
            raise ValueError("branch must be 'attractive' or 'repulsive'")
        self.n_range = parse_n_list(self.n_range)
        lo, hi = self.fit_window
        if sum(lo <= n <= hi for n in self.n_range) < 2:
            raise ValueError("fit window needs at least two particle numbers")

    def g_param(self, n: int) -> float:
        return -1.0 if self.branch == "attractive" else n * n / 2.0


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def ground_point(n: int, g_param: float, delta_e: float = 1.0) -> dict:
    row = {"n": n, "g_param": g_param, "g": g_param * delta_e / (2.0 * n), "delta_e": delta_e}
    try:
        params = TwoModeParams.from_g_param(n, g_param, delta_e)
        # the row records degeneracy itself; warnings filters are not thread-safe
        gs = ground_state(params, warn=False)
        st = gs.state
        rep = squeezing_report(st)
        djy, djz, prod, bound = uncertainty_report(st)
        row.update(
            energy=gs.energy,
            degenerate=int(gs.degenerate),
            **summarize_number_distribution(st),
            **summarize_phase_distribution(phase_state_decomposition(st)),
            visibility=rep.visibility,
            jx_mean=rep.jx_mean,
            var_jy=rep.var_jy,
            var_jz=rep.var_jz,
            uncertainty_product=prod,
            uncertainty_bound=bound,
            dtheta2=rep.phase_variance,
            xi_y=rep.xi_y,
            rotated_dtheta2=rep.rotated_phase_variance,
            gap=spectral_gap(params),
            gap_same_parity=spectral_gap(params, same_parity=True),
            error="",
        )
    except (ArithmeticError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


PARAM_COLUMNS = ("n", "g_param", "g", "delta_e")


def ground_sweep(spec: SweepSpec, threads: int = 1) -> list[dict]:
    """One row per ``(N, G)``; failures are marked in the ``error`` column."""
    tasks = [(n, g) for n in spec.n_list for g in spec.g_param_grid]
    rows = _map(lambda task: ground_point(task[0], task[1], spec.delta_e), tasks, threads)
    if spec.outputs is None:
        return rows
    keep = set(PARAM_COLUMNS) | set(spec.outputs) | {"error"}
    return [{k: v for k, v in r.items() if k in keep} for r in rows]


def _optimal_repulsive_g(n: int) -> float:
    from scipy.optimize import minimize_scalar

    def cost(log_g):
        st = ground_state(TwoModeParams.from_g_param(n, 10.0**log_g), warn=False).state
        return predicted_rotated_resolution(st)

    res = minimize_scalar(cost, bounds=(0.0, math.log10(4.0 * n * n)), method="bounded",
                          options={"xatol": 1e-4})
    return 10.0**res.x


def scaling_point(n: int, spec: ScalingSpec) -> dict:
    g_param = _optimal_repulsive_g(n) if (spec.optimize_g and spec.branch == "repulsive") else spec.g_param(n)
    row = {"n": n, "branch": spec.branch, "g_param": g_param, "sql": 1.0 / n, "hl": 1.0 / n**2}
    try:
        st = ground_state(TwoModeParams.from_g_param(n, g_param), warn=False).state
        if spec.branch == "attractive":
            val = phase_resolution(st)
        else:
            val = predicted_rotated_resolution(st)
        row["dtheta2"] = val
        row["excluded"] = int(not val > 0)
        row["error"] = "" if val > 0 else "non-positive dtheta2"
    except UndefinedResolutionError as exc:
        row.update(dtheta2=float("nan"), excluded=1, error=str(exc))
    return row


def fit_power_law(ns, values) -> tuple[float, float]:
    """Least-squares slope of ``log(values)`` against ``log(ns)`` and the RMS residual."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def scaling_study(spec: ScalingSpec, threads: int = 1) -> tuple[list[dict], float, float]:
    rows = _map(lambda n: scaling_point(n, spec), spec.n_range, threads)
    lo, hi = spec.fit_window
    use = [r for r in rows if lo <= r["n"] <= hi and not r["excluded"]]
    if len(use) < 2:
        raise ArithmeticError("fewer than two usable points in the fit window")
    exponent, residual = fit_power_law([r["n"] for r in use], [r["dtheta2"] for r in use])
    for r in rows:
        r["in_fit"] = int(r in use)
    return rows, exponent, residual


# --- dynamics -------------------------------------------------------------------

@dataclass
class DynamicsConfig:
    n: int = 50
    branch: str = "attractive"
    d_min: float = 0.5
    g_param0: Optional[float] = None
    tau: float = 20.0
    target_g_param: Optional[float] = None
    tail: str = "continue"
    post_gamma: Optional[float] = None
    pulse_area: float = math.pi / 2.0
    pulse_start: Optional[float] = None
    pulse_duration: float = 1.0
    dt: Optional[float] = None
    stride: int = 100

    def __post_init__(self):
        if self.branch not in ("attractive", "repulsive"):
            raise ValueError("branch must be 'attractive' or 'repulsive'")
        if self.g_param0 is None:
            self.g_param0 = -0.1 if self.branch == "attractive" else 0.1
        if self.target_g_param is None:
            self.target_g_param = -1.0 if self.branch == "attractive" else self.n**2 / 2.0

    def protocol(self) -> dyn.SplitProtocol:
        g0 = self.g_param0 * math.exp(-self.d_min**2) / (2.0 * self.n)
        pulse = None
        if self.branch == "repulsive":
            start = self.tau if self.pulse_start is None else self.pulse_start
            pulse = dyn.Pulse(self.pulse_area, start, self.pulse_duration)
        return dyn.SplitProtocol.for_target(
            self.n, self.d_min, self.tau, g0, self.target_g_param,
            pulse=pulse, tail=self.tail, post_gamma=self.post_gamma,
        )


def run_dynamics(cfg: DynamicsConfig) -> dyn.Trajectory:
    runner = dyn.run_attractive_protocol if cfg.branch == "attractive" else dyn.run_repulsive_protocol
    return runner(cfg.n, cfg.protocol(), dt=cfg.dt, stride=cfg.stride)


def trajectory_rows(traj: dyn.Trajectory, cfg: DynamicsConfig) -> list[dict]:
    proto = cfg.protocol()
    base = {
        "n": cfg.n, "branch": cfg.branch, "d_min": cfg.d_min, "gamma": proto.gamma,
        "tau": cfg.tau, "g0": proto.g0, "target_g_param": cfg.target_g_param, "tail": cfg.tail,
    }
    rows = []
    for r in traj.records:
        rows.append({
            **base,
            "t": r.t, "g": r.g, "delta_e": r.delta_e, "g_param": r.g_param,
            "dtheta2": r.report.phase_variance, "xi_y": r.report.xi_y,
            "visibility": r.report.visibility, "var_jy": r.report.var_jy, "var_jz": r.report.var_jz,
            "ground_dtheta2": r.reference_phase_variance, "fidelity": r.fidelity, "norm": r.norm,
        })
    return rows


def dynamics_run(cfg: DynamicsConfig) -> list[dict]:
    """Time series for one protocol run.  An integration failure is
    re-raised with the partial rows attached as ``exc.rows``."""
    try:
        traj = run_dynamics(cfg)
    except dyn.IntegrationError as exc:
        exc.rows = trajectory_rows(exc.trajectory, cfg) if exc.trajectory else []
        raise
    return trajectory_rows(traj, cfg)


# --- expansion ------------------------------------------------------------------

@dataclass
class ExpansionConfig:
    n: int = 100
    g_param: float = 1.0
    delta_e: float = 1.0
    d: float = 8.0
    t: float = 10.0
    theta: float = 0.0
    points: int = 2048

    def geometry(self) -> ExpansionGeometry:
        return ExpansionGeometry(self.d, self.t, self.theta)


def expansion_render(cfg: ExpansionConfig) -> list[dict]:
    geom = cfg.geometry()
    st = ground_state(TwoModeParams.from_g_param(cfg.n, cfg.g_param, cfg.delta_e), warn=False).state
    y = default_grid(geom, cfg.points)
    mean = density(st, y, geom)
    noise = density_noise(st, y, geom)
    ref = mode_reference_density(y, geom, cfg.n)
    base = {"n": cfg.n, "g_param": cfg.g_param, "d": cfg.d, "t": cfg.t, "theta": cfg.theta}
    return [
        {**base, "y": float(y[i]), "density": float(mean[i]), "noise": float(noise[i]),
         "lower": float(mean[i] - noise[i]), "upper": float(mean[i] + noise[i]),
         "mode_density": float(ref[i])}
        for i in range(y.size)
    ]
