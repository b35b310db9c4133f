"""Numeric cross-check of a relation on a grid.

Both sides are evaluated by nested application (A^j as j applications of
A), independently of the closed forms the symbolic deciders use. Grid
points near any breakpoint are dropped, so a difference confined to a
null set does not show up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from core.criteria import Status, Verdict
from core.errors import WindowTooSmall
from core.funcalg import Polynomial
from core.logger import log_debug, log_info
from core.operators import (
    AB_BFA,
    Identity,
    LinearCombination,
    Mult,
    PiecewiseMult,
    PointEval,
    Product,
    TranslateDilate,
    WeightedComposition,
    apply,
)

NORMS = (1, 2, 'inf')
BOUNDARY_TOL = 1e-12
MAX_BREAKPOINTS = 20000


@dataclass(frozen=True)
class BatteryFunction:
    name: str
    func: Callable

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class OracleConfig:
    window: Tuple[float, float]
    grid_n: int = 4096
    p: Union[int, str] = 'inf'
    tau_pass: float = 1e-9
    tau_fail: float = 1e-6
    seed: int = 0
    exclusion: float = 0.5
    bump_cells: int = 8
    battery: Tuple[BatteryFunction, ...] = ()

    def __post_init__(self):
        p = 'inf' if str(self.p).lower() in ('inf', 'infinity') else int(self.p)
        object.__setattr__(self, 'p', p)
        lo, hi = (float(v) for v in self.window)
        object.__setattr__(self, 'window', (lo, hi))
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"Window must be a bounded interval, got {self.window}")
        if self.grid_n < 1:
            raise ValueError("grid_n must be positive")
        if p not in NORMS:
            raise ValueError(f"Norm must be one of 1, 2, inf, got {self.p}")
        if not 0 < self.tau_pass < self.tau_fail:
            raise ValueError("Thresholds must satisfy 0 < tau_pass < tau_fail")

    @classmethod
    def from_settings(cls, settings: dict, window: Tuple[float, float]) -> 'OracleConfig':
        """Build from a merged settings dictionary (see utils.config)."""
        return cls(
            window=window,
            grid_n=int(settings.get('grid_n', 4096)),
            p=settings.get('norm', 'inf'),
            tau_pass=float(settings.get('tau_pass', 1e-9)),
            tau_fail=float(settings.get('tau_fail', 1e-6)),
            seed=int(settings.get('seed', 0)),
            exclusion=float(settings.get('exclusion', 0.5)),
            bump_cells=int(settings.get('bump_cells', 8)),
        )

    @property
    def step(self) -> float:
        return (self.window[1] - self.window[0]) / self.grid_n


class Consistency(str, Enum):
    CONSISTENT = 'CONSISTENT'
    AMBIGUOUS = 'AMBIGUOUS'
    INCONSISTENT = 'INCONSISTENT'


@dataclass(frozen=True)
class ConsistencyReport:
    status: Consistency
    verdict: Status
    residual: float
    message: str = ''

    def to_dict(self) -> dict:
        return {'status': self.status.value, 'verdict': self.verdict.value,
                'residual': self.residual, 'message': self.message}


@dataclass(frozen=True)
class ResidualRow:
    function: str
    residual: float
    difference_norm: float
    rhs_norm: float


def _ramp(t, cutoff: float, threshold: float):
    """0 below cutoff, 1 above threshold, cubic with flat ends in between."""
    u = np.clip((t - cutoff) / (threshold - cutoff), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def smooth_bump(lo: float, hi: float) -> Callable:
    """Plateau bump supported on [lo, hi], equal to 1 on its middle half."""
    quarter = (hi - lo) / 4.0

    def bump(t):
        t = np.asarray(t, dtype=float)
        return _ramp(t, lo, lo + quarter) * (1.0 - _ramp(t, hi - quarter, hi))
    return bump


def random_piecewise_linear(rng: np.random.Generator, lo: float, hi: float,
                            knots: int = 17) -> Callable:
    xs = np.linspace(lo, hi, knots)
    ys = rng.uniform(-1.0, 1.0, size=knots)
    return lambda t: np.interp(np.asarray(t, dtype=float), xs, ys)


def build_battery(cfg: OracleConfig, breakpoints: Sequence[float] = ()) -> Tuple[BatteryFunction, ...]:
    """Monomials, sin(pi t), one bump per partition cell and two random
    piecewise-linear functions. Reproducible from cfg.seed.
    """
    if cfg.battery:
        return cfg.battery
    lo, hi = cfg.window
    battery = [
        BatteryFunction('1', lambda t: np.ones_like(t)),
        BatteryFunction('t', lambda t: t),
        BatteryFunction('t^2', lambda t: t ** 2),
        BatteryFunction('t^3', lambda t: t ** 3),
        BatteryFunction('sin(pi t)', lambda t: np.sin(np.pi * t)),
    ]
    edges = [lo] + [b for b in sorted(set(breakpoints)) if lo < b < hi] + [hi]
    cells = [(c0, c1) for c0, c1 in zip(edges, edges[1:]) if c1 - c0 > 4 * cfg.step]
    for c0, c1 in cells[:cfg.bump_cells]:
        battery.append(BatteryFunction(f"bump[{c0:g},{c1:g}]", smooth_bump(c0, c1)))
    rng = np.random.default_rng(cfg.seed)
    width = hi - lo
    for k in range(2):
        battery.append(BatteryFunction(f"random-pl#{k}",
                                    random_piecewise_linear(rng, lo - width, hi + width)))
    return tuple(battery)


def _operator_breakpoints(op) -> List[float]:
    points = []
    if isinstance(op, PiecewiseMult):
        points.extend(op.weight.breakpoints())
        for part in op.parts:
            points.extend(part.breakpoints())
    elif isinstance(op, TranslateDilate):
        for part in op.parts:
            points.extend(part.breakpoints())
    elif isinstance(op, (Mult, WeightedComposition, PointEval)):
        points.extend(op.weight.breakpoints())
    if isinstance(op, PointEval):
        points.append(op.gamma)
    return points


def _operator_map(op):
    if isinstance(op, (WeightedComposition, TranslateDilate)):
        return op.map
    return None


def relation_breakpoints(A, B, F: Polynomial, cfg: OracleConfig) -> Tuple[float, ...]:
    """Partition endpoints, piece boundaries and gamma, pulled back through
    words in the operators' maps up to the depth the relation reaches.
    """
    lo, hi = cfg.window
    margin = hi - lo
    base = set(_operator_breakpoints(A)) | set(_operator_breakpoints(B))
    maps = [m for m in (_operator_map(A), _operator_map(B)) if m is not None and m.slope != 0]
    points = set(base)
    frontier = set(base)
    for _ in range(max(F.degree, 0) + 2):
        if not maps or len(points) > MAX_BREAKPOINTS:
            break
        pulled = set()
        for s in frontier:
            for m in maps:
                t = (s - m.intercept) / m.slope
                if lo - margin <= t <= hi + margin:
                    pulled.add(t)
        frontier = pulled - points
        points |= pulled
    return tuple(sorted(p for p in points if lo - BOUNDARY_TOL <= p <= hi + BOUNDARY_TOL))


def build_grid(cfg: OracleConfig, breakpoints: Sequence[float]) -> np.ndarray:
    """Midpoint grid with a neighbourhood of every breakpoint removed."""
    lo, _ = cfg.window
    h = cfg.step
    grid = lo + (np.arange(cfg.grid_n) + 0.5) * h
    if len(breakpoints):
        bp = np.asarray(sorted(breakpoints), dtype=float)
        idx = np.searchsorted(bp, grid)
        left = bp[np.clip(idx - 1, 0, len(bp) - 1)]
        right = bp[np.clip(idx, 0, len(bp) - 1)]
        nearest = np.minimum(np.abs(grid - left), np.abs(grid - right))
        grid = grid[nearest > cfg.exclusion * h]
    return grid


def check_window(A, B, cfg: OracleConfig):
    """Operators on C[lo, hi] must not read outside the window.

    Raises:
        WindowTooSmall: gamma outside the window, or a composition map
            that does not send the window into itself
    """
    lo, hi = cfg.window
    for name, op in (('A', A), ('B', B)):
        if isinstance(op, PointEval) and not lo - BOUNDARY_TOL <= op.gamma <= hi + BOUNDARY_TOL:
            raise WindowTooSmall(f"{name}: gamma = {op.gamma:g} lies outside [{lo:g}, {hi:g}]")
        if isinstance(op, WeightedComposition):
            ends = (float(op.map(lo)), float(op.map(hi)))
            if min(ends) < lo - BOUNDARY_TOL or max(ends) > hi + BOUNDARY_TOL:
                raise WindowTooSmall(
                    f"{name}: map t -> {op.map} sends [{lo:g}, {hi:g}] to "
                    f"[{min(ends):g}, {max(ends):g}]")


def nested_sides(A, B, F: Polynomial, form: str = AB_BFA):
    """Both sides with A^j spelled out as j nested applications of A."""
    terms = []
    for j, delta in enumerate(F.coeffs):
        if delta == 0:
            continue
        Aj = Identity() if j == 0 else A
        for _ in range(j - 1):
            Aj = Product(A, Aj)
        terms.append((delta, Product(B, Aj) if form == AB_BFA else Product(Aj, B)))
    lhs = Product(A, B) if form == AB_BFA else Product(B, A)
    return lhs, LinearCombination(tuple(terms))


def _norm(values: np.ndarray, p, h: float) -> float:
    if values.size == 0:
        return 0.0
    if p == 'inf':
        return float(np.max(np.abs(values)))
    if p == 1:
        return float(np.sum(np.abs(values)) * h)
    return float(math.sqrt(np.sum(values ** 2) * h))


def residual_table(A, B, F: Polynomial, form: str, cfg: OracleConfig) -> Tuple[ResidualRow, ...]:
    """Normalized residual ||lhs x - rhs x|| / (1 + ||rhs x||) per test function."""
    check_window(A, B, cfg)
    breakpoints = relation_breakpoints(A, B, F, cfg)
    grid = build_grid(cfg, breakpoints)
    lhs, rhs = nested_sides(A, B, F, form)
    rows = []
    for x in build_battery(cfg, breakpoints):
        left = apply(lhs, x, grid)
        right = apply(rhs, x, grid)
        diff_norm = _norm(left - right, cfg.p, cfg.step)
        rhs_norm = _norm(right, cfg.p, cfg.step)
        rows.append(ResidualRow(x.name, diff_norm / (1.0 + rhs_norm), diff_norm, rhs_norm))
    log_debug(f"Oracle grid: {grid.size} of {cfg.grid_n} points kept, "
              f"{len(breakpoints)} breakpoints, {len(rows)} test functions")
    return tuple(rows)


def residual(A, B, F: Polynomial, form: str, cfg: OracleConfig) -> float:
    """Largest normalized residual over the battery."""
    value = max(row.residual for row in residual_table(A, B, F, form, cfg))
    log_info(f"Oracle residual for {form}: {value:.3e}")
    return value


def crosscheck(v: Verdict, r: float, cfg: OracleConfig) -> ConsistencyReport:
    if v.status in (Status.UNKNOWN, Status.CONDITIONAL):
        return ConsistencyReport(Consistency.CONSISTENT, v.status, r,
                                 'no symbolic claim to compare')
    if cfg.tau_pass < r < cfg.tau_fail:
        return ConsistencyReport(Consistency.AMBIGUOUS, v.status, r,
                                 f"residual {r:.3e} between {cfg.tau_pass:g} and {cfg.tau_fail:g}")
    agrees = r <= cfg.tau_pass if v.status is Status.HOLDS else r >= cfg.tau_fail
    if agrees:
        return ConsistencyReport(Consistency.CONSISTENT, v.status, r)
    return ConsistencyReport(Consistency.INCONSISTENT, v.status, r,
                             f"{v.status.value} but residual is {r:.3e}")
