"""Simulators for the stochastic test systems and trajectory plumbing.

RNG convention (fixed for reproducibility): every simulator derives its noise
from ``numpy.random.Philox`` (counter-based, 64-bit) keyed by the integer
seed, with standard normals produced by the Box-Muller transform on uniform
pairs, interleaved as ``(r cos, r sin)``. Trajectories are pure functions of
``(spec, seed)``.

The stepping inner loops run in the compiled extension ``_sde`` when it is
available and in ``_sde_fallback`` otherwise; the two are bit-identical by
construction. Set ``KOOPSPEC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, TrajectoryBlowUp, TrajectoryParseError

if os.environ.get("KOOPSPEC_PURE_PYTHON", "") == "1":
    from . import _sde_fallback as _sde
else:
    try:
        from . import _sde  # type: ignore[attr-defined]
    except ImportError:
        from . import _sde_fallback as _sde

BLOWUP_BOUND = 10.0


def stepping_backend():
    """Name of the active stepping backend: ``"cython"`` or ``"python"``."""
    return _sde.BACKEND


@dataclass(frozen=True)
class Trajectory:
    """States of one simulated or loaded path, shape ``(T_steps, d)``."""

    states: np.ndarray
    dt: float
    seed: int | None = None

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states.reshape(-1, 1)
        if states.ndim != 2 or states.shape[0] < 2:
            raise ContractViolation("trajectory needs at least 2 states")
        if not np.isfinite(states).all():
            raise ContractViolation("trajectory contains non-finite states")
        object.__setattr__(self, "states", states)


@dataclass(frozen=True)
class TrajectoryDataset:
    """Paired consecutive snapshots ``(x_i, y_i)`` at a fixed lag."""

    X: np.ndarray
    Y: np.ndarray
    lag: int = 1

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if x.shape != y.shape:
            raise ContractViolation("X and Y must have identical shapes")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ContractViolation("dataset contains non-finite values")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class PotentialSpec:
    """1-d potential driving the overdamped Langevin equation."""

    kind: str  # 'quadratic' | 'triple_well'
    theta: float = 1.0  # quadratic curvature, U = theta x^2 / 2
    beta: float = 1.0  # inverse temperature

    def __post_init__(self):
        if self.kind not in ("quadratic", "triple_well"):
            raise ContractViolation(f"unknown potential {self.kind!r}")
        if not self.beta > 0:
            raise ContractViolation("inverse temperature beta must be positive")
        if self.kind == "quadratic" and not self.theta > 0:
            raise ContractViolation("quadratic theta must be positive")


def potential_value_grad(spec, x):
    """Potential value and exact analytic derivative at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if spec.kind == "quadratic":
        return spec.theta * x**2 / 2.0, spec.theta * x
    g1 = np.exp(-80.0 * x**2)
    g2 = np.exp(-80.0 * (x - 0.5) ** 2)
    g3 = np.exp(-40.0 * (x + 0.5) ** 2)
    u = 4.0 * (x**8 + 0.8 * g1 + 0.2 * g2 + 0.5 * g3)
    du = 4.0 * (
        8.0 * x**7 - 128.0 * x * g1 - 32.0 * (x - 0.5) * g2 - 40.0 * (x + 0.5) * g3
    )
    return u, du


def _standard_normals(seed, count):
    """Box-Muller normals from Philox uniforms, interleaved (r cos, r sin)."""
    if count == 0:
        return np.empty(0)
    rng = np.random.Generator(np.random.Philox(seed))
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # in (0, 1], keeps log finite
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(2.0 * np.pi * u2)
    out[1::2] = r * np.sin(2.0 * np.pi * u2)
    return out[:count]


def simulate_ou(n_steps, seed, burn_in=0):
    """Exact stationary sampling of the unit-lag Ornstein-Uhlenbeck chain.

    ``X_0 ~ N(0,1)``, then ``X_t = e^{-1} X_{t-1} + sqrt(1 - e^{-2}) eps_t``;
    ``burn_in`` additional steps are run and discarded before recording.
    """
    if n_steps < 2:
        raise ContractViolation("n_steps must be at least 2")
    if burn_in < 0:
        raise ContractViolation("burn_in must be nonnegative")
    normals = _standard_normals(seed, 1 + burn_in + n_steps - 1)
    out = np.empty(n_steps)
    _sde.ou_path(
        np.exp(-1.0),
        np.sqrt(1.0 - np.exp(-2.0)),
        normals[0],
        normals[1:],
        burn_in,
        out,
    )
    return Trajectory(states=out.reshape(-1, 1), dt=1.0, seed=seed)


def simulate_langevin(spec, dt, n_steps, substeps, seed, x0=0.0, burn_in=0):
    """Euler-Maruyama integration of ``dX = -U'(X) dt + sqrt(2/beta) dW``.

    The integration step is ``dt / substeps``; states are recorded every
    ``dt``, starting from the state reached after ``burn_in`` integration
    steps from ``x0``. Raises ``TrajectoryBlowUp`` if ``|x|`` exceeds 10
    (unreachable for stable steps under the x^8 confinement).
    """
    if not dt > 0:
        raise ContractViolation("dt must be positive")
    if substeps < 1:
        raise ContractViolation("substeps must be at least 1")
    if n_steps < 2:
        raise ContractViolation("n_steps must be at least 2")
    if burn_in < 0:
        raise ContractViolation("burn_in must be nonnegative")
    h = dt / substeps
    s = np.sqrt(2.0 * h / spec.beta)
    kind = 0 if spec.kind == "quadratic" else 1
    total = burn_in + (n_steps - 1) * substeps
    normals = _standard_normals(seed, total)
    out = np.empty(n_steps)
    status = _sde.langevin_path(
        kind, spec.theta, h, s, substeps, float(x0), normals, burn_in, out,
        BLOWUP_BOUND,
    )
    if status:
        raise TrajectoryBlowUp(
            f"|x| exceeded {BLOWUP_BOUND} at integration step {status}; "
            "reduce dt or increase substeps"
        )
    return Trajectory(states=out.reshape(-1, 1), dt=dt, seed=seed)


def trajectory_to_pairs(traj, lag):
    """Consecutive-state pairs: ``X = states[:-lag]``, ``Y = states[lag:]``."""
    if lag < 1:
        raise ContractViolation("lag must be at least 1")
    t_steps = traj.states.shape[0]
    if lag >= t_steps:
        raise ContractViolation(f"lag {lag} >= trajectory length {t_steps}")
    return TrajectoryDataset(
        X=traj.states[:-lag].copy(), Y=traj.states[lag:].copy(), lag=lag
    )


def write_trajectory_csv(traj, path):
    """Write ``t,x1,...,xd`` rows at full double precision."""
    states = traj.states
    d = states.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(f"x{i + 1}" for i in range(d)) + "\n")
        for row_i, row in enumerate(states):
            t = row_i * traj.dt
            fh.write(
                format(t, ".17g") + "," + ",".join(format(v, ".17g") for v in row)
                + "\n"
            )


def load_csv_trajectory(path, dt):
    """Parse a rectangular numeric CSV into a Trajectory.

    Accepts a header row (a leading ``t`` column, if named, is dropped) or a
    headerless all-states layout. Ragged rows and non-numeric cells raise
    ``TrajectoryParseError`` with the offending line number.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise TrajectoryParseError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise TrajectoryParseError(f"{path}: file is empty")

    def parse_row(line):
        return [tok.strip() for tok in line.split(",")]

    first = parse_row(lines[0])
    drop_time = False
    start = 0
    try:
        [float(tok) for tok in first]
    except ValueError:
        start = 1  # header row
        drop_time = first[0].lower() == "t"
        if len(lines) == 1:
            raise TrajectoryParseError(f"{path}: no data rows after header")
    width = None
    rows = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        toks = parse_row(line)
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise TrajectoryParseError(
                f"{path}: line {lineno} has {len(toks)} fields, expected {width}"
            )
        try:
            rows.append([float(tok) for tok in toks])
        except ValueError:
            raise TrajectoryParseError(f"{path}: non-numeric value on line {lineno}")
    states = np.asarray(rows)
    if drop_time:
        states = states[:, 1:]
    if states.shape[1] == 0:
        raise TrajectoryParseError(f"{path}: no state columns")
    return Trajectory(states=states, dt=dt, seed=None)
