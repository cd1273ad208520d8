"""Closed-loop simulation of single- and double-integrator formations.

A run integrates either the actual coordinates z or the transformed
coordinates xi = Phi z with a fixed-step classical Runge-Kutta scheme; the
other view is refreshed from the integrated one after every step so each
logged sample carries both. Controllers implement

    single:  u = -D Phi^-1 (xi - xi_d) + xi_d'            (transformed)
             u = -Phi^-1 D (z - z_d)  + z_d'              (actual)
    double:  v = -D1 Phi^-1 xi_e - D2 Phi^-1 xi_e' + xi_d''   (and mirrored)

plus, when a potential is configured, the avoidance term -P z in the
actual coordinates or its similarity image -Phi P Phi^-1 xi in the
transformed ones. Desired references are defined in the transformed
coordinates (scaled shape plus a centroid path on the last component) and
mapped back through Phi^-1 where the actual-domain controller needs them.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoincidentAgents, NumericalBlowup, SingularBand
from .potential import PotentialParams, min_pair_distance, potential_matrix
from .transforms import TransformPair, _readonly

BLOWUP_LIMIT = 1e12

SINGLE = "single"
DOUBLE = "double"
ACTUAL = "actual"
TRANSFORMED = "transformed"


def hexagon_basis(a: float) -> np.ndarray:
    """Regular hexagon of side a, listed counter-clockwise from (-1, 0)."""
    if a == 0:
        raise ValueError("hexagon side must be nonzero")
    h = math.sqrt(3.0) / 2.0
    corners = np.array([-1.0, -0.5 + h * 1j, 0.5 + h * 1j, 1.0, 0.5 - h * 1j, -0.5 - h * 1j], dtype=complex)
    return a * corners


@dataclass(frozen=True)
class ConstantScale:
    value: float = 1.0

    def at(self, t: float):
        return self.value, 0.0, 0.0


@dataclass(frozen=True)
class SineScale:
    """Oscillating formation size a(t) = amplitude * sin(omega t)."""

    amplitude: float
    omega: float

    def at(self, t: float):
        w = self.omega
        return (
            self.amplitude * math.sin(w * t),
            self.amplitude * w * math.cos(w * t),
            -self.amplitude * w * w * math.sin(w * t),
        )


@dataclass(frozen=True)
class StaticPoint:
    point: complex = 0j

    def at(self, t: float):
        return complex(self.point), 0j, 0j


@dataclass(frozen=True)
class LineSinePath:
    """Centroid path slope*t + 1j*amplitude*sin(omega t) with analytic derivatives."""

    slope: float = 1.0
    amplitude: float = 1.0
    omega: float = 1.0

    def at(self, t: float):
        w = self.omega
        return (
            self.slope * t + 1j * self.amplitude * math.sin(w * t),
            self.slope + 1j * self.amplitude * w * math.cos(w * t),
            -1j * self.amplitude * w * w * math.sin(w * t),
        )


@dataclass(frozen=True)
class DesiredTrajectory:
    """Formation shape basis (actual coordinates), centroid path, and scale."""

    basis: np.ndarray
    centroid: object = field(default_factory=StaticPoint)
    scale: object = field(default_factory=ConstantScale)

    def __post_init__(self):
        object.__setattr__(self, "basis", _readonly(np.asarray(self.basis, dtype=complex).reshape(-1)))

    def reference(self, transform: TransformPair) -> "ReferenceTrack":
        if len(self.basis) != transform.n:
            raise ValueError(f"basis length {len(self.basis)} does not match transform size {transform.n}")
        shape = transform.forward @ self.basis
        shape[-1] = 0.0  # centroid channel driven by the path, not the basis
        return ReferenceTrack(shape=shape, centroid=self.centroid, scale=self.scale)


@dataclass(frozen=True)
class ReferenceTrack:
    """Desired trajectory bound to a transform; evaluates xi_d and derivatives."""

    shape: np.ndarray
    centroid: object
    scale: object

    def __post_init__(self):
        object.__setattr__(self, "shape", _readonly(np.asarray(self.shape, dtype=complex)))

    def xi(self, t: float):
        a, adot, addot = self.scale.at(t)
        c, cdot, cddot = self.centroid.at(t)
        xi_d = a * self.shape
        xi_dot = adot * self.shape
        xi_ddot = addot * self.shape
        xi_d[-1] = c
        xi_dot[-1] = cdot
        xi_ddot[-1] = cddot
        return xi_d, xi_dot, xi_ddot


@dataclass(frozen=True)
class ControllerConfig:
    """Mode, integration domain, diagonal gain(s), optional potential.

    For double mode ``d`` is the position gain diagonal and the velocity
    gain is gamma * d.
    """

    mode: str
    domain: str
    d: np.ndarray
    gamma: float | None = None
    potential: PotentialParams | None = None

    def __post_init__(self):
        if self.mode not in (SINGLE, DOUBLE):
            raise ValueError(f"mode must be '{SINGLE}' or '{DOUBLE}', got {self.mode!r}")
        if self.domain not in (ACTUAL, TRANSFORMED):
            raise ValueError(f"domain must be '{ACTUAL}' or '{TRANSFORMED}', got {self.domain!r}")
        d = np.asarray(self.d, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(d.view(float))):
            raise ValueError("diagonal gain entries must be finite")
        object.__setattr__(self, "d", _readonly(d))
        if self.mode == DOUBLE:
            if self.gamma is None or not self.gamma > 0:
                raise ValueError("double mode requires gamma > 0")


@dataclass(frozen=True)
class SimState:
    """One snapshot carrying both coordinate views (velocities in double mode)."""

    t: float
    z: np.ndarray
    xi: np.ndarray
    zdot: np.ndarray | None = None
    xidot: np.ndarray | None = None


@dataclass(frozen=True)
class SimEvent:
    t: float
    kind: str
    detail: str


@dataclass
class TrajectoryLog:
    """Time-indexed record of a run plus discrete events."""

    t: np.ndarray
    z: np.ndarray
    xi: np.ndarray
    xi_err: np.ndarray
    xi_err_norm: np.ndarray
    min_dist: np.ndarray
    u_f: np.ndarray
    u_a: np.ndarray
    events: list[SimEvent]
    dt: float
    name: str = ""
    zdot: np.ndarray | None = None
    xidot: np.ndarray | None = None
    xidot_err: np.ndarray | None = None

    @property
    def samples(self) -> int:
        return len(self.t)

    @property
    def terminal_xi_error(self) -> float:
        return float(self.xi_err_norm[-1])

    @property
    def terminal_centroid_error(self) -> float:
        return float(abs(self.xi_err[-1, -1]))

    @property
    def min_distance(self) -> float:
        return float(self.min_dist.min())

    @property
    def terminal_combined_error(self) -> float:
        if self.xidot_err is None:
            return self.terminal_xi_error
        return float(math.hypot(self.xi_err_norm[-1], np.linalg.norm(self.xidot_err[-1])))


def _avoidance_term(pos_z: np.ndarray, cfg: ControllerConfig, transform: TransformPair, domain: str) -> np.ndarray:
    """-P z in actual coordinates, -Phi (P z) in transformed ones (zero without a potential)."""
    if cfg.potential is None:
        return np.zeros(transform.n, dtype=complex)
    pz = potential_matrix(pos_z, cfg.potential).entries
    grad = pz @ pos_z
    if domain == TRANSFORMED:
        return -(transform.forward @ grad)
    return -grad


def _single_u(t: float, pos: np.ndarray, ref: ReferenceTrack, cfg: ControllerConfig,
              transform: TransformPair) -> np.ndarray:
    xi_d, xi_dot, _ = ref.xi(t)
    if cfg.domain == TRANSFORMED:
        u = -(cfg.d * (transform.inverse @ (pos - xi_d))) + xi_dot
        z = transform.inverse @ pos
    else:
        z_d = transform.inverse @ xi_d
        z_dot = transform.inverse @ xi_dot
        u = -(transform.inverse @ (cfg.d * (pos - z_d))) + z_dot
        z = pos
    return u + _avoidance_term(z, cfg, transform, cfg.domain)


def _double_acc(t: float, pos: np.ndarray, vel: np.ndarray, ref: ReferenceTrack, cfg: ControllerConfig,
                transform: TransformPair) -> np.ndarray:
    xi_d, xi_dot, xi_ddot = ref.xi(t)
    d2 = cfg.gamma * cfg.d
    if cfg.domain == TRANSFORMED:
        v = -(cfg.d * (transform.inverse @ (pos - xi_d))) - (d2 * (transform.inverse @ (vel - xi_dot))) + xi_ddot
        z = transform.inverse @ pos
    else:
        z_d = transform.inverse @ xi_d
        z_dot = transform.inverse @ xi_dot
        z_ddot = transform.inverse @ xi_ddot
        v = (
            -(transform.inverse @ (cfg.d * (pos - z_d)))
            - (transform.inverse @ (d2 * (vel - z_dot)))
            + z_ddot
        )
        z = pos
    return v + _avoidance_term(z, cfg, transform, cfg.domain)


def controller_single(state: SimState, desired, cfg: ControllerConfig, transform: TransformPair) -> np.ndarray:
    """Velocity command for the single-integrator loop at the state's time."""
    if cfg.mode != SINGLE:
        raise ValueError("controller_single requires a single-integrator config")
    ref = desired.reference(transform) if isinstance(desired, DesiredTrajectory) else desired
    pos = state.xi if cfg.domain == TRANSFORMED else state.z
    return _single_u(state.t, pos, ref, cfg, transform)


def controller_double(state: SimState, desired, cfg: ControllerConfig, transform: TransformPair) -> np.ndarray:
    """Acceleration command for the double-integrator loop."""
    if cfg.mode != DOUBLE:
        raise ValueError("controller_double requires a double-integrator config")
    ref = desired.reference(transform) if isinstance(desired, DesiredTrajectory) else desired
    if cfg.domain == TRANSFORMED:
        pos, vel = state.xi, state.xidot
    else:
        pos, vel = state.z, state.zdot
    if vel is None:
        raise ValueError("double-integrator state needs a populated velocity")
    return _double_acc(state.t, pos, vel, ref, cfg, transform)


def _make_rhs(ref: ReferenceTrack, cfg: ControllerConfig, transform: TransformPair):
    n = transform.n
    if cfg.mode == SINGLE:
        def f(t, y):
            return _single_u(t, y, ref, cfg, transform)
    else:
        def f(t, y):
            acc = _double_acc(t, y[:n], y[n:], ref, cfg, transform)
            return np.concatenate([y[n:], acc])
    return f


def _rk4(f, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + dt / 2.0, y + (dt / 2.0) * k1)
    k3 = f(t + dt / 2.0, y + (dt / 2.0) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _guard_blowup(y: np.ndarray, t: float):
    mags = np.abs(y)
    worst = int(np.argmax(mags))
    if mags[worst] > BLOWUP_LIMIT:
        raise NumericalBlowup(
            f"state component {worst} reached |y| = {mags[worst]:.3e} at t = {t:.6f}",
            t=t,
            component=worst,
        )


def step(state: SimState, desired, cfg: ControllerConfig, transform: TransformPair, dt: float) -> SimState:
    """Advance one fixed RK4 step on the configured domain's dynamics."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    ref = desired.reference(transform) if isinstance(desired, DesiredTrajectory) else desired
    f = _make_rhs(ref, cfg, transform)
    n = transform.n
    if cfg.mode == SINGLE:
        y0 = state.xi if cfg.domain == TRANSFORMED else state.z
    else:
        if cfg.domain == TRANSFORMED:
            y0 = np.concatenate([state.xi, state.xidot])
        else:
            y0 = np.concatenate([state.z, state.zdot])
    y1 = _rk4(f, state.t, y0, dt)
    t1 = state.t + dt
    _guard_blowup(y1, t1)
    return _state_from_vector(y1, t1, cfg, transform, n)


def _state_from_vector(y: np.ndarray, t: float, cfg: ControllerConfig, transform: TransformPair, n: int) -> SimState:
    if cfg.mode == SINGLE:
        if cfg.domain == TRANSFORMED:
            return SimState(t=t, z=transform.inverse @ y, xi=y.copy())
        return SimState(t=t, z=y.copy(), xi=transform.forward @ y)
    pos, vel = y[:n], y[n:]
    if cfg.domain == TRANSFORMED:
        return SimState(
            t=t, z=transform.inverse @ pos, xi=pos.copy(),
            zdot=transform.inverse @ vel, xidot=vel.copy(),
        )
    return SimState(
        t=t, z=pos.copy(), xi=transform.forward @ pos,
        zdot=vel.copy(), xidot=transform.forward @ vel,
    )


def run(scenario) -> TrajectoryLog:
    """Integrate a scenario from t = 0 to t_end and record every step.

    Raises :class:`NumericalBlowup` (with the partial log attached) when a
    state magnitude crosses the guard; potential singularities propagate
    with the failing timestamp and the partial log as well.
    """
    transform: TransformPair = scenario.transform
    cfg: ControllerConfig = scenario.controller
    ref = scenario.desired.reference(transform)
    n = transform.n
    dt = float(scenario.dt)
    steps = int(math.floor(scenario.t_end / dt + 1e-9))
    m = steps + 1

    double = cfg.mode == DOUBLE
    t_arr = np.empty(m)
    z_arr = np.empty((m, n), dtype=complex)
    xi_arr = np.empty((m, n), dtype=complex)
    xi_err = np.empty((m, n), dtype=complex)
    err_norm = np.empty(m)
    min_d = np.empty(m)
    u_f = np.empty((m, n), dtype=complex)
    u_a = np.empty((m, n), dtype=complex)
    zdot_arr = np.empty((m, n), dtype=complex) if double else None
    xidot_arr = np.empty((m, n), dtype=complex) if double else None
    xidot_err = np.empty((m, n), dtype=complex) if double else None
    events: list[SimEvent] = []
    breached = False

    f = _make_rhs(ref, cfg, transform)
    if double:
        if cfg.domain == TRANSFORMED:
            y = np.concatenate([transform.forward @ scenario.z0, transform.forward @ scenario.zdot0])
        else:
            y = np.concatenate([scenario.z0, scenario.zdot0]).astype(complex)
    else:
        y = (transform.forward @ scenario.z0) if cfg.domain == TRANSFORMED else np.asarray(scenario.z0, dtype=complex)

    def partial(k: int) -> TrajectoryLog:
        sl = slice(0, k)
        return TrajectoryLog(
            t=t_arr[sl].copy(), z=z_arr[sl].copy(), xi=xi_arr[sl].copy(),
            xi_err=xi_err[sl].copy(), xi_err_norm=err_norm[sl].copy(),
            min_dist=min_d[sl].copy(), u_f=u_f[sl].copy(), u_a=u_a[sl].copy(),
            events=list(events), dt=dt, name=getattr(scenario, "name", ""),
            zdot=zdot_arr[sl].copy() if double else None,
            xidot=xidot_arr[sl].copy() if double else None,
            xidot_err=xidot_err[sl].copy() if double else None,
        )

    def sample(k: int, t: float):
        nonlocal breached
        if double:
            pos, vel = y[:n], y[n:]
        else:
            pos, vel = y, None
        if cfg.domain == TRANSFORMED:
            xi = pos
            z = transform.inverse @ pos
        else:
            z = pos
            xi = transform.forward @ pos
        xi_d, xi_dot, _ = ref.xi(t)
        t_arr[k] = t
        z_arr[k] = z
        xi_arr[k] = xi
        e = xi - xi_d
        xi_err[k] = e
        err_norm[k] = np.linalg.norm(e)
        dmin = min_pair_distance(z)
        min_d[k] = dmin
        if double:
            if cfg.domain == TRANSFORMED:
                xidot = vel
                zdot = transform.inverse @ vel
            else:
                zdot = vel
                xidot = transform.forward @ vel
            zdot_arr[k] = zdot
            xidot_arr[k] = xidot
            xidot_err[k] = xidot - xi_dot
            total = f(t, y)[n:]
        else:
            total = f(t, y)
        avoid = _avoidance_term(z, cfg, transform, cfg.domain)
        u_a[k] = avoid
        u_f[k] = total - avoid
        if cfg.potential is not None:
            r = cfg.potential.avoidance_radius
            if dmin < r and not breached:
                breached = True
                events.append(SimEvent(t=t, kind="avoidance_breach",
                                       detail=f"min inter-agent distance {dmin:.6f} dropped below r = {r}"))
            elif dmin >= r:
                breached = False

    k = -1
    try:
        sample(0, 0.0)
        for k in range(steps):
            y = _rk4(f, k * dt, y, dt)
            t_next = (k + 1) * dt
            _guard_blowup(y, t_next)
            sample(k + 1, t_next)
    except NumericalBlowup as exc:
        exc.partial_log = partial(k + 1)
        raise
    except (SingularBand, CoincidentAgents) as exc:
        events.append(SimEvent(t=(k + 1) * dt, kind="singular_band", detail=str(exc)))
        exc.partial_log = partial(k + 1)
        exc.t = (k + 1) * dt
        raise

    return partial(m)


def trajectory_deviation(log_a: TrajectoryLog, log_b: TrajectoryLog) -> float:
    """Worst-case infinity-norm gap between the transformed views of two runs."""
    if log_a.xi.shape != log_b.xi.shape:
        raise ValueError("trajectory logs have different shapes")
    return float(np.abs(log_a.xi - log_b.xi).max())


def equivalence_report(scenario, tol: float = 1e-6):
    """Run the scenario in both domains from mapped initial data.

    Returns (max_deviation, passed) where the deviation is
    max over samples of the infinity norm of Phi z(t) - xi(t).
    """
    log_actual = run(with_domain(scenario, ACTUAL))
    log_transformed = run(with_domain(scenario, TRANSFORMED))
    dev = trajectory_deviation(log_actual, log_transformed)
    return dev, dev <= tol


def with_domain(scenario, domain: str):
    """Copy of a scenario whose controller integrates in the given domain."""
    return dataclasses.replace(scenario, controller=dataclasses.replace(scenario.controller, domain=domain))
