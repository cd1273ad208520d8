"""Scenario configuration: JSON schema, bundled presets, gain synthesis.

A scenario file is a JSON object with the sections shown below; complex
scalars are {"re": .., "im": ..} records throughout.

    {
      "name": "hexagon6",
      "agents": {"n": 6, "masses": [1, 1, 1, 1, 1, 1]},
      "transform": {"preset": "jacobi"},            // or "paper_phi6",
                                                    // or {"matrix": [[{re,im}, ..], ..]}
                                                    // optional "weights": [{re,im}, ..]
      "controller": {"mode": "single", "domain": "transformed",
                     "d": "auto" | [{re,im}, ..],
                     "gamma": 2.0,                  // double mode only
                     "policy": {"seed_eigenvalue": 1.0, "max_refinements": 3}},
      "desired": {"basis": {"preset": "hexagon", "side": 1.0} | [{re,im}, ..],
                  "scale": {"type": "constant", "value": 1.0}
                         | {"type": "sine", "amplitude": B, "omega": w},
                  "centroid": {"type": "line_sine", "slope": 1, "amplitude": 1, "omega": 1}
                            | {"type": "constant", "value": {re,im}}},
      "potential": null | {"detection_radius": 2.0, "avoidance_radius": 1.0},
      "initial": {"type": "offset_from_target", "scale": 0.25}
               | {"type": "explicit", "positions": [{re,im}, ..],
                  "velocities": [{re,im}, ..]},     // velocities optional
      "integration": {"dt": 0.001, "t_end": 20.0},
      "seed": 7,
      "output_dir": "out/hexagon6"                  // optional
    }

Bundled presets ship with the package and are addressable by bare name.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError
from .jsonio import matrix_from_json, vector_from_json
from .potential import PotentialParams
from .sim import (
    ConstantScale,
    ControllerConfig,
    DesiredTrajectory,
    LineSinePath,
    SineScale,
    StaticPoint,
    hexagon_basis,
)
from .stabilizer import SearchPolicy, stabilize_double, stabilize_single
from .transforms import (
    AgentConfig,
    TransformPair,
    WeightMatrix,
    apply_weight,
    build_jacobi,
    build_phi6,
    pair_from_forward,
)

PRESET_NAMES = ("hexagon6", "jacobi3", "double6")


@dataclass(frozen=True)
class Scenario:
    """Fully resolved simulation setup."""

    name: str
    agents: AgentConfig
    transform: TransformPair
    controller: ControllerConfig
    desired: DesiredTrajectory
    z0: np.ndarray
    zdot0: np.ndarray | None
    dt: float
    t_end: float
    seed: int
    output_dir: str | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ConfigError(f"t_end ({self.t_end}) must be at least dt ({self.dt})")


def preset_text(name: str) -> str:
    try:
        return resources.files("formation_lab").joinpath(f"presets/{name}.json").read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"unknown bundled preset {name!r}; available: {', '.join(PRESET_NAMES)}") from exc


def load_config(source) -> dict:
    """Read a config dict from a file path or a bundled preset name."""
    if isinstance(source, dict):
        return source
    text = None
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = preset_text(str(source))
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return cfg


def _section(cfg: dict, key: str, required: bool = True):
    value = cfg.get(key)
    if value is None and required:
        raise ConfigError(f"missing required section {key!r}")
    return value


def _build_agents(cfg: dict) -> AgentConfig:
    sec = _section(cfg, "agents")
    try:
        return AgentConfig(n=int(sec["n"]), masses=tuple(sec["masses"]) if "masses" in sec else None)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"agents: {exc}") from exc


def _build_transform(cfg: dict, agents: AgentConfig) -> TransformPair:
    sec = _section(cfg, "transform")
    preset = sec.get("preset")
    if preset == "jacobi":
        pair = build_jacobi(agents)
    elif preset == "paper_phi6":
        if agents.n != 6:
            raise ConfigError(f"transform preset 'paper_phi6' is 6x6 but n = {agents.n}")
        pair = build_phi6()
    elif preset is not None:
        raise ConfigError(f"transform: unknown preset {preset!r} (expected 'jacobi' or 'paper_phi6')")
    elif "matrix" in sec:
        matrix = matrix_from_json(sec["matrix"], "transform.matrix")
        if matrix.shape != (agents.n, agents.n):
            raise ConfigError(f"transform.matrix shape {matrix.shape} does not match n = {agents.n}")
        pair = pair_from_forward(matrix)
    else:
        raise ConfigError("transform: need a 'preset' or an explicit 'matrix'")
    if "weights" in sec:
        pair = apply_weight(pair, WeightMatrix(vector_from_json(sec["weights"], "transform.weights")))
    return pair


def _build_policy(sec: dict | None) -> SearchPolicy:
    if not sec:
        return SearchPolicy()
    kwargs = {}
    if "seed_eigenvalue" in sec:
        kwargs["seed_eigenvalue"] = float(sec["seed_eigenvalue"])
    if "max_refinements" in sec:
        kwargs["max_refinements"] = int(sec["max_refinements"])
    try:
        return SearchPolicy(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"controller.policy: {exc}") from exc


def _build_controller(cfg: dict, transform: TransformPair) -> ControllerConfig:
    sec = _section(cfg, "controller")
    mode = sec.get("mode", "single")
    domain = sec.get("domain", "transformed")
    gamma = float(sec["gamma"]) if "gamma" in sec else None
    potential = None
    pot = cfg.get("potential")
    if pot:
        try:
            potential = PotentialParams(
                detection_radius=float(pot["detection_radius"]),
                avoidance_radius=float(pot["avoidance_radius"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"potential: {exc}") from exc
    d_spec = sec.get("d", "auto")
    if d_spec == "auto":
        policy = _build_policy(sec.get("policy"))
        if mode == "double":
            if gamma is None:
                raise ConfigError("controller: double mode needs 'gamma'")
            d = stabilize_double(transform.inverse, policy, gamma).d1
        else:
            d = stabilize_single(transform.inverse, policy).d
    else:
        d = vector_from_json(d_spec, "controller.d")
        if len(d) != transform.n:
            raise ConfigError(f"controller.d has {len(d)} entries for a {transform.n}-agent transform")
    try:
        return ControllerConfig(mode=mode, domain=domain, d=d, gamma=gamma, potential=potential)
    except ValueError as exc:
        raise ConfigError(f"controller: {exc}") from exc


def _build_desired(cfg: dict, agents: AgentConfig) -> DesiredTrajectory:
    sec = _section(cfg, "desired")
    basis_spec = sec.get("basis")
    if basis_spec is None:
        raise ConfigError("desired: missing 'basis'")
    if isinstance(basis_spec, dict) and basis_spec.get("preset") == "hexagon":
        if agents.n != 6:
            raise ConfigError("desired.basis preset 'hexagon' needs n = 6")
        basis = hexagon_basis(float(basis_spec.get("side", 1.0)))
    elif isinstance(basis_spec, dict):
        raise ConfigError(f"desired.basis: unknown preset {basis_spec.get('preset')!r}")
    else:
        basis = vector_from_json(basis_spec, "desired.basis")
        if len(basis) != agents.n:
            raise ConfigError(f"desired.basis has {len(basis)} entries for n = {agents.n}")

    scale_spec = sec.get("scale", {"type": "constant", "value": 1.0})
    kind = scale_spec.get("type", "constant")
    if kind == "constant":
        scale = ConstantScale(value=float(scale_spec.get("value", 1.0)))
    elif kind == "sine":
        try:
            scale = SineScale(amplitude=float(scale_spec["amplitude"]), omega=float(scale_spec["omega"]))
        except KeyError as exc:
            raise ConfigError(f"desired.scale: sine scale needs {exc}") from exc
    else:
        raise ConfigError(f"desired.scale: unknown type {kind!r}")

    cent_spec = sec.get("centroid", {"type": "constant", "value": 0.0})
    kind = cent_spec.get("type", "constant")
    if kind == "constant":
        from .jsonio import complex_from_json

        centroid = StaticPoint(point=complex_from_json(cent_spec.get("value", 0.0), "desired.centroid.value"))
    elif kind == "line_sine":
        centroid = LineSinePath(
            slope=float(cent_spec.get("slope", 1.0)),
            amplitude=float(cent_spec.get("amplitude", 1.0)),
            omega=float(cent_spec.get("omega", 1.0)),
        )
    else:
        raise ConfigError(f"desired.centroid: unknown type {kind!r}")
    return DesiredTrajectory(basis=basis, centroid=centroid, scale=scale)


def _build_initial(cfg: dict, transform: TransformPair, desired: DesiredTrajectory,
                   controller: ControllerConfig, seed: int):
    sec = _section(cfg, "initial")
    ref = desired.reference(transform)
    xi_d0, xi_dot0, _ = ref.xi(0.0)
    kind = sec.get("type", "explicit")
    if kind == "explicit":
        positions = sec.get("positions")
        if positions is None:
            raise ConfigError("initial: explicit initial state needs 'positions'")
        z0 = vector_from_json(positions, "initial.positions")
        if len(z0) != transform.n:
            raise ConfigError(f"initial.positions has {len(z0)} entries for n = {transform.n}")
    elif kind == "offset_from_target":
        scale = float(sec.get("scale", 0.25))
        rng = np.random.default_rng(seed)
        offset = rng.standard_normal(transform.n) + 1j * rng.standard_normal(transform.n)
        z0 = transform.inverse @ xi_d0 + scale * offset
    else:
        raise ConfigError(f"initial: unknown type {kind!r}")
    zdot0 = None
    if controller.mode == "double":
        if "velocities" in sec:
            zdot0 = vector_from_json(sec["velocities"], "initial.velocities")
            if len(zdot0) != transform.n:
                raise ConfigError(f"initial.velocities has {len(zdot0)} entries for n = {transform.n}")
        else:
            zdot0 = transform.inverse @ xi_dot0  # start at the reference velocity
    return z0, zdot0


def scenario_from_dict(cfg: dict, name: str | None = None) -> Scenario:
    agents = _build_agents(cfg)
    transform = _build_transform(cfg, agents)
    controller = _build_controller(cfg, transform)
    desired = _build_desired(cfg, agents)
    integ = _section(cfg, "integration")
    try:
        dt = float(integ["dt"])
        t_end = float(integ["t_end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"integration: {exc}") from exc
    if not (math.isfinite(dt) and math.isfinite(t_end)):
        raise ConfigError("integration: dt and t_end must be finite")
    seed = int(cfg.get("seed", 0))
    z0, zdot0 = _build_initial(cfg, transform, desired, controller, seed)
    return Scenario(
        name=name or str(cfg.get("name", "scenario")),
        agents=agents,
        transform=transform,
        controller=controller,
        desired=desired,
        z0=z0,
        zdot0=zdot0,
        dt=dt,
        t_end=t_end,
        seed=seed,
        output_dir=cfg.get("output_dir"),
    )


def load_scenario(source, overrides: dict | None = None) -> Scenario:
    """Build a scenario from a path, preset name, or config dict.

    ``overrides`` may carry dt / t_end / seed replacements (CLI flags).
    """
    cfg = dict(load_config(source))
    if overrides:
        integ = dict(cfg.get("integration", {}))
        if overrides.get("dt") is not None:
            integ["dt"] = overrides["dt"]
        if overrides.get("t_end") is not None:
            integ["t_end"] = overrides["t_end"]
        cfg["integration"] = integ
        if overrides.get("seed") is not None:
            cfg["seed"] = overrides["seed"]
    return scenario_from_dict(cfg)
