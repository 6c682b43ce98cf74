"""Scenario configuration: parsing, validation, and round-trip serialization.

A scenario is one YAML document with nested sections mirroring
ScenarioConfig; matrices are row-major nested lists. Unknown keys are
rejected and every validation error names the offending dotted key.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError
from .interaction import (HumanParams, ImpedanceParams, MatrixSchedule,
                          evaluate_schedule, validate_interaction_schedules)
from .manipulator import ELBOW_DOWN, ELBOW_UP, ManipulatorParams
from .tracking import ControllerGains

DEFAULT_T0 = 0.0
DEFAULT_TF = 10.0
DEFAULT_H = 1e-3
DEFAULT_GAMMA = 1.0
DEFAULT_RBF_NODES = 20
DEFAULT_RBF_SEED = 0
DEFAULT_RBF_WIDTH = 1.0
DEFAULT_RBF_SCALES = (1.0, 1.0, 1.0)
DEFAULT_SETTLE_TIME = 2.0

_SECTIONS = {
    "manipulator": {"m1", "m2", "L1", "L2", "I1", "I2", "g"},
    "impedance": {"M", "B", "K"},
    "human": {"K_d", "K_p", "k_e"},
    "cost": {"Q", "R", "S"},
    "boundary": {"X0", "Xf"},
    "horizon": {"t0", "tf", "h"},
    "controller": {"zeta", "k_rc", "alpha", "sigma", "gamma"},
    "rbf": {"nodes", "seed", "width", "scales"},
    "tracking": {"branch", "q0_offset", "settle_time"},
}
_OPTIONAL_SECTIONS = {"horizon", "rbf", "tracking"}
_SCHEDULE_KEYS = {
    "constant": {"kind", "base"},
    "sinusoidal": {"kind", "base", "amplitude", "omega"},
    "tabulated": {"kind", "times", "values"},
}


@dataclass
class ScenarioConfig:
    """Complete declarative description of one simulation run."""

    manipulator: ManipulatorParams
    impedance: ImpedanceParams
    human: HumanParams
    cost_Q: MatrixSchedule
    cost_R: MatrixSchedule
    cost_S: MatrixSchedule
    X0: np.ndarray
    Xf: np.ndarray
    t0: float
    tf: float
    h: float
    gains: ControllerGains
    rbf_nodes: int
    rbf_seed: int
    rbf_width: float
    rbf_scales: np.ndarray
    ik_branch: str
    q0_offset: np.ndarray
    settle_time: float


def _fail(path: str, message: str):
    raise ConfigError(f"'{path}': {message}")


def _section(data: dict, name: str) -> dict:
    if name not in data:
        if name in _OPTIONAL_SECTIONS:
            return {}
        _fail(name, "missing required section")
    sec = data[name]
    if not isinstance(sec, dict):
        _fail(name, "must be a mapping")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        _fail(f"{name}.{sorted(unknown)[0]}", "unknown key")
    return sec


def _scalar(sec: dict, path: str, key: str, default=None, kind=float,
            positive=False, non_negative=False):
    if key not in sec:
        if default is None:
            _fail(f"{path}.{key}", f"missing required key (expected {kind.__name__})")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}", f"expected {kind.__name__}, got {type(v).__name__}")
    v = kind(v)
    if not np.isfinite(v):
        _fail(f"{path}.{key}", "must be finite")
    if positive and v <= 0:
        _fail(f"{path}.{key}", "must be strictly positive")
    if non_negative and v < 0:
        _fail(f"{path}.{key}", "must be non-negative")
    return v


def _matrix(value, path: str, shape: tuple) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        _fail(path, f"expected a {shape[0]}x{shape[1]} matrix as nested lists")
    if arr.shape != shape:
        _fail(path, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        _fail(path, "entries must be finite")
    return arr


def _vector(sec: dict, path: str, key: str, length: int,
            default=None) -> np.ndarray:
    if key not in sec:
        if default is None:
            _fail(f"{path}.{key}", f"missing required key (expected list of {length} numbers)")
        return np.asarray(default, dtype=float)
    try:
        arr = np.array(sec[key], dtype=float)
    except (TypeError, ValueError):
        _fail(f"{path}.{key}", f"expected a list of {length} numbers")
    if arr.shape != (length,):
        _fail(f"{path}.{key}", f"expected length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        _fail(f"{path}.{key}", "entries must be finite")
    return arr


def _schedule(sec: dict, path: str, key: str, shape: tuple) -> MatrixSchedule:
    if key not in sec:
        _fail(f"{path}.{key}", f"missing required key (expected {shape[0]}x{shape[1]} "
              "matrix or schedule mapping)")
    v = sec[key]
    full = f"{path}.{key}"
    if isinstance(v, list):
        return MatrixSchedule.constant(_matrix(v, full, shape))
    if not isinstance(v, dict):
        _fail(full, "expected a matrix (nested lists) or a schedule mapping")
    kind = v.get("kind")
    if kind not in _SCHEDULE_KEYS:
        _fail(f"{full}.kind", f"expected one of {sorted(_SCHEDULE_KEYS)}")
    unknown = set(v) - _SCHEDULE_KEYS[kind]
    if unknown:
        _fail(f"{full}.{sorted(unknown)[0]}", "unknown key")
    if kind == "constant":
        return MatrixSchedule.constant(_matrix(v.get("base"), f"{full}.base", shape))
    if kind == "sinusoidal":
        omega = v.get("omega")
        if not isinstance(omega, (int, float)) or isinstance(omega, bool):
            _fail(f"{full}.omega", "expected a number (rad/s)")
        return MatrixSchedule.sinusoidal(
            _matrix(v.get("base"), f"{full}.base", shape),
            _matrix(v.get("amplitude"), f"{full}.amplitude", shape),
            float(omega))
    times = v.get("times")
    values = v.get("values")
    if not isinstance(times, list) or len(times) < 2:
        _fail(f"{full}.times", "expected a list of at least 2 times")
    if not isinstance(values, list) or len(values) != len(times):
        _fail(f"{full}.values", "expected one matrix per time sample")
    mats = [_matrix(m, f"{full}.values[{i}]", shape) for i, m in enumerate(values)]
    try:
        return MatrixSchedule.tabulated(np.asarray(times, dtype=float), np.stack(mats))
    except ValueError as exc:
        _fail(f"{full}.times", str(exc))


def _check_spd(schedule: MatrixSchedule, path: str, t0: float, tf: float,
               semidefinite: bool = False, n_samples: int = 20) -> None:
    for t in np.linspace(t0, tf, n_samples):
        M = evaluate_schedule(schedule, float(t))
        if not np.allclose(M, M.T, atol=1e-10):
            _fail(path, f"must be symmetric (violated at t={t:.6g})")
        lo = np.linalg.eigvalsh(M)[0]
        if semidefinite:
            if lo < -1e-10:
                _fail(path, f"must be positive semidefinite (eigenvalue {lo:.3g} at t={t:.6g})")
        elif lo <= 0.0:
            _fail(path, f"must be positive definite (eigenvalue {lo:.3g} at t={t:.6g})")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate one scenario document."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping of sections")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        _fail(sorted(unknown)[0], "unknown section")

    man = _section(data, "manipulator")
    m1 = _scalar(man, "manipulator", "m1", positive=True)
    m2 = _scalar(man, "manipulator", "m2", positive=True)
    L1 = _scalar(man, "manipulator", "L1", positive=True)
    L2 = _scalar(man, "manipulator", "L2", positive=True)
    I1 = _scalar(man, "manipulator", "I1", default=m1 * L1 ** 2 / 12.0, non_negative=True)
    I2 = _scalar(man, "manipulator", "I2", default=m2 * L2 ** 2 / 12.0, non_negative=True)
    g = _scalar(man, "manipulator", "g", default=9.81, non_negative=True)
    try:
        manipulator = ManipulatorParams(m1, m2, L1, L2, I1, I2, g)
    except ValueError as exc:
        raise ConfigError(f"'manipulator': {exc}") from exc

    imp_sec = _section(data, "impedance")
    impedance = ImpedanceParams(
        M=_schedule(imp_sec, "impedance", "M", (2, 2)),
        B=_schedule(imp_sec, "impedance", "B", (2, 2)),
        K=_schedule(imp_sec, "impedance", "K", (2, 2)),
    )
    hum_sec = _section(data, "human")
    human = HumanParams(
        K_d=_schedule(hum_sec, "human", "K_d", (2, 2)),
        K_p=_schedule(hum_sec, "human", "K_p", (2, 2)),
        k_e=_schedule(hum_sec, "human", "k_e", (2, 2)),
    )

    hor = _section(data, "horizon")
    t0 = _scalar(hor, "horizon", "t0", default=DEFAULT_T0)
    tf = _scalar(hor, "horizon", "tf", default=DEFAULT_TF)
    h = _scalar(hor, "horizon", "h", default=DEFAULT_H, positive=True)
    if tf <= t0:
        _fail("horizon.tf", f"must exceed horizon.t0 = {t0}")
    n_steps = (tf - t0) / h
    if abs(n_steps - round(n_steps)) > 1e-6 or round(n_steps) < 1:
        _fail("horizon.h", f"must divide the horizon [{t0}, {tf}] into whole steps")

    cost_sec = _section(data, "cost")
    cost_Q = _schedule(cost_sec, "cost", "Q", (6, 6))
    cost_R = _schedule(cost_sec, "cost", "R", (2, 2))
    if "S" in cost_sec:
        cost_S = _schedule(cost_sec, "cost", "S", (6, 2))
    else:
        cost_S = MatrixSchedule.constant(np.zeros((6, 2)))
    _check_spd(cost_Q, "cost.Q", t0, tf, semidefinite=True)
    _check_spd(cost_R, "cost.R", t0, tf, semidefinite=False)

    bnd = _section(data, "boundary")
    X0 = _vector(bnd, "boundary", "X0", 6)
    Xf = _vector(bnd, "boundary", "Xf", 6)

    ctl = _section(data, "controller")
    zeta = _scalar(ctl, "controller", "zeta", positive=True)
    k_rc = _scalar(ctl, "controller", "k_rc", positive=True)
    alpha = _scalar(ctl, "controller", "alpha", positive=True)
    sigma = _scalar(ctl, "controller", "sigma", positive=True)

    rbf = _section(data, "rbf")
    nodes = _scalar(rbf, "rbf", "nodes", default=DEFAULT_RBF_NODES, kind=int, positive=True)
    seed = _scalar(rbf, "rbf", "seed", default=DEFAULT_RBF_SEED, kind=int, non_negative=True)
    width = _scalar(rbf, "rbf", "width", default=DEFAULT_RBF_WIDTH, positive=True)
    scales = _vector(rbf, "rbf", "scales", 3, default=DEFAULT_RBF_SCALES)
    if np.any(scales <= 0):
        _fail("rbf.scales", "entries must be strictly positive")

    gamma_raw = ctl.get("gamma", DEFAULT_GAMMA)
    if isinstance(gamma_raw, (int, float)) and not isinstance(gamma_raw, bool):
        if gamma_raw <= 0:
            _fail("controller.gamma", "must be strictly positive")
        Gamma = float(gamma_raw) * np.eye(nodes)
    elif isinstance(gamma_raw, list):
        Gamma = _matrix(gamma_raw, "controller.gamma", (nodes, nodes))
    else:
        _fail("controller.gamma", "expected a positive scalar or a nodes x nodes matrix")
    try:
        gains = ControllerGains(zeta, k_rc, alpha, sigma, Gamma)
    except ValueError as exc:
        raise ConfigError(f"'controller': {exc}") from exc

    trk = _section(data, "tracking")
    branch = trk.get("branch", ELBOW_DOWN)
    if branch not in (ELBOW_DOWN, ELBOW_UP):
        _fail("tracking.branch", f"expected '{ELBOW_DOWN}' or '{ELBOW_UP}'")
    q0_offset = _vector(trk, "tracking", "q0_offset", 2, default=(0.0, 0.0))
    settle_time = _scalar(trk, "tracking", "settle_time",
                          default=DEFAULT_SETTLE_TIME, non_negative=True)
    if settle_time >= tf - t0:
        _fail("tracking.settle_time", "must be shorter than the horizon")

    try:
        validate_interaction_schedules(impedance, human, t0, tf)
    except ConfigError as exc:
        raise ConfigError(f"'impedance/human': {exc}") from exc

    return ScenarioConfig(
        manipulator=manipulator, impedance=impedance, human=human,
        cost_Q=cost_Q, cost_R=cost_R, cost_S=cost_S, X0=X0, Xf=Xf,
        t0=t0, tf=tf, h=h, gains=gains, rbf_nodes=int(nodes),
        rbf_seed=int(seed), rbf_width=width, rbf_scales=scales,
        ik_branch=branch, q0_offset=q0_offset, settle_time=settle_time,
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fp:
        return parse_config(fp.read())


def _schedule_to_obj(s: MatrixSchedule):
    if s.kind == "constant":
        return s.base.tolist()
    if s.kind == "sinusoidal":
        return {"kind": "sinusoidal", "base": s.base.tolist(),
                "amplitude": s.amplitude.tolist(), "omega": float(s.omega)}
    return {"kind": "tabulated", "times": s.times.tolist(),
            "values": s.values.tolist()}


def config_to_dict(config: ScenarioConfig) -> dict:
    """Canonical plain-python form with every applied default made explicit."""
    man = config.manipulator
    G = config.gains.Gamma
    iso = G[0, 0] * np.eye(config.rbf_nodes)
    gamma_obj = float(G[0, 0]) if np.array_equal(G, iso) else G.tolist()
    return {
        "manipulator": {"m1": man.m1, "m2": man.m2, "L1": man.L1, "L2": man.L2,
                        "I1": man.I1, "I2": man.I2, "g": man.g},
        "impedance": {"M": _schedule_to_obj(config.impedance.M),
                      "B": _schedule_to_obj(config.impedance.B),
                      "K": _schedule_to_obj(config.impedance.K)},
        "human": {"K_d": _schedule_to_obj(config.human.K_d),
                  "K_p": _schedule_to_obj(config.human.K_p),
                  "k_e": _schedule_to_obj(config.human.k_e)},
        "cost": {"Q": _schedule_to_obj(config.cost_Q),
                 "R": _schedule_to_obj(config.cost_R),
                 "S": _schedule_to_obj(config.cost_S)},
        "boundary": {"X0": config.X0.tolist(), "Xf": config.Xf.tolist()},
        "horizon": {"t0": config.t0, "tf": config.tf, "h": config.h},
        "controller": {"zeta": config.gains.zeta, "k_rc": config.gains.k_rc,
                       "alpha": config.gains.alpha, "sigma": config.gains.sigma,
                       "gamma": gamma_obj},
        "rbf": {"nodes": config.rbf_nodes, "seed": config.rbf_seed,
                "width": config.rbf_width, "scales": config.rbf_scales.tolist()},
        "tracking": {"branch": config.ik_branch,
                     "q0_offset": config.q0_offset.tolist(),
                     "settle_time": config.settle_time},
    }


def serialize_config(config: ScenarioConfig) -> str:
    """YAML text that parses back to an identical configuration."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=False,
                          default_flow_style=None)
