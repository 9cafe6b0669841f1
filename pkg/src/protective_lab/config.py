"""Experiment configuration: YAML ingestion, presets, canonical hashing.

A config file has five blocks::

    system:      {preset: pauli-z, n_index: 1}
                 {preset: projector, state: [[1, 0], [0, 0]], gap: 1.0}
                 {preset: custom, matrix: [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]], n_index: 0}
                 {preset: custom, file: h_s.yaml, n_index: 0}
    observable:  {pauli: {x: 1.0, z: 1.0}}  or  {matrix: ...}  or  {file: ...}
    apparatus:   {d_A: 128, p_max: 8.0, sigma: 1.0, x0: 0.0, mass_inv: 0.0}
    schedule:    {T: [64, 128]}  or  {dyadic: {start: 6, stop: 14, base: 1.0}}
    run:         {mode: ideal-mean, trials: 10000, base_seed: 0,
                  second_order_phase: false, strict_boundary: false}

Matrix literals are row-major lists of ``[re, im]`` pairs; a bare number is
accepted for a real entry. Kets use the same pair convention.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .apparatus import ApparatusSpec
from .protective import ProtectiveSetup, SystemSpec, dyadic_times, protection_hamiltonian
from .qcore import PAULIS, HermitianOperator, Ket

SCHEMA_VERSION = "1"

DEFAULTS = {
    "system": {"preset": "pauli-z", "n_index": 1},
    "observable": {"pauli": {"x": 1.0, "z": 1.0}},
    "apparatus": {"d_A": 128, "p_max": 8.0, "sigma": 1.0, "x0": 0.0, "mass_inv": 0.0},
    "schedule": {"dyadic": {"start": 6, "stop": 14, "base": 1.0}},
    "run": {"mode": "ideal-mean", "trials": 10000, "base_seed": 0,
            "second_order_phase": False, "strict_boundary": False, "gap_min": 1e-6,
            "dim_cap": 8192},
}
BLOCKS = tuple(DEFAULTS)


class ConfigError(ValueError):
    """Bad configuration; ``where`` names the offending field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _complex_entry(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ConfigError(where, f"expected a number or an [re, im] pair, got {x!r}")


def parse_matrix(literal, where: str) -> np.ndarray:
    if not isinstance(literal, list) or not literal or not all(isinstance(r, list) for r in literal):
        raise ConfigError(where, "matrix literal must be a non-empty list of rows")
    n = len(literal)
    if any(len(row) != n for row in literal):
        raise ConfigError(where, f"matrix must be square; got {n} rows of lengths "
                                 f"{[len(r) for r in literal]}")
    return np.array([[_complex_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)]
                     for i, row in enumerate(literal)])


def parse_ket(literal, where: str) -> Ket:
    if not isinstance(literal, list) or not literal:
        raise ConfigError(where, "state literal must be a non-empty list")
    v = np.array([_complex_entry(x, f"{where}[{i}]") for i, x in enumerate(literal)])
    if np.linalg.norm(v) == 0:
        raise ConfigError(where, "state vector is zero")
    return Ket.normalized(v)


def _hermitian(m: np.ndarray, where: str) -> HermitianOperator:
    try:
        return HermitianOperator(m)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _load_matrix_file(path: str, base: Path | None, where: str) -> np.ndarray:
    p = Path(path)
    if base is not None and not p.is_absolute():
        p = base / p
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(where, f"cannot read {p}: {exc}") from None
    if isinstance(data, dict):
        data = data.get("matrix")
    return parse_matrix(data, f"{where} ({p})")


def load_text(text: str, source: str = "<config>") -> dict:
    try:
        raw = yaml.safe_load(text) if text.strip() else {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{source} {line}", exc.problem or str(exc)) from None
    except yaml.YAMLError as exc:
        raise ConfigError(source, str(exc)) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(source, "top level must be a mapping of blocks")
    unknown = set(raw) - set(BLOCKS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown block; expected one of {', '.join(BLOCKS)}")
    return raw


def normalize(raw: dict) -> dict:
    """Fill defaults block by block. Matrix/file/preset choices replace the default block."""
    cfg = {}
    for block, default in DEFAULTS.items():
        given = raw.get(block)
        if given is None:
            cfg[block] = copy.deepcopy(default)
            continue
        if not isinstance(given, dict):
            raise ConfigError(block, "block must be a mapping")
        if block in ("apparatus", "run"):
            merged = copy.deepcopy(default)
            unknown = set(given) - set(default)
            if unknown:
                raise ConfigError(f"{block}.{sorted(unknown)[0]}", "unknown field")
            merged.update(given)
            cfg[block] = merged
        else:
            cfg[block] = copy.deepcopy(given)
    return cfg


def _canonical(x):
    # 1 and 1.0 are the same setting
    if isinstance(x, dict):
        return {str(k): _canonical(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_canonical(v) for v in x]
    if isinstance(x, int) and not isinstance(x, bool):
        return float(x)
    return x


def config_hash(cfg: dict) -> str:
    canon = json.dumps(_canonical(cfg), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    data: dict  # normalized config
    system: SystemSpec
    apparatus: ApparatusSpec
    schedule: tuple[float, ...]
    source_dir: Path | None = None
    protected_state: Ket | None = None
    gap: float | None = None

    @property
    def run(self) -> dict:
        return self.data["run"]

    @property
    def hash(self) -> str:
        return config_hash(self.data)

    @property
    def seed(self) -> int:
        return int(self.run["base_seed"])

    def setup(self, T: float) -> ProtectiveSetup:
        return ProtectiveSetup(
            self.system, self.apparatus, T=T,
            second_order_phase=bool(self.run["second_order_phase"]),
            strict_boundary=bool(self.run["strict_boundary"]),
            dim_cap=int(self.run["dim_cap"]),
        )


def _build_observable(block: dict, base: Path | None) -> HermitianOperator:
    keys = {"pauli", "matrix", "file"} & set(block)
    if len(keys) != 1:
        raise ConfigError("observable", "give exactly one of 'pauli', 'matrix' or 'file'")
    if "pauli" in block:
        coeffs = block["pauli"]
        if not isinstance(coeffs, dict) or not coeffs:
            raise ConfigError("observable.pauli", "expected a mapping like {x: 1.0, z: 1.0}")
        m = np.zeros((2, 2), dtype=complex)
        for axis, c in coeffs.items():
            if axis not in PAULIS:
                raise ConfigError(f"observable.pauli.{axis}", "axis must be x, y or z")
            if not isinstance(c, (int, float)) or isinstance(c, bool):
                raise ConfigError(f"observable.pauli.{axis}", f"coefficient must be real, got {c!r}")
            m = m + c * PAULIS[axis]
        return HermitianOperator(m)
    if "matrix" in block:
        return _hermitian(parse_matrix(block["matrix"], "observable.matrix"), "observable.matrix")
    return _hermitian(_load_matrix_file(block["file"], base, "observable.file"), "observable.file")


def _build_system(block: dict, O: HermitianOperator, gap_min: float, base: Path | None):
    preset = block.get("preset", "custom")
    state, gap = None, None
    if preset == "pauli-z":
        H_S = HermitianOperator(PAULIS["z"])
        n_index = block.get("n_index", 1)
    elif preset == "projector":
        if "state" not in block:
            raise ConfigError("system.state", "projector preset needs a 'state' literal")
        state = parse_ket(block["state"], "system.state")
        gap = block.get("gap", 1.0)
        if not isinstance(gap, (int, float)) or not gap > 0:
            raise ConfigError("system.gap", f"gap must be a positive number, got {gap!r}")
        H_S = protection_hamiltonian(state, float(gap))
        n_index = 0
    elif preset == "custom":
        if "matrix" in block:
            H_S = _hermitian(parse_matrix(block["matrix"], "system.matrix"), "system.matrix")
        elif "file" in block:
            H_S = _hermitian(_load_matrix_file(block["file"], base, "system.file"), "system.file")
        else:
            raise ConfigError("system", "custom preset needs 'matrix' or 'file'")
        n_index = block.get("n_index", 0)
    else:
        raise ConfigError("system.preset", f"unknown preset {preset!r}; "
                                           "expected pauli-z, projector or custom")
    if not isinstance(n_index, int) or isinstance(n_index, bool):
        raise ConfigError("system.n_index", f"must be an integer, got {n_index!r}")
    if H_S.dim != O.dim:
        raise ConfigError("observable", f"dimension {O.dim} does not match system dimension {H_S.dim}")
    try:
        return SystemSpec(H_S, O, n_index=n_index, gap_min=gap_min), state, gap
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from None


def _build_schedule(block: dict) -> tuple[float, ...]:
    if ("T" in block) == ("dyadic" in block):
        raise ConfigError("schedule", "give exactly one of 'T' (list) or 'dyadic'")
    if "T" in block:
        ts = block["T"]
        ts = ts if isinstance(ts, list) else [ts]
        if not ts:
            raise ConfigError("schedule.T", "schedule is empty")
        for i, t in enumerate(ts):
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not t > 0:
                raise ConfigError(f"schedule.T[{i}]", f"must be a positive number, got {t!r}")
        return tuple(sorted(float(t) for t in ts))
    d = block["dyadic"]
    try:
        ts = dyadic_times(int(d["start"]), int(d["stop"]), float(d.get("base", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("schedule.dyadic", f"needs integer start/stop ({exc})") from None
    if not ts:
        raise ConfigError("schedule.dyadic", "schedule is empty (stop < start)")
    return tuple(ts)


def build(raw: dict, source_dir: Path | None = None) -> ExperimentConfig:
    cfg = normalize(raw)
    run = cfg["run"]
    if run["mode"] not in ("ideal-mean", "sampled"):
        raise ConfigError("run.mode", f"expected ideal-mean or sampled, got {run['mode']!r}")
    for key in ("trials", "base_seed", "dim_cap"):
        if not isinstance(run[key], int) or isinstance(run[key], bool):
            raise ConfigError(f"run.{key}", f"must be an integer, got {run[key]!r}")
    if run["trials"] < 1:
        raise ConfigError("run.trials", "must be >= 1")
    O = _build_observable(cfg["observable"], source_dir)
    system, state, gap = _build_system(cfg["system"], O, float(run["gap_min"]), source_dir)
    app = cfg["apparatus"]
    try:
        apparatus = ApparatusSpec(d_A=int(app["d_A"]), p_max=float(app["p_max"]),
                                  x0=float(app["x0"]), sigma=float(app["sigma"]),
                                  mass_inv=float(app["mass_inv"]))
        apparatus.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError("apparatus", str(exc)) from None
    schedule = _build_schedule(cfg["schedule"])
    return ExperimentConfig(cfg, system, apparatus, schedule, source_dir, state, gap)


def load(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read, apply ``run`` overrides (e.g. from CLI flags), and validate a config file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(p), f"cannot read config: {exc}") from None
    raw = load_text(text, source=str(p))
    if overrides:
        run = dict(raw.get("run") or {})
        run.update(overrides)
        raw["run"] = run
    return build(raw, p.parent)
