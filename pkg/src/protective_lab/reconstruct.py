"""Protective tomography of a single qubit.

Three protective measurements, one per Pauli axis, give the Bloch vector
``n_i = Tr[sigma_i rho]``; ``rho = (I + n . sigma) / 2`` then fixes the state.
The target state is protected by ``H_S = -gap |psi><psi|``.

In ``"sampled"`` mode a single system is measured three times in a row. Each
axis uses a fresh pointer, and the system state found after one readout is
the input of the next. The result records whether the system stayed in
``psi`` throughout, which none of the pointer readings reveal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .apparatus import ApparatusSpec
from .protective import (JointState, ProtectiveSetup, SystemSpec, analyze, evolve_exact,
                         protection_hamiltonian)
from .qcore import PAULIS, DensityMatrix, Ket
from .readout import _resolve, derive_seed, position_marginal

AXES = ("x", "y", "z")
MODES = ("ideal-mean", "sampled")
CLIP_REPORT_TOL = 1e-9


@dataclass(frozen=True)
class BlochVector:
    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-6:
            raise ValueError(f"Bloch vector norm {self.norm():.6g} exceeds 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz], dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm([self.nx, self.ny, self.nz]))

    @classmethod
    def clipped(cls, vec) -> tuple["BlochVector", bool]:
        """Scale ``vec`` into the unit ball.

        The flag reports whether the norm exceeded 1 by more than rounding
        (``CLIP_REPORT_TOL``); smaller excesses are still rescaled silently.
        """
        v = np.asarray(vec, dtype=float)
        r = np.linalg.norm(v)
        if r > 1:
            return cls(*(v / r)), bool(r > 1 + CLIP_REPORT_TOL)
        return cls(*v), False


def reconstruct_density(bloch) -> DensityMatrix:
    """``(I + n_x sigma_x + n_y sigma_y + n_z sigma_z) / 2``, projected if ``|n| > 1``."""
    v = bloch.as_array() if isinstance(bloch, BlochVector) else np.asarray(bloch, dtype=float)
    r = np.linalg.norm(v)
    if r > 1:
        v = v / r
    m = 0.5 * (np.eye(2) + v[0] * PAULIS["x"] + v[1] * PAULIS["y"] + v[2] * PAULIS["z"])
    return DensityMatrix(m)


def bloch_of(rho) -> BlochVector:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a qubit density matrix, got shape {m.shape}")
    return BlochVector(*(float(np.trace(PAULIS[a] @ m).real) for a in AXES))


@dataclass(frozen=True, eq=False)
class TomographyResult:
    bloch: BlochVector
    rho_hat: DensityMatrix
    fidelity_true: float
    mode: str
    per_axis_records: list[dict]
    raw_estimate: np.ndarray
    clipped: bool
    survived: bool  # system never left psi_true (always True in ideal-mean mode)
    final_fidelity: float  # <psi_true|rho|psi_true> of the system after the last axis

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "nx": self.bloch.nx, "ny": self.bloch.ny, "nz": self.bloch.nz,
            "fidelity_true": self.fidelity_true,
            "clipped": self.clipped,
            "survived": self.survived,
            "final_fidelity": self.final_fidelity,
        }


@dataclass(eq=False)
class TomographyModel:
    """Per-axis protective setups for one target state, with cached exact evolutions.

    Sampled runs only ever start an axis from ``psi_true`` (level 0) or its
    orthogonal complement (level 1), so six exact evolutions serve any
    number of runs.
    """

    psi_true: Ket
    gap: float
    T: float
    apparatus: ApparatusSpec = field(default_factory=ApparatusSpec)
    _states: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not isinstance(self.psi_true, Ket):
            self.psi_true = Ket(self.psi_true)
        if self.psi_true.dim != 2:
            raise ValueError("protective tomography is implemented for qubits only")
        self.H_S = protection_hamiltonian(self.psi_true, self.gap)

    def setup(self, axis: str, level: int = 0) -> ProtectiveSetup:
        system = SystemSpec(self.H_S, PAULIS[axis], n_index=level)
        return ProtectiveSetup(system, self.apparatus, T=self.T)

    def state(self, axis: str, level: int) -> tuple[ProtectiveSetup, JointState, tuple]:
        key = (axis, level)
        if key not in self._states:
            setup = self.setup(axis, level)
            psi = evolve_exact(setup)
            self._states[key] = (setup, psi, position_marginal(psi, setup.pointer))
        return self._states[key]

    def disturbance(self, axis: str, level: int = 0) -> float:
        setup, psi, _ = self.state(axis, level)
        ref = setup.system.initial_ket
        return 1.0 - qcore.fidelity_pure(ref, psi.reduced_system())

    def survival_probability(self) -> float:
        """Product over axes of ``<psi|rho_S|psi>`` starting from ``psi_true``."""
        return float(np.prod([1.0 - self.disturbance(a, 0) for a in AXES]))

    def run(self, mode: str = "ideal-mean", seed: int = 0) -> TomographyResult:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        records = []
        estimates = []
        level = 0
        survived = True
        for k, axis in enumerate(AXES):
            if mode == "ideal-mean":
                rep = analyze(self.setup(axis, 0))
                est = rep.pointer_shift
                records.append({"axis": axis, "estimate": est,
                                "disturbance_prob": rep.disturbance_prob,
                                "validity_indicator": rep.validity_indicator})
            else:
                setup, psi, marginal = self.state(axis, level)
                trial_seed = derive_seed(seed, k)
                out = _resolve(setup, psi, marginal, trial_seed)
                est = out.o_estimate
                records.append({"axis": axis, "estimate": est, "x_sampled": out.x_sampled,
                                "start_level": level, "end_level": out.level,
                                "disturbance_prob": self.disturbance(axis, level),
                                "seed": trial_seed})
                level = out.level
                survived = survived and level == 0
            estimates.append(est)
        raw = np.array(estimates)
        bloch, clipped = BlochVector.clipped(raw)
        rho_hat = reconstruct_density(bloch)
        final = 1.0 if level == 0 else 0.0
        return TomographyResult(
            bloch=bloch,
            rho_hat=rho_hat,
            fidelity_true=qcore.fidelity_pure(self.psi_true, rho_hat),
            mode=mode,
            per_axis_records=records,
            raw_estimate=raw,
            clipped=clipped,
            survived=survived,
            final_fidelity=final,
        )


def protective_tomography(psi_true, gap: float, T: float, mode: str = "ideal-mean",
                          seed: int = 0, apparatus: ApparatusSpec | None = None) -> TomographyResult:
    """Reconstruct a qubit state from three protective measurements."""
    model = TomographyModel(psi_true if isinstance(psi_true, Ket) else Ket(psi_true),
                            gap, T, apparatus or ApparatusSpec())
    return model.run(mode, seed)


def tomography_ensemble(psi_true, gap: float, T: float, n_runs: int, base_seed: int,
                        apparatus: ApparatusSpec | None = None) -> dict:
    """Many independent sampled-mode runs; compares survival frequency with theory."""
    model = TomographyModel(psi_true if isinstance(psi_true, Ket) else Ket(psi_true),
                            gap, T, apparatus or ApparatusSpec())
    results = [model.run("sampled", derive_seed(base_seed, i)) for i in range(n_runs)]
    n_survived = sum(r.survived for r in results)
    p = model.survival_probability()
    return {
        "n_runs": n_runs,
        "freq_survived": n_survived / n_runs,
        "n_survived": n_survived,
        "predicted_survival": p,
        "binomial_stderr": float(np.sqrt(p * (1 - p) / n_runs)),
        "per_axis_disturbance": {a: model.disturbance(a, 0) for a in AXES},
        "mean_fidelity": float(np.mean([r.fidelity_true for r in results])),
        "results": results,
    }
