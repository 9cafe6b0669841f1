"""Born-rule pointer readout with collapse, single trials and Monte Carlo ensembles.

A trial reads the pointer position projectively on the grid, collapses the
joint state, and then resolves the conditional system state in the energy
eigenbasis of ``H_S``. That second draw settles whether the system ended
up back in ``|n>`` or in an orthogonal level ``|m>``.

Randomness comes from numpy's counter-based Philox generator. Trial ``i`` of
a Monte Carlo run with ``base_seed`` uses the integer seed
``derive_seed(base_seed, i)``, so ensembles replicate bit for bit and trials
can run in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .apparatus import PointerBasis
from .protective import JointState, ProtectiveSetup, evolve_exact
from .qcore import DensityMatrix, Ket

EPS_BACK = 1e-3


def derive_seed(base_seed: int, index: int) -> int:
    """Deterministic 64-bit seed for trial ``index`` of a run seeded with ``base_seed``."""
    ss = np.random.SeedSequence([int(base_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class ReadoutOutcome:
    x_sampled: float
    o_estimate: float
    post_system: DensityMatrix
    projected_back: bool
    seed: int
    level: int  # index (ascending energy) of the H_S eigenstate the system was found in
    pointer_fidelity: float  # <n|rho|n> of the pointer-conditioned state, before the level draw


@dataclass(frozen=True, eq=False)
class TrialStatistics:
    n_trials: int
    mean_estimate: float
    stderr: float
    freq_disturbed: float
    histogram: tuple[np.ndarray, np.ndarray]
    disturbance_prob: float  # analytic 1 - <n|rho_S|n> of the pre-readout state
    expectation_target: float
    n_disturbed: int

    def summary(self) -> dict:
        se = np.sqrt(self.disturbance_prob * (1 - self.disturbance_prob) / self.n_trials)
        return {
            "n_trials": self.n_trials,
            "mean_estimate": self.mean_estimate,
            "stderr": self.stderr,
            "freq_disturbed": self.freq_disturbed,
            "n_disturbed": self.n_disturbed,
            "disturbance_prob": self.disturbance_prob,
            "binomial_stderr": float(se),
            "expectation_target": self.expectation_target,
        }


def position_marginal(psi: JointState, basis: PointerBasis) -> tuple[np.ndarray, np.ndarray]:
    """Position-representation amplitudes ``(d_S, d_A)`` and the pointer marginal."""
    amps_x = basis.to_position(psi.block())
    return amps_x, np.sum(np.abs(amps_x) ** 2, axis=0)


def _draw(rng: np.random.Generator, prob: np.ndarray) -> int:
    total = prob.sum()
    if not total > 0:
        raise RuntimeError("pointer marginal vanishes; state is not normalized")
    cdf = np.cumsum(prob / total)
    return int(min(np.searchsorted(cdf, rng.random(), side="right"), len(prob) - 1))


def _sample(psi: JointState, basis: PointerBasis, rng: np.random.Generator,
            marginal=None) -> tuple[int, np.ndarray]:
    amps_x, prob = marginal if marginal is not None else position_marginal(psi, basis)
    j = _draw(rng, prob)
    cond = amps_x[:, j]
    return j, cond / np.linalg.norm(cond)


def sample_position(psi: JointState, basis: PointerBasis,
                    rng_seed: int) -> tuple[float, JointState]:
    """Projectively read the pointer position and collapse the joint state.

    Returns the sampled grid value ``x_j`` and the renormalized projection
    ``(|chi_j> (x) |x_j>)`` with ``chi_j`` the conditional system amplitudes.
    """
    j, cond = _sample(psi, basis, make_rng(rng_seed))
    collapsed = qcore.tensor(cond, basis.position_ket(j))
    return float(basis.position_values[j]), JointState(Ket.normalized(collapsed), psi.dims)


def _resolve(setup: ProtectiveSetup, psi: JointState, marginal, seed: int) -> ReadoutOutcome:
    rng = make_rng(seed)
    basis = setup.pointer
    j, cond = _sample(psi, basis, rng, marginal)
    V = setup.system.eigensystem.eigenvectors
    n = setup.system.n_index
    level_amps = V.conj().T @ cond
    level_prob = np.abs(level_amps) ** 2
    level = _draw(rng, level_prob)
    post = Ket(V[:, level]).projector()
    fid = qcore.fidelity_pure(setup.system.initial_ket, post)
    x = float(basis.position_values[j])
    return ReadoutOutcome(
        x_sampled=x,
        o_estimate=x - setup.apparatus.x0,
        post_system=post,
        projected_back=bool(fid >= 1 - EPS_BACK),
        seed=int(seed),
        level=level,
        pointer_fidelity=float(level_prob[n] / level_prob.sum()),
    )


def run_trial(setup: ProtectiveSetup, rng_seed: int) -> ReadoutOutcome:
    """Evolve, read the pointer, and find which energy level the system is left in."""
    psi = evolve_exact(setup)
    return _resolve(setup, psi, position_marginal(psi, setup.pointer), rng_seed)


def monte_carlo(setup: ProtectiveSetup, n_trials: int, base_seed: int,
                psi: JointState | None = None) -> TrialStatistics:
    """Repeat :func:`run_trial` ``n_trials`` times with counter-derived seeds.

    The exact pre-readout state is the same for every trial, so it is
    computed once (or taken from ``psi``).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    psi = evolve_exact(setup) if psi is None else psi
    marginal = position_marginal(psi, setup.pointer)
    outcomes = [_resolve(setup, psi, marginal, derive_seed(base_seed, i))
                for i in range(n_trials)]
    return aggregate(setup, psi, outcomes)


def aggregate(setup: ProtectiveSetup, psi: JointState,
              outcomes: list[ReadoutOutcome]) -> TrialStatistics:
    est = np.array([o.o_estimate for o in outcomes])
    n = len(est)
    disturbed = sum(not o.projected_back for o in outcomes)
    basis = setup.pointer
    edges = np.append(basis.position_values, basis.position_values[-1] + basis.dx) - basis.dx / 2
    counts, _ = np.histogram(est + setup.apparatus.x0, bins=edges)
    n_ket = setup.system.initial_ket
    return TrialStatistics(
        n_trials=n,
        mean_estimate=float(est.mean()),
        stderr=float(est.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        freq_disturbed=disturbed / n,
        histogram=(edges, counts),
        disturbance_prob=float(1.0 - qcore.fidelity_pure(n_ket, psi.reduced_system())),
        expectation_target=qcore.expectation(setup.system.O, n_ket),
        n_disturbed=int(disturbed),
    )
