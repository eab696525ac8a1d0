"""Protocol engine: controlled-SWAP channels with post-selection.

A Hamiltonian decomposition drives a Trotterized nonunitary update of the
simulator state.  Each sub-step attaches a fresh control qubit, couples the
simulator to a resource state through a controlled-SWAP channel, and
post-selects a control measurement:

- strategy "A" measures after every sub-step;
- strategies "B-local" / "B-global" defer the measurement to the end of each
  Trotter step, projecting the whole control register onto |+>^l or onto the
  uniform superposition over {all-zeros, one-hots}.  Measurements are never
  deferred across Trotter steps.

Two state representations are available: "faithful" carries the control
register explicitly (channels absorb the resources, so memory tops out at
2^l * d per strategy-B step), "effective" applies the first-order update
(I - delta*rho) directly.  "sampled" evolves like "effective" and leaves the
accept/reject randomness to :func:`sample_run`.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ExtinctionError, PlanError
from .hamiltonian import ResourceDecomposition, ResourceTerm
from .linalg import (
    RegisterLayout,
    check_density_matrix,
    dag,
    embed_operator,
    hermitian_eig,
    kron,
    qubit_layout,
)

STRATEGIES = ("A", "B-local", "B-global")
MODES = ("faithful", "effective", "sampled")

#: Post-selection probabilities at or below this end the protocol branch.
EXTINCTION_P = 1e-14

#: make_plan warns when any |delta| exceeds this.
DELTA_WARN = 0.1

#: Total qubit budget (controls + simulator) for faithful strategy-B steps.
DEFAULT_FAITHFUL_QUBIT_CAP = 12

_EIG_DROP = 1e-15


def control_state(delta: float) -> np.ndarray:
    """Exactly normalized control qubit (|0> - delta |1>)/sqrt(1 + delta^2)."""
    if not abs(delta) < 1.0:
        raise PlanError(f"|delta| = {abs(delta)} >= 1; increase the step count")
    v = np.array([1.0, -delta], dtype=complex)
    return v / np.sqrt(1.0 + delta * delta)


def cswap_channel(rho: np.ndarray, support: tuple[int, ...], n_sites: int) -> list[np.ndarray]:
    """Kraus operators on (control ⊗ simulator) for one controlled-SWAP with
    resource state ``rho``, after the resource register is traced out.

    From the eigendecomposition rho = sum_j lam_j |e_j><e_j|, the set is
    K_{k,j} = sqrt(lam_j) (delta_{kj} |0><0| ⊗ I + |1><1| ⊗ |e_j><e_k|),
    with the simulator factor embedded on the support sites.  Zero modes of
    the resource are dropped; completeness sum K†K = I is preserved to 1e-12.
    """
    rho = np.asarray(rho, dtype=complex)
    if len(set(support)) != len(support):
        raise ValueError(f"support sites must be distinct, got {support}")
    if any(s < 0 or s >= n_sites for s in support):
        raise ValueError(f"support {support} outside [0, {n_sites})")
    d_r = 2 ** len(support)
    if rho.shape != (d_r, d_r):
        raise ValueError(f"resource dim {rho.shape[0]} does not match support {support}")
    check_density_matrix(rho)

    vals, vecs = hermitian_eig(rho)
    layout = qubit_layout(n_sites)
    labels = [f"q{s}" for s in support]
    dim = 2**n_sites
    p0 = np.zeros((2, 2), dtype=complex)
    p0[0, 0] = 1.0
    p1 = np.zeros((2, 2), dtype=complex)
    p1[1, 1] = 1.0
    identity_block = np.kron(p0, np.eye(dim, dtype=complex))

    kraus = []
    for j in range(d_r):
        lam = float(vals[j])
        if lam <= _EIG_DROP:
            continue
        root = math.sqrt(lam)
        for k in range(d_r):
            jk = np.outer(vecs[:, j], vecs[:, k].conj())
            op = np.kron(p1, embed_operator(jk, layout, labels))
            if k == j:
                op = op + identity_block
            kraus.append(root * op)
    return kraus


def apply_channel(state: np.ndarray, kraus: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(state)
    for k in kraus:
        out += k @ state @ dag(k)
    return out


def _project_controls(xi: np.ndarray, control_dim: int, sim_dim: int, w: np.ndarray) -> np.ndarray:
    """<w| xi |w> over the control factor, leaving the simulator block."""
    xi4 = xi.reshape(control_dim, sim_dim, control_dim, sim_dim)
    return np.einsum("a,aibj,b->ij", w.conj(), xi4, w)


def _check_probability(p: float, step_id: str) -> float:
    if p <= EXTINCTION_P:
        raise ExtinctionError(f"post-selection probability {p:.3e} at step {step_id}")
    return min(p, 1.0)


@dataclass(frozen=True)
class StepResult:
    state: np.ndarray
    probability: float
    formula_probability: float


def step_strategy_a(
    sigma: np.ndarray,
    term: ResourceTerm,
    delta: float,
    mode: str = "faithful",
    kraus: list[np.ndarray] | None = None,
    rho_emb: np.ndarray | None = None,
) -> StepResult:
    """One measured sub-step with a single resource term.

    Faithful mode attaches the control, applies the controlled-SWAP channel,
    projects the control onto |+><+| and renormalizes; the probability is the
    pre-normalization trace.  Effective mode applies
    sigma -> (I - delta rho) sigma (I - delta rho) with probability Tr/2.
    The formula probability (the Tr/2 convention) is reported in both modes.
    """
    dim = sigma.shape[0]
    n_sites = dim.bit_length() - 1
    if rho_emb is None:
        layout = qubit_layout(n_sites)
        rho_emb = embed_operator(term.rho, layout, [f"q{s}" for s in term.support])

    a_op = np.eye(dim, dtype=complex) - delta * rho_emb
    contracted = a_op @ sigma @ dag(a_op)
    p_formula = float(np.trace(contracted).real) / 2.0

    if mode in ("effective", "sampled"):
        trace = float(np.trace(contracted).real)
        p = _check_probability(p_formula, "sub-step")
        return StepResult(contracted / trace, p, p)
    if mode != "faithful":
        raise ValueError(f"unknown mode {mode!r}")

    if kraus is None:
        kraus = cswap_channel(term.rho, term.support, n_sites)
    psi = control_state(delta)
    joint = kron(np.outer(psi, psi.conj()), sigma, cap=2 * dim)
    xi = apply_channel(joint, kraus)
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    raw = _project_controls(xi, 2, dim, plus)
    p_exact = _check_probability(float(np.trace(raw).real), "sub-step")
    return StepResult(raw / np.trace(raw).real, p_exact, p_formula)


def step_strategy_b(
    sigma: np.ndarray,
    terms: list[tuple[ResourceTerm, float]],
    measurement: str = "global",
    mode: str = "faithful",
    embedded_kraus: list[list[np.ndarray]] | None = None,
    rho_embs: list[np.ndarray] | None = None,
    qubit_cap: int = DEFAULT_FAITHFUL_QUBIT_CAP,
) -> StepResult:
    """One deferred-measurement Trotter step over all ``terms``.

    Faithful mode attaches one control per term, applies every channel, then
    projects the control register onto |+>^l ("local") or onto the uniform
    superposition over the all-zeros and one-hot basis states ("global").
    Effective mode applies A sigma A with A = I - sum_i delta_i rho_i and
    probability Tr/(l+1) (global) or Tr/2^l (local).
    """
    if measurement not in ("local", "global"):
        raise ValueError(f"measurement must be 'local' or 'global', got {measurement!r}")
    ell = len(terms)
    dim = sigma.shape[0]
    n_sites = dim.bit_length() - 1

    if rho_embs is None:
        layout = qubit_layout(n_sites)
        rho_embs = [
            embed_operator(t.rho, layout, [f"q{s}" for s in t.support]) for t, _ in terms
        ]
    a_op = np.eye(dim, dtype=complex)
    for (term, delta), emb in zip(terms, rho_embs):
        a_op = a_op - delta * emb
    contracted = a_op @ sigma @ dag(a_op)
    denom = float(ell + 1) if measurement == "global" else float(2**ell)
    p_formula = float(np.trace(contracted).real) / denom

    if mode in ("effective", "sampled"):
        trace = float(np.trace(contracted).real)
        p = _check_probability(p_formula, "step")
        return StepResult(contracted / trace, p, p)
    if mode != "faithful":
        raise ValueError(f"unknown mode {mode!r}")

    if 2**ell * dim > 2**qubit_cap:
        raise CapacityError(
            f"faithful strategy B needs {ell + n_sites} qubits > cap {qubit_cap}; "
            "use effective mode"
        )
    big_layout = RegisterLayout(
        tuple((f"c{i + 1}", 2) for i in range(ell)) + (("S", dim),)
    )
    if embedded_kraus is None:
        embedded_kraus = []
        for i, (term, _) in enumerate(terms):
            ks = cswap_channel(term.rho, term.support, n_sites)
            embedded_kraus.append(
                [embed_operator(k, big_layout, [f"c{i + 1}", "S"]) for k in ks]
            )

    controls = np.array([1.0], dtype=complex)
    for _, delta in terms:
        controls = np.kron(controls, control_state(delta))
    state = np.kron(np.outer(controls, controls.conj()), sigma)
    for ks in embedded_kraus:
        state = apply_channel(state, ks)

    c_dim = 2**ell
    if measurement == "local":
        w = np.full(c_dim, 1.0 / math.sqrt(c_dim), dtype=complex)
    else:
        w = np.zeros(c_dim, dtype=complex)
        w[0] = 1.0
        for i in range(ell):
            w[2 ** (ell - 1 - i)] = 1.0  # control i+1 set, all others zero
        w /= math.sqrt(ell + 1)
    raw = _project_controls(state, c_dim, dim, w)
    p_exact = _check_probability(float(np.trace(raw).real), "step")
    return StepResult(raw / np.trace(raw).real, p_exact, p_formula)


@dataclass(frozen=True)
class TrotterPlan:
    """Schedule of sub-steps delta_i = beta * h_i / N over a decomposition."""

    decomposition: ResourceDecomposition
    beta: float
    n_steps: int
    sub_steps: tuple[tuple[int, float], ...]
    strategy: str
    mode: str

    @property
    def ell(self) -> int:
        return len(self.sub_steps)

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(d for _, d in self.sub_steps)


def make_plan(
    decomposition: ResourceDecomposition,
    beta: float,
    n_steps: int,
    strategy: str = "A",
    mode: str = "faithful",
) -> TrotterPlan:
    """Build the Trotter schedule, rejecting |delta| >= 1 and warning above 0.1."""
    if strategy not in STRATEGIES:
        raise PlanError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if mode not in MODES:
        raise PlanError(f"mode must be one of {MODES}, got {mode!r}")
    if n_steps < 1:
        raise PlanError(f"step count must be >= 1, got {n_steps}")
    if beta < 0:
        raise PlanError(f"beta must be >= 0, got {beta}")
    sub_steps = tuple(
        (i, beta * t.weight / n_steps) for i, t in enumerate(decomposition.terms)
    )
    if sub_steps:
        worst = max(abs(d) for _, d in sub_steps)
        if worst >= 1.0:
            raise PlanError(
                f"max |delta| = {worst:.4g} >= 1 at N = {n_steps}; increase the step count"
            )
        if worst > DELTA_WARN:
            warnings.warn(
                f"max |delta| = {worst:.4g} > {DELTA_WARN}; first-order error may be large",
                stacklevel=2,
            )
    return TrotterPlan(decomposition, float(beta), int(n_steps), sub_steps, strategy, mode)


LEDGER_SOURCES = ("faithful-exact", "paper-formula")


@dataclass(frozen=True)
class LedgerEntry:
    step_id: str
    probability: float
    source: str


class ProbabilityLedger:
    """Per-step post-selection probabilities and their running products.

    Each step records the exactly computed probability ("faithful-exact") and
    the paper-convention value ("paper-formula"); in effective mode the two
    coincide.  Products are also tracked in log space so that long runs whose
    product underflows double precision stay inspectable.
    """

    def __init__(self):
        self.entries: list[LedgerEntry] = []
        self.notes: list[str] = []
        self._product = dict.fromkeys(LEDGER_SOURCES, 1.0)
        self._log_sum = dict.fromkeys(LEDGER_SOURCES, 0.0)

    def record(self, step_id: str, probability: float, source: str) -> None:
        if source not in LEDGER_SOURCES:
            raise ValueError(f"unknown source {source!r}")
        p = float(probability)
        if p > 1.0:
            if source == "faithful-exact" and p > 1.0 + 1e-12:
                raise ValueError(f"exact probability {p} > 1 at {step_id}")
            if source == "paper-formula" and p > 1.0 + 1e-12:
                self.notes.append(f"{step_id}: formula probability {p:.6g} clamped to 1")
            p = 1.0
        if p < 0.0:
            raise ValueError(f"negative probability {p} at {step_id}")
        self.entries.append(LedgerEntry(step_id, p, source))
        self._product[source] *= p
        self._log_sum[source] += math.log(p) if p > 0.0 else -math.inf

    def probabilities(self, source: str = "faithful-exact") -> list[float]:
        return [e.probability for e in self.entries if e.source == source]

    def cumulative(self, source: str = "faithful-exact") -> float:
        return self._product[source]

    def log_cumulative(self, source: str = "faithful-exact") -> float:
        return self._log_sum[source]


@dataclass(frozen=True)
class Trajectory:
    """Normalized simulator states after every Trotter step, plus bookkeeping."""

    plan: TrotterPlan
    initial_state: np.ndarray
    snapshots: tuple[np.ndarray, ...]
    ledger: ProbabilityLedger
    wall_time_s: float

    @property
    def final_state(self) -> np.ndarray:
        return self.snapshots[-1] if self.snapshots else self.initial_state


def run(
    plan: TrotterPlan,
    sigma0: np.ndarray,
    seed: int = 0,
    qubit_cap: int = DEFAULT_FAITHFUL_QUBIT_CAP,
) -> Trajectory:
    """Execute the plan on initial state ``sigma0``.

    Strategy B applies its measurement at the end of every Trotter step; the
    ledger records faithful-exact and paper-formula probabilities for each
    measurement.  Deterministic: ``seed`` only matters to :func:`sample_run`.
    """
    del seed  # deterministic conditioned on post-selection success
    t0 = time.perf_counter()
    dec = plan.decomposition
    dim = 2**dec.n
    sigma0 = np.asarray(sigma0, dtype=complex)
    if sigma0.shape != (dim, dim):
        raise ValueError(f"state shape {sigma0.shape} does not match {dec.n} sites")
    check_density_matrix(sigma0, trace=1.0, trace_atol=1e-8)

    layout = qubit_layout(dec.n)
    rho_embs = [
        embed_operator(t.rho, layout, [f"q{s}" for s in t.support]) for t in dec.terms
    ]
    steps = [(dec.terms[i], delta) for i, delta in plan.sub_steps]
    faithful = plan.mode == "faithful"

    kraus_a: list[list[np.ndarray]] | None = None
    kraus_b: list[list[np.ndarray]] | None = None
    if faithful and plan.strategy == "A":
        kraus_a = [cswap_channel(t.rho, t.support, dec.n) for t, _ in steps]
    if faithful and plan.strategy != "A" and steps:
        ell = len(steps)
        if 2**ell * dim > 2**qubit_cap:
            raise CapacityError(
                f"faithful strategy B needs {ell + dec.n} qubits > cap {qubit_cap}; "
                "use effective mode"
            )
        big_layout = RegisterLayout(
            tuple((f"c{i + 1}", 2) for i in range(ell)) + (("S", dim),)
        )
        kraus_b = []
        for i, (t, _) in enumerate(steps):
            ks = cswap_channel(t.rho, t.support, dec.n)
            kraus_b.append([embed_operator(k, big_layout, [f"c{i + 1}", "S"]) for k in ks])

    sigma = sigma0.copy()
    ledger = ProbabilityLedger()
    snapshots: list[np.ndarray] = []
    measurement = "local" if plan.strategy == "B-local" else "global"
    for step in range(plan.n_steps):
        if plan.strategy == "A":
            for k, (term, delta) in enumerate(steps):
                res = step_strategy_a(
                    sigma,
                    term,
                    delta,
                    mode=plan.mode,
                    kraus=kraus_a[k] if kraus_a is not None else None,
                    rho_emb=rho_embs[plan.sub_steps[k][0]],
                )
                sigma = res.state
                step_id = f"{step + 1}.{k + 1}"
                ledger.record(step_id, res.probability, "faithful-exact")
                ledger.record(step_id, res.formula_probability, "paper-formula")
        elif steps:
            res = step_strategy_b(
                sigma,
                steps,
                measurement=measurement,
                mode=plan.mode,
                embedded_kraus=kraus_b,
                rho_embs=[rho_embs[i] for i, _ in plan.sub_steps],
                qubit_cap=qubit_cap,
            )
            sigma = res.state
            ledger.record(f"{step + 1}", res.probability, "faithful-exact")
            ledger.record(f"{step + 1}", res.formula_probability, "paper-formula")
        snapshots.append(sigma.copy())
    return Trajectory(plan, sigma0, tuple(snapshots), ledger, time.perf_counter() - t0)


@dataclass(frozen=True)
class SampleResult:
    """Outcome of Monte Carlo post-selection sampling."""

    frequency: float
    successes: int
    trials: int
    accepted: np.ndarray = field(repr=False)
    accepted_average: np.ndarray | None
    trajectory: Trajectory


def sample_run(
    plan: TrotterPlan,
    sigma0: np.ndarray,
    trials: int,
    seed: int = 0,
) -> SampleResult:
    """Sample every post-selection measurement over ``trials`` repetitions.

    The post-selected trajectory is deterministic, so the engine runs once and
    the RNG only decides, per trial and per measurement, whether the trial
    survives.  A trial aborts at its first failed post-selection.  Zero
    successes are reported, not raised.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    trajectory = run(plan, sigma0)
    probabilities = trajectory.ledger.probabilities("faithful-exact")
    rng = np.random.default_rng(seed)
    alive = np.ones(trials, dtype=bool)
    for p in probabilities:
        n_alive = int(alive.sum())
        if n_alive == 0:
            break
        draws = rng.random(n_alive)
        survivors = draws < p
        alive[np.flatnonzero(alive)] = survivors
    successes = int(alive.sum())
    average = trajectory.final_state.copy() if successes else None
    return SampleResult(
        frequency=successes / trials,
        successes=successes,
        trials=trials,
        accepted=alive,
        accepted_average=average,
        trajectory=trajectory,
    )
