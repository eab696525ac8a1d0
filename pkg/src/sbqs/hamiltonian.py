"""Pauli-sum Hamiltonians and their decomposition into resource states.

Covers the transverse-field Ising chain, the positivity shift, and two
decompositions of a Hamiltonian into weighted density matrices: a
site-local one specific to the Ising model and a generic one that maps
every Pauli string onto a full-register state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .linalg import DEFAULT_DIM_CAP, check_density_matrix, frobenius_norm, kron, qubit_layout

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: Single-qubit resource states: (I+X)/2 = |+><+| and (I+Z)/2 = |0><0|.
RHO_X = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
RHO_Z = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class PauliString:
    """A tensor product of Pauli letters with a real coefficient."""

    letters: str
    coefficient: float

    def __post_init__(self):
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) <= {"I"}

    def dense(self, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
        out = np.array([[self.coefficient + 0j]])
        for letter in self.letters:
            out = kron(out, PAULI[letter], cap=cap)
        return out


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator given as a sum of Pauli strings plus c * identity."""

    n: int
    terms: tuple[PauliString, ...]
    identity_offset: float = 0.0

    def __post_init__(self):
        for t in self.terms:
            if t.n != self.n:
                raise ValueError(f"term {t.letters!r} has length {t.n}, expected {self.n}")


@dataclass(frozen=True)
class IsingParams:
    """Transverse-field Ising chain: -J sum X_i X_{i+1} - B sum Z_i."""

    n: int
    J: float
    B: float
    boundary: str = "open"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 sites, got {self.n}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if self.boundary == "periodic" and self.n < 3:
            raise ValueError("periodic boundary needs n >= 3 (n = 2 would duplicate the bond)")
        if not (np.isfinite(self.J) and np.isfinite(self.B)):
            raise ValueError("J and B must be finite")

    def bonds(self) -> list[tuple[int, int]]:
        pairs = [(i, i + 1) for i in range(self.n - 1)]
        if self.boundary == "periodic":
            pairs.append((self.n - 1, 0))
        return pairs


@dataclass(frozen=True)
class ResourceTerm:
    """One weighted density matrix in a Hamiltonian decomposition."""

    weight: float
    rho: np.ndarray
    support: tuple[int, ...]
    label: str

    def __post_init__(self):
        if len(set(self.support)) != len(self.support):
            raise ValueError(f"support sites must be distinct, got {self.support}")
        d = self.rho.shape[0]
        if d != 2 ** len(self.support):
            raise ValueError(f"state dim {d} does not match {len(self.support)} qubit support")
        # terms are shared across plans and worker processes: own a frozen copy
        rho = np.array(self.rho, dtype=complex)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        check_density_matrix(rho)


@dataclass(frozen=True)
class ResourceDecomposition:
    """H = sum_i weight_i * embed(rho_i) + identity_offset * I on n qubits."""

    n: int
    terms: tuple[ResourceTerm, ...]
    identity_offset: float
    provenance: str

    def __post_init__(self):
        for t in self.terms:
            if any(s < 0 or s >= self.n for s in t.support):
                raise ValueError(f"term {t.label} has support {t.support} outside [0, {self.n})")

    @property
    def ell(self) -> int:
        return len(self.terms)

    @property
    def h_max(self) -> float:
        return max((abs(t.weight) for t in self.terms), default=0.0)


def build_ising(p: IsingParams) -> PauliSum:
    """Pauli-sum form of the transverse-field Ising chain."""
    terms = []
    for (i, j) in p.bonds():
        letters = "".join("X" if k in (i, j) else "I" for k in range(p.n))
        terms.append(PauliString(letters, -p.J))
    for i in range(p.n):
        letters = "".join("Z" if k == i else "I" for k in range(p.n))
        terms.append(PauliString(letters, -p.B))
    return PauliSum(p.n, tuple(terms))


def densify(obj: PauliSum | ResourceDecomposition, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Full 2^n x 2^n matrix, including the identity offset."""
    if isinstance(obj, PauliSum):
        dim = 2**obj.n
        if dim > cap:
            raise linalg.CapacityError(f"dense form has dimension {dim} > cap {cap}")
        out = obj.identity_offset * np.eye(dim, dtype=complex)
        for t in obj.terms:
            out += t.dense(cap=cap)
        return out
    if isinstance(obj, ResourceDecomposition):
        dim = 2**obj.n
        if dim > cap:
            raise linalg.CapacityError(f"dense form has dimension {dim} > cap {cap}")
        layout = qubit_layout(obj.n)
        out = obj.identity_offset * np.eye(dim, dtype=complex)
        for t in obj.terms:
            labels = [f"q{s}" for s in t.support]
            out += t.weight * linalg.embed_operator(t.rho, layout, labels)
        return out
    raise TypeError(f"cannot densify {type(obj).__name__}")


def shift_to_positive(h: PauliSum | np.ndarray) -> tuple[PauliSum | np.ndarray, float]:
    """Add ||h||_2 * I (Schatten-2 norm), making the operator positive while
    leaving every eigenvector, in particular the ground state, unchanged."""
    if isinstance(h, PauliSum):
        shift = frobenius_norm(densify(h))
        return replace(h, identity_offset=h.identity_offset + shift), shift
    h = np.asarray(h, dtype=complex)
    if not linalg.is_hermitian(h):
        raise linalg.NonHermitianError("positivity shift needs a Hermitian input")
    shift = frobenius_norm(h)
    return h + shift * np.eye(h.shape[0], dtype=complex), shift


def decompose_pauli_generic(h: PauliSum) -> ResourceDecomposition:
    """Map every Pauli string c*P onto the full-register state (I + sign(c) P)/2^n.

    The resulting weight |c|*2^n is always positive; each term leaves -|c|
    behind in the identity offset.  Identity strings fold into the offset
    directly.
    """
    dim = 2**h.n
    eye = np.eye(dim, dtype=complex)
    offset = h.identity_offset
    terms = []
    support = tuple(range(h.n))
    for t in h.terms:
        if t.coefficient == 0.0:
            continue
        if t.is_identity:
            offset += t.coefficient
            continue
        sign = 1.0 if t.coefficient > 0 else -1.0
        p_dense = PauliString(t.letters, 1.0).dense()
        rho = (eye + sign * p_dense) / dim
        terms.append(
            ResourceTerm(abs(t.coefficient) * dim, rho, support, f"({t.letters})")
        )
        offset -= abs(t.coefficient)
    return ResourceDecomposition(h.n, tuple(terms), offset, "pauli-generic")


def decompose_ising_local(p: IsingParams) -> ResourceDecomposition:
    """Site-local resource decomposition of the Ising chain.

    Bond terms carry weight -4J on |+><+| x |+><+|; each single-site X term
    carries +2J per bond touching the site (+4J in the bulk and on periodic
    chains, +2J on open-chain edges, which is what exact reconstruction
    requires); Z terms carry -2B on |0><0|.  Weights stay signed.
    """
    bonds = p.bonds()
    terms: list[ResourceTerm] = []
    if p.J != 0.0:
        for (i, j) in bonds:
            rho = kron(RHO_X, RHO_X)
            terms.append(ResourceTerm(-4 * p.J, rho, (i, j), f"xx({i},{j})"))
        bond_count = [0] * p.n
        for (i, j) in bonds:
            bond_count[i] += 1
            bond_count[j] += 1
        for i in range(p.n):
            if bond_count[i]:
                terms.append(ResourceTerm(2 * p.J * bond_count[i], RHO_X, (i,), f"x({i})"))
    if p.B != 0.0:
        for i in range(p.n):
            terms.append(ResourceTerm(-2 * p.B, RHO_Z, (i,), f"z({i})"))
    offset = -p.J * len(bonds) + p.B * p.n
    return ResourceDecomposition(p.n, tuple(terms), offset, "ising-local")


def protocol_operator(d: ResourceDecomposition, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """sum_i weight_i * embed(rho_i) without the identity offset.

    This is the operator the protocol actually simulates (the offset only
    rescales unnormalized states), so probability formulas must use it.
    """
    return densify(d, cap=cap) - d.identity_offset * np.eye(2**d.n, dtype=complex)


def parse_model(raw: dict) -> IsingParams | PauliSum:
    """Parse the JSON Hamiltonian description used by the CLI.

    Accepts ``{"model": "ising", "n": ..., "J": ..., "B": ..., "boundary": ...}``
    or ``{"model": "pauli", "n": ..., "terms": [{"string": ..., "coeff": ...}]}``.
    """
    if not isinstance(raw, dict):
        raise ValueError(f"model must be an object, got {type(raw).__name__}")
    kind = raw.get("model")
    if kind == "ising":
        allowed = {"model", "n", "J", "B", "boundary"}
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown model field(s): {sorted(unknown)}")
        return IsingParams(
            n=int(raw["n"]),
            J=float(raw.get("J", 1.0)),
            B=float(raw.get("B", 0.0)),
            boundary=str(raw.get("boundary", "open")),
        )
    if kind == "pauli":
        allowed = {"model", "n", "terms"}
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown model field(s): {sorted(unknown)}")
        n = int(raw["n"])
        terms = tuple(
            PauliString(str(t["string"]), float(t["coeff"])) for t in raw.get("terms", [])
        )
        return PauliSum(n, terms)
    raise ValueError(f"model must be 'ising' or 'pauli', got {kind!r}")
