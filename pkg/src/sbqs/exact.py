"""Exact references: imaginary-time evolution by eigendecomposition,
ground-state data, Uhlmann fidelity, Bures distance, and energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExtinctionError
from .linalg import check_density_matrix, dag, hermitian_eig, sqrt_psd

#: Gap below which a ground space counts as exactly degenerate.
DEGENERACY_ATOL = 1e-10

#: Normalization traces below this are treated as numerical extinction.
TRACE_FLOOR = 1e-300


@dataclass(frozen=True)
class SpectralData:
    """Ground-state summary of a Hermitian operator."""

    ground_energy: float
    ground_vector: np.ndarray
    gap: float
    spectrum: np.ndarray
    degenerate: bool


def ground(h: np.ndarray, degeneracy_atol: float = DEGENERACY_ATOL) -> SpectralData:
    """Ground energy, vector, and gap, with a deterministic phase convention
    (largest-magnitude amplitude made real positive)."""
    vals, vecs = hermitian_eig(h)
    v = vecs[:, 0].copy()
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    v = v * phase.conjugate()
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else 0.0
    return SpectralData(
        ground_energy=float(vals[0]),
        ground_vector=v,
        gap=gap,
        spectrum=vals.copy(),
        degenerate=gap < degeneracy_atol,
    )


def ground_projector(h: np.ndarray, tol: float = DEGENERACY_ATOL) -> np.ndarray:
    """Projector onto the span of eigenvectors within ``tol`` of the ground energy."""
    vals, vecs = hermitian_eig(h)
    k = int(np.sum(vals - vals[0] < tol))
    low = vecs[:, :k]
    return low @ dag(low)


def exact_ite(h: np.ndarray, rho0: np.ndarray, beta: float) -> np.ndarray:
    """Normalized imaginary-time evolution e^{-beta h} rho0 e^{-beta h} / trace.

    Computed on a spectrum shifted to start at zero, which leaves the
    normalized output unchanged while avoiding overflow at large beta.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    check_density_matrix(rho0, trace=1.0, trace_atol=1e-8)
    if beta == 0:
        return np.array(rho0, dtype=complex)
    vals, vecs = hermitian_eig(h)
    weights = np.exp(-beta * (vals - vals[0]))
    propagator = (vecs * weights) @ dag(vecs)
    out = propagator @ rho0 @ propagator
    tr = float(np.trace(out).real)
    if not tr > TRACE_FLOOR:
        raise ExtinctionError(
            f"normalization trace {tr:.3e} vanished at beta={beta}"
        )
    return out / tr


def _principal_vector(rho: np.ndarray) -> np.ndarray | None:
    """Eigenvector of a numerically pure state, else None."""
    if abs(float(np.trace(rho @ rho).real) - 1.0) > 1e-12:
        return None
    vals, vecs = hermitian_eig(rho)
    return vecs[:, -1]


def _directed_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    sa = sqrt_psd(a)
    inner = sa @ b @ sa
    vals = np.linalg.eigvalsh((inner + dag(inner)) / 2)
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))) ** 2)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped into [0, 1].

    Pure inputs take the exact expectation-value path (the general formula
    takes square roots of near-zero eigenvalues, turning their 1e-16 noise
    floor into 1e-8); the general case averages the two evaluation orders,
    which agree in exact arithmetic, so the result is symmetric by
    construction.
    """
    check_density_matrix(a, trace=1.0, trace_atol=1e-8)
    check_density_matrix(b, trace=1.0, trace_atol=1e-8)
    for first, second in ((a, b), (b, a)):
        v = _principal_vector(second)
        if v is not None:
            f = float(np.real(v.conj() @ first @ v))
            return min(max(f, 0.0), 1.0)
    f = 0.5 * (_directed_fidelity(a, b) + _directed_fidelity(b, a))
    return min(max(f, 0.0), 1.0)


def bures_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Bures distance in the D^2 = 2(1 - sqrt(F)) convention."""
    f = fidelity(a, b)
    return float(np.sqrt(2.0 * max(0.0, 1.0 - np.sqrt(f))))


def energy(h: np.ndarray, rho: np.ndarray) -> float:
    """Tr[h rho] as a real number."""
    h = np.asarray(h, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if h.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {rho.shape}")
    val = complex(np.trace(h @ rho))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has imaginary part {val.imag:.3e}")
    return float(val.real)
