"""Experiment orchestration: beta sweeps, result rows, CSV and SVG output."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import exact
from .config import ExperimentConfig
from .engine import make_plan, run, sample_run
from .errors import ExtinctionError
from .hamiltonian import (
    IsingParams,
    ResourceDecomposition,
    build_ising,
    decompose_ising_local,
    decompose_pauli_generic,
    densify,
    protocol_operator,
    shift_to_positive,
)


@dataclass(frozen=True)
class ResultRow:
    """One beta point of a sweep.  Field order fixes the CSV header."""

    beta: float
    fidelity_sbqs_vs_ground: float
    fidelity_exact_ite_vs_ground: float
    bures_sbqs_vs_exact_ite: float
    success_prob_formula: float
    success_prob_faithful: float
    success_prob_empirical: float | None
    energy_sbqs: float
    bound_eq15: float
    fidelity_bound_sm: float
    ground_space_dim: int = 1


CSV_FIELDS = [f.name for f in fields(ResultRow)]


def uniform_state(n: int) -> np.ndarray:
    """|+>^n as a density matrix."""
    dim = 2**n
    v = np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class _Setup:
    """Shared per-experiment objects, rebuilt cheaply inside each worker."""

    h_model: np.ndarray
    h_working: np.ndarray
    h_protocol: np.ndarray
    decomposition: ResourceDecomposition
    sigma0: np.ndarray
    projector: np.ndarray
    ground_space_dim: int
    spectral: exact.SpectralData


def _prepare(config: ExperimentConfig) -> _Setup:
    if isinstance(config.model, IsingParams):
        pauli = build_ising(config.model)
    else:
        pauli = config.model
    h_model = densify(pauli)
    working = pauli
    shift = 0.0
    if config.shift_positive:
        working, shift = shift_to_positive(pauli)
    if config.decomposition == "ising-local":
        dec = decompose_ising_local(config.model)
        if shift:
            # the shift only moves the identity offset; resource terms are untouched
            dec = ResourceDecomposition(
                dec.n, dec.terms, dec.identity_offset + shift, dec.provenance
            )
    else:
        dec = decompose_pauli_generic(working)
    spectral = exact.ground(h_model)
    projector = exact.ground_projector(h_model, tol=config.degeneracy_tol)
    dim_g = int(round(np.trace(projector).real))
    return _Setup(
        h_model=h_model,
        h_working=densify(working),
        h_protocol=protocol_operator(dec),
        decomposition=dec,
        sigma0=uniform_state(dec.n),
        projector=projector,
        ground_space_dim=dim_g,
        spectral=spectral,
    )


def _compute_row(config: ExperimentConfig, beta: float, index: int) -> ResultRow:
    setup = _prepare(config)
    dec = setup.decomposition
    bound = bounds_mod.sim_distance_bound(dec.ell, beta, dec.h_max, config.n_steps)
    try:
        fid_sm = bounds_mod.fidelity_lower_bound(
            beta, setup.spectral.gap, _f0(setup), variant="sm"
        )
    except ValueError:
        fid_sm = math.nan
    try:
        plan = make_plan(dec, beta, config.n_steps, config.strategy, config.mode)
        trajectory = run(plan, setup.sigma0)
        sigma = trajectory.final_state
        reference = exact.exact_ite(setup.h_model, setup.sigma0, beta)
        empirical = None
        if config.mode == "sampled":
            empirical = sample_run(
                plan, setup.sigma0, config.trials, seed=config.seed + index
            ).frequency
        return ResultRow(
            beta=beta,
            fidelity_sbqs_vs_ground=float(np.trace(setup.projector @ sigma).real),
            fidelity_exact_ite_vs_ground=float(np.trace(setup.projector @ reference).real),
            bures_sbqs_vs_exact_ite=exact.bures_distance(sigma, reference),
            success_prob_formula=trajectory.ledger.cumulative("paper-formula"),
            success_prob_faithful=trajectory.ledger.cumulative("faithful-exact"),
            success_prob_empirical=empirical,
            energy_sbqs=exact.energy(setup.h_model, sigma),
            bound_eq15=bound,
            fidelity_bound_sm=fid_sm,
            ground_space_dim=setup.ground_space_dim,
        )
    except ExtinctionError:
        nan = math.nan
        return ResultRow(beta, nan, nan, nan, nan, nan, None, nan, bound, fid_sm,
                         setup.ground_space_dim)


def _f0(setup: _Setup) -> float:
    v = setup.spectral.ground_vector
    return float(np.real(v.conj() @ setup.sigma0 @ v))


def _row_worker(args: tuple[ExperimentConfig, float, int]) -> ResultRow:
    return _compute_row(*args)


def run_experiment(config: ExperimentConfig) -> tuple[list[ResultRow], bounds_mod.BoundsReport]:
    """One row per beta grid point, plus the bounds report at the endpoint.

    Rows are independent; with parallel width > 1 they are computed in a
    process pool and re-assembled in grid order, so the output is identical
    to a serial sweep.
    """
    jobs = [(config, beta, i) for i, beta in enumerate(config.beta_grid)]
    if config.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            rows = list(pool.map(_row_worker, jobs))
    else:
        rows = [_row_worker(job) for job in jobs]

    setup = _prepare(config)
    report = bounds_mod.build_bounds_report(
        protocol_h=setup.h_protocol,
        sigma0=setup.sigma0,
        ell=setup.decomposition.ell,
        h_max=setup.decomposition.h_max,
        beta=max(config.beta_grid),
        n_steps=config.n_steps,
        eps=config.epsilon,
        spectral=setup.spectral,
    )
    return rows, report


def _format(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".12g")


def emit_csv(rows: list[ResultRow], path: str | Path) -> Path:
    """Canonical CSV: header in field order, 12 significant digits, LF endings.

    The ground_space_dim column only appears when some row actually used a
    higher-dimensional ground-space projector.
    """
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = list(CSV_FIELDS)
    if all(r.ground_space_dim == 1 for r in rows):
        fieldnames.remove("ground_space_dim")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format(getattr(row, name)) for name in fieldnames])
    return path


def parse_csv(path: str | Path) -> list[ResultRow]:
    """Inverse of :func:`emit_csv` (used for round-trip checks)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for record in reader:
            empirical = record.get("success_prob_empirical", "")
            rows.append(
                ResultRow(
                    beta=float(record["beta"]),
                    fidelity_sbqs_vs_ground=float(record["fidelity_sbqs_vs_ground"]),
                    fidelity_exact_ite_vs_ground=float(record["fidelity_exact_ite_vs_ground"]),
                    bures_sbqs_vs_exact_ite=float(record["bures_sbqs_vs_exact_ite"]),
                    success_prob_formula=float(record["success_prob_formula"]),
                    success_prob_faithful=float(record["success_prob_faithful"]),
                    success_prob_empirical=float(empirical) if empirical else None,
                    energy_sbqs=float(record["energy_sbqs"]),
                    bound_eq15=float(record["bound_eq15"]),
                    fidelity_bound_sm=float(record["fidelity_bound_sm"]),
                    ground_space_dim=int(record.get("ground_space_dim", 1)),
                )
            )
    return rows


_SVG_SIZE = (640, 440)
_SVG_MARGIN = (60, 20, 30, 40)  # left, right, top, bottom


def emit_svg(rows: list[ResultRow], path: str | Path) -> Path:
    """Minimal line chart of both fidelity series vs beta.

    Exactly two <polyline> elements (protocol in green, exact reference in
    red); axes and ticks are drawn with <line>/<text>.
    """
    if not rows:
        raise ValueError("no rows to plot")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width, height = _SVG_SIZE
    left, right, top, bottom = _SVG_MARGIN
    x0, x1 = rows[0].beta, rows[-1].beta
    span = (x1 - x0) or 1.0

    def sx(beta: float) -> float:
        return left + (beta - x0) / span * (width - left - right)

    def sy(f: float) -> float:
        return top + (1.0 - min(max(f, 0.0), 1.0)) * (height - top - bottom)

    def points(values: list[float]) -> str:
        return " ".join(f"{sx(r.beta):.2f},{sy(v):.2f}" for r, v in zip(rows, values))

    sbqs = points([r.fidelity_sbqs_vs_ground for r in rows])
    ref = points([r.fidelity_exact_ite_vs_ground for r in rows])
    ticks = []
    for r in rows:
        x = sx(r.beta)
        ticks.append(f'<line x1="{x:.2f}" y1="{height - bottom}" x2="{x:.2f}" y2="{height - bottom + 5}" stroke="black"/>')
        ticks.append(f'<text x="{x:.2f}" y="{height - bottom + 18}" font-size="10" text-anchor="middle">{r.beta:g}</text>')
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(f)
        ticks.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        ticks.append(f'<text x="{left - 8}" y="{y + 3:.2f}" font-size="10" text-anchor="end">{f:g}</text>')
    body = "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
            f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
            *ticks,
            f'<polyline fill="none" stroke="#2ca02c" stroke-width="1.5" points="{sbqs}"/>',
            f'<polyline fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="4 3" points="{ref}"/>',
            f'<text x="{(left + width - right) / 2}" y="{height - 5}" font-size="12" text-anchor="middle">imaginary time</text>',
            f'<text x="15" y="{(top + height - bottom) / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {(top + height - bottom) / 2})">fidelity to ground</text>',
            "</svg>",
        ]
    )
    path.write_text(body + "\n")
    return path
