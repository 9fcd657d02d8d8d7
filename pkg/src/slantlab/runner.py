"""Scenario execution engine.

Runs the requested checks in dependency order (structure, sasakian, frames,
slant, corollary31, lemma41, theorem41, theorem42), aggregates per-point
residuals into one CheckRecord per identity, and reduces everything into a
RunSummary. Records are sorted by name before emission so the output is
order-deterministic regardless of evaluation order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .ambient import (
    CheckRecord,
    TOL_ALGEBRAIC,
    TOL_FIRST_DERIVATIVE,
    default_sample_points,
    verify_sasakian,
    verify_structure,
)
from .curvature import (
    TOL_CURVATURE,
    curvature_symmetry_records,
    lemma41_residuals,
    nabla_T,
    nabla_q_identity_records,
    nabla_q_norm,
    riemann,
    sectional_xi,
    slant_from_curvature,
)
from .dsl.scenario import Scenario
from .errors import UsageError
from .slant import (
    CLASS_ANTI_INVARIANT,
    CLASS_PROPER_SLANT,
    PROPER_SLANT_RESIDUAL_TOL,
    SlantReport,
    d_eigenvectors,
    metric_identities,
    q_operator,
    q_spectrum,
    slant_fit,
    theorem31_check,
)
from .submanifold import frame_at, phi_split

STATUS_PASS = "pass"
STATUS_CHECK_FAILED = "check-failed"
STATUS_USAGE_ERROR = "usage-error"

# Non-parallel side of the parallel-Q classification: a generic point of a
# non-anti-invariant submanifold must show at least this much of nabla Q.
NONPARALLEL_FLOOR = 1e-2


@dataclass(frozen=True)
class RunSummary:
    scenario_name: str
    records: tuple[CheckRecord, ...]
    slant_report: SlantReport | None
    wall_time: float
    exit_status: str


class _Aggregator:
    """Max-reduce residuals per record name across sample points."""

    def __init__(self):
        self.worst: dict[str, tuple[float, float, int, tuple]] = {}

    def add(self, rec: CheckRecord):
        prev = self.worst.get(rec.name)
        if prev is None or rec.max_residual >= prev[0]:
            self.worst[rec.name] = (
                rec.max_residual,
                rec.tolerance,
                (prev[2] if prev else 0) + rec.samples,
                rec.worst_point,
            )
        else:
            self.worst[rec.name] = (prev[0], prev[1], prev[2] + rec.samples, prev[3])

    def records(self) -> list[CheckRecord]:
        return [
            CheckRecord.from_residual(name, resid, tol, n, point)
            for name, (resid, tol, n, point) in self.worst.items()
        ]


def _required_margin(checks, cfg) -> float:
    margin = 2.0 * cfg.step
    if any(c in checks for c in ("slant", "corollary31")):
        margin = max(margin, 4.0 * cfg.step)
    if any(c in checks for c in ("lemma41", "theorem41", "theorem42")):
        margin = max(margin, 2.0 * (cfg.second_order_step + 2.0 * cfg.step), 8.0 * cfg.step)
    return margin


def run_scenario(scn: Scenario) -> RunSummary:
    start = time.perf_counter()
    tolerances = dict(scn.tolerances)

    def tol(name, default):
        return tolerances.get(name, default)

    records: list[CheckRecord] = []
    slant_report: SlantReport | None = None
    s = scn.ambient

    if "structure" in scn.checks or "sasakian" in scn.checks:
        chart_points = default_sample_points(s.dim, scn.sample_count, scn.seed)
        if "structure" in scn.checks:
            records.extend(
                verify_structure(s, chart_points, tol("structure", TOL_ALGEBRAIC))
            )
        if "sasakian" in scn.checks:
            records.extend(
                verify_sasakian(
                    s,
                    chart_points,
                    scn.fd,
                    tol("sasakian", TOL_FIRST_DERIVATIVE),
                    rng=np.random.default_rng(scn.seed),
                )
            )

    sub_checks = [c for c in scn.checks if c not in ("structure", "sasakian")]
    if sub_checks:
        f = scn.immersion
        if f is None:
            raise UsageError(f"checks {sub_checks} require an immersion")
        margin = _required_margin(sub_checks, scn.fd)
        if scn.grid is not None:
            params = [np.asarray(pt, dtype=float) for pt in scn.grid]
            for pt in params:
                f.require_interior(pt, margin)
        else:
            params = f.sample_parameters(scn.sample_count, scn.seed, margin)

        point_data = []
        for u in params:
            frame = frame_at(s, f, u, scn.fd)
            point_data.append((frame, phi_split(s, frame)))
        fit = slant_fit(point_data, residual_tolerance=tol("slant", PROPER_SLANT_RESIDUAL_TOL))
        slant_report = fit

        if "slant" in scn.checks:
            records.extend(_slant_records(point_data, fit, tol))
        if "corollary31" in scn.checks:
            agg = _Aggregator()
            rng = np.random.default_rng(scn.seed)
            for frame, split in point_data:
                for rec in metric_identities(
                    split, frame, fit.theta, rng=rng,
                    tolerance=tol("corollary31", TOL_FIRST_DERIVATIVE),
                ):
                    agg.add(rec)
            records.extend(agg.records())

        curvature_checks = [c for c in sub_checks if c.startswith("theorem4") or c == "lemma41"]
        if curvature_checks:
            records.extend(
                _curvature_records(s, f, params, point_data, fit, scn, tol)
            )

    records.sort(key=lambda r: r.name)
    all_passed = all(r.passed for r in records)
    wall = time.perf_counter() - start
    return RunSummary(
        scenario_name=scn.name,
        records=tuple(records),
        slant_report=slant_report,
        wall_time=wall,
        exit_status=STATUS_PASS if all_passed else STATUS_CHECK_FAILED,
    )


def _slant_records(point_data, fit: SlantReport, tol) -> list[CheckRecord]:
    range_resid = (0.0, point_data[0][0].base_param)
    parity_resid = (0.0, point_data[0][0].base_param)
    ortho_resid = (0.0, point_data[0][0].base_param)
    angle_resid = (0.0, point_data[0][0].base_param)
    eig_consistency = (0.0, point_data[0][0].base_param)
    for frame, split in point_data:
        q = q_operator(split)
        spectrum = q_spectrum(q, frame)
        for lam, mult in spectrum:
            outside = max(lam, 0.0) if lam > 0 else max(-1.0 - lam, 0.0)
            if outside >= range_resid[0]:
                range_resid = (outside, frame.base_param)
            if lam != 0.0 and mult % 2 == 1:
                parity_resid = (1.0, frame.base_param)
            if lam != 0.0 and fit.classification == CLASS_PROPER_SLANT:
                gap = abs(fit.lambda_fit + lam)
                if gap >= eig_consistency[0]:
                    eig_consistency = (gap, frame.base_param)
        for lam, vec in d_eigenvectors(q, frame):
            if lam == 0.0:
                continue
            ortho = abs(float(vec @ frame.metric_chart @ frame.xi_chart))
            if ortho >= ortho_resid[0]:
                ortho_resid = (ortho, frame.base_param)
        rec = theorem31_check(split, frame)
        if rec.max_residual >= angle_resid[0]:
            angle_resid = (rec.max_residual, frame.base_param)
    n = len(point_data)
    return [
        CheckRecord.from_residual(
            "slant-fit-residual", fit.fit_residual,
            tol("slant", PROPER_SLANT_RESIDUAL_TOL), n, point_data[-1][0].base_param,
        ),
        CheckRecord.from_residual("slant-q-spectrum-range", range_resid[0], 1e-6, n, range_resid[1]),
        CheckRecord.from_residual("slant-q-even-multiplicity", parity_resid[0], 0.0, n, parity_resid[1]),
        CheckRecord.from_residual(
            "slant-eigenvector-xi-orthogonality", ortho_resid[0], 1e-8, n, ortho_resid[1]
        ),
        CheckRecord.from_residual("slant-eigen-angle-identity", angle_resid[0], 1e-6, n, angle_resid[1]),
        CheckRecord.from_residual(
            "slant-lambda-eigenvalue-consistency", eig_consistency[0], 1e-8, n, eig_consistency[1]
        ),
    ]


def _curvature_records(s, f, params, point_data, fit, scn: Scenario, tol) -> list[CheckRecord]:
    agg = _Aggregator()
    rng = np.random.default_rng(scn.seed)
    cos_sq = math.cos(fit.theta) ** 2
    sectional_all = []
    precomputed = []
    nabq_worst = (0.0, params[0])
    want_lemma = "lemma41" in scn.checks
    want_41 = "theorem41" in scn.checks
    want_42 = "theorem42" in scn.checks
    for (frame, split), u in zip(point_data, params):
        data = None
        if want_lemma or want_42:
            data = riemann(s, f, u, scn.fd)
            for rec in curvature_symmetry_records(data, u):
                agg.add(rec)
        deriv = None
        if want_lemma or want_41:
            deriv = nabla_T(s, f, u, scn.fd)
        if want_lemma:
            for rec in lemma41_residuals(
                s, f, u, scn.fd, tolerance=tol("lemma41", TOL_CURVATURE),
                rng=rng, data=data, deriv=deriv,
            ):
                agg.add(rec)
        if want_41:
            qnorm = nabla_q_norm(deriv)
            if qnorm >= nabq_worst[0]:
                nabq_worst = (qnorm, u)
            for rec in nabla_q_identity_records(deriv, fit.theta, u):
                agg.add(rec)
        if want_42:
            point_ks = [
                sectional_xi(s, f, u, frame.d_basis[:, a], scn.fd, data=data, frame=frame)
                for a in range(frame.d_basis.shape[1])
            ]
            sectional_all.append((u, point_ks))
            precomputed.append((frame, data))
    records = agg.records()
    if want_41:
        if fit.classification == CLASS_ANTI_INVARIANT:
            records.append(
                CheckRecord.from_residual(
                    "theorem41-Q-parallel", nabq_worst[0],
                    tol("theorem41", 1e-5), len(params), nabq_worst[1],
                )
            )
        else:
            shortfall = max(0.0, NONPARALLEL_FLOOR - nabq_worst[0])
            records.append(
                CheckRecord.from_residual(
                    "theorem41-Q-nonparallel", shortfall, 0.0, len(params), nabq_worst[1]
                )
            )
    if want_42:
        w_sect = (0.0, params[0])
        w_spread = (0.0, params[0])
        for u, point_ks in sectional_all:
            for k_val in point_ks:
                gap = abs(k_val - cos_sq)
                if gap >= w_sect[0]:
                    w_sect = (gap, u)
            spread = max(point_ks) - min(point_ks) if len(point_ks) > 1 else 0.0
            if spread >= w_spread[0]:
                w_spread = (spread, u)
        records.append(
            CheckRecord.from_residual(
                "theorem42-sectional-vs-cos2theta", w_sect[0],
                tol("theorem42", TOL_CURVATURE), len(params), w_sect[1],
            )
        )
        records.append(
            CheckRecord.from_residual(
                "theorem42-plane-independence", w_spread[0], 5e-4, len(params), w_spread[1]
            )
        )
        _, cross = slant_from_curvature(
            s, f, params, scn.fd, precomputed=precomputed, direct=fit
        )
        records.append(cross)
    return records
