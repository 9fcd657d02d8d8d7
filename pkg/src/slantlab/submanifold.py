"""Immersed submanifolds with the structure field tangent.

A PointFrame carries everything the slant and curvature layers need at one
parameter point: the pushforward tangent basis, a metric-orthonormal normal
basis, the induced metric, the coefficients of xi in the tangent frame, and
a metric-orthonormal basis of the spacelike distribution D (the tangent
complement of xi).

Conventions used throughout:

* Tangent vectors are stored either as chart components (length 2n+1) or as
  frame coefficients (length m) with respect to the pushforward basis.
* The normal bundle is spacelike because xi is tangent and timelike, so the
  normal basis can always be metric-orthonormalized.
* Fields along the submanifold are differentiated with the pullback of the
  ambient connection; frame vectors are extended as coordinate fields of
  the parameter chart, whose brackets vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ambient import AmbientStructure, CheckRecord, christoffel
from .errors import (
    ContractError,
    DegenerateFrameError,
    DegenerateImmersionError,
    DegenerateMetricError,
    EvaluationError,
    UsageError,
    XiNotTangentError,
)
from .tensor_core import FDConfig, fd_jacobian

XI_TANGENT_TOL = 1e-8


@dataclass(frozen=True)
class Immersion:
    """Smooth map from an m-dimensional parameter box into the ambient chart."""

    name: str
    m: int
    ambient_dim: int
    mapping: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    domain_box: tuple[tuple[float, float], ...] = ((-1.0, 1.0),) * 3

    def __post_init__(self):
        if len(self.domain_box) != self.m:
            raise UsageError(
                f"domain box has {len(self.domain_box)} intervals for {self.m} parameters"
            )
        for lo, hi in self.domain_box:
            if not lo < hi:
                raise UsageError(f"empty domain interval [{lo}, {hi}]")

    def evaluate(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        p = np.asarray(self.mapping(u), dtype=float)
        if p.shape != (self.ambient_dim,):
            raise EvaluationError(
                f"immersion returned shape {p.shape}, expected ({self.ambient_dim},)",
                point=u,
            )
        if not np.all(np.isfinite(p)):
            raise EvaluationError("immersion returned non-finite values", point=u)
        return p

    def require_interior(self, u, margin: float):
        """All FD stencils must stay inside the box: reject points too close
        to the boundary rather than fall back to one-sided differences."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            raise UsageError(f"parameter point has shape {u.shape}, expected ({self.m},)")
        for i, (lo, hi) in enumerate(self.domain_box):
            if u[i] < lo + margin or u[i] > hi - margin:
                raise EvaluationError(
                    f"parameter {u[i]:.6g} in coordinate {i} is within {margin:.3g} "
                    f"of the domain boundary [{lo}, {hi}]",
                    point=u,
                    coordinate=i,
                )

    def sample_parameters(self, count: int, seed: int, margin: float = 0.0):
        """Reproducible uniform parameter samples, shrunk by ``margin``."""
        rng = np.random.default_rng(seed)
        lows = np.array([lo + margin for lo, _ in self.domain_box])
        highs = np.array([hi - margin for _, hi in self.domain_box])
        if np.any(lows >= highs):
            raise UsageError("domain box too small for the requested FD margin")
        return [rng.uniform(lows, highs) for _ in range(count)]


@dataclass(frozen=True)
class PointFrame:
    """Adapted bases and induced metric at one parameter point."""

    base_param: np.ndarray
    base: np.ndarray
    tangent_basis: np.ndarray = field(repr=False)   # (dim, m) columns
    normal_basis: np.ndarray = field(repr=False)    # (dim, dim-m) columns
    induced_metric: np.ndarray = field(repr=False)  # (m, m)
    xi_in_frame: np.ndarray = field(repr=False)     # (m,)
    d_basis: np.ndarray = field(repr=False)         # (dim, m-1) chart components
    d_in_frame: np.ndarray = field(repr=False)      # (m, m-1) frame coefficients
    metric_chart: np.ndarray = field(repr=False)    # ambient metric at base
    xi_chart: np.ndarray = field(repr=False)
    eta_chart: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.tangent_basis.shape[1]

    def tangent_coords(self, v_chart) -> np.ndarray:
        """Frame coefficients of the tangential projection of a chart vector."""
        rhs = self.tangent_basis.T @ self.metric_chart @ np.asarray(v_chart, dtype=float)
        return np.linalg.solve(self.induced_metric, rhs)

    def push(self, coeffs) -> np.ndarray:
        return self.tangent_basis @ np.asarray(coeffs, dtype=float)

    def normal_coords(self, v_chart) -> np.ndarray:
        """Coefficients in the orthonormal normal basis."""
        return self.normal_basis.T @ self.metric_chart @ np.asarray(v_chart, dtype=float)

    def project_tangent(self, v_chart) -> np.ndarray:
        return self.push(self.tangent_coords(v_chart))

    def project_normal(self, v_chart) -> np.ndarray:
        return np.asarray(v_chart, dtype=float) - self.project_tangent(v_chart)

    def inner_frame(self, a, b) -> float:
        """Induced metric pairing of frame-coefficient vectors."""
        return float(np.asarray(a) @ self.induced_metric @ np.asarray(b))

    def eta_frame(self) -> np.ndarray:
        """Induced one-form dual to xi in frame coefficients."""
        return -(self.induced_metric @ self.xi_in_frame)


@dataclass(frozen=True)
class PhiSplit:
    """Tangential/normal decomposition of phi in an adapted frame."""

    tangential: np.ndarray = field(repr=False)      # T, (m, m) frame coords
    normal: np.ndarray = field(repr=False)          # N, (dim-m, m) normal coords
    normal_to_tangent: np.ndarray = field(repr=False)  # t, (m, dim-m)
    normal_to_normal: np.ndarray = field(repr=False)   # n, (dim-m, dim-m)


@dataclass(frozen=True)
class SecondFundamental:
    """Second fundamental form, shape operators, and the induced connection."""

    h: np.ndarray = field(repr=False)            # (m, m, dim-m) normal coefficients
    shape_ops: np.ndarray = field(repr=False)    # (dim-m, m, m), one matrix per normal
    tangential_connection: np.ndarray = field(repr=False)  # (m, m, m): [k, i, j]
    frame: PointFrame


def _gram_schmidt_greedy(g, candidates, want, context):
    """Metric Gram-Schmidt over candidate vectors, keeping the first
    ``want`` independent spacelike directions."""
    out = []
    for v in candidates:
        u = np.asarray(v, dtype=float).copy()
        for e in out:
            u = u - float(u @ g @ e) * e
        q = float(u @ g @ u)
        if q > 1e-10:
            out.append(u / np.sqrt(q))
        if len(out) == want:
            return out
    raise DegenerateFrameError(
        f"could not build {want} spacelike directions for {context} (got {len(out)})"
    )


def frame_at(
    s: AmbientStructure, f: Immersion, u, cfg: FDConfig = FDConfig()
) -> PointFrame:
    """Adapted frame of the immersion at parameter u.

    The pushforward basis comes from the FD Jacobian; the normal basis is the
    metric-orthonormalized complement; xi is resolved in the tangent frame
    (raising XiNotTangentError when its normal part exceeds tolerance); and
    the spacelike distribution D is orthonormalized inside the tangent space.
    """
    u = np.asarray(u, dtype=float)
    if f.ambient_dim != s.dim:
        raise UsageError(
            f"immersion targets dimension {f.ambient_dim}, ambient has {s.dim}"
        )
    f.require_interior(u, 2.0 * cfg.step)
    p = f.evaluate(u)
    jac, _ = fd_jacobian(f.mapping, u, cfg)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[-1] < 1e-10 * max(1.0, sv[0]):
        raise DegenerateImmersionError(
            f"Jacobian rank below {f.m} at parameter {u} (sigma_min={sv[-1]:.3e})"
        )
    g = s.metric(p)
    gm = jac.T @ g @ jac
    try:
        gm_inv = np.linalg.inv(gm)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError(f"induced metric singular at parameter {u}")
    xi = s.xi(p)
    coeffs = gm_inv @ (jac.T @ g @ xi)
    normal_part = xi - jac @ coeffs
    resid = math.sqrt(abs(float(normal_part @ g @ normal_part)))
    if resid > XI_TANGENT_TOL:
        raise XiNotTangentError(
            f"structure field is not tangent at parameter {u} (residual {resid:.3e})"
        )
    xi_sq = float(xi @ g @ xi)
    if abs(xi_sq + 1.0) > 1e-8:
        raise ContractError(f"structure field norm g(xi,xi)={xi_sq} is not -1")

    def project_out_tangent(v):
        return v - jac @ (gm_inv @ (jac.T @ g @ v))

    normals = _gram_schmidt_greedy(
        g,
        [project_out_tangent(col) for col in np.eye(s.dim)],
        s.dim - f.m,
        "the normal bundle",
    )
    # D = tangent complement of xi: remove the xi component (g(xi,xi) = -1)
    d_candidates = [
        jac[:, i] + float(jac[:, i] @ g @ xi) * xi for i in range(f.m)
    ]
    d_vecs = _gram_schmidt_greedy(g, d_candidates, f.m - 1, "the slant distribution")
    d_mat = np.stack(d_vecs, axis=1) if d_vecs else np.zeros((s.dim, 0))
    d_in_frame = np.stack(
        [np.linalg.solve(gm, jac.T @ g @ v) for v in d_vecs], axis=1
    ) if d_vecs else np.zeros((f.m, 0))
    return PointFrame(
        base_param=u,
        base=p,
        tangent_basis=jac,
        normal_basis=np.stack(normals, axis=1),
        induced_metric=gm,
        xi_in_frame=coeffs,
        d_basis=d_mat,
        d_in_frame=d_in_frame,
        metric_chart=g,
        xi_chart=xi,
        eta_chart=s.eta(p),
    )


def phi_split(s: AmbientStructure, frame: PointFrame) -> PhiSplit:
    """Decompose phi into tangential and normal parts on the adapted frame."""
    phi = s.phi(frame.base)
    m = frame.m
    k = frame.normal_basis.shape[1]
    t_mat = np.zeros((m, m))
    n_mat = np.zeros((k, m))
    for i in range(m):
        image = phi @ frame.tangent_basis[:, i]
        t_mat[:, i] = frame.tangent_coords(image)
        n_mat[:, i] = frame.normal_coords(image)
        recon = frame.push(t_mat[:, i]) + frame.normal_basis @ n_mat[:, i]
        if np.max(np.abs(recon - image)) > 1e-9:
            raise ContractError("phi image does not split into tangent plus normal")
    tt_mat = np.zeros((m, k))
    nn_mat = np.zeros((k, k))
    for j in range(k):
        image = phi @ frame.normal_basis[:, j]
        tt_mat[:, j] = frame.tangent_coords(image)
        nn_mat[:, j] = frame.normal_coords(image)
        recon = frame.push(tt_mat[:, j]) + frame.normal_basis @ nn_mat[:, j]
        if np.max(np.abs(recon - image)) > 1e-9:
            raise ContractError("phi image does not split into tangent plus normal")
    return PhiSplit(
        tangential=t_mat,
        normal=n_mat,
        normal_to_tangent=tt_mat,
        normal_to_normal=nn_mat,
    )


def pullback_derivative(
    s: AmbientStructure,
    f: Immersion,
    field_fn: Callable[[np.ndarray], np.ndarray],
    u,
    i: int,
    cfg: FDConfig,
    gamma: np.ndarray | None = None,
    tangent_i: np.ndarray | None = None,
) -> np.ndarray:
    """Ambient covariant derivative of a chart-vector field along the i-th
    parameter direction, using the pullback connection."""
    u = np.asarray(u, dtype=float)
    if gamma is None:
        gamma = christoffel(s, f.evaluate(u), cfg).symbols
    if tangent_i is None:
        jac, _ = fd_jacobian(f.mapping, u, cfg)
        tangent_i = jac[:, i]

    def restricted(t):
        q = u.copy()
        q[i] = t[0]
        return field_fn(q)

    dfield, _ = fd_jacobian(restricted, np.array([u[i]]), cfg)
    return dfield[:, 0] + np.einsum("kab,a,b->k", gamma, tangent_i, field_fn(u))


def second_fundamental(
    s: AmbientStructure, f: Immersion, u, cfg: FDConfig = FDConfig()
) -> SecondFundamental:
    """Second fundamental form and shape operators at parameter u.

    h(E_i, E_j) is the normal projection of the ambient derivative of the
    coordinate frame fields; the shape operators are recovered through the
    metric duality with h; the tangential projection gives the induced
    connection coefficients.
    """
    u = np.asarray(u, dtype=float)
    f.require_interior(u, 2.0 * (cfg.step + cfg.step))
    frame = frame_at(s, f, u, cfg)
    gamma = christoffel(s, frame.base, cfg).symbols
    m = f.m
    k = frame.normal_basis.shape[1]
    h = np.zeros((m, m, k))
    conn = np.zeros((m, m, m))

    def frame_field(j):
        def field_fn(q):
            jac_q, _ = fd_jacobian(f.mapping, q, cfg)
            return jac_q[:, j]

        return field_fn

    for j in range(m):
        fj = frame_field(j)
        for i in range(m):
            amb = pullback_derivative(
                s, f, fj, u, i, cfg, gamma=gamma, tangent_i=frame.tangent_basis[:, i]
            )
            h[i, j, :] = frame.normal_coords(amb)
            conn[:, i, j] = frame.tangent_coords(amb)
    shape_ops = np.zeros((k, m, m))
    gm_inv = np.linalg.inv(frame.induced_metric)
    for v in range(k):
        shape_ops[v] = gm_inv @ h[:, :, v]
    return SecondFundamental(
        h=h, shape_ops=shape_ops, tangential_connection=conn, frame=frame
    )


def xi_identities(
    s: AmbientStructure,
    f: Immersion,
    u,
    cfg: FDConfig = FDConfig(),
    tolerance: float = 1e-5,
) -> list[CheckRecord]:
    """Residuals of the tangential/normal split of the xi transport law.

    On a Sasakian-calibrated ambient, the tangential part of the ambient
    xi-derivative along the submanifold is TX and the normal part is the
    second fundamental form paired with xi, i.e. NX.
    """
    u = np.asarray(u, dtype=float)
    frame = frame_at(s, f, u, cfg)
    split = phi_split(s, frame)
    gamma = christoffel(s, frame.base, cfg).symbols
    xi_field = lambda q: s.xi(f.evaluate(q))
    r_tan = 0.0
    r_nor = 0.0
    for i in range(f.m):
        amb = pullback_derivative(
            s, f, xi_field, u, i, cfg, gamma=gamma, tangent_i=frame.tangent_basis[:, i]
        )
        tan = frame.project_tangent(amb)
        nor = amb - tan
        r_tan = max(r_tan, float(np.max(np.abs(tan - frame.push(split.tangential[:, i])))))
        r_nor = max(
            r_nor,
            float(np.max(np.abs(nor - frame.normal_basis @ split.normal[:, i]))),
        )
    return [
        CheckRecord.from_residual("xi-transport-tangential", r_tan, tolerance, 1, u),
        CheckRecord.from_residual("xi-transport-normal", r_nor, tolerance, 1, u),
    ]


# ---------------------------------------------------------------------------
# Immersion catalog (ambient: canonical model with n = 2, chart R^5)
# ---------------------------------------------------------------------------


def invariant_r5() -> Immersion:
    """Invariant 3-submanifold: phi preserves the tangent spaces."""
    return Immersion(
        name="invariant-R5",
        m=3,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0], 0.0, u[1], 0.0, u[2]]),
    )


def anti_invariant_r5() -> Immersion:
    """Anti-invariant 3-submanifold: phi maps the slant distribution into
    the normal bundle."""
    return Immersion(
        name="anti-invariant-R5",
        m=3,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0], u[1], 0.0, 0.0, u[2]]),
    )


def slant_candidate_r5(theta: float) -> Immersion:
    """Candidate with constant slant angle theta (radians)."""
    if not (0.0 <= theta <= math.pi / 2.0):
        raise UsageError(f"slant angle must be in [0, pi/2], got {theta}")
    c, si = math.cos(theta), math.sin(theta)
    return Immersion(
        name=f"slant-candidate-R5({theta!r})",
        m=3,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0], 0.0, u[1] * c, u[1] * si, u[2]]),
    )


def get_immersion(name: str) -> Immersion:
    """Resolve a catalog immersion name."""
    name = name.strip()
    if name == "invariant-R5":
        return invariant_r5()
    if name == "anti-invariant-R5":
        return anti_invariant_r5()
    prefix = "slant-candidate-R5"
    if name.startswith(prefix + "(") and name.endswith(")"):
        arg = name[len(prefix) + 1 : -1]
        try:
            theta = float(arg)
        except ValueError:
            raise UsageError(f"bad slant angle {arg!r} in {name!r}")
        return slant_candidate_r5(theta)
    raise UsageError(f"unknown catalog immersion {name!r}")


def list_immersions() -> list[str]:
    return ["invariant-R5", "anti-invariant-R5", "slant-candidate-R5(theta)"]
