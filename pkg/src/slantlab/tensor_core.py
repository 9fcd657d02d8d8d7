"""Point-local Lorentzian linear algebra and finite differences.

Everything downstream (ambient structures, frames, curvature) is built on
four primitives defined here:

* ``inner``: the metric pairing X^T g Y for a metric given as a dense
  symmetric matrix at a point.
* ``orthonormalize_spacelike``: Gram-Schmidt with respect to a metric whose
  restriction to the spanned subspace is positive definite.
* ``self_adjoint_spectrum``: eigenvalues (with multiplicities) of an
  operator that is self-adjoint with respect to such a restriction. The
  operator is rotated into a metric-orthonormal basis first so an ordinary
  symmetric eigensolver applies.
* ``fd_jacobian``: central-difference Jacobian with optional Richardson
  extrapolation and an error estimate.

All functions are pure and all returned arrays are freshly allocated, so
values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ContractError,
    DegenerateFrameError,
    DimensionMismatchError,
    EvaluationError,
    NotSpacelikeError,
)

# Eigenvalues of a computed operator smaller than this count as zero when
# multiplicities are grouped (the kernel along the structure direction must
# be detected robustly despite finite-difference noise).
EIGENVALUE_SNAP = 1e-8

# Gap below which two computed eigenvalues are considered equal.
EIGENVALUE_CLUSTER = 1e-7


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference parameters.

    ``step`` is used for first derivatives, ``second_order_step`` for the
    outer derivative in curvature-type computations. With ``richardson`` on,
    every derivative is computed at two step sizes and extrapolated; the
    discrepancy doubles as an error estimate.
    """

    step: float = 1e-4
    second_order_step: float = 1e-3
    richardson: bool = True

    def __post_init__(self):
        if not (0.0 < self.step < 1e-1):
            raise ValueError(f"step must be in (0, 0.1), got {self.step}")
        if not (0.0 < self.second_order_step < 1e-1):
            raise ValueError(
                f"second_order_step must be in (0, 0.1), got {self.second_order_step}"
            )


@dataclass(frozen=True)
class MetricAtPoint:
    """A validated Lorentzian metric matrix at a single point.

    Entries must be symmetric to 1e-12 and have signature (-, +, ..., +),
    i.e. exactly one negative eigenvalue.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", g)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatchError(f"metric must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ContractError("metric has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g - g.T)) > 1e-12 * scale:
            raise ContractError("metric is not symmetric to 1e-12")
        neg, zero, _ = metric_signature(g)
        if zero:
            raise ContractError("metric is degenerate")
        if neg != 1:
            raise ContractError(
                f"metric is not Lorentzian: {neg} negative eigenvalues, expected 1"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def metric_signature(g: np.ndarray, tol: float = 1e-10) -> tuple[int, int, int]:
    """Counts of (negative, zero, positive) eigenvalues of a symmetric matrix."""
    w = np.linalg.eigvalsh(np.asarray(g, dtype=float))
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    neg = int(np.sum(w < -tol * scale))
    zero = int(np.sum(np.abs(w) <= tol * scale))
    return neg, zero, len(w) - neg - zero


def inner(g: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Metric pairing X^T g Y. Symmetric and bilinear by construction."""
    g = np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if g.shape != (x.shape[0], y.shape[0]) or x.shape != y.shape:
        raise DimensionMismatchError(
            f"inner: incompatible shapes g{g.shape}, x{x.shape}, y{y.shape}"
        )
    return float(x @ g @ y)


def norm(g: np.ndarray, x: np.ndarray) -> float:
    """Metric norm of a vector whose square pairing is non-negative."""
    q = inner(g, x, x)
    if q < 0:
        raise NotSpacelikeError(f"vector has negative square norm {q}")
    return float(np.sqrt(q))


def orthonormalize_spacelike(g: np.ndarray, basis) -> list[np.ndarray]:
    """Gram-Schmidt a spacelike basis to a g-orthonormal one of the same span.

    Raises NotSpacelikeError if the Gram matrix has a negative direction and
    DegenerateFrameError if it is rank deficient (e.g. a zero vector).
    """
    vecs = [np.asarray(v, dtype=float) for v in basis]
    if not vecs:
        raise DegenerateFrameError("empty basis")
    g = np.asarray(g, dtype=float)
    gram = np.array([[inner(g, v, w) for w in vecs] for v in vecs])
    scale = max(1.0, float(np.max(np.abs(gram))))
    w = np.linalg.eigvalsh(gram)
    if np.any(w < -1e-12 * scale):
        raise NotSpacelikeError(
            f"basis span is not spacelike (Gram eigenvalue {w.min():.3e})"
        )
    if np.any(np.abs(w) <= 1e-12 * scale):
        raise DegenerateFrameError("basis is rank deficient")
    out: list[np.ndarray] = []
    for v in vecs:
        u = v.copy()
        for e in out:
            u = u - inner(g, u, e) * e
        nu = np.sqrt(inner(g, u, u))
        if nu <= 1e-13 * max(1.0, float(np.max(np.abs(v)))):
            raise DegenerateFrameError("basis is rank deficient")
        out.append(u / nu)
    return out


def _selfadjoint_eigh(g: np.ndarray, a: np.ndarray, tol: float = 1e-8):
    """Eigen-decomposition of a g-self-adjoint operator on a spacelike subspace.

    Returns (eigenvalues ascending, eigenvectors as columns) in the original
    coordinates. The operator matrix is rotated into a g-orthonormal basis
    (Cholesky factor of g) so that it becomes symmetric in the ordinary sense.
    """
    g = np.asarray(g, dtype=float)
    a = np.asarray(a, dtype=float)
    if g.shape != a.shape or g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatchError(
            f"spectrum: incompatible shapes g{g.shape}, a{a.shape}"
        )
    try:
        ell = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotSpacelikeError("metric restriction is not positive definite")
    scale = max(1.0, float(np.max(np.abs(g @ a))))
    if np.max(np.abs(g @ a - a.T @ g)) > tol * scale:
        raise ContractError("operator is not metric-self-adjoint within tolerance")
    a_on = ell.T @ a @ np.linalg.inv(ell.T)
    a_on = 0.5 * (a_on + a_on.T)
    w, v_on = np.linalg.eigh(a_on)
    v = np.linalg.solve(ell.T, v_on)
    return w, v


def self_adjoint_spectrum(g: np.ndarray, a: np.ndarray) -> list[tuple[float, int]]:
    """Real spectrum of a g-self-adjoint operator, ascending, with multiplicities.

    Eigenvalues below EIGENVALUE_SNAP in magnitude are snapped to zero, and
    values closer than EIGENVALUE_CLUSTER are grouped into one multiplicity.
    Each returned pair satisfies ``A v = lambda v`` to 1e-9.
    """
    w, v = _selfadjoint_eigh(g, a)
    a = np.asarray(a, dtype=float)
    for i, lam in enumerate(w):
        resid = np.max(np.abs(a @ v[:, i] - lam * v[:, i]))
        if resid > 1e-9 * max(1.0, float(np.max(np.abs(a)))):
            raise ContractError(f"eigenpair residual {resid:.3e} exceeds 1e-9")
    w = np.where(np.abs(w) < EIGENVALUE_SNAP, 0.0, w)
    pairs: list[tuple[float, int]] = []
    for lam in w:
        if pairs and abs(lam - pairs[-1][0]) <= EIGENVALUE_CLUSTER:
            pairs[-1] = (pairs[-1][0], pairs[-1][1] + 1)
        else:
            pairs.append((float(lam), 1))
    return pairs


def _central(f: Callable, p: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Jacobian columns at one step size."""
    cols = []
    for i in range(p.shape[0]):
        dp = np.zeros_like(p)
        dp[i] = h
        try:
            fp = np.atleast_1d(np.asarray(f(p + dp), dtype=float))
            fm = np.atleast_1d(np.asarray(f(p - dp), dtype=float))
        except EvaluationError:
            raise
        except Exception as exc:
            raise EvaluationError(
                f"map evaluation failed near coordinate {i}: {exc}",
                point=p.copy(),
                coordinate=i,
            ) from exc
        col = (fp - fm) / (2.0 * h)
        if not np.all(np.isfinite(col)):
            raise EvaluationError(
                f"non-finite derivative in coordinate {i}", point=p.copy(), coordinate=i
            )
        cols.append(col)
    return np.stack(cols, axis=-1)


def fd_jacobian(
    f: Callable, p, cfg: FDConfig = FDConfig(), h: float | None = None
) -> tuple[np.ndarray, float]:
    """Jacobian of ``f`` at ``p`` by central differences.

    With Richardson extrapolation on, the h and h/2 estimates are combined
    to fourth order and their discrepancy is returned as the error estimate.
    The estimate is floored at the rounding-noise level eps*|f|/h so that it
    remains a usable bound even when the truncation term vanishes (e.g. for
    quadratics, where central differences are exact).

    Returns (jacobian, error_estimate). For scalar-input f the Jacobian has
    one column; for scalar-output one row.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    step = cfg.step if h is None else h
    d1 = _central(f, p, step)
    if not cfg.richardson:
        return d1, float("nan")
    d2 = _central(f, p, step / 2.0)
    jac = (4.0 * d2 - d1) / 3.0
    fmax = max(1.0, float(np.max(np.abs(np.atleast_1d(f(p))))))
    floor = 8.0 * np.finfo(float).eps * fmax / step
    err = float(np.max(np.abs(d2 - d1)))
    return jac, max(err, floor)


def fd_partial(f: Callable, p, i: int, cfg: FDConfig, h: float) -> np.ndarray:
    """Single directional central difference of a vector-valued map."""

    def restricted(t):
        q = np.asarray(p, dtype=float).copy()
        q[i] = t[0]
        return f(q)

    jac, _ = fd_jacobian(restricted, np.array([p[i]]), cfg, h=h)
    return jac[:, 0]
