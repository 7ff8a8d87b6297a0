"""Resolvent growth near the real axis.

``||(A - x0 - i t)^-1||`` is sampled on a geometric grid of ``t`` and a
power law ``M / t^m`` is fitted on the smallest decade.  On intervals that
contain non-positive eigenvalues the linear lower bound
``||(A - lam) x|| >= c |Im lam| ||x||`` is checked on a subspace whose
codimension is the total non-positive kernel dimension: first the
[.,.]-companion of the non-positive kernel parts, and when that subspace
still carries longer chains, the positive kernel parts plus the Euclidean
complement of all those kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GramSpace, Subspace, fundamental_decomposition, orthogonal_companion
from .errors import AtSpectrum, InputError, RankAmbiguous
from .jordan import RANK_TOL, eigenvalue_clusters, jordan_chains, scan_interval

__all__ = [
    "GrowthEstimate", "BoundReport", "resolvent_norm", "growth_order", "interval_bound_check",
]

T_FLOOR = 1e-6


def resolvent_norm(A, lam) -> float:
    """``||(A - lam)^-1||_2 = 1 / sigma_min(A - lam)``."""
    A = np.asarray(A)
    n = A.shape[0]
    s = np.linalg.svd(A - complex(lam) * np.eye(n), compute_uv=False)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    if s[-1] <= 1e-14 * scale:
        raise AtSpectrum(f"{complex(lam)} is numerically in the spectrum (sigma_min={s[-1]:.3g})",
                         sigma_min=float(s[-1]))
    return float(1.0 / s[-1])


@dataclass(frozen=True)
class GrowthEstimate:
    x0: float
    t_values: tuple[float, ...]
    norms: tuple[float, ...]
    m_hat: float
    M_hat: float
    r2: float
    predicted_m: int | None
    fit_window: tuple[float, float]

    def fitted(self, t):
        return self.M_hat * np.asarray(t, dtype=float) ** (-self.m_hat)


def _loglog_fit(t, y):
    x = -np.log(t)
    ly = np.log(y)
    slope, intercept = np.polyfit(x, ly, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _geometric_grid(t_min, t_max, samples):
    return np.geomspace(t_max, t_min, samples)


def growth_order(A, x0, t_min=1e-4, t_max=1e-2, samples=16, rank_tol=RANK_TOL) -> GrowthEstimate:
    """Fit ``||(A - x0 - i t)^-1|| ≈ M t^-m`` on the smallest sampled decade.

    ``predicted_m`` is the longest Jordan chain at ``x0`` when ``x0`` is an
    eigenvalue, 0 otherwise (the resolvent stays bounded), and ``None`` when
    the chain structure cannot be resolved.
    """
    if t_min < T_FLOOR:
        raise InputError(f"t_min must be at least {T_FLOOR:g}")
    if not t_min < t_max:
        raise InputError("t_min must be smaller than t_max")
    if samples < 8:
        raise InputError("at least 8 samples are required")
    A = np.asarray(A)
    x0 = float(x0)
    t = _geometric_grid(t_min, t_max, samples)
    norms = []
    for tj in t:
        try:
            norms.append(resolvent_norm(A, complex(x0, tj)))
        except AtSpectrum as exc:
            raise AtSpectrum(f"probe at t={tj:.6g} hits the spectrum", t=float(tj)) from exc
    norms = np.asarray(norms)
    window = t <= 10 * t_min * (1 + 1e-12)
    if window.sum() < 3:
        window = np.zeros_like(window)
        window[-3:] = True
    m_hat, intercept, r2 = _loglog_fit(t[window], norms[window])
    return GrowthEstimate(
        x0=x0, t_values=tuple(float(v) for v in t), norms=tuple(float(v) for v in norms),
        m_hat=m_hat, M_hat=float(np.exp(intercept)), r2=r2,
        predicted_m=_predicted_order(A, x0, rank_tol),
        fit_window=(float(t[window].min()), float(t[window].max())))


def _predicted_order(A, x0, rank_tol):
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    near = [mu for mu, _ in eigenvalue_clusters(A) if abs(mu - x0) <= 1e-8 * scale]
    if not near:
        return 0
    try:
        return max(jordan_chains(A, near[0].real if near[0].imag == 0 else near[0], rank_tol).lengths)
    except RankAmbiguous:
        return None


@dataclass(frozen=True)
class BoundReport:
    interval: tuple[float, float]
    sigma: tuple[float, ...]
    positive_type: bool
    k: int
    c: float
    M_hat: float
    bounded: bool
    slope: float
    unrestricted_bounded: bool
    unrestricted_slope: float
    t_values: tuple[float, ...]
    construction: str = "full"
    notes: tuple[str, ...] = ()


def _restricted_lower(A, B, xs, t):
    """``min_x sigma_min((A - x - i t) B) / t`` for each ``t``."""
    n = A.shape[0]
    out = []
    for tj in t:
        worst = np.inf
        for x in xs:
            M = (A - complex(x, tj) * np.eye(n)) @ B
            s = np.linalg.svd(M, compute_uv=False)
            worst = min(worst, float(s[-1]) if s.size else np.inf)
        out.append(worst / tj)
    return np.asarray(out)


def _slope(t, c):
    """Log-log slope of ``1/c(t)`` against ``-log t`` (0 for a bounded ratio)."""
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        return np.inf
    slope, _, _ = _loglog_fit(t, 1.0 / c)
    return slope


def interval_bound_check(A, space: GramSpace, a, b, grid=16, t_min=1e-4, t_max=1e-1,
                         samples=8, epsilon=1e-3, rank_tol=RANK_TOL) -> BoundReport:
    """Check the bound ``||(A - lam) x|| >= c |Im lam| ||x||`` near ``[a, b]``.

    When every eigenvalue in the interval is of positive type the bound is
    checked on the whole space (``k = 0``).  Otherwise ``k`` is the summed
    dimension of the negative and isotropic kernel parts at the exceptional
    points and the bound is checked on a codimension-``k`` subspace: the
    companion of those parts, or if the ratio still grows there, the span of
    the positive kernel parts and the orthogonal complement of the kernels
    (``construction`` says which).  ``bounded`` means ``1/c(t)`` does not
    grow (log-log slope below 0.5) as ``t -> 0``.
    """
    if not a < b:
        raise InputError("interval requires a < b")
    if t_min < T_FLOOR:
        raise InputError(f"t_min must be at least {T_FLOOR:g}")
    A = np.asarray(A)
    n = space.n
    scan = scan_interval(A, space, a, b, epsilon=epsilon, grid=max(grid, 2), rank_tol=rank_tol)
    xs = sorted(set(np.linspace(a, b, grid).tolist()) | {c.lam.real for c in scan.eigenvalues_in_U})
    t = _geometric_grid(t_min, t_max, samples)
    bad, good, kernels = [], [], []
    for cls in scan.eigenvalues_in_U:
        if cls.deficiency_plus == 0:
            continue
        fd = fundamental_decomposition(cls.kernel, space, rank_tol)
        bad += [fd.minus.basis, fd.isotropic.basis]
        good.append(fd.plus.basis)
        kernels.append(cls.kernel.basis)
    c_full = _restricted_lower(A, np.eye(n), xs, t)
    slope_full = _slope(t, c_full)
    construction = "full"
    k, c_t, slope = 0, c_full, slope_full
    if bad:
        V = Subspace.span(np.hstack(bad), rtol=1e-10, n=n)
        k = V.d
        H = orthogonal_companion(V, space)
        construction = "companion"
        c_t = _restricted_lower(A, H.basis, xs, t)
        slope = _slope(t, c_t)
        if not slope < 0.5:
            K = Subspace.span(np.hstack(kernels), rtol=1e-10, n=n)
            Kperp = orthogonal_companion(K, GramSpace(np.eye(n)))
            H = Subspace.span(np.hstack(good + [Kperp.basis]), rtol=1e-10, n=n)
            if n - H.d == k:
                construction = "positive-kernel-plus-complement"
                c_t = _restricted_lower(A, H.basis, xs, t)
                slope = _slope(t, c_t)
    c = float(np.min(c_t))
    M_hat = float(1.0 / np.min(c_full)) if np.min(c_full) > 0 else np.inf
    return BoundReport(
        interval=(float(a), float(b)), sigma=scan.sigma, positive_type=not scan.sigma,
        k=int(k), c=c, M_hat=M_hat, bounded=bool(slope < 0.5), slope=float(slope),
        unrestricted_bounded=bool(slope_full < 0.5), unrestricted_slope=float(slope_full),
        t_values=tuple(float(v) for v in t), construction=construction)
