"""Local spectral projections by contour quadrature.

``E = (1/2 pi i) ∮ (z - A)^-1 dz`` is evaluated with the trapezoidal rule on
circles and ellipses (node count doubled until two successive estimates
agree) and with Gauss-Legendre panels on rectangles.  Contours used for
spectral functions are symmetric about the real axis, which keeps ``E``
G-selfadjoint up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .core import FundamentalDecomposition, GramSpace, Subspace, fundamental_decomposition
from .errors import (
    ContourThroughSpectrum, EndpointInSpectrum, HypothesisViolated, InputError,
    QuadratureStagnation,
)
from .jordan import eigenvalue_clusters

__all__ = [
    "Contour", "SpectralProjection", "AxiomReport", "riesz_projection",
    "local_spectral_function", "verify_axioms",
]

ENDPOINT_NOTE = ("interval endpoints must avoid the whole spectrum, not only the "
                 "exceptional points, so that the contour stays in the resolvent set")


@dataclass(frozen=True)
class Contour:
    """A closed positively oriented curve.

    ``geometry`` holds ``radius`` (circle), ``semi_axes = (alpha, beta)``
    (ellipse) or ``corners = (x0, x1, y0, y1)`` (rectangle; ``center`` unused).
    ``nodes`` is the initial quadrature size.
    """

    shape: str
    center: complex = 0j
    geometry: dict = field(default_factory=dict)
    nodes: int = 32
    symmetric_real_axis: bool = False

    def __post_init__(self):
        if self.shape not in ("circle", "ellipse", "rectangle"):
            raise InputError(f"unknown contour shape {self.shape!r}")
        if self.nodes < 4:
            raise InputError("at least 4 quadrature nodes are needed")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def circle(cls, center, radius, nodes=32):
        c = complex(center)
        return cls("circle", c, {"radius": float(radius)}, nodes, c.imag == 0)

    @classmethod
    def ellipse(cls, center, alpha, beta, nodes=32):
        c = complex(center)
        return cls("ellipse", c, {"semi_axes": (float(alpha), float(beta))}, nodes, c.imag == 0)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, nodes=8):
        if not (x0 < x1 and y0 < y1):
            raise InputError("rectangle corners must satisfy x0 < x1 and y0 < y1")
        return cls("rectangle", complex((x0 + x1) / 2, (y0 + y1) / 2),
                   {"corners": (float(x0), float(x1), float(y0), float(y1))},
                   nodes, y0 == -y1)

    def points(self, n):
        """``(z, w)`` with ``∮ f dz ≈ sum w f(z)`` for an ``n``-point rule."""
        if self.shape == "rectangle":
            x0, x1, y0, y1 = self.geometry["corners"]
            t, wt = np.polynomial.legendre.leggauss(n)
            corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
            zs, ws = [], []
            for p, q in zip(corners, corners[1:] + corners[:1]):
                zs.append((p + q) / 2 + (q - p) / 2 * t)
                ws.append((q - p) / 2 * wt)
            return np.concatenate(zs), np.concatenate(ws)
        theta = 2 * np.pi * np.arange(n) / n
        if self.shape == "circle":
            r = self.geometry["radius"]
            z = self.center + r * np.exp(1j * theta)
            dz = 1j * r * np.exp(1j * theta)
        else:
            a, b = self.geometry["semi_axes"]
            z = self.center + a * np.cos(theta) + 1j * b * np.sin(theta)
            dz = -a * np.sin(theta) + 1j * b * np.cos(theta)
        return z, dz * (2 * np.pi / n)

    def distance(self, points, samples=4096):
        """Approximate distance from each point to the curve."""
        z, _ = self.points(samples if self.shape != "rectangle" else samples // 4)
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        if points.size == 0:
            return np.zeros(0)
        return np.abs(points[:, None] - z[None, :]).min(axis=1)

    def encloses(self, points):
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        d = points - self.center
        if self.shape == "circle":
            return np.abs(d) < self.geometry["radius"]
        if self.shape == "ellipse":
            a, b = self.geometry["semi_axes"]
            return (d.real / a) ** 2 + (d.imag / b) ** 2 < 1
        x0, x1, y0, y1 = self.geometry["corners"]
        return (points.real > x0) & (points.real < x1) & (points.imag > y0) & (points.imag < y1)


def _resolvent_sum(A, z, w):
    n = A.shape[0]
    eye = np.eye(n)
    S = np.zeros((n, n), dtype=complex)
    for zj, wj in zip(z, w):
        S += wj * np.linalg.solve(zj * eye - A, eye)
    return S / (2j * np.pi)


def riesz_projection(A, contour: Contour, proj_tol=1e-8, dist_tol=None, max_nodes=16384,
                     return_nodes=False):
    """Spectral projector for the eigenvalues enclosed by ``contour``."""
    A = np.asarray(A)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    if dist_tol is None:
        dist_tol = 1e-8 * scale
    ev = np.linalg.eigvals(A)
    d = contour.distance(ev)
    if d.size and d.min() <= dist_tol:
        raise ContourThroughSpectrum(
            f"eigenvalue {ev[d.argmin()]:.6g} lies within {d.min():.3g} of the contour")
    N = contour.nodes
    if contour.shape == "rectangle":
        E = _resolvent_sum(A, *contour.points(N))
        while True:
            N2 = 2 * N
            if 4 * N2 > max_nodes:
                raise QuadratureStagnation("no convergence at the node cap", residual=float("nan"), nodes=4 * N)
            E2 = _resolvent_sum(A, *contour.points(N2))
            res = float(np.linalg.norm(E2 - E, 2))
            E, N = E2, N2
            if res <= proj_tol / 10:
                break
        return (E, 4 * N) if return_nodes else E
    E = _resolvent_sum(A, *contour.points(N))
    while True:
        if 2 * N > max_nodes:
            raise QuadratureStagnation(
                f"trapezoid rule did not converge within {max_nodes} nodes",
                residual=res if N > contour.nodes else float("nan"), nodes=N)
        z, w = contour.points(2 * N)
        # the odd nodes of the doubled rule are the new ones
        E2 = E / 2 + _resolvent_sum(A, z[1::2], w[1::2])
        res = float(np.linalg.norm(E2 - E, 2))
        E, N = E2, 2 * N
        if res <= proj_tol / 10:
            break
    return (E, N) if return_nodes else E


@dataclass(frozen=True, eq=False)
class SpectralProjection:
    interval: tuple[float, float]
    e_matrix: np.ndarray
    idempotency_residual: float
    commutation_residual: float
    g_symmetry_residual: float
    range_inertia: tuple[int, int, int]
    quadrature_nodes_used: int
    contour: Contour
    rank: int
    range: Subspace
    decomposition: FundamentalDecomposition
    enclosed: tuple[complex, ...]
    notes: tuple[str, ...] = (ENDPOINT_NOTE,)

    @property
    def uniformly_positive(self) -> bool:
        kp, km, k0 = self.range_inertia
        return self.rank > 0 and km == 0 and k0 == 0


def _projector_range(E):
    U, s, _ = np.linalg.svd(E)
    # singular values of a projector are 0 or >= 1
    r = int(np.sum(s > 0.5))
    return Subspace(U[:, :r]) if r else Subspace.zero(E.shape[0])


def _check_interval(delta):
    try:
        a, b = (float(v) for v in delta)
    except (TypeError, ValueError) as exc:
        raise InputError(f"interval must be a pair of reals, got {delta!r}") from exc
    if not a < b:
        raise InputError(f"interval requires a < b, got [{a}, {b}]")
    return a, b


def local_spectral_function(A, space: GramSpace, delta, epsilon=1e-6, height=None,
                            proj_tol=1e-8) -> SpectralProjection:
    """``E(delta)`` for a real interval whose endpoints avoid the spectrum.

    ``epsilon`` (relative to ``max(1, ||A||)``) is how far endpoints must be
    from eigenvalues.  Non-real eigenvalues must stay outside the rectangle
    ``delta x [-height, height]`` (default height: half the interval length).
    The ellipse through the endpoints is flattened so that it stays at least
    halfway clear of the remaining non-real eigenvalues.
    """
    a, b = _check_interval(delta)
    A = np.asarray(A)
    n = space.n
    if A.shape != (n, n):
        raise InputError(f"A must be {n}x{n}, got {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    alpha = (b - a) / 2
    if height is None:
        height = alpha
    clusters = [mu for mu, _ in eigenvalue_clusters(A)]
    ev = np.linalg.eigvals(A)
    for mu in list(clusters) + list(ev):
        for end in (a, b):
            if abs(mu - end) <= epsilon * scale:
                raise EndpointInSpectrum(f"endpoint {end} is (numerically) an eigenvalue",
                                         eigenvalue=complex(mu))
    nonreal = [mu for mu in clusters if mu.imag != 0]
    for mu in nonreal:
        if a <= mu.real <= b and abs(mu.imag) <= height:
            raise HypothesisViolated(
                f"hypothesis violated: non-real eigenvalue {mu:.6g} inside the neighbourhood "
                "of the interval", eigenvalue=mu)

    def seg_dist(mu):
        x = min(max(mu.real, a), b)
        return abs(mu - x)

    beta = alpha
    if nonreal:
        beta = min(beta, 0.5 * min(seg_dist(mu) for mu in nonreal))
    beta = max(beta, 1e-3 * (b - a))
    contour = Contour.ellipse((a + b) / 2, alpha, beta)
    E, nodes = riesz_projection(A, contour, proj_tol=proj_tol,
                                dist_tol=0.5 * epsilon * scale, return_nodes=True)
    if not np.iscomplexobj(A) and np.abs(E.imag).max() <= 1e-12 * max(1.0, np.abs(E).max()):
        E = E.real.copy()
    G = space.G
    R = _projector_range(E)
    fd = fundamental_decomposition(R, space, rank_tol=1e-8)
    GE = G @ E
    enclosed = tuple(complex(mu) for mu in clusters if contour.encloses(mu)[0])
    return SpectralProjection(
        interval=(a, b), e_matrix=E,
        idempotency_residual=float(np.linalg.norm(E @ E - E, 2)),
        commutation_residual=float(np.linalg.norm(E @ A - A @ E, 2)),
        g_symmetry_residual=float(np.linalg.norm(GE - E.conj().T @ G, 2)),
        range_inertia=fd.inertia, quadrature_nodes_used=int(nodes), contour=contour,
        rank=R.d, range=R, decomposition=fd, enclosed=enclosed)


@dataclass(frozen=True)
class AxiomReport:
    s1: float
    s2: float
    s3: float
    s4: float
    s5: float
    empty_set: float
    g_symmetry: float
    idempotency: float
    per_interval: tuple[dict, ...]
    notes: tuple[str, ...] = (
        "additivity is checked in its finite form",
        "commutants are polynomials in A; general commutants are not sampled",
        ENDPOINT_NOTE,
    )

    @property
    def worst(self) -> float:
        return max(self.s1, self.s2, self.s3, self.s4, self.s5, self.empty_set)

    def as_dict(self):
        return {"S1": self.s1, "S2": self.s2, "S3": self.s3, "S4": self.s4, "S5": self.s5,
                "empty_set": self.empty_set, "g_symmetry": self.g_symmetry,
                "idempotency": self.idempotency}


def _restricted_spectrum(A, R: Subspace):
    """Eigenvalue cluster means of ``A`` restricted to the invariant subspace ``R``."""
    if R.d == 0:
        return []
    C = R.basis.conj().T @ np.asarray(A) @ R.basis
    return [mu for mu, _ in eigenvalue_clusters(C)]


def _split_point(a, b, ev):
    cand = np.linspace(a, b, 35)[1:-1]
    if len(ev) == 0:
        return float(cand[len(cand) // 2])
    d = np.abs(cand[:, None] - np.asarray(ev)[None, :]).min(axis=1)
    return float(cand[int(np.argmax(d))])


def verify_axioms(A, space: GramSpace, deltas, commutant_degree=4, seed=0,
                  epsilon=1e-6, proj_tol=1e-8) -> AxiomReport:
    """Residuals of the spectral-function axioms on a family of intervals.

    For every pair the intersection rule ``E(D1 ∩ D2) = E(D1) E(D2)`` is
    checked (an empty intersection must give zero); each interval is split in
    two to test finite additivity; random polynomials ``p(A)`` of degree up
    to ``commutant_degree`` test commutation; the spectra of ``A`` on
    ``ran E`` and ``ran (I - E)`` are compared with the interval and with the
    rest of the spectrum.
    """
    if not deltas:
        raise InputError("at least one interval is required")
    ivs = [_check_interval(d) for d in deltas]
    if commutant_degree < 0:
        raise InputError("commutant_degree must be non-negative")
    A = np.asarray(A)
    n = space.n
    cache: dict[tuple[float, float], SpectralProjection] = {}

    def proj(iv):
        if iv not in cache:
            cache[iv] = local_spectral_function(A, space, iv, epsilon=epsilon, proj_tol=proj_tol)
        return cache[iv]

    clusters = [mu for mu, _ in eigenvalue_clusters(A)]
    real_ev = [mu.real for mu in clusters if mu.imag == 0]
    s1 = 0.0
    for i, j in combinations_with_replacement(range(len(ivs)), 2):
        Ei, Ej = proj(ivs[i]).e_matrix, proj(ivs[j]).e_matrix
        lo, hi = max(ivs[i][0], ivs[j][0]), min(ivs[i][1], ivs[j][1])
        if lo < hi:
            target = proj((lo, hi)).e_matrix
        else:
            target = np.zeros((n, n))
        s1 = max(s1, float(np.linalg.norm(target - Ei @ Ej, 2)))
        s1 = max(s1, float(np.linalg.norm(target - Ej @ Ei, 2)))
    s2 = 0.0
    for iv in ivs:
        p = _split_point(*iv, real_ev)
        parts = proj((iv[0], p)).e_matrix + proj((p, iv[1])).e_matrix
        s2 = max(s2, float(np.linalg.norm(proj(iv).e_matrix - parts, 2)))
    rng = np.random.default_rng(seed)
    s3 = 0.0
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    As = A / scale
    for deg in range(commutant_degree + 1):
        coeffs = rng.standard_normal(deg + 1)
        B = np.zeros((n, n), dtype=np.result_type(A, float))
        for c in coeffs[::-1]:
            B = B @ As + c * np.eye(n)
        bn = max(1.0, float(np.linalg.norm(B, 2)))
        for iv in ivs:
            E = proj(iv).e_matrix
            s3 = max(s3, float(np.linalg.norm(E @ B - B @ E, 2)) / bn)
    s4 = s5 = 0.0
    rows = []
    for iv in ivs:
        sp = proj(iv)
        inside = _restricted_spectrum(A, sp.range)
        for mu in inside:
            x = min(max(mu.real, iv[0]), iv[1])
            s4 = max(s4, abs(mu - x))
        comp = _projector_range(np.eye(n) - sp.e_matrix)
        outside = _restricted_spectrum(A, comp)
        rest = [mu for mu in clusters if not (mu.imag == 0 and iv[0] <= mu.real <= iv[1])]
        for mu in outside:
            s5 = max(s5, min((abs(mu - nu) for nu in rest), default=abs(mu)))
        rows.append({"interval": iv, "rank": sp.rank, "range_inertia": sp.range_inertia,
                     "idempotency": sp.idempotency_residual,
                     "g_symmetry": sp.g_symmetry_residual,
                     "nodes": sp.quadrature_nodes_used})
    top = max(mu.real for mu in clusters)
    empty = proj((top + 1.0, top + 2.0)).e_matrix
    return AxiomReport(
        s1=s1, s2=s2, s3=s3, s4=s4, s5=s5,
        empty_set=float(np.linalg.norm(empty, 2)),
        g_symmetry=max(r["g_symmetry"] for r in rows),
        idempotency=max(r["idempotency"] for r in rows),
        per_interval=tuple(rows))
