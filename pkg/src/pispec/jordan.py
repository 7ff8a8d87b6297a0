"""Jordan structure and point-type classification of G-symmetric matrices.

Jordan chains are computed with a staircase over the nested kernels
``ker (A - lam)^k``; every rank decision must be backed by a singular value
gap, otherwise :class:`~pispec.errors.RankAmbiguous` is raised.  Signs of
chains at real eigenvalues come from diagonalizing the end-pairing form
``(y, z) -> [(A - lam)^(l-1) y, z]`` on the chain generators of each length.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .core import (
    GramSpace, MarginField, Subspace, definiteness_margin,
    fundamental_decomposition,
)
from .errors import InputError, NoKernel, RankAmbiguous

__all__ = [
    "JordanStructure", "Verdict", "TypeClassification", "RegionReport",
    "eigenvalue_clusters", "kernel_basis", "jordan_chains", "pair_chains",
    "sign_characteristic", "jordan_structures", "classify_point",
    "scan_interval",
]

RANK_TOL = 1e-8
GAP_FACTOR = 1e3


@dataclass(frozen=True, eq=False)
class JordanStructure:
    """Jordan chains of ``A`` at one eigenvalue.

    ``chains[j]`` is an ``n x l_j`` array whose columns are ``x_0 .. x_{l-1}``
    with ``(A - lam) x_0 = 0`` and ``(A - lam) x_i = x_{i-1}``.
    """

    eigenvalue: complex
    chains: tuple[np.ndarray, ...]
    weyr: tuple[int, ...]
    signs: tuple[int, ...] | None = None

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.chains)

    @property
    def algebraic_multiplicity(self) -> int:
        return sum(self.lengths)

    @property
    def geometric_multiplicity(self) -> int:
        return len(self.chains)

    def eigenvectors(self):
        return np.column_stack([c[:, 0] for c in self.chains])

    def vectors(self):
        """All chain vectors side by side; spans the algebraic eigenspace."""
        return np.hstack(self.chains)

    def residual(self, A) -> float:
        """Largest chain residual ``||(A - lam) x_i - x_{i-1}||``."""
        A = np.asarray(A)
        N = A - self.eigenvalue * np.eye(A.shape[0])
        worst = 0.0
        for c in self.chains:
            R = N @ c
            R[:, 1:] -= c[:, :-1]
            worst = max(worst, float(np.abs(R).max()))
        return worst


class Verdict(str, Enum):
    POSITIVE_TYPE = "positive_type"
    NEGATIVE_TYPE = "negative_type"
    PI_PLUS_NOT_PP = "pi_plus_not_pp"
    PI_MINUS_NOT_MM = "pi_minus_not_mm"
    MIXED_PI = "mixed_pi"
    REGULAR = "regular"
    INDEFINITE_UNRESOLVED = "indefinite_unresolved"


@dataclass(frozen=True, eq=False)
class TypeClassification:
    lam: complex
    verdict: Verdict
    kernel_inertia: tuple[int, int, int]
    budget_plus: int
    budget_minus: int
    pi_plus: bool
    pi_minus: bool
    margins: MarginField
    kernel: Subspace

    @property
    def deficiency_plus(self) -> int:
        """``kappa_{-,0}`` of the kernel: the smallest admissible pi+ budget."""
        return self.kernel_inertia[1] + self.kernel_inertia[2]

    @property
    def deficiency_minus(self) -> int:
        return self.kernel_inertia[0] + self.kernel_inertia[2]


@dataclass(frozen=True, eq=False)
class RegionReport:
    interval: tuple[float, float]
    eigenvalues_in_U: tuple[TypeClassification, ...]
    sigma: tuple[float, ...]
    alpha: int
    neighborhood: tuple[float, float, float, float]
    all_offreal_regular: bool
    nonreal_in_neighborhood: tuple[complex, ...] = ()
    notes: tuple[str, ...] = field(default=(
        "alpha is 0: finite matrices have no infinite Jordan chains",))


def _scale(A) -> float:
    return max(1.0, float(np.linalg.norm(A, 2)))


def eigenvalue_clusters(A, cluster_tol=None, pair_tol=None):
    """Eigenvalues of ``A`` grouped into clusters, as ``[(value, multiplicity)]``.

    Eigenvalues of a defective block scatter on a small circle; the cluster
    mean is accurate to roundoff.  Clusters whose mean has imaginary part
    below ``pair_tol`` are snapped to the real axis.
    """
    A = np.asarray(A)
    scale = _scale(A)
    if cluster_tol is None:
        cluster_tol = 1e-3 * scale
    if pair_tol is None:
        pair_tol = 1e-8 * scale
    ev = np.linalg.eigvals(A)
    n = ev.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ev[i] - ev[j]) <= cluster_tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idx in groups.values():
        mu = complex(np.mean(ev[idx]))
        if abs(mu.imag) <= pair_tol:
            mu = complex(mu.real, 0.0)
        out.append((mu, len(idx)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def _split_rank(s, thr, step=None):
    """Number of singular values above ``thr``, after checking the gap."""
    big = s[s > thr]
    small = s[s <= thr]
    if big.size and small.size:
        gap = float(big.min() / max(small.max(), 1e-300))
        if gap < GAP_FACTOR:
            raise RankAmbiguous(
                f"singular value gap {gap:.3g} below {GAP_FACTOR:g} at staircase step {step}",
                gap=gap, step=step)
    return big.size


def kernel_basis(A, lam, rank_tol=RANK_TOL) -> Subspace:
    """Right singular vectors of ``A - lam`` with ``s_i <= rank_tol * max(s_max, ||A||, |lam|)``."""
    if not rank_tol > 0:
        raise InputError("rank_tol must be positive")
    A = np.asarray(A)
    _, s, Vh = np.linalg.svd(_shifted(A, lam))
    return Subspace(Vh[s <= rank_tol * _roundoff_scale(A, lam, s[0])].conj().T)


def _roundoff_scale(A, lam, smax):
    # A - lam can be pure roundoff (e.g. 1x1 blocks), so the scale also
    # includes the size of the data it was computed from
    return max(smax, float(np.linalg.norm(A, 2)), abs(complex(lam)))


def _shifted(A, lam):
    A = np.asarray(A)
    lam = complex(lam)
    if lam.imag == 0 and not np.iscomplexobj(A):
        return A - lam.real * np.eye(A.shape[0])
    return A - lam * np.eye(A.shape[0])


def _orth_complement_in(V, X, count):
    """``count`` orthonormal directions of span(V) orthogonal to span(X)."""
    if X.shape[1]:
        Qx, _ = np.linalg.qr(X)
        W = V - Qx @ (Qx.conj().T @ V)
    else:
        W = V
    U, _, _ = np.linalg.svd(W, full_matrices=False)
    return U[:, :count]


def jordan_chains(A, lam, tol=RANK_TOL) -> JordanStructure:
    """Jordan chains of ``A`` at ``lam`` by the staircase over nested kernels.

    ``V_k = ker (A - lam)^k`` is obtained as the null space of
    ``(I - P_{k-1}) (A - lam)``.  Chains are grown top-down from generators
    of ``V_k`` that are independent of ``V_{k-1}`` and of the vectors already
    used by longer chains.
    """
    A = np.asarray(A)
    n = A.shape[0]
    N = _shifted(A, lam)
    smax = float(np.linalg.norm(N, 2))
    thr = tol * _roundoff_scale(A, lam, smax)
    if smax <= thr:
        V = np.eye(n, dtype=N.dtype)
        kernels = [V]
    else:
        kernels = []
        P = np.zeros((n, n), dtype=N.dtype)
        prev_dim = 0
        for step in range(1, n + 1):
            M = N - P @ N
            _, s, Vh = np.linalg.svd(M)
            rank = _split_rank(s, thr, step)
            V = Vh[rank:].conj().T
            if V.shape[1] == prev_dim:
                break
            kernels.append(V)
            prev_dim = V.shape[1]
            P = V @ V.conj().T
            if prev_dim == n:
                break
    if not kernels:
        raise NoKernel(f"{complex(lam)} is not an eigenvalue at tolerance {tol:g}")
    dims = [0] + [V.shape[1] for V in kernels]
    weyr = tuple(dims[k] - dims[k - 1] for k in range(1, len(dims)))
    p = len(weyr)
    chains_by_level: dict[int, list[np.ndarray]] = {}
    for k in range(p, 0, -1):
        longer = weyr[k] if k < p else 0
        count = weyr[k - 1] - longer
        if count <= 0:
            continue
        prior = kernels[k - 2] if k >= 2 else np.zeros((n, 0), dtype=N.dtype)
        used = [c[:, k - 1] for lvl, cs in chains_by_level.items() for c in cs]
        X = np.column_stack([prior] + used) if used else prior
        Y = _orth_complement_in(kernels[k - 1], X, count)
        chains_by_level[k] = [_grow_chain(N, Y[:, j], k) for j in range(count)]
    chains = [c for k in sorted(chains_by_level, reverse=True) for c in chains_by_level[k]]
    return JordanStructure(complex(lam), tuple(chains), weyr)


def _grow_chain(N, y, length):
    cols = [y]
    for _ in range(length - 1):
        cols.append(N @ cols[-1])
    C = np.column_stack(cols[::-1])
    return C / np.linalg.norm(C[:, 0])


def pair_chains(A, space: GramSpace, js: JordanStructure, tol=RANK_TOL) -> JordanStructure:
    """Rotate chains of equal length so their end-pairings are diagonal.

    For chains of length ``l`` with generators ``y_j`` (the last vectors), the
    form ``[(A - lam)^(l-1) y_j, y_i]`` is Hermitian at a real eigenvalue;
    its eigenvectors give chains whose end-pairings ``[x_{l-1}, x_0]`` are
    the eigenvalues, and the signs of those are the sign characteristic.
    """
    lam = complex(js.eigenvalue)
    if lam.imag != 0:
        raise InputError("sign characteristic is defined for real eigenvalues only")
    A = np.asarray(A)
    N = _shifted(A, lam)
    G = space.G
    chains: list[np.ndarray] = []
    signs: list[int] = []
    for length in sorted(set(js.lengths), reverse=True):
        group = [c for c in js.chains if c.shape[1] == length]
        Y = np.column_stack([c[:, -1] for c in group])
        Y = Y / np.linalg.norm(Y, axis=0)
        Nl = np.linalg.matrix_power(N, length - 1)
        GNl = G @ Nl
        H = Y.conj().T @ GNl @ Y
        H = (H + H.conj().T) / 2
        w, U = np.linalg.eigh(H)
        Yr = Y @ U
        thr = tol * max(float(np.linalg.norm(GNl, 2)), 1e-300)
        for j in range(Yr.shape[1]):
            chains.append(_grow_chain(N, Yr[:, j], length))
            signs.append(0 if abs(w[j]) <= thr else int(np.sign(w[j])))
    return replace(js, chains=tuple(chains), signs=tuple(signs))


def sign_characteristic(A, space: GramSpace, js: JordanStructure, tol=RANK_TOL) -> list[int]:
    """Sign (+1, -1, or 0 when degenerate) of each Jordan chain at a real eigenvalue."""
    return list(pair_chains(A, space, js, tol).signs)


def jordan_structures(A, space: GramSpace | None = None, tol=RANK_TOL,
                      cluster_tol=None) -> list[JordanStructure]:
    """Jordan structures at every eigenvalue cluster of ``A``.

    With ``space`` given, chains at real eigenvalues carry their signs.
    """
    out = []
    for mu, _ in eigenvalue_clusters(A, cluster_tol):
        js = jordan_chains(A, mu, tol)
        if space is not None and mu.imag == 0:
            js = pair_chains(A, space, js, tol)
        out.append(js)
    return out


def classify_point(A, space: GramSpace, lam, epsilon=1e-3, rank_tol=RANK_TOL) -> TypeClassification:
    """Type verdict for ``lam`` from the kernel inertia and the margin field.

    An empty kernel means ``lam`` is in the resolvent set (finite dimensions),
    reported as ``regular``.  Otherwise the minimal pi+ budget is
    ``kappa_- + kappa_0`` of the kernel and it is certified when the margin
    ``nu_k >= epsilon`` at that budget; pi- mirrors this.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    A = np.asarray(A)
    ker = kernel_basis(A, lam, rank_tol)
    fd = fundamental_decomposition(ker, space, rank_tol)
    kp, km, k0 = fd.inertia
    margins = definiteness_margin(A, space, lam, epsilon, k_max=space.n)
    budget_plus = km + k0
    budget_minus = kp + k0
    pi_plus = margins.certified_plus(budget_plus)
    pi_minus = margins.certified_minus(budget_minus)
    if ker.d == 0:
        verdict = Verdict.REGULAR
    elif km == 0 and k0 == 0:
        verdict = Verdict.POSITIVE_TYPE
    elif kp == 0 and k0 == 0:
        verdict = Verdict.NEGATIVE_TYPE
    elif pi_plus and pi_minus and kp > 0 and km > 0:
        verdict = Verdict.MIXED_PI
    elif pi_plus:
        verdict = Verdict.PI_PLUS_NOT_PP
    elif pi_minus:
        verdict = Verdict.PI_MINUS_NOT_MM
    else:
        verdict = Verdict.INDEFINITE_UNRESOLVED
    return TypeClassification(
        lam=complex(lam), verdict=verdict, kernel_inertia=fd.inertia,
        budget_plus=budget_plus, budget_minus=budget_minus,
        pi_plus=bool(pi_plus), pi_minus=bool(pi_minus), margins=margins, kernel=ker)


def scan_interval(A, space: GramSpace, a, b, epsilon=1e-3, grid=64,
                  rank_tol=RANK_TOL, height=None, cluster_tol=None) -> RegionReport:
    """Classify every eigenvalue in ``[a, b]`` and probe the rectangle around it.

    ``sigma`` collects the eigenvalues whose kernel is not positive
    (``kappa_- + kappa_0 > 0``).  Off-real probes on a ``grid x 4`` lattice of
    the rectangle ``[a, b] x [-height, height]`` are checked for a regular-side
    certificate: empty kernel and ``nu_0 >= epsilon``.
    """
    if not a < b:
        raise InputError("interval requires a < b")
    if grid < 2:
        raise InputError("grid must be at least 2")
    A = np.asarray(A)
    if height is None:
        height = (b - a) / 4
    found = []
    nonreal = []
    for mu, _ in eigenvalue_clusters(A, cluster_tol):
        if mu.imag == 0:
            if a <= mu.real <= b:
                found.append(classify_point(A, space, mu.real, epsilon, rank_tol))
        elif a <= mu.real <= b and abs(mu.imag) <= height:
            nonreal.append(mu)
    sigma = tuple(c.lam.real for c in found if c.deficiency_plus > 0)
    ok = True
    for x in np.linspace(a, b, grid):
        for y in (-height, -height / 2, height / 2, height):
            lam = complex(x, y)
            mf = definiteness_margin(A, space, lam, epsilon, k_max=0)
            empty = kernel_basis(A, lam, rank_tol).d == 0
            if not (empty and mf.certified_plus(0)):
                ok = False
                break
        if not ok:
            break
    return RegionReport(
        interval=(float(a), float(b)), eigenvalues_in_U=tuple(found), sigma=sigma,
        alpha=0, neighborhood=(float(a), float(b), -float(height), float(height)),
        all_offreal_regular=ok, nonreal_in_neighborhood=tuple(nonreal))
