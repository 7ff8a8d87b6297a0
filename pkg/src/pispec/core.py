"""Finite-dimensional indefinite inner product spaces.

The space is C^n with the Euclidean product ``(x, y) = y^H x`` and an
indefinite product ``[x, y] = (G x, y) = y^H G x`` induced by a Hermitian,
possibly singular, Gram matrix ``G``.  Subspaces are carried around as
Euclidean-orthonormal bases; numerical notions like "neutral" or "isotropic"
become threshold tests against ``rank_tol * ||G||``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = [
    "GramSpace", "Subspace", "FundamentalDecomposition", "MarginField",
    "indefinite_product", "orthogonal_companion", "isotropic_part",
    "fundamental_decomposition", "compress_gram", "definiteness_margin",
    "uniform_definiteness_delta", "orth", "null_space",
    "DEFAULT_RANK_TOL", "SUBSPACE_TOL",
]

EPS = float(np.finfo(float).eps)

#: relative threshold (times ||G||) separating neutral from definite directions
DEFAULT_RANK_TOL = 1e-10

#: principal-angle tolerance for subspace equality
SUBSPACE_TOL = 1e-8


def _hermitian_part(M):
    return (M + M.conj().T) / 2


def _dtype_of(*arrays):
    return np.result_type(float, *arrays)


def orth(X, rtol=None):
    """Orthonormal basis of the column space of ``X``.

    Singular values below ``rtol * sigma_max`` are discarded; the default
    ``rtol`` is ``max(X.shape) * eps``.
    """
    X = np.atleast_2d(np.asarray(X))
    n, m = X.shape
    if m == 0 or n == 0:
        return np.zeros((n, 0), dtype=_dtype_of(X))
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if rtol is None:
        rtol = max(n, m) * EPS
    if s.size == 0 or s[0] == 0:
        return np.zeros((n, 0), dtype=U.dtype)
    rank = int(np.sum(s > rtol * s[0]))
    return U[:, :rank]


def null_space(M, atol):
    """Orthonormal basis of ``{x : M x = 0}`` with an absolute threshold."""
    M = np.atleast_2d(np.asarray(M))
    rows, n = M.shape
    if rows == 0:
        return np.eye(n, dtype=_dtype_of(M))
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > atol))
    return Vh[rank:].conj().T


@dataclass(frozen=True, eq=False)
class GramSpace:
    """C^n equipped with ``[x, y] = y^H G x``.

    ``G`` is symmetrized on construction.  ``ker_g_tol`` is the absolute
    threshold below which singular values of ``G`` count as zero.
    """

    G: np.ndarray
    ker_g_tol: float | None = None
    n: int = field(init=False)
    gram_norm: float = field(init=False)

    def __post_init__(self):
        G = np.array(self.G, dtype=_dtype_of(self.G))
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] == 0:
            raise InputError(f"Gram matrix must be square and non-empty, got shape {G.shape}")
        G = _hermitian_part(G)
        G.setflags(write=False)
        gram_norm = float(np.linalg.norm(G, 2))
        ker_tol = self.ker_g_tol
        if ker_tol is None:
            ker_tol = G.shape[0] * EPS * max(gram_norm, 1.0) * 10
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "n", G.shape[0])
        object.__setattr__(self, "gram_norm", gram_norm)
        object.__setattr__(self, "ker_g_tol", float(ker_tol))

    def product(self, x, y):
        return indefinite_product(x, y, self)

    def kernel(self) -> "Subspace":
        """``ker G``, the isotropic part of the whole space."""
        return Subspace(null_space(self.G, self.ker_g_tol))

    @property
    def nondegenerate(self) -> bool:
        return self.kernel().d == 0

    def inertia(self, rank_tol=DEFAULT_RANK_TOL):
        fd = fundamental_decomposition(Subspace.full(self.n), self, rank_tol)
        return fd.inertia


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of C^n given by a Euclidean-orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis)
        if B.ndim != 2:
            raise InputError(f"basis must be a 2-d array, got ndim={B.ndim}")
        n, d = B.shape
        if d > n:
            raise InputError(f"subspace dimension {d} exceeds ambient dimension {n}")
        if d and np.linalg.norm(B.conj().T @ B - np.eye(d)) > 1e-10 * max(1, d):
            raise InputError("basis columns are not orthonormal; use Subspace.span")
        B = np.array(B, dtype=_dtype_of(B))
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors, rtol=None, n=None) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (rank-revealing)."""
        V = np.asarray(vectors)
        if V.ndim == 1:
            V = V[:, None]
        if V.shape[1] == 0 and n is not None:
            return cls.zero(n)
        return cls(orth(V, rtol))

    @classmethod
    def zero(cls, n, dtype=float) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=dtype))

    @classmethod
    def full(cls, n) -> "Subspace":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    def distance(self, other: "Subspace") -> float:
        """Sine of the largest principal angle; ``inf`` for unequal dimensions."""
        if self.n != other.n:
            raise InputError("subspaces live in different ambient spaces")
        if self.d != other.d:
            return float("inf")
        if self.d == 0:
            return 0.0
        return float(np.linalg.norm(self.projector() - other.projector(), 2))

    def same_as(self, other: "Subspace", tol=SUBSPACE_TOL) -> bool:
        return self.distance(other) <= tol

    def contains(self, vectors, tol=SUBSPACE_TOL) -> bool:
        V = np.asarray(vectors)
        if V.ndim == 1:
            V = V[:, None]
        resid = V - self.basis @ (self.basis.conj().T @ V)
        scale = max(np.linalg.norm(V), 1e-300)
        return bool(np.linalg.norm(resid) <= tol * scale)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(np.hstack([self.basis, other.basis]), n=self.n)


def _check_in_space(L: Subspace, space: GramSpace):
    if L.n != space.n:
        raise InputError(f"subspace lives in C^{L.n}, Gram matrix is {space.n}x{space.n}")


def indefinite_product(x, y, space: GramSpace) -> complex:
    """``[x, y] = y^H G x``; linear in ``x``, conjugate-linear in ``y``."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != (space.n,) or y.shape != (space.n,):
        raise InputError(f"vectors must have shape ({space.n},), got {x.shape} and {y.shape}")
    return complex(np.vdot(y, space.G @ x))


def compress_gram(L: Subspace, space: GramSpace):
    """The Hermitian ``d x d`` matrix ``B^H G B`` for the basis ``B`` of ``L``."""
    _check_in_space(L, space)
    B = L.basis
    return _hermitian_part(B.conj().T @ space.G @ B)


def orthogonal_companion(M: Subspace, space: GramSpace) -> Subspace:
    """``M^[perp] = {x : [x, y] = 0 for all y in M}``."""
    _check_in_space(M, space)
    if M.d == 0:
        return Subspace.full(space.n)
    # [x, y] = y^H G x, so the constraint rows are B^H G
    return Subspace(null_space(M.basis.conj().T @ space.G, space.ker_g_tol))


def isotropic_part(M: Subspace, space: GramSpace, rank_tol=DEFAULT_RANK_TOL) -> Subspace:
    """``M ∩ M^[perp]``: null space of the compressed Gram matrix, lifted to C^n."""
    _check_in_space(M, space)
    if M.d == 0:
        return M
    Mc = compress_gram(M, space)
    return Subspace(M.basis @ null_space(Mc, rank_tol * space.gram_norm))


@dataclass(frozen=True, eq=False)
class FundamentalDecomposition:
    plus: Subspace
    minus: Subspace
    isotropic: Subspace
    kappa_plus: int
    kappa_minus: int
    kappa_zero: int
    delta_plus: float
    delta_minus: float

    @property
    def kappa_plus_zero(self) -> int:
        return self.kappa_plus + self.kappa_zero

    @property
    def kappa_minus_zero(self) -> int:
        return self.kappa_minus + self.kappa_zero

    @property
    def inertia(self) -> tuple[int, int, int]:
        return (self.kappa_plus, self.kappa_minus, self.kappa_zero)


def fundamental_decomposition(L: Subspace, space: GramSpace,
                              rank_tol=DEFAULT_RANK_TOL) -> FundamentalDecomposition:
    """Split ``L`` into positive, negative and isotropic parts.

    The compressed Gram matrix is diagonalized; eigenvalues above
    ``rank_tol * ||G||`` span the positive part, those below the negative
    threshold span the negative part and the rest is the isotropic part.
    The three parts are mutually [.,.]-orthogonal and Euclidean-orthogonal.
    """
    _check_in_space(L, space)
    if rank_tol is None or rank_tol <= 0:
        raise InputError("rank_tol must be positive")
    n = space.n
    if L.d == 0:
        z = Subspace.zero(n)
        return FundamentalDecomposition(z, z, z, 0, 0, 0, 0.0, 0.0)
    w, V = np.linalg.eigh(compress_gram(L, space))
    thr = rank_tol * space.gram_norm
    pos = w > thr
    neg = w < -thr
    zer = ~(pos | neg)
    B = L.basis
    return FundamentalDecomposition(
        plus=Subspace(B @ V[:, pos]),
        minus=Subspace(B @ V[:, neg]),
        isotropic=Subspace(B @ V[:, zer]),
        kappa_plus=int(pos.sum()),
        kappa_minus=int(neg.sum()),
        kappa_zero=int(zer.sum()),
        delta_plus=float(w[pos].min()) if pos.any() else 0.0,
        delta_minus=float(-w[neg].max()) if neg.any() else 0.0,
    )


def uniform_definiteness_delta(L: Subspace, space: GramSpace, rank_tol=DEFAULT_RANK_TOL):
    """Certified constant of uniform definiteness of ``L``.

    Returns ``delta > 0`` with ``[x, x] >= delta ||x||^2`` on ``L`` when ``L``
    is uniformly positive, ``-delta`` with ``-[x, x] >= delta ||x||^2`` when it
    is uniformly negative, and ``None`` when ``L`` is indefinite, degenerate
    or zero.
    """
    if L.d == 0:
        return None
    w = np.linalg.eigvalsh(compress_gram(L, space))
    thr = rank_tol * space.gram_norm
    if w[0] > thr:
        return float(w[0])
    if w[-1] < -thr:
        return float(w[-1])
    return None


@dataclass(frozen=True, eq=False)
class MarginField:
    """Courant-Fischer margins of the Gram form on the slack subspace.

    ``nu[k]`` is the (k+1)-st smallest eigenvalue of the Gram form compressed
    to ``S(lam, eps)``, the span of right singular vectors of ``A - lam`` with
    singular value at most ``eps``; ``nu_minus[k]`` is the mirror quantity for
    the negated form.  Both are ``+inf`` once ``k >= slack_dim``.
    """

    lam: complex
    epsilon: float
    budgets: tuple[int, ...]
    nu: tuple[float, ...]
    nu_minus: tuple[float, ...]
    slack_dim: int
    slack: Subspace

    def certified_plus(self, k: int) -> bool:
        """Type pi+ with budget ``k`` at this slack (k=0: positive type)."""
        return self._at(self.nu, k) >= self.epsilon

    def certified_minus(self, k: int) -> bool:
        return self._at(self.nu_minus, k) >= self.epsilon

    def _at(self, seq, k):
        if k < 0:
            raise InputError("budget must be non-negative")
        if k < len(seq):
            return seq[k]
        if k >= self.slack_dim:
            return np.inf
        raise InputError(f"budget {k} outside computed range 0..{len(seq) - 1}")

    @property
    def positive_type(self) -> bool:
        return self.certified_plus(0)

    @property
    def negative_type(self) -> bool:
        return self.certified_minus(0)


def definiteness_margin(A, space: GramSpace, lam, epsilon, k_max=None) -> MarginField:
    """Margin field ``nu_k(lam, eps)`` for ``k = 0..k_max``."""
    A = np.asarray(A)
    n = space.n
    if A.shape != (n, n):
        raise InputError(f"A must be {n}x{n}, got {A.shape}")
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    if k_max is None:
        k_max = n
    if k_max < 0:
        raise InputError("k_max must be non-negative")
    lam = complex(lam)
    N = A - lam * np.eye(n)
    _, s, Vh = np.linalg.svd(N)
    S = Subspace(Vh[s <= epsilon].conj().T)
    if S.d:
        w = np.linalg.eigvalsh(compress_gram(S, space))
    else:
        w = np.zeros(0)
    budgets = tuple(range(k_max + 1))
    nu = tuple(float(w[k]) if k < w.size else np.inf for k in budgets)
    nu_minus = tuple(float(-w[-1 - k]) if k < w.size else np.inf for k in budgets)
    return MarginField(lam, float(epsilon), budgets, nu, nu_minus, S.d, S)
