"""Refined decomposition of a subspace and the type-correcting perturbation.

For a subspace ``L`` with fundamental decomposition ``L+ + L- + L0`` the
isotropic part splits into ``L00 = L0 ∩ ker G`` and a Euclidean complement
``L01``.  Each vector of ``L01`` gets a neutral partner in ``P`` so that
``L01 + P`` is a hyperbolic (hence nondegenerate) space, and ``M`` fills up
the rest of C^n inside the companion of everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_RANK_TOL, GramSpace, Subspace, definiteness_margin, fundamental_decomposition, null_space,
    orth, orthogonal_companion,
)
from .errors import HypothesisViolated, InputError, PairingDegenerate
from .jordan import RANK_TOL, TypeClassification, classify_point, kernel_basis

__all__ = [
    "ApsDecomposition", "PerturbationReport", "LabProbe", "LabReport",
    "aps_decompose", "build_type_perturbation", "perturbation_stability_lab",
]

PART_NAMES = ("plus", "minus", "l_00", "l_01", "p", "m")


@dataclass(frozen=True, eq=False)
class ApsDecomposition:
    """Parts of the refined decomposition.

    ``x_basis`` (orthonormal, spans ``L01``) and ``y_basis`` (spans ``P``)
    are paired: ``Y^H G X = I`` and ``Y^H G Y = 0``.  ``j_matrix`` is the
    fundamental symmetry of ``span(X, Y)`` in the coordinates ``(X, Y)``: it
    swaps the two halves.
    """

    l_plus: Subspace
    l_minus: Subspace
    l_00: Subspace
    l_01: Subspace
    p_space: Subspace
    m_space: Subspace
    x_basis: np.ndarray
    y_basis: np.ndarray
    j_matrix: np.ndarray
    isotropic: Subspace
    _q: np.ndarray = field(repr=False)
    _qinv: np.ndarray = field(repr=False)
    _g: np.ndarray = field(repr=False)

    @property
    def pairing_dim(self) -> int:
        return self.x_basis.shape[1]

    def _slices(self):
        sizes = [self.l_plus.d, self.l_minus.d, self.l_00.d, self.pairing_dim,
                 self.pairing_dim, self.m_space.d]
        edges = np.cumsum([0] + sizes)
        return {name: slice(edges[i], edges[i + 1]) for i, name in enumerate(PART_NAMES)}

    def projection(self, part: str):
        """Oblique projection onto one part along the direct sum of the others.

        The definite and paired parts are G-orthogonal to everything else, so
        their projections come from the Gram form directly; only ``L00`` and
        ``M`` go through the inverse of the assembled basis.
        """
        sl = self._slices()
        if part not in sl:
            raise InputError(f"unknown part {part!r}; expected one of {PART_NAMES}")
        G, X, Y = self._g, self.x_basis, self.y_basis
        if part in ("plus", "minus"):
            B = (self.l_plus if part == "plus" else self.l_minus).basis
            if not B.shape[1]:
                return np.zeros_like(self._q)
            BG = B.conj().T @ G
            return B @ np.linalg.solve(BG @ B, BG)
        if part == "l_01":
            return X @ (Y.conj().T @ G)
        if part == "p":
            return Y @ (X.conj().T @ G)
        s = sl[part]
        return self._q[:, s] @ self._qinv[s, :]

    def projections(self):
        return {name: self.projection(name) for name in PART_NAMES}

    def j_operator(self):
        """``J`` on ``C^n``: swaps ``X`` and ``Y``, zero on the other parts."""
        G, X, Y = self._g, self.x_basis, self.y_basis
        return X @ (X.conj().T @ G) + Y @ (Y.conj().T @ G)

    @property
    def pairing_basis(self):
        return np.hstack([self.x_basis, self.y_basis])

    @property
    def assembly(self):
        """Columns of all part bases side by side (an invertible n x n matrix)."""
        return self._q


def aps_decompose(L: Subspace, space: GramSpace, rank_tol=DEFAULT_RANK_TOL) -> ApsDecomposition:
    """Refined decomposition ``C^n = L+ + L- + L00 + (L01 + P) + M``.

    ``P`` is obtained from the minimum-norm solution ``Y`` of
    ``[X L+ L-]^H G Y = [I; 0; 0]``, made neutral by
    ``Y <- Y - X (Y^H G Y) / 2``.  ``M`` is the Euclidean complement of
    ``L00`` in the companion of ``L+ + L- + L01 + P``.
    """
    fd = fundamental_decomposition(L, space, rank_tol)
    n = space.n
    G = space.G
    B0 = fd.isotropic.basis
    ker_tol = max(space.ker_g_tol, rank_tol * space.gram_norm)
    if B0.shape[1]:
        C = null_space(G @ B0, ker_tol)
        l00 = Subspace(orth(B0 @ C)) if C.shape[1] else Subspace.zero(n)
        if l00.d:
            W = B0 - l00.basis @ (l00.basis.conj().T @ B0)
            X = orth(W, rtol=1e-8)[:, :B0.shape[1] - l00.d]
        else:
            X = B0
    else:
        l00 = Subspace.zero(n)
        X = np.zeros((n, 0))
    m = X.shape[1]
    Bp, Bm = fd.plus.basis, fd.minus.basis
    if m:
        R = np.hstack([X, Bp, Bm]).conj().T @ G
        s = np.linalg.svd(R, compute_uv=False)
        if s[-1] <= rank_tol * max(space.gram_norm, 1e-300):
            raise PairingDegenerate(
                f"pairing system is singular (smallest singular value {s[-1]:.3g})")
        rhs = np.zeros((R.shape[0], m))
        rhs[:m] = np.eye(m)
        Y = np.linalg.pinv(R) @ rhs
        YGY = Y.conj().T @ G @ Y
        Y = Y - X @ ((YGY + YGY.conj().T) / 4)
    else:
        Y = np.zeros((n, 0))
    pairing = Subspace(orth(np.hstack([X, Y]))) if m else Subspace.zero(n)
    comp = orthogonal_companion(Subspace.span(np.hstack([Bp, Bm, pairing.basis]), n=n)
                                if (fd.plus.d + fd.minus.d + m) else Subspace.zero(n), space)
    Cb = comp.basis
    if l00.d:
        Cb = Cb - l00.basis @ (l00.basis.conj().T @ Cb)
        M = orth(Cb, rtol=1e-8)[:, :comp.d - l00.d]
    else:
        M = Cb
    Q = np.hstack([Bp, Bm, l00.basis, X, Y, M])
    if Q.shape[1] != n:
        raise PairingDegenerate(
            f"parts have total dimension {Q.shape[1]}, expected {n}; rank threshold too coarse")
    try:
        Qinv = np.linalg.inv(Q)
    except np.linalg.LinAlgError as exc:
        raise PairingDegenerate("parts are linearly dependent") from exc
    J = np.block([[np.zeros((m, m)), np.eye(m)], [np.eye(m), np.zeros((m, m))]])
    return ApsDecomposition(
        l_plus=fd.plus, l_minus=fd.minus, l_00=l00,
        l_01=Subspace(X) if m else Subspace.zero(n),
        p_space=Subspace(orth(Y)) if m else Subspace.zero(n),
        m_space=Subspace(M) if M.shape[1] else Subspace.zero(n),
        x_basis=X, y_basis=Y, j_matrix=J, isotropic=fd.isotropic, _q=Q, _qinv=Qinv, _g=G)


@dataclass(frozen=True, eq=False)
class PerturbationReport:
    f_matrix: np.ndarray
    rank_f: int
    g_symmetry_residual: float
    post_verdict: TypeClassification
    predicted_rank: int
    orientation: str
    kernel_distance: float
    decomposition: ApsDecomposition | None = None


def _numerical_rank(M, rtol=1e-8) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def build_type_perturbation(A, space: GramSpace, lam, orientation="plus",
                            rank_tol=RANK_TOL, epsilon=1e-3) -> PerturbationReport:
    """Finite-rank G-symmetric ``F`` making ``lam`` of definite type for ``A + F``.

    Orientation ``plus``: ``F = P- + J P0`` where ``P-`` projects onto the
    negative part of ``ker(A - lam)`` and ``J P0`` maps the non-kernel-of-G
    isotropic part onto its neutral partner.  Then ``ker(A + F - lam)`` is the
    positive part of the old kernel, so ``lam`` becomes of positive type (or
    regular) and ``rank F = kappa_{-,0}`` of the kernel.  ``minus`` mirrors
    this with ``F = P+ - J P0``.
    """
    if orientation not in ("plus", "minus"):
        raise InputError("orientation must be 'plus' or 'minus'")
    lam = complex(lam)
    if lam.imag != 0:
        raise InputError("the perturbation is defined at real points only")
    lam = lam.real
    A = np.asarray(A)
    n = space.n
    if A.shape != (n, n):
        raise InputError(f"A must be {n}x{n}, got {A.shape}")
    if not space.nondegenerate:
        raise HypothesisViolated("hypothesis violated: ker G ≠ {0}")
    ker = kernel_basis(A, lam, rank_tol)
    if ker.d == 0:
        F = np.zeros_like(A)
        post = classify_point(A, space, lam, epsilon, rank_tol)
        return PerturbationReport(F, 0, 0.0, post, 0, orientation, 0.0, None)
    dec = aps_decompose(ker, space, rank_tol)
    JP0 = dec.j_operator() @ dec.projection("l_01")
    if orientation == "plus":
        F = dec.projection("minus") + JP0
        predicted = dec.l_minus.d + dec.isotropic.d
        target = dec.l_plus
    else:
        F = dec.projection("plus") - JP0
        predicted = dec.l_plus.d + dec.isotropic.d
        target = dec.l_minus
    if not np.iscomplexobj(A) and np.abs(F.imag).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(F).max()):
        F = F.real
    GF = space.G @ F
    resid = float(np.linalg.norm(GF - GF.conj().T, 2))
    post = classify_point(A + F, space, lam, epsilon, rank_tol)
    new_ker = post.kernel
    dist = new_ker.distance(target) if new_ker.d or target.d else 0.0
    return PerturbationReport(
        f_matrix=F, rank_f=_numerical_rank(F) if predicted else 0,
        g_symmetry_residual=resid, post_verdict=post, predicted_rank=predicted,
        orientation=orientation, kernel_distance=dist, decomposition=dec)


@dataclass(frozen=True)
class LabProbe:
    lam: complex
    epsilon: float
    k_a: int
    k_b: int
    a_certified: bool
    b_certified_inflated: bool
    b_certified: bool
    a_certified_inflated: bool
    a_min_budget: int | None
    b_min_budget: int | None

    @property
    def agree(self) -> bool:
        return ((not self.a_certified or self.b_certified_inflated)
                and (not self.b_certified or self.a_certified_inflated))


@dataclass(frozen=True)
class LabReport:
    rank_k: int
    probes: tuple[LabProbe, ...]
    notes: tuple[str, ...] = (
        "matching budgets are inflated by rank K; this matching rule is a modelling choice",
        "only additive perturbations are exercised, not resolvent differences",
    )

    @property
    def agreements(self) -> int:
        return sum(p.agree for p in self.probes)

    @property
    def all_agree(self) -> bool:
        return self.agreements == len(self.probes)


def _min_budget(nu, eps):
    for k, v in enumerate(nu):
        if v >= eps:
            return k
    return None


def perturbation_stability_lab(A, space: GramSpace, K, probes, rank_tol=1e-10,
                               herm_tol=1e-8) -> LabReport:
    """Compare pi+-or-regular certificates of ``A`` and ``B = A + K``.

    Each probe is ``(lam, eps)`` or ``(lam, eps, k)``.  With ``r = rank K`` a
    probe agrees when a certificate for ``A`` at budget ``k_a`` implies one
    for ``B`` at ``k_a + r`` and a certificate for ``B`` at ``k_b`` implies
    one for ``A`` at ``k_b + r``.  An explicit ``k`` sets both budgets;
    otherwise each operator is tested at its own minimal budget, so that
    agreement means the two minimal budgets differ by at most ``r``.
    """
    A = np.asarray(A)
    K = np.asarray(K)
    n = space.n
    if K.shape != (n, n) or A.shape != (n, n):
        raise InputError("A, K and G must have matching sizes")
    GK = space.G @ K
    if np.linalg.norm(GK - GK.conj().T, 2) > herm_tol * max(1.0, np.linalg.norm(GK, 2)):
        raise InputError("G K is not Hermitian, A + K would not be G-symmetric")
    r = _numerical_rank(K, rank_tol) if np.abs(K).max(initial=0.0) > 0 else 0
    B = A + K
    rows = []
    for probe in probes:
        lam, eps = probe[0], float(probe[1])
        ma = definiteness_margin(A, space, lam, eps, k_max=n)
        mb = definiteness_margin(B, space, lam, eps, k_max=n)
        ka, kb = _min_budget(ma.nu, eps), _min_budget(mb.nu, eps)
        if len(probe) > 2:
            k_a = k_b = int(probe[2])
        else:
            k_a = ka if ka is not None else n
            k_b = kb if kb is not None else n
        rows.append(LabProbe(
            lam=complex(lam), epsilon=eps, k_a=k_a, k_b=k_b,
            a_certified=ma.certified_plus(min(k_a, n)),
            b_certified_inflated=mb.certified_plus(min(k_a + r, n)),
            b_certified=mb.certified_plus(min(k_b, n)),
            a_certified_inflated=ma.certified_plus(min(k_b + r, n)),
            a_min_budget=ka, b_min_budget=kb))
    return LabReport(r, tuple(rows))
