"""Ground-truth G-symmetric pairs.

Canonical pairs are direct sums of Jordan blocks with sip-matrix Gram
blocks: a real block ``J_l(lam)`` pairs with ``sign * sip_l`` and a
conjugate pair ``diag(J_l(lam), J_l(conj lam))`` pairs with ``sip_{2l}``.
Optionally the whole pair is moved by a random well-conditioned congruence
``A -> T^-1 A T``, ``G -> T^H G T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import GramSpace
from .errors import InputError
from .jordan import JordanStructure

__all__ = [
    "Block", "CanonicalSpec", "TruncationFamily", "sip", "jordan_block",
    "canonical_pair", "random_g_symmetric", "truncation_family",
    "random_canonical_spec", "random_scramble", "g_symmetry_residual",
]


def sip(l: int):
    """Standard involutory permutation: ones on the anti-diagonal."""
    return np.fliplr(np.eye(l))


def jordan_block(lam, l: int):
    lam = complex(lam)
    dtype = float if lam.imag == 0 else complex
    J = np.diag(np.full(l, lam.real if dtype is float else lam, dtype=dtype))
    return J + np.diag(np.ones(l - 1), 1)


@dataclass(frozen=True)
class Block:
    eigenvalue: complex
    length: int
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eigenvalue", complex(self.eigenvalue))
        if int(self.length) < 1:
            raise InputError("chain length must be positive")
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")

    @property
    def real(self) -> bool:
        return self.eigenvalue.imag == 0


@dataclass(frozen=True)
class CanonicalSpec:
    """Blocks of a canonical pair.

    Non-real eigenvalues are listed with both members of each conjugate
    pair (equal lengths); the sign entry is ignored for them.
    """

    blocks: tuple[Block, ...]
    scramble_seed: int | None = None

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, Block) else Block(*b) for b in self.blocks)
        if not blocks:
            raise InputError("a canonical spec needs at least one block")
        object.__setattr__(self, "blocks", blocks)
        self.pairs()

    def pairs(self):
        """Real blocks and matched conjugate pairs, in spec order."""
        real = [b for b in self.blocks if b.real]
        pending = [b for b in self.blocks if not b.real]
        pairs = []
        while pending:
            b = pending.pop(0)
            for i, c in enumerate(pending):
                if c.length == b.length and abs(c.eigenvalue - b.eigenvalue.conjugate()) == 0:
                    pending.pop(i)
                    pairs.append((b, c) if b.eigenvalue.imag > 0 else (c, b))
                    break
            else:
                raise InputError(f"non-real eigenvalue {b.eigenvalue} has no conjugate partner block")
        return real, pairs

    @property
    def size(self) -> int:
        return sum(b.length for b in self.blocks)

    def to_dict(self):
        return {
            "blocks": [{"re": b.eigenvalue.real, "im": b.eigenvalue.imag,
                        "length": b.length, "sign": b.sign} for b in self.blocks],
            "scramble_seed": self.scramble_seed,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            blocks = tuple(Block(complex(b["re"], b.get("im", 0.0)), int(b["length"]),
                                 int(b.get("sign", 1))) for b in d["blocks"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed canonical spec: {exc}") from exc
        return cls(blocks, d.get("scramble_seed"))


def random_scramble(n: int, rng: np.random.Generator, cond_max: float = 10.0):
    """Real ``T = U diag(s) V^T`` with singular values in ``[1, cond_max]``."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = cond_max ** rng.uniform(0.0, 1.0, n)
    return (U * s) @ V.T


def canonical_pair(spec: CanonicalSpec):
    """Build ``(A, space, truth)``; ``truth`` lists a JordanStructure per eigenvalue.

    The chains in ``truth`` are the canonical basis vectors (mapped by
    ``T^-1`` after scrambling), grouped by eigenvalue; real eigenvalues carry
    the block signs.
    """
    real, pairs = spec.pairs()
    n = spec.size
    has_complex = bool(pairs)
    A = np.zeros((n, n), dtype=complex if has_complex else float)
    G = np.zeros((n, n))
    chains: dict[complex, list[tuple[np.ndarray, int | None]]] = {}
    pos = 0
    E = np.eye(n)
    for b in real:
        l = b.length
        A[pos:pos + l, pos:pos + l] = jordan_block(b.eigenvalue.real, l)
        G[pos:pos + l, pos:pos + l] = b.sign * sip(l)
        chains.setdefault(b.eigenvalue, []).append((E[:, pos:pos + l], b.sign))
        pos += l
    for up, down in pairs:
        l = up.length
        A[pos:pos + l, pos:pos + l] = jordan_block(up.eigenvalue, l)
        A[pos + l:pos + 2 * l, pos + l:pos + 2 * l] = jordan_block(down.eigenvalue, l)
        G[pos:pos + 2 * l, pos:pos + 2 * l] = sip(2 * l)
        chains.setdefault(up.eigenvalue, []).append((E[:, pos:pos + l], None))
        chains.setdefault(down.eigenvalue, []).append((E[:, pos + l:pos + 2 * l], None))
        pos += 2 * l
    if spec.scramble_seed is not None:
        T = random_scramble(n, np.random.default_rng(spec.scramble_seed))
        Tinv = np.linalg.inv(T)
        A = Tinv @ A @ T
        G = T.T @ G @ T
        G = (G + G.T) / 2
    else:
        Tinv = None
    truth = []
    for lam, items in chains.items():
        cs = [c if Tinv is None else Tinv @ c for c, _ in items]
        cs = [c / np.linalg.norm(c[:, 0]) for c in cs]
        order = np.argsort([-c.shape[1] for c in cs], kind="stable")
        cs = [cs[i] for i in order]
        lengths = [c.shape[1] for c in cs]
        weyr = tuple(sum(1 for l in lengths if l >= k) for k in range(1, max(lengths) + 1))
        signs = None if lam.imag else tuple(items[i][1] for i in order)
        truth.append(JordanStructure(lam, tuple(cs), weyr, signs))
    truth.sort(key=lambda js: (js.eigenvalue.real, js.eigenvalue.imag))
    return A, GramSpace(G), truth


def g_symmetry_residual(A, space: GramSpace) -> float:
    GA = space.G @ np.asarray(A)
    return float(np.linalg.norm(GA - GA.conj().T, 2))


def random_g_symmetric(n: int, space: GramSpace, seed: int, real: bool = False):
    """Random ``A`` with ``G A`` Hermitian, returned as ``(A, meta)``.

    A Hermitian ``H`` is drawn and compressed to ``ran G`` (``H -> P H P``),
    which makes ``G A = H`` solvable; ``A = G^+ H + K Z`` then adds an
    arbitrary component mapping into ``ker G``.  ``meta["projected"]`` is
    true when ``G`` is singular and the projection was needed.
    """
    if space.n != n:
        raise InputError(f"Gram matrix is {space.n}x{space.n}, requested n={n}")
    rng = np.random.default_rng(seed)
    G = space.G
    if real:
        X = rng.standard_normal((n, n))
    else:
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (X + X.conj().T) / 2
    K = space.kernel().basis
    if K.shape[1] == 0:
        A = np.linalg.solve(G, H)
        return A, {"projected": False, "seed": int(seed)}
    P = np.eye(n) - K @ K.conj().T
    H = P @ H @ P
    Gp = np.linalg.pinv(G, rcond=space.ker_g_tol / max(space.gram_norm, 1e-300), hermitian=True)
    Z = rng.standard_normal((K.shape[1], n))
    if not real:
        Z = Z + 1j * rng.standard_normal((K.shape[1], n))
    A = Gp @ H + K @ Z
    if real:
        A = A.real
    return A, {"projected": True, "seed": int(seed)}


@dataclass(frozen=True)
class TruncationFamily:
    """Matrix truncations of a prototype operator.

    ``indefinite_multiplication``: ``A = diag(a(t_j))``, ``G = diag(w(t_j))``
    on the midpoint grid of ``params["interval"]`` (default ``[-1, 1]``).
    ``weighted_shift``: ``G = diag(g)`` and ``G A`` a Hermitian tridiagonal
    matrix with diagonal ``params["diagonal"]`` and off-diagonal ``params["weights"]``.
    ``custom``: ``params["builder"](n) -> (A, G)``.
    """

    kind: str
    sizes: tuple[int, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.kind not in ("indefinite_multiplication", "weighted_shift", "custom"):
            raise InputError(f"unknown truncation family kind {self.kind!r}")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InputError("sizes must be non-empty and positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InputError("sizes must be increasing")


def _as_func(f, default):
    if f is None:
        return default
    if callable(f):
        return f
    c = float(f)
    return lambda t: np.full_like(t, c)


def _multiplication(n, params):
    lo, hi = params.get("interval", (-1.0, 1.0))
    a = _as_func(params.get("a"), lambda t: t)
    w = _as_func(params.get("w"), np.sign)
    h = (hi - lo) / n
    t = lo + (np.arange(n) + 0.5) * h
    return np.diag(np.asarray(a(t), dtype=float)), np.diag(np.asarray(w(t), dtype=float))


def _seq(value, n, default):
    if value is None:
        return np.full(n, default, dtype=float)
    if callable(value):
        return np.asarray(value(np.arange(n)), dtype=float)
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        return np.full(n, float(v))
    if v.size < n:
        raise InputError(f"parameter sequence of length {v.size} too short for n={n}")
    return v[:n]


def _weighted_shift(n, params):
    g = _seq(params.get("gram"), n, 1.0)
    d = _seq(params.get("diagonal"), n, 0.0)
    w = _seq(params.get("weights"), max(n - 1, 0), 1.0)
    H = np.diag(d) + np.diag(w, 1) + np.diag(w, -1)
    G = np.diag(g)
    zero = np.abs(g) <= 1e-14 * max(1.0, np.abs(g).max())
    # keep G A = H solvable when some weights vanish
    H[zero, :] = 0
    H[:, zero] = 0
    ginv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, g))
    return ginv[:, None] * H, G


def truncation_family(fam: TruncationFamily):
    """List of ``(A_n, space_n)`` for each size of the family."""
    out = []
    for n in fam.sizes:
        if fam.kind == "indefinite_multiplication":
            A, G = _multiplication(n, fam.params)
        elif fam.kind == "weighted_shift":
            A, G = _weighted_shift(n, fam.params)
        else:
            builder = fam.params.get("builder")
            if builder is None:
                raise InputError("custom family needs params['builder']")
            A, G = builder(n)
        out.append((np.asarray(A), GramSpace(G)))
    return out


def random_canonical_spec(rng: np.random.Generator, n_blocks: int | None = None,
                          max_length: int = 3, allow_complex: bool = True,
                          real_values: Sequence[float] = (-3, -2, -1, 0, 1, 2, 3),
                          scramble: bool = True, min_length: int = 1,
                          keep: Callable[[CanonicalSpec], bool] | None = None) -> CanonicalSpec:
    """Random canonical spec with well separated eigenvalues.

    Real eigenvalues are drawn from ``real_values`` (repeats allowed, giving
    derogatory eigenvalues); non-real ones are ``x +- i y`` with integer
    ``x`` and ``y`` in ``{1, 2}``.
    """
    for _ in range(1000):
        k = n_blocks if n_blocks is not None else int(rng.integers(1, 5))
        blocks = []
        for _ in range(k):
            l = int(rng.integers(min_length, max_length + 1))
            if allow_complex and rng.random() < 0.25:
                z = complex(int(rng.integers(-2, 3)), int(rng.integers(1, 3)))
                blocks += [Block(z, l), Block(z.conjugate(), l)]
            else:
                lam = float(rng.choice(list(real_values)))
                blocks.append(Block(lam, l, int(rng.choice([-1, 1]))))
        seed = int(rng.integers(0, 2**31)) if scramble else None
        spec = CanonicalSpec(tuple(blocks), seed)
        if keep is None or keep(spec):
            return spec
    raise InputError("could not draw a canonical spec satisfying the filter")
