import numpy as np
import pytest

from pispec.core import GramSpace, definiteness_margin, fundamental_decomposition
from pispec.errors import InputError
from pispec.gallery import (
    Block, CanonicalSpec, TruncationFamily, canonical_pair, g_symmetry_residual,
    random_canonical_spec, random_g_symmetric, random_scramble, truncation_family,
)
from pispec.jordan import classify_point, jordan_structures, kernel_basis


def _ga_ok(A, space):
    GA = space.G @ A
    return g_symmetry_residual(A, space) <= 1e-10 * max(1.0, np.linalg.norm(GA, 2))


def test_smallest_sip_block():
    A, space, truth = canonical_pair(CanonicalSpec([(0, 2, 1)]))
    assert np.array_equal(A, [[0, 1], [0, 0]])
    assert np.array_equal(space.G, [[0, 1], [1, 0]])
    assert truth[0].lengths == (2,) and truth[0].signs == (1,)


def test_diagonal_pair():
    A, space, _ = canonical_pair(CanonicalSpec([(2, 1, 1), (3, 1, -1)]))
    assert np.array_equal(A, np.diag([2.0, 3.0]))
    assert np.array_equal(space.G, np.diag([1.0, -1.0]))


def test_conjugate_pair_block():
    A, space, truth = canonical_pair(CanonicalSpec([(1j, 1), (-1j, 1)]))
    assert np.array_equal(A, np.diag([1j, -1j]))
    assert np.array_equal(space.G, [[0, 1], [1, 0]])
    assert np.array_equal(space.G @ A, [[0, -1j], [1j, 0]])
    assert truth[0].signs is None


def test_unpaired_nonreal_block_is_rejected():
    with pytest.raises(InputError):
        CanonicalSpec([(1j, 1)])
    with pytest.raises(InputError):
        CanonicalSpec([(1j, 2), (-1j, 1)])


def test_scramble_is_well_conditioned():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert np.linalg.cond(random_scramble(6, rng)) <= 10 + 1e-9


def test_random_pairs_are_g_symmetric_and_recovered():
    rng = np.random.default_rng(11)
    for _ in range(60):
        spec = random_canonical_spec(rng)
        A, space, truth = canonical_pair(spec)
        assert _ga_ok(A, space)
        got = jordan_structures(A, space)
        assert len(got) == len(truth)
        for t in truth:
            g = min(got, key=lambda js: abs(js.eigenvalue - t.eigenvalue))
            assert abs(g.eigenvalue - t.eigenvalue) <= 1e-6
            assert sorted(g.lengths) == sorted(t.lengths)
            if t.signs is not None:
                assert sorted(zip(g.lengths, g.signs)) == sorted(zip(t.lengths, t.signs))


def test_scrambling_preserves_kernel_ranks_and_verdicts():
    rng = np.random.default_rng(5)
    for _ in range(30):
        spec = random_canonical_spec(rng, allow_complex=False, scramble=False)
        A0, s0, truth = canonical_pair(spec)
        A1, s1, _ = canonical_pair(CanonicalSpec(spec.blocks, int(rng.integers(1 << 30))))
        for js in truth:
            lam = js.eigenvalue.real
            c0 = classify_point(A0, s0, lam, 1e-4)
            c1 = classify_point(A1, s1, lam, 1e-4)
            assert c0.kernel_inertia == c1.kernel_inertia
            assert c0.verdict == c1.verdict
            assert (c0.budget_plus, c0.budget_minus) == (c1.budget_plus, c1.budget_minus)


def test_random_g_symmetric_invertible():
    space = GramSpace(np.diag([1.0, -1.0]))
    A, meta = random_g_symmetric(2, space, seed=0)
    assert _ga_ok(A, space) and not meta["projected"]
    A, _ = random_g_symmetric(3, GramSpace(np.eye(3)), seed=1)
    assert np.allclose(A, A.conj().T, atol=1e-12)


def test_random_g_symmetric_spectrum_closed_under_conjugation():
    space = GramSpace(np.diag([1.0, 1.0, -1.0, -1.0]))
    A, _ = random_g_symmetric(4, space, seed=7)
    ev = np.linalg.eigvals(A)
    dist = np.abs(ev[:, None] - np.conj(ev)[None, :]).min(axis=1)
    assert dist.max() <= 1e-8


def test_random_g_symmetric_singular_gram():
    space = GramSpace(np.diag([1.0, -1.0, 0.0, 0.0]))
    for seed in range(10):
        A, meta = random_g_symmetric(4, space, seed=seed)
        assert meta["projected"] and _ga_ok(A, space)
    A1, _ = random_g_symmetric(4, space, seed=3)
    A2, _ = random_g_symmetric(4, space, seed=3)
    assert np.array_equal(A1, A2)


def test_multiplication_family_types():
    fam = TruncationFamily("indefinite_multiplication", (8,))
    (A, space), = truncation_family(fam)
    assert np.count_nonzero(A - np.diag(np.diag(A))) == 0
    assert set(np.diag(space.G)) == {1.0, -1.0}
    for t in np.diag(A):
        v = classify_point(A, space, t, 1e-3).verdict.value
        assert v == ("positive_type" if t > 0 else "negative_type")


def test_weighted_shift_zero_weights_reproduces_gram_inertia():
    g = [1.0, -1.0, 0.0, 2.0]
    fam = TruncationFamily("weighted_shift", (4,), {"gram": g, "weights": 0.0})
    (A, space), = truncation_family(fam)
    assert np.array_equal(A, np.zeros((4, 4)))
    mf = definiteness_margin(A, space, 0.0, 1e-3)
    nu = np.array(mf.nu[:4])
    assert (np.sum(nu > 1e-12), np.sum(nu < -1e-12), np.sum(np.abs(nu) <= 1e-12)) == (2, 1, 1)


def test_weighted_shift_is_g_symmetric():
    fam = TruncationFamily("weighted_shift", (4, 8, 12),
                           {"gram": lambda k: np.where(k % 3 == 0, -1.0, 1.0),
                            "weights": lambda k: 1.0 / (k + 1), "diagonal": 0.5})
    for A, space in truncation_family(fam):
        assert _ga_ok(A, space)


def test_verdict_stable_across_truncation_sizes():
    fam = TruncationFamily("indefinite_multiplication", (8, 16))
    verdicts = []
    for A, space in truncation_family(fam):
        mf = definiteness_margin(A, space, 0.5, 0.05)
        verdicts.append(mf.certified_plus(0))
    assert verdicts[0] == verdicts[1]


def test_family_validation():
    with pytest.raises(InputError):
        TruncationFamily("bogus", (4,))
    with pytest.raises(InputError):
        TruncationFamily("weighted_shift", (8, 4))


def test_spec_round_trip():
    spec = CanonicalSpec([Block(1, 2, -1), Block(2j, 1), Block(-2j, 1)], 4)
    again = CanonicalSpec.from_dict(spec.to_dict())
    assert again == spec
    assert spec.size == 4


def test_gallery_kernel_ranks_match_block_data():
    rng = np.random.default_rng(2)
    for _ in range(30):
        spec = random_canonical_spec(rng, allow_complex=False)
        A, space, truth = canonical_pair(spec)
        for js in truth:
            ker = kernel_basis(A, js.eigenvalue.real)
            kp, km, k0 = fundamental_decomposition(ker, space, 1e-8).inertia
            ones = [s for l, s in zip(js.lengths, js.signs) if l == 1]
            assert kp == ones.count(1) and km == ones.count(-1)
            assert k0 == sum(1 for l in js.lengths if l > 1)
