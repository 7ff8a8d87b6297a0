import numpy as np
import pytest

from pispec.core import GramSpace
from pispec.errors import AtSpectrum, InputError
from pispec.gallery import CanonicalSpec, canonical_pair, sip
from pispec.resolvent import growth_order, interval_bound_check, resolvent_norm

N2 = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_resolvent_norm_examples():
    assert resolvent_norm(np.diag([0.0]), 1j) == pytest.approx(1.0, rel=1e-12)
    assert resolvent_norm(np.diag([1.0, 3.0]), 2) == pytest.approx(1.0, rel=1e-12)


def test_resolvent_norm_of_jordan_block_closed_form():
    for t in (1e-1, 1e-2, 1e-3):
        # singular values of [[-it, 1], [0, -it]] are (sqrt(1 + 4 t^2) +- 1) / 2
        smin = (np.sqrt(1 + 4 * t * t) - 1) / 2
        assert resolvent_norm(N2, 1j * t) == pytest.approx(1 / smin, rel=1e-6)


def test_resolvent_norm_at_spectrum():
    with pytest.raises(AtSpectrum):
        resolvent_norm(np.diag([1.0, 2.0]), 1.0)


def test_growth_of_selfadjoint_pair():
    g = growth_order(np.diag([1.0, 2.0]), 1.0)
    assert g.m_hat == pytest.approx(1.0, abs=0.1) and g.predicted_m == 1
    assert g.r2 >= 0.999


def test_growth_of_sip_block():
    g = growth_order(N2, 0.0)
    assert g.m_hat == pytest.approx(2.0, abs=0.15) and g.predicted_m == 2


def test_growth_of_length_three_block():
    A, _, _ = canonical_pair(CanonicalSpec([(0, 3, 1)]))
    g = growth_order(A, 0.0)
    assert g.m_hat == pytest.approx(3.0, abs=0.2) and g.predicted_m == 3


def test_growth_off_spectrum_is_flat():
    g = growth_order(np.diag([1.0, 2.0]), 1.5)
    assert abs(g.m_hat) < 0.05 and g.predicted_m == 0


def test_growth_grid_and_monotonicity():
    A, _, _ = canonical_pair(CanonicalSpec([(0, 2, 1), (1, 1, -1)], 5))
    g = growth_order(A, 0.0)
    t = np.array(g.t_values)
    assert np.all(np.diff(t) < 0)
    assert np.all(np.diff(g.norms) > 0)
    assert g.fit_window[0] == pytest.approx(1e-4)


def test_growth_argument_checks():
    with pytest.raises(InputError):
        growth_order(N2, 0.0, t_min=1e-8)
    with pytest.raises(InputError):
        growth_order(N2, 0.0, samples=4)
    with pytest.raises(AtSpectrum):
        growth_order(np.diag([1.0 + 1e-3j, 1.0 - 1e-3j]), 1.0, t_min=1e-4, t_max=1e-2, samples=9)


def test_normal_matrix_distance_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.standard_normal(5)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        A = Q @ np.diag(w) @ Q.T
        lam = complex(rng.standard_normal(), 0.3 * rng.standard_normal() + 0.01)
        assert resolvent_norm(A, lam) == pytest.approx(1 / np.abs(w - lam).min(), rel=1e-10)


def test_interval_bound_selfadjoint():
    r = interval_bound_check(np.diag([1.0, 2.0]), GramSpace(np.eye(2)), 0.5, 2.5)
    assert r.positive_type and r.k == 0 and r.bounded
    assert r.c == pytest.approx(1.0, rel=1e-6)


def test_interval_bound_sip_block():
    r = interval_bound_check(N2, GramSpace(sip(2)), -1, 1)
    assert r.k == 1 and r.bounded and np.isfinite(r.c) and r.c > 0
    assert not r.unrestricted_bounded


def test_interval_bound_mixed_diagonal():
    r = interval_bound_check(np.diag([1.0, 1.0]), GramSpace(np.diag([1.0, -1.0])), 0, 2)
    assert r.k == 1 and r.bounded
