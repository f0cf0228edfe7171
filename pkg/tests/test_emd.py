import datetime as dt

import numpy as np
import pytest
from conftest import random_network
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from spillnet.emd import (
    Signature,
    build_signature,
    emd,
    emd_closed_form_1d,
    emd_transport,
    period_emd_table,
    solve_transport,
)
from spillnet.errors import DataError
from spillnet.ingest import PeriodSpec, SectorGrouping
from spillnet.network import SpilloverNetwork


def random_signature(rng, k=None):
    k = k or int(rng.integers(1, 12))
    w = rng.random(k) + 0.01
    return Signature(rng.random(k), w / w.sum())


def test_build_signature_examples():
    s = build_signature([0.3, 0.3, 0.3])
    assert len(s) == 1 and s.weights[0] == 1.0 and s.means[0] == 1.0
    s = build_signature([0.0, 1.0], n_bins=2)
    np.testing.assert_array_equal(s.means, [0.0, 1.0])
    np.testing.assert_array_equal(s.weights, [0.5, 0.5])
    with pytest.raises(DataError):
        build_signature([])


def test_build_signature_recomputation(rng):
    x = rng.random(1000)
    s = build_signature(x, n_bins=20, scale=1.0)
    assert s.weights.sum() == pytest.approx(1.0, abs=1e-12)
    idx = np.minimum((x * 20).astype(int), 19)
    expected = [x[idx == b].mean() for b in range(20) if np.any(idx == b)]
    np.testing.assert_allclose(s.means, expected)


def test_transport_examples():
    s = Signature([0.1, 0.4, 0.9], [0.2, 0.5, 0.3])
    plan = emd_transport(s, s)
    assert plan.cost == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(np.diag(plan.flows), s.weights)
    assert emd(Signature([0.0], [1.0]), Signature([1.0], [1.0])) == 1.0
    a = Signature([0.0, 1.0], [0.5, 0.5])
    b = Signature([0.5], [1.0])
    assert emd_closed_form_1d(a, b) == pytest.approx(0.5)
    assert emd(a, b) == pytest.approx(0.5)


def test_transport_matches_linprog_on_general_costs(rng):
    for _ in range(40):
        m, n = rng.integers(1, 9, 2)
        sup = rng.random(m)
        sup /= sup.sum()
        dem = rng.random(n)
        dem /= dem.sum()
        cost = rng.random((m, n))
        plan = solve_transport(sup, dem, cost)
        a_eq = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(np.ones(m), np.eye(n))])
        lp = linprog(cost.ravel(), A_eq=a_eq, b_eq=np.r_[sup, dem], bounds=(0, None), method="highs")
        assert plan.cost == pytest.approx(lp.fun, abs=1e-9)
        np.testing.assert_allclose(plan.flows.sum(axis=1), sup, atol=1e-9)
        np.testing.assert_allclose(plan.flows.sum(axis=0), dem, atol=1e-9)


def test_unbalanced_rejected():
    with pytest.raises(DataError):
        solve_transport([0.5, 0.5], [0.9], np.ones((2, 1)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_closed_form_and_translation(seed):
    rng = np.random.default_rng(seed)
    a, b = random_signature(rng), random_signature(rng)
    cost = emd(a, b)
    assert cost == pytest.approx(emd_closed_form_1d(a, b), abs=1e-9)
    assert emd_closed_form_1d(a, b) == pytest.approx(emd_closed_form_1d(b, a), abs=1e-12)
    assert emd(a.shifted(3.0), b.shifted(3.0)) == pytest.approx(cost, abs=1e-12)


def _pair(tags, s1, s2):
    codes = [f"c{k}" for k in range(len(tags))]
    g = SectorGrouping({c: ("s", t) for c, t in zip(codes, tags)})
    d = dt.date(2020, 1, 1)
    return [SpilloverNetwork.from_intensity(codes, s1, g, PeriodSpec("p1", d, d)),
            SpilloverNetwork.from_intensity(codes, s2, g, PeriodSpec("p2", d, d))]


def test_period_table_identical_networks(rng):
    net = random_network(rng, 12, 0.6)
    table = period_emd_table([net, net])
    assert table.values.shape == (1, 4, 4)
    assert table.groups == ["Ke", "Cg", "Kg", "Us"]
    finite = table.values[np.isfinite(table.values)]
    assert finite.size and np.all(finite == 0)


def test_period_table_doubled_cell_and_missing(rng):
    tags = ["Ke", "Ke", "Cg", "Cg", "Kg", "Kg", "Us", "Us"]
    s1 = np.zeros((8, 8))
    s1[0, 2], s1[1, 3], s1[0, 3] = 0.2, 0.4, 0.3   # Ke -> Cg
    s1[4, 6], s1[5, 7] = 0.5, 0.25                  # Kg -> Us
    s2 = s1.copy()
    s2[0, 2] *= 2
    s2[1, 3] *= 2
    s2[0, 3] *= 2
    table = period_emd_table(_pair(tags, s1, s2))
    v = table.values[0]
    assert v[0, 1] > 0
    assert v[2, 3] == 0.0
    assert np.isnan(v[0, 0]) and np.isnan(v[3, 2])


def test_signed_pooling_option():
    tags = ["Ke", "Cg", "Kg", "Us"]
    s1 = np.zeros((4, 4))
    s1[0, 1], s1[1, 0] = 0.5, 0.5
    s2 = s1.copy()
    s2[1, 0] = 0.25
    v = period_emd_table(_pair(tags, s1, s2), signed=True).values[0]
    assert v[0, 1] > 0 and np.isfinite(v[1, 0])
