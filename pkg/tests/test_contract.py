import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relsz.contract import ContractionBudgetExceeded, contract, elimination_order


def test_single_factor_mean():
    a = np.arange(6.0).reshape(2, 3)
    assert contract([(a, ("x", "y"))]) == pytest.approx(a.mean())


def test_matrix_chain_against_einsum():
    rng = np.random.default_rng(0)
    a, b, c = rng.random((3, 4)), rng.random((4, 5)), rng.random((5, 3))
    want = np.einsum("ij,jk,ki->", a, b, c) / (3 * 4 * 5)
    assert contract([(a, "ij"), (b, "jk"), (c, "ki")]) == pytest.approx(want, rel=1e-12)


def test_keep_returns_marginal():
    rng = np.random.default_rng(1)
    a, b = rng.random((3, 4)), rng.random((4, 2))
    got = contract([(a, "ij"), (b, "jk")], keep=("k", "i"))
    want = np.einsum("ij,jk->ki", a, b) / 4
    assert np.allclose(got, want)


def test_budget():
    a = np.ones((8, 8))
    with pytest.raises(ContractionBudgetExceeded):
        contract([(a, "ab"), (a, "bc"), (a, "ca")], keep=("a", "b", "c"), max_elements=100)


def test_inconsistent_sizes():
    with pytest.raises(ValueError):
        contract([(np.ones((2, 3)), "ij"), (np.ones((4,)), "j")])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_networks_against_einsum(seed):
    rng = np.random.default_rng(seed)
    letters = "abcde"
    sizes = {c: int(rng.integers(1, 4)) for c in letters}
    factors = []
    for _ in range(int(rng.integers(1, 5))):
        labs = "".join(rng.choice(list(letters), size=int(rng.integers(1, 4)), replace=False))
        factors.append((rng.random([sizes[c] for c in labs]), labs))
    used = sorted(set("".join(l for _, l in factors)))
    spec = ",".join(l for _, l in factors) + "->"
    want = np.einsum(spec, *[a for a, _ in factors]) / np.prod([sizes[c] for c in used])
    assert contract(factors) == pytest.approx(want, rel=1e-10)
    assert sorted(elimination_order(factors)) == used
