import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gencontact import jets
from gencontact.jets import Jet, JetOrderError


def random_jet(rng, shape=(), dim=3):
    def c(*s):
        return rng.standard_normal(s) + 1j * rng.standard_normal(s)
    h = c(dim, dim, *shape)
    h = h + np.swapaxes(h, 0, 1)
    return Jet(c(*shape), c(dim, *shape), h, 2, dim)


def close(a: Jet, b: Jet, tol=1e-12):
    for u, v in [(a.val, b.val), (a.grad, b.grad), (a.hess, b.hess)]:
        if np.abs(u - v).max(initial=0) > tol * (1 + np.abs(u).max(initial=0)):
            return False
    return True


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ring_laws(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_jet(rng) for _ in range(3))
    assert close((a + b) + c, a + (b + c))
    assert close((a * b) * c, a * (b * c), 1e-11)
    assert close(a * (b + c), a * b + a * c, 1e-11)
    assert close(a * b, b * a)


def test_product_rule_by_hand():
    x = Jet.variable(np.array([2.0, 3.0]), 0)
    y = Jet.variable(np.array([2.0, 3.0]), 1)
    j = x * y
    assert j.val == 6
    np.testing.assert_array_equal(j.grad, [3, 2])
    np.testing.assert_array_equal(j.hess, [[0, 1], [1, 0]])


def test_reciprocal_and_exp_match_closed_forms():
    p = np.array([0.7])
    x = Jet.variable(p, 0)
    r = jets.reciprocal(x + 1.0)
    assert r.grad[0] == pytest.approx(-1 / 1.7**2)
    assert r.hess[0, 0] == pytest.approx(2 / 1.7**3)
    e = jets.exp(x)
    assert e.val == pytest.approx(np.exp(0.7)) and e.hess[0, 0] == pytest.approx(np.exp(0.7))


def test_matrix_inverse_jet():
    rng = np.random.default_rng(3)
    M = random_jet(rng, (3, 3)) + Jet.const(4 * np.eye(3), 3)
    Mi = jets.inv(M)
    ident = M @ Mi
    assert close(ident, Jet(np.eye(3), np.zeros((3, 3, 3)), np.zeros((3, 3, 3, 3)), 2, 3), 1e-10)


def test_deriv_lowers_order_and_needs_order():
    rng = np.random.default_rng(1)
    a = random_jet(rng, (2,))
    d = a.deriv()
    assert d.order == 1 and d.shape == (2, 3)  # derivative index last
    np.testing.assert_array_equal(d.val, a.grad.T)
    with pytest.raises(JetOrderError):
        d.deriv().deriv()


def test_block_and_transpose():
    rng = np.random.default_rng(2)
    A, B = random_jet(rng, (2, 2)), random_jet(rng, (2, 2))
    M = jets.block([[A, B], [B, A]])
    assert M.shape == (4, 4)
    np.testing.assert_array_equal(M.val[:2, 2:], B.val)
    np.testing.assert_array_equal(M.T.grad[:, 2:, :2], np.swapaxes(B.grad, 1, 2))


def test_einsum_over_tensor_axes():
    rng = np.random.default_rng(4)
    a, b = random_jet(rng, (3,)), random_jet(rng, (3,))
    dot = jets.einsum("i,i->", a, b)
    assert close(dot, (a * b)[0] + (a * b)[1] + (a * b)[2])


def test_embed_into_larger_chart():
    v = Jet.variable(np.array([0.5]), 0)
    x = v * v
    e = x.embed(3, 2)
    assert e.dim == 3 and e.grad[2] == 1 and e.hess[2, 2] == 2 and not np.any(e.grad[:2])
