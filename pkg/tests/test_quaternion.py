import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrqd import Quaternion, SingularQuaternionError, conj, from_real, hamilton_mul, inverse, modulus

ONE = Quaternion(1.0)
I = Quaternion(0, 1, 0, 0)
J = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)

# products of basis units (1, i, j, k) as (sign, index); independent of the library
UNIT_TABLE = {
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}


def expand_product(a, b):
    out = [0.0] * 4
    for p in range(4):
        for q in range(4):
            sign, idx = UNIT_TABLE[(p, q)]
            out[idx] += sign * a[p] * b[q]
    return tuple(out)


# magnitudes kept away from underflow so products stay normal floats
finite = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-6, max_value=1e3),
    st.floats(min_value=-1e3, max_value=-1e-6),
)
quats = st.builds(Quaternion, finite, finite, finite, finite)


@pytest.mark.parametrize("a, b, expected", [
    (I, J, K), (J, I, -K), (J, K, I), (K, J, -I), (K, I, J), (I, K, -J),
    (I, I, -ONE), (J, J, -ONE), (K, K, -ONE),
])
def test_multiplication_table(a, b, expected):
    assert hamilton_mul(a, b) == expected


def test_ijk_is_minus_one():
    assert hamilton_mul(hamilton_mul(I, J), K) == -ONE


def test_expanded_product_value():
    a, b = (1.0, 2.0, 3.0, 4.0), (5.0, 6.0, 7.0, 8.0)
    oracle = expand_product(a, b)
    assert oracle == (-60.0, 12.0, 30.0, 24.0)
    assert hamilton_mul(Quaternion(*a), Quaternion(*b)).components == oracle


@given(quats, quats)
def test_product_matches_table_expansion(a, b):
    got = hamilton_mul(a, b).components
    want = expand_product(a.components, b.components)
    assert all(math.isclose(g, w, rel_tol=1e-12, abs_tol=1e-9) for g, w in zip(got, want))


def test_identity():
    q = Quaternion(0.3, -1.2, 2.5, 4.0)
    assert q * ONE == q == ONE * q
    assert q * 1 == q


def test_conj_examples():
    assert conj(Quaternion(1, 1, 1, 1)) == Quaternion(1, -1, -1, -1)
    assert conj(from_real(3.5)) == from_real(3.5)
    q = Quaternion(1, -2, 3, 0.5)
    assert hamilton_mul(q, conj(q)).isclose(from_real(modulus(q) ** 2))
    assert conj(conj(q)) == q


def test_modulus_examples():
    assert modulus(Quaternion()) == 0.0
    assert modulus(Quaternion(1, 1, 1, 1)) == 2.0
    q = Quaternion(0.1, 2, -3, 7)
    assert modulus(q) == modulus(conj(q))


def test_inverse_examples():
    assert inverse(from_real(2.0)) == from_real(0.5)
    assert inverse(I) == -I
    assert I * (-I) == ONE
    q = Quaternion(1, 1, 1, 1)
    assert inverse(q) == Quaternion(0.25, -0.25, -0.25, -0.25)
    assert (q * inverse(q)).isclose(ONE)


def test_inverse_of_zero_raises():
    with pytest.raises(SingularQuaternionError):
        inverse(Quaternion())
    with pytest.raises(ZeroDivisionError):
        Quaternion(0.0, 0.0, 0.0, 0.0).inverse()


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        Quaternion(0.0, bad, 0.0, 0.0)


@given(quats, quats, quats)
def test_associative(a, b, c):
    lhs, rhs = (a * b) * c, a * (b * c)
    assert lhs.isclose(rhs, 1e-12 * max(1.0, modulus(a) * modulus(b) * modulus(c)))


@given(quats, quats)
def test_modulus_multiplicative(a, b):
    assert math.isclose(modulus(a * b), modulus(a) * modulus(b), rel_tol=1e-12, abs_tol=1e-300)


@given(quats, quats)
def test_conj_reverses_products(a, b):
    lhs, rhs = conj(a * b), conj(b) * conj(a)
    assert lhs.isclose(rhs, 1e-12 * max(1.0, modulus(a) * modulus(b)))


@settings(max_examples=50)
@given(quats, quats, quats)
def test_distributive(a, b, c):
    scale = max(1.0, modulus(a) * (modulus(b) + modulus(c)))
    assert (a * (b + c)).isclose(a * b + a * c, 1e-12 * scale)
    assert ((b + c) * a).isclose(b * a + c * a, 1e-12 * scale)


def test_noncommutative():
    a, b = Quaternion(1, 2, 3, 4), Quaternion(5, 6, 7, 8)
    assert a * b != b * a


def test_immutable():
    q = Quaternion(1, 2, 3, 4)
    with pytest.raises(AttributeError):
        q.w = 5.0
