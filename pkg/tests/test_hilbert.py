import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from halpern_lab.errors import ContractViolation
from halpern_lab.hilbert import as_vector, combine, convexity_identity_residual, inner, norm, to_list


@pytest.mark.parametrize(
    "x, y, expected",
    [((1, 0), (0, 1), 0.0), ((1, 2), (3, 4), 11.0), ((0, 0), (5, 7), 0.0)],
)
def test_inner_examples(x, y, expected):
    assert inner(x, y) == expected


def test_norm():
    assert norm((3, 4)) == 5.0


@pytest.mark.parametrize("fn", [inner, lambda x, y: combine(0.5, x, y), lambda x, y: convexity_identity_residual(0.5, x, y)])
def test_dimension_mismatch(fn):
    with pytest.raises(ContractViolation):
        fn((1, 2), (1, 2, 3))


@pytest.mark.parametrize("bad", [[np.nan, 1.0], [np.inf], [], [[1.0, 2.0]]])
def test_as_vector_rejects(bad):
    with pytest.raises(ContractViolation):
        as_vector(bad)


def test_combine_examples():
    x, y = np.array([1.5, -2.0]), np.array([4.0, 0.25])
    assert np.array_equal(combine(1, x, y), x)
    assert np.array_equal(combine(0, x, y), y)
    assert np.array_equal(combine(0.5, (2, 0), (0, 2)), [1.0, 1.0])


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_combine_same_point_is_exact(lam):
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.normal(size=7) * 100
        assert np.array_equal(combine(lam, x, x), x)


def test_combine_rejects_nonfinite_lambda():
    with pytest.raises(ContractViolation):
        combine(np.nan, (1,), (2,))


def test_identity_endpoints_exact():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=5), rng.normal(size=5)
    assert convexity_identity_residual(0, x, y) == 0.0
    assert convexity_identity_residual(1, x, y) == 0.0


def test_identity_derived_example():
    # symbolic expansion (sympy) of both sides gives a zero difference;
    # numerically the residual is rounding only
    rng = np.random.default_rng(3)
    for _ in range(1000):
        x = rng.uniform(-1, 1, 5)
        y = rng.uniform(-1, 1, 5)
        x *= 10 * rng.uniform() / max(1.0, np.linalg.norm(x))
        y *= 10 * rng.uniform() / max(1.0, np.linalg.norm(y))
        assert convexity_identity_residual(0.3, x, y) <= 1e-9


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def vec_pair(draw):
    d = draw(st.sampled_from([1, 2, 5, 20]))
    return draw(arrays(float, d, elements=finite)), draw(arrays(float, d, elements=finite))


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5, allow_nan=False), vec_pair())
def test_identity_holds_for_all_real_lambda(lam, pair):
    x, y = pair
    scale = 1 + np.dot(x, x) + np.dot(y, y)
    assert convexity_identity_residual(lam, x, y) <= 1e-9 * scale


@settings(max_examples=200, deadline=None)
@given(vec_pair(), st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False))
def test_inner_symmetric_bilinear(pair, a, b):
    x, y = pair
    z = np.linspace(-1, 1, x.size)
    assert inner(x, y) == pytest.approx(inner(y, x), rel=1e-12, abs=1e-12)
    lhs = inner(a * x + b * z, y)
    rhs = a * inner(x, y) + b * inner(z, y)
    scale = (abs(a) * norm(x) + abs(b) * norm(z)) * norm(y) + 1
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_vector_json_roundtrip():
    x = np.array([3.0, 3.0])
    text = json.dumps(to_list(x))
    assert text == "[3.0, 3.0]"
    assert np.array_equal(as_vector(json.loads(text)), x)
