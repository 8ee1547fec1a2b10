import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gencontact import kernels
from gencontact.fields import (BinOp, Call, ChartSpec, DomainError, ExpressionSyntaxError, Field, Neg, Num,
                               UnknownIdentifierError, Var, eval_jet, fd_gradient, parse_expr, parse_field,
                               to_source)

import helpers

XYZ = ChartSpec(("x", "y", "z"))
XT = ChartSpec(("x", "t"))
X = ChartSpec(("x",))


def test_chart_names_must_be_unique_and_nonempty():
    with pytest.raises(ValueError):
        ChartSpec(())
    with pytest.raises(ValueError):
        ChartSpec(("x", "x"))
    assert XYZ.dim == 3 and XYZ.index("z") == 2


def test_chart_product_renames_clashes():
    c = ChartSpec(("t",)).product(ChartSpec(("t",)))
    assert c.dim == 2 and len(set(c.names)) == 2


def test_parse_simple_difference():
    ast = parse_expr("z - y*x", XYZ)
    assert ast == BinOp("-", Var("z"), BinOp("*", Var("y"), Var("x")))


def test_parse_zero_is_zero_field():
    f = parse_field("0", XYZ)
    j = eval_jet(f, [0.3, -0.2, 0.9])
    assert j.val == 0 and not np.any(j.grad) and not np.any(j.hess)


def test_sin_times_exp_at_origin():
    f = parse_field("sin(x)*exp(t)", XT)
    assert f([0.0, 0.0]) == 0


def test_product_jet():
    j = eval_jet(parse_field("x*y", ChartSpec(("x", "y"))), [2, 3])
    assert j.val == 6
    np.testing.assert_array_equal(j.grad, [3, 2])
    assert j.hess[0, 1] == 1 and j.hess[1, 0] == 1


def test_heisenberg_style_jet():
    j = eval_jet(parse_field("z - y*x", XYZ), [1, 2, 5])
    assert j.val == 3
    np.testing.assert_array_equal(j.grad, [-2, -1, 1])
    assert j.hess[0, 1] == -1


def test_sin_jet_at_zero():
    j = eval_jet(parse_field("sin(x)", X), [0.0])
    assert j.val == 0 and j.grad[0] == 1 and j.hess[0, 0] == 0


@pytest.mark.parametrize("src, chart, p, expect", [
    ("x^2", X, [3.0], [6.0]),
    ("exp(x)", X, [0.0], [1.0]),
    ("x*y*z", XYZ, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]),
])
def test_fd_gradient_examples(src, chart, p, expect):
    np.testing.assert_allclose(fd_gradient(parse_field(src, chart), p, 1e-5).real, expect, atol=1e-8)


def test_fd_gradient_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_gradient(parse_field("x", X), [0.0], 0.0)


def test_imaginary_unit():
    assert parse_field("i*i", X)([0.5]) == -1
    assert parse_field("x + i", X)([2.0]) == 2 + 1j


def test_integer_powers_including_negative():
    f = parse_field("x^-2", X)
    assert f([2.0]) == pytest.approx(0.25)
    j = eval_jet(f, [2.0])
    assert j.grad[0] == pytest.approx(-2 / 8)
    assert j.hess[0, 0] == pytest.approx(6 / 16)


def test_unary_minus_binds_looser_than_power():
    assert parse_field("-x^2", X)([3.0]) == -9
    assert parse_expr("-x^2", X) == Neg(parse_expr("x^2", X))


def test_rational_literals_are_exact():
    assert parse_expr("0.1", X) == Num(__import__("fractions").Fraction(1, 10))


@pytest.mark.parametrize("src, offset", [("x +", 3), ("(x", 2), ("x $ y", 2), ("2 * * x", 4), ("x^y", 2),
                                         ("x + é", 4)])
def test_syntax_errors_report_byte_offset(src, offset):
    chart = ChartSpec(("x", "y"))
    with pytest.raises(ExpressionSyntaxError) as err:
        parse_expr(src, chart)
    assert err.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("w + 1", XYZ)
    with pytest.raises(UnknownIdentifierError):
        parse_expr("t", XYZ)  # t only when the chart has it
    assert parse_field("t", XT)([0.0, 2.0]) == 2


def test_pole_raises_domain_error():
    f = parse_field("1 / x", X)
    with pytest.raises(DomainError):
        f([0.0])
    assert f([4.0]) == 0.25


@pytest.mark.parametrize("backend", sorted(kernels.BACKENDS))
def test_pole_detected_by_every_backend(backend):
    with pytest.raises(DomainError):
        parse_field("1 / (x - y)", ChartSpec(("x", "y"))).jet(np.array([0.5, 0.5]), backend)


def _ast_close(a, b):
    return to_source(a) == to_source(b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_print_parse_round_trip(seed):
    src = helpers.random_expression(np.random.default_rng(seed))
    ast = parse_expr(src, XYZ)
    again = parse_expr(to_source(ast), XYZ)
    assert again == ast


def test_round_trip_keeps_grouping():
    for src in ["(x - y) - z", "x - (y - z)", "x / (y * z)", "(x + y)^3", "-(x + y)", "x * (-y)", "sin(x)^2",
                "2.5 * x", "x - -y"]:
        ast = parse_expr(src, XYZ)
        assert parse_expr(to_source(ast), XYZ) == ast, src


def _numpy_eval(src):
    """Evaluate an expression with numpy semantics; an oracle independent of the jet evaluator."""
    code = compile(src.replace("^", "**"), "<expr>", "eval")

    def fn(p):
        env = {"x": p[0], "y": p[1], "z": p[2], "sin": np.sin, "cos": np.cos, "exp": np.exp}
        return complex(eval(code, {"__builtins__": {}}, env))

    return fn


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ad_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    src = helpers.random_expression(rng)
    p = rng.uniform(-1, 1, 3)
    ad = eval_jet(parse_field(src, XYZ), p).grad
    fd = helpers.central_gradient(_numpy_eval(src), p)
    assert np.abs(ad - fd).max() / (1 + np.abs(ad).max()) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ad_hessian_matches_finite_differences_of_gradient(seed):
    rng = np.random.default_rng(seed)
    src = helpers.random_expression(rng)
    p = rng.uniform(-1, 1, 3)
    f = parse_field(src, XYZ)
    H = eval_jet(f, p).hess
    fdh = helpers.central_gradient(lambda q: eval_jet(f, q).grad, p)
    assert np.abs(H - fdh).max() / (1 + np.abs(H).max()) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_value_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    src = helpers.random_expression(rng)
    p = rng.uniform(-1, 1, 3)
    assert parse_field(src, XYZ)(p) == pytest.approx(_numpy_eval(src)(p), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_jet_of_product_is_product_of_jets(seed):
    rng = np.random.default_rng(seed)
    a, b = helpers.random_expression(rng), helpers.random_expression(rng)
    p = rng.uniform(-1, 1, 3)
    whole = eval_jet(parse_field(f"({a}) * ({b})", XYZ), p)
    parts = eval_jet(parse_field(a, XYZ), p) * eval_jet(parse_field(b, XYZ), p)
    scale = 1 + abs(whole.val) + np.abs(whole.grad).max() + np.abs(whole.hess).max()
    for u, v in [(whole.val, parts.val), (whole.grad, parts.grad), (whole.hess, parts.hess)]:
        assert np.abs(u - v).max() < 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hessian_exactly_symmetric(seed):
    rng = np.random.default_rng(seed)
    j = eval_jet(parse_field(helpers.random_expression(rng), XYZ), rng.uniform(-1, 1, 3))
    np.testing.assert_array_equal(j.hess, j.hess.T)


@pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")
@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_compiled_and_python_backends_agree(seed):
    rng = np.random.default_rng(seed)
    f = parse_field(helpers.random_expression(rng), XYZ)
    p = rng.uniform(-1, 1, 3)
    a, b = f.jet(p, "compiled"), f.jet(p, "python")
    for u, v in [(a.val, b.val), (a.grad, b.grad), (a.hess, b.hess)]:
        np.testing.assert_allclose(u, v, rtol=1e-13, atol=1e-13)


def test_evaluation_is_deterministic():
    f = parse_field("sin(x*y) / (2 + z^2) + exp(x)", XYZ)
    p = np.array([0.1, -0.7, 0.4])
    assert eval_jet(f, p).val == eval_jet(f, p).val


def test_field_from_exprs_shapes_and_jets():
    F = Field.from_exprs([["x", "x*y"], ["0", "z^2"]], XYZ, "F")
    j = F.at([1.0, 2.0, 3.0])
    assert j.shape == (2, 2)
    np.testing.assert_array_equal(j.val.real, [[1, 2], [0, 9]])
    assert j.grad[1, 0, 1] == 1  # d_y (x y) = x
    assert j.hess[2, 2, 1, 1] == 2


def test_field_rejects_wrong_point_dimension():
    F = Field.from_exprs(["x"], XYZ)
    with pytest.raises(ValueError):
        F.at([0.0, 1.0])


def test_field_lift_to_product_chart():
    F = Field.from_exprs(["t^2"], ChartSpec(("t",)))
    L = F.lift(4, 3)
    j = L.at([9.0, 9.0, 9.0, 2.0])
    assert j.val[0] == 4 and j.grad[3, 0] == 4 and not np.any(j.grad[:3])
    assert j.hess[3, 3, 0] == 2


def test_builtin_corpus_has_no_poles_on_the_box():
    pts = np.random.default_rng(0).uniform(-1, 1, (50, 3))
    for src in helpers.BUILTIN_EXPRS:
        f = parse_field(src, XYZ)
        for p in pts:
            assert np.isfinite(f(p))


def test_call_node_round_trip():
    ast = parse_expr("cos(x + y)", XYZ)
    assert isinstance(ast, Call) and parse_expr(to_source(ast), XYZ) == ast
