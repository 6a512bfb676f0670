"""Parser and dual-number differentiation tests."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from pdmdyn.errors import ExprDomainError, ExprSyntaxError, UnknownIdentifier
from pdmdyn.exprparse import (BinOp, Call, Dual2, Neg, Num, Var, eval_dual,
                              eval_gradient, eval_value, parse_expression,
                              to_source)


class TestParsing:
    def test_well_formed(self):
        expr = parse_expression("1/(1+x^2)")
        assert eval_dual(expr, 0.0)[0] == 1.0

    def test_unclosed_paren_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expression("2*sin(x")
        assert err.value.position == 8  # 1-based column just past the input

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier) as err:
            parse_expression("exp(2*z)", ["x"])
        assert err.value.name == "z"

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifier) as err:
            parse_expression("tan(x)")
        assert err.value.name == "tan"

    def test_trailing_garbage(self):
        with pytest.raises(ExprSyntaxError):
            parse_expression("1+2 3")

    @pytest.mark.parametrize("text", [
        "1+", "((x)", "x@2", "sin()", "", "x^", ")x(", "1..2", "* x", "x x",
    ])
    def test_malformed_inputs_yield_positioned_errors(self, text):
        with pytest.raises((ExprSyntaxError, UnknownIdentifier)) as err:
            parse_expression(text)
        assert getattr(err.value, "position", None) is not None

    def test_precedence_unary_minus_vs_power(self):
        # -x^2 parses as -(x^2)
        assert eval_dual(parse_expression("-x^2"), 3.0)[0] == -9.0

    def test_power_right_associative(self):
        assert eval_value(parse_expression("2^3^2"), {}) == 512.0

    def test_negative_exponent(self):
        assert eval_value(parse_expression("2^-2"), {}) == 0.25

    def test_scientific_notation(self):
        assert eval_value(parse_expression("1.5e2+2E-1"), {}) == pytest.approx(150.2)

    def test_multivariate_identifiers(self):
        expr = parse_expression("x1^2+x2^2", ["x1", "x2"])
        val, grad = eval_gradient(expr, ["x1", "x2"], [1.0, 2.0])
        assert val == 5.0
        assert grad == [2.0, 4.0]


class TestDualEvaluation:
    def test_square(self):
        assert eval_dual(parse_expression("x^2"), 3.0) == (9.0, 6.0, 2.0)

    def test_rational(self):
        v, d1, d2 = eval_dual(parse_expression("1/(1+x^2)"), 1.0)
        assert (v, d1, d2) == pytest.approx((0.5, -0.5, 0.5), abs=1e-15)

    def test_sine_at_zero(self):
        assert eval_dual(parse_expression("sin(x)"), 0.0) == (0.0, 1.0, 0.0)

    def test_exp_chain(self):
        v, d1, d2 = eval_dual(parse_expression("exp(2*x)"), 0.0)
        assert (v, d1, d2) == pytest.approx((1.0, 2.0, 4.0))

    def test_sqrt_and_ln(self):
        v, d1, d2 = eval_dual(parse_expression("ln(sqrt(x))"), 4.0)
        assert v == pytest.approx(math.log(2.0))
        assert d1 == pytest.approx(1 / 8)
        assert d2 == pytest.approx(-1 / 32)

    def test_negative_base_integer_power(self):
        v, d1, _ = eval_dual(parse_expression("x^3"), -2.0)
        assert (v, d1) == (-8.0, 12.0)

    def test_negative_base_fractional_power_rejected(self):
        with pytest.raises(ExprDomainError):
            eval_dual(parse_expression("x^0.5"), -2.0)

    def test_division_by_zero_names_subexpression(self):
        with pytest.raises(ExprDomainError) as err:
            eval_dual(parse_expression("1/(x-1)"), 1.0)
        assert "x-1" in str(err.value)

    def test_ln_of_negative(self):
        with pytest.raises(ExprDomainError):
            eval_dual(parse_expression("ln(x)"), -1.0)

    def test_sqrt_of_negative(self):
        with pytest.raises(ExprDomainError):
            eval_dual(parse_expression("sqrt(x)"), -1.0)

    def test_variable_power_of_variable(self):
        # x^x = exp(x ln x); d/dx = x^x (ln x + 1)
        v, d1, _ = eval_dual(parse_expression("x^x"), 2.0)
        assert v == pytest.approx(4.0)
        assert d1 == pytest.approx(4.0 * (math.log(2.0) + 1.0))


# hypothesis strategy over the grammar's AST
def _exprs():
    leaves = st.one_of(
        st.builds(Num, st.floats(min_value=0.1, max_value=4.0,
                                 allow_nan=False, allow_infinity=False)),
        st.just(Var("x")),
    )

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(lambda a, b, op: BinOp(op, a, b), children, children,
                      st.sampled_from(["+", "-", "*"])),
            st.builds(lambda a, fn: Call(fn, a), children,
                      st.sampled_from(["sin", "cos", "exp"])),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestProperties:
    @given(_exprs())
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, expr):
        assert parse_expression(to_source(expr), ["x"]) == expr

    @given(_exprs(), st.floats(min_value=-1.2, max_value=1.2,
                               allow_nan=False, allow_infinity=False))
    @settings(max_examples=150, deadline=None)
    def test_first_derivative_matches_differences(self, expr, x):
        try:
            val, d1, _ = eval_dual(expr, x)
        except ExprDomainError:
            return
        h = 1e-3
        try:
            vals = [eval_dual(expr, x + k * h)[0] for k in (-2, -1, 1, 2)]
        except ExprDomainError:
            return
        if any(abs(v) > 1e4 for v in vals):
            return
        fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        assert d1 == pytest.approx(fd, rel=1e-6, abs=1e-6 * max(1.0, abs(val)))

    @given(st.text(max_size=30))
    @settings(max_examples=300, deadline=None)
    def test_parsing_is_total(self, text):
        try:
            parse_expression(text, ["x"])
        except (ExprSyntaxError, UnknownIdentifier):
            pass  # positioned failure is the contract


class TestDual2:
    def test_seed_and_const(self):
        assert Dual2.seed(2.0) == Dual2(2.0, 1.0, 0.0)
        assert Dual2.const(3.0) == Dual2(3.0, 0.0, 0.0)
