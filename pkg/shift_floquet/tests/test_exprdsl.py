import math

import pytest

from shift_floquet.errors import (
    ConfigError,
    DomainError,
    ExprSyntaxError,
    NumericalError,
    UnboundVariable,
    UnknownFunction,
)
from shift_floquet.exprdsl import (
    BinOp,
    Call,
    CompiledExpr,
    Number,
    Variable,
    evaluate,
    free_variables,
    parse,
    to_source,
)


class TestParse:

    def test_division(self):
        assert parse('1/t') == BinOp('/', Number(1.0), Variable('t'))

    def test_cosine_entry(self):
        node = parse('(1/t)*cos(pi*ln(t)/ln(q))')
        assert isinstance(node, BinOp) and node.op == '*'
        assert isinstance(node.right, Call) and node.right.func == 'cos'
        assert free_variables(node) == {'t', 'q'}

    def test_whitespace_insensitive(self):
        assert parse(' 2 *  t ^2') == parse('2*t^2')

    def test_dangling_operator_reports_position(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse('2*')
        assert info.value.position == 2

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse('(t+1')
        assert info.value.expected == ')'

    def test_bad_character(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse('t $ 2')
        assert info.value.position == 2

    def test_unknown_function(self):
        with pytest.raises(UnknownFunction):
            parse('gamma(t)')

    def test_syntax_errors_are_config_errors(self):
        with pytest.raises(ConfigError):
            parse(')')

    @pytest.mark.parametrize('src', [
        '1/t', '-2^2', '2^3^2', 'a - (b - c)', '(a*b)/(c*d)', '-(t+1)*e', '2^-t',
        'sqrt(abs(t)) + floor(t/2)', '(1/t)*cos(pi*ln(t)/ln(q))', '1.5e-3*t',
    ])
    def test_printer_reparses_to_same_tree(self, src):
        node = parse(src)
        assert parse(to_source(node)) == node


class TestEvaluate:

    @pytest.mark.parametrize('src,expected', [
        ('1/t', 0.5),
        ('-2^2', -4.0),
        ('2^3^2', 512.0),
        ('2^-1', 0.5),
        ('1 - 2 - 3', -4.0),
        ('8/2/2', 2.0),
        ('floor(2.7) + abs(-1)', 3.0),
        ('exp(ln(t))', 2.0),
    ])
    def test_values_at_two(self, src, expected):
        assert evaluate(parse(src), 2.0) == pytest.approx(expected, rel=1e-15)

    def test_cosine_at_q(self):
        value = evaluate(parse('cos(pi*ln(t)/ln(q))'), 2.0, {'q': 2.0})
        assert value == pytest.approx(-1.0, abs=1e-15)

    def test_ln_of_negative(self):
        with pytest.raises(DomainError):
            evaluate(parse('ln(t)'), -1.0)

    def test_sqrt_of_negative(self):
        with pytest.raises(DomainError):
            evaluate(parse('sqrt(t)'), -4.0)

    def test_division_by_zero(self):
        with pytest.raises(DomainError) as info:
            evaluate(parse('1/(t-1)'), 1.0)
        assert info.value.t == 1.0

    def test_negative_base_fractional_exponent(self):
        with pytest.raises(DomainError):
            evaluate(parse('t^(1/3)'), -8.0)

    def test_domain_errors_are_numerical(self):
        with pytest.raises(NumericalError):
            evaluate(parse('ln(0)'), 0.0)

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable):
            evaluate(parse('a*t'), 1.0)

    def test_deterministic(self):
        node = parse('sin(t)^2 + cos(t)^2 + t/3')
        assert evaluate(node, 0.7) == evaluate(node, 0.7)

    def test_algebraic_identities(self, rng):
        plus, power_one = parse('a + b'), parse('a^1')
        for a, b in rng.uniform(-10, 10, size=(100, 2)):
            params = {'a': a, 'b': b}
            assert evaluate(plus, 0.0, params) == pytest.approx(a + b, rel=1e-15, abs=1e-15)
            assert evaluate(power_one, 0.0, params) == pytest.approx(a, rel=1e-15)


class TestCompiledExpr:

    def test_parameters_bound_at_compile_time(self):
        f = CompiledExpr('a/t', {'a': 3.0})
        assert f(2.0) == pytest.approx(1.5)

    def test_extra_variables_at_call_time(self):
        f = CompiledExpr('t*s')
        assert f(3.0, s=2.0) == pytest.approx(6.0)

    def test_pi_and_e_are_constants(self):
        f = CompiledExpr('pi + e')
        assert f(0.0) == pytest.approx(math.pi + math.e)
