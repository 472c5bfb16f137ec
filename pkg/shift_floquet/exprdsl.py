"""
Expression language for matrix entries, forcing terms and custom shifts.

Grammar (EBNF)::

    expr    = term , { ( "+" | "-" ) , term } ;
    term    = unary , { ( "*" | "/" ) , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;
    atom    = number | name | name , "(" , expr , ")" | "(" , expr , ")" ;
    number  = digit , { digit } , [ "." , { digit } ] , [ exponent ]
            | "." , digit , { digit } , [ exponent ] ;
    exponent = ( "e" | "E" ) , [ "+" | "-" ] , digit , { digit } ;

Functions: sin cos tan exp ln sqrt abs floor. Constants: pi e.
Any other name is a variable resolved at evaluation time (``t`` and the
parameter map, plus ``s`` for two-argument shift maps).
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

from .errors import DomainError, ExprSyntaxError, UnboundVariable, UnknownFunction

logger = logging.getLogger(__name__)


def _checked_ln(x):
    if x <= 0:
        raise DomainError(f'ln of non-positive value {x!r}', operation='ln')
    return math.log(x)


def _checked_sqrt(x):
    if x < 0:
        raise DomainError(f'sqrt of negative value {x!r}', operation='sqrt')
    return math.sqrt(x)


FUNCTIONS: Dict[str, Callable[[float], float]] = {
    'sin': math.sin,
    'cos': math.cos,
    'tan': math.tan,
    'exp': math.exp,
    'ln': _checked_ln,
    'sqrt': _checked_sqrt,
    'abs': abs,
    'floor': lambda x: float(math.floor(x)),
}

CONSTANTS: Dict[str, float] = {'pi': math.pi, 'e': math.e}


# AST

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: 'Expr'


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Expr'
    right: 'Expr'


@dataclass(frozen=True)
class Call:
    func: str
    arg: 'Expr'


Expr = Union[Number, Constant, Variable, Neg, BinOp, Call]


# Tokenizer

_TOKEN_RE = re.compile(r'''
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
''', re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(src: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            raise ExprSyntaxError(f'unexpected character {src[pos]!r}', position=pos,
                                  expected='number, name, operator or parenthesis')
        kind = match.lastgroup
        if kind != 'ws':
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token('end', '', len(src)))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def accept(self, text: str) -> bool:
        if self.current.kind == 'op' and self.current.text == text:
            self.index += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.current.text or 'end of input'
            raise ExprSyntaxError(f'expected {text!r}, found {found!r}',
                                  position=self.current.pos, expected=text)

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != 'end':
            raise ExprSyntaxError(f'unexpected token {self.current.text!r}',
                                  position=self.current.pos, expected='operator or end of input')
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind == 'op' and self.current.text in '+-':
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.current.kind == 'op' and self.current.text in '*/':
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept('-'):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept('^'):
            # right-associative; the exponent may carry its own unary minus
            return BinOp('^', base, self.unary())
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == 'number':
            self.advance()
            return Number(float(token.text))
        if token.kind == 'name':
            self.advance()
            if self.accept('('):
                if token.text not in FUNCTIONS:
                    raise UnknownFunction(f'unknown function {token.text!r}',
                                          operation='parse', position=token.pos)
                arg = self.expr()
                self.expect(')')
                return Call(token.text, arg)
            if token.text in CONSTANTS:
                return Constant(token.text)
            return Variable(token.text)
        if self.accept('('):
            node = self.expr()
            self.expect(')')
            return node
        found = token.text or 'end of input'
        raise ExprSyntaxError(f'expected operand, found {found!r}', position=token.pos,
                              expected='number, name or "("')


def parse(src: str) -> Expr:
    """Parse ``src`` into an immutable AST."""
    return _Parser(src).parse()


def evaluate(expr: Expr, t: float, params: Optional[Mapping[str, float]] = None) -> float:
    """Evaluate ``expr`` at ``t`` with named parameters."""
    params = params or {}
    try:
        return _eval(expr, float(t), params)
    except ZeroDivisionError as e:
        raise DomainError(f'division by zero at t={t!r}', operation='evaluate', t=t) from e
    except OverflowError as e:
        raise DomainError(f'overflow at t={t!r}', operation='evaluate', t=t) from e
    except DomainError as e:
        raise e.with_context(operation='evaluate', t=t)


def _eval(node: Expr, t: float, params: Mapping[str, float]) -> float:
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Constant):
        return CONSTANTS[node.name]
    if isinstance(node, Variable):
        if node.name == 't':
            return t
        if node.name in params:
            return float(params[node.name])
        raise UnboundVariable(f'unbound variable {node.name!r}', operation='evaluate')
    if isinstance(node, Neg):
        return -_eval(node.operand, t, params)
    if isinstance(node, Call):
        return float(FUNCTIONS[node.func](_eval(node.arg, t, params)))
    left = _eval(node.left, t, params)
    right = _eval(node.right, t, params)
    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if node.op == '/':
        return left / right
    if left < 0 and not float(right).is_integer():
        raise DomainError(f'negative base {left!r} with non-integer exponent {right!r}')
    value = left ** right
    if isinstance(value, complex):
        raise DomainError(f'complex result for {left!r}^{right!r}')
    return float(value)


_PRECEDENCE = {'+': 1, '-': 1, '*': 2, '/': 2, 'neg': 3, '^': 4}


def to_source(node: Expr) -> str:
    """Print an AST back to parseable text (fully parenthesized where needed)."""
    text, _ = _print(node)
    return text


def _print(node: Expr) -> Tuple[str, int]:
    if isinstance(node, Number):
        return repr(node.value), 5
    if isinstance(node, (Constant, Variable)):
        return node.name, 5
    if isinstance(node, Call):
        return f'{node.func}({to_source(node.arg)})', 5
    if isinstance(node, Neg):
        inner, prec = _print(node.operand)
        if prec < _PRECEDENCE['neg']:
            inner = f'({inner})'
        return f'-{inner}', _PRECEDENCE['neg']
    prec = _PRECEDENCE[node.op]
    left, lp = _print(node.left)
    right, rp = _print(node.right)
    if node.op == '^':
        if lp <= prec:
            left = f'({left})'
        if rp < _PRECEDENCE['neg']:
            right = f'({right})'
    else:
        if lp < prec:
            left = f'({left})'
        if rp <= prec:
            right = f'({right})'
    return f'{left} {node.op} {right}', prec


def free_variables(node: Expr) -> frozenset:
    if isinstance(node, Variable):
        return frozenset([node.name])
    if isinstance(node, (Neg,)):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    return frozenset()


class CompiledExpr:
    """Parsed expression bound to a parameter map; callable as f(t)."""

    def __init__(self, source: str, params: Optional[Mapping[str, float]] = None):
        self.source = source
        self.ast = parse(source)
        self.params = dict(params or {})

    def __call__(self, t: float, **extra: float) -> float:
        if extra:
            return evaluate(self.ast, t, {**self.params, **extra})
        return evaluate(self.ast, t, self.params)

    def __repr__(self):
        return f'CompiledExpr({self.source!r})'
