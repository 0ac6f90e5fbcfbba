"""Piecewise closed-form Fourier transforms of one-dimensional generators.

A generator is described by its Fourier transform, given piece by piece on
half-open intervals ``[a, b)`` with rational endpoints::

    >>> g = parse_generator({"name": "phi1", "pieces": [
    ...     {"support": ["0", "1"], "expr": "cos(2*pi*w)"},
    ...     {"support": ["1", "2"], "expr": "sin(2*pi*w)"}]})
    >>> evaluate_fourier(g, 0.0)
    (1-0j)

Expressions use a deliberately small grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | atom
    atom   := number | "pi" | "i" | "w" | func "(" expr ")" | "(" expr ")"
    func   := "cos" | "sin" | "exp"

All arithmetic is complex. Generators in more than one dimension are only
accepted as sampled fiber tables (:class:`SampledFibers`).
"""

from __future__ import annotations

import cmath
import csv
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "DSLError", "DSLSyntaxError", "DSLNameError", "DSLEvaluationError",
    "GeneratorSpecError",
    "Number", "Constant", "Variable", "Negate", "BinaryOp", "Call",
    "Expression", "Piece", "PiecewiseSpec", "SampledFibers", "GeneratorSpec",
    "parse_expression", "format_expression", "evaluate", "parse_endpoint",
    "parse_generator", "evaluate_fourier", "read_sampled_fibers",
]


class DSLError(ValueError):
    """Base class for expression and generator description errors."""


class DSLSyntaxError(DSLError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class DSLNameError(DSLError):
    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r} at position {position}")


class DSLEvaluationError(DSLError):
    def __init__(self, reason: str, xi: float | None = None):
        self.reason = reason
        self.xi = xi
        where = "" if xi is None else f" (at xi={xi!r})"
        super().__init__(reason + where)


class GeneratorSpecError(DSLError):
    """Malformed, overlapping or unbounded generator description."""


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Number:
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class Constant:
    name: str  # "pi" or "i"


@dataclass(frozen=True)
class Variable:
    name: str = "w"


@dataclass(frozen=True)
class Negate:
    operand: "Expression"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Number, Constant, Variable, Negate, BinaryOp, Call]

_FUNCS = {"cos": cmath.cos, "sin": cmath.sin, "exp": cmath.exp}
_CONSTS = {"pi": complex(math.pi), "i": 1j}
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]\w*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/()":
                raise DSLSyntaxError(f"unexpected character {ch!r}", m.start(3), text)
            tokens.append(("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise DSLSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def expr(self) -> Expression:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Negate(self.factor())
        return self.atom()

    def atom(self) -> Expression:
        kind, val, pos = self.take()
        if kind == "num":
            return Number(val)
        if kind == "name":
            if val in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in _CONSTS:
                return Constant(val)
            if val == "w":
                return Variable("w")
            raise DSLNameError(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise DSLSyntaxError(f"unexpected {found}", pos, self.text)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    DSLSyntaxError
        On malformed input; carries the character position.
    DSLNameError
        On identifiers other than ``pi``, ``i``, ``w``, ``cos``, ``sin``, ``exp``.
    """
    if not text or not text.strip():
        raise DSLSyntaxError("empty expression", 0, text)
    parser = _Parser(text)
    node = parser.expr()
    kind, val, pos = parser.peek()
    if kind != "end":
        raise DSLSyntaxError(f"unexpected {val!r}", pos, text)
    return node


def format_expression(e: Expression) -> str:
    """Print ``e`` with the fewest parentheses that re-parse to the same tree."""
    if isinstance(e, Number):
        return e.text
    if isinstance(e, Constant):
        return e.name
    if isinstance(e, Variable):
        return "w"
    if isinstance(e, Call):
        return f"{e.func}({format_expression(e.arg)})"
    if isinstance(e, Negate):
        inner = format_expression(e.operand)
        if isinstance(e.operand, BinaryOp):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, BinaryOp):
        prec = _PRECEDENCE[e.op]
        left = format_expression(e.left)
        right = format_expression(e.right)
        if isinstance(e.left, BinaryOp) and _PRECEDENCE[e.left.op] < prec:
            left = f"({left})"
        if isinstance(e.right, BinaryOp) and _PRECEDENCE[e.right.op] <= prec:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expression, w: float) -> complex:
    """Evaluate ``e`` at the real frequency ``w``.

    Division by zero and non-finite intermediate values raise
    :class:`DSLEvaluationError`; no NaN is ever returned.
    """
    try:
        value = _eval(e, complex(w))
    except ZeroDivisionError:
        raise DSLEvaluationError("division by zero", w) from None
    except OverflowError:
        raise DSLEvaluationError("overflow", w) from None
    if not cmath.isfinite(value):
        raise DSLEvaluationError("non-finite value", w)
    return value


def _eval(e: Expression, w: complex) -> complex:
    if isinstance(e, Number):
        return complex(e.value)
    if isinstance(e, Constant):
        return _CONSTS[e.name]
    if isinstance(e, Variable):
        return w
    if isinstance(e, Negate):
        return -_eval(e.operand, w)
    if isinstance(e, Call):
        return _FUNCS[e.func](_eval(e.arg, w))
    a = _eval(e.left, w)
    b = _eval(e.right, w)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise ZeroDivisionError
    return a / b


# ---------------------------------------------------------------------------
# Generators

_DECIMAL = re.compile(r"^[+-]?(\d*)\.?(\d*)$")


def parse_endpoint(value) -> Fraction:
    """Parse an interval endpoint exactly.

    Accepts ``"p/q"`` strings, decimal strings with at most 12 significant
    digits, and JSON integers. Floats are accepted only if their shortest
    decimal representation satisfies the same digit limit.
    """
    if isinstance(value, bool):
        raise GeneratorSpecError(f"endpoint must be a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise GeneratorSpecError("unbounded support: endpoints must be finite")
        value = repr(value)
    if not isinstance(value, str):
        raise GeneratorSpecError(f"endpoint must be a string or number, got {value!r}")
    s = value.strip()
    if s.lower().lstrip("+-") in ("inf", "infinity", "nan"):
        raise GeneratorSpecError("unbounded support: endpoints must be finite")
    if "/" in s:
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise GeneratorSpecError(f"bad rational endpoint {value!r}") from None
    m = _DECIMAL.match(s)
    if m is None or not (m.group(1) or m.group(2)):
        raise GeneratorSpecError(f"bad decimal endpoint {value!r}")
    digits = (m.group(1) + m.group(2)).lstrip("0")
    if len(digits) > 12:
        raise GeneratorSpecError(f"endpoint {value!r} has more than 12 digits")
    return Fraction(s)


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    expr: Expression

    def contains(self, xi: Fraction) -> bool:
        return self.lo <= xi < self.hi


@dataclass(frozen=True)
class PiecewiseSpec:
    """Fourier transform equal to ``expr`` on each ``[lo, hi)`` and 0 elsewhere."""

    pieces: tuple[Piece, ...] = ()

    def __post_init__(self):
        ordered = sorted(self.pieces, key=lambda p: p.lo)
        for p in ordered:
            if not p.lo < p.hi:
                raise GeneratorSpecError(f"empty or reversed interval [{p.lo}, {p.hi})")
        for a, b in zip(ordered, ordered[1:]):
            if b.lo < a.hi:
                raise GeneratorSpecError(
                    f"overlapping pieces [{a.lo}, {a.hi}) and [{b.lo}, {b.hi})")

    @property
    def breakpoints(self) -> list[Fraction]:
        return sorted({x for p in self.pieces for x in (p.lo, p.hi)})


@dataclass(frozen=True)
class SampledFibers:
    """Externally supplied fibers on a midpoint grid (any dimension).

    ``values[node, r]`` is the fiber entry at grid node ``node`` (flat,
    lexicographic order) and window index ``window[r]``.
    """

    n: int
    M: int
    window: tuple[tuple[int, ...], ...]
    values: np.ndarray = field(compare=False, repr=False)

    def __post_init__(self):
        if self.values.shape != (self.M ** self.n, len(self.window)):
            raise GeneratorSpecError(
                f"sampled fibers have shape {self.values.shape}, expected "
                f"{(self.M ** self.n, len(self.window))}")
        if any(len(k) != self.n for k in self.window):
            raise GeneratorSpecError("window indices must have n components")


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    body: PiecewiseSpec | SampledFibers

    @property
    def n(self) -> int:
        return 1 if isinstance(self.body, PiecewiseSpec) else self.body.n


_NAME = re.compile(r"^[A-Za-z_][\w.\-]*$")


def parse_generator(record: dict, base_dir: str | Path | None = None) -> GeneratorSpec:
    """Build a generator from a scenario record.

    ``{"name": ..., "pieces": [{"support": [a, b], "expr": "..."}, ...]}``
    describes a 1-D piecewise Fourier transform;
    ``{"name": ..., "sampled": {"n": n, "grid": M, "window": [[k...], ...],
    "file": "fibers.csv"}}`` loads a sampled fiber table relative to
    ``base_dir``.
    """
    if not isinstance(record, dict):
        raise GeneratorSpecError("generator record must be an object")
    name = record.get("name")
    if not isinstance(name, str) or not _NAME.match(name):
        raise GeneratorSpecError(f"generator name must be an identifier, got {name!r}")
    has_pieces = "pieces" in record
    has_sampled = "sampled" in record
    if has_pieces == has_sampled:
        raise GeneratorSpecError(f"generator {name!r}: exactly one of 'pieces' or 'sampled' required")
    if has_pieces:
        raw = record["pieces"]
        if not isinstance(raw, list):
            raise GeneratorSpecError(f"generator {name!r}: 'pieces' must be a list")
        pieces = []
        for idx, p in enumerate(raw):
            if not isinstance(p, dict) or "support" not in p or "expr" not in p:
                raise GeneratorSpecError(
                    f"generator {name!r}: piece {idx} needs 'support' and 'expr'")
            sup = p["support"]
            if not isinstance(sup, list) or len(sup) != 2:
                raise GeneratorSpecError(
                    f"generator {name!r}: piece {idx} support must be [a, b]")
            if not isinstance(p["expr"], str):
                raise GeneratorSpecError(f"generator {name!r}: piece {idx} expr must be a string")
            pieces.append(Piece(parse_endpoint(sup[0]), parse_endpoint(sup[1]),
                                parse_expression(p["expr"])))
        try:
            body = PiecewiseSpec(tuple(pieces))
        except GeneratorSpecError as exc:
            raise GeneratorSpecError(f"generator {name!r}: {exc}") from None
        return GeneratorSpec(name, body)

    s = record["sampled"]
    try:
        n = int(s["n"])
        M = int(s["grid"])
        window = tuple(tuple(int(c) for c in k) for k in s["window"])
        path = Path(s["file"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GeneratorSpecError(f"generator {name!r}: malformed 'sampled' block ({exc})") from None
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return GeneratorSpec(name, read_sampled_fibers(path, n, M, window))


def read_sampled_fibers(path: str | Path, n: int, M: int,
                        window: tuple[tuple[int, ...], ...]) -> SampledFibers:
    """Read a fiber table with columns ``node, k1..kn, re, im``.

    Entries not listed are zero, but every grid node must appear at least once.
    """
    window = tuple(sorted(set(window)))
    index = {k: r for r, k in enumerate(window)}
    values = np.zeros((M ** n, len(window)), dtype=complex)
    seen = np.zeros(M ** n, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != n + 3:
            raise GeneratorSpecError(f"{path}: expected header with {n + 3} columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                node = int(row[0])
                k = tuple(int(c) for c in row[1:1 + n])
                val = complex(float(row[1 + n]), float(row[2 + n]))
            except (ValueError, IndexError):
                raise GeneratorSpecError(f"{path}:{lineno}: malformed row") from None
            if not 0 <= node < M ** n:
                raise GeneratorSpecError(f"{path}:{lineno}: node {node} outside grid")
            if k not in index:
                raise GeneratorSpecError(f"{path}:{lineno}: index {k} outside declared window")
            values[node, index[k]] = val
            seen[node] = True
    if not seen.all():
        missing = np.flatnonzero(~seen)[:5].tolist()
        raise GeneratorSpecError(f"{path}: grid nodes not covered, e.g. {missing}")
    return SampledFibers(n, M, window, values)


def evaluate_fourier(g: GeneratorSpec, xi: float) -> complex:
    """Value of the generator's Fourier transform at ``xi``.

    Interval membership is decided exactly on the binary value of ``xi``.
    """
    if not isinstance(g.body, PiecewiseSpec):
        raise TypeError(f"generator {g.name!r} has no closed form; use its sampled fibers")
    x = Fraction(xi)
    for piece in g.body.pieces:
        if piece.contains(x):
            try:
                return evaluate(piece.expr, xi)
            except DSLEvaluationError as exc:
                raise DSLEvaluationError(f"generator {g.name!r}: {exc.reason}", xi) from None
    return 0j
