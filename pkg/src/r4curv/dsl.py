"""Expression language for closed-form immersions (u, v) -> R^4.

Expressions are parsed into immutable :class:`ExprNode` trees and evaluated
either as plain floats (:func:`evaluate`) or as second-order jets
(:func:`eval_jet2`) by forward-mode differentiation.  Jet components may be
numpy arrays, in which case a whole grid is evaluated in one tree walk.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
VARIABLES = ("u", "v")
COMPONENTS = ("x", "y", "z", "w")


class ParseError(ValueError):
    """Syntax or name-resolution error; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class EvaluationError(ArithmeticError):
    """Domain error raised while evaluating ``node``."""

    def __init__(self, message: str, node: "ExprNode | None" = None):
        self.node = node
        if node is not None:
            message = f"{message} in '{to_source(node)}'"
        super().__init__(message)


class SurfaceFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(ValueError):
    """A chart point lies outside a non-periodic domain."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class ExprNode:
    """Node of an expression tree.

    ``kind`` is one of ``constant``, ``variable``, ``parameter``, ``unary``,
    ``binary`` or ``call``.  ``name`` holds the variable/parameter name, the
    operator symbol or the function tag; ``value`` is used by constants.
    """

    kind: str
    name: str = ""
    value: float = 0.0
    children: tuple["ExprNode", ...] = ()

    def __post_init__(self):
        arity = {"constant": 0, "variable": 0, "parameter": 0, "unary": 1, "binary": 2, "call": 1}
        if self.kind not in arity:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.children) != arity[self.kind]:
            raise ValueError(f"{self.kind} node needs {arity[self.kind]} children")


def const(value: float, name: str = "") -> ExprNode:
    return ExprNode("constant", name=name, value=float(value))


def var(name: str) -> ExprNode:
    return ExprNode("variable", name=name)


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<id>[A-Za-z_][A-Za-z_0-9]*|π)
      | (?P<op>[-+*/^(),])
    )""",
    re.VERBOSE,
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ParseError(f"unexpected character {src[bad]!r}", len(src[:bad].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(src[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(src.encode())))
    return tokens


class _Parser:
    def __init__(self, src: str, parameters):
        self.tokens = _tokenize(src)
        self.i = 0
        self.parameters = set(parameters)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            found = tok[1] or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok[2])
        return tok

    def parse(self) -> ExprNode:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = ExprNode("binary", name=op, children=(node, self.term()))
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = ExprNode("binary", name=op, children=(node, self.factor()))
        return node

    def factor(self):
        if self.peek()[1] == "-":
            self.take()
            return ExprNode("unary", name="-", children=(self.factor(),))
        if self.peek()[1] == "+":
            self.take()
            return self.factor()
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            if self.peek()[1] == "-":
                self.take()
                exponent = ExprNode("unary", name="-", children=(self.atom(),))
            else:
                exponent = self.atom()
            return ExprNode("binary", name="^", children=(base, exponent))
        return base

    def atom(self):
        kind, text, offset = self.take()
        if kind == "num":
            return const(float(text))
        if kind == "id":
            if text in ("pi", "π"):
                return const(math.pi, "pi")
            if text in VARIABLES:
                return var(text)
            if text in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ParseError(f"{text}() takes 1 argument, got {len(args)}", offset)
                return ExprNode("call", name=text, children=(args[0],))
            if text in self.parameters:
                return ExprNode("parameter", name=text)
            raise ParseError(f"unknown identifier {text!r}", offset)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {text or 'end of input'!r}", offset)


def parse_expression(src: str, parameters=()) -> ExprNode:
    """Parse ``src`` into an expression tree.

    ``parameters`` lists the names that may appear besides ``u``, ``v``,
    ``pi`` and the function names; any other identifier is an error.
    """
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    return _Parser(src, parameters).parse()


def to_source(node: ExprNode) -> str:
    """Fully parenthesized source text; ``parse_expression`` inverts it."""
    k = node.kind
    if k == "constant":
        if node.name == "pi":
            return "pi"
        return repr(node.value) if node.value >= 0 else f"(-{repr(-node.value)})"
    if k in ("variable", "parameter"):
        return node.name
    if k == "unary":
        return f"(-{to_source(node.children[0])})"
    if k == "call":
        return f"{node.name}({to_source(node.children[0])})"
    left, right = node.children
    if node.name == "^":
        return f"({to_source(left)} ^ ({to_source(right)}))"
    return f"({to_source(left)} {node.name} {to_source(right)})"


def substitute(node: ExprNode, mapping: Mapping[str, ExprNode]) -> ExprNode:
    """Replace variables by expressions (simultaneously)."""
    if node.kind == "variable" and node.name in mapping:
        return mapping[node.name]
    if not node.children:
        return node
    return ExprNode(node.kind, node.name, node.value, tuple(substitute(c, mapping) for c in node.children))


def free_names(node: ExprNode) -> set[str]:
    out = set()
    if node.kind in ("variable", "parameter"):
        out.add(node.name)
    for c in node.children:
        out |= free_names(c)
    return out


# ---------------------------------------------------------------------------
# plain evaluation (used as the independent finite-difference oracle)

_MATH = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "sinh": math.sinh, "cosh": math.cosh,
}


def evaluate(node: ExprNode, u: float, v: float, params: Mapping[str, float] | None = None) -> float:
    params = params or {}
    k = node.kind
    if k == "constant":
        return node.value
    if k == "variable":
        return u if node.name == "u" else v
    if k == "parameter":
        return params[node.name]
    if k == "unary":
        return -evaluate(node.children[0], u, v, params)
    if k == "call":
        x = evaluate(node.children[0], u, v, params)
        try:
            return _MATH[node.name](x)
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(str(exc), node) from None
    a = evaluate(node.children[0], u, v, params)
    b = evaluate(node.children[1], u, v, params)
    op = node.name
    try:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return a ** b if a > 0 or float(b).is_integer() else math.nan
    except ZeroDivisionError:
        raise EvaluationError("division by zero", node) from None


# ---------------------------------------------------------------------------
# second-order jets


def _lib(x):
    return math if isinstance(x, float) else np


@dataclass(frozen=True, slots=True)
class Jet2:
    """Value and partial derivatives up to order two of a function of (u, v).

    Entries are floats or same-shaped numpy arrays.
    """

    val: float
    d_u: float = 0.0
    d_v: float = 0.0
    d_uu: float = 0.0
    d_uv: float = 0.0
    d_vv: float = 0.0

    @classmethod
    def constant(cls, c) -> "Jet2":
        return cls(c, 0.0, 0.0, 0.0, 0.0, 0.0)

    def as_tuple(self):
        return (self.val, self.d_u, self.d_v, self.d_uu, self.d_uv, self.d_vv)

    def is_constant(self) -> bool:
        return all(np.all(np.asarray(d) == 0) for d in self.as_tuple()[1:])

    def compose(self, f0, f1, f2) -> "Jet2":
        """Chain rule for phi(self) given phi, phi', phi'' at ``self.val``."""
        a, b = self.d_u, self.d_v
        return Jet2(
            f0,
            f1 * a,
            f1 * b,
            f2 * a * a + f1 * self.d_uu,
            f2 * a * b + f1 * self.d_uv,
            f2 * b * b + f1 * self.d_vv,
        )

    def __add__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.val + other, self.d_u, self.d_v, self.d_uu, self.d_uv, self.d_vv)
        return Jet2(*(x + y for x, y in zip(self.as_tuple(), other.as_tuple())))

    __radd__ = __add__

    def __neg__(self):
        return Jet2(*(-x for x in self.as_tuple()))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(*(x * other for x in self.as_tuple()))
        f, g = self, other
        return Jet2(
            f.val * g.val,
            f.d_u * g.val + f.val * g.d_u,
            f.d_v * g.val + f.val * g.d_v,
            f.d_uu * g.val + 2 * f.d_u * g.d_u + f.val * g.d_uu,
            f.d_uv * g.val + f.d_u * g.d_v + f.d_v * g.d_u + f.val * g.d_uv,
            f.d_vv * g.val + 2 * f.d_v * g.d_v + f.val * g.d_vv,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        x = self.val
        r = 1.0 / x
        return self.compose(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def power(self, c: float) -> "Jet2":
        """self ** c for a constant exponent."""
        x = self.val
        if c == 0:
            return Jet2.constant(x * 0 + 1.0)
        if c == 1:
            return self
        if float(c).is_integer() and c > 0:
            n = int(c)
            f1 = n * x ** (n - 1)
            f2 = n * (n - 1) * x ** (n - 2) if n >= 2 else x * 0.0
            return self.compose(x ** n, f1, f2)
        return self.compose(x ** c, c * x ** (c - 1), c * (c - 1) * x ** (c - 2))


def _func_jet(name: str, j: Jet2) -> Jet2:
    x = j.val
    lib = _lib(x)
    if name == "sin":
        s, c = lib.sin(x), lib.cos(x)
        return j.compose(s, c, -s)
    if name == "cos":
        s, c = lib.sin(x), lib.cos(x)
        return j.compose(c, -s, -c)
    if name == "tan":
        t = lib.tan(x)
        d = 1.0 + t * t
        return j.compose(t, d, 2.0 * t * d)
    if name == "exp":
        e = lib.exp(x)
        return j.compose(e, e, e)
    if name == "log":
        r = 1.0 / x
        return j.compose(lib.log(x), r, -r * r)
    if name == "sqrt":
        s = lib.sqrt(x)
        return j.compose(s, 0.5 / s, -0.25 / (s * x))
    if name == "sinh":
        sh, ch = lib.sinh(x), lib.cosh(x)
        return j.compose(sh, ch, sh)
    if name == "cosh":
        sh, ch = lib.sinh(x), lib.cosh(x)
        return j.compose(ch, sh, ch)
    raise EvaluationError(f"unknown function {name!r}")


def _any(mask) -> bool:
    return bool(np.any(mask))


def eval_jet2(node: ExprNode, u, v, params: Mapping[str, float] | None = None) -> Jet2:
    """Exact second-order jet of ``node`` at (u, v).

    ``u`` and ``v`` may be floats or broadcastable numpy arrays.
    """
    if not isinstance(u, np.ndarray):
        u = float(u)
    if not isinstance(v, np.ndarray):
        v = float(v)
    return _jet(node, u, v, params or {})


def _jet(node, u, v, params) -> Jet2:
    k = node.kind
    if k == "constant":
        return Jet2.constant(node.value)
    if k == "variable":
        if node.name == "u":
            return Jet2(u, 1.0, 0.0, 0.0, 0.0, 0.0)
        return Jet2(v, 0.0, 1.0, 0.0, 0.0, 0.0)
    if k == "parameter":
        try:
            return Jet2.constant(float(params[node.name]))
        except KeyError:
            raise EvaluationError(f"unbound parameter {node.name!r}", node) from None
    if k == "unary":
        return -_jet(node.children[0], u, v, params)
    if k == "call":
        arg = _jet(node.children[0], u, v, params)
        x = arg.val
        if node.name == "log" and _any(np.asarray(x) <= 0):
            raise EvaluationError("log of non-positive argument", node)
        if node.name == "sqrt" and _any(np.asarray(x) <= 0):
            raise EvaluationError("sqrt of non-positive argument", node)
        if node.name == "tan" and _any(np.cos(x) == 0):
            raise EvaluationError("tan at a pole", node)
        out = _func_jet(node.name, arg)
        if not np.all(np.isfinite(out.val)):
            raise EvaluationError(f"{node.name} overflow", node)
        return out
    a = _jet(node.children[0], u, v, params)
    b = _jet(node.children[1], u, v, params)
    op = node.name
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if _any(np.asarray(b.val) == 0):
            raise EvaluationError("division by zero", node)
        return a / b
    # '^': constant exponent, or exp(g log f) for positive bases
    if b.is_constant():
        c = float(np.asarray(b.val).flat[0])
        base = np.asarray(a.val)
        if not float(c).is_integer() and _any(base < 0):
            raise EvaluationError("non-integer power of negative base", node)
        if c < 2 and not float(c).is_integer() and _any(base == 0):
            raise EvaluationError("fractional power at zero", node)
        if c < 0 and _any(base == 0):
            raise EvaluationError("division by zero", node)
        return a.power(c)
    if _any(np.asarray(a.val) <= 0):
        raise EvaluationError("variable exponent needs a positive base", node)
    return _func_jet("exp", b * _func_jet("log", a))


# ---------------------------------------------------------------------------
# surfaces


@dataclass(frozen=True)
class SurfaceDef:
    """Closed-form immersion alpha(u, v) = (x, y, z, w) on a chart rectangle."""

    components: tuple[ExprNode, ExprNode, ExprNode, ExprNode]
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    periodic_u: bool = False
    periodic_v: bool = False
    parameters: Mapping[str, float] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if len(self.components) != 4:
            raise ValueError("an immersion into R^4 needs four components")
        if not self.u_range[0] < self.u_range[1] or not self.v_range[0] < self.v_range[1]:
            raise ValueError("empty domain")

    def wrap(self, u, v):
        """Map (u, v) into the fundamental domain; raise DomainError off an open chart."""
        u = _wrap1(u, self.u_range, self.periodic_u, "u")
        v = _wrap1(v, self.v_range, self.periodic_v, "v")
        return u, v

    def contains(self, u, v) -> bool:
        try:
            self.wrap(u, v)
        except DomainError:
            return False
        return True

    def to_source(self) -> str:
        lines = [f"name = {self.name}"] if self.name else []
        for label, node in zip(COMPONENTS, self.components):
            lines.append(f"{label} = {to_source(node)}")
        for label, rng, per in (("u", self.u_range, self.periodic_u), ("v", self.v_range, self.periodic_v)):
            lines.append(f"{label} in [{rng[0]!r}, {rng[1]!r}] {'periodic' if per else 'open'}")
        for k, val in self.parameters.items():
            lines.append(f"param {k} = {val!r}")
        return "\n".join(lines) + "\n"


def _wrap1(x, rng, periodic, label):
    a, b = rng
    if periodic:
        if isinstance(x, np.ndarray):
            return a + np.mod(x - a, b - a)
        return a + (x - a) % (b - a)
    slack = 1e-12 * max(1.0, abs(a), abs(b))
    if np.any(np.asarray(x) < a - slack) or np.any(np.asarray(x) > b + slack):
        raise DomainError(f"{label} outside [{a}, {b}]")
    return x


def eval_immersion_jet(s: SurfaceDef, u, v) -> tuple[Jet2, Jet2, Jet2, Jet2]:
    """Componentwise jets of the immersion at (u, v) after periodic wrap."""
    u, v = s.wrap(u, v)
    return tuple(eval_jet2(c, u, v, s.parameters) for c in s.components)


def evaluate_surface(s: SurfaceDef, u: float, v: float) -> np.ndarray:
    u, v = s.wrap(u, v)
    return np.array([evaluate(c, u, v, s.parameters) for c in s.components])


def jet_array(jets) -> np.ndarray:
    """Stack four jets into an array of shape (..., 6, 4): derivative order x component."""
    parts = np.broadcast_arrays(*(x for j in jets for x in j.as_tuple()))
    return np.stack(parts, axis=-1).astype(float).reshape(parts[0].shape + (4, 6)).swapaxes(-1, -2)


_DOMAIN = re.compile(r"^([uv])\s+in\s*\[(.*),(.*)\]\s*(periodic|open)?\s*$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*)$")
_PARAM = re.compile(r"^param\s+([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*)$")


def _constant_value(text: str, params, lineno) -> float:
    try:
        node = parse_expression(text.strip(), params)
    except ParseError as exc:
        raise SurfaceFileError(f"malformed number: {exc}", lineno) from None
    if free_names(node) & set(VARIABLES):
        raise SurfaceFileError("expected a constant, found u or v", lineno)
    return evaluate(node, math.nan, math.nan, params)


def parse_surface_file(src: str) -> SurfaceDef:
    """Parse the line-oriented surface format.

    ::

        name = clifford
        x = cos(u)
        y = sin(u)
        z = cos(v)
        w = sin(v)
        u in [0, 2*pi] periodic
        v in [0, 2*pi] periodic
        param r = 1.0
    """
    statements = []
    for lineno, raw in enumerate(src.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for part in line.split(";"):
            part = part.strip()
            if part:
                statements.append((lineno, part))

    params: dict[str, float] = {}
    for lineno, st in statements:
        m = _PARAM.match(st)
        if m:
            pname = m.group(1)
            if pname in params:
                raise SurfaceFileError(f"duplicate parameter {pname!r}", lineno)
            if pname in VARIABLES or pname in FUNCTIONS or pname in ("pi",) + COMPONENTS + ("name",):
                raise SurfaceFileError(f"reserved parameter name {pname!r}", lineno)
            params[pname] = _constant_value(m.group(2), dict(params), lineno)

    name = ""
    comps: dict[str, ExprNode] = {}
    ranges: dict[str, tuple[tuple[float, float], bool]] = {}
    for lineno, st in statements:
        if _PARAM.match(st):
            continue
        m = _DOMAIN.match(st)
        if m:
            label = m.group(1)
            if label in ranges:
                raise SurfaceFileError(f"duplicate domain for {label}", lineno)
            lo = _constant_value(m.group(2), params, lineno)
            hi = _constant_value(m.group(3), params, lineno)
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise SurfaceFileError(f"malformed domain for {label}: need lo < hi", lineno)
            ranges[label] = ((lo, hi), m.group(4) == "periodic")
            continue
        if st.startswith(("u ", "v ", "u\t", "v\t")) and " in" in st:
            raise SurfaceFileError("malformed domain", lineno)
        m = _ASSIGN.match(st)
        if not m:
            raise SurfaceFileError(f"cannot parse {st!r}", lineno)
        key, rhs = m.group(1), m.group(2).strip()
        if key == "name":
            name = rhs
        elif key in COMPONENTS:
            if key in comps:
                raise SurfaceFileError(f"duplicate component {key}", lineno)
            try:
                comps[key] = parse_expression(rhs, params)
            except ParseError as exc:
                raise SurfaceFileError(f"component {key}: {exc}", lineno) from None
        else:
            raise SurfaceFileError(f"unknown key {key!r}", lineno)

    for key in COMPONENTS:
        if key not in comps:
            raise SurfaceFileError(f"missing component {key!r}")
    for label in VARIABLES:
        if label not in ranges:
            raise SurfaceFileError(f"missing domain for {label}")

    surf = SurfaceDef(
        tuple(comps[k] for k in COMPONENTS),
        ranges["u"][0],
        ranges["v"][0],
        ranges["u"][1],
        ranges["v"][1],
        params,
        name,
    )
    _check_periodic(surf)
    return surf


def _check_periodic(s: SurfaceDef, samples: int = 7):
    """Identified edges of a periodic chart must carry the same points."""
    (u0, u1), (v0, v1) = s.u_range, s.v_range
    t = (np.arange(samples) + 0.37) / samples
    checks = []
    if s.periodic_u:
        vs = v0 + t * (v1 - v0)
        checks += [((u0, y), (u1, y)) for y in vs]
    if s.periodic_v:
        us = u0 + t * (u1 - u0)
        checks += [((x, v0), (x, v1)) for x in us]
    for (a, b), (c, d) in checks:
        try:
            p = np.array([evaluate(e, a, b, s.parameters) for e in s.components])
            q = np.array([evaluate(e, c, d, s.parameters) for e in s.components])
        except EvaluationError:
            continue
        if np.max(np.abs(p - q)) > 1e-9 * max(1.0, np.max(np.abs(p))):
            raise SurfaceFileError("periodic chart does not close up at identified edges")
