"""Symbolic coefficient expressions over chart coordinates.

Expression trees over named coordinates with rational constants and the
operations +, -, *, integer powers, sin, cos, exp.  The trees are closed
under exact partial differentiation and substitution, and they evaluate
vectorized over numpy arrays.  There is no canonicalization: whether two
expressions agree is decided numerically by sampling (`numeric_equal`),
as equal-looking trees may be structurally different.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class Expr:
    """Base node. Subclasses implement diff/subs/evaluate/free_coords."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __pow__(self, n):
        return power(self, n)

    def __neg__(self):
        return neg(self)

    def diff(self, name):
        raise NotImplementedError

    def subs(self, env):
        raise NotImplementedError

    def evaluate(self, env):
        raise NotImplementedError

    def free_coords(self):
        """Set of coordinate names appearing in the tree."""
        raise NotImplementedError

    def __repr__(self):
        return to_str(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        # keep Fractions exact; everything else becomes float
        if isinstance(value, (Fraction, int)):
            self.value = Fraction(value)
        else:
            self.value = float(value)

    def diff(self, name):
        return ZERO

    def subs(self, env):
        return self

    def evaluate(self, env):
        return float(self.value)

    def free_coords(self):
        return frozenset()


class Coord(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def diff(self, name):
        return ONE if name == self.name else ZERO

    def subs(self, env):
        return env.get(self.name, self)

    def evaluate(self, env):
        return env[self.name]

    def free_coords(self):
        return frozenset((self.name,))


class Add(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = a, b

    def diff(self, name):
        return add(self.a.diff(name), self.b.diff(name))

    def subs(self, env):
        return add(self.a.subs(env), self.b.subs(env))

    def evaluate(self, env):
        return self.a.evaluate(env) + self.b.evaluate(env)

    def free_coords(self):
        return self.a.free_coords() | self.b.free_coords()


class Mul(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = a, b

    def diff(self, name):
        return add(mul(self.a.diff(name), self.b), mul(self.a, self.b.diff(name)))

    def subs(self, env):
        return mul(self.a.subs(env), self.b.subs(env))

    def evaluate(self, env):
        return self.a.evaluate(env) * self.b.evaluate(env)

    def free_coords(self):
        return self.a.free_coords() | self.b.free_coords()


class Neg(Expr):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def diff(self, name):
        return neg(self.a.diff(name))

    def subs(self, env):
        return neg(self.a.subs(env))

    def evaluate(self, env):
        return -self.a.evaluate(env)

    def free_coords(self):
        return self.a.free_coords()


class Pow(Expr):
    """Integer power of a subexpression. Exponent may be negative."""

    __slots__ = ("a", "n")

    def __init__(self, a, n):
        self.a, self.n = a, int(n)

    def diff(self, name):
        da = self.a.diff(name)
        return mul(mul(Const(self.n), power(self.a, self.n - 1)), da)

    def subs(self, env):
        return power(self.a.subs(env), self.n)

    def evaluate(self, env):
        base = self.a.evaluate(env)
        if self.n >= 0:
            return base ** self.n
        return np.asarray(base, dtype=float) ** float(self.n)

    def free_coords(self):
        return self.a.free_coords()


class _Fun(Expr):
    __slots__ = ("a",)
    fname = None
    np_fun = None

    def __init__(self, a):
        self.a = a

    def subs(self, env):
        return type(self)(self.a.subs(env))

    def evaluate(self, env):
        return type(self).np_fun(self.a.evaluate(env))

    def free_coords(self):
        return self.a.free_coords()


class Sin(_Fun):
    __slots__ = ()
    fname, np_fun = "sin", staticmethod(np.sin)

    def diff(self, name):
        return mul(Cos(self.a), self.a.diff(name))


class Cos(_Fun):
    __slots__ = ()
    fname, np_fun = "cos", staticmethod(np.cos)

    def diff(self, name):
        return neg(mul(Sin(self.a), self.a.diff(name)))


class Exp(_Fun):
    __slots__ = ()
    fname, np_fun = "exp", staticmethod(np.exp)

    def diff(self, name):
        return mul(self, self.a.diff(name))


ZERO = Const(0)
ONE = Const(1)


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Const(x)
    raise TypeError("cannot coerce %r to Expr" % (x,))


def is_zero(e):
    return isinstance(e, Const) and e.value == 0


def is_one(e):
    return isinstance(e, Const) and e.value == 1


# Smart constructors: fold constants and drop algebraic identities so that
# differentiation does not blow the trees up.  No reordering, no expansion.

def add(a, b):
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    return add(a, neg(b))


def neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a, b):
    if is_zero(a) or is_zero(b):
        return ZERO
    if is_one(a):
        return b
    if is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def power(a, n):
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        if n >= 0:
            return Const(a.value ** n)
        if a.value != 0:
            return Const(Fraction(1, 1) / (Fraction(a.value) ** (-n))
                         if isinstance(a.value, Fraction)
                         else a.value ** n)
    return Pow(a, n)


def sin(a):
    return Sin(as_expr(a))


def cos(a):
    return Cos(as_expr(a))


def exp(a):
    return Exp(as_expr(a))


def coords(names):
    return [Coord(n) for n in names]


def to_str(e):
    """Parenthesized rendering in the scenario grammar."""
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, Fraction):
            if v.denominator == 1:
                return str(v.numerator) if v >= 0 else "(0 - %d)" % -v.numerator
            s = "%d/%d" % (abs(v.numerator), v.denominator)
            return s if v >= 0 else "(0 - %s)" % s
        return repr(v)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Add):
        return "(%s + %s)" % (to_str(e.a), to_str(e.b))
    if isinstance(e, Mul):
        return "(%s * %s)" % (to_str(e.a), to_str(e.b))
    if isinstance(e, Neg):
        return "(0 - %s)" % to_str(e.a)
    if isinstance(e, Pow):
        return "(%s^%d)" % (to_str(e.a), e.n)
    if isinstance(e, _Fun):
        return "%s(%s)" % (e.fname, to_str(e.a))
    raise TypeError(type(e))


def quasi_random_points(names, count=32, lo=-1.0, hi=1.0):
    """Deterministic low-discrepancy sample of the coordinate box.

    Golden-ratio style lattice: coordinate j of point i is
    frac((i+1) * alpha_j) with alpha_j built from square roots of primes.
    """
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53]
    names = list(names)
    out = {}
    for j, name in enumerate(names):
        alpha = np.sqrt(primes[j % len(primes)]) * (1 + j // len(primes))
        vals = np.mod((np.arange(1, count + 1)) * alpha, 1.0)
        out[name] = lo + (hi - lo) * vals
    return out


def numeric_equal(e1, e2, names=None, tol=1e-10, count=32):
    """Decide expression equality by sampling (spec'd policy: 32 points)."""
    if names is None:
        names = sorted(e1.free_coords() | e2.free_coords())
    env = quasi_random_points(names, count=count)
    v1 = np.asarray(e1.evaluate(env) + np.zeros(count))
    v2 = np.asarray(e2.evaluate(env) + np.zeros(count))
    return bool(np.max(np.abs(v1 - v2)) <= tol)


# ---------------------------------------------------------------------------
# Parser for the scenario expression grammar:
#
#   expr := term (('+' | '-') term)*
#   term := factor ('*' factor)*
#   factor := atom ('^' int)?
#   atom := rational | coord | sin(expr) | cos(expr) | exp(expr) | '(' expr ')'
#           | '-' atom
#   rational := int ('/' int)?
#
# Division only appears inside rational literals.  Errors carry the position
# so the scenario parser can attach file/line context.

class ExprSyntaxError(ValueError):
    def __init__(self, message, pos):
        super().__init__("%s (column %d)" % (message, pos + 1))
        self.pos = pos


_FUNS = {"sin": sin, "cos": cos, "exp": exp}


class _Lexer:
    def __init__(self, src):
        self.src = src
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.src):
            return None
        return self.src[self.pos]

    def take_char(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect_char(self, ch):
        if not self.take_char(ch):
            raise ExprSyntaxError("expected '%s'" % ch, self.pos)

    def take_int(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ExprSyntaxError("expected integer", start)
        return int(self.src[start:self.pos])

    def take_name(self):
        self._skip_ws()
        start = self.pos
        while (self.pos < len(self.src)
               and (self.src[self.pos].isalnum() or self.src[self.pos] == "_")):
            self.pos += 1
        return self.src[start:self.pos]


def _parse_atom(lx, names):
    ch = lx.peek()
    if ch is None:
        raise ExprSyntaxError("unexpected end of expression", lx.pos)
    if ch == "(":
        lx.pos += 1
        e = _parse_sum(lx, names)
        lx.expect_char(")")
        return e
    if ch == "-":
        lx.pos += 1
        return neg(_parse_atom(lx, names))
    if ch.isdigit():
        num = lx.take_int()
        if lx.take_char("/"):
            den = lx.take_int()
            if den == 0:
                raise ExprSyntaxError("zero denominator", lx.pos)
            return Const(Fraction(num, den))
        return Const(num)
    name = lx.take_name()
    if not name:
        raise ExprSyntaxError("unexpected character '%s'" % ch, lx.pos)
    if name in _FUNS:
        lx.expect_char("(")
        e = _parse_sum(lx, names)
        lx.expect_char(")")
        return _FUNS[name](e)
    if names is not None and name not in names:
        raise ExprSyntaxError("unknown coordinate '%s'" % name, lx.pos)
    return Coord(name)


def _parse_factor(lx, names):
    e = _parse_atom(lx, names)
    if lx.take_char("^"):
        sign = -1 if lx.take_char("-") else 1
        n = lx.take_int()
        e = power(e, sign * n)
    return e


def _parse_term(lx, names):
    e = _parse_factor(lx, names)
    while True:
        ch = lx.peek()
        if ch == "*":
            lx.pos += 1
            e = mul(e, _parse_factor(lx, names))
        else:
            return e


def _parse_sum(lx, names):
    e = _parse_term(lx, names)
    while True:
        ch = lx.peek()
        if ch == "+":
            lx.pos += 1
            e = add(e, _parse_term(lx, names))
        elif ch == "-":
            lx.pos += 1
            e = sub(e, _parse_term(lx, names))
        else:
            return e


def parse_expr(src, names=None):
    """Parse `src` into an Expr.

    :param src: source string in the scenario grammar
    :param names: optional collection of legal coordinate names; anything
                  else raises ExprSyntaxError
    """
    lx = _Lexer(src)
    e = _parse_sum(lx, names if names is None else set(names))
    if lx.peek() is not None:
        raise ExprSyntaxError("trailing input", lx.pos)
    return e
