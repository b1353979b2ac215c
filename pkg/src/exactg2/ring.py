"""Exact scalars: rationals, the quadratic field Q(sqrt 3), and sparse
multivariate polynomials over either.

Rationals are :class:`fractions.Fraction`.  Elements of Q(sqrt 3) that happen
to be rational are always collapsed back to ``Fraction`` so that the two
fields mix freely and equality stays value equality.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational


class UsageError(ValueError):
    """Raised when an operation is called outside its contract."""


class QSqrt3:
    """The number ``a + b*sqrt(3)`` with rational ``a`` and ``b``.

    Construct through :func:`sqrt3_number`, which returns a plain Fraction
    when ``b == 0``.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def _split(x):
        if isinstance(x, QSqrt3):
            return x.a, x.b
        if isinstance(x, (int, Rational)):
            return Fraction(x), Fraction(0)
        return NotImplemented

    def __add__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return o
        return sqrt3_number(self.a + o[0], self.b + o[1])

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __sub__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return o
        return sqrt3_number(self.a - o[0], self.b - o[1])

    def __rsub__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return o
        return sqrt3_number(o[0] - self.a, o[1] - self.b)

    def __mul__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return o
        c, d = o
        return sqrt3_number(self.a * c + 3 * self.b * d, self.a * d + self.b * c)

    __rmul__ = __mul__

    def inverse(self):
        norm = self.a * self.a - 3 * self.b * self.b
        return sqrt3_number(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return o
        return self * QSqrt3(*o).inverse() if o[1] else sqrt3_number(self.a / o[0], self.b / o[0])

    def __rtruediv__(self, other):
        return other * self.inverse()

    def __eq__(self, other):
        o = self._split(other)
        if o is NotImplemented:
            return False
        return self.a == o[0] and self.b == o[1]

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def sign(self):
        """Exact sign of the real number a + b*sqrt(3)."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with 3 b^2
        diff = self.a * self.a - 3 * self.b * self.b
        return sa if diff > 0 else sb

    def __lt__(self, other):
        return sign(self - other) < 0

    def __gt__(self, other):
        return sign(self - other) > 0

    def __float__(self):
        return float(self.a) + float(self.b) * 3 ** 0.5

    def __repr__(self):
        return f"QSqrt3({self.a}, {self.b})"

    def __str__(self):
        return _format_sqrt3(self.a, self.b)


def sqrt3_number(a, b=0):
    a, b = Fraction(a), Fraction(b)
    if b == 0:
        return a
    return QSqrt3(a, b)


SQRT3 = QSqrt3(0, 1)


def to_scalar(x):
    """Coerce ints and rationals to Fraction; pass field elements through."""
    if isinstance(x, QSqrt3):
        return sqrt3_number(x.a, x.b)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def sign(x) -> int:
    if isinstance(x, QSqrt3):
        return x.sign()
    return (x > 0) - (x < 0)


def is_rational(x) -> bool:
    return not isinstance(x, QSqrt3)


def _format_sqrt3(a, b):
    def frac(q):
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    if b == 0:
        return frac(a)
    rad = "sqrt3" if b == 1 else ("-sqrt3" if b == -1 else f"{frac(b)}*sqrt3")
    if a == 0:
        return rad
    return f"{frac(a)}{'' if rad.startswith('-') else '+'}{rad}"


def format_scalar(x) -> str:
    if isinstance(x, QSqrt3):
        return _format_sqrt3(x.a, x.b)
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


_SCALAR_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*$")


def parse_scalar(text: str):
    m = _SCALAR_RE.match(text)
    if m:
        return Fraction(m.group(1))
    text = text.replace(" ", "")
    m = re.match(r"^([+-]?\d+(?:/\d+)?)?(?:([+-])(\d+(?:/\d+)?\*)?sqrt3)?$", text)
    if m and m.group(2):
        a = Fraction(m.group(1) or 0)
        b = Fraction(m.group(3)[:-1]) if m.group(3) else Fraction(1)
        return sqrt3_number(a, b if m.group(2) == "+" else -b)
    m = re.match(r"^([+-]?)(?:(\d+(?:/\d+)?)\*)?sqrt3$", text)
    if m:
        b = Fraction(m.group(2) or 1)
        return sqrt3_number(0, -b if m.group(1) == "-" else b)
    raise UsageError(f"cannot parse scalar {text!r}")


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

class Registry:
    """An ordered tuple of variable names shared by a family of polynomials."""

    __slots__ = ("names", "index", "_hash")

    def __init__(self, names):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate variable names in {names}")
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}
        self._hash = hash(names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Registry) and self.names == other.names

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Registry({list(self.names)})"

    def __add__(self, other: "Registry") -> "Registry":
        extra = [n for n in other.names if n not in self.index]
        return Registry(self.names + tuple(extra))

    @property
    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    @property
    def one(self) -> "Polynomial":
        return Polynomial.constant(self, 1)

    def var(self, name: str) -> "Polynomial":
        return Polynomial.variable(self, name)

    def vars(self) -> list["Polynomial"]:
        return [self.var(n) for n in self.names]


EMPTY = Registry(())


def _grlex_key(exps):
    return (sum(exps), exps)


class Polynomial:
    """Sparse polynomial: dict mapping exponent tuples to nonzero scalars.

    Immutable by convention.  Arithmetic with plain scalars is allowed;
    arithmetic between polynomials requires the same registry.
    """

    __slots__ = ("registry", "terms", "_hash")

    def __init__(self, registry: Registry, terms: dict):
        self.registry = registry
        self.terms = terms
        self._hash = None

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, registry, c):
        c = to_scalar(c)
        if not c:
            return cls(registry, {})
        return cls(registry, {(0,) * len(registry): c})

    @classmethod
    def variable(cls, registry, name, power=1):
        try:
            i = registry.index[name]
        except KeyError:
            raise UsageError(f"variable {name!r} not in {registry}") from None
        e = [0] * len(registry)
        e[i] = power
        return cls(registry, {tuple(e): Fraction(1)})

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.registry is not self.registry and other.registry != self.registry:
                raise UsageError(
                    f"registry mismatch: {self.registry.names} vs {other.registry.names}")
            return other
        try:
            return Polynomial.constant(self.registry, to_scalar(other))
        except TypeError:
            return None

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self):
        """The scalar value of a constant polynomial."""
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise UsageError(f"polynomial {self} is not constant")
        return next(iter(self.terms.values()))

    def constant_term(self):
        return self.terms.get((0,) * len(self.registry), Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def used_variables(self) -> list[str]:
        used = set()
        for e in self.terms:
            used.update(i for i, x in enumerate(e) if x)
        return [self.registry.names[i] for i in sorted(used)]

    def linear_coefficients(self):
        """For a polynomial of degree <= 1: (dict name -> coeff, constant)."""
        if self.degree() > 1:
            raise UsageError(f"{self} is not affine-linear")
        coeffs = {}
        for e, c in self.terms.items():
            if any(e):
                coeffs[self.registry.names[e.index(1)]] = c
        return coeffs, self.constant_term()

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e)
            if v is None:
                terms[e] = c
            else:
                v = v + c
                if v:
                    terms[e] = v
                else:
                    del terms[e]
        return Polynomial(self.registry, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.registry, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = to_scalar(c)
        if not c:
            return Polynomial(self.registry, {})
        return Polynomial(self.registry, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return Polynomial(self.registry, {})
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        terms = {}
        get = terms.get
        for e2, c2 in b.items():
            for e1, c1 in a.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                v = get(e)
                terms[e] = c1 * c2 if v is None else v + c1 * c2
        return Polynomial(self.registry, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise UsageError("negative powers are not polynomials")
        result = Polynomial.constant(self.registry, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        """Division by a nonzero scalar only; see :meth:`divexact`."""
        if isinstance(other, Polynomial):
            if other.is_constant() and other:
                other = other.constant_value()
            else:
                return self.divexact(other)
        return self.scale(1 / to_scalar(other))

    def leading(self):
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def divexact(self, divisor: "Polynomial") -> "Polynomial":
        """Quotient of an exact division; raises if the division leaves a remainder."""
        divisor = self._coerce(divisor)
        if not divisor.terms:
            raise ZeroDivisionError("polynomial division by zero")
        if divisor.is_constant():
            return self.scale(1 / divisor.constant_value())
        le, lc = divisor.leading()
        rem = dict(self.terms)
        quotient = {}
        dterms = list(divisor.terms.items())
        while rem:
            e = max(rem, key=_grlex_key)
            c = rem[e]
            qe = tuple(x - y for x, y in zip(e, le))
            if min(qe) < 0:
                raise UsageError(f"{divisor} does not divide {self}")
            qc = c / lc
            quotient[qe] = qc
            for de, dc in dterms:
                m = tuple(x + y for x, y in zip(de, qe))
                v = rem.get(m, 0) - dc * qc
                if v:
                    rem[m] = v
                else:
                    rem.pop(m, None)
        return Polynomial(self.registry, quotient)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.registry == other.registry and self.terms == other.terms
        try:
            other = to_scalar(other)
        except TypeError:
            return NotImplemented
        if not other:
            return not self.terms
        return self.is_constant() and self.constant_value() == other

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.registry, frozenset(self.terms.items())))
        return self._hash

    # -- evaluation and substitution -------------------------------------
    def evaluate(self, values):
        """Evaluate at a point given as a mapping ``name -> scalar`` (missing names -> 0)."""
        point = [to_scalar(values.get(n, 0)) for n in self.registry.names]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    if not x:
                        v = 0
                        break
                    v = v * x ** k if is_rational(x) else v * _power(x, k)
            total = total + v
        return to_scalar(total)

    def subs(self, mapping, registry: Registry | None = None) -> "Polynomial":
        """Substitute variables by polynomials (or scalars).

        The result lives in ``registry`` (default: this registry).  Variables
        not in ``mapping`` are kept and must exist in the target registry.
        """
        target = registry or self.registry
        images = []
        for n in self.registry.names:
            if n in mapping:
                v = mapping[n]
                if not isinstance(v, Polynomial):
                    v = Polynomial.constant(target, v)
                elif v.registry != target:
                    v = v.lift(target)
                images.append(v)
            else:
                images.append(Polynomial.variable(target, n) if n in target.index else None)
        result = Polynomial(target, {})
        powers = [dict() for _ in images]
        one = Polynomial.constant(target, 1)
        for e, c in self.terms.items():
            term = one.scale(c)
            for i, k in enumerate(e):
                if not k:
                    continue
                if images[i] is None:
                    raise UsageError(f"variable {self.registry.names[i]} missing from target registry")
                p = powers[i].get(k)
                if p is None:
                    p = powers[i][k] = images[i] ** k
                term = term * p
                if not term:
                    break
            result = result + term
        return result

    def lift(self, registry: Registry) -> "Polynomial":
        """Re-express in a registry containing every variable in use."""
        if registry == self.registry:
            return self
        pos = []
        for n in self.registry.names:
            pos.append(registry.index.get(n))
        terms = {}
        width = len(registry)
        for e, c in self.terms.items():
            new = [0] * width
            for i, k in enumerate(e):
                if k:
                    if pos[i] is None:
                        raise UsageError(
                            f"variable {self.registry.names[i]} missing from {registry}")
                    new[pos[i]] = k
            terms[tuple(new)] = c
        return Polynomial(registry, terms)

    # -- rendering --------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.registry.names
        out = []
        for e, c in self.sorted_terms():
            factors = []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(names[i])
                elif k:
                    factors.append(f"{names[i]}^{k}")
            mono = "*".join(factors)
            if isinstance(c, QSqrt3) and c.a and c.b:
                s, mag = 1, c
                coef = f"({format_scalar(c)})"
            else:
                s = sign(c)
                mag = c if s > 0 else -c
                coef = format_scalar(mag)
            body = mono if (mono and mag == 1) else (f"{coef}*{mono}" if mono else coef)
            if not out:
                out.append(("-" if s < 0 else "") + body)
            else:
                out.append((" - " if s < 0 else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def _power(x, k):
    r = Fraction(1)
    for _ in range(k):
        r = r * x
    return r


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*^()]))")


def parse_polynomial(text: str, registry: Registry) -> Polynomial:
    """Parse the canonical textual form (``-12*c56^3*a1 + 1/2*a7``).

    ``sqrt3`` is accepted as a constant.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise UsageError(f"unexpected character at position {pos} in {text!r}")
        tokens.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    tokens.append(None)
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        t = tokens[i]
        i += 1
        return t

    def expr():
        sgn = 1
        if peek() in ("+", "-"):
            sgn = -1 if take() == "-" else 1
        acc = term() * sgn
        while peek() in ("+", "-"):
            op = take()
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term():
        acc = factor()
        while peek() == "*":
            take()
            acc = acc * factor()
        return acc

    def factor():
        t = take()
        if t is None:
            raise UsageError(f"unexpected end of {text!r}")
        if t == "(":
            base = expr()
            if take() != ")":
                raise UsageError(f"unbalanced parentheses in {text!r}")
        elif t == "-":
            return -factor()
        elif t[0].isdigit():
            base = Polynomial.constant(registry, Fraction(t))
        elif t == "sqrt3":
            base = Polynomial.constant(registry, SQRT3)
        elif t[0].isalpha() or t[0] == "_":
            base = Polynomial.variable(registry, t)
        else:
            raise UsageError(f"unexpected token {t!r} in {text!r}")
        if peek() in ("^", "**"):
            take()
            n = take()
            if n is None or not n.isdigit():
                raise UsageError(f"bad exponent in {text!r}")
            base = base ** int(n)
        return base

    result = expr()
    if peek() is not None:
        raise UsageError(f"trailing input {peek()!r} in {text!r}")
    return result


@lru_cache(maxsize=None)
def numbered_registry(prefix: str, count: int) -> Registry:
    """Registry ``prefix1 .. prefix<count>``."""
    return Registry(f"{prefix}{i}" for i in range(1, count + 1))
