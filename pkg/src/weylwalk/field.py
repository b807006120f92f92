"""Exact arithmetic over F_q(t): dense polynomials and reduced rational functions.

Coefficients live in the prime field Z/qZ (q a small prime) and are stored as
plain ints in [0, q).  Polynomials are coefficient tuples in ascending degree
with no trailing zeros; rational functions keep gcd(num, den) = 1 and a monic
denominator, so equality is structural and hashing is cheap.

The t-adic valuation is the basic invariant everywhere: v(t^k * unit) = k, and
v(0) = +inf (returned as math.inf so comparisons just work).
"""
from __future__ import annotations

import ast
import math
from typing import Sequence

SUPPORTED_MODULI = (2, 3, 5, 7, 11, 13)

INF = math.inf


def validate_modulus(q: int) -> None:
    """Reject moduli outside the supported prime range."""
    if q not in SUPPORTED_MODULI:
        raise ValueError(f"modulus must be one of {SUPPORTED_MODULI}, got {q!r}")


def _inv_mod(a: int, q: int) -> int:
    if a % q == 0:
        raise ZeroDivisionError("inverse of 0 in F_q")
    return pow(a, q - 2, q)


class Poly:
    """Dense polynomial over F_q in the variable t."""

    __slots__ = ("q", "coeffs")

    def __init__(self, q: int, coeffs: Sequence[int] = (), *, _raw: bool = False):
        validate_modulus(q)
        if _raw:
            cs = tuple(coeffs)
        else:
            cs = [c % q for c in coeffs]
            while cs and cs[-1] == 0:
                cs.pop()
            cs = tuple(cs)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "coeffs", cs)

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, q: int) -> "Poly":
        return cls(q, ())

    @classmethod
    def one(cls, q: int) -> "Poly":
        return cls(q, (1,))

    @classmethod
    def t(cls, q: int) -> "Poly":
        return cls(q, (0, 1))

    @classmethod
    def const(cls, q: int, c: int) -> "Poly":
        return cls(q, (c,))

    @classmethod
    def t_power(cls, q: int, k: int) -> "Poly":
        if k < 0:
            raise ValueError("t_power of Poly needs k >= 0")
        return cls(q, (0,) * k + (1,))

    # -- structure ---------------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree, with the convention deg 0 = -1."""
        return len(self.coeffs) - 1

    def valuation(self) -> float:
        if not self.coeffs:
            return INF
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        raise AssertionError("unnormalised poly")

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def leading(self) -> int:
        if not self.coeffs:
            raise ValueError("leading coefficient of 0")
        return self.coeffs[-1]

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "Poly") -> None:
        if self.q != other.q:
            raise ValueError("mixed moduli")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % self.q
        return Poly(self.q, out)

    def __neg__(self) -> "Poly":
        return Poly(self.q, tuple((-c) % self.q for c in self.coeffs), _raw=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly.zero(self.q)
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return Poly(self.q, out)

    def scale(self, c: int) -> "Poly":
        c %= self.q
        if c == 0:
            return Poly.zero(self.q)
        return Poly(self.q, tuple((c * a) % self.q for a in self.coeffs), _raw=True)

    def shift(self, k: int) -> "Poly":
        """Multiply by t^k (k >= 0)."""
        if k < 0:
            raise ValueError("negative shift")
        if not self.coeffs:
            return self
        return Poly(self.q, (0,) * k + self.coeffs, _raw=True)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of Poly")
        out = Poly.one(self.q)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other: "Poly"):
        self._check(other)
        if not other:
            raise ZeroDivisionError("poly division by 0")
        q = self.q
        rem = list(self.coeffs)
        d = other.degree
        lead_inv = _inv_mod(other.coeffs[-1], q)
        quot = [0] * max(0, len(rem) - d)
        for i in range(len(rem) - 1, d - 1, -1):
            c = rem[i] % q
            if c:
                f = (c * lead_inv) % q
                quot[i - d] = f
                for j, oc in enumerate(other.coeffs):
                    rem[i - d + j] = (rem[i - d + j] - f * oc) % q
        return Poly(q, quot), Poly(q, rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return self.scale(_inv_mod(self.coeffs[-1], self.q))

    # -- misc --------------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly) and self.q == other.q and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.q, self.coeffs))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append("t" if c == 1 else f"{c}*t")
            else:
                parts.append(f"t^{i}" if c == 1 else f"{c}*t^{i}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"Poly(q={self.q}, {self})"


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm."""
    if a.q != b.q:
        raise ValueError("mixed moduli")
    while b:
        a, b = b, a % b
    return a.monic() if a else a


def poly_inverse_mod_tk(p: Poly, k: int) -> Poly:
    """Inverse of p modulo t^k; requires p(0) != 0."""
    q = p.q
    if not p.coeffs or p.coeffs[0] == 0:
        raise ZeroDivisionError("series inverse needs a unit constant term")
    c0_inv = _inv_mod(p.coeffs[0], q)
    out = [0] * k
    out[0] = c0_inv
    pc = p.coeffs
    for n in range(1, k):
        acc = 0
        for j in range(1, min(n, len(pc) - 1) + 1):
            acc += pc[j] * out[n - j]
        out[n] = (-acc * c0_inv) % q
    return Poly(q, out)


class RationalFunction:
    """Element of F_q(t), stored as num/den with gcd 1 and monic den."""

    __slots__ = ("q", "num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        q = num.q
        if den is None:
            den = Poly.one(q)
        if num.q != den.q:
            raise ValueError("mixed moduli")
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            den = Poly.one(q)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
            lead = den.coeffs[-1]
            if lead != 1:
                inv = _inv_mod(lead, q)
                num, den = num.scale(inv), den.scale(inv)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, q: int) -> "RationalFunction":
        return cls(Poly.zero(q))

    @classmethod
    def one(cls, q: int) -> "RationalFunction":
        return cls(Poly.one(q))

    @classmethod
    def const(cls, q: int, c: int) -> "RationalFunction":
        return cls(Poly.const(q, c))

    @classmethod
    def from_poly(cls, p: Poly) -> "RationalFunction":
        return cls(p)

    @classmethod
    def t_power(cls, q: int, k: int) -> "RationalFunction":
        """t^k for any integer k."""
        if k >= 0:
            return cls(Poly.t_power(q, k))
        return cls(Poly.one(q), Poly.t_power(q, -k))

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def valuation(self) -> float:
        """t-adic valuation; +inf for 0."""
        if not self.num:
            return INF
        return self.num.valuation() - self.den.valuation()

    def is_integral(self) -> bool:
        """Whether the function lies in o = F_q[[t]] (valuation >= 0)."""
        return self.valuation() >= 0

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "RationalFunction") -> None:
        if self.q != other.q:
            raise ValueError("mixed moduli")

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        self._check(other)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return self + (-other)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        self._check(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    def inverse(self) -> "RationalFunction":
        if not self.num:
            raise ZeroDivisionError("inverse of 0")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        return self * other.inverse()

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalFunction.one(self.q)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- misc --------------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunction)
            and self.q == other.q
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        return hash((self.q, self.num, self.den))

    def __str__(self) -> str:
        n = str(self.num)
        if self.den == Poly.one(self.q):
            return n
        d = str(self.den)
        if "+" in n:
            n = f"({n})"
        if "+" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"RationalFunction(q={self.q}, {self})"


def laurent_prefix(f: RationalFunction, stop: int) -> tuple[int, list[int]]:
    """Coefficients of the t-expansion of f on degrees [v(f), stop).

    Returns (low, coeffs) with coeffs[i] the coefficient of t^(low+i); an
    empty list (with low = stop) if v(f) >= stop or f = 0.
    """
    v = f.valuation()
    if v == INF or v >= stop:
        return stop, []
    v = int(v)
    k = stop - v
    q = f.q
    vn = int(f.num.valuation())
    vd = int(f.den.valuation())
    n0 = Poly(q, f.num.coeffs[vn:])
    d0 = Poly(q, f.den.coeffs[vd:])
    prod = n0 * poly_inverse_mod_tk(d0, k)
    coeffs = list(prod.coeffs[:k])
    coeffs += [0] * (k - len(coeffs))
    return v, coeffs


def laurent_to_rf(q: int, low: int, coeffs: Sequence[int]) -> RationalFunction:
    """Build sum coeffs[i] * t^(low+i) as a rational function."""
    p = Poly(q, coeffs)
    if not p:
        return RationalFunction.zero(q)
    if low >= 0:
        return RationalFunction(p.shift(low))
    return RationalFunction(p, Poly.t_power(q, -low))


def integral_split(f: RationalFunction) -> tuple[RationalFunction, RationalFunction]:
    """Split f = principal + integral with principal supported in degrees < 0."""
    low, coeffs = laurent_prefix(f, 0)
    principal = laurent_to_rf(f.q, low, coeffs)
    return principal, f - principal


# -- parsing ----------------------------------------------------------------

def parse_rational_function(q: int, text: str) -> RationalFunction:
    """Parse expressions like "(t^2+1)/t", "2*t+1", "t^-1" over F_q.

    Accepts +, -, *, /, parentheses, integer constants, and ^ (or **) powers.
    """
    validate_modulus(q)
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node) -> RationalFunction:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = ev(node.left)
                exp = node.right
                sign = 1
                while isinstance(exp, ast.UnaryOp) and isinstance(exp.op, (ast.USub, ast.UAdd)):
                    if isinstance(exp.op, ast.USub):
                        sign = -sign
                    exp = exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError(f"exponent must be an integer in {text!r}")
                return base ** (sign * exp.value)
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.is_zero():
                    raise ValueError(f"division by zero in {text!r}")
                return left / right
            raise ValueError(f"unsupported operator in {text!r}")
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -ev(node.operand)
            if isinstance(node.op, ast.UAdd):
                return ev(node.operand)
            raise ValueError(f"unsupported unary operator in {text!r}")
        if isinstance(node, ast.Name):
            if node.id == "t":
                return RationalFunction(Poly.t(q))
            raise ValueError(f"unknown symbol {node.id!r} in {text!r}")
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return RationalFunction.const(q, node.value)
            raise ValueError(f"non-integer constant in {text!r}")
        raise ValueError(f"unsupported syntax in {text!r}")

    return ev(tree)
