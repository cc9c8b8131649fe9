"""Exact polynomial symbol algebra on C^d.

Symbols are finite complex-coefficient polynomials in z_1..z_d and their
conjugates.  Coefficients keep a dual representation: exact Gaussian
rationals as long as every input is exact (ints, Fractions, parsed
literals), ordinary complex doubles once a float enters.  All operations
are pure; PolySymbol is immutable by convention.

The module provides the formal derivations d/dz_j, d/dzbar_j, the radial
derivatives, the tangential (boundary) Cauchy-Riemann operators on the
unit sphere, the ordinary and boundary Poisson brackets, and canonical
reduction modulo the sphere relation |z|^2 = 1.
"""

from __future__ import annotations

from fractions import Fraction

from .core import MAX_DIM


class ExactComplex:
    """Complex number with exact rational real and imaginary parts.

    Mixing with float or complex degrades to complex; mixing with int or
    Fraction stays exact.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, ExactComplex):
            return ExactComplex(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return ExactComplex(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, ExactComplex):
            return ExactComplex(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (int, Fraction)):
            return ExactComplex(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("ExactComplex powers must be integers >= 0")
        out = ExactComplex(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, ExactComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        return hash(complex(self))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


def _coerce(c):
    """Normalize a scalar into ExactComplex (exact inputs) or complex."""
    if isinstance(c, ExactComplex):
        return c
    if isinstance(c, (int, Fraction)):
        return ExactComplex(c)
    if isinstance(c, (float, complex)):
        return complex(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, ExactComplex) else c == 0


def _conj_scalar(c):
    return c.conjugate() if isinstance(c, ExactComplex) else complex(c).conjugate()


class PolySymbol:
    """Polynomial in z_1..z_d and conj(z_1)..conj(z_d) with complex coefficients.

    Stored as a map from exponent pairs (a, b) to coefficients, where a
    indexes powers of z and b powers of conj(z).  No stored coefficient
    is zero.
    """

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms=None):
        if not 1 <= d <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {d}")
        self.d = d
        clean = {}
        for (a, b), c in (terms or {}).items():
            a, b = tuple(a), tuple(b)
            if len(a) != d or len(b) != d:
                raise ValueError("exponent length does not match dimension")
            if any(e < 0 for e in a) or any(e < 0 for e in b):
                raise ValueError("negative exponent")
            c = _coerce(c)
            if not _is_zero(c):
                clean[(a, b)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, d: int) -> "PolySymbol":
        return cls(d)

    @classmethod
    def const(cls, d: int, c) -> "PolySymbol":
        zero = (0,) * d
        return cls(d, {(zero, zero): c})

    @classmethod
    def variable(cls, d: int, j: int) -> "PolySymbol":
        """z_j, with 1-based j."""
        _check_var(d, j)
        a = tuple(1 if i == j - 1 else 0 for i in range(d))
        return cls(d, {(a, (0,) * d): 1})

    @classmethod
    def conj_variable(cls, d: int, j: int) -> "PolySymbol":
        """conj(z_j), with 1-based j."""
        _check_var(d, j)
        b = tuple(1 if i == j - 1 else 0 for i in range(d))
        return cls(d, {((0,) * d, b): 1})

    @classmethod
    def monomial(cls, d: int, a, b, c=1) -> "PolySymbol":
        return cls(d, {(tuple(a), tuple(b)): c})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_holomorphic(self) -> bool:
        return all(sum(b) == 0 for (_, b) in self.terms)

    @property
    def z_degree(self) -> int:
        return max((sum(a) for (a, _) in self.terms), default=0)

    @property
    def zbar_degree(self) -> int:
        return max((sum(b) for (_, b) in self.terms), default=0)

    @property
    def total_degree(self) -> int:
        return max((sum(a) + sum(b) for (a, b) in self.terms), default=0)

    def items(self):
        """Deterministic iteration over ((a, b), coefficient)."""
        return sorted(self.terms.items())

    # -- arithmetic --------------------------------------------------------

    def _check_same_space(self, other):
        if self.d != other.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex, Fraction, ExactComplex)):
            other = PolySymbol.const(self.d, other)
        if not isinstance(other, PolySymbol):
            return NotImplemented
        self._check_same_space(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return PolySymbol(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol(self.d, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex, Fraction, ExactComplex)):
            other = PolySymbol.const(self.d, other)
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, Fraction, ExactComplex)):
            c0 = _coerce(other)
            return PolySymbol(self.d, {k: c * c0 for k, c in self.terms.items()})
        if not isinstance(other, PolySymbol):
            return NotImplemented
        self._check_same_space(other)
        out = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (
                    tuple(x + y for x, y in zip(a1, a2)),
                    tuple(x + y for x, y in zip(b1, b2)),
                )
                c = c1 * c2
                out[k] = out[k] + c if k in out else c
        return PolySymbol(self.d, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("symbol powers must be integers >= 0")
        out = PolySymbol.const(self.d, 1)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def conj(self) -> "PolySymbol":
        """Complex conjugate: swaps z and conj(z) exponents, conjugates coefficients."""
        return PolySymbol(
            self.d, {(b, a): _conj_scalar(c) for (a, b), c in self.terms.items()}
        )

    # -- evaluation and transforms ------------------------------------------

    def eval(self, point) -> complex:
        """Evaluate at a point of C^d."""
        z = [complex(w) for w in point]
        if len(z) != self.d:
            raise ValueError("point dimension mismatch")
        total = 0j
        for (a, b), c in self.terms.items():
            v = complex(c)
            for zj, aj, bj in zip(z, a, b):
                if aj:
                    v *= zj**aj
                if bj:
                    v *= zj.conjugate() ** bj
            total += v
        return total

    def scale_variable(self, j: int, c) -> "PolySymbol":
        """Substitute z_j -> c*z_j (and conj(z_j) -> conj(c)*conj(z_j))."""
        _check_var(self.d, j)
        c = _coerce(c)
        cbar = _conj_scalar(c)
        out = {}
        for (a, b), coef in self.terms.items():
            factor = coef
            for _ in range(a[j - 1]):
                factor = factor * c
            for _ in range(b[j - 1]):
                factor = factor * cbar
            out[(a, b)] = factor
        return PolySymbol(self.d, out)

    def permute_variables(self, perm) -> "PolySymbol":
        """Rename variables: position i receives old variable perm[i] (0-based)."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.d)):
            raise ValueError("perm must be a permutation of 0..d-1")
        out = {}
        for (a, b), c in self.terms.items():
            k = (tuple(a[p] for p in perm), tuple(b[p] for p in perm))
            out[k] = out[k] + c if k in out else c
        return PolySymbol(self.d, out)

    # -- comparison and display ----------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            return NotImplemented
        if self.d != other.d or set(self.terms) != set(other.terms):
            return False
        return all(self.terms[k] == other.terms[k] for k in self.terms)

    def __hash__(self):
        return hash((self.d, frozenset((k, complex(c)) for k, c in self.terms.items())))

    def max_abs_diff(self, other) -> float:
        """Largest coefficient deviation from another symbol."""
        self._check_same_space(other)
        keys = set(self.terms) | set(other.terms)
        out = 0.0
        for k in keys:
            x = complex(self.terms.get(k, 0.0))
            y = complex(other.terms.get(k, 0.0))
            out = max(out, abs(x - y))
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        chunks = []
        for (a, b), c in self.items():
            factors = []
            for j, e in enumerate(a, start=1):
                if e == 1:
                    factors.append(f"z{j}")
                elif e > 1:
                    factors.append(f"z{j}^{e}")
            for j, e in enumerate(b, start=1):
                if e == 1:
                    factors.append(f"conj(z{j})")
                elif e > 1:
                    factors.append(f"conj(z{j})^{e}")
            negative = isinstance(c, ExactComplex) and c.im == 0 and c.re < 0
            if negative:
                c = -c
            cs = str(c) if isinstance(c, ExactComplex) else repr(c)
            if factors and cs == "1":
                body = "*".join(factors)
            elif factors:
                body = "*".join([cs] + factors)
            else:
                body = cs
            chunks.append(("- " if negative else "+ ") + body)
        text = " ".join(chunks)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"PolySymbol({self.d}, {self.terms!r})"


def _check_var(d: int, j: int):
    if not 1 <= j <= d:
        raise ValueError(f"variable index {j} outside 1..{d}")


# -- derivations -------------------------------------------------------------


def d_holo(j: int, f: PolySymbol) -> PolySymbol:
    """Formal partial derivative with respect to z_j (1-based)."""
    _check_var(f.d, j)
    i = j - 1
    out = {}
    for (a, b), c in f.terms.items():
        if a[i] == 0:
            continue
        k = (tuple(e - 1 if t == i else e for t, e in enumerate(a)), b)
        c2 = c * a[i]
        out[k] = out[k] + c2 if k in out else c2
    return PolySymbol(f.d, out)


def d_anti(j: int, f: PolySymbol) -> PolySymbol:
    """Formal partial derivative with respect to conj(z_j) (1-based)."""
    _check_var(f.d, j)
    i = j - 1
    out = {}
    for (a, b), c in f.terms.items():
        if b[i] == 0:
            continue
        k = (a, tuple(e - 1 if t == i else e for t, e in enumerate(b)))
        c2 = c * b[i]
        out[k] = out[k] + c2 if k in out else c2
    return PolySymbol(f.d, out)


def radial(f: PolySymbol) -> PolySymbol:
    """Holomorphic radial derivative sum_j z_j d/dz_j; scales z^a conj(z)^b by |a|."""
    return PolySymbol(f.d, {(a, b): c * sum(a) for (a, b), c in f.terms.items()})


def radial_bar(f: PolySymbol) -> PolySymbol:
    """Anti-holomorphic radial derivative sum_j conj(z_j) d/dconj(z_j)."""
    return PolySymbol(f.d, {(a, b): c * sum(b) for (a, b), c in f.terms.items()})


def boundary_cr(j: int, f: PolySymbol) -> PolySymbol:
    """Tangential Cauchy-Riemann operator d/dz_j - conj(z_j) * R applied to f."""
    return d_holo(j, f) - PolySymbol.conj_variable(f.d, j) * radial(f)


def boundary_cr_bar(j: int, f: PolySymbol) -> PolySymbol:
    """Conjugate tangential operator d/dconj(z_j) - z_j * Rbar applied to f."""
    return d_anti(j, f) - PolySymbol.variable(f.d, j) * radial_bar(f)


def poisson(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """Poisson bracket sum_j (df/dz_j dg/dzbar_j - dg/dz_j df/dzbar_j)."""
    f._check_same_space(g)
    out = PolySymbol.zero(f.d)
    for j in range(1, f.d + 1):
        out = out + d_holo(j, f) * d_anti(j, g) - d_holo(j, g) * d_anti(j, f)
    return out


def boundary_poisson(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """Boundary Poisson bracket built from the tangential CR operators.

    Returns the bracket as a polynomial on C^d; its restriction to the
    sphere is taken separately with reduce_on_sphere.
    """
    f._check_same_space(g)
    out = PolySymbol.zero(f.d)
    for j in range(1, f.d + 1):
        out = (
            out
            + boundary_cr(j, f) * boundary_cr_bar(j, g)
            - boundary_cr_bar(j, f) * boundary_cr(j, g)
        )
    return out


def reduce_on_sphere(f: PolySymbol) -> PolySymbol:
    """Canonical representative of f modulo the sphere relation |z|^2 = 1.

    Rewrites z_d*conj(z_d) -> 1 - sum_{j<d} z_j*conj(z_j) until no monomial
    contains the last variable together with its conjugate.  Idempotent;
    symbols that agree on the sphere share a representative.
    """
    d = f.d
    last = d - 1
    done = {}
    work = list(f.terms.items())
    while work:
        (a, b), c = work.pop()
        if a[last] >= 1 and b[last] >= 1:
            a2 = tuple(e - 1 if t == last else e for t, e in enumerate(a))
            b2 = tuple(e - 1 if t == last else e for t, e in enumerate(b))
            work.append(((a2, b2), c))
            for j in range(d - 1):
                a3 = tuple(e + 1 if t == j else e for t, e in enumerate(a2))
                b3 = tuple(e + 1 if t == j else e for t, e in enumerate(b2))
                work.append(((a3, b3), -c))
        else:
            key = (a, b)
            done[key] = done[key] + c if key in done else c
    return PolySymbol(d, done)


def hankel_density(f: PolySymbol) -> PolySymbol:
    """|grad f|^2 - |Rf|^2 for holomorphic f, as an exact polynomial.

    This is the base whose d-th power integrates against the sphere in the
    Hankel trace experiments.  Rejects symbols with conjugate terms.
    """
    if not f.is_holomorphic():
        raise ValueError("hankel_density requires a holomorphic symbol")
    out = PolySymbol.zero(f.d)
    for j in range(1, f.d + 1):
        pj = d_holo(j, f)
        out = out + pj * pj.conj()
    rf = radial(f)
    return out - rf * rf.conj()


# -- parsing -----------------------------------------------------------------


class SymbolParseError(ValueError):
    """Syntax error in the symbol grammar, with the byte offset attached."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_OPS = set("+-*^()")


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, None, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot = seen_dot or text[j] == "."
                j += 1
            lit = text[i:j]
            if lit == ".":
                raise SymbolParseError("malformed number", i)
            imag = j < n and text[j] == "i"
            if imag:
                j += 1
            tokens.append(("num", (Fraction(lit), imag), i))
            i = j
            continue
        if ch == "z" and i + 1 < n and text[i + 1].isdigit():
            idx = int(text[i + 1])
            if idx == 0:
                raise SymbolParseError("variable index must be 1..9", i)
            tokens.append(("var", idx, i))
            i += 2
            continue
        if ch.isalpha():
            j = i
            while j < n and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word == "conj":
                tokens.append(("conj", None, i))
            elif word == "i":
                tokens.append(("num", (Fraction(1), True), i))
            elif word == "z":
                tokens.append(("zbare", None, i))
            else:
                raise SymbolParseError(f"unknown name '{word}'", i)
            i = j
            continue
        raise SymbolParseError(f"unexpected character '{ch}'", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.take()
        if tok[0] != kind:
            raise SymbolParseError(f"expected '{kind}'", tok[2])
        return tok

    def parse(self) -> PolySymbol:
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise SymbolParseError("unexpected trailing input", tok[2])
        return out

    def expr(self) -> PolySymbol:
        out = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> PolySymbol:
        out = self.unary()
        while self.peek()[0] == "*":
            self.take()
            out = out * self.unary()
        return out

    def unary(self) -> PolySymbol:
        sign = 1
        while self.peek()[0] in ("+", "-"):
            if self.take()[0] == "-":
                sign = -sign
        out = self.power()
        return out if sign == 1 else -out

    def power(self) -> PolySymbol:
        base = self.atom()
        while self.peek()[0] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                raise SymbolParseError("exponent must be an integer >= 0", tok[2])
            value, imag = tok[1]
            if imag or value.denominator != 1 or value < 0:
                raise SymbolParseError("exponent must be an integer >= 0", tok[2])
            base = base ** int(value)
        return base

    def atom(self) -> PolySymbol:
        tok = self.take()
        kind, value, off = tok
        if kind == "num":
            lit, imag = value
            c = ExactComplex(0, lit) if imag else ExactComplex(lit)
            return PolySymbol.const(self.d, c)
        if kind == "var":
            if value > self.d:
                raise SymbolParseError(
                    f"variable z{value} exceeds dimension d={self.d}", off
                )
            return PolySymbol.variable(self.d, value)
        if kind == "zbare":
            if self.d != 1:
                raise SymbolParseError(
                    "bare 'z' is only valid when d=1; use z1..z9", off
                )
            return PolySymbol.variable(1, 1)
        if kind == "conj":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return inner.conj()
        if kind == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise SymbolParseError("expected a number, variable, or '('", off)


def parse_symbol(text: str, d: int) -> PolySymbol:
    """Parse the symbol grammar into a normalized PolySymbol.

    Grammar: variables z1..z9 (bare z is accepted as z1 when d = 1),
    conj(expr), real or imaginary literals (2, 0.5, 2i, i), operators
    + - * ^ with integer powers >= 0, and parentheses.  Whitespace is
    ignored.  Decimal literals are kept exact.
    """
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {d}")
    return _Parser(text, d).parse()
