"""Exact scalar arithmetic for transition probabilities and entropies.

Probabilities are ``fractions.Fraction`` wherever possible.  The
three-vertex Markovian family has holding probabilities of the form
(1 + sqrt(2s-1))/2, irrational for most hold values s, so ``SqrtExt``
represents a + b*sqrt(d) exactly (a, b rational, d a squarefree integer).
Arithmetic stays inside the field Q(sqrt(d)) and collapses back to
``Fraction`` whenever the surd coefficient cancels.

``EntropyValue`` represents Shannon entropies of rational distributions
exactly as a rational combination of base-2 logarithms of primes, which
has a unique canonical form, so equalities like "entropy == log2(5)" are
decided without floating point.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath


def _squarefree_split(n: int):
    """n = root**2 * rad with rad squarefree; n must be positive."""
    root, rad, f = 1, 1, 2
    while f * f <= n:
        while n % (f * f) == 0:
            n //= f * f
            root *= f
        if n % f == 0:
            n //= f
            rad *= f
        f += 1
    return root, rad * n


def sqrt_exact(x):
    """Exact square root of a nonnegative Fraction: Fraction or SqrtExt."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt_exact needs a nonnegative argument")
    if x == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p*q)/q
    pq = x.numerator * x.denominator
    root, rad = _squarefree_split(pq)
    coeff = Fraction(root, x.denominator)
    if rad == 1:
        return coeff
    return SqrtExt(Fraction(0), coeff, rad)


class SqrtExt:
    """a + b*sqrt(d) with rational a, b (b != 0) and squarefree integer d > 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = int(d)
        if self.b == 0:
            raise ValueError("use a plain Fraction when the surd part is zero")

    @staticmethod
    def make(a, b, d):
        """Build a + b*sqrt(d), collapsing to Fraction when b == 0."""
        b = Fraction(b)
        if b == 0:
            return Fraction(a)
        return SqrtExt(a, b, d)

    def _coerce(self, other):
        if isinstance(other, SqrtExt):
            if other.d != self.d:
                raise ValueError(f"mixed radicands {self.d} and {other.d}")
            return other.a, other.b
        return Fraction(other), Fraction(0)

    def __add__(self, other):
        oa, ob = self._coerce(other)
        return SqrtExt.make(self.a + oa, self.b + ob, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        oa, ob = self._coerce(other)
        return SqrtExt.make(self.a - oa, self.b - ob, self.d)

    def __rsub__(self, other):
        oa, ob = self._coerce(other)
        return SqrtExt.make(oa - self.a, ob - self.b, self.d)

    def __mul__(self, other):
        oa, ob = self._coerce(other)
        return SqrtExt.make(
            self.a * oa + self.b * ob * self.d, self.a * ob + self.b * oa, self.d
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        oa, ob = self._coerce(other)
        norm = oa * oa - ob * ob * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        # multiply by the conjugate of the divisor
        na = (self.a * oa - self.b * ob * self.d) / norm
        nb = (self.b * oa - self.a * ob) / norm
        return SqrtExt.make(na, nb, self.d)

    def __rtruediv__(self, other):
        oa, ob = self._coerce(other)
        return SqrtExt.make(oa, ob, self.d) / self if ob else Fraction(oa) / self

    def __neg__(self):
        return SqrtExt(-self.a, -self.b, self.d)

    def __eq__(self, other):
        if isinstance(other, SqrtExt):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        # b != 0 always, so a SqrtExt never equals a rational
        return False

    def __hash__(self):
        return hash(("SqrtExt", self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.d}))"


def as_float(x):
    return float(x)


def scalar_is_zero(x):
    return (not isinstance(x, SqrtExt)) and x == 0


def _prime_log_terms(q: Fraction):
    """log2(q) as {prime: exponent} for a positive rational q."""
    terms = {}
    for n, sign in ((q.numerator, 1), (q.denominator, -1)):
        f = 2
        while f * f <= n:
            while n % f == 0:
                terms[f] = terms.get(f, 0) + sign
                n //= f
            f += 1
        if n > 1:
            terms[n] = terms.get(n, 0) + sign
    return {p: e for p, e in terms.items() if e}


class EntropyValue:
    """Exact sum of c_i * log2(x_i) terms.

    Rational x_i are canonicalized onto prime keys, giving a unique normal
    form (log2 of distinct primes are linearly independent over Q), so
    equality of rational-probability entropies is exact.  Irrational x_i
    (SqrtExt probabilities) are kept symbolically under their scalar key;
    comparisons involving them fall back to high-precision numerics.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def log2_of_int(cls, m: int):
        out = cls()
        out._add_rational_log(Fraction(m), Fraction(1))
        return out

    def _add_rational_log(self, x: Fraction, coeff: Fraction):
        for p, e in _prime_log_terms(x).items():
            c = self.terms.get(p, Fraction(0)) + coeff * e
            if c:
                self.terms[p] = c
            else:
                self.terms.pop(p, None)

    def add_term(self, x, coeff):
        """Accumulate coeff * log2(x)."""
        if isinstance(x, SqrtExt):
            c = self.terms.get(x, Fraction(0)) + coeff
            if c:
                self.terms[x] = c
            else:
                self.terms.pop(x, None)
        else:
            self._add_rational_log(Fraction(x), Fraction(coeff))
        return self

    def __add__(self, other):
        out = EntropyValue(self.terms)
        for k, c in other.terms.items():
            nc = out.terms.get(k, Fraction(0)) + c
            if nc:
                out.terms[k] = nc
            else:
                out.terms.pop(k, None)
        return out

    def scaled(self, coeff):
        if not isinstance(coeff, SqrtExt):
            coeff = Fraction(coeff)
            if coeff == 0:
                return EntropyValue()
        return EntropyValue({k: c * coeff for k, c in self.terms.items()})

    @property
    def is_rational_form(self):
        return all(isinstance(k, int) for k in self.terms)

    def __eq__(self, other):
        if not isinstance(other, EntropyValue):
            return NotImplemented
        if self.terms == other.terms:
            return True
        if self.is_rational_form and other.is_rational_form:
            return False
        return self.compare(other) == 0

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def mpf(self, dps=60):
        def scalar_mpf(x):
            if isinstance(x, SqrtExt):
                return (
                    mpmath.mpf(x.a.numerator) / x.a.denominator
                    + (mpmath.mpf(x.b.numerator) / x.b.denominator)
                    * mpmath.sqrt(x.d)
                )
            x = Fraction(x)
            return mpmath.mpf(x.numerator) / x.denominator

        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for k, c in self.terms.items():
                total += scalar_mpf(c) * mpmath.log(scalar_mpf(k), 2)
            return total

    def compare(self, other):
        """-1, 0, or +1 versus another EntropyValue.

        Equal canonical forms are decided exactly; otherwise the sign of
        the difference is taken at 60 digits and must clear a wide margin,
        which certifies the sign for the magnitudes arising here.
        """
        if self.terms == other.terms:
            return 0
        diff = (self + other.scaled(-1)).mpf()
        if abs(diff) < mpmath.mpf("1e-40"):
            if self.is_rational_form and other.is_rational_form:
                # distinct canonical forms are genuinely unequal
                return -1 if diff < 0 else 1
            raise ValueError("cannot certify comparison of symbolic entropies")
        return -1 if diff < 0 else 1

    def __float__(self):
        return float(self.mpf())

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*log2({k})" for k, c in sorted(
            self.terms.items(), key=lambda kv: str(kv[0])))


def entropy_of_dist(probabilities):
    """Shannon entropy (bits) of a finite distribution, exactly.

    Accepts the probability values; zeros are skipped.
    """
    out = EntropyValue()
    for p in probabilities:
        if scalar_is_zero(p):
            continue
        # -p*log2(p) == p*log2(1/p)
        if isinstance(p, SqrtExt):
            out.add_term(p, -p)  # type: ignore[arg-type]
        else:
            p = Fraction(p)
            out.add_term(p, -p)
    return out
