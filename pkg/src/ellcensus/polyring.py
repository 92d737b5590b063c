"""Univariate polynomials over F_q: arithmetic, factorization, valuations.

A ``Poly`` holds its coefficients as a tuple of field indices in ascending
order with no trailing zeros, so the zero polynomial is ``()`` and equality
is structural. ``deg(0)`` is ``NEG_INF`` and ``valuation(0, pi)`` is ``INF``.

Factorization is the classical three-stage pipeline: squarefree
decomposition, distinct-degree splitting, then Cantor-Zassenhaus
equal-degree splitting driven by a ``random.Random`` seeded from
``FACTOR_SEED`` and the input polynomial, so results are reproducible.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import random
from typing import Iterable, Iterator

import numpy as np

from .gf import FieldElement, FieldError, FieldSpec, _prime_factors, embedding

NEG_INF = -math.inf
INF = math.inf
FACTOR_SEED = 20240601

_SIEVE_LIMIT = 2**18


# --- list-level arithmetic -------------------------------------------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _add(F: FieldSpec, a, b) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    if F.e == 1:
        p = F.p
        out = list(a)
        for i, y in enumerate(b):
            out[i] = (out[i] + y) % p
    else:
        out = list(a)
        for i, y in enumerate(b):
            out[i] = F.add(out[i], y)
    return _trim(out)


def _neg(F: FieldSpec, a) -> list[int]:
    if F.e == 1:
        return [-x % F.p for x in a]
    return [F.neg(x) for x in a]


def _scale(F: FieldSpec, a, c: int) -> list[int]:
    if c == 0:
        return []
    if F.e == 1:
        return [x * c % F.p for x in a]
    return [F.mul(x, c) for x in a]


def _mul(F: FieldSpec, a, b) -> list[int]:
    if not a or not b:
        return []
    if F.e == 1:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        p = F.p
        return _trim([c % p for c in out])
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return _trim(out)


def _divmod(F: FieldSpec, a, b) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = len(b) - 1
    if len(r) - 1 < db:
        return [], r
    inv = F.inv(b[-1])
    quo = [0] * (len(r) - db)
    if F.e == 1:
        p = F.p
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k] * inv % p
            if c:
                quo[k - db] = c
                s = k - db
                for i in range(db):
                    r[s + i] = (r[s + i] - c * b[i]) % p
            r[k] = 0
    else:
        for k in range(len(r) - 1, db - 1, -1):
            c = F.mul(r[k], inv)
            if c:
                quo[k - db] = c
                s = k - db
                for i in range(db):
                    r[s + i] = F.sub(r[s + i], F.mul(c, b[i]))
            r[k] = 0
    return _trim(quo), _trim(r[:db])


def _mod(F: FieldSpec, a, b) -> list[int]:
    return _divmod(F, a, b)[1]


def _monic(F: FieldSpec, a) -> list[int]:
    if not a:
        return []
    return _scale(F, a, F.inv(a[-1]))


def _gcd(F: FieldSpec, a, b) -> list[int]:
    a, b = list(a), list(b)
    while b:
        a, b = b, _mod(F, a, b)
    return _monic(F, a)


def _powmod(F: FieldSpec, a, k: int, m) -> list[int]:
    result = [1]
    base = _mod(F, a, m)
    while k:
        if k & 1:
            result = _mod(F, _mul(F, result, base), m)
        k >>= 1
        if k:
            base = _mod(F, _mul(F, base, base), m)
    return _mod(F, result, m)


class Poly:
    """An element of F_q[t]."""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: FieldSpec, coeffs: Iterable = ()):
        cs = []
        for c in coeffs:
            if isinstance(c, FieldElement):
                if c.owner != spec:
                    raise FieldError("coefficient from a different field")
                cs.append(c.value)
            elif spec.e == 1:
                cs.append(int(c) % spec.p)
            else:
                c = int(c)
                if not 0 <= c < spec.q:
                    raise FieldError(f"coefficient index {c} out of range")
                cs.append(c)
        self.spec = spec
        self.coeffs = tuple(_trim(cs))

    @classmethod
    def _raw(cls, spec: FieldSpec, coeffs) -> Poly:
        obj = cls.__new__(cls)
        obj.spec = spec
        obj.coeffs = tuple(coeffs)
        return obj

    @classmethod
    def zero(cls, spec: FieldSpec) -> Poly:
        return cls._raw(spec, ())

    @classmethod
    def one(cls, spec: FieldSpec) -> Poly:
        return cls._raw(spec, (1,))

    @classmethod
    def t(cls, spec: FieldSpec) -> Poly:
        return cls._raw(spec, (0, 1))

    @classmethod
    def constant(cls, spec: FieldSpec, c) -> Poly:
        return cls(spec, [c])

    @classmethod
    def parse(cls, spec: FieldSpec, text: str) -> Poly:
        """Parse the bracketed ascending form, e.g. ``"[4,0,1]"`` for t^2 + 4."""
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"bad polynomial text {text!r}") from exc
        if not isinstance(values, list) or not all(isinstance(v, int) for v in values):
            raise ValueError(f"bad polynomial text {text!r}")
        return cls(spec, values)

    # basic properties -----------------------------------------------------
    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def monic(self) -> Poly:
        return Poly._raw(self.spec, _monic(self.spec, self.coeffs))

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def padded(self, length: int) -> tuple[int, ...]:
        if len(self.coeffs) > length:
            raise ValueError("polynomial longer than requested padding")
        return self.coeffs + (0,) * (length - len(self.coeffs))

    def sort_key(self):
        return (len(self.coeffs), self.coeffs)

    def to_text(self) -> str:
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def __repr__(self):
        return f"Poly({self.spec.label}, {self.to_text()})"

    def __str__(self):
        return self.to_text()

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.spec == other.spec and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == tuple(_trim([self.spec.from_int(other)]))
        return NotImplemented

    def __hash__(self):
        return hash((self.spec, self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    # arithmetic ---------------------------------------------------------------
    def _coerce(self, other) -> tuple[int, ...]:
        if isinstance(other, Poly):
            if other.spec != self.spec:
                raise FieldError("polynomials over different fields")
            return other.coeffs
        if isinstance(other, int):
            # integers act through Z -> F_q, not as element indices
            return tuple(_trim([self.spec.from_int(other)]))
        if isinstance(other, FieldElement):
            return Poly(self.spec, [other]).coeffs
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return Poly._raw(self.spec, _add(self.spec, self.coeffs, b))

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.spec, _neg(self.spec, self.coeffs))

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return Poly._raw(self.spec, _add(self.spec, self.coeffs, _neg(self.spec, b)))

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return Poly._raw(self.spec, _mul(self.spec, self.coeffs, b))

    __rmul__ = __mul__

    def scale(self, c: int) -> Poly:
        """Multiply by the field element with index c."""
        return Poly._raw(self.spec, _scale(self.spec, self.coeffs, c))

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial power")
        result = [1]
        base = list(self.coeffs)
        while k:
            if k & 1:
                result = _mul(self.spec, result, base)
            k >>= 1
            if k:
                base = _mul(self.spec, base, base)
        return Poly._raw(self.spec, result)

    def __divmod__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        s, r = _divmod(self.spec, self.coeffs, b)
        return Poly._raw(self.spec, s), Poly._raw(self.spec, r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def powmod(self, k: int, modulus: Poly) -> Poly:
        return Poly._raw(self.spec, _powmod(self.spec, self.coeffs, k, modulus.coeffs))

    def derivative(self) -> Poly:
        F = self.spec
        cs = [F.mul(c, F.from_int(i)) for i, c in enumerate(self.coeffs)][1:]
        return Poly._raw(F, _trim(cs))

    def __call__(self, x):
        return evaluate(self, x)


def divrem(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    return divmod(f, g)


def gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd; gcd(0, 0) = 0."""
    if f.spec != g.spec:
        raise FieldError("polynomials over different fields")
    return Poly._raw(f.spec, _gcd(f.spec, f.coeffs, g.coeffs))


def derivative(f: Poly) -> Poly:
    return f.derivative()


def evaluate(f: Poly, x) -> FieldElement:
    """Horner evaluation at x, which may live in an extension of f's field."""
    if isinstance(x, int):
        x = FieldElement(f.spec, f.spec.from_int(x))
    big = x.owner
    if big == f.spec:
        acc = 0
        for c in reversed(f.coeffs):
            acc = big.add(big.mul(acc, x.value), c)
        return FieldElement(big, acc)
    emb = embedding(f.spec, big)
    acc = 0
    for c in reversed(f.coeffs):
        acc = big.add(big.mul(acc, x.value), emb.index(c))
    return FieldElement(big, acc)


# --- factorization ------------------------------------------------------------


def _pth_root(F: FieldSpec, a) -> list[int]:
    p = F.p
    k = F.q // p  # x -> x^(q/p) inverts Frobenius on F_q
    return [F.pow(a[i], k) for i in range(0, len(a), p)]


def _squarefree(F: FieldSpec, f) -> list[tuple[list[int], int]]:
    """Squarefree decomposition of a monic f: list of (g_i, i) with g_i squarefree."""
    out: list[tuple[list[int], int]] = []
    if len(f) <= 1:
        return out
    df = Poly._raw(F, f).derivative().coeffs
    if not df:
        return [(g, m * F.p) for g, m in _squarefree(F, _pth_root(F, f))]
    c = _gcd(F, f, df)
    w = _divmod(F, f, c)[0]
    i = 1
    while len(w) > 1:
        y = _gcd(F, w, c)
        z = _divmod(F, w, y)[0]
        if len(z) > 1:
            out.append((z, i))
        i += 1
        w = y
        c = _divmod(F, c, y)[0]
    if len(c) > 1:
        out.extend((g, m * F.p) for g, m in _squarefree(F, _pth_root(F, c)))
    return out


def _distinct_degree(F: FieldSpec, f) -> list[tuple[list[int], int]]:
    out = []
    rest = list(f)
    h = [0, 1]
    i = 1
    while len(rest) - 1 >= 2 * i:
        h = _powmod(F, h, F.q, rest)
        g = _gcd(F, rest, _add(F, h, [0, F.neg(1)]))
        if len(g) > 1:
            out.append((g, i))
            rest = _divmod(F, rest, g)[0]
            h = _mod(F, h, rest)
        i += 1
    if len(rest) > 1:
        out.append((rest, len(rest) - 1))
    return out


def _equal_degree(F: FieldSpec, f, d: int, rng: random.Random) -> list[list[int]]:
    n = len(f) - 1
    if n == d:
        return [f]
    parts = [f]
    e = (F.q**d - 1) // 2
    while len(parts) < n // d:
        r = _trim([rng.randrange(F.q) for _ in range(n)])
        if len(r) <= 1:
            continue
        g = _add(F, _powmod(F, r, e, f), [F.neg(1)])
        nxt = []
        for u in parts:
            if len(u) - 1 > d:
                s = _gcd(F, g, u)
                if 1 < len(s) < len(u):
                    nxt.append(s)
                    nxt.append(_divmod(F, u, s)[0])
                    continue
            nxt.append(u)
        parts = nxt
    return parts


def factor(f: Poly) -> list[tuple[Poly, int]]:
    """Monic irreducible factors with multiplicities, sorted by (degree, lex).

    ``f.lc`` times the product of the returned powers equals f.
    """
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    F = f.spec
    rng = random.Random(f"{FACTOR_SEED}:{F.p}:{F.modulus}:{f.coeffs}")
    mult: dict[tuple[int, ...], int] = {}
    for g, m in _squarefree(F, _monic(F, f.coeffs)):
        for h, d in _distinct_degree(F, g):
            for irr in _equal_degree(F, h, d, rng):
                key = tuple(irr)
                mult[key] = mult.get(key, 0) + m
    facs = [(Poly._raw(F, k), m) for k, m in mult.items()]
    facs.sort(key=lambda fm: fm[0].sort_key())
    return facs


def is_irreducible(f: Poly) -> bool:
    """Rabin's test: t^(q^m) = t mod f and gcd(t^(q^(m/r)) - t, f) = 1 for r | m."""
    m = f.degree
    if m < 1:
        return False
    if m == 1:
        return True
    F = f.spec
    fm = _monic(F, f.coeffs)
    x = [0, 1]
    powers = {0: x}
    h = x
    for i in range(1, m + 1):
        h = _powmod(F, h, F.q, fm)
        powers[i] = h
    if powers[m] != x:
        return False
    for r in _prime_factors(m):
        g = _gcd(F, fm, _add(F, powers[m // r], [0, F.neg(1)]))
        if len(g) != 1:
            return False
    return True


def valuation(f: Poly, pi: Poly):
    """Largest k with pi^k | f; INF for f = 0. pi must be monic irreducible."""
    if not pi.is_monic() or not is_irreducible(pi):
        raise ValueError("valuation needs a monic irreducible polynomial")
    return _valuation_unchecked(f, pi)


def _valuation_unchecked(f: Poly, pi: Poly):
    if f.is_zero():
        return INF
    F = f.spec
    k = 0
    a = f.coeffs
    while True:
        s, r = _divmod(F, a, pi.coeffs)
        if r:
            return k
        a = s
        k += 1


def roots(f: Poly) -> list[int]:
    """Sorted indices of the roots of f in its own coefficient field."""
    if f.degree < 1:
        return []
    return sorted(f.spec.neg(g.coeffs[0]) for g, _ in factor(f) if g.degree == 1)


# --- enumeration of monic irreducibles -------------------------------------------


def monic_polys(spec: FieldSpec, m: int) -> Iterator[Poly]:
    """All monic polynomials of degree m in lex order of (c_0, ..., c_{m-1})."""
    for low in itertools.product(range(spec.q), repeat=m):
        yield Poly._raw(spec, low + (1,))


def _sieve_codes(p: int, m: int) -> np.ndarray:
    # lex code of a monic degree-m polynomial: sum_k c_k p^(m-1-k)
    def all_monic(i: int) -> np.ndarray:
        codes = np.arange(p**i, dtype=np.int64)
        cols = [(codes // p ** (i - 1 - k)) % p for k in range(i)]
        cols.append(np.ones_like(codes))
        return np.stack(cols, axis=1)

    reducible = np.zeros(p**m, dtype=bool)
    weights = np.array([p ** (m - 1 - k) for k in range(m)], dtype=np.int64)
    for i in range(1, m // 2 + 1):
        a = all_monic(i)
        b = all_monic(m - i)
        prod = np.zeros((a.shape[0], b.shape[0], m + 1), dtype=np.int64)
        for u in range(i + 1):
            prod[:, :, u : u + m - i + 1] += a[:, None, u : u + 1] * b[None, :, :]
        prod %= p
        reducible[(prod[:, :, :m] @ weights).ravel()] = True
    return np.flatnonzero(~reducible)


@functools.lru_cache(maxsize=64)
def irreducibles(spec: FieldSpec, m: int) -> tuple[Poly, ...]:
    """Monic irreducibles of exact degree m over F_q, in lex order."""
    if m < 1:
        raise ValueError("degree must be >= 1")
    if spec.e == 1 and spec.q**m <= _SIEVE_LIMIT:
        p = spec.p
        out = []
        for code in _sieve_codes(p, m).tolist():
            cs = [(code // p ** (m - 1 - k)) % p for k in range(m)]
            out.append(Poly._raw(spec, tuple(cs) + (1,)))
        return tuple(out)
    return tuple(f for f in monic_polys(spec, m) if is_irreducible(f))


def irreducibles_up_to(spec: FieldSpec, d: int) -> Iterator[Poly]:
    """Every monic irreducible of degree <= d, ordered by (degree, lex)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    for m in range(1, d + 1):
        yield from irreducibles(spec, m)


def necklace_count(q: int, m: int) -> int:
    """Number of monic irreducibles of degree m over F_q (Moebius formula)."""
    from sympy import divisors
    from sympy.functions.combinatorial.numbers import mobius

    return sum(int(mobius(c)) * q ** (m // c) for c in divisors(m)) // m
