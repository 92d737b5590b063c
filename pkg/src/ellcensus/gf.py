"""Finite fields F_q, q = p^e with p > 3, and their extensions.

Elements are stored by their canonical index: the coefficient vector
(c_0, ..., c_{e-1}) over Z/p read as the base-p integer sum c_i p^i.
``FieldSpec`` does arithmetic on these integer indices directly;
``FieldElement`` wraps an index together with its owning field and adds
operator overloading.
"""

from __future__ import annotations

import functools
import itertools
import re
from typing import Iterator

MAX_FIELD_SIZE = 2**40
_TABLE_LIMIT = 2**16


class FieldError(ValueError):
    """Invalid field parameters or a cross-field operation."""


def _is_prime(n: int) -> bool:
    from sympy import isprime

    return bool(isprime(n))


def _prime_factors(n: int) -> list[int]:
    from sympy import factorint

    return sorted(factorint(n))


# --- coefficient-vector helpers over Z/p (ascending, possibly with trailing zeros) ---


def _digits(x: int, p: int, e: int) -> list[int]:
    out = []
    for _ in range(e):
        x, r = divmod(x, p)
        out.append(r)
    return out


def _undigits(ds, p: int) -> int:
    x = 0
    for d in reversed(ds):
        x = x * p + d
    return x


def _zp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _zp_mulmod(a: list[int], b: list[int], mod: tuple[int, ...], p: int) -> list[int]:
    """Product of a and b reduced modulo the monic polynomial ``mod`` over Z/p."""
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    e = len(mod) - 1
    for k in range(len(out) - 1, e - 1, -1):
        c = out[k] % p
        if c:
            for i in range(e):
                out[k - e + i] -= c * mod[i]
        out[k] = 0
    return [c % p for c in out[:e]]


def _zp_is_irreducible(f: tuple[int, ...], p: int) -> bool:
    """Rabin test for a monic polynomial over Z/p (ascending coefficients)."""
    m = len(f) - 1
    if m == 1:
        return True
    if f[0] == 0:
        return False

    def powp(a: list[int]) -> list[int]:
        # a^p mod f by square-and-multiply
        result = [1]
        base = a
        k = p
        while k:
            if k & 1:
                result = _zp_mulmod(result, base, f, p)
            base = _zp_mulmod(base, base, f, p)
            k >>= 1
        return result

    def gcd_is_one(a: list[int]) -> bool:
        u = list(f)
        v = _zp_trim(list(a))
        while v:
            inv = pow(v[-1], p - 2, p)
            while len(u) >= len(v) and u:
                c = u[-1] * inv % p
                shift = len(u) - len(v)
                for i, vi in enumerate(v):
                    u[shift + i] = (u[shift + i] - c * vi) % p
                _zp_trim(u)
            u, v = v, u
        return len(u) == 1

    t = [0, 1]
    frob = [t]
    x = t
    for _ in range(m):
        x = powp(x)
        frob.append(x)
    if _zp_trim(list(frob[m])) != t:
        return False
    for r in _prime_factors(m):
        h = list(frob[m // r]) + [0] * 2
        h[1] = (h[1] - 1) % p
        if not gcd_is_one(h):
            return False
    return True


@functools.lru_cache(maxsize=None)
def canonical_modulus(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree e over F_p.

    Coefficients are compared low-to-high, so (c_0, c_1, ...) is the sort key.
    """
    if e == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=e):
        f = tuple(low) + (1,)
        if _zp_is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class FieldSpec:
    """The field F_q = F_p[x]/(modulus), q = p^e, p a prime > 3.

    Arithmetic methods take and return canonical indices in [0, q).
    """

    __slots__ = ("p", "e", "q", "modulus", "_tables", "_prim", "__weakref__")

    def __init__(self, p: int, e: int, modulus: tuple[int, ...]):
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree e")
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = tuple(modulus)
        self._tables = None
        self._prim = None

    # identity -------------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self.p == other.p and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"FieldSpec({self.label})"

    @property
    def label(self) -> str:
        return str(self.p) if self.e == 1 else f"{self.p}^{self.e}"

    def __reduce__(self):
        return (FieldSpec, (self.p, self.e, self.modulus))

    # element construction --------------------------------------------------
    def __call__(self, x) -> FieldElement:
        if isinstance(x, FieldElement):
            if x.owner != self:
                raise FieldError("element belongs to a different field")
            return x
        return FieldElement(self, self.from_int(x))

    def from_int(self, x: int) -> int:
        """Image of the integer x under Z -> F_q (prime field only)."""
        return x % self.p

    def element(self, index: int) -> FieldElement:
        if not 0 <= index < self.q:
            raise FieldError(f"index {index} outside [0, {self.q})")
        return FieldElement(self, index)

    def elements(self) -> Iterator[FieldElement]:
        for i in range(self.q):
            yield FieldElement(self, i)

    def coords(self, x: int) -> list[int]:
        return _digits(x, self.p, self.e)

    def from_coords(self, cs) -> int:
        cs = list(cs)
        if len(cs) > self.e or any(not 0 <= c < self.p for c in cs):
            raise FieldError("coordinates out of range")
        return _undigits(cs, self.p)

    # arithmetic on indices --------------------------------------------------
    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.e == 1:
            return (a + b) % p
        out, m = 0, 1
        while a or b:
            a, x = divmod(a, p)
            b, y = divmod(b, p)
            out += ((x + y) % p) * m
            m *= p
        return out

    def neg(self, a: int) -> int:
        p = self.p
        if self.e == 1:
            return -a % p
        out, m = 0, 1
        while a:
            a, x = divmod(a, p)
            out += (-x % p) * m
            m *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        t = self._log_tables()
        if t is not None:
            exp, log = t
            return exp[(log[a] + log[b]) % (self.q - 1)]
        return self._slow_mul(a, b)

    def _slow_mul(self, a: int, b: int) -> int:
        p, e = self.p, self.e
        return _undigits(_zp_mulmod(_digits(a, p, e), _digits(b, p, e), self.modulus, p), p)

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            return self.pow(self.inv(a), -k)
        if self.e == 1:
            return pow(a, k, self.p)
        if a == 0:
            return 1 if k == 0 else 0
        t = self._log_tables()
        if t is not None:
            exp, log = t
            return exp[(log[a] * k) % (self.q - 1)]
        result, base = 1, a
        while k:
            if k & 1:
                result = self._slow_mul(result, base)
            base = self._slow_mul(base, base)
            k >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def chi(self, a: int) -> int:
        """Quadratic character of the element with index a."""
        if a == 0:
            return 0
        if self.e == 1:
            r = pow(a, (self.p - 1) // 2, self.p)
        else:
            r = self.pow(a, (self.q - 1) // 2)
        return 1 if r == 1 else -1

    def _log_tables(self):
        if self.q > _TABLE_LIMIT:
            return None
        if self._tables is None:
            g = self.primitive_index()
            exp = [1] * (self.q - 1)
            x = 1
            for i in range(1, self.q - 1):
                x = self._slow_mul(x, g)
                exp[i] = x
            log = [0] * self.q
            for i, v in enumerate(exp):
                log[v] = i
            self._tables = (exp, log)
        return self._tables

    def _slow_pow(self, a: int, k: int) -> int:
        result, base = 1, a
        while k:
            if k & 1:
                result = self._slow_mul(result, base) if self.e > 1 else result * base % self.p
            base = self._slow_mul(base, base) if self.e > 1 else base * base % self.p
            k >>= 1
        return result

    def primitive_index(self) -> int:
        """Index of the smallest-index generator of F_q^*."""
        if self._prim is None:
            n = self.q - 1
            primes = _prime_factors(n)
            self._prim = next(
                g for g in range(2, self.q) if all(self._slow_pow(g, n // r) != 1 for r in primes)
            )
        return self._prim

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, 1)


class FieldElement:
    """An element of a ``FieldSpec``; mixing fields raises ``FieldError``."""

    __slots__ = ("owner", "value")

    def __init__(self, owner: FieldSpec, value: int):
        self.owner = owner
        self.value = value

    def _other(self, b) -> int:
        if isinstance(b, FieldElement):
            if b.owner != self.owner:
                raise FieldError("operands live in different fields")
            return b.value
        if isinstance(b, int):
            return self.owner.from_int(b)
        return NotImplemented

    def __add__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.add(self.value, v))

    __radd__ = __add__

    def __sub__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.sub(self.value, v))

    def __rsub__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.sub(v, self.value))

    def __mul__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.mul(self.value, v))

    __rmul__ = __mul__

    def __truediv__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.div(self.value, v))

    def __rtruediv__(self, b):
        v = self._other(b)
        return NotImplemented if v is NotImplemented else FieldElement(self.owner, self.owner.div(v, self.value))

    def __neg__(self):
        return FieldElement(self.owner, self.owner.neg(self.value))

    def __pow__(self, k: int):
        return FieldElement(self.owner, self.owner.pow(self.value, k))

    def inverse(self) -> FieldElement:
        return FieldElement(self.owner, self.owner.inv(self.value))

    def __eq__(self, b):
        if isinstance(b, FieldElement):
            return self.owner == b.owner and self.value == b.value
        if isinstance(b, int):
            return self.value == self.owner.from_int(b)
        return NotImplemented

    def __hash__(self):
        return hash((self.owner, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    @property
    def coords(self) -> list[int]:
        return self.owner.coords(self.value)

    def __repr__(self):
        if self.owner.e == 1:
            return f"{self.value} (mod {self.owner.p})"
        return f"F{self.owner.label}<{self.coords}>"


@functools.lru_cache(maxsize=None)
def field_make(p: int, e: int = 1) -> FieldSpec:
    """F_{p^e} with the canonical (lex-smallest irreducible) modulus."""
    if e < 1:
        raise FieldError("extension degree must be >= 1")
    if p in (2, 3):
        raise FieldError("characteristic must exceed 3")
    if p < 2 or not _is_prime(p):
        raise FieldError(f"{p} is not prime")
    if p**e > MAX_FIELD_SIZE:
        raise FieldError(f"field size {p}^{e} exceeds supported bound 2^40")
    return FieldSpec(p, e, canonical_modulus(p, e))


def parse_field(text: str | int) -> FieldSpec:
    """Parse ``"p^e"`` or a prime power ``"q"``."""
    if isinstance(text, int):
        text = str(text)
    m = re.fullmatch(r"\s*(\d+)\s*(?:\^\s*(\d+))?\s*", text)
    if not m:
        raise FieldError(f"cannot parse field spec {text!r}")
    base, exp = int(m.group(1)), m.group(2)
    if exp is not None:
        return field_make(base, int(exp))
    from sympy import factorint

    fac = factorint(base)
    if len(fac) != 1:
        raise FieldError(f"{base} is not a prime power")
    ((p, e),) = fac.items()
    return field_make(p, e)


def delta(x: int, spec: FieldSpec) -> int:
    """1 if x divides q - 1, else 0."""
    if x < 1:
        raise ValueError("delta is defined for x >= 1")
    return 1 if (spec.q - 1) % x == 0 else 0


def quadratic_character(a: FieldElement) -> int:
    return a.owner.chi(a.value)


class Embedding:
    """Ring embedding F_q -> F_{q^k} determined by the image of x mod modulus."""

    def __init__(self, small: FieldSpec, big: FieldSpec, generator_image: int):
        self.small = small
        self.big = big
        self.generator_image = generator_image
        self._cache: dict[int, int] = {}

    def index(self, a: int) -> int:
        if self.small.e == 1:
            return a
        if a not in self._cache:
            big = self.big
            acc = 0
            for c in reversed(self.small.coords(a)):
                acc = big.add(big.mul(acc, self.generator_image), c)
            self._cache[a] = acc
        return self._cache[a]

    def __call__(self, x: FieldElement) -> FieldElement:
        if x.owner != self.small:
            raise FieldError("element is not in the embedding's domain")
        return FieldElement(self.big, self.index(x.value))


@functools.lru_cache(maxsize=None)
def embedding(small: FieldSpec, big: FieldSpec) -> Embedding:
    """The canonical embedding: the generator maps to the smallest-index root."""
    if small.p != big.p or big.e % small.e:
        raise FieldError(f"F_{small.label} does not embed in F_{big.label}")
    if small.e == 1:
        return Embedding(small, big, 1)
    if small == big:
        return Embedding(small, big, small.p)  # index of x itself
    from .polyring import Poly, roots

    f = Poly(big, list(small.modulus))
    rs = roots(f)
    if not rs:  # pragma: no cover
        raise FieldError("modulus has no root in the extension")
    return Embedding(small, big, min(rs))


def extension(spec: FieldSpec, k: int) -> tuple[FieldSpec, Embedding]:
    """F_{q^k} (canonical modulus over F_p) together with F_q -> F_{q^k}."""
    if k < 1:
        raise FieldError("extension degree must be >= 1")
    if spec.q**k > MAX_FIELD_SIZE:
        raise FieldError(f"F_{spec.q}^{k} exceeds supported bound 2^40")
    big = field_make(spec.p, spec.e * k)
    return big, embedding(spec, big)


def twist_scalars(spec: FieldSpec, power: int) -> list[int]:
    """Indices of lambda^power for lambda running over F_q^* in index order."""
    return [spec.pow(lam, power) for lam in range(1, spec.q)]

