"""Vectorized arithmetic in F_Q via discrete logarithms.

Elements are held as logs to a fixed primitive root g, in [0, Q-1), with a
sentinel standing for zero. Addition uses Zech logarithms. Everything here works on
numpy int64 arrays and is meant for sweeping over every point of F_Q at once.

The trace tables give a(E) = -sum_x chi(x^3 + a x + b) for every
F_Q-isomorphism class of short Weierstrass cubics, including the singular
ones (where the same sum returns +1, -1 or 0 as appropriate).
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .gf import FieldSpec, field_make

MAX_LOG_FIELD = 2**22


class LogField:
    """F_Q with exp/log/Zech tables; Q = p^E.

    Nonzero elements are logs in [0, M), M = Q - 1, and zero is the sentinel
    ``self.zero`` = 2M. With that choice a product is red[a + b] and a sum is
    red[a + zext[b - a + 2M]]: every case involving zero falls into its own
    range of the lookup tables, so no branching is needed.
    """

    def __init__(self, spec: FieldSpec):
        if spec.q > MAX_LOG_FIELD:
            raise ValueError(f"F_{spec.label} is too large for table arithmetic")
        self.spec = spec
        p, E = spec.p, spec.e
        self.p, self.Q, self.M = p, spec.q, spec.q - 1
        M = self.M
        Z = self.zero = 2 * M
        g = spec.primitive_index()
        weights = p ** np.arange(E, dtype=np.int64)

        # exp table by doubling: block [L, 2L) is block [0, L) times g^L
        coords = np.zeros((1, E), dtype=np.int64)
        coords[0, 0] = 1
        while coords.shape[0] < M:
            L = coords.shape[0]
            h = _pow_index(spec, g, L)
            mat = np.array([spec.coords(_mul_index(spec, p**i, h)) for i in range(E)], dtype=np.int64)
            coords = np.concatenate([coords, coords @ mat % p])
        exp = coords[:M] @ weights
        self.log = np.full(self.Q, Z, dtype=np.int64)
        self.log[exp] = np.arange(M, dtype=np.int64)
        self.exp = np.zeros(Z + 1, dtype=np.int64)
        self.exp[:M] = exp
        d0 = exp % p
        zech = self.log[exp - d0 + (d0 + 1) % p]  # log(1 + g^d), or Z

        r = np.arange(4 * M + 1, dtype=np.int64)
        self._red = np.where(r >= Z, Z, r % M)
        d = np.arange(-Z, Z + 1, dtype=np.int64)
        zext = np.zeros(2 * Z + 1, dtype=np.int64)
        zext[d < -M] = d[d < -M]  # a is zero: a + zext = b
        inside = (d > -M) & (d < M)
        zext[inside] = zech[d[inside] % M]
        zext[d == 0] = zech[0]  # both zero also lands here; the sum then stays >= 2M
        self._zext = zext
        self._chi = np.zeros(Z + 1, dtype=np.int64)
        self._chi[:M] = 1 - 2 * (np.arange(M) & 1)
        self._tables = None
        self._orbit_cache: dict = {}

    # scalar conversions -------------------------------------------------------
    def log_of(self, index: int) -> int:
        return int(self.log[index])

    def index_of(self, lg: int) -> int:
        return int(self.exp[lg])

    def index_of_array(self, lg):
        return self.exp[np.asarray(lg, dtype=np.int64)]

    def points(self) -> np.ndarray:
        """Logs of all elements of F_Q, zero first."""
        return np.append(np.int64(self.zero), np.arange(self.M, dtype=np.int64))

    # vector arithmetic on logs ------------------------------------------------
    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        return self._red[a + self._zext[np.asarray(b, dtype=np.int64) - a + self.zero]]

    def mul(self, a, b):
        return self._red[np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)]

    def power(self, a, k: int):
        a = np.asarray(a, dtype=np.int64)
        if k == 0:
            return np.zeros_like(a)
        return np.where(a == self.zero, self.zero, (a * k) % self.M)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        return np.where(a == self.zero, self.zero, (-a) % self.M)

    def neg(self, a):
        return self._red[np.asarray(a, dtype=np.int64) + self.M // 2]

    def chi(self, a):
        return self._chi[np.asarray(a, dtype=np.int64)]

    def const(self, c: int) -> int:
        """Log of the image of the integer c."""
        return self.log_of(c % self.p)

    def horner(self, coeff_logs, t):
        """Evaluate a polynomial given by coefficient logs (ascending) at logs t."""
        t = np.asarray(t, dtype=np.int64)
        red, zext, Z = self._red, self._zext, self.zero
        acc = np.full(t.shape, Z, dtype=np.int64)
        for c in reversed(coeff_logs):
            acc = red[acc + t]
            acc = red[acc + zext[c - acc + Z]]
        return acc

    # character sums -------------------------------------------------------------
    def cubic_trace(self, a: int, b: int) -> int:
        """-sum_x chi(x^3 + a x + b), computed directly; a, b are logs."""
        x = self.points()
        v = self.add(self.add(self.power(x, 3), self.mul(a, x)), b)
        return -int(self.chi(v).sum())

    def _class_tables(self):
        if self._tables is None:
            M, Z = self.M, self.zero
            g6, g4 = math.gcd(6, M), math.gcd(4, M)
            t6 = np.array([self.cubic_trace(Z, i) for i in range(g6)], dtype=np.int64)
            t4 = np.array([self.cubic_trace(i, Z) for i in range(g4)], dtype=np.int64)
            self._tables = (self._generic_table(), t6, t4)
        return self._tables

    def _generic_table(self) -> np.ndarray:
        """t0[l] = -sum_x chi(x^3 + u x + u) with u = g^l.

        With y = x + 1 the summand is chi(y) chi(u + (y-1)^3 / y) for y != 0,
        and chi(-1) at y = 0, so the sum over x is a convolution over the
        additive group of F_Q, evaluated with an E-dimensional FFT.
        """
        p, E, Q, M = self.p, self.spec.e, self.Q, self.M
        y = np.arange(M, dtype=np.int64)
        h = self.mul(self.power(self.add(y, self.const(-1)), 3), (-y) % M)
        w = np.bincount(self.index_of_array(h), weights=self.chi(y), minlength=Q)
        x = self.chi(self.log)
        shape = (p,) * E
        # reshaped, the last axis is the lowest base-p digit of the index
        w = w.reshape(shape)
        idx = (-np.arange(p)) % p
        for ax in range(E):
            w = np.take(w, idx, axis=ax)
        conv = np.fft.ifftn(np.fft.fftn(w) * np.fft.fftn(x.reshape(shape).astype(float))).real
        conv = np.rint(conv).astype(np.int64).reshape(Q)
        chi_m1 = int(self.chi(self.const(-1)))
        return -chi_m1 - conv[self.exp[:M]]

    def traces(self, a, b):
        """Traces of y^2 = x^3 + a x + b for arrays of logs a, b."""
        t0, t6, t4 = self._class_tables()
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        M, Z = self.M, self.zero
        az, bz = a == Z, b == Z
        u = (3 * a - 2 * b) % M
        sign = 1 - 2 * ((b - a) & 1)
        out = np.where(az | bz, 0, t0[u] * sign)
        out = np.where(az & ~bz, t6[b % len(t6)], out)
        return np.where(bz & ~az, t4[a % len(t4)], out)

    def frobenius_orbits(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Representatives (as logs, zero included) and sizes of the orbits of x -> x^q."""
        if q not in self._orbit_cache:
            M = self.M
            k = round(math.log(self.Q, q))
            lg = np.arange(M, dtype=np.int64)
            cur, low = lg.copy(), lg.copy()
            for _ in range(k - 1):
                cur = cur * q % M
                low = np.minimum(low, cur)
            reps = lg[low == lg]
            size = np.full(reps.shape, k, dtype=np.int64)
            for j in sorted(d for d in range(1, k + 1) if k % d == 0):
                hit = (reps * (q**j - 1)) % M == 0
                size = np.where(hit & (size > j), j, size)
            self._orbit_cache[q] = (np.append(self.zero, reps), np.append(1, size))
        return self._orbit_cache[q]

    def is_singular(self, a, b):
        """Mask of points where 4 a^3 + 27 b^2 vanishes."""
        d = self.add(self.mul(self.const(4), self.power(a, 3)), self.mul(self.const(27), self.power(b, 2)))
        return d == self.zero


def _mul_index(spec: FieldSpec, a: int, b: int) -> int:
    return a * b % spec.p if spec.e == 1 else spec._slow_mul(a, b)


def _pow_index(spec: FieldSpec, a: int, k: int) -> int:
    return pow(a, k, spec.p) if spec.e == 1 else spec._slow_pow(a, k)


@functools.lru_cache(maxsize=None)
def log_field(p: int, E: int) -> LogField:
    return LogField(field_make(p, E))
