"""Exhaustive Burnside-weighted census of minimal models at a fixed level.

The pair space at level n is every (A, B) with deg A <= 4n, deg B <= 6n.
A polynomial with coefficients (c_0, ..., c_L) has index sum c_i q^(L-i),
so index order is the lexicographic order of ascending coefficient tuples
and the (A-index, B-index) order is the canonical-representative order.

Each minimal pair contributes stabilizer_order / (q - 1) to the class
count; the integer sum of stabilizer orders is streamed and divided once.
"""

from __future__ import annotations

import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .gf import FieldSpec
from .model import (
    FamilyClass,
    SingularModelError,
    WeierstrassModel,
    classify_family,
    is_minimal,
    stabilizer_order,
)
from .polyring import Poly

DEFAULT_BUDGET = 2**36
FAMILIES = (
    FamilyClass.NONISOTRIVIAL,
    FamilyClass.ISOTRIVIAL_J0,
    FamilyClass.ISOTRIVIAL_J1728,
    FamilyClass.ISOTRIVIAL_OTHER,
)
_FAM_CODE = {f: i for i, f in enumerate(FAMILIES)}

# rough single-core throughput, used only for budget refusal messages
_FAST_RATE = 5e7
_GENERAL_RATE = 2e4


class BudgetExceeded(RuntimeError):
    def __init__(self, pairs: int, budget: int, rate: float):
        self.pairs = pairs
        self.budget = budget
        self.estimated_seconds = pairs / rate
        super().__init__(
            f"census needs {pairs} pairs (budget {budget}); estimated "
            f"{self.estimated_seconds:.3g} s single-core. Pass budget_override=True to run anyway."
        )


@dataclass
class CensusResult:
    spec: FieldSpec
    n: int
    shell_classes: int
    burnside_sum: int
    pairs_scanned: int
    minimal_pairs: int
    per_family: dict[str, int]
    elapsed: float
    chunk_digests: list[tuple[int, int]] = field(default_factory=list)
    method: str = "fast"

    def to_dict(self, include_elapsed: bool = True) -> dict:
        d = {
            "q": self.spec.label,
            "n": self.n,
            "shell_classes": self.shell_classes,
            "burnside_sum": self.burnside_sum,
            "pairs_scanned": self.pairs_scanned,
            "minimal_pairs": self.minimal_pairs,
            "per_family": dict(self.per_family),
            "chunk_digests": [list(c) for c in self.chunk_digests],
            "method": self.method,
        }
        if include_elapsed:
            d["elapsed"] = self.elapsed
        return d


# --- pair-space indexing ----------------------------------------------------------


def space_shape(spec: FieldSpec, n: int) -> tuple[int, int]:
    """(number of A's, number of B's) at level n."""
    return spec.q ** (4 * n + 1), spec.q ** (6 * n + 1)


def poly_from_index(spec: FieldSpec, index: int, length: int) -> Poly:
    q = spec.q
    cs = [0] * length
    for i in range(length - 1, -1, -1):
        index, cs[i] = divmod(index, q)
    return Poly._raw(spec, _strip(cs))


def index_of(poly: Poly, length: int) -> int:
    idx = 0
    for c in poly.padded(length):
        idx = idx * poly.spec.q + c
    return idx


def _strip(cs: list[int]) -> tuple[int, ...]:
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def partition_space(spec: FieldSpec, n: int, chunks: int) -> list[range]:
    """Split the A-index range into ``chunks`` contiguous, disjoint slices."""
    if chunks < 1:
        raise ValueError("chunks must be >= 1")
    na, _ = space_shape(spec, n)
    chunks = min(chunks, na)
    bounds = [na * i // chunks for i in range(chunks + 1)]
    return [range(bounds[i], bounds[i + 1]) for i in range(chunks)]


# --- vectorised kernel -----------------------------------------------------------------


class _VecField:
    """Elementwise F_q arithmetic on integer index arrays."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        q = spec.q
        if spec.e == 1:
            self.add_t = self.mul_t = None
        else:
            idx = range(q)
            self.add_t = np.array([[spec.add(a, b) for b in idx] for a in idx], dtype=np.int64)
            self.mul_t = np.array([[spec.mul(a, b) for b in idx] for a in idx], dtype=np.int64)
        self.inv_t = np.array([0] + [spec.inv(a) for a in range(1, q)], dtype=np.int64)

    def add(self, x, y):
        if self.add_t is None:
            return (x + y) % self.spec.p
        return self.add_t[x, y]

    def mul(self, x, y):
        if self.mul_t is None:
            return (x * y) % self.spec.p
        return self.mul_t[x, y]

    def conv(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        n, la = X.shape
        lb = Y.shape[1]
        out = np.zeros((n, la + lb - 1), dtype=np.int64)
        for i in range(la):
            out[:, i : i + lb] = self.add(out[:, i : i + lb], self.mul(X[:, i : i + 1], Y))
        return out


def _all_coeff_rows(q: int, length: int) -> np.ndarray:
    idx = np.arange(q**length, dtype=np.int64)
    return np.stack([(idx // q ** (length - 1 - i)) % q for i in range(length)], axis=1)


def _root_masks(spec: FieldSpec, length: int, power: int, total: int) -> np.ndarray:
    """Bitmask over a in F_q of (t - a)^power | f, for every f of the given length.

    The zero polynomial is divisible by everything.
    """
    mask = np.zeros(total, dtype=np.uint64)
    mask[0] = np.uint64((1 << spec.q) - 1) if spec.q < 64 else np.uint64(2**64 - 1)
    if power > length - 1:
        return mask
    t = Poly.t(spec)
    for a in range(spec.q):
        base = (t - Poly._raw(spec, (a,) if a else ())) ** power
        for c in range(1, spec.q):
            mask[index_of(base.scale(c), length)] |= np.uint64(1 << a)
    return mask


class _ShellKernel:
    """Precomputed B-side tables for sweeping all A-slices at level n <= 1."""

    def __init__(self, spec: FieldSpec, n: int):
        if n > 1:
            raise ValueError("vectorised kernel covers n <= 1 only")
        if spec.q >= 64:
            raise ValueError("vectorised kernel needs q < 64")
        self.spec, self.n = spec, n
        q = spec.q
        self.la, self.lb = 4 * n + 1, 6 * n + 1
        self.ld = 12 * n + 1
        if q**self.ld >= 2**62:
            raise ValueError("discriminant codes overflow int64")
        self.vf = vf = _VecField(spec)
        Bc = _all_coeff_rows(q, self.lb)
        self.nb = Bc.shape[0]
        self.weights_lo = np.array([q**k for k in range(self.ld)], dtype=np.int64)
        B2 = vf.conv(Bc, Bc)
        c27 = spec.from_int(27)
        self.code27B2 = vf.mul(B2, c27) @ self.weights_lo
        self.Bzero = ~Bc.any(axis=1)
        # v_inf(B) = 6n - deg B >= 6  <=>  deg B <= 6n - 6
        self.Binf = ~Bc[:, max(0, 6 * n - 5) :].any(axis=1) if n >= 1 else self.Bzero
        self.mcodeB2 = self._monic_codes(B2)
        self.maskB = _root_masks(spec, self.lb, 6, self.nb)
        self.maskA = _root_masks(spec, self.la, 4, q**self.la)
        lambdas = range(1, q)
        self.l4 = [spec.pow(lam, 4) for lam in lambdas]
        self.l6 = [spec.pow(lam, 6) for lam in lambdas]
        hi = np.array([q ** (self.lb - 1 - i) for i in range(self.lb)], dtype=np.int64)
        self.keyB = []
        self.fixB = []
        own = np.arange(self.nb, dtype=np.int64)
        for s in self.l6:
            k = vf.mul(Bc, s) @ hi
            self.keyB.append(k)
            self.fixB.append(k == own)
        self.own = own
        self._stab_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._canon_cache: dict[tuple[int, ...], np.ndarray] = {}
        fam = np.full(self.nb, _FAM_CODE[FamilyClass.NONISOTRIVIAL], dtype=np.int64)
        fam[self.Bzero] = _FAM_CODE[FamilyClass.ISOTRIVIAL_J1728]
        self.fam_base = fam

    def _monic_codes(self, C: np.ndarray) -> np.ndarray:
        nz = C != 0
        last = C.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1)
        lc = C[np.arange(C.shape[0]), last]
        inv = self.vf.inv_t[lc]
        M = self.vf.mul(C, inv[:, None])
        codes = M @ self.weights_lo
        codes[~nz.any(axis=1)] = -1
        return codes

    def _stab(self, fixers: tuple[int, ...]) -> np.ndarray:
        s = self._stab_cache.get(fixers)
        if s is None:
            s = np.zeros(self.nb, dtype=np.int64)
            for i in fixers:
                s += self.fixB[i]
            self._stab_cache[fixers] = s
        return s

    def _canon(self, fixers: tuple[int, ...]) -> np.ndarray:
        c = self._canon_cache.get(fixers)
        if c is None:
            c = np.ones(self.nb, dtype=bool)
            for i in fixers:
                c &= self.keyB[i] >= self.own
            self._canon_cache[fixers] = c
        return c

    def scan(self, a_index: int, canonical: bool = False, with_mask: bool = False) -> dict:
        spec, q = self.spec, self.spec.q
        A = poly_from_index(spec, a_index, self.la)
        A3 = A**3
        c = (A3 * -4).padded(self.ld)
        code_m4A3 = sum(x * q**k for k, x in enumerate(c))
        keep = self.code27B2 != code_m4A3
        if A.degree <= 4 * self.n - 4:
            keep &= ~self.Binf
        mA = self.maskA[a_index]
        if mA:
            keep &= (self.maskB & mA) == 0
        fixers = tuple(i for i, s in enumerate(self.l4) if A.scale(s) == A)
        stab = self._stab(fixers)
        if A.is_zero():
            fam = np.full(self.nb, _FAM_CODE[FamilyClass.ISOTRIVIAL_J0], dtype=np.int64)
        else:
            a3m = A3.monic().padded(self.ld)
            code = sum(x * q**k for k, x in enumerate(a3m))
            fam = np.where(self.mcodeB2 == code, _FAM_CODE[FamilyClass.ISOTRIVIAL_OTHER], self.fam_base)
        kf = fam[keep]
        ks = stab[keep]
        fam_sums = np.bincount(kf, weights=ks, minlength=len(FAMILIES))
        out = {
            "stab_sum": int(ks.sum()),
            "minimal": int(keep.sum()),
            "fam": [int(round(x)) for x in fam_sums],
        }
        if with_mask:
            out["keep"] = keep
        if canonical:
            # the pair is canonical iff no twist lowers A, and among twists fixing A none lowers B
            lower = any(
                index_of(A.scale(s), self.la) < a_index for s in self.l4
            )
            if lower:
                cmask = np.zeros(self.nb, dtype=bool)
            else:
                cmask = keep & self._canon(fixers)
            out["canonical"] = cmask
            out["family_codes"] = fam
        return out


_KERNELS: dict[tuple[FieldSpec, int], _ShellKernel] = {}


def _kernel(spec: FieldSpec, n: int) -> _ShellKernel:
    k = _KERNELS.get((spec, n))
    if k is None:
        k = _KERNELS[(spec, n)] = _ShellKernel(spec, n)
    return k


def _fast_ok(spec: FieldSpec, n: int) -> bool:
    return n <= 1 and spec.q < 64 and spec.q ** (12 * n + 1) < 2**62


# --- general (oracle) path --------------------------------------------------------------


def _general_scan(spec: FieldSpec, n: int, a_index: int) -> dict:
    la, lb = 4 * n + 1, 6 * n + 1
    A = poly_from_index(spec, a_index, la)
    _, nb = space_shape(spec, n)
    stab_sum = minimal = 0
    fam = [0] * len(FAMILIES)
    for b in range(nb):
        B = poly_from_index(spec, b, lb)
        try:
            m = WeierstrassModel(spec, n, A, B)
        except SingularModelError:
            continue
        if not is_minimal(m):
            continue
        s = stabilizer_order(m)
        minimal += 1
        stab_sum += s
        fam[_FAM_CODE[classify_family(m)]] += s
    return {"stab_sum": stab_sum, "minimal": minimal, "fam": fam}


# --- chunk workers ----------------------------------------------------------------------


def _run_chunk(args) -> dict:
    spec, n, method, chunk_id, a_indices = args
    stab_sum = minimal = 0
    fam = [0] * len(FAMILIES)
    for a in a_indices:
        r = _kernel(spec, n).scan(a) if method == "fast" else _general_scan(spec, n, a)
        stab_sum += r["stab_sum"]
        minimal += r["minimal"]
        fam = [x + y for x, y in zip(fam, r["fam"])]
    return {"id": chunk_id, "stab_sum": stab_sum, "minimal": minimal, "fam": fam, "count": len(a_indices)}


def default_threads() -> int:
    env = os.environ.get("ELLCENSUS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolve_method(spec: FieldSpec, n: int, method: str) -> str:
    if method == "auto":
        return "fast" if _fast_ok(spec, n) else "general"
    if method == "fast" and not _fast_ok(spec, n):
        raise ValueError(f"fast path unavailable for q={spec.q}, n={n}")
    if method not in ("fast", "general"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _check_budget(pairs: int, budget: int, override: bool, method: str) -> None:
    if pairs > budget and not override:
        raise BudgetExceeded(pairs, budget, _FAST_RATE if method == "fast" else _GENERAL_RATE)


def _map_chunks(tasks: list, threads: int) -> list[dict]:
    if threads <= 1 or len(tasks) <= 1:
        return [_run_chunk(t) for t in tasks]
    ctx = mp.get_context("fork")
    with ctx.Pool(min(threads, len(tasks))) as pool:
        return list(pool.imap(_run_chunk, tasks))


def shell_count(
    spec: FieldSpec,
    n: int,
    *,
    chunks: int = 1,
    threads: int = 1,
    budget: int = DEFAULT_BUDGET,
    budget_override: bool = False,
    method: str = "auto",
    a_indices: Sequence[int] | range | None = None,
) -> CensusResult:
    """Burnside class count of minimal models of exact level n.

    ``a_indices`` restricts the sweep to the given A-slices (audit mode); the
    class count is then only meaningful for slices closed under A -> l^4 A.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    method = _resolve_method(spec, n, method)
    na, nb = space_shape(spec, n)
    if a_indices is None:
        slices = partition_space(spec, n, chunks)
    else:
        a_indices = list(a_indices)
        k = max(1, min(chunks, len(a_indices)))
        bounds = [len(a_indices) * i // k for i in range(k + 1)]
        slices = [a_indices[bounds[i] : bounds[i + 1]] for i in range(k)]
    pairs = sum(len(s) for s in slices) * nb
    _check_budget(pairs, budget, budget_override, method)
    t0 = time.perf_counter()
    if method == "fast":
        _kernel(spec, n)  # build once before forking
    tasks = [(spec, n, method, i, s) for i, s in enumerate(slices)]
    parts = _map_chunks(tasks, threads)
    stab_sum = sum(p["stab_sum"] for p in parts)
    minimal = sum(p["minimal"] for p in parts)
    fam = [sum(p["fam"][i] for p in parts) for i in range(len(FAMILIES))]
    elapsed = time.perf_counter() - t0
    g = spec.q - 1
    full = a_indices is None
    if full and (stab_sum % g or any(x % g for x in fam)):
        raise AssertionError("Burnside sum not divisible by q - 1")
    return CensusResult(
        spec=spec,
        n=n,
        shell_classes=stab_sum // g,
        burnside_sum=stab_sum,
        pairs_scanned=pairs,
        minimal_pairs=minimal,
        per_family={f.value: x // g for f, x in zip(FAMILIES, fam)},
        elapsed=elapsed,
        chunk_digests=[(p["id"], p["stab_sum"]) for p in parts],
        method=method,
    )


def cumulative_count(spec: FieldSpec, n: int, **kwargs) -> int:
    """Classes of height <= q^(12n): the sum of shell counts for levels 0..n."""
    return sum(shell_count(spec, m, **kwargs).shell_classes for m in range(n + 1))


def enumerate_minimal(
    spec: FieldSpec,
    n: int,
    families: Iterable[FamilyClass] | None = None,
    *,
    a_indices: Iterable[int] | None = None,
    budget: int = DEFAULT_BUDGET,
    budget_override: bool = False,
) -> Iterator[WeierstrassModel]:
    """One canonical model per isomorphism class, in lex order of (A, B)."""
    wanted = None if families is None else {_FAM_CODE[FamilyClass(f)] for f in families}
    na, nb = space_shape(spec, n)
    a_list = range(na) if a_indices is None else sorted(a_indices)
    _check_budget(len(a_list) * nb, budget, budget_override, "fast" if _fast_ok(spec, n) else "general")
    if _fast_ok(spec, n):
        kern = _kernel(spec, n)
        for a in a_list:
            r = kern.scan(a, canonical=True)
            sel = r["canonical"]
            if wanted is not None:
                sel = sel & np.isin(r["family_codes"], list(wanted))
            bs = np.flatnonzero(sel)
            if bs.size == 0:
                continue
            A = poly_from_index(spec, a, 4 * n + 1)
            for b in bs.tolist():
                yield WeierstrassModel(spec, n, A, poly_from_index(spec, b, 6 * n + 1))
        return
    from .model import canonical_rep

    for a in a_list:
        A = poly_from_index(spec, a, 4 * n + 1)
        for b in range(nb):
            B = poly_from_index(spec, b, 6 * n + 1)
            try:
                m = WeierstrassModel(spec, n, A, B)
            except SingularModelError:
                continue
            if not is_minimal(m) or canonical_rep(m).key() != m.key():
                continue
            if wanted is None or _FAM_CODE[classify_family(m)] in wanted:
                yield m


def minimal_mask(spec: FieldSpec, n: int, a_index: int) -> np.ndarray:
    """Boolean mask over B-indices of smooth minimal pairs in one A-slice (fast path)."""
    return _kernel(spec, n).scan(a_index, with_mask=True)["keep"]


def canonical_count(spec: FieldSpec, n: int, a_indices: Iterable[int]) -> int:
    """Number of canonical minimal pairs inside the given A-slices."""
    kern = _kernel(spec, n)
    return sum(int(kern.scan(a, canonical=True)["canonical"].sum()) for a in a_indices)


def orbit_closed(spec: FieldSpec, n: int, a_indices: Iterable[int]) -> bool:
    """True when the A-slices are stable under A -> l^4 A."""
    la = 4 * n + 1
    s = set(a_indices)
    fourth = {spec.pow(lam, 4) for lam in range(1, spec.q)}
    return all(index_of(poly_from_index(spec, a, la).scale(c), la) in s for a in s for c in fourth)
