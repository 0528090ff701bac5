"""Counting the sets G_n(u, g) = {a : a^n = (a u^-1)^n = g}.

Two independent routes are provided on purpose.  The brute-force scan
enumerates every group element and evaluates both n-th powers honestly
by square-and-multiply; it works for any enumerable group handle.  The
structured counter works only for the built-in family at n = p^j and
never enumerates: membership reduces to one linear congruence per
b-exponent of the candidate.  Tests hold the two routes against each
other; nothing here shares intermediate results between them.

Multiplication tables for external groups enter through validate_table,
which checks the group axioms before anything downstream trusts them.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .mixedmod import GroupParams, MixedVector, ParameterError
from .spgroup import (
    DEFAULT_ENUMERATION_LIMIT,
    EnumerationLimitError,
    SElement,
    SpjGroup,
    b_power_row0,
    element_at,
    element_index,
    invert,
    t_of_b_exponent,
)
from .construction import build_b
from .mixedmod import mat_pow

MAX_WITNESSES = 16
_CHUNK = 1 << 16
_FULL_ASSOC_LIMIT = 512
_SAMPLED_TRIPLES = 10 ** 6


def _default_threads(threads: int | None) -> int:
    if threads is not None and threads >= 1:
        return threads
    return max(1, os.cpu_count() or 1)


class TableError(ValueError):
    """A multiplication table fails validation; indices are in the message."""


@dataclass(frozen=True)
class GnCount:
    """Result of one count: |{a : a^n = (a u^-1)^n = g}|."""

    n: int
    u: object
    g: object
    count: int
    witnesses: tuple
    method: str

    def as_dict(self, describe=str) -> dict:
        return {
            "n": self.n,
            "u": describe(self.u),
            "g": describe(self.g),
            "count": self.count,
            "witnesses": [describe(w) for w in self.witnesses],
            "method": self.method,
        }


class TableGroup:
    """Group given by a validated multiplication table over 0..order-1."""

    def __init__(self, array: np.ndarray, identity_index: int, name: str | None):
        self.array = array
        self.identity_index = identity_index
        self.name = name
        self.inverse = np.empty(len(array), dtype=np.int64)
        for a in range(len(array)):
            self.inverse[a] = int(np.nonzero(array[a] == identity_index)[0][0])
        self._pow_cache: dict[int, np.ndarray] = {}

    def order(self) -> int:
        return len(self.array)

    def identity(self) -> int:
        return self.identity_index

    def multiply(self, x: int, y: int) -> int:
        return int(self.array[x, y])

    def invert(self, x: int) -> int:
        return int(self.inverse[x])

    def equal(self, x: int, y: int) -> bool:
        return x == y

    def power(self, x: int, e: int) -> int:
        if e < 0:
            x, e = self.invert(x), -e
        result, base = self.identity_index, x
        while e:
            if e & 1:
                result = int(self.array[result, base])
            e >>= 1
            if e:
                base = int(self.array[base, base])
        return result

    def enumerate(self, limit: int = DEFAULT_ENUMERATION_LIMIT) -> Iterator[int]:
        return iter(range(len(self.array)))

    def element_order(self, x: int) -> int:
        order, y = 1, x
        while y != self.identity_index:
            y = int(self.array[y, x])
            order += 1
        return order

    def conjugators(self) -> tuple[int, ...]:
        # No generating set is known for a raw table; all elements work.
        return tuple(range(len(self.array)))

    def pow_index_array(self, n: int) -> np.ndarray:
        """x^n for every x at once, as an index array."""
        if n not in self._pow_cache:
            N = len(self.array)
            e = n
            invert_first = e < 0
            if invert_first:
                e = -e
            result = np.full(N, self.identity_index, dtype=np.int64)
            base = self.inverse.copy() if invert_first else np.arange(N, dtype=np.int64)
            while e:
                if e & 1:
                    result = self.array[result, base]
                e >>= 1
                if e:
                    base = self.array[base, base]
            self._pow_cache[n] = np.ascontiguousarray(result)
        return self._pow_cache[n]

    def describe(self) -> str:
        return self.name or f"table group of order {len(self.array)}"

    def describe_element(self, x: int) -> str:
        return str(x)


def validate_table(
    table: Sequence[Sequence[int]], name: str | None = None, *, seed: int = 0
) -> TableGroup:
    """Check the group axioms on a raw grid and wrap it as a TableGroup.

    Rejections carry the offending indices.  Associativity is checked on
    every triple up to order 512 and on 10^6 seeded random triples above
    that.  Inverses need no separate check: a Latin square with a
    two-sided identity puts the identity exactly once in every row.
    """
    N = len(table)
    if N == 0:
        raise TableError("empty table")
    for r, row in enumerate(table):
        if len(row) != N:
            raise TableError(f"row {r} has {len(row)} entries, expected {N}")
        for c, val in enumerate(row):
            if not isinstance(val, int) or isinstance(val, bool) or not 0 <= val < N:
                raise TableError(f"entry at row {r} column {c} is {val!r}, expected 0..{N - 1}")
    T = np.array(table, dtype=np.int64)

    full = np.arange(N)
    for r in range(N):
        if not np.array_equal(np.sort(T[r]), full):
            seen: dict[int, int] = {}
            for c, val in enumerate(T[r]):
                if int(val) in seen:
                    raise TableError(
                        f"Latin-square violation: row {r} repeats {int(val)} "
                        f"at columns {seen[int(val)]} and {c}"
                    )
                seen[int(val)] = c
    for c in range(N):
        col = T[:, c]
        if not np.array_equal(np.sort(col), full):
            seen = {}
            for r, val in enumerate(col):
                if int(val) in seen:
                    raise TableError(
                        f"Latin-square violation: column {c} repeats {int(val)} "
                        f"at rows {seen[int(val)]} and {r}"
                    )
                seen[int(val)] = r

    identity_index = -1
    for e in range(N):
        if np.array_equal(T[e], full) and np.array_equal(T[:, e], full):
            identity_index = e
            break
    if identity_index < 0:
        raise TableError("no identity: no index e has e*x = x = x*e for all x")

    if N <= _FULL_ASSOC_LIMIT:
        for a in range(N):
            left = T[T[a], :]
            right = T[a][T]
            if not np.array_equal(left, right):
                b, c = map(int, np.argwhere(left != right)[0])
                raise TableError(
                    f"associativity violation at ({a},{b},{c}): "
                    f"({a}*{b})*{c} = {int(left[b, c])} but {a}*({b}*{c}) = {int(right[b, c])}"
                )
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, N, size=(3, _SAMPLED_TRIPLES))
        left = T[T[a, b], c]
        right = T[a, T[b, c]]
        bad = np.nonzero(left != right)[0]
        if bad.size:
            i = int(bad[0])
            raise TableError(
                f"associativity violation at ({int(a[i])},{int(b[i])},{int(c[i])}) "
                f"(sampled check)"
            )

    return TableGroup(T, identity_index, name)


def load_table_group(path: str) -> TableGroup:
    """Read a JSON table file: {"order": N, "table": [[...]], "name"?: str}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TableError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise TableError(f"{path}: {exc.strerror or exc}") from exc
    if not isinstance(data, dict):
        raise TableError(f"{path}: top level must be an object")
    if "order" not in data or "table" not in data:
        raise TableError(f"{path}: required fields are \"order\" and \"table\"")
    order = data["order"]
    table = data["table"]
    if not isinstance(order, int) or isinstance(order, bool) or order < 1:
        raise TableError(f"{path}: \"order\" must be a positive integer")
    if not isinstance(table, list) or len(table) != order:
        raise TableError(
            f"{path}: \"table\" must be a list of {order} rows, got "
            f"{len(table) if isinstance(table, list) else type(table).__name__}"
        )
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise TableError(f"{path}: \"name\" must be a string")
    try:
        return validate_table(table, name)
    except TableError as exc:
        raise TableError(f"{path}: {exc}") from exc


@lru_cache(maxsize=None)
def _spj_matrices(params: GroupParams) -> tuple[np.ndarray, np.ndarray]:
    """Stack of B^k transposed for batched row-vector application, and moduli."""
    stack = []
    for k in range(params.b_order):
        stack.append(mat_pow(build_b(params), k).rows)
    BkT = np.array(stack, dtype=np.int64).transpose(0, 2, 1)
    moduli = np.array(
        [params.row_modulus(r) for r in range(params.dim)], dtype=np.int64
    )
    # Dot products of dim entries below each modulus must fit in int64.
    assert params.dim * params.top_modulus ** 2 < 2 ** 62
    return BkT, moduli


class SpjIndexed:
    """Index-array view of S(p,j) for vectorized scans.

    Elements are their enumeration indices; batched group operations run
    on (vector, b-exponent) arrays decoded from indices in fixed-size
    chunks so results never depend on the worker count.
    """

    def __init__(self, G: SpjGroup, threads: int | None = None):
        self.group = G
        self.params = G.params
        self.N = G.params.group_order
        self.threads = _default_threads(threads)
        self.identity_index = 0
        self._BkT, self._moduli = _spj_matrices(G.params)
        self._abelian = self.N // G.params.b_order
        self._tail_weights = np.array(
            [G.params.p ** (G.params.dim - 1 - i) for i in range(1, G.params.dim)],
            dtype=np.int64,
        )

    def _mod(self, V: np.ndarray) -> np.ndarray:
        np.remainder(V, self._moduli, out=V)
        return V

    def decode(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p, d = self.params.p, self.params.dim
        K, rem = np.divmod(idx.astype(np.int64), self._abelian)
        V = np.empty((len(idx), d), dtype=np.int64)
        V[:, 0], tail = np.divmod(rem, p ** (d - 1))
        for i in range(1, d):
            V[:, i], tail = np.divmod(tail, p ** (d - 1 - i))
        return V, K

    def encode(self, V: np.ndarray, K: np.ndarray) -> np.ndarray:
        p, d = self.params.p, self.params.dim
        idx = K * self._abelian + V[:, 0] * p ** (d - 1)
        if d > 1:
            idx = idx + V[:, 1:] @ self._tail_weights
        return idx

    def _apply_by_k(self, K: np.ndarray, V: np.ndarray) -> np.ndarray:
        """B^{K[i]} applied to row i of V."""
        out = np.empty_like(V)
        for kk in range(self.params.b_order):
            mask = K == kk
            if mask.any():
                out[mask] = V[mask] @ self._BkT[kk]
        return self._mod(out)

    def mul(self, V1, K1, V2, K2) -> tuple[np.ndarray, np.ndarray]:
        V = self._mod(V1 + self._apply_by_k(K1, V2))
        return V, (K1 + K2) % self.params.b_order

    def inv(self, V, K) -> tuple[np.ndarray, np.ndarray]:
        Kb = (self.params.b_order - K) % self.params.b_order
        return self._mod(-self._apply_by_k(Kb, V)), Kb

    def pow(self, V, K, e: int) -> tuple[np.ndarray, np.ndarray]:
        if e < 0:
            (V, K), e = self.inv(V, K), -e
        rV = np.zeros_like(V)
        rK = np.zeros_like(K)
        bV, bK = V.copy(), K.copy()
        while e:
            if e & 1:
                rV, rK = self.mul(rV, rK, bV, bK)
            e >>= 1
            if e:
                bV, bK = self.mul(bV, bK, bV, bK)
        return rV, rK

    def _x_arrays(self, x_idx: int) -> tuple[np.ndarray, np.ndarray]:
        V, K = self.decode(np.array([x_idx], dtype=np.int64))
        return V, K

    def chunks(self) -> Iterator[tuple[int, int]]:
        for start in range(0, self.N, _CHUNK):
            yield start, min(start + _CHUNK, self.N)

    def map_chunks(self, fn):
        """Run fn(start, stop) over all chunks, merged in chunk order."""
        spans = list(self.chunks())
        if self.threads <= 1 or len(spans) <= 1:
            return [fn(*span) for span in spans]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(lambda s: fn(*s), spans))

    def pow_index_array(self, n: int) -> np.ndarray:
        def job(start: int, stop: int) -> np.ndarray:
            V, K = self.decode(np.arange(start, stop, dtype=np.int64))
            return self.encode(*self.pow(V, K, n))

        return np.concatenate(self.map_chunks(job))

    def rightmul_array(self, x_idx: int) -> np.ndarray:
        """Index of a*x for every a; one shift row per b-exponent of a."""
        xV, xK = self._x_arrays(x_idx)
        shifts = np.empty((self.params.b_order, self.params.dim), dtype=np.int64)
        for kk in range(self.params.b_order):
            shifts[kk] = xV[0] @ self._BkT[kk]
        self._mod(shifts)

        def job(start: int, stop: int) -> np.ndarray:
            V, K = self.decode(np.arange(start, stop, dtype=np.int64))
            V = self._mod(V + shifts[K])
            return self.encode(V, (K + int(xK[0])) % self.params.b_order)

        return np.concatenate(self.map_chunks(job))

    def leftmul_array(self, x_idx: int) -> np.ndarray:
        xV, xK = self._x_arrays(x_idx)
        BT = self._BkT[int(xK[0])]

        def job(start: int, stop: int) -> np.ndarray:
            V, K = self.decode(np.arange(start, stop, dtype=np.int64))
            V = self._mod(self._mod(V @ BT) + xV[0])
            return self.encode(V, (K + int(xK[0])) % self.params.b_order)

        return np.concatenate(self.map_chunks(job))

    def invert_index(self, x_idx: int) -> int:
        V, K = self._x_arrays(x_idx)
        return int(self.encode(*self.inv(V, K))[0])

    def mul_index_arrays(self, a_idx: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
        V1, K1 = self.decode(np.asarray(a_idx, dtype=np.int64))
        V2, K2 = self.decode(np.asarray(b_idx, dtype=np.int64))
        return self.encode(*self.mul(V1, K1, V2, K2))

    def invert_index_array(self, idx: np.ndarray) -> np.ndarray:
        V, K = self.decode(np.asarray(idx, dtype=np.int64))
        return self.encode(*self.inv(V, K))

    def orders_exponent(self) -> int:
        """lcm of all element orders, scanned in chunks."""
        p = self.params.p
        best = 0

        def job(start: int, stop: int) -> int:
            V, K = self.decode(np.arange(start, stop, dtype=np.int64))
            alive = np.ones(stop - start, dtype=bool)
            steps = 0
            local = 0
            while alive.any():
                done = alive & ~(V.any(axis=1) | (K != 0))
                if done.any():
                    local = max(local, steps)
                    alive &= ~done
                if not alive.any():
                    break
                V, K = self.pow(V, K, p)
                steps += 1
                assert steps <= self.params.j + 2
            return local

        for got in self.map_chunks(job):
            best = max(best, got)
        return p ** best

    def to_element(self, idx: int) -> SElement:
        return element_at(self.params, idx)

    def from_element(self, x: SElement) -> int:
        return element_index(self.params, x)

    def describe_element(self, idx: int) -> str:
        return self.group.describe_element(self.to_element(idx))


class TableIndexed:
    """Index-array view of a TableGroup; elements already are indices."""

    def __init__(self, G: TableGroup, threads: int | None = None):
        self.group = G
        self.N = G.order()
        self.identity_index = G.identity_index

    def pow_index_array(self, n: int) -> np.ndarray:
        return self.group.pow_index_array(n)

    def rightmul_array(self, x_idx: int) -> np.ndarray:
        return self.group.array[:, x_idx].copy()

    def leftmul_array(self, x_idx: int) -> np.ndarray:
        return self.group.array[x_idx].copy()

    def invert_index(self, x_idx: int) -> int:
        return self.group.invert(x_idx)

    def mul_index_arrays(self, a_idx: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
        return self.group.array[a_idx, b_idx]

    def invert_index_array(self, idx: np.ndarray) -> np.ndarray:
        return self.group.inverse[idx]

    def orders_exponent(self) -> int:
        return math.lcm(*(self.group.element_order(x) for x in range(self.N)))

    def to_element(self, idx: int) -> int:
        return idx

    def from_element(self, x: int) -> int:
        return x

    def describe_element(self, idx: int) -> str:
        return str(idx)


def indexed_view(G, threads: int | None = None):
    if isinstance(G, SpjGroup):
        return SpjIndexed(G, threads)
    if isinstance(G, TableGroup):
        return TableIndexed(G, threads)
    raise ParameterError(f"no indexed view for {type(G).__name__}")


def _guard(G, limit: int) -> None:
    if G.order() > limit:
        raise EnumerationLimitError(
            f"group order {G.order()} exceeds the enumeration limit {limit}"
        )


def gn_count_bruteforce_many(
    G,
    n: int,
    u,
    targets: Sequence,
    *,
    threads: int | None = None,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    max_witnesses: int = MAX_WITNESSES,
) -> list[GnCount]:
    """One full scan, counted against several targets g at once.

    Each target costs only the final comparisons; the two n-th powers per
    element are computed once.  Witnesses come back in enumeration order.
    """
    _guard(G, limit)
    view = indexed_view(G, threads)
    uinv = view.invert_index(view.from_element(u))
    shifted = view.rightmul_array(uinv)
    powers = view.pow_index_array(n)
    tgt = np.array([view.from_element(g) for g in targets], dtype=np.int64)

    counts = []
    witness_idx = []
    for t in tgt:
        mask = (powers == t) & (powers[shifted] == t)
        counts.append(int(mask.sum()))
        witness_idx.append([int(i) for i in np.nonzero(mask)[0][:max_witnesses]])
    return [
        GnCount(
            n=n,
            u=u,
            g=g,
            count=counts[i],
            witnesses=tuple(view.to_element(w) for w in witness_idx[i]),
            method="bruteforce",
        )
        for i, g in enumerate(targets)
    ]


def gn_count_bruteforce(
    G,
    n: int,
    u,
    g,
    *,
    threads: int | None = None,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    max_witnesses: int = MAX_WITNESSES,
) -> GnCount:
    """|G_n(u,g)| by scanning every element of G."""
    return gn_count_bruteforce_many(
        G, n, u, [g], threads=threads, limit=limit, max_witnesses=max_witnesses
    )[0]


@lru_cache(maxsize=None)
def structured_tables(params: GroupParams) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """t(k) for each b-exponent k, and the mod-p inverse of the coefficient.

    The p^j-th power of an element with b-exponent k is a_1^{c * v_0} with
    c = 2 p^j when t(k) = 0 and c = p^j otherwise; only c / p^j matters
    mod p, so its inverse is all the congruence solving needs.
    """
    t_table = tuple(t_of_b_exponent(params, k) for k in range(params.b_order))
    inv2 = pow(2, -1, params.p)
    inv_coeff = tuple(inv2 if t == 0 else 1 for t in range(params.j + 1))
    return t_table, inv_coeff


def _structured_profile(params: GroupParams, u: SElement):
    """Per-exponent data for counting against any central target.

    Returns (kw, deltas, t_table, inv_coeff) where deltas[m] is the first
    coordinate mod p of B^m applied to the vector part of u^-1.
    """
    uinv = invert(params, u)
    w = uinv.vec.coords
    row0 = b_power_row0(params)
    p = params.p
    deltas = tuple(
        sum(r * c for r, c in zip(row0[m], w)) % p for m in range(params.b_order)
    )
    t_table, inv_coeff = structured_tables(params)
    return uinv.k, deltas, t_table, inv_coeff


def _structured_solutions(params: GroupParams, u: SElement, rhs: int) -> list[tuple[int, int]]:
    """(m, v_0 residue) for every consistent b-exponent m, ascending in m."""
    p = params.p
    kw, deltas, t_table, ic = _structured_profile(params, u)
    out = []
    for m in range(params.b_order):
        s1 = rhs * ic[t_table[m]] % p
        s2 = (rhs * ic[t_table[(m + kw) % params.b_order]] - deltas[m]) % p
        if s1 == s2:
            out.append((m, s1))
    return out


def gn_count_structured(
    params: GroupParams,
    u: SElement,
    g: SElement,
    *,
    max_witnesses: int = MAX_WITNESSES,
) -> GnCount:
    """|G_{p^j}(u, g)| from the congruence analysis; no enumeration.

    Any g outside the central cyclic subgroup of p^j-th powers gives 0.
    Inside it, for each b-exponent m of a candidate a the two power
    conditions pin the first coordinate of a mod p; the other coordinates
    are free.  Every consistent m therefore contributes exactly
    p^j * p^(p^j - 2) elements.
    """
    n = params.n
    supported = (
        g.k == 0 and not any(g.vec.coords[1:]) and g.vec.coords[0] % n == 0
    )
    if not supported:
        return GnCount(n=n, u=u, g=g, count=0, witnesses=(), method="structured")

    rhs = (g.vec.coords[0] // n) % params.p
    solutions = _structured_solutions(params, u, rhs)
    per_m = n * params.p ** (n - 2)
    count = len(solutions) * per_m

    witnesses = []
    p, d = params.p, params.dim
    for m, v0_res in solutions:
        if len(witnesses) >= max_witnesses:
            break
        for v0 in range(v0_res, params.top_modulus, p):
            if len(witnesses) >= max_witnesses:
                break
            for tail in itertools.product(range(p), repeat=d - 1):
                witnesses.append(SElement(MixedVector(params, (v0,) + tail), m))
                if len(witnesses) >= max_witnesses:
                    break
    return GnCount(
        n=n, u=u, g=g, count=count, witnesses=tuple(witnesses), method="structured"
    )


def exponent(G, *, limit: int = DEFAULT_ENUMERATION_LIMIT, threads: int | None = None) -> int:
    """Least common multiple of all element orders."""
    _guard(G, limit)
    return indexed_view(G, threads).orders_exponent()
