"""FSZ_n verdicts by comparing |G_n(u,g)| against |G_n(u,g^m)|.

A group is FSZ_n when the counts agree for every commuting pair (u,g)
and every m coprime to the group order.  The check iterates g over
conjugacy-class representatives and u over the centralizer of g, which
covers all commuting pairs up to simultaneous conjugation; one
representative m per distinct power g^m suffices because the count only
sees g^m.  Both reductions are test-verified properties, and a
no-reduction mode re-runs tiny groups over all commuting pairs.

For the built-in family at n = p^j the scan never enumerates candidate
elements a: the per-u counts come from the congruence analysis, and only
the p - 1 nonidentity elements of the central subgroup of p^j-th powers
can give a nonzero count, so every other g is skipped soundly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gncount import (
    SpjIndexed,
    TableGroup,
    exponent,
    gn_count_structured,
    indexed_view,
    structured_tables,
)
from .mixedmod import GroupParams, MixedVector, ParameterError
from .spgroup import (
    DEFAULT_ENUMERATION_LIMIT,
    EnumerationLimitError,
    SElement,
    SpjGroup,
    b_power_row0,
    element_at,
    generator_a,
    generator_b,
    multiply,
)

NO_REDUCTION_LIMIT = 4096


class VerificationError(RuntimeError):
    """A result contradicts an identity the library is built on."""


@dataclass(frozen=True)
class FszWitness:
    """A commuting pair and residue with unequal counts."""

    u: object
    g: object
    m: int
    count_g: int
    count_gm: int

    def as_dict(self, describe=str) -> dict:
        return {
            "u": describe(self.u),
            "g": describe(self.g),
            "m": self.m,
            "count_g": self.count_g,
            "count_gm": self.count_gm,
        }


@dataclass(frozen=True)
class FszVerdict:
    group: str
    n: int
    verdict: str
    witness: FszWitness | None
    statistics: dict

    @property
    def is_fsz(self) -> bool:
        return self.verdict.startswith("FSZ")

    def as_dict(self, describe=str) -> dict:
        return {
            "group": self.group,
            "n": self.n,
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.as_dict(describe),
            "statistics": dict(sorted(self.statistics.items())),
        }


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def residue_witness_classes(G, g) -> list[int]:
    """Representatives m, coprime to |G|, one per distinct power g^m.

    Units mod |g| other than 1 enumerate the distinct powers; each is
    lifted so it is also a unit modulo every prime of |G| that misses
    |g|.  The lift changes nothing inside a p-group.
    """
    og = G.element_order(g)
    if og == 1:
        return []
    N = G.order()
    R = 1
    for q in _prime_factors(N):
        if og % q:
            R *= q
    out = []
    for m in range(2, og):
        if math.gcd(m, og) != 1:
            continue
        if R == 1:
            lifted = m
        else:
            k = (1 - m) * pow(og, -1, R) % R
            lifted = m + og * k
        assert math.gcd(lifted, N) == 1
        out.append(lifted)
    return out


def conjugacy_class_reps(view, G) -> list[int]:
    """Smallest-index representatives of the conjugacy classes.

    TableGroups conjugate each element by everything at once (their
    conjugator set is the whole group); the structured family walks
    orbits under its few generators, whose closure is the same since
    conjugation by a product composes the generator actions.
    """
    N = view.N
    visited = np.zeros(N, dtype=bool)
    reps = []
    if isinstance(G, TableGroup):
        T = G.array
        inv = G.inverse
        everyone = np.arange(N)
        for a in range(N):
            if visited[a]:
                continue
            reps.append(a)
            visited[T[T[inv, a], everyone]] = True
    else:
        perms = []
        for c in G.conjugators():
            c_idx = view.from_element(c)
            left = view.leftmul_array(view.invert_index(c_idx))
            right = view.rightmul_array(c_idx)
            perms.append(right[left])
        for a in range(N):
            if visited[a]:
                continue
            reps.append(a)
            visited[a] = True
            frontier = [a]
            while frontier:
                nxt = []
                for x in frontier:
                    for perm in perms:
                        y = int(perm[x])
                        if not visited[y]:
                            visited[y] = True
                            nxt.append(y)
                frontier = nxt
    return reps


def _centralizer_indices(view, g_idx: int) -> np.ndarray:
    return np.nonzero(view.rightmul_array(g_idx) == view.leftmul_array(g_idx))[0]


def _power_buckets(P: np.ndarray) -> dict[int, np.ndarray]:
    """Preimages of the n-th power map, index array per attained value."""
    order = np.argsort(P, kind="stable")
    values, starts = np.unique(P[order], return_index=True)
    out = {}
    bounds = list(starts) + [len(P)]
    for i, v in enumerate(values):
        out[int(v)] = order[bounds[i] : bounds[i + 1]]
    return out


_PAIR_CHUNK = 1 << 22


def _u_counts(view, bucket: np.ndarray) -> np.ndarray:
    """counts[u] = |{a in bucket : a*u^{-1} in bucket}| for every u.

    The condition a*u^{-1} = c pins u = c^{-1}*a, so each ordered bucket
    pair (a, c) contributes to exactly one u; a histogram over all pairs
    yields every u at once.  Pair blocks are capped to bound memory.
    """
    counts = np.zeros(view.N, dtype=np.int64)
    k = int(bucket.size)
    if not k:
        return counts
    cinv = view.invert_index_array(bucket)
    step = max(1, _PAIR_CHUNK // k)
    for i in range(0, k, step):
        block = cinv[i : i + step]
        us = view.mul_index_arrays(np.repeat(block, k), np.tile(bucket, block.size))
        counts += np.bincount(us, minlength=view.N)
    return counts


def _generic_scan(G, n: int, *, reduction: bool, threads: int | None) -> FszVerdict:
    view = indexed_view(G, threads)
    N = view.N
    P = view.pow_index_array(n)
    buckets = _power_buckets(P)
    empty = np.empty(0, dtype=np.int64)

    if reduction:
        reps = conjugacy_class_reps(view, G)
    else:
        reps = list(range(N))

    pairs = 0
    comparisons = 0
    for g_idx in reps:
        g_el = view.to_element(g_idx)
        ms = residue_witness_classes(G, g_el)
        if not ms:
            # Only the identity has order 1; its centralizer is everything.
            pairs += N
            continue
        targets = [(m, view.from_element(G.power(g_el, m))) for m in ms]
        cent = _centralizer_indices(view, g_idx)
        needed = {g_idx: buckets.get(g_idx, empty)}
        for _, t_idx in targets:
            needed.setdefault(t_idx, buckets.get(t_idx, empty))
        if all(not b.size for b in needed.values()):
            # Every count on this g and its powers is zero.
            pairs += int(cent.size)
            comparisons += int(cent.size) * len(targets)
            continue
        hist = {idx: _u_counts(view, b) for idx, b in needed.items()}
        counts_g = hist[g_idx][cent]
        mismatch = np.empty((int(cent.size), len(targets)), dtype=bool)
        for col, (_, t_idx) in enumerate(targets):
            mismatch[:, col] = hist[t_idx][cent] != counts_g
        if mismatch.any():
            # row-major argwhere order = smallest u first, then smallest m
            u_pos, t_pos = (int(v) for v in np.argwhere(mismatch)[0])
            u_idx = int(cent[u_pos])
            m, t_idx = targets[t_pos]
            stats = {
                "pairs_examined": pairs + u_pos + 1,
                "comparisons": comparisons + u_pos * len(targets) + t_pos + 1,
            }
            if reduction:
                stats["conjugacy_classes"] = len(reps)
            return FszVerdict(
                group=G.describe(),
                n=n,
                verdict=f"non-FSZ_{n}",
                witness=FszWitness(
                    view.to_element(u_idx),
                    g_el,
                    m,
                    int(counts_g[u_pos]),
                    int(hist[t_idx][cent][u_pos]),
                ),
                statistics=stats,
            )
        pairs += int(cent.size)
        comparisons += int(cent.size) * len(targets)
    stats = {"pairs_examined": pairs, "comparisons": comparisons}
    if reduction:
        stats["conjugacy_classes"] = len(reps)
    return FszVerdict(
        group=G.describe(), n=n, verdict=f"FSZ_{n}", witness=None, statistics=stats
    )


def _central_target(params: GroupParams, s: int) -> SElement:
    coords = (s * params.n % params.top_modulus,) + (0,) * (params.dim - 1)
    return SElement(MixedVector(params, coords), 0)


def _structured_full_scan(G: SpjGroup, threads: int | None) -> FszVerdict:
    """Complete FSZ_{p^j} scan of S(p,j) without enumerating candidates.

    For every u the count against the central target a_1^{s p^j} is
    (number of consistent b-exponents) times a fixed positive constant,
    so the scan stores only that small consistency number per (u, s) and
    compares columns.  g outside the central subgroup contributes zero
    against every power, hence never violates.
    """
    params = G.params
    p, pj, d = params.p, params.n, params.dim
    view = SpjIndexed(G, threads)
    N = view.N
    row0 = np.array(b_power_row0(params), dtype=np.int64)
    t_table_t, ic_t = structured_tables(params)
    t_table = np.array(t_table_t, dtype=np.int64)
    ic = np.array(ic_t, dtype=np.int64)
    m_grid = np.arange(pj, dtype=np.int64)

    def job(start: int, stop: int) -> np.ndarray:
        V, K = view.decode(np.arange(start, stop, dtype=np.int64))
        Wv, Kb = view.inv(V, K)
        deltas = (Wv @ row0.T) % p
        ic2 = ic[t_table[(m_grid[None, :] + Kb[:, None]) % pj]]
        ic1 = ic[t_table]
        block = np.empty((stop - start, p - 1), dtype=np.int16)
        for rhs in range(1, p):
            s1 = rhs * ic1 % p
            s2 = (rhs * ic2 - deltas) % p
            block[:, rhs - 1] = (s1[None, :] == s2).sum(axis=1)
        return block

    consist = np.concatenate(view.map_chunks(job))
    per_m = pj * p ** (pj - 2)
    ms = [m for m in range(2, p)]

    for s in range(1, p):
        col = consist[:, s - 1]
        viol = np.zeros(N, dtype=bool)
        for m in ms:
            viol |= col != consist[:, (s * m % p) - 1]
        if not viol.any():
            continue
        u_idx = int(np.nonzero(viol)[0][0])
        m_hit = next(
            m for m in ms if consist[u_idx, s - 1] != consist[u_idx, (s * m % p) - 1]
        )
        u = element_at(params, u_idx)
        g = _central_target(params, s)
        gm = _central_target(params, s * m_hit % p)
        count_g = gn_count_structured(params, u, g).count
        count_gm = gn_count_structured(params, u, gm).count
        if count_g != int(consist[u_idx, s - 1]) * per_m or count_gm != int(
            consist[u_idx, (s * m_hit % p) - 1]
        ) * per_m:
            raise VerificationError(
                "scalar recount disagrees with the vectorized scan at the witness"
            )
        stats = {
            "pairs_examined": (s - 1) * N + u_idx + 1,
            "comparisons": ((s - 1) * N + u_idx) * len(ms) + ms.index(m_hit) + 1,
            "central_targets": p - 1,
            "skipped_by_support": N - p,
        }
        return FszVerdict(
            group=G.describe(),
            n=pj,
            verdict=f"non-FSZ_{pj}",
            witness=FszWitness(u, g, m_hit, count_g, count_gm),
            statistics=stats,
        )
    stats = {
        "pairs_examined": (p - 1) * N,
        "comparisons": (p - 1) * N * len(ms),
        "central_targets": p - 1,
        "skipped_by_support": N - p,
    }
    return FszVerdict(
        group=G.describe(), n=pj, verdict=f"FSZ_{pj}", witness=None, statistics=stats
    )


def _designated_pair(params: GroupParams) -> tuple[SElement, SElement, SElement]:
    u = multiply(params, generator_b(params), generator_a(params, 1))
    g = _central_target(params, 1)
    g2 = _central_target(params, 2)
    return u, g, g2


def _structured_partial(G: SpjGroup) -> FszVerdict:
    params = G.params
    u, g, g2 = _designated_pair(params)
    c1 = gn_count_structured(params, u, g)
    c2 = gn_count_structured(params, u, g2)
    stats = {
        "pairs_examined": 1,
        "comparisons": 1,
        "group_order_over_limit": 1,
    }
    if c1.count != c2.count:
        return FszVerdict(
            group=G.describe(),
            n=params.n,
            verdict=f"non-FSZ_{params.n} (partial scan)",
            witness=FszWitness(u, g, 2, c1.count, c2.count),
            statistics=stats,
        )
    return FszVerdict(
        group=G.describe(),
        n=params.n,
        verdict="inconclusive (partial scan)",
        witness=None,
        statistics=stats,
    )


def check_fsz_n(
    G,
    n: int,
    *,
    reduction: bool = True,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    threads: int | None = None,
    no_reduction_limit: int = NO_REDUCTION_LIMIT,
) -> FszVerdict:
    """Decide FSZ_n for one n, with a witness when the answer is no."""
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if reduction and isinstance(G, SpjGroup) and n == G.params.n:
        if G.order() <= limit:
            return _structured_full_scan(G, threads)
        return _structured_partial(G)
    if not reduction and G.order() > no_reduction_limit:
        raise EnumerationLimitError(
            f"the no-reduction scan is for cross-validation on tiny groups: "
            f"order {G.order()} exceeds {no_reduction_limit}"
        )
    if G.order() > limit:
        raise EnumerationLimitError(
            f"group order {G.order()} exceeds the enumeration limit {limit}"
        )
    return _generic_scan(G, n, reduction=reduction, threads=threads)


def check_fsz(
    G,
    *,
    reduction: bool = True,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    threads: int | None = None,
) -> list[FszVerdict]:
    """Verdicts for every n dividing the exponent, ascending.

    FSZ for all n reduces to these n: a^n only depends on n modulo the
    order of a, and every order divides the exponent.
    """
    e = exponent(G, limit=limit, threads=threads)
    divisors = sorted(d for d in range(1, e + 1) if e % d == 0)
    return [
        check_fsz_n(G, n, reduction=reduction, limit=limit, threads=threads)
        for n in divisors
    ]


def spj_witness(params: GroupParams) -> FszVerdict:
    """Counts at the designated pair (b a_1, a_1^{p^j}) and its square.

    For p > 3 the first count must be 0 and the second positive, which
    certifies non-FSZ_{p^j} with m = 2; anything else is a hard error.
    For p = 3 both counts are reported without asserting an inequality.
    """
    G = SpjGroup(params)
    u, g, g2 = _designated_pair(params)
    c1 = gn_count_structured(params, u, g)
    c2 = gn_count_structured(params, u, g2)
    stats = {
        "count_designated": c1.count,
        "count_designated_square": c2.count,
        "pairs_examined": 1,
    }
    if params.p > 3:
        if c1.count != 0 or c2.count <= 0:
            raise VerificationError(
                f"designated pair of {params.describe()} gave counts "
                f"({c1.count}, {c2.count}); expected (0, positive)"
            )
        return FszVerdict(
            group=G.describe(),
            n=params.n,
            verdict=f"non-FSZ_{params.n}",
            witness=FszWitness(u, g, 2, c1.count, c2.count),
            statistics=stats,
        )
    if c1.count != c2.count:
        return FszVerdict(
            group=G.describe(),
            n=params.n,
            verdict=f"non-FSZ_{params.n}",
            witness=FszWitness(u, g, 2, c1.count, c2.count),
            statistics=stats,
        )
    return FszVerdict(
        group=G.describe(),
        n=params.n,
        verdict="inconclusive (designated pair counts equal)",
        witness=None,
        statistics=stats,
    )
