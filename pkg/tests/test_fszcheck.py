"""FSZ_n verdicts, residue classes, class reps, and the designated witness."""

import math
import random

import numpy as np
import pytest

import tablefixtures as tf
from fsz_forge.mixedmod import GroupParams
from fsz_forge.gncount import (
    EnumerationLimitError,
    gn_count_bruteforce,
    indexed_view,
    validate_table,
)
from fsz_forge.fszcheck import (
    VerificationError,
    _power_buckets,
    _u_counts,
    check_fsz,
    check_fsz_n,
    conjugacy_class_reps,
    residue_witness_classes,
    spj_witness,
)
from fsz_forge.spgroup import (
    SpjGroup,
    generator_a,
    identity_element,
    power_generic,
    random_element,
)

P31 = GroupParams(3, 1)
P51 = GroupParams(5, 1)


def test_residue_witness_classes_values():
    G = SpjGroup(P51)
    a1 = generator_a(P51, 1)
    g5 = power_generic(P51, a1, 5)
    assert residue_witness_classes(G, g5) == [2, 3, 4]
    assert residue_witness_classes(G, identity_element(P51)) == []
    r25 = residue_witness_classes(G, a1)
    assert len(r25) == 19
    assert sorted(m % 25 for m in r25) == [m for m in range(2, 25) if m % 5]
    assert all(math.gcd(m, G.order()) == 1 for m in r25)


def test_residue_witness_classes_crt_lift():
    Z6 = validate_table(tf.cyclic(6), "Z6")
    # element 2 has order 3; unit 2 mod 3 must lift to a unit mod 6
    lifts = residue_witness_classes(Z6, 2)
    assert len(lifts) == 1
    assert lifts[0] % 3 == 2 and math.gcd(lifts[0], 6) == 1
    assert residue_witness_classes(Z6, 1) == [5]


def test_conjugacy_class_reps_on_known_groups():
    Z6 = validate_table(tf.cyclic(6), "Z6")
    assert conjugacy_class_reps(indexed_view(Z6), Z6) == [0, 1, 2, 3, 4, 5]
    D4 = validate_table(tf.dihedral(4), "D4")
    assert conjugacy_class_reps(indexed_view(D4), D4) == [0, 1, 2, 4, 5]


def test_conjugacy_class_reps_partition_s31():
    G = SpjGroup(P31)
    view = indexed_view(G)
    reps = conjugacy_class_reps(view, G)
    # independently partition all 81 elements by conjugation under everything
    els = list(G.enumerate())
    seen: set = set()
    classes = []
    for x in els:
        if x in seen:
            continue
        orbit = {G.multiply(G.multiply(G.invert(t), x), t) for t in els}
        seen |= orbit
        classes.append(orbit)
    assert len(reps) == len(classes)
    assert sum(len(c) for c in classes) == 81
    rep_elements = {view.to_element(r) for r in reps}
    for orbit in classes:
        assert len(orbit & rep_elements) == 1


def test_u_counts_histogram_matches_bruteforce():
    D4 = validate_table(tf.dihedral(4), "D4")
    view = indexed_view(D4)
    buckets = _power_buckets(view.pow_index_array(2))
    for g in range(8):
        hist = _u_counts(view, buckets.get(g, np.empty(0, dtype=np.int64)))
        for u in range(8):
            assert hist[u] == gn_count_bruteforce(D4, 2, u, g).count


def test_check_fsz_n_finds_the_5_1_witness():
    G = SpjGroup(P51)
    verdict = check_fsz_n(G, 5)
    assert verdict.verdict == "non-FSZ_5"
    assert not verdict.is_fsz
    w = verdict.witness
    assert G.describe_element(w.u) == "a1^1 b^1"
    assert G.describe_element(w.g) == "a1^5"
    assert w.m == 2
    assert (w.count_g, w.count_gm) == (0, 625)
    assert math.gcd(w.m, G.order()) == 1
    assert G.multiply(w.u, w.g) == G.multiply(w.g, w.u)
    # brute-force revalidation of both counts
    gm = G.power(w.g, w.m)
    assert gn_count_bruteforce(G, 5, w.u, w.g).count == 0
    assert gn_count_bruteforce(G, 5, w.u, gm).count == 625


def test_check_fsz_n_small_cases():
    assert check_fsz_n(SpjGroup(P31), 3).verdict == "FSZ_3"
    Z6 = validate_table(tf.cyclic(6), "Z6")
    v = check_fsz_n(Z6, 2)
    assert v.verdict == "FSZ_2" and v.is_fsz and v.witness is None


def test_check_fsz_divisor_sweep():
    verdicts = check_fsz(SpjGroup(P31))
    assert [(v.n, v.verdict) for v in verdicts] == [
        (1, "FSZ_1"),
        (3, "FSZ_3"),
        (9, "FSZ_9"),
    ]
    plain = check_fsz(SpjGroup(P31), reduction=False)
    assert [(v.n, v.verdict) for v in plain] == [(v.n, v.verdict) for v in verdicts]


def test_check_fsz_flags_s51_at_n_5():
    verdicts = check_fsz(SpjGroup(P51))
    assert [(v.n, v.verdict) for v in verdicts] == [
        (1, "FSZ_1"),
        (5, "non-FSZ_5"),
        (25, "FSZ_25"),
    ]


def test_check_fsz_n_guards():
    with pytest.raises(EnumerationLimitError, match="enumeration limit"):
        check_fsz_n(SpjGroup(P51), 2, limit=100)
    with pytest.raises(EnumerationLimitError, match="tiny groups"):
        check_fsz_n(SpjGroup(P51), 5, reduction=False)


def test_partial_scan_verdict_beyond_the_guard():
    G = SpjGroup(GroupParams(5, 2))
    verdict = check_fsz_n(G, 25)
    assert verdict.verdict == "non-FSZ_25 (partial scan)"
    w = verdict.witness
    assert (w.count_g, w.m) == (0, 2)
    assert w.count_gm > 0


@pytest.mark.parametrize("p,j", [(5, 1), (7, 1), (5, 2), (7, 2)])
def test_spj_witness_for_p_above_3(p, j):
    verdict = spj_witness(GroupParams(p, j))
    assert verdict.verdict == f"non-FSZ_{p**j}"
    w = verdict.witness
    assert w.m == 2 and w.count_g == 0 and w.count_gm > 0


def test_spj_witness_boundary_at_p_3():
    v31 = spj_witness(P31)
    assert v31.verdict == "inconclusive (designated pair counts equal)"
    assert v31.witness is None
    assert v31.statistics["count_designated"] == 9
    assert v31.statistics["count_designated_square"] == 9
    v32 = spj_witness(GroupParams(3, 2))
    assert v32.verdict.startswith("inconclusive")
    assert v32.statistics["count_designated"] == 59049
    assert v32.statistics["count_designated_square"] == 59049


def test_spj_witness_counts_match_the_5_1_goldens():
    v = spj_witness(P51)
    assert v.statistics["count_designated"] == 0
    assert v.statistics["count_designated_square"] == 625


def _random_triples(G, rng, count, ns):
    els = list(G.enumerate())
    for _ in range(count):
        yield rng.choice(els), rng.choice(els), rng.choice(ns)


def test_inverse_bijection_and_conjugation_invariance_sampled():
    G = SpjGroup(P31)
    rng = random.Random(41)
    for u, g, n in _random_triples(G, rng, 30, [1, 2, 3, 9]):
        base = gn_count_bruteforce(G, n, u, g).count
        assert base == gn_count_bruteforce(G, n, u, G.invert(g)).count
        x = random_element(P31, rng)
        xinv = G.invert(x)
        ux = G.multiply(G.multiply(xinv, u), x)
        gx = G.multiply(G.multiply(xinv, g), x)
        assert base == gn_count_bruteforce(G, n, ux, gx).count


def test_verdicts_invariant_under_table_relabeling():
    rng = random.Random(8)
    table = tf.random_group_table(rng)
    perm = list(range(len(table)))
    rng.shuffle(perm)
    T1 = validate_table(table)
    T2 = validate_table(tf.relabel(table, perm))
    v1 = check_fsz(T1)
    v2 = check_fsz(T2)
    assert [(v.n, v.verdict) for v in v1] == [(v.n, v.verdict) for v in v2]


def test_verification_error_is_raised_on_theorem_contradiction(monkeypatch):
    import fsz_forge.fszcheck as fz

    def fake_count(params, u, g, **kwargs):
        class Fake:
            count = 7
        return Fake()

    monkeypatch.setattr(fz, "gn_count_structured", fake_count)
    with pytest.raises(VerificationError, match="expected"):
        spj_witness(P51)
