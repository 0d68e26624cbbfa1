import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from foamkit.tangle import (
    Tangle,
    TangleError,
    canonical_word,
    exchange_class,
    find_matches,
    normalize_heights,
    splice,
    strand_profile,
    validate_tangle,
)

from util import random_legal_swaps, random_valid_tangle

CIRCLE = Tangle(0, (("min", 0), ("max", 0)))


# -- validation ---------------------------------------------------------------

def test_validate_empty_tangle_ok():
    assert validate_tangle(Tangle(0)).ok


def test_validate_circle_ok():
    assert validate_tangle(CIRCLE).ok


def test_validate_arity_underflow_names_level():
    rep = validate_tangle(Tangle(0, (("max", 0),)))
    assert not rep.ok
    assert rep.violations[0][0] == 0


def test_validate_position_out_of_range():
    rep = validate_tangle(Tangle(1, (("xo", 1),)))
    assert not rep.ok


# -- strand profile -----------------------------------------------------------

def test_profile_circle():
    assert strand_profile(CIRCLE) == [0, 2, 0]


def test_profile_lam_y():
    assert strand_profile(Tangle(1, (("lam", 0), ("y", 0)))) == [1, 2, 1]


def test_profile_crossing():
    assert strand_profile(Tangle(2, (("xo", 0),))) == [2, 2]


def test_profile_rejects_invalid():
    with pytest.raises(TangleError):
        strand_profile(Tangle(0, (("y", 0),)))


def test_profile_nonnegative_and_out_count():
    rng = random.Random(7)
    for _ in range(50):
        t = random_valid_tangle(rng, 12)
        prof = strand_profile(t)
        assert all(n >= 0 for n in prof)
        assert prof[0] == t.in_count and prof[-1] == t.out_count


# -- normalize_heights --------------------------------------------------------

def test_normalize_sorts_independent_crossings():
    t = Tangle(4, (("xo", 2), ("xo", 0)))
    assert normalize_heights(t) == Tangle(4, (("xo", 0), ("xo", 2)))


def test_normalize_identity_case():
    t = Tangle(4, (("xo", 0), ("xo", 2)))
    assert normalize_heights(t) == t


def test_normalize_preserves_counts_and_kinds():
    rng = random.Random(1)
    for _ in range(60):
        t = random_valid_tangle(rng, 15)
        n = normalize_heights(t)
        assert validate_tangle(n).ok
        assert n.in_count == t.in_count and n.out_count == t.out_count
        assert Counter(k for k, _ in n.levels) == Counter(k for k, _ in t.levels)


def test_normalize_idempotent_random_words():
    rng = random.Random(2)
    for _ in range(60):
        t = random_valid_tangle(rng, 20)
        n = normalize_heights(t)
        assert normalize_heights(n) == n


def test_normalize_constant_on_exchange_class_exhaustive():
    # every presentation of a small word must normalize identically
    rng = random.Random(3)
    for _ in range(40):
        t = random_valid_tangle(rng, 6)
        canon = normalize_heights(t)
        for levels in exchange_class(t, limit=5000):
            assert normalize_heights(Tangle(t.in_count, levels)) == canon


@settings(max_examples=120, deadline=None)
@given(seed=st.integers(0, 10**9), n=st.integers(1, 20), swaps=st.integers(0, 25))
def test_normalize_stable_under_random_swaps(seed, n, swaps):
    rng = random.Random(seed)
    t = random_valid_tangle(rng, n)
    t2 = random_legal_swaps(rng, t, swaps)
    assert normalize_heights(t2) == normalize_heights(t)


# -- find_matches -------------------------------------------------------------

def test_matches_literal_subword_stack():
    host = Tangle(2, (("xo", 0), ("xo", 0), ("xo", 0)))
    pat = Tangle(2, (("xo", 0),))
    sites = [(m.site.level, m.site.offset) for m in find_matches(host, pat)]
    assert sites == [(0, 0), (1, 0), (2, 0)]
    assert all(m.plan == () for m in find_matches(host, pat))


def test_matches_with_gathering_swap():
    host = Tangle(4, (("xo", 0), ("xo", 2)))
    pat = Tangle(2, (("xo", 0),))
    sites = {(m.site.level, m.site.offset) for m in find_matches(host, pat)}
    assert {(0, 0), (1, 2), (0, 2)} <= sites


def test_matches_absent_pattern():
    host = Tangle(2, (("xo", 0), ("xo", 0)))
    assert find_matches(host, Tangle(2, (("y", 0),))) == []


def test_matches_empty_pattern_everywhere():
    pat = Tangle(1)
    ms = find_matches(CIRCLE, pat)
    sites = {(m.site.level, m.site.offset) for m in ms}
    # circle profile (0, 2, 0): one-strand patches exist only at the middle gap
    assert sites == {(1, 0), (1, 1)}


def test_match_gathered_contains_literal_pattern():
    rng = random.Random(5)
    for _ in range(40):
        host = random_valid_tangle(rng, 8)
        pat_len = rng.randrange(1, 3)
        start = rng.randrange(0, max(1, host.height - pat_len + 1))
        # carve a pattern out of the host itself so matches must exist
        sub = host.levels[start:start + pat_len]
        if not sub:
            continue
        shift = min(p for _, p in sub)
        prof = strand_profile(host)
        pin = prof[start] - shift
        if pin < 0:
            continue
        pat = Tangle(pin, tuple((k, p - shift) for k, p in sub))
        if not validate_tangle(pat).ok:
            continue
        ms = find_matches(host, pat)
        assert ms, f"no match for own subword {pat} in {host}"
        for m in ms:
            lv, off = m.site.level, m.site.offset
            got = m.gathered.levels[lv:lv + pat.height]
            assert got == tuple((k, p + off) for k, p in pat.levels)
            assert validate_tangle(m.gathered).ok
            assert normalize_heights(m.gathered) == normalize_heights(host)


def test_matches_complete_up_to_exchange_oracle():
    """Rewrite results through find_matches equal those over the whole exchange class."""
    rng = random.Random(11)
    crossings = ("xo", "xu")
    for trial in range(25):
        host = random_valid_tangle(rng, 5)
        pat = Tangle(2, ((rng.choice(crossings), 0),))
        repl = Tangle(2, ((rng.choice(crossings), 0), (rng.choice(crossings), 0)))
        via_engine = set()
        for m in find_matches(host, pat):
            out = splice(host, m, repl)
            via_engine.add(normalize_heights(out).key())
        via_brute = set()
        for levels in exchange_class(host, limit=20000):
            w = Tangle(host.in_count, levels)
            for lv in range(len(levels)):
                k, p = levels[lv]
                if (k, 0) == pat.levels[0] or (k, p) == (pat.levels[0][0], p):
                    if k != pat.levels[0][0]:
                        continue
                    off = p - pat.levels[0][1]
                    if off < 0:
                        continue
                    prof = strand_profile(w)
                    if off + pat.in_count > prof[lv]:
                        continue
                    new_levels = levels[:lv] + tuple((kk, pp + off) for kk, pp in repl.levels) + levels[lv + 1:]
                    cand = Tangle(host.in_count, new_levels)
                    if validate_tangle(cand).ok:
                        via_brute.add(normalize_heights(cand).key())
        assert via_engine == via_brute


# -- splice -------------------------------------------------------------------

def test_splice_delete_circle():
    ms = find_matches(CIRCLE, CIRCLE)
    out = splice(CIRCLE, ms[0], Tangle(0))
    assert out == Tangle(0)


def test_splice_cancel_crossing_pair():
    host = Tangle(2, (("xo", 0), ("xu", 0)))
    pat = Tangle(2, (("xo", 0), ("xu", 0)))
    ms = find_matches(host, pat)
    assert ms[0].site == ms[0].site.__class__(0, 0, 2)
    out = splice(host, ms[0], Tangle(2))
    assert out == Tangle(2)


def test_splice_boundary_arity_mismatch():
    ms = find_matches(CIRCLE, CIRCLE)
    with pytest.raises(TangleError):
        splice(CIRCLE, ms[0], Tangle(2))


def test_splice_stale_site():
    host = Tangle(2, (("xo", 0), ("xu", 0)))
    ms = find_matches(host, Tangle(2, (("xo", 0),)))
    other = Tangle(2, (("xu", 0), ("xo", 0)))
    with pytest.raises(TangleError):
        splice(other, ms[0], Tangle(2, (("xu", 0),)))


def test_splice_identity_preserves_normal_form():
    rng = random.Random(13)
    for _ in range(30):
        host = random_valid_tangle(rng, 7)
        if host.height == 0:
            continue
        k, p = host.levels[0]
        from foamkit.tangle import ARITY
        a, b = ARITY[k]
        pat = Tangle(a, ((k, 0),))
        for m in find_matches(host, pat):
            out = splice(host, m, pat)
            assert normalize_heights(out) == normalize_heights(host)
