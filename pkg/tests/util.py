"""Shared helpers for the test suite: random word generators and small oracles."""

from __future__ import annotations

import random

from foamkit.tangle import ARITY, Tangle, swap_options, validate_tangle


def random_valid_tangle(rng: random.Random, n_events: int, in_count: int | None = None,
                        kinds=("min", "max", "xo", "xu", "y", "lam")) -> Tangle:
    """Random valid Morse word built by forward sampling of legal events."""
    if in_count is None:
        in_count = rng.randrange(0, 5)
    levels = []
    n = in_count
    for _ in range(n_events):
        options = []
        for kind in kinds:
            a, b = ARITY[kind]
            if n >= a:
                options.extend((kind, p) for p in range(n - a + 1))
        if not options:
            break
        kind, pos = rng.choice(options)
        levels.append((kind, pos))
        a, b = ARITY[kind]
        n += b - a
    t = Tangle(in_count, tuple(levels))
    assert validate_tangle(t).ok
    return t


def random_legal_swaps(rng: random.Random, t: Tangle, n_swaps: int) -> Tangle:
    """Apply up to n_swaps random legal exchanges to t."""
    w = list(t.levels)
    for _ in range(n_swaps):
        choices = []
        for i in range(len(w) - 1):
            for case, lo, hi in swap_options(w[i], w[i + 1]):
                choices.append((i, lo, hi))
        if not choices:
            break
        i, lo, hi = rng.choice(choices)
        w[i], w[i + 1] = lo, hi
    t2 = Tangle(t.in_count, tuple(w))
    assert validate_tangle(t2).ok
    return t2


def random_closed_still(rng: random.Random, n_events: int) -> Tangle:
    """Random valid closed still: forward-sample, then cap off leftover strands."""
    t = random_valid_tangle(rng, n_events, in_count=0)
    levels = list(t.levels)
    n = t.out_count
    while n > 0:
        if n >= 2:
            levels.append(("max", rng.randrange(0, n - 1)))
            n -= 2
        else:
            # single leftover strand: merge it away is impossible; grow a cup partner
            levels.append(("min", rng.randrange(0, n + 1)))
            n += 2
    still = Tangle(0, tuple(levels))
    assert validate_tangle(still).ok and still.is_still()
    return still
