"""Morse words for planar diagrams of trivalent graphs with a height function.

A tangle is a strand count at the bottom boundary plus an ordered list of
levels, each holding exactly one elementary event at a horizontal position.
Reading bottom to top, an event of arity ``a -> b`` consumes ``a`` adjacent
strands starting at its position and emits ``b`` in their place.

Two adjacent levels whose events act on disjoint strand intervals can be
exchanged without changing the diagram; tangles are compared and matched
modulo this exchange relation.  :func:`normalize_heights` computes a
canonical representative of the exchange class and :func:`find_matches`
locates a pattern inside a host up to exchange, returning the swap sequence
("gathering plan") that makes the pattern literally contiguous.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

# kind -> (inputs, outputs)
ARITY = {
    "min": (0, 2),
    "max": (2, 0),
    "xo": (2, 2),  # crossing, lower-left strand passes over
    "xu": (2, 2),  # crossing, lower-left strand passes under
    "y": (2, 1),   # merge vertex
    "lam": (1, 2), # split vertex
}

EVENT_KINDS = tuple(ARITY)

# used for canonical tie breaking; any fixed total order works
_KIND_RANK = {k: i for i, k in enumerate(("min", "max", "xo", "xu", "y", "lam"))}

CROSSING_KINDS = ("xo", "xu")
VERTEX_KINDS = ("y", "lam")


class TangleError(ValueError):
    """Raised on misuse of tangle operations (stale sites, arity mismatches)."""


@dataclass(frozen=True)
class Tangle:
    """A Morse word: bottom strand count plus (kind, position) levels."""

    in_count: int
    levels: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple((k, int(p)) for k, p in self.levels))

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def out_count(self) -> int:
        n = self.in_count
        for kind, _ in self.levels:
            a, b = ARITY[kind]
            n += b - a
        return n

    def is_still(self) -> bool:
        """Closed diagram: no boundary strands at either end."""
        return self.in_count == 0 and self.out_count == 0

    def key(self) -> bytes:
        payload = f"{self.in_count}|" + ";".join(f"{k}@{p}" for k, p in self.levels)
        return payload.encode()

    def digest(self) -> str:
        return hashlib.sha256(self.key()).hexdigest()[:16]

    def __str__(self):
        body = " ".join(f"{k}@{p}" for k, p in self.levels)
        return f"<tangle in={self.in_count} [{body}]>"


@dataclass(frozen=True)
class Site:
    """Location of a matched rectangle: level index, strands skipped on the left, bottom width."""

    level: int
    offset: int
    width: int


@dataclass(frozen=True)
class Match:
    """A pattern occurrence: site plus the exchange swaps that gather it.

    ``plan`` is a sequence of (level, case) adjacent swaps applied to the host
    in order; ``gathered`` caches the resulting word, which contains the
    pattern literally at ``site.level`` shifted right by ``site.offset``.
    """

    site: Site
    plan: tuple[tuple[int, str], ...]
    gathered: Tangle
    pattern: Tangle
    host_key: bytes = field(repr=False, default=b"")


@dataclass(frozen=True)
class Report:
    ok: bool
    violations: tuple[tuple[int, str], ...] = ()

    def __bool__(self):
        return self.ok

    def message(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"level {i}: {msg}" for i, msg in self.violations)


def validate_tangle(t: Tangle) -> Report:
    """Check the running strand count against every event's arity."""
    if t.in_count < 0:
        return Report(False, ((-1, "negative in_count"),))
    n = t.in_count
    for i, (kind, pos) in enumerate(t.levels):
        if kind not in ARITY:
            return Report(False, ((i, f"unknown event kind {kind!r}"),))
        a, b = ARITY[kind]
        if pos < 0:
            return Report(False, ((i, f"negative position {pos}"),))
        if pos + a > n:
            return Report(False, ((i, f"arity underflow: {kind}@{pos} needs {a} strands at {pos}, only {n} present"),))
        n += b - a
    return Report(True)


def strand_profile(t: Tangle) -> list[int]:
    """Strand count at every level boundary, bottom to top (length = height + 1)."""
    rep = validate_tangle(t)
    if not rep:
        raise TangleError(f"invalid tangle: {rep.message()}")
    out = [t.in_count]
    n = t.in_count
    for kind, _ in t.levels:
        a, b = ARITY[kind]
        n += b - a
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# exchange of distant events
# ---------------------------------------------------------------------------

def swap_options(lower: tuple[str, int], upper: tuple[str, int]) -> list[tuple[str, tuple[str, int], tuple[str, int]]]:
    """Legal exchanges of two adjacent events, as (case, new_lower, new_upper).

    Case "A": the upper event lies entirely right of the lower event's output
    block; case "B": entirely left of its input block.  Both apply only for
    the degenerate cap/cup pair at equal positions, which yields two distinct
    (and equally legal) exchanges.
    """
    (k1, p1), (k2, p2) = lower, upper
    a1, b1 = ARITY[k1]
    a2, b2 = ARITY[k2]
    out = []
    if p2 + a2 <= p1:
        out.append(("B", (k2, p2), (k1, p1 + b2 - a2)))
    if p2 >= p1 + b1:
        out.append(("A", (k2, p2 - b1 + a1), (k1, p1)))
    return out


def apply_swap(levels: list[tuple[str, int]], i: int, case: str) -> None:
    """Exchange levels i and i+1 in place using the given case."""
    for c, lo, hi in swap_options(levels[i], levels[i + 1]):
        if c == case:
            levels[i], levels[i + 1] = lo, hi
            return
    raise TangleError(f"illegal swap at level {i} (case {case})")


def _descents(levels: list[tuple[str, int]], j: int, floor: int) -> dict[int, tuple[int, list[tuple[int, str]]]]:
    """All positions event j can reach by bubbling down to each level >= floor.

    Returns {position: (level, swaps)} keeping, per final position, the
    deepest level reached and the swap sequence that realizes it.  Swaps are
    recorded against the *current* word and must be applied in order.
    """
    kind, pos = levels[j]
    # frontier: position -> swap list, for the event currently at level `lev`
    frontier: dict[int, list[tuple[int, str]]] = {pos: []}
    reached: dict[int, tuple[int, list[tuple[int, str]]]] = {pos: (j, [])}
    lev = j
    while lev > floor and frontier:
        below = levels[lev - 1]
        nxt: dict[int, list[tuple[int, str]]] = {}
        for p, swaps in frontier.items():
            for case, (k2, p2), _ in swap_options(below, (kind, p)):
                seq = swaps + [(lev - 1, case)]
                if p2 not in nxt or len(nxt[p2]) > len(seq):
                    nxt[p2] = seq
        lev -= 1
        frontier = nxt
        for p, swaps in frontier.items():
            cur = reached.get(p)
            if cur is None or lev < cur[0]:
                reached[p] = (lev, swaps)
    return reached


def _bubble_to(levels: list[tuple[str, int]], j: int, target: int,
               want_pos: int | None = None) -> list[tuple[int, str]] | None:
    """Swap sequence placing event j at level ``target`` (optionally at a position)."""
    kind, pos = levels[j]
    frontier: dict[int, list[tuple[int, str]]] = {pos: []}
    for lev in range(j, target, -1):
        below = levels[lev - 1]
        nxt: dict[int, list[tuple[int, str]]] = {}
        for p, swaps in frontier.items():
            for case, (k2, p2), _ in swap_options(below, (kind, p)):
                seq = swaps + [(lev - 1, case)]
                if p2 not in nxt:
                    nxt[p2] = seq
        frontier = nxt
        if not frontier:
            return None
    if want_pos is None:
        if not frontier:
            return None
        p = min(frontier)
        return frontier[p]
    return frontier.get(want_pos)


def _run_swaps(levels: list[tuple[str, int]], swaps: list[tuple[int, str]]) -> None:
    for i, case in swaps:
        apply_swap(levels, i, case)


# ---------------------------------------------------------------------------
# structural analysis: wiring, components, planar regions
# ---------------------------------------------------------------------------

class _UF:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            p = self.parent[x] = self.find(p)
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def component_owners(t: Tangle) -> tuple[list[int], set[int]]:
    """Component id per level, plus the ids of boundary-anchored components.

    Two events are in the same component when connected through strands; a
    component is anchored when one of its strands reaches the bottom or top
    boundary of the tangle.
    """
    uf = _UF()
    segs = [("in", i) for i in range(t.in_count)]
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        node = ("ev", lev)
        for s in segs[pos:pos + a]:
            uf.union(node, s)
        new = [("seg", lev, k) for k in range(b)]
        for s in new:
            uf.union(node, s)
        segs[pos:pos + a] = new
    for s in segs:
        uf.union(s, ("out",))
    roots: dict = {}
    owner = []
    for lev in range(t.height):
        r = uf.find(("ev", lev))
        owner.append(roots.setdefault(r, len(roots)))
    anchored = set()
    anchor_roots = {uf.find(("in", i)) for i in range(t.in_count)}
    anchor_roots.add(uf.find(("out",)))
    for lev in range(t.height):
        if uf.find(("ev", lev)) in anchor_roots:
            anchored.add(owner[lev])
    return owner, anchored


def region_structure(t: Tangle) -> tuple[_UF, dict]:
    """Planar regions of the diagram as a union-find over (boundary, gap) nodes.

    Returns the union-find plus a map from invariant region tags to nodes.
    Tags name a region by an incidence: ("in", g) / ("out", g) for boundary
    gaps, ("ev", level, side) for the gaps flanking an event.  Crossing
    quadrants are kept separate (floating pieces cannot pass any strand).
    """
    uf = _UF()
    prof = strand_profile(t)
    tags: dict = {}
    for g in range(t.in_count + 1):
        tags[("in", g)] = (0, g)
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        n = prof[lev]
        for g in range(n + 1):
            if g <= pos:
                uf.union((lev, g), (lev + 1, g))
            if g >= pos + a:
                uf.union((lev, g), (lev + 1, g - a + b))
        tags[("ev", lev, "bl")] = (lev, pos)
        tags[("ev", lev, "br")] = (lev, pos + a)
        tags[("ev", lev, "al")] = (lev + 1, pos)
        tags[("ev", lev, "ar")] = (lev + 1, pos + b)
        for k in range(1, a):
            tags[("ev", lev, ("bi", k))] = (lev, pos + k)
        for k in range(1, b):
            tags[("ev", lev, ("ai", k))] = (lev + 1, pos + k)
    for g in range(t.out_count + 1):
        tags[("out", g)] = (t.height, g)
    return uf, tags


# ---------------------------------------------------------------------------
# canonical form via the plane model
# ---------------------------------------------------------------------------
#
# The exchange class of a word is determined by its plane model: the event
# occurrences with their strand wiring plus the planar region each event side
# faces.  Exchanges never rewire strands or move material across a strand, so
# the model is invariant; conversely the layout below rebuilds a word from
# the model alone, which makes the result class-canonical.

def _plane_model(t: Tangle):
    """(inputs, above, below, in_gaps, out_wiring) of the word.

    ``inputs[lev]``: strand ids consumed by the event (a strand id is
    ("in", i) or (producing level, out-port)).  ``above[lev]``: the b+1
    region roots over the event, left to right.  ``below[lev]``: the region
    root under the event (the gap a cup must be laid into).  ``in_gaps``:
    region roots of the bottom boundary gaps.  ``out_wiring``: strand ids at
    the top boundary.
    """
    uf, tags = region_structure(t)
    cur: list = [("in", i) for i in range(t.in_count)]
    inputs = []
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        inputs.append(tuple(cur[pos:pos + a]))
        cur[pos:pos + a] = [(lev, k) for k in range(b)]
    out_wiring = tuple(cur)
    above = []
    below = []
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        gaps = [uf.find(tags[("ev", lev, "al")])]
        if b > 0:
            for k in range(1, b):
                gaps.append(uf.find(tags[("ev", lev, ("ai", k))]))
            gaps.append(uf.find(tags[("ev", lev, "ar")]))
        above.append(tuple(gaps))
        below.append(uf.find(tags[("ev", lev, "bl")]))
    in_gaps = tuple(uf.find((0, g)) for g in range(t.in_count + 1))
    return inputs, above, below, in_gaps, out_wiring


def _word_key(levels) -> tuple:
    return tuple((p, _KIND_RANK[k]) for k, p in levels)


def _wl_colors(t: Tangle, inputs, above, below, in_gaps, out_wiring) -> list[tuple]:
    """Invariant fingerprint per event occurrence by color refinement.

    Nodes are events, strands, and regions; incidences carry port and side
    labels; boundary strands and gaps are pinned by their positions.  Colors
    are interned by sorted order each round, so equal fingerprints across
    presentations of one diagram mean structurally interchangeable events.
    """
    uf, tags = region_structure(t)
    edges: dict = {}

    def add(x, label, y):
        edges.setdefault(x, []).append((label, y))
        edges.setdefault(y, []).append((("rev", label), x))

    color: dict = {}
    for i in range(t.in_count):
        color[("in", i)] = ("in-strand", i)
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        ev = ("ev!", lev)
        color[ev] = ("event", kind)
        for k, s in enumerate(inputs[lev]):
            add(ev, ("i", k), s)
        for k in range(b):
            s = (lev, k)
            color.setdefault(s, ("strand",))
            add(ev, ("o", k), s)
        for tag, node in (("bl", (lev, pos)), ("br", (lev, pos + a)),
                          ("al", (lev + 1, pos)), ("ar", (lev + 1, pos + b))):
            add(ev, ("r", tag), ("reg", uf.find(node)))
        for k in range(1, a):
            add(ev, ("r", ("bi", k)), ("reg", uf.find((lev, pos + k))))
        for k in range(1, b):
            add(ev, ("r", ("ai", k)), ("reg", uf.find((lev + 1, pos + k))))
    for g, r in enumerate(in_gaps):
        node = ("reg", r)
        color[node] = ("in-gap", g) if node not in color else color[node]
    for g in range(t.out_count + 1):
        node = ("reg", uf.find((t.height, g)))
        add(node, ("out-gap", g), node)
    for i, s in enumerate(out_wiring):
        add(s, ("out-strand", i), s)
    for node in edges:
        color.setdefault(node, ("reg?",) if node[0] == "reg" else ("strand",))
    for node in color:
        edges.setdefault(node, [])

    nodes = sorted(color, key=repr)
    for _ in range(len(nodes) + 2):
        sig = {v: (color[v], tuple(sorted(((repr(l), color[u]) for l, u in edges[v]), key=repr)))
               for v in nodes}
        palette = {s: i for i, s in enumerate(sorted(set(sig.values()), key=repr))}
        newcol = {v: (palette[sig[v]],) for v in nodes}
        if len(set(newcol.values())) == len(set(color.values())):
            color = newcol
            break
        color = newcol
    return [color[("ev!", lev)] for lev in range(t.height)]


def subword(t: Tangle, owner: list[int], keep: set[int], keep_boundary: bool = True) -> Tangle:
    """Restriction of the word to the kept components, positions re-indexed.

    ``keep_boundary`` must be True exactly when the kept components include
    every boundary-anchored one (the base), and False when extracting closed
    components (whose words have empty boundaries).
    """
    strands_kept: list[bool] = [keep_boundary] * t.in_count
    out_levels = []
    for lev, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        if owner[lev] in keep:
            newpos = sum(1 for f in strands_kept[:pos] if f)
            out_levels.append((kind, newpos))
            flag = True
        else:
            flag = False
        strands_kept[pos:pos + a] = [flag] * b
    return Tangle(t.in_count if keep_boundary else 0, tuple(out_levels))


def _slot_in_subword(t: Tangle, owner: list[int], keep: set[int], lev: int,
                     keep_boundary: bool = True) -> tuple[int, int]:
    """(level, gap) where the event at ``lev`` would insert into the kept subword."""
    strands_kept: list[bool] = [keep_boundary] * t.in_count
    sub_lev = 0
    for i, (kind, pos) in enumerate(t.levels):
        a, b = ARITY[kind]
        if i == lev:
            gap = sum(1 for f in strands_kept[:pos] if f)
            return sub_lev, gap
        if owner[i] in keep:
            sub_lev += 1
            flag = True
        else:
            flag = False
        strands_kept[pos:pos + a] = [flag] * b
    raise TangleError("level out of range")


def _bubble_inside(t: Tangle, owner, host_comp: int, guest_comp: int) -> bool:
    """Whether the guest component floats inside a bounded region of the host."""
    first = min(l for l in range(t.height) if owner[l] == guest_comp)
    slot = _slot_in_subword(t, owner, {host_comp}, first, keep_boundary=False)
    host_word = subword(t, owner, {host_comp}, keep_boundary=False)
    uf, _ = region_structure(host_word)
    return uf.find(slot) != uf.find((0, 0))


def _fold_side_by_side(blocks: list[Tangle]) -> Tangle:
    """Combine closed blocks so all coexist at one level, left to right."""
    acc = blocks[0]
    for b in blocks[1:]:
        prof = strand_profile(acc)
        widest = max(range(len(prof)), key=lambda i: (prof[i], -i))
        shifted = tuple((k, p + prof[widest]) for k, p in b.levels)
        acc = Tangle(acc.in_count, acc.levels[:widest] + shifted + acc.levels[widest:])
    return acc


_CANON_CACHE: dict[tuple[int, tuple], Tangle] = {}


def canonical_word(t: Tangle) -> Tangle:
    """Unique representative of the exchange class of ``t``.

    Closed floating components are split off, canonicalized recursively, and
    re-fired as atomic blocks into their host regions; the anchored remainder
    is laid out from its plane model by a lexicographic search, emitting at
    each step the least fireable (position, kind, fingerprint) event.  A
    positive-arity event is fireable when its input strands sit adjacent and
    in order on the frontier; a cup is fireable at any frontier gap of its
    region.  Dead ends backtrack; the first completion in key order wins.
    """
    ck = (t.in_count, t.levels)
    hit = _CANON_CACHE.get(ck)
    if hit is not None:
        return hit
    rep = validate_tangle(t)
    if not rep:
        raise TangleError(f"invalid tangle: {rep.message()}")

    owner, anchored = component_owners(t)
    closed = sorted(set(owner) - anchored)
    if not closed:
        result = _layout(t, [])
    else:
        top = [k for k in closed
               if not any(m != k and _bubble_inside(t, owner, m, k) for m in closed)]
        if anchored or len(top) > 1:
            base_keep, kb = set(anchored), True
            floats = top
        else:
            # the whole word is one closed component tree: its solid part is
            # the base and its direct children float inside it
            k = top[0]
            base_keep, kb = {k}, False
            floats = [c for c in closed if c != k
                      and not any(m not in (k, c) and _bubble_inside(t, owner, m, c)
                                  for m in closed)]
        blocks = []
        for f in floats:
            inside = {f} | {c for c in closed
                            if c != f and _bubble_inside(t, owner, f, c)}
            bw = canonical_word(subword(t, owner, inside, keep_boundary=False))
            first = min(l for l in range(t.height) if owner[l] == f)
            slot = _slot_in_subword(t, owner, base_keep, first, keep_boundary=kb)
            blocks.append((slot, bw))
        base = subword(t, owner, base_keep, keep_boundary=kb)
        result = _layout(base, blocks)

    rep = validate_tangle(result)
    if not rep:
        raise TangleError(f"internal: canonical word invalid: {rep.message()}")
    if len(_CANON_CACHE) > 200000:
        _CANON_CACHE.clear()
    _CANON_CACHE[ck] = result
    return result


def _layout(t: Tangle, placed_blocks: list[tuple[tuple[int, int], Tangle]]) -> Tangle:
    """Lexicographic layout of a word with no closed components, plus blocks.

    Each block is a closed canonical word attached to the host region found
    at the given (level, gap) slot of ``t``; blocks fire atomically into any
    frontier gap of that region and never change the frontier.  Consecutive
    blocks fired into the same gap are folded side by side.
    """
    model = _plane_model(t)
    inputs, above, below, in_gaps, out_wiring = model
    colors = _wl_colors(t, *model)
    kinds = [k for k, _ in t.levels]
    arities = [ARITY[k] for k in kinds]
    n_events = t.height

    # precedence: strand producers before consumers; a bounded region's
    # bottom-tip event before everything incident to the region, which in
    # turn precedes its top-tip event (regions must be open while used)
    preds: list[set[int]] = [set() for _ in range(n_events)]
    for lev in range(n_events):
        for s in inputs[lev]:
            if s[0] != "in":
                preds[lev].add(s[0])
    uf, tags = region_structure(t)
    incident: dict = {}
    open_below = set()
    open_above = set()
    for tag, node in tags.items():
        root = uf.find(node)
        if tag[0] == "in":
            open_below.add(root)
        elif tag[0] == "out":
            open_above.add(root)
        else:
            incident.setdefault(root, set()).add(tag[1])
    for root, evs in incident.items():
        if len(evs) < 2:
            continue
        if root not in open_below:
            lo = min(evs)
            for e in evs:
                if e != lo:
                    preds[e].add(lo)
        if root not in open_above:
            hi = max(evs)
            for e in evs:
                if e != hi:
                    preds[hi].add(e)
    pred_mask = [0] * n_events
    for lev in range(n_events):
        m = 0
        for p in preds[lev]:
            if p != lev:
                m |= 1 << p
        pred_mask[lev] = m

    block_roots = [uf.find(slot) for slot, _bw in placed_blocks]
    block_words = [bw for _slot, bw in placed_blocks]
    n_blocks = len(block_words)
    total = n_events + n_blocks

    # consumer of every strand id, for cup placement affinity
    consumer: dict = {}
    for lev in range(n_events):
        for k, s in enumerate(inputs[lev]):
            consumer[s] = (lev, k)

    def cup_penalty(lev: int, g: int, frontier: tuple) -> int:
        """Distance from the gap where the cup's consumers want it."""
        best = None
        for k in range(2):
            c = consumer.get((lev, k))
            if c is None:
                continue
            cev, ci = c
            for side, ni in ((-1, ci - 1), (1, ci + 1)):
                if 0 <= ni < len(inputs[cev]):
                    s = inputs[cev][ni]
                    if s[0] == "in" or s[:1] != (lev,):
                        try:
                            q = frontier.index(s)
                        except ValueError:
                            continue
                        ideal = (q + 1 - k) if side == -1 else (q - 1 - k)
                        d = abs(g - ideal)
                        if best is None or d < best:
                            best = d
        return best if best is not None else g

    failed: set = set()
    final_pos = {s: i for i, s in enumerate(out_wiring)}

    def out_order_ok(frontier: tuple) -> bool:
        # strands already in final form never cross each other again
        last = -1
        for s in frontier:
            i = final_pos.get(s)
            if i is not None:
                if i < last:
                    return False
                last = i
        return True

    def dfs(frontier: tuple, gaps: tuple, fired_mask: int, blocks_mask: int, depth: int):
        if depth == total:
            return [] if frontier == out_wiring else None
        key = (frontier, gaps, fired_mask, blocks_mask)
        if key in failed:
            return None
        cands = []
        for lev in range(n_events):
            if fired_mask >> lev & 1 or (pred_mask[lev] & fired_mask) != pred_mask[lev]:
                continue
            a, _b = arities[lev]
            if a == 0:
                r = below[lev]
                for g, rg in enumerate(gaps):
                    if rg == r:
                        cands.append((cup_penalty(lev, g, frontier), g,
                                      _KIND_RANK[kinds[lev]], 0, colors[lev], lev))
            else:
                first = inputs[lev][0]
                try:
                    p = frontier.index(first)
                except ValueError:
                    continue
                if frontier[p:p + a] == inputs[lev]:
                    cands.append((0, p, _KIND_RANK[kinds[lev]], 0, colors[lev], lev))
        for i in range(n_blocks):
            if blocks_mask >> i & 1:
                continue
            bw = block_words[i]
            rank = _KIND_RANK[bw.levels[0][0]] if bw.levels else 0
            for g, rg in enumerate(gaps):
                if rg == block_roots[i]:
                    cands.append((0, g, rank, 1, _word_key(bw.levels), i))
        for _pen, p, _rank, is_block, _col, idx in sorted(cands):
            if is_block:
                sub = dfs(frontier, gaps, fired_mask, blocks_mask | (1 << idx), depth + 1)
                if sub is not None:
                    return [("block", idx, p)] + sub
            else:
                a, b = arities[idx]
                nf = frontier[:p] + tuple((idx, k) for k in range(b)) + frontier[p + a:]
                ng = gaps[:p] + above[idx] + gaps[p + a + 1:]
                sub = dfs(nf, ng, fired_mask | (1 << idx), blocks_mask, depth + 1)
                if sub is not None:
                    return [(kinds[idx], p)] + sub
        failed.add(key)
        return None

    frontier0 = tuple(("in", i) for i in range(t.in_count))
    out = dfs(frontier0, in_gaps, 0, 0, 0)
    if out is None:
        raise TangleError("internal: plane layout failed")

    # assemble: block markers expand to their words; consecutive blocks fired
    # into the same gap are folded to coexist side by side
    levels: list[tuple[str, int]] = []
    run: list[Tangle] = []
    run_gap = -1

    def flush():
        nonlocal run, run_gap
        if run:
            folded = _fold_side_by_side(run)
            levels.extend((k, p + run_gap) for k, p in folded.levels)
            run, run_gap = [], -1

    for entry in out:
        if entry[0] == "block":
            _tag, idx, g = entry
            if run and g != run_gap:
                flush()
            run.append(block_words[idx])
            run_gap = g
        else:
            flush()
            levels.append(entry)
    flush()
    return Tangle(t.in_count, tuple(levels))


def normalize_heights(t: Tangle) -> Tangle:
    """Unique representative of ``t`` modulo exchange of distant events."""
    return canonical_word(t)


def exchange_class(t: Tangle, limit: int = 100000) -> set[tuple]:
    """Every presentation reachable by legal exchanges (short words only; test oracle)."""
    seen = {t.levels}
    stack = [list(t.levels)]
    while stack:
        w = stack.pop()
        for i in range(len(w) - 1):
            for case, lo, hi in swap_options(w[i], w[i + 1]):
                w2 = list(w)
                w2[i], w2[i + 1] = lo, hi
                tw2 = tuple(w2)
                if tw2 not in seen:
                    if len(seen) >= limit:
                        raise TangleError("exchange class too large")
                    seen.add(tw2)
                    stack.append(w2)
    return seen


# ---------------------------------------------------------------------------
# matching and splicing
# ---------------------------------------------------------------------------

_INVERSE_CASE = {"A": "B", "B": "A"}


def _pattern_presentations(pattern: Tangle) -> list[tuple[tuple[tuple[str, int], ...], list[tuple[int, str]]]]:
    """All exchange presentations of the pattern with swaps back to the original.

    Returns (word, undo) pairs where applying ``undo`` to the presented word
    restores the pattern's literal level list.  The inverse of a single case-A
    swap is the case-B swap at the same level and vice versa.
    """
    origin = pattern.levels
    out = [(origin, [])]
    seen = {origin}
    queue = [(list(origin), [])]  # (word, swaps from origin to word)
    while queue:
        w, path = queue.pop()
        for i in range(len(w) - 1):
            for case, lo, hi in swap_options(w[i], w[i + 1]):
                w2 = list(w)
                w2[i], w2[i + 1] = lo, hi
                tw2 = tuple(w2)
                if tw2 in seen:
                    continue
                seen.add(tw2)
                fwd = path + [(i, case)]
                undo = [(k, _INVERSE_CASE[c]) for k, c in reversed(fwd)]
                out.append((tw2, undo))
                queue.append((list(tw2), fwd))
    return out


def _profile_of(levels: list[tuple[str, int]], in_count: int) -> list[int]:
    out = [in_count]
    n = in_count
    for kind, _ in levels:
        a, b = ARITY[kind]
        n += b - a
        out.append(n)
    return out


def find_matches(host: Tangle, pattern: Tangle) -> list[Match]:
    """Every site where the pattern occurs in the host up to exchange.

    Matching is performed against the canonical presentation of the host;
    each match's plan is a swap sequence on that presentation gathering the
    pattern's literal level list contiguously at the reported level, shifted
    right by the reported offset.  Sites are deduped and ordered by
    (level, offset).
    """
    for t, name in ((host, "host"), (pattern, "pattern")):
        rep = validate_tangle(t)
        if not rep:
            raise TangleError(f"invalid {name}: {rep.message()}")
    canon = canonical_word(host)
    m = pattern.height
    found: dict[tuple[int, int], Match] = {}

    if m == 0:
        prof = strand_profile(canon)
        for level in range(canon.height + 1):
            for offset in range(prof[level] - pattern.in_count + 1):
                key = (level, offset)
                found[key] = Match(Site(level, offset, pattern.in_count), (), canon,
                                   pattern, host.key())
        return [found[k] for k in sorted(found)]

    for pword, undo in sorted(_pattern_presentations(pattern), key=lambda x: x[0]):
        _scan_presentation(canon, pattern, pword, undo, (), host.key(), found)
    return [found[k] for k in sorted(found)]


def _scan_presentation(canon: Tangle, pattern: Tangle, pword, undo, trace0, hkey,
                       found: dict[tuple[int, int], Match]) -> None:
    m = len(pword)

    def recurse(work: list[tuple[str, int]], plan: list[tuple[int, str]],
                slot: int, base: int, offset: int) -> None:
        if slot == m:
            prof = _profile_of(work, canon.in_count)
            if offset + pattern.in_count > prof[base]:
                return
            key = (base, offset)
            if key in found:
                return
            full_plan = list(plan)
            gathered = list(work)
            for i, case in [(i + base, c) for i, c in undo]:
                apply_swap(gathered, i, case)
                full_plan.append((i, case))
            site = Site(base, offset, pattern.in_count)
            found[key] = Match(site, tuple(trace0) + tuple(full_plan),
                               Tangle(canon.in_count, tuple(gathered)), pattern, hkey)
            return
        kind_want, pos_want = pword[slot]
        lo = base + slot
        for j in range(lo, len(work)):
            if work[j][0] != kind_want:
                continue
            if slot == 0:
                # any landing level from j down to 0, any reachable position
                reach_all = _descents(work, j, 0)
                for p, (lev_reached, _) in sorted(reach_all.items()):
                    off = p - pos_want
                    if off < 0:
                        continue
                    for target in range(lev_reached, j + 1):
                        seq = _bubble_to(work, j, target, want_pos=p)
                        if seq is None:
                            continue
                        w2 = list(work)
                        _run_swaps(w2, seq)
                        recurse(w2, plan + seq, 1, target, off)
            else:
                seq = _bubble_to(work, j, lo, want_pos=pos_want + offset)
                if seq is None:
                    continue
                w2 = list(work)
                _run_swaps(w2, seq)
                recurse(w2, plan + seq, slot + 1, base, offset)

    recurse(list(canon.levels), [], 0, 0, 0)


def splice(host: Tangle, match: Match, replacement: Tangle) -> Tangle:
    """Replace the gathered pattern rectangle with an equal-boundary tangle."""
    if match.host_key and match.host_key != host.key():
        raise TangleError("stale site: host changed since matching")
    if replacement.in_count != match.pattern.in_count or replacement.out_count != match.pattern.out_count:
        raise TangleError(
            f"boundary arity mismatch: pattern {match.pattern.in_count}->{match.pattern.out_count}, "
            f"replacement {replacement.in_count}->{replacement.out_count}")
    rep = validate_tangle(replacement)
    if not rep:
        raise TangleError(f"invalid replacement: {rep.message()}")
    W = match.gathered
    lv, off, m = match.site.level, match.site.offset, match.pattern.height
    block = W.levels[lv:lv + m]
    expect = tuple((k, p + off) for k, p in match.pattern.levels)
    if block != expect:
        raise TangleError("stale site: gathered host does not carry the pattern")
    new_levels = W.levels[:lv] + tuple((k, p + off) for k, p in replacement.levels) + W.levels[lv + m:]
    out = Tangle(W.in_count, new_levels)
    rep = validate_tangle(out)
    if not rep:
        raise TangleError(f"splice produced invalid tangle: {rep.message()}")
    return out
