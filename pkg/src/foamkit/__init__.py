"""foamkit: a rewriting engine for diagrams of knotted trivalent graphs and knotted 2-foams."""

from .tangle import (
    ARITY,
    EVENT_KINDS,
    Match,
    Site,
    Tangle,
    TangleError,
    canonical_word,
    find_matches,
    normalize_heights,
    splice,
    strand_profile,
    validate_tangle,
)

__version__ = "0.1.0"
