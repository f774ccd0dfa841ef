"""Word-by-word instruction parsing wired to an online motion pipeline.

Words stream into an incremental chart parser; completed parses are grounded
into goal poses and motion constraints, which feed a convex-corridor planner
and a fixed-rate receding-horizon controller steering a simulated
end-effector. Corrections arriving mid-motion replan without stopping.
"""

__version__ = "0.1.0"

from .categories import Category, parse_category
from .chart import Chart, ParseResult, batch_parse, best_parse, combine, feed_word
from .lexicon import Dictionary, LexEntry, load_grammar, load_shipped_grammar
from .semantics import Frame, Sym

__all__ = [
    "Category",
    "parse_category",
    "Chart",
    "ParseResult",
    "feed_word",
    "combine",
    "best_parse",
    "batch_parse",
    "Dictionary",
    "LexEntry",
    "load_grammar",
    "load_shipped_grammar",
    "Frame",
    "Sym",
]
