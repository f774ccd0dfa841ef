"""Incremental chart parsing over a CYK-style upper-triangular table.

Words are fed one at a time; each feed adds a column and combines every
span that ends at the new index, so earlier structure is reused and never
discarded. ``batch_parse`` builds the same chart with the full span loop in
one shot and serves as the equivalence oracle for the incremental path.

Two combinators apply: forward application (``X/Y  Y -> X``) and backward
application (``Y  X\\Y -> X``). Semantic composition rides along via
template application, so every internal node's meaning is recomputable
from its children.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .categories import Category
from .lexicon import Dictionary, normalize_token
from .semantics import (
    SITE_OBJECT,
    Frame,
    Semantics,
    Template,
    collect_referents,
    render_semantics,
)

if TYPE_CHECKING:  # pragma: no cover
    from .world import WorldSnapshot

SUBMITTABLE_SYMBOLS = ("S", "VP")

NO_PARSE = "no_parse"
PARTIAL = "partial"
COMPLETE = "complete"


@dataclass(frozen=True)
class ChartNode:
    span: tuple[int, int]
    category: Category
    semantics: Semantics
    children: tuple["ChartNode", "ChartNode"] | None = None
    order: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def signature(self) -> tuple:
        return (self.span, str(self.category), render_key(self.semantics))

    def render_semantics(self) -> str:
        return render_semantics(self.semantics)


def render_key(sem: Semantics) -> tuple:
    # string form alone cannot distinguish attachment sites
    if isinstance(sem, Frame):
        return ("frame", sem)
    if isinstance(sem, Template):
        return ("template", sem.source, sem.bound)
    return ("sym", sem)


@dataclass(frozen=True)
class ParseResult:
    status: str
    best: Optional[ChartNode]
    alternatives: tuple[ChartNode, ...]
    version: int


@dataclass
class Chart:
    cells: dict[tuple[int, int], list[ChartNode]] = field(default_factory=dict)
    tokens: list[str] = field(default_factory=list)
    n: int = 0
    version: int = 0
    combine_attempts: int = 0
    display_labels: dict[Category, str] = field(default_factory=dict)
    _order_counter: int = 0

    def cell(self, j: int, k: int) -> list[ChartNode]:
        return self.cells.get((j, k), [])

    def final_cell(self) -> list[ChartNode]:
        if self.n == 0:
            return []
        return self.cell(0, self.n - 1)

    def signatures(self) -> set[tuple]:
        return {node.signature() for nodes in self.cells.values() for node in nodes}

    def _next_order(self) -> int:
        self._order_counter += 1
        return self._order_counter


def combine(left: ChartNode, right: ChartNode) -> Optional[ChartNode]:
    """Merge two adjacent nodes if a combinator applies, else None."""
    if left.span[1] + 1 != right.span[0]:
        return None
    lc, rc = left.category, right.category
    if not lc.is_atomic and lc.direction == "/" and lc.argument == rc:
        semantics = _apply(left.semantics, right.semantics)
        if semantics is None:
            return None
        return ChartNode(
            span=(left.span[0], right.span[1]),
            category=lc.result,
            semantics=semantics,
            children=(left, right),
        )
    if not rc.is_atomic and rc.direction == "\\" and rc.argument == lc:
        semantics = _apply(right.semantics, left.semantics)
        if semantics is None:
            return None
        return ChartNode(
            span=(left.span[0], right.span[1]),
            category=rc.result,
            semantics=semantics,
            children=(left, right),
        )
    return None


def _apply(fn: Semantics, arg: Semantics) -> Optional[Semantics]:
    # arguments must be saturated meanings; function side must still want one
    if not isinstance(fn, Template) or isinstance(arg, Template):
        return None
    return fn.apply(arg)


def feed_word(chart: Chart, word: str, dictionary: Dictionary) -> ParseResult:
    """Append one token, expand the chart, and report the current parse.

    Unknown words consume an index but contribute no lexical node, keeping
    the chart aligned with the token stream.
    """
    chart.version += 1
    i = chart.n
    chart.tokens.append(word)
    chart.n += 1
    chart.display_labels = dictionary.display_labels
    _insert_lexical(chart, i, dictionary)
    _combine_column(chart, i)
    return current_result(chart)


def _insert_lexical(chart: Chart, i: int, dictionary: Dictionary) -> None:
    cell = chart.cells.setdefault((i, i), [])
    for entry in dictionary.lookup(normalize_token(chart.tokens[i])):
        node = ChartNode((i, i), entry.category, entry.instantiate())
        _add_node(chart, cell, node)


def _combine_column(chart: Chart, k: int) -> None:
    # spans ending at k only; shorter right parts (m+1, k) are filled first
    for j in range(k - 1, -1, -1):
        target = chart.cells.setdefault((j, k), [])
        for m in range(j, k):
            for left in chart.cell(j, m):
                for right in chart.cell(m + 1, k):
                    chart.combine_attempts += 1
                    node = combine(left, right)
                    if node is not None:
                        _add_node(chart, target, node)


def _add_node(chart: Chart, cell: list[ChartNode], node: ChartNode) -> None:
    key = (str(node.category), render_key(node.semantics))
    for existing in cell:
        if (str(existing.category), render_key(existing.semantics)) == key:
            return
    cell.append(dataclasses.replace(node, order=chart._next_order()))


def batch_parse(tokens: list[str], dictionary: Dictionary) -> Chart:
    """One-shot parse with the full bottom-up span loop (oracle path)."""
    chart = Chart()
    chart.display_labels = dictionary.display_labels
    for word in tokens:
        chart.version += 1
        chart.tokens.append(word)
        chart.n += 1
        _insert_lexical(chart, chart.n - 1, dictionary)
    n = chart.n
    for s in range(2, n + 1):
        for j in range(0, n - s + 1):
            k = j + s - 1
            target = chart.cells.setdefault((j, k), [])
            for m in range(j, k):
                for left in chart.cell(j, m):
                    for right in chart.cell(m + 1, k):
                        chart.combine_attempts += 1
                        node = combine(left, right)
                        if node is not None:
                            _add_node(chart, target, node)
    return chart


def is_submittable(node: ChartNode) -> bool:
    """Complete imperative clause: spanning S or VP with saturated semantics."""
    return (
        node.category.is_atomic
        and node.category.symbol in SUBMITTABLE_SYMBOLS
        and isinstance(node.semantics, Frame)
    )


def current_result(chart: Chart) -> ParseResult:
    if chart.n == 0:
        return ParseResult(NO_PARSE, None, (), chart.version)
    final = chart.final_cell()
    submittable = [n for n in final if is_submittable(n)]
    if not submittable:
        return ParseResult(PARTIAL, None, tuple(final), chart.version)
    best = min(submittable, key=_preference_key)
    return ParseResult(COMPLETE, best, tuple(final), chart.version)


def _preference_key(node: ChartNode) -> tuple:
    sem = node.semantics
    object_attached = isinstance(sem, Frame) and any(
        site == SITE_OBJECT for site, _ in sem.mods
    )
    return (1 if object_attached else 0, node.order)


def best_parse(result: ParseResult, context: "WorldSnapshot | None" = None) -> Optional[ChartNode]:
    """Deterministic selection among final-cell parses.

    Parses whose referents cannot be grounded in ``context`` are discarded;
    ties prefer action attachment over object attachment, then the earliest
    constructed node.
    """
    if result.status != COMPLETE:
        return None
    candidates = [n for n in result.alternatives if is_submittable(n)]
    if context is not None:
        grounded = [n for n in candidates if _referents_resolve(n, context)]
        if grounded:
            candidates = grounded
        else:
            return None
    if not candidates:
        return None
    return min(candidates, key=_preference_key)


def _referents_resolve(node: ChartNode, context: "WorldSnapshot") -> bool:
    for name, attributes in collect_referents(node.semantics):
        if not context.find_objects(name, attributes):
            return False
    return True


def reset(chart: Chart) -> Chart:
    """Empty the chart for a new utterance; the version counter survives."""
    chart.cells.clear()
    chart.tokens.clear()
    chart.n = 0
    chart.combine_attempts = 0
    return chart


# --- debug dump -------------------------------------------------------------

def dump(chart: Chart) -> str:
    """Upper-triangular text rendering of the chart, one row per start index."""
    n = chart.n
    if n == 0:
        return "(empty chart)\n"
    best = current_result(chart).best
    grid = {}
    for j in range(n):
        for k in range(j, n):
            grid[(j, k)] = _cell_text(chart, j, k, best)
    widths = [max(3, max(len(grid[(j, k)]) for j in range(k + 1))) for k in range(n)]
    header = "idx | " + " | ".join(str(k).center(widths[k]) for k in range(n))
    lines = [header, "-" * len(header)]
    for j in range(n):
        row = []
        for k in range(n):
            text = grid[(j, k)] if k >= j else ""
            row.append(text.ljust(widths[k]))
        lines.append(f"{j:3d} | " + " | ".join(row))
    return "\n".join(lines) + "\n"


def _cell_text(chart: Chart, j: int, k: int, best: Optional[ChartNode]) -> str:
    if j == k:
        return chart.tokens[j]
    nodes = chart.cell(j, k)
    parts = []
    for node in nodes:
        marker = "*" if best is not None and node is best else ""
        parts.append(f"{marker}{node_label(chart, node)}")
    return "  ||  ".join(parts)


def node_label(chart: Chart, node: ChartNode) -> str:
    label = chart.display_labels.get(node.category, str(node.category))
    text = f"{label} -> {node_surface(chart, node)}"
    if _is_object_modifier_phrase(node):
        text += " (modifies NP)"
    return text


def _is_object_modifier_phrase(node: ChartNode) -> bool:
    sem = node.semantics
    return isinstance(sem, Template) and sem.root_fn == "modobj"


def _modifier_kind(node: ChartNode) -> str | None:
    sem = node.semantics
    if isinstance(sem, Template) and sem.root_fn in ("modact", "modobj"):
        return sem.root_fn
    return None


def node_surface(chart: Chart, node: ChartNode) -> str:
    """Surface words with brackets showing the attachment structure."""
    if node.is_leaf:
        return chart.tokens[node.span[0]]
    left, right = node.children
    kind = _modifier_kind(right)
    if kind is not None and left.children is not None:
        head = node_surface(chart, left.children[0])
        np = node_surface(chart, left.children[1])
        pp = node_surface(chart, right)
        if kind == "modact":
            return f"{head} ({np}) ({pp})"
        return f"{head} ({np} {pp})"
    return f"{node_surface(chart, left)} {node_surface(chart, right)}"
