"""Lexical dictionary: word entries and the grammar file loader.

Grammar files are line oriented, one entry per line::

    word <TAB> category <TAB> semantic-template

Categories use slash notation (``(S\\VP)/NP``); templates are predicate
expressions over ``$1..$k`` argument slots (see :mod:`wordsteer.semantics`).
``#`` starts a comment. ``@display <TAB> category <TAB> label`` assigns a
display label used by the chart dump.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from importlib import resources

from .categories import Category, CategoryError, parse_category
from .semantics import Semantics, SemanticsError, Template

MAX_CATEGORY_DEPTH = 4


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LexEntry:
    word: str
    category: Category
    semantics: Semantics

    def instantiate(self) -> Semantics:
        """Fresh semantics for a chart node (templates are immutable anyway)."""
        return self.semantics


@dataclass
class Dictionary:
    """Multimap from normalized token to lexical entries."""

    entries: dict[str, list[LexEntry]] = field(default_factory=dict)
    display_labels: dict[Category, str] = field(default_factory=dict)

    def add(self, entry: LexEntry) -> None:
        bucket = self.entries.setdefault(entry.word, [])
        for existing in bucket:
            if existing.category == entry.category and existing.semantics == entry.semantics:
                raise GrammarError(
                    f"duplicate entry for {entry.word!r} with category {entry.category}"
                )
        bucket.append(entry)

    def lookup(self, word: str) -> list[LexEntry]:
        return list(self.entries.get(normalize_token(word), ()))

    def words(self) -> list[str]:
        return sorted(self.entries)

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def entry_set(self) -> set[tuple[str, str, str]]:
        return {
            (e.word, str(e.category), e.semantics.render())
            for bucket in self.entries.values()
            for e in bucket
        }

    def serialize(self) -> str:
        lines = []
        for cat, label in sorted(self.display_labels.items(), key=lambda kv: kv[1]):
            lines.append(f"@display\t{cat}\t{label}")
        for word in self.words():
            for e in self.entries[word]:
                source = e.semantics.source if isinstance(e.semantics, Template) else e.semantics.render()
                lines.append(f"{word}\t{e.category}\t{source}")
        return "\n".join(lines) + "\n"


_STRIP_PUNCT = "".join(c for c in string.punctuation if c != "'")


def normalize_token(word: str) -> str:
    """Lowercase and strip trailing punctuation; apostrophes survive."""
    return word.strip().lower().rstrip(_STRIP_PUNCT)


def load_grammar(text: str) -> Dictionary:
    dictionary = Dictionary()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split("\t") if f.strip()]
        if fields[0] == "@display":
            if len(fields) != 3:
                raise GrammarError("@display needs category and label", lineno)
            try:
                dictionary.display_labels[parse_category(fields[1])] = fields[2]
            except CategoryError as err:
                raise GrammarError(str(err), lineno) from err
            continue
        if len(fields) != 3:
            raise GrammarError(
                f"expected 'word<TAB>category<TAB>template', got {raw!r}", lineno
            )
        word, cat_text, template_text = fields
        try:
            category = parse_category(cat_text)
        except CategoryError as err:
            raise GrammarError(str(err), lineno) from err
        if category.depth() > MAX_CATEGORY_DEPTH:
            raise GrammarError(
                f"category {category} nests deeper than {MAX_CATEGORY_DEPTH}", lineno
            )
        try:
            semantics = Template.compile(template_text, category.arity())
        except SemanticsError as err:
            raise GrammarError(str(err), lineno) from err
        norm = normalize_token(word)
        if not norm:
            raise GrammarError(f"empty word after normalization: {word!r}", lineno)
        try:
            dictionary.add(LexEntry(norm, category, semantics))
        except GrammarError as err:
            raise GrammarError(str(err), lineno) from err
    return dictionary


def load_grammar_file(path) -> Dictionary:
    with open(path, encoding="utf-8") as fh:
        return load_grammar(fh.read())


def load_shipped_grammar() -> Dictionary:
    text = resources.files("wordsteer.data").joinpath("grammar.lex").read_text("utf-8")
    return load_grammar(text)
