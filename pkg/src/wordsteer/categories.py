"""Syntactic categories: atomic symbols and slash-notation functions.

A functional category ``X/Y`` consumes a ``Y`` to its right and yields an
``X``; ``X\\Y`` consumes a ``Y`` to its left. Nesting is written with
parentheses, e.g. ``(S\\NP)/NP``.
"""

from __future__ import annotations

from dataclasses import dataclass

ATOMIC_SYMBOLS = frozenset({"S", "NP", "N", "VP", "PP", "DET", "P", "ADV", "CONJ"})

FORWARD = "/"
BACKWARD = "\\"


class CategoryError(ValueError):
    pass


@dataclass(frozen=True)
class Category:
    """Atomic category (``symbol`` set) or functional (``result``/``argument`` set)."""

    symbol: str | None = None
    result: "Category | None" = None
    argument: "Category | None" = None
    direction: str | None = None

    def __post_init__(self):
        if self.symbol is not None:
            if self.symbol not in ATOMIC_SYMBOLS:
                raise CategoryError(f"unknown atomic category {self.symbol!r}")
            if self.result is not None or self.argument is not None:
                raise CategoryError("category cannot be both atomic and functional")
        else:
            if self.result is None or self.argument is None:
                raise CategoryError("functional category needs result and argument")
            if self.direction not in (FORWARD, BACKWARD):
                raise CategoryError(f"bad direction {self.direction!r}")

    @property
    def is_atomic(self) -> bool:
        return self.symbol is not None

    def arity(self) -> int:
        """Number of arguments consumed before the category bottoms out."""
        n, cat = 0, self
        while not cat.is_atomic:
            n += 1
            cat = cat.result
        return n

    def depth(self) -> int:
        if self.is_atomic:
            return 0
        return 1 + max(self.result.depth(), self.argument.depth())

    def __str__(self) -> str:
        if self.is_atomic:
            return self.symbol

        def wrap(c: Category) -> str:
            return str(c) if c.is_atomic else f"({c})"

        return f"{wrap(self.result)}{self.direction}{wrap(self.argument)}"


def atomic(symbol: str) -> Category:
    return Category(symbol=symbol)


def forward(result: Category, argument: Category) -> Category:
    return Category(result=result, argument=argument, direction=FORWARD)


def backward(result: Category, argument: Category) -> Category:
    return Category(result=result, argument=argument, direction=BACKWARD)


def parse_category(text: str) -> Category:
    """Parse slash notation like ``(S\\NP)/NP`` into a Category tree."""
    parser = _CategoryParser(text)
    cat = parser.parse_expr()
    if parser.pos != len(parser.text):
        raise CategoryError(f"trailing input in category {text!r}")
    return cat


class _CategoryParser:
    def __init__(self, text: str):
        self.text = text.replace(" ", "")
        self.pos = 0

    def parse_expr(self) -> Category:
        # slashes are left-associative: A/B/C means (A/B)/C
        left = self.parse_atomish()
        while self.pos < len(self.text) and self.text[self.pos] in (FORWARD, BACKWARD):
            direction = self.text[self.pos]
            self.pos += 1
            right = self.parse_atomish()
            left = Category(result=left, argument=right, direction=direction)
        return left

    def parse_atomish(self) -> Category:
        if self.pos >= len(self.text):
            raise CategoryError(f"unexpected end of category {self.text!r}")
        if self.text[self.pos] == "(":
            self.pos += 1
            inner = self.parse_expr()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise CategoryError(f"unbalanced parentheses in {self.text!r}")
            self.pos += 1
            return inner
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        sym = self.text[start : self.pos]
        if not sym:
            raise CategoryError(f"expected category symbol at {self.text[start:]!r}")
        return Category(symbol=sym)
