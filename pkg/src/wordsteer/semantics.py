"""Logical-form semantics: frames, symbols, and lexical templates.

A fully composed meaning is a :class:`Frame` tree, e.g. the imperative
``INSTRUCT(speaker,listener,graspObject(listener,mug))``. Modifier clauses
attach to a frame with an explicit site (``action`` vs ``object``) rather
than by argument position, so attachment ambiguity survives composition.

Lexical entries carry a :class:`Template`: an expression with ``$1..$k``
slots filled one at a time as the entry's category consumes its arguments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

ROLES = frozenset({"speaker", "listener"})

SITE_ACTION = "action"
SITE_OBJECT = "object"
SITE_CORRECTION = "correction"


class SemanticsError(ValueError):
    pass


@dataclass(frozen=True)
class Sym:
    """A referent symbol (``mug``), landmark (``top``), or role (``speaker``)."""

    name: str

    def render(self) -> str:
        return self.name

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Frame:
    """Predicate application with ordered args and site-tagged modifiers."""

    pred: str
    args: tuple["Value", ...] = ()
    mods: tuple[tuple[str, "Frame"], ...] = ()

    def render(self) -> str:
        inner = ",".join(a.render() for a in self.args)
        for _site, mod in self.mods:
            inner += ", " + mod.render_spaced()
        return f"{self.pred}({inner})"

    def render_spaced(self) -> str:
        parts = [
            a.render_spaced() if isinstance(a, Frame) else a.render()
            for a in self.args
        ]
        inner = ", ".join(parts)
        for _site, mod in self.mods:
            inner += ", " + mod.render_spaced()
        return f"{self.pred}({inner})"

    def with_mod(self, site: str, mod: "Frame") -> "Frame":
        return Frame(self.pred, self.args, self.mods + ((site, mod),))

    def __str__(self) -> str:
        return self.render()


Value = Sym | Frame


def action_of(value: Value) -> Value:
    """The core action frame of an instruction, unwrapping INSTRUCT."""
    if isinstance(value, Frame) and value.pred == "INSTRUCT" and len(value.args) >= 3:
        return value.args[2]
    return value


def theme_of(value: Value) -> Value:
    """The acted-on referent of an instruction or action frame.

    First non-role argument of the action, recursing through single-argument
    wrappers such as ``not(...)``.
    """
    value = action_of(value)
    if isinstance(value, Sym):
        return value
    for arg in value.args:
        if isinstance(arg, Sym) and arg.name not in ROLES:
            return arg
        if isinstance(arg, Frame):
            inner = theme_of(arg)
            if isinstance(inner, Sym) and inner.name not in ROLES:
                return inner
    return Sym(value.pred)


# --- template expressions -------------------------------------------------

@dataclass(frozen=True)
class _Slot:
    index: int


@dataclass(frozen=True)
class _Name:
    name: str


@dataclass(frozen=True)
class _Call:
    fn: str
    args: tuple


_TExpr = _Slot | _Name | _Call

_TOKEN = re.compile(r"\$\d+|[A-Za-z_][A-Za-z0-9_]*|[(),]")

# builtins that rewrite frames instead of constructing a predicate
_SPECIAL_FNS = frozenset({"modact", "modobj", "theme", "fixref", "fixact", "notact"})


def parse_template_expr(text: str) -> _TExpr:
    tokens = _TOKEN.findall(text)
    if "".join(tokens).replace(" ", "") != text.replace(" ", ""):
        raise SemanticsError(f"bad characters in template {text!r}")
    pos = 0

    def parse() -> _TExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise SemanticsError(f"unexpected end of template {text!r}")
        tok = tokens[pos]
        pos += 1
        if tok.startswith("$"):
            return _Slot(int(tok[1:]))
        if tok in "(),":
            raise SemanticsError(f"unexpected {tok!r} in template {text!r}")
        if pos < len(tokens) and tokens[pos] == "(":
            pos += 1
            args = []
            if tokens[pos] != ")":
                while True:
                    args.append(parse())
                    if tokens[pos] == ",":
                        pos += 1
                        continue
                    break
            if tokens[pos] != ")":
                raise SemanticsError(f"unbalanced parens in template {text!r}")
            pos += 1
            return _Call(tok, tuple(args))
        return _Name(tok)

    expr = parse()
    if pos != len(tokens):
        raise SemanticsError(f"trailing input in template {text!r}")
    return expr


def max_slot(expr: _TExpr) -> int:
    if isinstance(expr, _Slot):
        return expr.index
    if isinstance(expr, _Call):
        return max((max_slot(a) for a in expr.args), default=0)
    return 0


def _need_frame(value: Value, fn: str) -> Frame:
    if not isinstance(value, Frame):
        raise SemanticsError(f"{fn}() needs a frame, got {value!r}")
    return value


def _substitute(value: Value, old: Value, new: Value) -> Value:
    if value == old:
        return new
    if isinstance(value, Sym):
        return value
    return Frame(
        value.pred,
        tuple(_substitute(a, old, new) for a in value.args),
        tuple((site, _substitute(m, old, new)) for site, m in value.mods),
    )


def evaluate(expr: _TExpr, bound: tuple[Value, ...]) -> Value:
    if isinstance(expr, _Slot):
        if expr.index > len(bound):
            raise SemanticsError(f"unbound slot ${expr.index}")
        return bound[expr.index - 1]
    if isinstance(expr, _Name):
        return Sym(expr.name)
    args = tuple(evaluate(a, bound) for a in expr.args)
    fn = expr.fn
    if fn not in _SPECIAL_FNS:
        return Frame(fn, args)
    if fn in ("modact", "modobj"):
        base = _need_frame(args[0], fn)
        mod = _need_frame(args[1], fn)
        site = SITE_ACTION if fn == "modact" else SITE_OBJECT
        return base.with_mod(site, mod)
    if fn == "theme":
        return theme_of(args[0])
    if fn == "notact":
        base = _need_frame(args[0], fn)
        inner = action_of(base)
        if not isinstance(inner, Frame):
            inner = Frame(str(inner), ())
        negated = Frame("not", (inner,))
        if base.pred == "INSTRUCT":
            return Frame(base.pred, base.args[:2] + (negated,), base.mods)
        return negated
    if fn == "fixref":
        base = _need_frame(args[0], fn)
        return base.with_mod(SITE_CORRECTION, Frame("refine", (args[1],)))
    if fn == "fixact":
        base = _need_frame(args[0], fn)
        new = _need_frame(args[1], fn)
        old_action = action_of(base)
        old_name = old_action.pred if isinstance(old_action, Frame) else str(old_action)
        new = _substitute(new, Sym("it"), theme_of(base))
        return new.with_mod(SITE_CORRECTION, Frame("replacing", (Sym(old_name),)))
    raise SemanticsError(f"unknown builtin {fn}")  # pragma: no cover


@dataclass(frozen=True)
class Template:
    """Partially applied lexical meaning; saturates into a :class:`Value`."""

    expr: _TExpr
    arity: int
    bound: tuple[Value, ...] = field(default_factory=tuple)
    source: str = ""

    @classmethod
    def compile(cls, text: str, arity: int) -> "Template | Value":
        expr = parse_template_expr(text)
        slots = max_slot(expr)
        if slots != arity:
            raise SemanticsError(
                f"template {text!r} binds {slots} argument(s) "
                f"but the category consumes {arity}"
            )
        if arity == 0:
            return evaluate(expr, ())
        return cls(expr=expr, arity=arity, source=text)

    def apply(self, value: Value) -> "Template | Value":
        bound = self.bound + (value,)
        if len(bound) == self.arity:
            return evaluate(self.expr, bound)
        return Template(self.expr, self.arity, bound, self.source)

    def render(self) -> str:
        filled = [v.render() for v in self.bound]
        filled += [f"${i}" for i in range(len(self.bound) + 1, self.arity + 1)]
        return f"<{self.source}>[{','.join(filled)}]"

    @property
    def root_fn(self) -> str | None:
        return self.expr.fn if isinstance(self.expr, _Call) else None


Semantics = Template | Value


def render_semantics(sem: Semantics) -> str:
    return sem.render()


# --- frame inspection used by parse selection and grounding ----------------

# symbols that never name a world object: grasp directions, spatial
# landmarks, anaphors, and manner adverbs
LANDMARK_SYMBOLS = frozenset(
    {"top", "side", "handle", "right", "left", "one", "it",
     "up", "down", "faster", "slower", "upright"}
)

ATTRIBUTE_PREDICATES = {"blue": ("color", "blue"), "black": ("color", "black")}


def flatten_clauses(value: Value) -> list[Frame]:
    """Instruction clauses in execution order.

    ``seq`` conjuncts keep surface order; an ``after`` clause puts its
    subordinate action first.
    """
    if isinstance(value, Sym):
        return []
    if value.pred == "seq" and len(value.args) == 2:
        return flatten_clauses(value.args[0]) + flatten_clauses(value.args[1])
    if value.pred == "after" and len(value.args) == 2:
        return flatten_clauses(value.args[1]) + flatten_clauses(value.args[0])
    return [value]


def collect_referents(sem) -> list[tuple[str, dict]]:
    """(name, required-attributes) pairs that must ground to world objects."""
    if isinstance(sem, Template):
        return []
    found: list[tuple[str, dict]] = []

    def walk(value: Value) -> None:
        if isinstance(value, Sym):
            if value.name not in ROLES and value.name not in LANDMARK_SYMBOLS:
                found.append((value.name, {}))
            return
        if value.pred in ATTRIBUTE_PREDICATES and len(value.args) == 1:
            arg = value.args[0]
            if isinstance(arg, Sym) and arg.name not in LANDMARK_SYMBOLS:
                key, attr = ATTRIBUTE_PREDICATES[value.pred]
                found.append((arg.name, {key: attr}))
            return
        for arg in value.args:
            walk(arg)

    for clause in flatten_clauses(sem):
        action = action_of(clause)
        if isinstance(action, Frame):
            for arg in action.args:
                walk(arg)
        # modifier landmarks (by/from targets) are grasp names, not objects
    return found
