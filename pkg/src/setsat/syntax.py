"""Formula syntax: AST, parser, printer and normalization into flat conjunctions.

Concrete grammar::

    formula := disj
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')' | atom
    atom    := term ('=' | '!=' | 'in' | 'notin' | 'sub' | 'nsub') term
             | 'finite' '(' term ')'
    term    := IDENT | '0' | ('un'|'int'|'diff') '(' term ',' term ')'
             | 'pow' '(' term ')' | '{' term (',' term)* '}'
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import ParseError

# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class EmptySet:
    pass


@dataclass(frozen=True)
class Union_:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Inter:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Diff:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Pow:
    arg: "Term"


@dataclass(frozen=True)
class Enum:
    items: tuple["Term", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("an enumeration needs at least one item")


Term = Union[Var, EmptySet, Union_, Inter, Diff, Pow, Enum]

# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Subseteq:
    left: Term
    right: Term


@dataclass(frozen=True)
class In:
    left: Term
    right: Term


@dataclass(frozen=True)
class Finite:
    arg: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Or needs at least two operands")


Atom = Union[Eq, Subseteq, In, Finite]
Formula = Union[Eq, Subseteq, In, Finite, Not, And, Or]

ATOM_TYPES = (Eq, Subseteq, In, Finite)


def conj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else Or(tuple(args))


# ---------------------------------------------------------------- lexer

KEYWORDS = {"un", "int", "diff", "pow", "finite", "in", "notin", "sub", "nsub"}
TERM_FUNCTIONS = {"un": 2, "int": 2, "diff": 2, "pow": 1}

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<zero>0(?![0-9]))"
    r"|(?P<op>!=|[=!&|(){},])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ws":
            for i, ch in enumerate(chunk):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.cur
        raise ParseError(msg, tok.line, tok.col)

    def take(self) -> _Tok:
        tok = self.cur
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.cur.kind in ("op", "ident") and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.cur.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")

    def formula(self) -> Formula:
        f = self.disjunction()
        if self.cur.kind != "eof":
            self.fail(f"unexpected {self.cur.text!r}")
        return f

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return conj(*parts)

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            f = self.disjunction()
            self.expect(")")
            return f
        return self.atom()

    def atom(self) -> Formula:
        tok = self.cur
        if tok.kind == "ident" and tok.text == "finite":
            self.take()
            self.expect("(")
            t = self.term()
            self.expect(")")
            return Finite(t)
        left = self.term()
        op = self.cur
        rel = op.text if op.kind in ("op", "ident") else ""
        if rel not in ("=", "!=", "in", "notin", "sub", "nsub"):
            self.fail("expected a relation (=, !=, in, notin, sub, nsub)")
        self.take()
        right = self.term()
        if rel == "=":
            return Eq(left, right)
        if rel == "!=":
            return Not(Eq(left, right))
        if rel == "in":
            return In(left, right)
        if rel == "notin":
            return Not(In(left, right))
        if rel == "sub":
            return Subseteq(left, right)
        return Not(Subseteq(left, right))

    def term(self) -> Term:
        tok = self.cur
        if tok.kind == "zero":
            self.take()
            return EmptySet()
        if tok.kind == "op" and tok.text == "{":
            self.take()
            items = [self.term()]
            while self.accept(","):
                items.append(self.term())
            self.expect("}")
            return Enum(tuple(items))
        if tok.kind == "ident":
            self.take()
            if tok.text in TERM_FUNCTIONS:
                arity = TERM_FUNCTIONS[tok.text]
                self.expect("(")
                args = [self.term()]
                for _ in range(arity - 1):
                    self.expect(",")
                    args.append(self.term())
                self.expect(")")
                if tok.text == "pow":
                    return Pow(args[0])
                cls = {"un": Union_, "int": Inter, "diff": Diff}[tok.text]
                return cls(*args)
            if tok.text in KEYWORDS:
                self.fail(f"keyword {tok.text!r} cannot be used as a term", tok)
            if self.cur.kind == "op" and self.cur.text == "(":
                self.fail(f"unknown function {tok.text!r}", tok)
            return Var(tok.text)
        self.fail(f"expected a term, found {tok.text or 'end of input'!r}")


def parse(text: str) -> Formula:
    return _Parser(text).formula()


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.cur.kind != "eof":
        p.fail(f"unexpected {p.cur.text!r}")
    return t


# ---------------------------------------------------------------- printer


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, EmptySet):
        return "0"
    if isinstance(t, Union_):
        return f"un({print_term(t.left)}, {print_term(t.right)})"
    if isinstance(t, Inter):
        return f"int({print_term(t.left)}, {print_term(t.right)})"
    if isinstance(t, Diff):
        return f"diff({print_term(t.left)}, {print_term(t.right)})"
    if isinstance(t, Pow):
        return f"pow({print_term(t.arg)})"
    if isinstance(t, Enum):
        return "{" + ", ".join(print_term(i) for i in t.items) + "}"
    raise TypeError(f"not a term: {t!r}")


_NEG_REL = {Eq: "!=", In: "notin", Subseteq: "nsub"}
_POS_REL = {Eq: "=", In: "in", Subseteq: "sub"}


def print_formula(f: Formula) -> str:
    if isinstance(f, Finite):
        return f"finite({print_term(f.arg)})"
    if isinstance(f, (Eq, In, Subseteq)):
        return f"{print_term(f.left)} {_POS_REL[type(f)]} {print_term(f.right)}"
    if isinstance(f, Not):
        inner = f.arg
        if isinstance(inner, (Eq, In, Subseteq)):
            return f"{print_term(inner.left)} {_NEG_REL[type(inner)]} {print_term(inner.right)}"
        if isinstance(inner, (And, Or)):
            return f"!({print_formula(inner)})"
        return "!" + print_formula(inner)
    if isinstance(f, (And, Or)):
        sep = " & " if isinstance(f, And) else " | "
        return sep.join(
            f"({print_formula(a)})" if isinstance(a, (And, Or)) else print_formula(a) for a in f.args
        )
    raise TypeError(f"not a formula: {f!r}")


def formula_vars(f: Formula | Term) -> list[str]:
    """Variable names in order of first occurrence."""
    seen: dict[str, None] = {}

    def walk(node):
        if isinstance(node, Var):
            seen.setdefault(node.name, None)
        elif isinstance(node, (Union_, Inter, Diff, Eq, Subseteq, In)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Pow, Finite, Not)):
            walk(node.arg)
        elif isinstance(node, Enum):
            for t in node.items:
                walk(t)
        elif isinstance(node, (And, Or)):
            for a in node.args:
                walk(a)

    walk(f)
    return list(seen)


# ---------------------------------------------------------------- normalized conjunctions

# literal kinds and their argument layout (first argument is the defined
# variable for the functional shapes)
SHAPES = {
    "eq": "x = y",
    "neq": "x != y",
    "empty": "x = 0",
    "union": "x = un(y,z)",
    "inter": "x = int(y,z)",
    "diff": "x = diff(y,z)",
    "sub": "x sub y",
    "nsub": "x nsub y",
    "in": "x in y",
    "notin": "x notin y",
    "pow": "x = pow(y)",
    "enum": "x = {y1,...,yH}",
    "finite": "finite(y)",
    "infinite": "!finite(y)",
}

_ARITY = {
    "eq": 2, "neq": 2, "empty": 1, "union": 3, "inter": 3, "diff": 3, "sub": 2,
    "nsub": 2, "in": 2, "notin": 2, "pow": 2, "finite": 1, "infinite": 1,
}


@dataclass(frozen=True)
class Literal:
    kind: str
    args: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise ValueError(f"unknown literal shape {self.kind!r}")
        if self.kind == "enum":
            if len(self.args) < 2:
                raise ValueError("enumeration literal needs at least one item")
        elif len(self.args) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} arguments")

    def __str__(self) -> str:
        a = self.args
        k = self.kind
        if k == "eq":
            return f"{a[0]} = {a[1]}"
        if k == "neq":
            return f"{a[0]} != {a[1]}"
        if k == "empty":
            return f"{a[0]} = 0"
        if k in ("union", "inter", "diff"):
            fn = {"union": "un", "inter": "int", "diff": "diff"}[k]
            return f"{a[0]} = {fn}({a[1]}, {a[2]})"
        if k in ("sub", "nsub", "in", "notin"):
            return f"{a[0]} {k} {a[1]}"
        if k == "pow":
            return f"{a[0]} = pow({a[1]})"
        if k == "enum":
            return f"{a[0]} = {{{', '.join(a[1:])}}}"
        if k == "finite":
            return f"finite({a[0]})"
        return f"!finite({a[0]})"


@dataclass(frozen=True)
class NormalizedConjunction:
    literals: tuple[Literal, ...]
    vars: tuple[str, ...]
    synthetic: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        known = set(self.vars)
        for lit in self.literals:
            missing = [v for v in lit.args if v not in known]
            if missing:
                raise ValueError(f"literal {lit} uses unregistered variables {missing}")

    @property
    def L(self) -> int:
        return max((len(l.args) - 1 for l in self.literals if l.kind == "enum"), default=0)

    @property
    def user_vars(self) -> tuple[str, ...]:
        return tuple(v for v in self.vars if v not in self.synthetic)

    def has_finiteness(self) -> bool:
        return any(l.kind in ("finite", "infinite") for l in self.literals)

    def infinite_vars(self) -> list[str]:
        return list(dict.fromkeys(l.args[0] for l in self.literals if l.kind == "infinite"))

    def __str__(self) -> str:
        return " & ".join(str(l) for l in self.literals) if self.literals else "true"


def conjunction(literals: Iterable[Literal | str], vars: Iterable[str] | None = None) -> NormalizedConjunction:
    """Build a conjunction from literals (or parseable literal strings).

    Variables default to the order of first appearance.
    """
    lits: list[Literal] = []
    for lit in literals:
        if isinstance(lit, str):
            normed = normalize(parse(lit))
            if len(normed) != 1:
                raise ValueError(f"{lit!r} is not a single conjunction")
            lits.extend(normed[0].literals)
        else:
            lits.append(lit)
    order = list(vars) if vars is not None else []
    for lit in lits:
        for v in lit.args:
            if v not in order:
                order.append(v)
    synth = frozenset(v for v in order if v.startswith("_t"))
    return NormalizedConjunction(tuple(dict.fromkeys(lits)), tuple(order), synth)


def strip_infinite(c: NormalizedConjunction) -> NormalizedConjunction:
    return NormalizedConjunction(
        tuple(l for l in c.literals if l.kind != "infinite"), c.vars, c.synthetic
    )


# ---------------------------------------------------------------- normalization


def _nnf(f: Formula, positive: bool = True) -> Iterator:
    """Yield the DNF as lists of (atom, polarity) pairs."""
    if isinstance(f, ATOM_TYPES):
        yield [(f, positive)]
    elif isinstance(f, Not):
        yield from _nnf(f.arg, not positive)
    elif isinstance(f, (And, Or)):
        is_and = isinstance(f, And) == positive
        parts = [list(_nnf(a, positive)) for a in f.args]
        if is_and:
            for combo in itertools.product(*parts):
                yield [lit for piece in combo for lit in piece]
        else:
            for p in parts:
                yield from p
    else:
        raise TypeError(f"not a formula: {f!r}")


class _Flattener:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counter = itertools.count(1)
        self.names: dict[Term, str] = {}

    def fresh(self) -> str:
        while True:
            name = f"_t{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def var_for(self, t: Term, out: list[Literal]) -> str:
        if isinstance(t, Var):
            return t.name
        name = self.names.get(t)
        if name is None:
            name = self.fresh()
            self.names[t] = name
        out.append(self.define(name, t, out))
        return name

    def define(self, x: str, t: Term, out: list[Literal]) -> Literal:
        """Literal stating x = t for compound or empty t."""
        if isinstance(t, EmptySet):
            return Literal("empty", (x,))
        if isinstance(t, (Union_, Inter, Diff)):
            kind = {Union_: "union", Inter: "inter", Diff: "diff"}[type(t)]
            return Literal(kind, (x, self.var_for(t.left, out), self.var_for(t.right, out)))
        if isinstance(t, Pow):
            return Literal("pow", (x, self.var_for(t.arg, out)))
        if isinstance(t, Enum):
            return Literal("enum", (x, *(self.var_for(i, out) for i in t.items)))
        if isinstance(t, Var):
            return Literal("eq", (x, t.name))
        raise TypeError(f"not a term: {t!r}")

    def literal(self, atom: Atom, positive: bool) -> list[Literal]:
        out: list[Literal] = []
        if isinstance(atom, Finite):
            v = self.var_for(atom.arg, out)
            out.append(Literal("finite" if positive else "infinite", (v,)))
        elif isinstance(atom, Eq) and positive:
            left, right = atom.left, atom.right
            if not isinstance(left, Var) and isinstance(right, Var):
                left, right = right, left
            if isinstance(left, Var):
                out.append(self.define(left.name, right, out))
            else:
                x = self.var_for(left, out)
                out.append(self.define(x, right, out))
        else:
            kinds = {
                (Eq, False): "neq",
                (In, True): "in",
                (In, False): "notin",
                (Subseteq, True): "sub",
                (Subseteq, False): "nsub",
            }
            kind = kinds[(type(atom), positive)]
            a = self.var_for(atom.left, out)
            b = self.var_for(atom.right, out)
            out.append(Literal(kind, (a, b)))
        return out


def normalize(f: Formula) -> list[NormalizedConjunction]:
    """Flatten ``f`` into a list of normalized conjunctions (DNF).

    ``f`` is satisfiable iff some returned conjunction is; fresh variables
    ``_tN`` name compound subterms and are shared across disjuncts.
    """
    user = formula_vars(f)
    flat = _Flattener(user)
    result: list[NormalizedConjunction] = []
    seen: set[tuple[Literal, ...]] = set()
    for clause in _nnf(f):
        lits: list[Literal] = []
        for atom, positive in clause:
            lits.extend(flat.literal(atom, positive))
        lits = list(dict.fromkeys(lits))
        key = tuple(lits)
        if key in seen:
            continue
        seen.add(key)
        used = {v for l in lits for v in l.args}
        synth = [v for v in flat.names.values() if v in used]
        synth.sort(key=lambda s: int(s[2:]))
        result.append(NormalizedConjunction(tuple(lits), tuple(user) + tuple(synth), frozenset(synth)))
    return result


def term_of_literal(lit: Literal) -> Term | None:
    """For functional literals, the defining term of the first argument."""
    a = lit.args
    k = lit.kind
    if k == "eq":
        return Var(a[1])
    if k == "empty":
        return EmptySet()
    if k in ("union", "inter", "diff"):
        cls = {"union": Union_, "inter": Inter, "diff": Diff}[k]
        return cls(Var(a[1]), Var(a[2]))
    if k == "pow":
        return Pow(Var(a[1]))
    if k == "enum":
        return Enum(tuple(Var(v) for v in a[1:]))
    return None
