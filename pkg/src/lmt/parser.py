"""Surface syntax: tokenizer and recursive-descent parser.

Grammar sketch (loosest to tightest):

    file     := header* program
    header   := 'region' '#'IDENT ':' 'depth' '=' INT [',' 'type' '=' type]
    program  := pitem ('||' pitem)*                  right-nested
    pitem    := (REGION | IDENT) '<=' term | term    store by lookahead
    term     := '\\' bpat [':' type] '.' term
              | 'let' ('!'|'$') IDENT '=' term 'in' term
              | 'nu' IDENT [':' REGION] '.' term
              | 'gen' IDENT '.' term
              | app
    app      := tight+                               left-assoc application
    tight    := atom ('[' type ']')*
    atom     := IDENT | '*' | REGION | '(' program ')'
              | 'get' '(' target ')' | 'set' '(' target ',' program ')'
              | '!' tight | '$' tight
    type     := 'forall' IDENT '.' type | tmodal ['-o' [effects] type]
    tmodal   := '!' tmodal | '$' tmodal | tatom
    tatom    := '1' | 'B' | IDENT | 'Reg' REGION tmodal | '(' type ')'

`--` starts a comment running to end of line.  Binder bodies stop at
`||`, so `let !x = M in N || P` is `(let !x = M in N) || P`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import (App, Bang, Gen, Get, Inst, Lam, LetBang, LetPara, LmtError,
                     Nu, Par, Para, RegionConst, Set, Store, Term, Unit, Var,
                     fresh_name, free_vars)
from .types import (Arrow, BangT, Behaviour, Forall, One, ParaT, RegT, TVar,
                    Type)


class ParseError(LmtError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


KEYWORDS = {"let", "in", "nu", "gen", "get", "set", "region", "depth",
            "type", "forall", "Reg"}

_PUNCT = {
    "||": "PARPAR", "<=": "LE", "-o": "ARROW",
    "\\": "BSLASH", ".": "DOT", "!": "BANG", "$": "DOLLAR", "*": "STAR",
    "(": "LPAR", ")": "RPAR", ",": "COMMA", ":": "COLON", "=": "EQ",
    "[": "LBRK", "]": "RBRK", "{": "LBRACE", "}": "RBRACE", ";": "SEMI",
}


@dataclass(slots=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "#":
            j = i + 1
            if j >= n or not _is_ident_start(text[j]):
                raise ParseError("expected region name after '#'", line, col)
            while j < n and _is_ident_char(text[j]):
                j += 1
            toks.append(Token("REGION", text[i + 1:j], line, col))
            col += j - i
            i = j
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            toks.append(Token("KW" if word in KEYWORDS else "IDENT",
                              word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in _PUNCT:
            toks.append(Token(_PUNCT[two], two, line, col))
            i += 2
            col += 2
            continue
        if two == "-o" or c == "-":
            raise ParseError(f"unexpected character {c!r}", line, col)
        if c in _PUNCT:
            toks.append(Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


@dataclass(slots=True)
class SourceFile:
    program: Term
    region_depths: dict[str, int]
    region_types: dict[str, Type] = field(default_factory=dict)


# Tokens that may begin an atom, hence continue an application.
_ATOM_START = {"IDENT", "STAR", "REGION", "LPAR", "BANG", "DOLLAR"}


class Parser:
    def __init__(self, toks: list[Token], declared: Optional[set[str]]):
        self.toks = toks
        self.pos = 0
        # None disables the declared-region check (bare program parsing)
        self.declared = declared

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg + (f" (got {t.value!r})" if t.value else
                                 " (got end of input)"), t.line, t.col)

    def expect(self, kind: str, what: str) -> Token:
        if self.peek().kind != kind:
            raise self.error(f"expected {what}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        t = self.peek()
        if t.kind != "KW" or t.value != word:
            raise self.error(f"expected '{word}'")
        return self.next()

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "KW" and t.value == word

    def region_token(self) -> str:
        t = self.expect("REGION", "a region constant '#name'")
        if self.declared is not None and t.value not in self.declared:
            raise ParseError(f"undeclared region '#{t.value}'", t.line, t.col)
        return t.value

    def ident(self, what: str = "an identifier") -> str:
        return self.expect("IDENT", what).value

    # -- types -----------------------------------------------------------

    def parse_type(self) -> Type:
        if self.at_kw("forall"):
            self.next()
            tv = self.ident("a type variable")
            self.expect("DOT", "'.'")
            return Forall(tv, self.parse_type())
        left = self.parse_tmodal()
        if self.peek().kind == "ARROW":
            self.next()
            eff = (frozenset(), frozenset())
            if self.peek().kind == "LBRACE":
                self.next()
                e1 = self.parse_efflist()
                self.expect("SEMI", "';' between the two effect sets")
                e2 = self.parse_efflist()
                self.expect("RBRACE", "'}'")
                eff = (e1, e2)
            return Arrow(left, self.parse_type(), eff)
        return left

    def parse_efflist(self) -> frozenset[str]:
        out: set[str] = set()
        while self.peek().kind == "REGION":
            out.add(self.region_token())
            if self.peek().kind == "COMMA":
                self.next()
        return frozenset(out)

    def parse_tmodal(self) -> Type:
        k = self.peek().kind
        if k == "BANG":
            self.next()
            return BangT(self.parse_tmodal())
        if k == "DOLLAR":
            self.next()
            return ParaT(self.parse_tmodal())
        return self.parse_tatom()

    def parse_tatom(self) -> Type:
        t = self.peek()
        if t.kind == "INT":
            if t.value != "1":
                raise self.error("the only numeric type is '1'")
            self.next()
            return One()
        if t.kind == "IDENT":
            self.next()
            return Behaviour() if t.value == "B" else TVar(t.value)
        if t.kind == "KW" and t.value == "Reg":
            self.next()
            r = self.region_token()
            return RegT(r, self.parse_tmodal())
        if t.kind == "LPAR":
            self.next()
            ty = self.parse_type()
            self.expect("RPAR", "')'")
            return ty
        raise self.error("expected a type")

    # -- terms -----------------------------------------------------------

    def parse_program(self) -> Term:
        items = [self.parse_pitem()]
        while self.peek().kind == "PARPAR":
            self.next()
            items.append(self.parse_pitem())
        t = items[-1]
        for e in reversed(items[:-1]):
            t = Par(e, t)
        return t

    def parse_pitem(self) -> Term:
        t = self.peek()
        if t.kind == "REGION" and self.peek(1).kind == "LE":
            r = self.region_token()
            self.next()
            return Store(r, self.parse_term(), loc=False)
        if t.kind == "IDENT" and self.peek(1).kind == "LE":
            x = self.ident()
            self.next()
            return Store(x, self.parse_term(), loc=True)
        return self.parse_term()

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "BSLASH":
            self.next()
            mode = ""
            if self.peek().kind in ("BANG", "DOLLAR"):
                mode = self.next().value
            x = self.ident("a binder name")
            ann = None
            if self.peek().kind == "COLON":
                self.next()
                ann = self.parse_type()
            self.expect("DOT", "'.'")
            body = self.parse_term()
            if mode:
                # \!x. M  ~>  \x'. let !x = x' in M   (same for $)
                outer = fresh_name(x + "'", free_vars(body) | {x})
                let_cls = LetBang if mode == "!" else LetPara
                return Lam(outer, let_cls(x, Var(outer), body), ann)
            return Lam(x, body, ann)
        if self.at_kw("let"):
            self.next()
            k = self.peek().kind
            if k not in ("BANG", "DOLLAR"):
                raise self.error("expected '!' or '$' after 'let'")
            self.next()
            x = self.ident("a binder name")
            self.expect("EQ", "'='")
            bound = self.parse_term()
            self.expect_kw("in")
            body = self.parse_term()
            cls = LetBang if k == "BANG" else LetPara
            return cls(x, bound, body)
        if self.at_kw("nu"):
            self.next()
            x = self.ident("a location name")
            region = None
            if self.peek().kind == "COLON":
                self.next()
                region = self.region_token()
            self.expect("DOT", "'.'")
            return Nu(x, region, self.parse_term())
        if self.at_kw("gen"):
            self.next()
            tv = self.ident("a type variable")
            self.expect("DOT", "'.'")
            return Gen(tv, self.parse_term())
        return self.parse_app()

    def parse_app(self) -> Term:
        t = self.parse_tight()
        while True:
            k = self.peek()
            if k.kind in _ATOM_START or (k.kind == "KW" and
                                         k.value in ("get", "set")):
                t = App(t, self.parse_tight())
            else:
                return t

    def parse_tight(self) -> Term:
        t = self.parse_atom()
        while self.peek().kind == "LBRK":
            self.next()
            ty = self.parse_type()
            self.expect("RBRK", "']'")
            t = Inst(t, ty)
        return t

    def parse_target(self) -> tuple[str, bool]:
        t = self.peek()
        if t.kind == "REGION":
            return self.region_token(), False
        if t.kind == "IDENT":
            return self.ident(), True
        raise self.error("expected a region constant or location variable")

    def parse_atom(self) -> Term:
        t = self.peek()
        if t.kind == "IDENT":
            return Var(self.ident())
        if t.kind == "STAR":
            self.next()
            return Unit()
        if t.kind == "REGION":
            return RegionConst(self.region_token())
        if t.kind == "BANG":
            self.next()
            return Bang(self.parse_tight())
        if t.kind == "DOLLAR":
            self.next()
            return Para(self.parse_tight())
        if t.kind == "LPAR":
            self.next()
            p = self.parse_program()
            self.expect("RPAR", "')'")
            return p
        if self.at_kw("get"):
            self.next()
            self.expect("LPAR", "'('")
            target, loc = self.parse_target()
            self.expect("RPAR", "')'")
            return Get(target, loc)
        if self.at_kw("set"):
            self.next()
            self.expect("LPAR", "'('")
            target, loc = self.parse_target()
            self.expect("COMMA", "','")
            arg = self.parse_program()
            self.expect("RPAR", "')'")
            return Set(target, arg, loc)
        raise self.error("expected a term")

    # -- headers and files -------------------------------------------------

    def parse_file(self) -> SourceFile:
        depths: dict[str, int] = {}
        rtypes: dict[str, Type] = {}
        while self.at_kw("region"):
            self.next()
            t = self.expect("REGION", "a region constant '#name'")
            if t.value in depths:
                raise ParseError(f"region '#{t.value}' declared twice",
                                 t.line, t.col)
            self.expect("COLON", "':'")
            self.expect_kw("depth")
            self.expect("EQ", "'='")
            d = self.expect("INT", "a depth number")
            depths[t.value] = int(d.value)
            if self.peek().kind == "COMMA":
                self.next()
                self.expect_kw("type")
                self.expect("EQ", "'='")
                # region types may mention any declared region, including
                # ones declared later; defer the declared check
                saved = self.declared
                self.declared = None
                rtypes[t.value] = self.parse_type()
                self.declared = saved
        if depths:
            self.declared = set(depths)
        prog = self.parse_program()
        self.expect("EOF", "end of input")
        if self.declared is not None:
            for r, ty in rtypes.items():
                from .types import type_regions
                bad = type_regions(ty) - self.declared
                if bad:
                    raise ParseError(
                        f"region type of '#{r}' mentions undeclared region "
                        f"'#{sorted(bad)[0]}'", 1, 1)
        return SourceFile(prog, depths, rtypes)


def parse_program(text: str) -> Term:
    """Parse a bare program (no header, regions unchecked)."""
    p = Parser(tokenize(text), None)
    prog = p.parse_program()
    p.expect("EOF", "end of input")
    return prog


def parse_file(text: str) -> SourceFile:
    """Parse header + program; region uses are checked against the header
    whenever at least one region is declared."""
    return Parser(tokenize(text), None).parse_file()


def parse_type(text: str) -> Type:
    p = Parser(tokenize(text), None)
    ty = p.parse_type()
    p.expect("EOF", "end of input")
    return ty
