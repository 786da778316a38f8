"""Line-oriented model language for co-design problems (.mcd files).

Grammar (EBNF; # starts a comment, statements begin at column 1):

    document   = { statement } ;
    statement  = modeldecl | posetdecl | dpdecl | udecl | termdecl ;
    modeldecl  = "model" NAME [ STRING ] ;
    posetdecl  = "poset" NAME "=" posetexpr ;
    posetexpr  = "R" "+" "[" UNIT "]"
               | "chain" "{" elem { "," elem } "}"
               | "product" "(" NAME "," NAME { "," NAME } ")" ;
    dpdecl     = "dp" NAME "=" dpkind ;
    dpkind     = "constant" sig "{" point { "," point } "}"
               | "affine" sig "gain" point "offset" point
               | "catalogue" sig "{" [ entry { "," entry } [ "," ] ] "}"
               | "map" sig "{" assign { ";" assign } "}"
               | "identity" sig | "bottom" sig | "top" sig
               | builtin ;
    entry      = point "->" point ;
    assign     = NAME "=" mexpr ;
    mexpr      = mterm { "+" mterm } ;
    mterm      = mfactor { "*" mfactor } ;
    mfactor    = NUM | NAME | "(" mexpr ")"
               | ( "max" | "min" ) "(" mexpr "," mexpr ")" ;
    builtin    = "uid" "(" NUM [ UNIT ] ")"
               | "invplus_uniform" "(" INT [ "," UNIT ] ")"
               | "invplus_vdc" "(" INT [ "," UNIT ] ")"
               | "invtimes_vdc" "(" INT "," NUM "," NUM
                                 [ "," UNIT "," UNIT "," UNIT ] ")" ;
    sig        = [ "F" "(" axes ")" ] "R" "(" axes ")" ;
    axes       = axis { "," axis } ;
    axis       = NAME ( "[" UNIT "]" | ":" NAME ) ;
    point      = scalar | "(" scalar { "," scalar } ")" ;
    scalar     = NUM | "inf" | NAME ;
    elem       = NUM | NAME ;
    udecl      = "uncertain" NAME "=" ( "pm" "(" NAME "," NUM "%" ")"
               | "interval" "(" NAME "," NAME ")" ) ;
    termdecl   = "term" texpr ;
    texpr      = NAME | "series" "(" texpr "," texpr ")"
               | "par" "(" texpr "," texpr ")" | "loop" "(" texpr ")" ;

Omitting F(...) gives a constant a trivial one-point functionality.
`map` bodies are monotone by construction: nonnegative constants,
functionality names, +, *, max, min.  Parsing recovers at statement
boundaries, so one file yields every diagnostic at once; a duplicate
name anywhere (posets, dps, uncertains share one namespace) is an error.
"""

import math
import re
from dataclasses import dataclass, field

from . import relaxations
from .antichains import Antichain
from .dp import (
    Atom,
    Catalogue,
    ConstantResource,
    DesignProblem,
    IdentityDP,
    Loop,
    MonotoneMap,
    Par,
    Series,
    Term,
    UNIT_POSET,
    BottomDP,
    TopDP,
)
from .errors import DomainError
from .posets import FinitePoset, Poset, ProductPoset, RealPlus
from .uncertainty import UncertainDP, check_udp, degenerate, scale_catalogue

KEYWORDS = ("model", "poset", "dp", "uncertain", "term")

RESERVED = frozenset(
    KEYWORDS
    + (
        "chain",
        "product",
        "constant",
        "affine",
        "catalogue",
        "map",
        "identity",
        "bottom",
        "top",
        "gain",
        "offset",
        "series",
        "par",
        "loop",
        "pm",
        "interval",
        "uid",
        "invplus_uniform",
        "invplus_vdc",
        "invtimes_vdc",
        "inf",
        "max",
        "min",
        "F",
        "R",
    )
)

SAMPLING_BUILTINS = ("invplus_uniform", "invplus_vdc", "invtimes_vdc")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    start: int
    end: int


def _sp():
    return field(compare=False, repr=False)


def merge_spans(a: Span, b: Span) -> Span:
    return Span(a.line, a.col, a.start, b.end)


@dataclass
class Diagnostic:
    severity: str
    message: str
    span: Span

    def format(self, filename: str = "<model>") -> str:
        return "%s:%d:%d: %s: %s" % (
            filename,
            self.span.line,
            self.span.col,
            self.severity,
            self.message,
        )


# --- lexer ------------------------------------------------------------------


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int
    start: int
    end: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, self.start, self.end)


_TOKEN_RE = re.compile(
    r"(?P<skip>[ \t\r]+|#[^\n]*)"
    r"|(?P<nl>\n)"
    r"|(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)"
    r"|(?P<arrow>->)"
    r"|(?P<le><=)"
    r"|(?P<word>[A-Za-z_$][A-Za-z0-9_$/^]*)"
    r"|(?P<string>\"[^\"\n]*\")"
    r"|(?P<punct>[(){}\[\],;=:%+*])"
)


def tokenize(text: str, diagnostics: list) -> list[Token]:
    toks: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = Span(line, pos - line_start + 1, pos, pos + 1)
            diagnostics.append(
                Diagnostic("error", "unexpected character %r" % text[pos], span)
            )
            pos += 1
            continue
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "skip":
            col = m.start() - line_start + 1
            if kind == "punct" or kind in ("arrow", "le"):
                kind = tok_text
            toks.append(Token(kind, tok_text, line, col, m.start(), m.end()))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return toks


# --- syntax tree --------------------------------------------------------------


@dataclass
class PosetReal:
    unit: str
    span: Span = _sp()


@dataclass
class PosetChain:
    labels: list
    span: Span = _sp()


@dataclass
class PosetProduct:
    refs: list
    span: Span = _sp()


@dataclass
class Axis:
    name: str
    unit: str | None
    ref: str | None
    span: Span = _sp()


@dataclass
class Sig:
    f_axes: list | None
    r_axes: list
    span: Span = _sp()


@dataclass
class PointNode:
    values: list
    span: Span = _sp()


@dataclass
class Assign:
    name: str
    expr: object
    span: Span = _sp()


@dataclass
class ENum:
    value: float
    span: Span = _sp()


@dataclass
class EVar:
    name: str
    span: Span = _sp()


@dataclass
class EBin:
    op: str
    left: object
    right: object
    span: Span = _sp()


@dataclass
class KConstant:
    sig: Sig
    points: list
    span: Span = _sp()


@dataclass
class KAffine:
    sig: Sig
    gain: PointNode
    offset: PointNode
    span: Span = _sp()


@dataclass
class KCatalogue:
    sig: Sig
    entries: list
    span: Span = _sp()


@dataclass
class KMap:
    sig: Sig
    assigns: list
    span: Span = _sp()


@dataclass
class KIdentity:
    sig: Sig
    span: Span = _sp()


@dataclass
class KBottom:
    sig: Sig
    span: Span = _sp()


@dataclass
class KTop:
    sig: Sig
    span: Span = _sp()


@dataclass
class KBuiltin:
    fn: str
    numbers: list
    units: list
    span: Span = _sp()


@dataclass
class UPm:
    dp_name: str
    percent: float
    span: Span = _sp()


@dataclass
class UInterval:
    lower_name: str
    upper_name: str
    span: Span = _sp()


@dataclass
class TAtom:
    name: str
    span: Span = _sp()


@dataclass
class TSeries:
    left: object
    right: object
    span: Span = _sp()


@dataclass
class TPar:
    left: object
    right: object
    span: Span = _sp()


@dataclass
class TLoop:
    body: object
    span: Span = _sp()


@dataclass
class StModel:
    name: str
    description: str
    span: Span = _sp()


@dataclass
class StPoset:
    name: str
    expr: object
    span: Span = _sp()


@dataclass
class StDp:
    name: str
    kind: object
    span: Span = _sp()


@dataclass
class StUncertain:
    name: str
    kind: object
    span: Span = _sp()


@dataclass
class StTerm:
    expr: object
    span: Span = _sp()


@dataclass
class Document:
    statements: list
    span: Span = _sp()


@dataclass
class ParseResult:
    document: Document
    diagnostics: list

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


# --- parser -------------------------------------------------------------------


class _ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list):
        self.toks = tokens
        self.i = 0
        self.diags = diagnostics
        self.declared: dict[str, Span] = {}

    def cur(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.cur().text == text and self.cur().kind != "string"

    def _describe(self, tok: Token) -> str:
        return "end of file" if tok.kind == "eof" else repr(tok.text)

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.cur()
        raise _ParseError(Diagnostic("error", message, tok.span))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail("expected %r, found %s" % (text, self._describe(self.cur())))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.cur().kind != kind:
            self.fail("expected %s, found %s" % (what, self._describe(self.cur())))
        return self.advance()

    def expect_name(self, what: str = "a name") -> Token:
        tok = self.cur()
        if tok.kind != "word" or not _NAME_RE.match(tok.text):
            self.fail("expected %s, found %s" % (what, self._describe(tok)))
        if tok.text in RESERVED:
            self.fail("%r is a reserved word" % tok.text)
        return self.advance()

    def expect_unit(self) -> Token:
        tok = self.cur()
        if tok.kind != "word":
            self.fail("expected a unit, found %s" % self._describe(tok))
        return self.advance()

    def expect_num(self) -> tuple[float, Token]:
        tok = self.cur()
        if tok.kind != "num":
            self.fail("expected a number, found %s" % self._describe(tok))
        self.advance()
        return float(tok.text), tok

    def declare(self, tok: Token):
        name = tok.text
        if name in self.declared:
            first = self.declared[name]
            self.diags.append(
                Diagnostic(
                    "error",
                    "duplicate identifier %r (first declared at %d:%d)"
                    % (name, first.line, first.col),
                    tok.span,
                )
            )
        else:
            self.declared[name] = tok.span

    # statements

    def parse_document(self) -> Document:
        statements = []
        first = self.cur()
        while self.cur().kind != "eof":
            tok = self.cur()
            try:
                if tok.text == "model":
                    statements.append(self.parse_model())
                elif tok.text == "poset":
                    statements.append(self.parse_poset())
                elif tok.text == "dp":
                    statements.append(self.parse_dp())
                elif tok.text == "uncertain":
                    statements.append(self.parse_uncertain())
                elif tok.text == "term":
                    statements.append(self.parse_term_stmt())
                else:
                    self.fail(
                        "expected a statement (model, poset, dp, uncertain, term), "
                        "found %s" % self._describe(tok)
                    )
            except _ParseError as e:
                self.diags.append(e.diag)
                self.recover()
        last = self.cur()
        return Document(statements, span=merge_spans(first.span, last.span))

    def recover(self):
        """Skip to the next statement keyword at the start of a line.

        The failure position may already sit on that keyword (a statement
        cut short by the next one); resume there without skipping it.
        Statement parsers always consume their leading keyword first, so
        this cannot loop.
        """
        while self.cur().kind != "eof":
            tok = self.cur()
            if tok.text in KEYWORDS and tok.col == 1:
                return
            self.advance()

    def parse_model(self) -> StModel:
        kw = self.expect("model")
        name = self.expect_name("a model name")
        desc = ""
        end = name
        if self.cur().kind == "string":
            end = self.advance()
            desc = end.text[1:-1]
        return StModel(name.text, desc, span=merge_spans(kw.span, end.span))

    def parse_poset(self) -> StPoset:
        kw = self.expect("poset")
        name = self.expect_name("a poset name")
        self.declare(name)
        self.expect("=")
        expr = self.parse_poset_expr()
        return StPoset(name.text, expr, span=merge_spans(kw.span, expr.span))

    def parse_poset_expr(self):
        tok = self.cur()
        if tok.text == "R":
            start = self.advance()
            self.expect("+")
            self.expect("[")
            unit = self.expect_unit()
            close = self.expect("]")
            return PosetReal(unit.text, span=merge_spans(start.span, close.span))
        if tok.text == "chain":
            start = self.advance()
            self.expect("{")
            labels = [self.parse_elem()]
            while self.at(","):
                self.advance()
                labels.append(self.parse_elem())
            close = self.expect("}")
            return PosetChain(labels, span=merge_spans(start.span, close.span))
        if tok.text == "product":
            start = self.advance()
            self.expect("(")
            refs = [self.expect_name("a poset name").text]
            self.expect(",")
            refs.append(self.expect_name("a poset name").text)
            while self.at(","):
                self.advance()
                refs.append(self.expect_name("a poset name").text)
            close = self.expect(")")
            return PosetProduct(refs, span=merge_spans(start.span, close.span))
        self.fail("expected a poset expression (R+[...], chain, product)")

    def parse_elem(self):
        tok = self.cur()
        if tok.kind == "num":
            self.advance()
            v = float(tok.text)
            return int(v) if v.is_integer() else v
        if tok.kind == "word":
            self.advance()
            return tok.text
        self.fail("expected a chain element, found %s" % self._describe(tok))

    def parse_dp(self) -> StDp:
        kw = self.expect("dp")
        name = self.expect_name("a design problem name")
        self.declare(name)
        self.expect("=")
        kind = self.parse_dp_kind()
        return StDp(name.text, kind, span=merge_spans(kw.span, kind.span))

    def parse_dp_kind(self):
        tok = self.cur()
        if tok.text == "constant":
            start = self.advance()
            sig = self.parse_sig()
            self.expect("{")
            points = [self.parse_point()]
            while self.at(","):
                self.advance()
                points.append(self.parse_point())
            close = self.expect("}")
            return KConstant(sig, points, span=merge_spans(start.span, close.span))
        if tok.text == "affine":
            start = self.advance()
            sig = self.parse_sig()
            self.expect("gain")
            gain = self.parse_point()
            self.expect("offset")
            offset = self.parse_point()
            return KAffine(sig, gain, offset, span=merge_spans(start.span, offset.span))
        if tok.text == "catalogue":
            start = self.advance()
            sig = self.parse_sig()
            self.expect("{")
            entries = []
            while not self.at("}") and self.cur().kind != "eof":
                fpoint = self.parse_point()
                self.expect("->")
                rpoint = self.parse_point()
                entries.append((fpoint, rpoint))
                if self.at(","):
                    self.advance()
                else:
                    break
            close = self.expect("}")
            return KCatalogue(sig, entries, span=merge_spans(start.span, close.span))
        if tok.text == "map":
            start = self.advance()
            sig = self.parse_sig()
            self.expect("{")
            assigns = [self.parse_assign()]
            while self.at(";"):
                self.advance()
                if self.at("}"):
                    break
                assigns.append(self.parse_assign())
            close = self.expect("}")
            return KMap(sig, assigns, span=merge_spans(start.span, close.span))
        if tok.text == "identity":
            start = self.advance()
            sig = self.parse_sig()
            return KIdentity(sig, span=merge_spans(start.span, sig.span))
        if tok.text == "bottom":
            start = self.advance()
            sig = self.parse_sig()
            return KBottom(sig, span=merge_spans(start.span, sig.span))
        if tok.text == "top":
            start = self.advance()
            sig = self.parse_sig()
            return KTop(sig, span=merge_spans(start.span, sig.span))
        if tok.text in ("uid", "invplus_uniform", "invplus_vdc", "invtimes_vdc"):
            return self.parse_builtin()
        self.fail("unknown design problem kind %s" % self._describe(tok))

    def parse_builtin(self) -> KBuiltin:
        fn = self.advance()
        self.expect("(")
        numbers = []
        units = []
        v, _ = self.expect_num()
        numbers.append(v)
        if fn.text == "uid":
            if self.cur().kind == "word":
                units.append(self.expect_unit().text)
        elif fn.text in ("invplus_uniform", "invplus_vdc"):
            if self.at(","):
                self.advance()
                units.append(self.expect_unit().text)
        else:  # invtimes_vdc
            self.expect(",")
            numbers.append(self.expect_num()[0])
            self.expect(",")
            numbers.append(self.expect_num()[0])
            if self.at(","):
                self.advance()
                units.append(self.expect_unit().text)
                self.expect(",")
                units.append(self.expect_unit().text)
                self.expect(",")
                units.append(self.expect_unit().text)
        close = self.expect(")")
        return KBuiltin(fn.text, numbers, units, span=merge_spans(fn.span, close.span))

    def parse_sig(self) -> Sig:
        f_axes = None
        start = self.cur()
        if self.at("F"):
            self.advance()
            self.expect("(")
            f_axes = self.parse_axes()
            self.expect(")")
        r_kw = self.expect("R")
        self.expect("(")
        r_axes = self.parse_axes()
        close = self.expect(")")
        first = start if f_axes is not None else r_kw
        return Sig(f_axes, r_axes, span=merge_spans(first.span, close.span))

    def parse_axes(self) -> list:
        axes = [self.parse_axis()]
        while self.at(","):
            self.advance()
            axes.append(self.parse_axis())
        return axes

    def parse_axis(self) -> Axis:
        name = self.expect_name("an axis name")
        if self.at("["):
            self.advance()
            unit = self.expect_unit()
            close = self.expect("]")
            return Axis(name.text, unit.text, None, span=merge_spans(name.span, close.span))
        if self.at(":"):
            self.advance()
            ref = self.expect_name("a poset name")
            return Axis(name.text, None, ref.text, span=merge_spans(name.span, ref.span))
        self.fail("axis %r needs [unit] or :poset" % name.text)

    def parse_point(self) -> PointNode:
        tok = self.cur()
        if self.at("("):
            start = self.advance()
            values = [self.parse_scalar()]
            while self.at(","):
                self.advance()
                values.append(self.parse_scalar())
            close = self.expect(")")
            return PointNode(values, span=merge_spans(start.span, close.span))
        value = self.parse_scalar()
        return PointNode([value], span=tok.span)

    def parse_scalar(self):
        tok = self.cur()
        if tok.kind == "num":
            self.advance()
            return float(tok.text)
        if tok.text == "inf":
            self.advance()
            return math.inf
        if tok.kind == "word":
            self.advance()
            return tok.text
        self.fail("expected a number, 'inf', or a label, found %s" % self._describe(tok))

    def parse_assign(self) -> Assign:
        name = self.expect_name("an output axis name")
        self.expect("=")
        expr = self.parse_mexpr()
        return Assign(name.text, expr, span=merge_spans(name.span, expr.span))

    def parse_mexpr(self):
        left = self.parse_mterm()
        while self.at("+"):
            self.advance()
            right = self.parse_mterm()
            left = EBin("+", left, right, span=merge_spans(left.span, right.span))
        return left

    def parse_mterm(self):
        left = self.parse_mfactor()
        while self.at("*"):
            self.advance()
            right = self.parse_mfactor()
            left = EBin("*", left, right, span=merge_spans(left.span, right.span))
        return left

    def parse_mfactor(self):
        tok = self.cur()
        if tok.kind == "num":
            self.advance()
            return ENum(float(tok.text), span=tok.span)
        if tok.text in ("max", "min"):
            self.advance()
            self.expect("(")
            left = self.parse_mexpr()
            self.expect(",")
            right = self.parse_mexpr()
            close = self.expect(")")
            return EBin(tok.text, left, right, span=merge_spans(tok.span, close.span))
        if self.at("("):
            self.advance()
            expr = self.parse_mexpr()
            self.expect(")")
            return expr
        if tok.kind == "word" and _NAME_RE.match(tok.text) and tok.text not in RESERVED:
            self.advance()
            return EVar(tok.text, span=tok.span)
        self.fail("expected an expression, found %s" % self._describe(tok))

    def parse_uncertain(self) -> StUncertain:
        kw = self.expect("uncertain")
        name = self.expect_name("an uncertain name")
        self.declare(name)
        self.expect("=")
        tok = self.cur()
        if tok.text == "pm":
            self.advance()
            self.expect("(")
            target = self.expect_name("a design problem name")
            self.expect(",")
            pct, _ = self.expect_num()
            self.expect("%")
            close = self.expect(")")
            kind = UPm(target.text, pct, span=merge_spans(tok.span, close.span))
        elif tok.text == "interval":
            self.advance()
            self.expect("(")
            lo = self.expect_name("a design problem name")
            self.expect(",")
            hi = self.expect_name("a design problem name")
            close = self.expect(")")
            kind = UInterval(lo.text, hi.text, span=merge_spans(tok.span, close.span))
        else:
            self.fail("expected pm(...) or interval(...), found %s" % self._describe(tok))
        return StUncertain(name.text, kind, span=merge_spans(kw.span, kind.span))

    def parse_term_stmt(self) -> StTerm:
        kw = self.expect("term")
        expr = self.parse_texpr()
        return StTerm(expr, span=merge_spans(kw.span, expr.span))

    def parse_texpr(self):
        tok = self.cur()
        if tok.text == "series" or tok.text == "par":
            self.advance()
            self.expect("(")
            left = self.parse_texpr()
            self.expect(",")
            right = self.parse_texpr()
            close = self.expect(")")
            cls = TSeries if tok.text == "series" else TPar
            return cls(left, right, span=merge_spans(tok.span, close.span))
        if tok.text == "loop":
            self.advance()
            self.expect("(")
            body = self.parse_texpr()
            close = self.expect(")")
            return TLoop(body, span=merge_spans(tok.span, close.span))
        name = self.expect_name("a design problem name")
        return TAtom(name.text, span=name.span)


def parse(text: str) -> ParseResult:
    """Parse model text; errors do not abort, they accumulate."""
    diagnostics: list[Diagnostic] = []
    tokens = tokenize(text, diagnostics)
    parser = _Parser(tokens, diagnostics)
    doc = parser.parse_document()
    return ParseResult(doc, diagnostics)


# --- renderer -----------------------------------------------------------------


def _fmt_num(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return repr(float(v))


def _fmt_label(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float):
        return _fmt_num(v)
    return str(v)


def _fmt_point(p: PointNode) -> str:
    parts = [_fmt_num(v) if isinstance(v, float) else str(v) for v in p.values]
    if len(parts) == 1:
        return parts[0]
    return "(%s)" % ", ".join(parts)


def _fmt_axis(a: Axis) -> str:
    if a.ref is not None:
        return "%s:%s" % (a.name, a.ref)
    return "%s[%s]" % (a.name, a.unit)


def _fmt_sig(sig: Sig) -> str:
    out = ""
    if sig.f_axes is not None:
        out += "F(%s) " % ", ".join(_fmt_axis(a) for a in sig.f_axes)
    out += "R(%s)" % ", ".join(_fmt_axis(a) for a in sig.r_axes)
    return out


_PREC = {"+": 1, "*": 2}


def _fmt_expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, ENum):
        return _fmt_num(e.value)
    if isinstance(e, EVar):
        return e.name
    if e.op in ("max", "min"):
        return "%s(%s, %s)" % (e.op, _fmt_expr(e.left), _fmt_expr(e.right))
    prec = _PREC[e.op]
    body = "%s %s %s" % (_fmt_expr(e.left, prec), e.op, _fmt_expr(e.right, prec + 1))
    return "(%s)" % body if prec < parent_prec else body


def _fmt_texpr(t) -> str:
    if isinstance(t, TAtom):
        return t.name
    if isinstance(t, TSeries):
        return "series(%s, %s)" % (_fmt_texpr(t.left), _fmt_texpr(t.right))
    if isinstance(t, TPar):
        return "par(%s, %s)" % (_fmt_texpr(t.left), _fmt_texpr(t.right))
    return "loop(%s)" % _fmt_texpr(t.body)


def _fmt_builtin(k: KBuiltin) -> str:
    if k.fn == "uid":
        inner = _fmt_num(k.numbers[0])
        if k.units:
            inner += " " + k.units[0]
        return "uid(%s)" % inner
    if k.fn in ("invplus_uniform", "invplus_vdc"):
        inner = repr(int(k.numbers[0]))
        if k.units:
            inner += ", " + k.units[0]
        return "%s(%s)" % (k.fn, inner)
    inner = "%d, %s, %s" % (int(k.numbers[0]), _fmt_num(k.numbers[1]), _fmt_num(k.numbers[2]))
    if k.units:
        inner += ", " + ", ".join(k.units)
    return "invtimes_vdc(%s)" % inner


def _render_statement(st) -> str:
    if isinstance(st, StModel):
        if st.description:
            return 'model %s "%s"' % (st.name, st.description)
        return "model %s" % st.name
    if isinstance(st, StPoset):
        e = st.expr
        if isinstance(e, PosetReal):
            body = "R+[%s]" % e.unit
        elif isinstance(e, PosetChain):
            body = "chain {%s}" % ", ".join(_fmt_label(x) for x in e.labels)
        else:
            body = "product(%s)" % ", ".join(e.refs)
        return "poset %s = %s" % (st.name, body)
    if isinstance(st, StDp):
        k = st.kind
        if isinstance(k, KConstant):
            body = "constant %s {%s}" % (
                _fmt_sig(k.sig),
                ", ".join(_fmt_point(p) for p in k.points),
            )
        elif isinstance(k, KAffine):
            body = "affine %s gain %s offset %s" % (
                _fmt_sig(k.sig),
                _fmt_point(k.gain),
                _fmt_point(k.offset),
            )
        elif isinstance(k, KCatalogue):
            rows = ",\n".join(
                "    %s -> %s" % (_fmt_point(f), _fmt_point(r)) for f, r in k.entries
            )
            body = "catalogue %s {\n%s\n}" % (_fmt_sig(k.sig), rows)
        elif isinstance(k, KMap):
            body = "map %s { %s }" % (
                _fmt_sig(k.sig),
                "; ".join("%s = %s" % (a.name, _fmt_expr(a.expr)) for a in k.assigns),
            )
        elif isinstance(k, KIdentity):
            body = "identity %s" % _fmt_sig(k.sig)
        elif isinstance(k, KBottom):
            body = "bottom %s" % _fmt_sig(k.sig)
        elif isinstance(k, KTop):
            body = "top %s" % _fmt_sig(k.sig)
        else:
            body = _fmt_builtin(k)
        return "dp %s = %s" % (st.name, body)
    if isinstance(st, StUncertain):
        k = st.kind
        if isinstance(k, UPm):
            body = "pm(%s, %s%%)" % (k.dp_name, _fmt_num(k.percent))
        else:
            body = "interval(%s, %s)" % (k.lower_name, k.upper_name)
        return "uncertain %s = %s" % (st.name, body)
    if isinstance(st, StTerm):
        return "term %s" % _fmt_texpr(st.expr)
    raise TypeError("not a statement: %r" % (st,))


def render(doc: Document) -> str:
    """Canonical text for a document; parse(render(d)) == d structurally."""
    return "\n".join(_render_statement(st) for st in doc.statements) + "\n"


# --- elaboration --------------------------------------------------------------


@dataclass
class ElaboratedModel:
    """A checked model ready to solve."""

    name: str
    description: str
    posets: dict
    uvaluation: dict
    term: Term
    funsp: Poset
    ressp: Poset
    fnames: list
    rnames: list
    builtin_decls: dict
    atom_spans: dict
    document: Document

    def query_axes(self) -> list:
        return list(zip(self.fnames, self.funsp.factors))

    def build_query(self, assignments: dict):
        """Functionality element from axis-name (or 1-based index) keys.

        Values are numbers (math.inf included) or finite-poset labels;
        every axis must be covered exactly once.
        """
        if self.funsp == UNIT_POSET:
            if assignments:
                raise DomainError("this model takes no functionality arguments")
            return "*"
        axes = self.query_axes()
        slots: list = [None] * len(axes)
        for key, value in assignments.items():
            if isinstance(key, int) or (isinstance(key, str) and key.isdigit()):
                idx = int(key) - 1
                if not 0 <= idx < len(axes):
                    raise DomainError(
                        "axis index %s out of range 1..%d" % (key, len(axes))
                    )
            else:
                hits = [i for i, (n, _) in enumerate(axes) if n == key]
                if not hits:
                    raise DomainError(
                        "unknown axis %r; axes are: %s"
                        % (key, ", ".join(n for n, _ in axes))
                    )
                if len(hits) > 1:
                    raise DomainError(
                        "axis name %r is ambiguous; use its 1-based index" % key
                    )
                idx = hits[0]
            if slots[idx] is not None:
                raise DomainError("axis %r assigned twice" % key)
            slots[idx] = value
        missing = [axes[i][0] for i, v in enumerate(slots) if v is None]
        if missing:
            raise DomainError("missing functionality axes: %s" % ", ".join(missing))
        element = tuple(slots) if len(slots) > 1 else slots[0]
        self.funsp.check_member(element)
        return element

    def override_relaxation(self, atom: str, n: int) -> dict:
        """New valuation with a sampling builtin re-instantiated at n."""
        decl = self.builtin_decls.get(atom)
        if decl is None or decl.fn not in SAMPLING_BUILTINS:
            raise DomainError(
                "%r is not a sampling builtin (invplus_uniform, invplus_vdc, "
                "invtimes_vdc)" % atom
            )
        replaced = KBuiltin(decl.fn, [float(n)] + decl.numbers[1:], decl.units, decl.span)
        out = dict(self.uvaluation)
        out[atom] = _build_builtin(replaced)
        return out


def _build_builtin(k: KBuiltin) -> UncertainDP:
    if k.fn == "uid":
        unit = k.units[0] if k.units else ""
        return relaxations.uid(k.numbers[0], unit)
    n = int(k.numbers[0])
    if n != k.numbers[0] or n < 1:
        raise DomainError("sample count must be a positive integer")
    if k.fn == "invplus_uniform":
        return relaxations.relax_plus_uniform(n, k.units[0] if k.units else "")
    if k.fn == "invplus_vdc":
        return relaxations.relax_plus_vdc(n, k.units[0] if k.units else "")
    units = k.units if k.units else ["", "", ""]
    return relaxations.relax_times_vdc(
        n, k.numbers[1], k.numbers[2], units[0], units[1], units[2]
    )


_BUILTIN_AXIS_NAMES = {
    "uid": (["x"], ["x"]),
    "invplus_uniform": (["f"], ["r1", "r2"]),
    "invplus_vdc": (["f"], ["r1", "r2"]),
    "invtimes_vdc": (["f"], ["r1", "r2"]),
}


class _Elaborator:
    def __init__(self, doc: Document):
        self.doc = doc
        self.diags: list[Diagnostic] = []
        self.posets: dict[str, Poset] = {}
        self.plain_dps: dict[str, DesignProblem] = {}
        self.uvaluation: dict[str, UncertainDP] = {}
        self.axis_names: dict[str, tuple] = {}
        self.builtin_decls: dict[str, KBuiltin] = {}
        self.atom_spans: dict[str, Span] = {}
        self.model_name = ""
        self.model_desc = ""

    def error(self, message: str, span: Span):
        self.diags.append(Diagnostic("error", message, span))

    def run(self) -> ElaboratedModel | None:
        terms = []
        for st in self.doc.statements:
            if isinstance(st, StModel):
                if self.model_name:
                    self.error("model already named %r" % self.model_name, st.span)
                else:
                    self.model_name = st.name
                    self.model_desc = st.description
            elif isinstance(st, StPoset):
                self.do_poset(st)
            elif isinstance(st, StDp):
                self.do_dp(st)
            elif isinstance(st, StUncertain):
                self.do_uncertain(st)
            elif isinstance(st, StTerm):
                terms.append(st)
        if not terms:
            self.error("missing term: a model must declare exactly one", self.doc.span)
            return None
        for extra in terms[1:]:
            self.error("more than one term statement", extra.span)
        checked = self.check_texpr(terms[0].expr)
        if self.has_errors():
            return None
        term, funsp, ressp, fnames, rnames = checked
        return ElaboratedModel(
            name=self.model_name,
            description=self.model_desc,
            posets=self.posets,
            uvaluation=self.uvaluation,
            term=term,
            funsp=funsp,
            ressp=ressp,
            fnames=fnames,
            rnames=rnames,
            builtin_decls=self.builtin_decls,
            atom_spans=self.atom_spans,
            document=self.doc,
        )

    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diags)

    # declarations

    def do_poset(self, st: StPoset):
        e = st.expr
        if isinstance(e, PosetReal):
            self.posets[st.name] = RealPlus(e.unit)
            return
        if isinstance(e, PosetChain):
            try:
                self.posets[st.name] = FinitePoset.chain(e.labels, name=st.name)
            except ValueError as err:
                self.error(str(err), e.span)
            return
        factors = []
        for ref in e.refs:
            p = self.posets.get(ref)
            if p is None:
                self.error("unknown poset %r" % ref, e.span)
                return
            factors.append(p)
        self.posets[st.name] = ProductPoset(factors)

    def space_from_axes(self, axes: list) -> Poset | None:
        parts = []
        for a in axes:
            if a.ref is not None:
                p = self.posets.get(a.ref)
                if p is None:
                    self.error("unknown poset %r" % a.ref, a.span)
                    return None
                if isinstance(p, ProductPoset):
                    self.error(
                        "axis %r must name a scalar poset, %r is a product"
                        % (a.name, a.ref),
                        a.span,
                    )
                    return None
                parts.append(p)
            else:
                parts.append(RealPlus(a.unit))
        return parts[0] if len(parts) == 1 else ProductPoset(parts)

    def point_element(self, node: PointNode, space: Poset, span_ctx: str):
        want = len(space.factors)
        if len(node.values) != want:
            self.error(
                "%s point has %d coordinates, space %s has %d"
                % (span_ctx, len(node.values), space.describe(), want),
                node.span,
            )
            return None
        element = tuple(node.values) if want > 1 else node.values[0]
        try:
            space.check_member(element)
        except DomainError as err:
            self.error(str(err), node.span)
            return None
        return element

    def do_dp(self, st: StDp):
        k = st.kind
        self.atom_spans[st.name] = st.span
        if isinstance(k, KBuiltin):
            try:
                udp = _build_builtin(k)
            except DomainError as err:
                self.error(str(err), k.span)
                return
            self.uvaluation[st.name] = udp
            self.axis_names[st.name] = _BUILTIN_AXIS_NAMES[k.fn]
            self.builtin_decls[st.name] = k
            return
        sig = k.sig
        r_space = self.space_from_axes(sig.r_axes)
        if r_space is None:
            return
        if sig.f_axes is None:
            f_space: Poset | None = UNIT_POSET
            fnames: list = []
        else:
            f_space = self.space_from_axes(sig.f_axes)
            fnames = [a.name for a in sig.f_axes]
        if f_space is None:
            return
        rnames = [a.name for a in sig.r_axes]
        dp = self.build_plain_dp(st.name, k, f_space, r_space, fnames, rnames)
        if dp is None:
            return
        if isinstance(dp, IdentityDP) and sig.f_axes is None:
            # identity without an explicit F(...) mirrors its output axes
            fnames = list(rnames)
        self.plain_dps[st.name] = dp
        self.uvaluation[st.name] = degenerate(dp)
        self.axis_names[st.name] = (fnames, rnames)

    def build_plain_dp(self, name, k, f_space, r_space, fnames, rnames):
        if isinstance(k, KConstant):
            pts = []
            for node in k.points:
                el = self.point_element(node, r_space, "resource")
                if el is None:
                    return None
                pts.append(el)
            return ConstantResource(Antichain(r_space, pts), f_space)
        if isinstance(k, KAffine):
            if not isinstance(f_space, RealPlus):
                self.error(
                    "affine needs a single real functionality axis", k.sig.span
                )
                return None
            width = len(r_space.factors)
            gain = self.scalars_of_width(k.gain, width, "gain")
            offset = self.scalars_of_width(k.offset, width, "offset")
            if gain is None or offset is None:
                return None
            for g in gain:
                if not (math.isfinite(g) and g >= 0):
                    self.error("gains must be finite and nonnegative", k.gain.span)
                    return None

            def fn(f, _g=tuple(gain), _o=tuple(offset), _w=width):
                vals = tuple(o + g * f for g, o in zip(_g, _o))
                return vals if _w > 1 else vals[0]

            return MonotoneMap(f_space, r_space, fn, name=name)
        if isinstance(k, KCatalogue):
            entries = []
            for fnode, rnode in k.entries:
                fe = self.point_element(fnode, f_space, "functionality")
                re_ = self.point_element(rnode, r_space, "resource")
                if fe is None or re_ is None:
                    return None
                entries.append((fe, re_))
            return Catalogue(f_space, r_space, entries, name=name)
        if isinstance(k, KMap):
            return self.build_map_dp(name, k, f_space, r_space, fnames, rnames)
        if isinstance(k, KIdentity):
            if k.sig.f_axes is not None:
                fsp = self.space_from_axes(k.sig.f_axes)
                if fsp is None:
                    return None
                if fsp != r_space:
                    self.error(
                        "identity must have equal sides, got %s and %s"
                        % (fsp.describe(), r_space.describe()),
                        k.sig.span,
                    )
                    return None
            return IdentityDP(r_space)
        if isinstance(k, KBottom):
            return BottomDP(f_space, r_space)
        if isinstance(k, KTop):
            return TopDP(f_space, r_space)
        raise TypeError("unknown dp kind %r" % (k,))

    def scalars_of_width(self, node: PointNode, width: int, what: str):
        if len(node.values) == 1 and width > 1:
            values = node.values * width
        elif len(node.values) != width:
            self.error(
                "%s needs %d values, got %d" % (what, width, len(node.values)),
                node.span,
            )
            return None
        else:
            values = node.values
        out = []
        for v in values:
            if not isinstance(v, float):
                self.error("%s values must be numbers" % what, node.span)
                return None
            out.append(v)
        return out

    def build_map_dp(self, name, k: KMap, f_space, r_space, fnames, rnames):
        if k.sig.f_axes is None:
            self.error("map needs an explicit F(...) signature", k.sig.span)
            return None
        assigned = {}
        for a in k.assigns:
            if a.name not in rnames:
                self.error(
                    "map assigns %r, which is not an output axis" % a.name, a.span
                )
                return None
            if a.name in assigned:
                self.error("output axis %r assigned twice" % a.name, a.span)
                return None
            ok = self.check_expr_vars(a.expr, fnames)
            if not ok:
                return None
            assigned[a.name] = a.expr
        missing = [n for n in rnames if n not in assigned]
        if missing:
            self.error(
                "map leaves output axes unassigned: %s" % ", ".join(missing),
                k.span,
            )
            return None
        exprs = [assigned[n] for n in rnames]
        width = len(r_space.factors)

        def fn(f, _exprs=tuple(exprs), _names=tuple(fnames), _w=width):
            parts = f if isinstance(f, tuple) else (f,)
            env = dict(zip(_names, parts))
            vals = tuple(_eval_expr(e, env) for e in _exprs)
            return vals if _w > 1 else vals[0]

        return MonotoneMap(f_space, r_space, fn, name=name)

    def check_expr_vars(self, e, fnames) -> bool:
        if isinstance(e, EVar):
            if e.name not in fnames:
                self.error(
                    "unknown functionality %r in map expression" % e.name, e.span
                )
                return False
            return True
        if isinstance(e, EBin):
            return self.check_expr_vars(e.left, fnames) and self.check_expr_vars(
                e.right, fnames
            )
        return True

    def do_uncertain(self, st: StUncertain):
        k = st.kind
        self.atom_spans[st.name] = st.span
        if isinstance(k, UPm):
            dp = self.plain_dps.get(k.dp_name)
            if dp is None:
                self.error(
                    "pm needs a plain catalogue, %r is not one" % k.dp_name, k.span
                )
                return
            if not 0 <= k.percent < 100:
                self.error("spread must satisfy 0 <= p < 100", k.span)
                return
            try:
                udp = scale_catalogue(dp, k.percent / 100.0)
            except DomainError as err:
                self.error(str(err), k.span)
                return
            self.uvaluation[st.name] = udp
            self.axis_names[st.name] = self.axis_names[k.dp_name]
            return
        lo = self.plain_dps.get(k.lower_name)
        hi = self.plain_dps.get(k.upper_name)
        if lo is None or hi is None:
            which = k.lower_name if lo is None else k.upper_name
            self.error("interval needs plain design problems, %r is not one" % which, k.span)
            return
        try:
            udp = UncertainDP(lo, hi)
            check_udp(udp)
        except DomainError as err:
            self.error(str(err), k.span)
            return
        self.uvaluation[st.name] = udp
        self.axis_names[st.name] = self.axis_names[k.lower_name]

    # term type checking

    def check_texpr(self, tex):
        if self.has_errors():
            # poset/dp diagnostics already make the model unusable
            return None
        result = self._texpr(tex)
        return result

    def _texpr(self, tex):
        if isinstance(tex, TAtom):
            udp = self.uvaluation.get(tex.name)
            if udp is None:
                self.error("no design problem named %r" % tex.name, tex.span)
                return None
            fnames, rnames = self.axis_names[tex.name]
            return Atom(tex.name), udp.funsp, udp.ressp, list(fnames), list(rnames)
        if isinstance(tex, TSeries):
            left = self._texpr(tex.left)
            right = self._texpr(tex.right)
            if left is None or right is None:
                return None
            lt, lf, lr, lfn, lrn = left
            rt, rf, rr, rfn, rrn = right
            if lr != rf:
                self.error(
                    "series mismatch: left side (%d:%d) produces %s but right "
                    "side consumes %s"
                    % (tex.left.span.line, tex.left.span.col, lr.describe(), rf.describe()),
                    tex.right.span,
                )
                return None
            return Series(lt, rt), lf, rr, lfn, rrn
        if isinstance(tex, TPar):
            left = self._texpr(tex.left)
            right = self._texpr(tex.right)
            if left is None or right is None:
                return None
            lt, lf, lr, lfn, lrn = left
            rt, rf, rr, rfn, rrn = right
            return (
                Par(lt, rt),
                ProductPoset((lf, rf)),
                ProductPoset((lr, rr)),
                lfn + rfn,
                lrn + rrn,
            )
        if isinstance(tex, TLoop):
            body = self._texpr(tex.body)
            if body is None:
                return None
            bt, bf, br, bfn, brn = body
            n = len(br.factors)
            if len(bf.factors) <= n or tuple(bf.factors[-n:]) != tuple(br.factors):
                self.error(
                    "loop mismatch: body functionality %s must end with its "
                    "resources %s (body at %d:%d)"
                    % (
                        bf.describe(),
                        br.describe(),
                        tex.body.span.line,
                        tex.body.span.col,
                    ),
                    tex.span,
                )
                return None
            lead = bf.factors[:-n]
            f1sp = lead[0] if len(lead) == 1 else ProductPoset(lead)
            return Loop(bt), f1sp, br, bfn[: len(lead)], brn
        raise TypeError("not a term expression: %r" % (tex,))


def _eval_expr(e, env: dict) -> float:
    if isinstance(e, ENum):
        return e.value
    if isinstance(e, EVar):
        return env[e.name]
    a = _eval_expr(e.left, env)
    b = _eval_expr(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "*":
        # 0 * inf is 0 here: a zero gain switches a contribution off
        return 0.0 if a == 0 or b == 0 else a * b
    if e.op == "max":
        return max(a, b)
    return min(a, b)


def elaborate(doc: Document) -> tuple[ElaboratedModel | None, list[Diagnostic]]:
    """Build posets, design problems, and the checked term from a parse tree.

    Returns (model, diagnostics); the model is None when any error
    diagnostic was produced.
    """
    el = _Elaborator(doc)
    model = el.run()
    return model, el.diags


def load_model(text: str) -> tuple[ElaboratedModel | None, list[Diagnostic]]:
    """parse + elaborate in one step."""
    result = parse(text)
    if not result.ok:
        return None, result.diagnostics
    model, diags = elaborate(result.document)
    return model, result.diagnostics + diags
