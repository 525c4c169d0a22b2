"""Reading and writing ``.atm`` automaton files.

One automaton per file, one directive per line::

    format 1
    kind linear
    field 2
    dims 1 1
    semigroup cayley 2 : 0 1 1 1
    identity 0
    label 1 z
    act 0 : 1 x 1 : 1 ; 1 x 1 : 0 ; 1 x 1 : 1
    act 1 : 1 x 1 : 0 ; 1 x 1 : 0 ; 1 x 1 : 0

Pure files give ``act i : circ... | star...`` (the star part only when B is
nonempty).  ``semigroup generators : k`` replaces the Cayley table with ``k``
lines ``gen j : ...`` carrying the same payload as ``act``; the semigroup is
then the closure of the generators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .automata import (
    LinearAutomaton,
    PureAutomaton,
    check_linear_axioms,
    check_pure_axioms,
    linear_from_generators,
    pure_from_generators,
)
from .gfla import is_prime
from .semigroups import FiniteSemigroup, NotAssociativeError, SemigroupError

FORMAT_VERSION = 1
_TOKEN = re.compile(r"[:;|]|[^\s:;|]+")


class AtmError(ValueError):
    pass


class AtmSyntaxError(AtmError):
    def __init__(self, line: int, col: int, message: str, expected: str = ""):
        text = f"line {line}, column {col}: {message}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)
        self.line = line
        self.col = col
        self.expected = expected


class AtmSemanticError(AtmError):
    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail


@dataclass
class AtmDocument:
    kind: str
    dims: tuple[int, int]
    p: int | None = None
    cayley: np.ndarray | None = None
    generators: list | None = None
    zero: int | None = None
    identity: int | None = None
    labels: dict[int, str] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)
    acts: dict[int, object] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtmDocument):
            return NotImplemented
        return emit_atm(self) == emit_atm(other)

    @property
    def order(self) -> int | None:
        return None if self.cayley is None else int(self.cayley.shape[0])

    def semigroup(self) -> FiniteSemigroup:
        labels = None
        if self.labels:
            labels = [self.labels.get(i, str(i)) for i in range(self.order)]
        try:
            return FiniteSemigroup(self.cayley, zero=self.zero, identity=self.identity, labels=labels)
        except NotAssociativeError as exc:
            raise AtmSemanticError(f"Cayley table is not associative: {exc}", getattr(exc, "triple", None)) from exc
        except SemigroupError as exc:
            raise AtmSemanticError(str(exc)) from exc

    def automaton(self):
        """Build the automaton; raises AtmSemanticError on invalid data."""
        if self.generators is not None:
            return self._from_generators()
        g = self.semigroup()
        n = g.order
        missing = [i for i in range(n) if i not in self.acts]
        if missing:
            raise AtmSemanticError(f"no act line for element {missing[0]}")
        try:
            if self.kind == "linear":
                da, db = self.dims
                mats = np.array([_block(self.acts[i], da, db) for i in range(n)], dtype=np.int64).reshape(n, da + db, da + db)
                return LinearAutomaton(self.p, da, db, g, mats % self.p)
            na, nb = self.dims
            circ = np.array([self.acts[i][0] for i in range(n)], dtype=np.int64).reshape(n, na).T
            if nb:
                star = np.array([self.acts[i][1] for i in range(n)], dtype=np.int64).reshape(n, na).T
                return PureAutomaton(g, circ, star, nb)
            return PureAutomaton(g, circ)
        except SemigroupError as exc:
            raise AtmSemanticError(str(exc)) from exc

    def _from_generators(self):
        try:
            if self.kind == "linear":
                da, db = self.dims
                return linear_from_generators(self.p, da, db, [_block(gv, da, db) for gv in self.generators])
            na, nb = self.dims
            circ = [gv[0] for gv in self.generators]
            star = [gv[1] for gv in self.generators] if nb else None
            return pure_from_generators(na, circ, star, nb)
        except SemigroupError as exc:
            raise AtmSemanticError(str(exc)) from exc


def _block(triple, da: int, db: int) -> np.ndarray:
    sigma, phi, sigma_p = triple
    m = np.zeros((da + db, da + db), dtype=np.int64)
    m[:da, :da] = sigma
    m[:da, da:] = phi
    m[da:, da:] = sigma_p
    return m


# --- parsing --------------------------------------------------------------------------


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]
        self.pos = 0
        self.end_col = len(text) + 1

    def error(self, message: str, expected: str = "") -> AtmSyntaxError:
        col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else self.end_col
        return AtmSyntaxError(self.number, col, message, expected)

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self, expected: str) -> str:
        if self.pos >= len(self.tokens):
            raise self.error("unexpected end of line", expected)
        tok = self.tokens[self.pos][0]
        self.pos += 1
        return tok

    def expect(self, literal: str) -> None:
        tok = self.peek()
        if tok != literal:
            raise self.error(f"unexpected {tok!r}" if tok else "unexpected end of line", repr(literal))
        self.pos += 1

    def integer(self, what: str, minimum: int = 0) -> int:
        tok = self.peek()
        if tok is None or not re.fullmatch(r"-?\d+", tok):
            raise self.error(f"unexpected {tok!r}" if tok else "unexpected end of line", what)
        val = int(tok)
        if val < minimum:
            raise self.error(f"{what} must be at least {minimum}")
        self.pos += 1
        return val

    def done(self) -> None:
        if self.pos < len(self.tokens):
            raise self.error(f"unexpected {self.peek()!r}", "end of line")

    def rest_integers(self, what: str, stop: tuple[str, ...] = ()) -> list[int]:
        out = []
        while self.peek() is not None and self.peek() not in stop:
            out.append(self.integer(what))
        return out


def _matrix(line: _Line) -> np.ndarray:
    tok = line.peek()
    m = re.fullmatch(r"(\d+)x(\d+)", tok or "")
    if m:
        line.pos += 1
        rows, cols = int(m.group(1)), int(m.group(2))
    else:
        rows = line.integer("row count")
        line.expect("x")
        cols = line.integer("column count")
    line.expect(":")
    start = line.pos
    vals = line.rest_integers("matrix entry", stop=(";", "|"))
    if len(vals) != rows * cols:
        line.pos = start
        raise line.error(f"matrix {rows} x {cols} needs {rows * cols} entries, got {len(vals)}")
    if line.peek() == ";":
        line.pos += 1
    return np.array(vals, dtype=np.int64).reshape(rows, cols)


def _payload(line: _Line, kind: str, dims: tuple[int, int]):
    if kind == "linear":
        da, db = dims
        shapes = [(da, da), (da, db), (db, db)]
        out = []
        for name, shape in zip(("sigma", "phi", "sigma'"), shapes):
            start = line.pos
            mat = _matrix(line)
            if mat.shape != shape:
                line.pos = start
                raise line.error(f"{name} block has shape {mat.shape[0]} x {mat.shape[1]}", f"{shape[0]} x {shape[1]}")
            out.append(mat)
        line.done()
        return tuple(out)
    na, nb = dims
    circ = line.rest_integers("state", stop=("|",))
    if len(circ) != na:
        raise line.error(f"transition row has {len(circ)} entries", f"{na} states")
    star: list[int] = []
    if nb:
        line.expect("|")
        star = line.rest_integers("output")
        if len(star) != na:
            raise line.error(f"output row has {len(star)} entries", f"{na} outputs")
    line.done()
    return circ, star


def parse_atm(text: str) -> AtmDocument:
    """Parse a document; syntax errors carry line and column."""
    header: dict[str, object] = {}
    doc: AtmDocument | None = None
    gen_count: int | None = None
    gens: dict[int, object] = {}

    def need(line: _Line, *keys):
        for k in keys:
            if k not in header:
                raise line.error(f"'{k}' must come before this line")

    def start_doc(line: _Line) -> AtmDocument:
        nonlocal doc
        if doc is None:
            need(line, "format", "kind", "dims")
            if header["kind"] == "linear":
                need(line, "field")
            doc = AtmDocument(header["kind"], header["dims"], header.get("field"))
        return doc

    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        line = _Line(number, body)
        word = line.peek()
        if word is None:
            continue
        line.pos += 1
        if word == "format":
            v = line.integer("format version", 1)
            if v != FORMAT_VERSION:
                line.pos -= 1
                raise line.error(f"unsupported format version {v}", str(FORMAT_VERSION))
            line.done()
            header["format"] = v
        elif word == "kind":
            k = line.next("pure or linear")
            if k not in ("pure", "linear"):
                line.pos -= 1
                raise line.error(f"unknown kind {k!r}", "pure or linear")
            line.done()
            header["kind"] = k
        elif word == "field":
            p = line.integer("prime", 2)
            if not is_prime(p):
                line.pos -= 1
                raise line.error(f"{p} is not prime", "a prime")
            line.done()
            header["field"] = p
        elif word == "dims":
            a = line.integer("dimension of A")
            b = line.integer("dimension of B")
            line.done()
            header["dims"] = (a, b)
        elif word == "semigroup":
            d = start_doc(line)
            form = line.next("cayley or generators")
            if form == "cayley":
                n = line.integer("order", 1)
                line.expect(":")
                vals = line.rest_integers("element index")
                if len(vals) != n * n:
                    raise line.error(f"Cayley table of order {n} needs {n * n} entries, got {len(vals)}")
                if any(v >= n for v in vals):
                    raise line.error("Cayley table entry out of range", f"indices below {n}")
                d.cayley = np.array(vals, dtype=np.int64).reshape(n, n)
            elif form == "generators":
                line.expect(":")
                gen_count = line.integer("generator count", 1)
                line.done()
                d.generators = []
            else:
                line.pos -= 1
                raise line.error(f"unknown semigroup form {form!r}", "cayley or generators")
        elif word in ("zero", "identity"):
            d = start_doc(line)
            setattr(d, word, line.integer("element index"))
            line.done()
        elif word == "label":
            d = start_doc(line)
            i = line.integer("element index")
            name = line.next("label")
            line.done()
            d.labels[i] = name
        elif word == "meta":
            d = start_doc(line)
            key = line.next("meta key")
            vals = []
            while line.peek() is not None:
                vals.append(line.next("value"))
            d.meta[key] = " ".join(vals)
        elif word in ("act", "gen"):
            d = start_doc(line)
            i = line.integer("element index")
            line.expect(":")
            if word == "act":
                if d.cayley is None:
                    raise line.error("act lines need a Cayley semigroup block first")
                if i >= d.cayley.shape[0]:
                    line.pos -= 2
                    raise line.error(f"element {i} out of range")
                if i in d.acts:
                    raise line.error(f"duplicate act line for element {i}")
                d.acts[i] = _payload(line, d.kind, d.dims)
            else:
                if gen_count is None:
                    raise line.error("gen lines need 'semigroup generators' first")
                if i >= gen_count or i in gens:
                    raise line.error(f"bad generator index {i}")
                gens[i] = _payload(line, d.kind, d.dims)
        else:
            line.pos -= 1
            raise line.error(f"unknown directive {word!r}", "format, kind, field, dims, semigroup, zero, identity, label, meta, act or gen")
    last = len(text.splitlines()) + 1
    if doc is None:
        raise AtmSyntaxError(last, 1, "missing semigroup block", "semigroup")
    if doc.cayley is None and doc.generators is None:
        raise AtmSyntaxError(last, 1, "missing semigroup block", "semigroup")
    if doc.generators is not None:
        if len(gens) != gen_count:
            raise AtmSyntaxError(last, 1, f"expected {gen_count} gen lines, got {len(gens)}")
        doc.generators = [gens[i] for i in range(gen_count)]
    return doc


def load(text: str, check: bool = True):
    """Parse, build and (optionally) check the axioms; returns (document, automaton)."""
    doc = parse_atm(text)
    a = doc.automaton()
    if check:
        rep = check_linear_axioms(a) if isinstance(a, LinearAutomaton) else check_pure_axioms(a)
        if not rep.valid:
            raise AtmSemanticError(f"axioms fail: {rep.summary()}", rep.failures)
    return doc, a


def read_file(path, check: bool = True):
    with open(path, encoding="utf-8") as fh:
        return load(fh.read(), check)


# --- emission --------------------------------------------------------------------------


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in np.asarray(values).ravel())


def _mat_text(m: np.ndarray) -> str:
    m = np.asarray(m)
    body = _ints(m)
    return f"{m.shape[0]} x {m.shape[1]} :" + (f" {body}" if body else "")


def _payload_text(kind: str, payload) -> str:
    if kind == "linear":
        return " ; ".join(_mat_text(m) for m in payload)
    circ, star = payload
    text = _ints(circ)
    if len(star):
        text += " | " + _ints(star)
    return text


def emit_atm(doc: AtmDocument) -> str:
    """Canonical text: fixed directive order, single spaces, sorted blocks."""
    out = [f"format {doc.version}", f"kind {doc.kind}"]
    if doc.kind == "linear":
        out.append(f"field {doc.p}")
    out.append(f"dims {doc.dims[0]} {doc.dims[1]}")
    if doc.generators is not None:
        out.append(f"semigroup generators : {len(doc.generators)}")
    else:
        n = doc.cayley.shape[0]
        out.append(f"semigroup cayley {n} : {_ints(doc.cayley)}")
    if doc.zero is not None:
        out.append(f"zero {doc.zero}")
    if doc.identity is not None:
        out.append(f"identity {doc.identity}")
    for i in sorted(doc.labels):
        out.append(f"label {i} {doc.labels[i]}")
    for k in sorted(doc.meta):
        out.append(f"meta {k} {doc.meta[k]}".rstrip())
    if doc.generators is not None:
        for i, gv in enumerate(doc.generators):
            out.append(f"gen {i} : {_payload_text(doc.kind, gv)}")
    for i in sorted(doc.acts):
        out.append(f"act {i} : {_payload_text(doc.kind, doc.acts[i])}")
    return "\n".join(out) + "\n"


def from_automaton(a, meta: dict[str, str] | None = None) -> AtmDocument:
    """Document in Cayley form for an automaton; semigroup labels are kept."""
    g = a.gamma
    labels = {}
    if g.labels:
        labels = {i: str(g.label(i)).replace(" ", "_") for i in range(g.order) if str(g.label(i)) != str(i)}
    if isinstance(a, LinearAutomaton):
        da, db = a.dim_a, a.dim_b
        acts = {i: (a.mats[i][:da, :da].copy(), a.mats[i][:da, da:].copy(), a.mats[i][da:, da:].copy()) for i in range(g.order)}
        doc = AtmDocument("linear", (da, db), a.p)
    else:
        acts = {i: (a.circ[:, i].tolist(), [] if a.star is None else a.star[:, i].tolist()) for i in range(g.order)}
        doc = AtmDocument("pure", (a.n_a, a.n_b))
    doc.cayley = np.array(g.table, dtype=np.int64)
    doc.zero = g.zero
    doc.identity = g.identity
    doc.labels = labels
    doc.meta = dict(meta or {})
    doc.acts = acts
    return doc


def dump(a, meta: dict[str, str] | None = None) -> str:
    return emit_atm(from_automaton(a, meta))
