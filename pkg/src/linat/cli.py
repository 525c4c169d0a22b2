"""Command line front end: ``linat <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 partial result, 3 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config
from .atm import AtmError, dump, read_file
from .automata import (
    LinearAutomaton,
    PureAutomaton,
    automaton_as_representation,
    check_linear_axioms,
    check_pure_axioms,
    is_faithful,
    representation_as_automaton,
)
from .config import CapExceeded
from .decomp import (
    DecompositionError,
    InvariantFailure,
    complexity,
    compress,
    decompose,
    is_irreducible,
    module_composition_series,
    rewrite_search,
    Node,
)
from .divisor import EXHAUSTED, DivisorWitness, divisor_oracle, verify_witness
from .gfla import DimensionError
from .products import (
    CascadeTriple,
    cascade_failures,
    cascade_pure,
    embed_cascade_in_wreath,
    tri_automata,
    tri_reps,
    wreath_linear_pure,
    wreath_pure,
)
from .semigroups import SemigroupError, composition_series

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL, EXIT_INTERNAL = 0, 1, 2, 3
COUNTER_KEYS = ("op_count", "tri_count", "wr_linear_count", "wr_pure_count", "compress_count", "linear_atoms", "group_atoms")
PRODUCT_KINDS = ("wreath-pure", "tri-rep", "tri-atm", "wreath-linear", "cascade")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as one JSON object")
    common.add_argument("--out", help="write the main output to this file")
    common.add_argument("--cap", help="size caps: an integer or name=value,...")
    common.add_argument("--budget", type=int, help="divisor oracle step budget")
    common.add_argument("--rewrite-budget", type=int, default=0, help="rewrite steps explored by the complexity search")

    p = _Parser(prog="linat", description="Finite pure and linear automata over GF(p): products, decompositions, divisors.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("check", parents=[common], help="parse a file and check the automaton axioms").add_argument("file")
    sub.add_parser("info", parents=[common], help="print default caps and facts about a file").add_argument("file", nargs="?")
    prod = sub.add_parser("product", parents=[common], help="build a product of two automata")
    prod.add_argument("--kind", required=True, choices=PRODUCT_KINDS)
    prod.add_argument("files", nargs="+")
    for name, helptext in (
        ("decompose", "decomposition tree of a faithful linear automaton"),
        ("complexity", "operation and atom counts of the canonical decomposition"),
        ("compress", "compress an irreducible representation"),
        ("series", "composition series of the carrier and of the group"),
    ):
        sub.add_parser(name, parents=[common], help=helptext).add_argument("file")
    div = sub.add_parser("divisor", parents=[common], help="search for (or replay) a divisor witness")
    div.add_argument("claimed")
    div.add_argument("host")
    div.add_argument("--replay", help="verify the witness stored in this file instead of searching")
    return p


# --- reports ---------------------------------------------------------------------


def new_report(command: str, inputs: list[str]) -> dict:
    rep = {"command": command, "inputs": [_digest(f) for f in inputs], "verdict": None}
    rep.update({k: None for k in COUNTER_KEYS})
    rep.update({"atoms": [], "witnesses": [], "details": {}, "timing": {}})
    return rep


def _digest(path: str) -> dict:
    data = Path(path).read_bytes() if Path(path).is_file() else b""
    return {"path": path, "sha256": hashlib.sha256(data).hexdigest()}


def _fill_counters(rep: dict, c) -> None:
    d = c.as_dict()
    for k in COUNTER_KEYS:
        rep[k] = d[k]
    rep["details"]["flip_flops"] = d["flip_flops"]
    rep["details"]["halted"] = d["halted"]
    rep["details"]["lower_bound"] = d["lower_bound"]


def _counter_lines(rep: dict) -> list[str]:
    return [f"{k}: {rep[k]}" for k in COUNTER_KEYS]


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


# --- witness text ------------------------------------------------------------------------


def _mat_line(name: str, m) -> str:
    m = np.asarray(m, dtype=np.int64)
    if m.ndim != 2:
        m = m.reshape(0, 0)
    vals = " ".join(str(int(v)) for v in m.ravel())
    return f"{name} {m.shape[0]} x {m.shape[1]} :" + (f" {vals}" if vals else "")


def witness_text(w: DivisorWitness) -> str:
    lines = [f"witness {w.kind}", "elements " + " ".join(map(str, w.elements)), "eta " + " ".join(map(str, w.eta))]
    for name in ("sub_a", "sub_b", "h_a", "h_b"):
        val = getattr(w, name)
        if w.kind == "linear":
            lines.append(_mat_line(name, val))
        else:
            lines.append(f"{name} " + " ".join(str(int(v)) for v in val))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_witness(text: str) -> DivisorWitness:
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        raw = raw.split("#", 1)[0].strip()
        if not raw:
            continue
        key, _, rest = raw.partition(" ")
        fields[key] = rest.strip()
    if "witness" not in fields:
        raise AtmError("witness file lacks a 'witness' line")
    kind = fields["witness"]

    def ints(s: str) -> list[int]:
        return [int(v) for v in s.split()] if s else []

    def mat(s: str) -> np.ndarray:
        shape, _, body = s.partition(":")
        r, _, c = shape.partition("x")
        return np.array(ints(body), dtype=np.int64).reshape(int(r), int(c))

    parts = {k: (mat(fields.get(k, "0 x 0 :")) if kind == "linear" else ints(fields.get(k, ""))) for k in ("sub_a", "sub_b", "h_a", "h_b")}
    return DivisorWitness(kind, ints(fields.get("elements", "")), ints(fields.get("eta", "")), **parts)


# --- commands -------------------------------------------------------------------------------


def _load(path: str):
    return read_file(path)[1]


def cmd_check(args, rep: dict) -> tuple[int, list[str]]:
    try:
        _, a = read_file(args.file, check=False)
    except AtmError as exc:
        rep["verdict"] = "invalid"
        rep["details"]["error"] = str(exc)
        if getattr(exc, "detail", None) is not None:
            rep["details"]["failures"] = _plain(exc.detail)
        return EXIT_INVALID, [f"invalid: {exc}"]
    r = check_linear_axioms(a) if isinstance(a, LinearAutomaton) else check_pure_axioms(a)
    rep["verdict"] = "valid" if r.valid else "invalid"
    rep["details"].update({"checked": r.checked, "sampled": r.sampled, "failures": _plain(r.failures[:20])})
    lines = [f"{rep['verdict']}: {r.summary()}"]
    lines += [f"  violation {f}" for f in r.failures[:20]]
    return (EXIT_OK if r.valid else EXIT_INVALID), lines


def _facts(a) -> dict:
    g = a.gamma
    facts = {
        "kind": "linear" if isinstance(a, LinearAutomaton) else "pure",
        "order": g.order,
        "zero": g.find_zero(),
        "identity": g.find_identity(),
        "idempotents": len(g.idempotents()),
        "is_group": g.is_group(),
        "faithful": is_faithful(a),
    }
    if isinstance(a, LinearAutomaton):
        facts.update({"field": a.p, "dim_a": a.dim_a, "dim_b": a.dim_b})
        if a.dim_b == 0 and a.dim_a:
            facts["irreducible"] = is_irreducible(a)
    else:
        facts.update({"states": a.n_a, "outputs": a.n_b})
    return facts


def cmd_info(args, rep: dict) -> tuple[int, list[str]]:
    caps = config.get_caps().as_dict()
    rep["details"]["caps"] = caps
    lines = ["caps (override with LINAT_CAP or --cap):"] + [f"  {k} = {v}" for k, v in caps.items()]
    if args.file:
        facts = _facts(_load(args.file))
        rep["details"]["facts"] = facts
        lines += ["automaton:"] + [f"  {k} = {v}" for k, v in facts.items()]
    rep["verdict"] = "ok"
    return EXIT_OK, lines


def _triple_from(control: PureAutomaton, meta: dict, a1: PureAutomaton, a2: PureAutomaton) -> CascadeTriple:
    """Control file: states of the second factor, outputs = alpha, ``meta beta`` = beta."""
    if control.star is None or "beta" not in meta:
        raise AtmError("cascade control file needs outputs (alpha) and a 'meta beta' line")
    beta = [int(v) for v in meta["beta"].split()]
    t = CascadeTriple(control.gamma, control.star.T, beta)
    if t.beta.size and (t.beta.max() >= a2.gamma.order or t.alpha.max() >= a1.gamma.order):
        raise AtmError("cascade triple refers to elements outside the factors")
    if not np.array_equal(control.circ, a2.circ[:, t.beta]):
        raise AtmError("control transitions disagree with the action of beta")
    bad = cascade_failures(t, a1.gamma, a2.circ, a2.gamma)
    if bad:
        raise AtmError(f"cascade conditions fail: {bad[0]}")
    return t


def cmd_product(args, rep: dict) -> tuple[int, list[str]]:
    kind = args.kind
    need = 3 if kind == "cascade" else 2
    if len(args.files) != need:
        raise UsageError(f"product --kind {kind} takes {need} files")
    docs = [read_file(f) for f in args.files]
    autos = [d[1] for d in docs]
    lines = []
    if kind == "wreath-pure":
        out, _ = wreath_pure(*_typed(autos, PureAutomaton, PureAutomaton))
    elif kind == "tri-rep":
        r1, r2 = _typed(autos, LinearAutomaton, LinearAutomaton)
        if not (r1.is_semi and r2.is_semi):
            raise AtmError("tri-rep takes two representations (B = 0)")
        out = representation_as_automaton(tri_reps(automaton_as_representation(r1), automaton_as_representation(r2)))
    elif kind == "tri-atm":
        out = tri_automata(*_typed(autos, LinearAutomaton, LinearAutomaton))
    elif kind == "wreath-linear":
        out = wreath_linear_pure(*_typed(autos, LinearAutomaton, PureAutomaton))
    else:
        a1, a2 = _typed(autos[:2], PureAutomaton, PureAutomaton)
        control = docs[2][1]
        if not isinstance(control, PureAutomaton):
            raise AtmError("cascade control file must be pure")
        t = _triple_from(control, docs[2][0].meta, a1, a2)
        out = cascade_pure(a1, a2, t)
        wit = embed_cascade_in_wreath(out, t, a1, a2)
        rep["witnesses"].append({"claim": "cascade embeds in the wreath product", "status": "verified" if wit.verified else "failed", "element_map": list(map(int, wit.element_map))})
        lines.append(f"embedding into the wreath product: {'verified' if wit.verified else 'FAILED'}")
        if not wit.verified:
            raise InvariantFailure("cascade embedding failed to verify")
    text = dump(out, {"product": kind})
    rep["verdict"] = "ok"
    rep["details"].update({"order": out.gamma.order, "kind": kind})
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        lines.insert(0, f"wrote {args.out} (|Γ| = {out.gamma.order})")
    elif args.json:
        rep["details"]["atm"] = text
    else:
        lines.insert(0, text.rstrip("\n"))
    return EXIT_OK, lines


def _typed(autos, *types):
    for a, t in zip(autos, types):
        if not isinstance(a, t):
            raise AtmError(f"expected a {'linear' if t is LinearAutomaton else 'pure'} automaton")
    return autos


def _tree_report(a, args, rep: dict) -> tuple[int, object, object]:
    if not isinstance(a, LinearAutomaton):
        raise AtmError("decomposition needs a linear automaton")
    tree = decompose(a, args.budget)
    c = complexity(tree)
    _fill_counters(rep, c)
    for leaf in tree.leaves():
        entry = leaf.to_dict()
        if leaf.payload is not None:
            entry["atm"] = dump(leaf.payload)
        rep["atoms"].append(entry)
    for path, node in _node_paths(tree.root):
        for cl in node.claims:
            rep["witnesses"].append({"path": path, "op": node.op, **cl.to_dict()})
    rep["verdict"] = "partial" if tree.partial else "complete"
    if args.rewrite_budget:
        rs = rewrite_search(tree, args.rewrite_budget)
        rep["details"]["rewrite"] = {"op_count": rs.report.op_count, "moves": rs.moves, "explored": rs.explored}
    return (EXIT_PARTIAL if tree.partial else EXIT_OK), tree, c


def _node_paths(root, path: str = "0"):
    if isinstance(root, Node):
        yield path, root
        for i, ch in enumerate(root.children):
            yield from _node_paths(ch, f"{path}.{i}")


def cmd_decompose(args, rep: dict) -> tuple[int, list[str]]:
    code, tree, c = _tree_report(_load(args.file), args, rep)
    lines = [tree.render(), ""] + _counter_lines(rep)
    if rep["details"].get("rewrite"):
        rw = rep["details"]["rewrite"]
        lines.append(f"rewrite search: {rw['op_count']} operations after {len(rw['moves'])} rewrites")
    lines.append(f"verdict: {rep['verdict']}")
    return code, lines


def cmd_complexity(args, rep: dict) -> tuple[int, list[str]]:
    code, tree, c = _tree_report(_load(args.file), args, rep)
    lines = _counter_lines(rep)
    if c.lower_bound:
        lines.append("note: decomposition halted; counts are lower bounds")
    if rep["details"].get("rewrite"):
        lines.append(f"rewrite_min_op_count: {rep['details']['rewrite']['op_count']}")
    lines.append(f"verdict: {rep['verdict']}")
    return code, lines


def cmd_divisor(args, rep: dict) -> tuple[int, list[str]]:
    claimed, host = _load(args.claimed), _load(args.host)
    if args.replay:
        w = parse_witness(Path(args.replay).read_text(encoding="utf-8"))
        res = verify_witness(w, claimed, host)
        rep["verdict"] = "verified" if res.ok else "rejected"
        rep["details"]["locus"] = res.locus
        return (EXIT_OK if res.ok else EXIT_INVALID), [f"witness {rep['verdict']}" + (f": {res.locus}" if res.locus else "")]
    res = divisor_oracle(claimed, host, args.budget)
    rep["verdict"] = res.verdict
    rep["details"].update({"steps": res.steps, "reason": res.reason})
    lines = [f"verdict: {res.verdict}", f"steps: {res.steps}"]
    if res.reason:
        lines.append(f"reason: {res.reason}")
    if res.witness is not None:
        text = witness_text(res.witness)
        rep["witnesses"].append({"claim": "claimed divides host", "status": "verified", "text": text})
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            lines.append(f"witness written to {args.out}")
        else:
            lines.append(text.rstrip("\n"))
    return (EXIT_PARTIAL if res.verdict == EXHAUSTED else EXIT_OK), lines


def cmd_compress(args, rep: dict) -> tuple[int, list[str]]:
    a = _load(args.file)
    if not isinstance(a, LinearAutomaton) or not a.is_semi:
        raise AtmError("compress takes a linear representation (dims A 0)")
    c = compress(a)
    text = dump(c.rep, {"compressed": "1"})
    rep["verdict"] = "ok"
    rep["details"].update({"null": sorted(c.null), "ideal": sorted(c.ideal), "order": c.sigma.order, "adjoined_zero": c.adjoined_zero})
    rep["witnesses"].append({"claim": "compressed module divides the input", "status": "verified" if c.check else "failed", "elements": list(c.witness.elements)})
    lines = [f"U = {sorted(c.null)}", f"V = {sorted(c.ideal)}", f"|Σ| = {c.sigma.order}"]
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        lines.append(f"wrote {args.out}")
    elif args.json:
        rep["details"]["atm"] = text
    else:
        lines.append(text.rstrip("\n"))
    return EXIT_OK, lines


def cmd_series(args, rep: dict) -> tuple[int, list[str]]:
    a = _load(args.file)
    lines = []
    if isinstance(a, LinearAutomaton):
        for side, d, mats in (("A", a.dim_a, a.sigma), ("B", a.dim_b, a.sigma_p)):
            r = LinearAutomaton(a.p, d, 0, a.gamma, mats)
            chain = module_composition_series(r)
            rep["details"][f"series_{side}"] = [s.basis.tolist() for s in chain]
            lines.append(f"{side}: length {len(chain) - 1}")
            lines += [f"  dim {s.dim}: {s.basis.tolist()}" for s in chain[1:]]
    if a.gamma.is_group():
        gs = composition_series(a.gamma)
        rep["details"]["group_series"] = [sorted(s) for s in gs]
        lines.append(f"group: length {len(gs) - 1}, orders {[len(s) for s in gs]}")
    rep["verdict"] = "ok"
    return EXIT_OK, lines


COMMANDS = {
    "check": cmd_check,
    "info": cmd_info,
    "product": cmd_product,
    "decompose": cmd_decompose,
    "complexity": cmd_complexity,
    "divisor": cmd_divisor,
    "compress": cmd_compress,
    "series": cmd_series,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    saved = config.get_caps()
    inputs = [f for f in (getattr(args, "file", None), getattr(args, "claimed", None), getattr(args, "host", None)) if f]
    inputs += list(getattr(args, "files", []) or [])
    rep = new_report(args.command, inputs)
    start = time.perf_counter()
    try:
        if args.cap:
            config.set_caps(config.parse_caps(args.cap, saved))
        code, lines = COMMANDS[args.command](args, rep)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INVALID
    except (InvariantFailure, AssertionError) as exc:
        code, lines = EXIT_INTERNAL, [f"internal invariant failure: {exc}"]
        rep["verdict"] = "internal-error"
    except CapExceeded as exc:
        code, lines = EXIT_PARTIAL, [f"cap exceeded: {exc}"]
        rep["verdict"] = "cap-exceeded"
    except (AtmError, DecompositionError, DimensionError, SemigroupError, ValueError, OSError) as exc:
        code, lines = EXIT_INVALID, [f"invalid input: {exc}"]
        rep["verdict"] = "invalid"
        rep["details"]["error"] = str(exc)
    finally:
        config.set_caps(saved)
    rep["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    rep["exit_code"] = code
    if args.json:
        text = json.dumps(_plain(rep), indent=2)
    else:
        text = "\n".join(lines)
    if args.out and args.command not in ("product", "compress", "divisor"):
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=stdout)
    return code


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # output piped into e.g. head; silence the flush at interpreter exit
        sys.stdout = open(os.devnull, "w")
        code = EXIT_OK
    sys.exit(code)
