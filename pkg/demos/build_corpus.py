"""Write the .atm files used by the CLI tests into tests/corpus/."""

from pathlib import Path

from linat.atm import dump
from linat.automata import PureAutomaton, flip_flop_automaton, universal_linear
from linat.samples import b2_natural, c3_on_gf2, gl22, s3_gf7, unipotent, unitriangular
from linat.semigroups import cyclic_group

OUT = Path(__file__).resolve().parent.parent / "tests" / "corpus"


def corpus() -> dict[str, str]:
    files = {}
    files["s3gf7.atm"] = dump(s3_gf7(), {"note": "S3 on its 2-dim module over GF(7)"})
    files["gl22.atm"] = dump(gl22(), {"note": "S3 = GL(2,2) on GF(2)^2"})
    files["atom.atm"] = dump(c3_on_gf2(), {"note": "C3 acting irreducibly on GF(2)^2"})
    files["c3zero.atm"] = dump(c3_on_gf2(True))
    files["b2.atm"] = dump(b2_natural())
    files["b2x3.atm"] = dump(b2_natural(3))
    files["universal211.atm"] = dump(universal_linear(2, 1, 1))
    files["unitri.atm"] = dump(unitriangular())
    files["unipotent.atm"] = dump(unipotent())
    files["flipflop2.atm"] = dump(flip_flop_automaton(2))
    files["flipflop3.atm"] = dump(flip_flop_automaton(3))
    c2 = cyclic_group(2)
    files["c2regular.atm"] = dump(PureAutomaton(c2, c2.table))
    # cascade of two flip-flops driven by a parallel triple: control states are those of the second factor
    ff = flip_flop_automaton(2)
    control = PureAutomaton(ff.gamma, ff.circ, [[0, 1], [0, 1]], 2)
    files["cascade_control.atm"] = dump(control, {"beta": "0 1"})
    files["badtable.atm"] = (
        "format 1\nkind pure\ndims 1 0\n"
        "semigroup cayley 3 : 0 1 2 2 2 2 0 0 0\n"
        "act 0 : 0\nact 1 : 0\nact 2 : 0\n"
    )
    files["badaxiom.atm"] = (
        "format 1\nkind pure\ndims 2 0\n"
        "semigroup cayley 2 : 0 0 0 0\n"
        "act 0 : 0 1\nact 1 : 1 0\n"
    )
    return files


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, text in corpus().items():
        (OUT / name).write_text(text, encoding="utf-8")
        print(name)


if __name__ == "__main__":
    main()
