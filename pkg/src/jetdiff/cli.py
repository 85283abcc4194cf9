"""Command line front end.

Subcommands mirror the library: basis / dim / decompose / verify for the
invariant spaces, transition / associated for the matrices, v1 for the
order-1 frame certificate, theta for the threshold audit.  Every
subcommand takes --json for machine-readable output and --golden DIR to
additionally write that JSON to a deterministically named file; JSON is
byte-stable across runs and thread counts (set JETDIFF_JOBS to
parallelize constraint-row construction, output is unchanged).

Exit codes: 0 on success, 1 on a mathematical error (singular Jacobian,
chart breakdown, pole of the bound, weight outside the audited range),
2 on usage errors including expression syntax errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .invariants import (
    InvariantSpace,
    decompose,
    invariant_basis,
    irrep_partition,
    verify_invariance,
)
from .jets import JetSpec
from .invariants import invariance_system
from .linalg import rank as matrix_rank
from .linalg import rank_modular_check
from .parsing import ParseError, parse_map, parse_polynomial
from .transitions import (
    SplittingVerdict,
    TransitionMatrix,
    associated_action,
    contradiction_audit,
    differential_transition,
    s_block_closure,
    splitting_check,
    v1_frame_transition,
)

PROG = "jetdiff"


# ---- small shared helpers ----


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text.strip()!r}", 1, 1) from exc


def _parse_point(text: str, rank: int) -> List[Fraction]:
    parts = [p for p in text.split(",")]
    if len(parts) != rank:
        raise ParseError(f"expected {rank} comma-separated coordinates, got {len(parts)}", 1, 1)
    return [_fraction(p) for p in parts]


def _parse_matrix(text: str) -> List[List[Fraction]]:
    rows = []
    for chunk in text.split(";"):
        rows.append([_fraction(p) for p in chunk.split(",")])
    return rows


def _parse_degree_range(text: str) -> List[int]:
    if ":" in text:
        a, b = text.split(":", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ParseError(f"empty degree range {text!r}", 1, 1)
        return list(range(lo, hi + 1))
    return [int(text)]


def _spec(args) -> JetSpec:
    try:
        return JetSpec(args.rank, args.order, allow_large=args.allow_large)
    except ValueError as exc:
        raise ValueError(str(exc).replace("pass allow_large=True", "pass --allow-large")) from exc


def _space_payload(space: InvariantSpace) -> Dict:
    if space.spec.rank == 2:
        decomposition = [
            {"highest_weight": list(l.highest_weight), "multiplicity": l.multiplicity}
            for l in decompose(space)
        ]
    else:
        decomposition = None
    return {
        "spec": {"rank": space.spec.rank, "order": space.spec.order},
        "weight": space.weight,
        "dimension": space.dimension,
        "basis": [str(q) for q in space.basis],
        "torus_weights": [list(w) for w in space.torus_weights()],
        "decomposition": decomposition,
    }


def _matrix_payload(tm: TransitionMatrix) -> List[List[str]]:
    return [[str(v) for v in row] for row in tm.entries]


def _splitting_payload(verdict: SplittingVerdict) -> Dict:
    return {
        "partition": [
            {"highest_weight": list(label.highest_weight), "indices": list(idxs)}
            for label, idxs in verdict.partition
        ],
        "splits": verdict.splits,
        "witnesses": [
            {"row": w.row, "col": w.col, "value": str(w.value)} for w in verdict.witnesses
        ],
    }


def _emit(args, payload: Dict, human: str, golden_name: str) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if args.json:
        sys.stdout.write(text)
    else:
        sys.stdout.write(human if human.endswith("\n") else human + "\n")
    if args.golden:
        os.makedirs(args.golden, exist_ok=True)
        path = os.path.join(args.golden, golden_name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"golden output written to {path}", file=sys.stderr)


def _digest(*parts: str) -> str:
    h = hashlib.sha256("|".join(parts).encode("utf-8"))
    return h.hexdigest()[:8]


def _format_table(rows: List[List[str]], header: Optional[List[str]] = None) -> str:
    data = ([header] if header else []) + rows
    widths = [max(len(r[i]) for r in data) for i in range(len(data[0]))]
    lines = []
    for r in data:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    if header:
        lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _matrix_human(tm: TransitionMatrix) -> str:
    return _format_table([[str(v) for v in row] for row in tm.entries])


def _label_str(label) -> str:
    return "(" + ",".join(str(x) for x in label.highest_weight) + ")"


# ---- subcommand handlers ----


def _cmd_basis(args) -> int:
    space = invariant_basis(_spec(args), args.weight)
    payload = _space_payload(space)
    lines = [
        f"rank {space.spec.rank}, order {space.spec.order}, weight {space.weight}",
        f"dimension: {space.dimension}",
        "basis:",
    ]
    for q, w in zip(space.basis, space.torus_weights()):
        wstr = "(" + ",".join(str(x) for x in w) + ")"
        lines.append(f"  [{wstr}]  {q}")
    if payload["decomposition"] is not None:
        parts = ", ".join(
            f"{_label_str_from(d['highest_weight'])} x{d['multiplicity']}"
            for d in payload["decomposition"]
        )
        lines.append(f"decomposition: {parts}")
    name = f"basis_r{args.rank}_k{args.order}_m{args.weight}.json"
    _emit(args, payload, "\n".join(lines), name)
    return 0


def _label_str_from(hw: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in hw) + ")"


def _cmd_dim(args) -> int:
    spec = _spec(args)
    system = invariance_system(spec, args.weight)
    exact = matrix_rank(system)
    modular = rank_modular_check(system)
    if modular != exact:
        raise RuntimeError(
            f"modular rank {modular} disagrees with exact rank {exact}"
        )
    dimension = system.ncols - exact
    payload = {
        "spec": {"rank": spec.rank, "order": spec.order},
        "weight": args.weight,
        "num_monomials": system.ncols,
        "system_shape": [system.nrows, system.ncols],
        "system_rank": exact,
        "system_rank_modular": modular,
        "dimension": dimension,
    }
    human = (
        f"rank {spec.rank}, order {spec.order}, weight {args.weight}: "
        f"{system.ncols} monomials, system rank {exact} "
        f"(modular check {modular}), dimension {dimension}"
    )
    name = f"dim_r{args.rank}_k{args.order}_m{args.weight}.json"
    _emit(args, payload, human, name)
    return 0


def _cmd_decompose(args) -> int:
    space = invariant_basis(_spec(args), args.weight)
    labels = decompose(space)
    payload = {
        "spec": {"rank": space.spec.rank, "order": space.spec.order},
        "weight": space.weight,
        "dimension": space.dimension,
        "decomposition": [
            {"highest_weight": list(l.highest_weight), "multiplicity": l.multiplicity}
            for l in labels
        ],
    }
    human = f"dimension {space.dimension} = " + " + ".join(
        f"{_label_str(l)} x{l.multiplicity} (dim {l.dimension()})" for l in labels
    )
    name = f"decompose_r{args.rank}_k{args.order}_m{args.weight}.json"
    _emit(args, payload, human, name)
    return 0


def _cmd_verify(args) -> int:
    spec = _spec(args)
    poly = parse_polynomial(args.poly, spec)
    verdict = verify_invariance(poly, spec)
    payload = {
        "spec": {"rank": spec.rank, "order": spec.order},
        "polynomial": str(poly),
        "invariant": verdict.invariant,
        "weight": verdict.weight,
        "residual": None if verdict.residual is None else str(verdict.residual),
    }
    if verdict.invariant:
        human = f"invariant of weight {verdict.weight}"
    else:
        human = f"not invariant (weight {verdict.weight}); residual: {verdict.residual}"
    name = f"verify_r{args.rank}_k{args.order}_{_digest(args.poly)}.json"
    _emit(args, payload, human, name)
    return 0


def _cmd_transition(args) -> int:
    spec = _spec(args)
    psi = parse_map(args.map, spec.rank, spec.order)
    point = _parse_point(args.point, spec.rank)
    space = invariant_basis(spec, args.weight)
    tm = differential_transition(space, psi, point)
    partition = irrep_partition(space)
    verdict = splitting_check(tm, partition)
    closure = s_block_closure(space, psi, point)
    payload = {
        "spec": {"rank": spec.rank, "order": spec.order},
        "weight": space.weight,
        "psi": str(psi),
        "basepoint": [str(v) for v in point],
        "basis": [str(q) for q in space.basis],
        "matrix": _matrix_payload(tm),
        "splitting": _splitting_payload(verdict),
        "first_order_block_closed": closure.closed,
    }
    lines = [
        f"transition of the weight-{space.weight} invariants under {psi} at "
        f"({', '.join(str(v) for v in point)})",
        _matrix_human(tm).rstrip("\n"),
        "splits: " + ("yes" if verdict.splits else "no"),
    ]
    if not verdict.splits:
        w = verdict.witnesses[0]
        lines.append(
            f"witness: entry ({w.row}, {w.col}) = {w.value} crosses "
            f"from block {_label_str(_block_of(verdict, w.col))} "
            f"into block {_label_str(_block_of(verdict, w.row))}"
        )
    lines.append(
        "pure first-derivative block closed: " + ("yes" if closure.closed else "NO (bug)")
    )
    name = (
        f"transition_r{args.rank}_k{args.order}_m{args.weight}_"
        f"{_digest(args.map, args.point)}.json"
    )
    _emit(args, payload, "\n".join(lines), name)
    return 0


def _block_of(verdict: SplittingVerdict, index: int):
    for label, idxs in verdict.partition:
        if index in idxs:
            return label
    raise ValueError(f"index {index} not in partition")


def _cmd_associated(args) -> int:
    spec = _spec(args)
    g = _parse_matrix(args.matrix)
    space = invariant_basis(spec, args.weight)
    tm = associated_action(g, space)
    payload = {
        "spec": {"rank": spec.rank, "order": spec.order},
        "weight": space.weight,
        "group_element": [[str(v) for v in row] for row in g],
        "basis": [str(q) for q in space.basis],
        "matrix": _matrix_payload(tm),
    }
    human = (
        f"fiberwise action on the weight-{space.weight} invariants\n"
        + _matrix_human(tm).rstrip("\n")
    )
    name = f"associated_r{args.rank}_k{args.order}_m{args.weight}_{_digest(args.matrix)}.json"
    _emit(args, payload, human, name)
    return 0


def _cmd_v1(args) -> int:
    # chart-level computation: derivatives are taken at arbitrary points,
    # so the map must not be truncated about the origin
    psi = parse_map(args.map, 2, 1, truncate=False)
    point = _parse_point(args.point, 2)
    slope = _fraction(args.slope)
    matrix, flag = v1_frame_transition(psi, point, slope)
    payload = {
        "psi": str(psi),
        "point": [str(v) for v in point],
        "slope": str(slope),
        "matrix": [[str(v) for v in row] for row in matrix],
        "uses_second_derivatives": flag,
    }
    human = (
        _format_table([[str(v) for v in row] for row in matrix]).rstrip("\n")
        + "\nsecond derivatives of the coordinate change enter: "
        + ("yes" if flag else "no")
    )
    name = f"v1_{_digest(args.map, args.point, args.slope)}.json"
    _emit(args, payload, human, name)
    return 0


def _cmd_theta(args) -> int:
    degrees = _parse_degree_range(args.d)
    upper = _fraction(args.upper_bound)
    rows = contradiction_audit(degrees, args.m, upper)
    payload = {
        "weight": args.m,
        "upper_bound": str(upper),
        "rows": [
            {
                "degree": r.degree,
                "lower_bound": str(r.lower_bound),
                "lower_bound_decimal": float(r.lower_bound),
                "contradiction": r.contradiction,
            }
            for r in rows
        ],
    }
    table = _format_table(
        [
            [
                str(r.degree),
                str(r.lower_bound),
                f"{float(r.lower_bound):+.6f}",
                str(r.upper_bound),
                "CONTRADICTION" if r.contradiction else "consistent",
            ]
            for r in rows
        ],
        header=["d", "lower", "lower (dec)", "upper", "verdict"],
    )
    name = f"theta_m{args.m}_d{degrees[0]}_{degrees[-1]}.json"
    _emit(args, payload, table, name)
    return 0


# ---- parser wiring ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description=(
            "Exact computation of reparametrization-invariant jet differentials, "
            "their decomposition into irreducibles, and their behavior under "
            "polynomial coordinate changes."
        ),
        epilog=(
            "Set JETDIFF_JOBS=<n> to build constraint rows in a thread pool; "
            "results are byte-identical for any value."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--json", action="store_true", help="emit canonical JSON")
    output.add_argument(
        "--golden",
        metavar="DIR",
        help="also write the canonical JSON to DIR under a deterministic name",
    )

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--rank", type=int, required=True, help="number of curve components")
    shape.add_argument("--order", type=int, required=True, help="jet order")
    shape.add_argument(
        "--allow-large",
        action="store_true",
        help="override the rank<=4, order<=4 guardrail",
    )

    weight = argparse.ArgumentParser(add_help=False)
    weight.add_argument("--weight", type=int, required=True, help="weighted degree")

    p = sub.add_parser(
        "basis",
        parents=[shape, weight, output],
        help="canonical basis of the invariant space, with torus weights",
    )
    p.set_defaults(func=_cmd_basis)

    p = sub.add_parser(
        "dim",
        parents=[shape, weight, output],
        help="dimension via exact elimination, cross-checked modulo large primes",
    )
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser(
        "decompose",
        parents=[shape, weight, output],
        help="irreducible constituents (two components only)",
    )
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser(
        "verify",
        parents=[shape, output],
        help="check one polynomial for invariance under the formal action",
    )
    p.add_argument("--poly", required=True, help="polynomial, e.g. \"f1'*f2'' - f2'*f1''\"")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser(
        "transition",
        parents=[shape, weight, output],
        help="matrix of a polynomial coordinate change on the invariant space",
    )
    p.add_argument("--map", required=True, help='coordinate change, e.g. "w1 = z1; w2 = z2 + z1^2"')
    p.add_argument("--point", required=True, help='basepoint, e.g. "0,0"')
    p.set_defaults(func=_cmd_transition)

    p = sub.add_parser(
        "associated",
        parents=[shape, weight, output],
        help="matrix of the naive fiberwise action of a constant matrix",
    )
    p.add_argument("--matrix", required=True, help='matrix rows, e.g. "1,0;0,1"')
    p.set_defaults(func=_cmd_associated)

    p = sub.add_parser(
        "v1",
        parents=[output],
        help="order-1 frame transition on the direction bundle (two components)",
    )
    p.add_argument("--map", required=True, help='coordinate change, e.g. "w1 = z1; w2 = z2 + z1^2"')
    p.add_argument("--point", required=True, help='base point, e.g. "0,0"')
    p.add_argument("--slope", default="0", help="direction coordinate xi (default 0)")
    p.set_defaults(func=_cmd_v1)

    p = sub.add_parser(
        "theta",
        parents=[output],
        help="exact threshold lower bounds against a splitting upper bound",
    )
    p.add_argument("--d", required=True, help='surface degree or range, e.g. "6:20"')
    p.add_argument("--m", type=int, default=3, help="weight (3, 4 or 5; default 3)")
    p.add_argument(
        "--upper-bound",
        default="-1/3",
        help="upper bound to audit against (default -1/3)",
    )
    p.set_defaults(func=_cmd_theta)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
