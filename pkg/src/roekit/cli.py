"""Command-line driver: roe gen|iso|extract|goal|selftest.

Every command is deterministic given its seed arguments and writes
byte-stable JSON/CSV (17-significant-digit floats, sorted keys). Exit
codes: 0 success, 1 input or format error, 2 extraction failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import selftest
from .errors import ExtractionFailed, InvalidParams, RoeError
from .generators import (
    cycle_space,
    grid_space,
    path_space,
    random_bce,
    random_geometric_space,
    random_phases,
    regular_graph_space,
    tree_space,
)
from .iso import SpatialIsomorphism, from_bijection, perturb, random_local_unitary
from .operator import read_matrix, write_matrix
from .rigidity import ExtractParams, extract
from .serialize import dumps_canonical, format_float, write_canonical, write_csv
from .space import (
    CoarseMap,
    expansion_profile,
    growth,
    load_space,
    save_space,
)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise InvalidParams(f"bad grid {text!r}: {exc}") from exc
    if not values:
        raise InvalidParams(f"grid {text!r} is empty")
    return values


def _gen_space(kind: str, params: list[str], seed: int):
    def ints(n):
        if len(params) != n:
            raise InvalidParams(f"{kind} expects {n} parameter(s)")
        return [int(p) for p in params]

    if kind == "path":
        return path_space(*ints(1))
    if kind == "cycle":
        return cycle_space(*ints(1))
    if kind == "grid":
        return grid_space(*ints(2))
    if kind == "tree":
        return tree_space(*ints(2))
    if kind == "random-geometric":
        if len(params) != 2:
            raise InvalidParams("random-geometric expects N THRESHOLD")
        return random_geometric_space(int(params[0]), float(params[1]), seed)
    if kind == "expander-sample":
        if len(params) != 2:
            raise InvalidParams("expander-sample expects N DEGREE")
        return regular_graph_space(int(params[0]), int(params[1]), seed)
    raise InvalidParams(f"unknown space kind {kind!r}")


def cmd_gen(args) -> int:
    space, edges = _gen_space(args.kind, args.params, args.seed)
    save_space(space, args.out, edges=edges)
    print(f"wrote {args.out}: {space.label} with {len(space)} points")
    for r in range(1, 6):
        print(f"growth(r={r}) = {growth(space, r)}")
    return 0


def _iso_paths(prefix: str) -> tuple[str, str]:
    if prefix.endswith(".iso.json"):
        prefix = prefix[: -len(".iso.json")]
    return prefix + ".iso.json", prefix + ".op"


def save_iso(iso: SpatialIsomorphism, prefix: str, source_space_path: str,
             target_space_path: str, provenance: dict):
    sidecar, matrix_path = _iso_paths(prefix)
    write_matrix(matrix_path, iso.u)
    base = os.path.dirname(os.path.abspath(sidecar))
    write_canonical(sidecar, {
        "schema": "roe-iso/1",
        "matrix": os.path.basename(matrix_path),
        "source_space": os.path.relpath(os.path.abspath(source_space_path), base),
        "target_space": os.path.relpath(os.path.abspath(target_space_path), base),
        "provenance": provenance,
    })


def load_iso(prefix: str) -> tuple[SpatialIsomorphism, dict]:
    import json

    sidecar, matrix_path = _iso_paths(prefix)
    with open(sidecar, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != "roe-iso/1":
        raise InvalidParams(f"{sidecar}: unexpected schema {doc.get('schema')!r}")
    base = os.path.dirname(os.path.abspath(sidecar))
    source = load_space(os.path.join(base, doc["source_space"]))
    target = load_space(os.path.join(base, doc["target_space"]))
    u = read_matrix(os.path.join(base, doc["matrix"]))
    return SpatialIsomorphism(source, target, u), doc.get("provenance", {})


def _named_bijection(space, name: str) -> CoarseMap:
    if name == "identity":
        return CoarseMap(space, space, {p: p for p in space.points})
    if name == "reversal":
        pts = space.points
        return CoarseMap(space, space,
                         {p: pts[len(pts) - 1 - i] for i, p in enumerate(pts)})
    import json

    with open(name, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    table = {}
    index = {str(p): p for p in space.points}
    for k, v in raw.items():
        table[index[str(k)]] = index[str(v)]
    return CoarseMap(space, space, table)


def cmd_iso(args) -> int:
    space = load_space(args.space)
    provenance: dict = {"seed": args.seed}
    if args.random_bce is not None:
        f = random_bce(space, args.random_bce, seed=args.seed)
        provenance["displacement"] = args.random_bce
    else:
        f = _named_bijection(space, args.bijection)
        provenance["bijection"] = args.bijection
    provenance["f"] = {str(k): v for k, v in f.table.items()}

    phases = None
    if args.phases == "random":
        phases = random_phases(space, seed=args.seed + 1)
        provenance["phases"] = {str(p): [v.real, v.imag]
                                for p, v in phases.items()}
    iso = from_bijection(f, phases)
    provenance["kind"] = "bijection"
    if args.perturb is not None:
        w = random_local_unitary(space, args.perturb, seed=args.seed + 2)
        iso = perturb(iso, w)
        provenance["kind"] = "perturbed"
        provenance["radius"] = args.perturb
    save_iso(iso, args.out, args.space, args.space, provenance)
    prof = expansion_profile(f, [1, 2, 3, 4, 5])
    print(f"wrote {_iso_paths(args.out)[0]} ({provenance['kind']})")
    for r, s in prof.as_sorted_items():
        print(f"expansion(r={r:g}) = {s:g}")
    return 0


def _out_paths(out: str, default_name: str) -> str:
    if out.endswith(".json") or out.endswith(".csv"):
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_name)


def _extract_params(args) -> ExtractParams:
    return ExtractParams(
        strategy=args.strategy,
        eps_grid=_parse_grid(args.eps),
        m_grid=_parse_grid(args.m),
        r_grid=_parse_grid(args.r),
        delta=args.delta,
        seed=args.seed,
    )


def _config_doc(args, provenance) -> dict:
    return {
        "schema": "roe-config/1",
        "iso": args.iso,
        "strategy": args.strategy,
        "eps_grid": list(_parse_grid(args.eps)),
        "m_grid": list(_parse_grid(args.m)),
        "r_grid": list(_parse_grid(args.r)),
        "delta": args.delta,
        "seed": args.seed,
        "provenance": provenance,
    }


def cmd_extract(args) -> int:
    iso, provenance = load_iso(args.iso)
    params = _extract_params(args)
    cert_path = _out_paths(args.out, "certificate.json")
    config_path = os.path.join(os.path.dirname(cert_path) or ".", "config.json")
    write_canonical(config_path, _config_doc(args, provenance))
    try:
        cert = extract(iso, params)
    except ExtractionFailed as exc:
        doc = {
            "schema": "roe-cert/1",
            "h": None,
            "params": {"strategy": params.strategy, "delta": params.delta,
                       "seed": params.seed},
            "verified": False,
            "failures": [str(exc)],
            "failure": {"stage": exc.stage, "witness": exc.witness,
                        "attempts": exc.residuals.get("attempts", [])},
        }
        write_canonical(cert_path, doc)
        print(f"extraction failed at stage {exc.stage}; "
              f"witness {exc.witness}", file=sys.stderr)
        return 2
    doc = cert.to_jsonable()
    truth = provenance.get("f")
    if truth is not None:
        f_true = CoarseMap(iso.source, iso.target, {
            p: _coerce_point(truth[str(p)], iso.target) for p in iso.source.points
        })
        from .space import closeness

        doc["truth"] = {
            "closeness_h_truth": closeness(cert.h, f_true),
            "radius": provenance.get("radius", 0.0),
            "seed": provenance.get("seed", 0),
        }
    write_canonical(cert_path, doc)
    if args.format == "json":
        sys.stdout.write(dumps_canonical(doc))
    else:
        print(f"wrote {cert_path}")
        print(f"params: {cert.params}")
        print(f"closeness(h, f_raw) = {format_float(cert.closeness_h_f)}")
        print(f"goal residual = {format_float(cert.goal_residual)}")
        if "truth" in doc:
            print("closeness(h, f_true) = "
                  f"{format_float(doc['truth']['closeness_h_truth'])}")
        print(f"verified = {cert.verified}")
    return 0


def _coerce_point(raw, space):
    if space.contains(raw):
        return raw
    try:
        as_int = int(raw)
    except (TypeError, ValueError):
        return raw
    return as_int if space.contains(as_int) else raw


def cmd_goal(args) -> int:
    from .iso import SetSampler, goal_estimate

    iso, _ = load_iso(args.iso)
    eps_grid = _parse_grid(args.eps)
    m_grid = _parse_grid(args.m)
    samplers = (SetSampler(iso.source, seed=args.seed),
                SetSampler(iso.target, seed=args.seed))
    rows = []
    for m in sorted(m_grid):
        for eps in sorted(eps_grid, reverse=True):
            residual, witness = goal_estimate(iso, eps, m, samplers=samplers)
            rows.append([
                eps, m, residual, witness["side"],
                "|".join(str(p) for p in witness["set"]),
                residual < 0.9, residual < 0.5, residual < 0.1,
            ])
    header = ["eps", "m", "residual", "worst_side", "worst_set",
              "feasible_d0.9", "feasible_d0.5", "feasible_d0.1"]
    if args.format == "json":
        out = _out_paths(args.out, "goal.json")
        write_canonical(out, {"schema": "roe-goal/1",
                              "rows": [dict(zip(header, row)) for row in rows]})
    else:
        out = _out_paths(args.out, "goal.csv")
        write_csv(out, "schema=roe-goal/1", header, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def cmd_selftest(_args) -> int:
    failures = selftest.run_all(verbose=True)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roe",
        description="Finite-window toolkit: space generation, spatial "
                    "isomorphisms, bijection extraction, residual sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a space JSON file")
    p.add_argument("kind", choices=["path", "cycle", "grid", "tree",
                                    "random-geometric", "expander-sample"])
    p.add_argument("params", nargs="*")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("iso", help="build an isomorphism file pair")
    p.add_argument("--space", required=True)
    p.add_argument("--bijection", default="identity",
                   help="identity | reversal | path to a JSON map")
    p.add_argument("--random-bce", type=float, default=None,
                   help="random bijection with this displacement bound")
    p.add_argument("--phases", choices=["none", "random"], default="none")
    p.add_argument("--perturb", type=float, default=None,
                   help="compose with a random block unitary of this radius")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("extract", help="run the extraction pipeline")
    p.add_argument("--iso", required=True, help="iso file prefix")
    p.add_argument("--eps", default="0.5,0.4,0.3,0.2,0.1,0.05")
    p.add_argument("--m", default="0,1,2,3,5,8")
    p.add_argument("--r", default="1,2,3,5")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--strategy", choices=["support", "flattened"],
                   default="support")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", required=True,
                   help="certificate path or run directory")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("goal", help="sweep the residual over a grid")
    p.add_argument("--iso", required=True)
    p.add_argument("--eps", default="0.5,0.4,0.3,0.2,0.1,0.05")
    p.add_argument("--m", default="0,1,2,3,5,8")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", required=True, help="CSV path or run directory")
    p.set_defaults(func=cmd_goal)

    p = sub.add_parser("selftest", help="run the built-in invariant suite")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExtractionFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RoeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
