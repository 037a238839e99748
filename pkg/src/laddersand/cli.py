"""Command-line surface.

Every subcommand wraps one library operation, writes CSV or JSON, and
drops a ``<output>.manifest.json`` beside each output file recording the
command, parameters, seed, and tool version.  Reruns with identical
parameters reproduce byte-identical CSV/JSON outputs (the manifest's
wall-clock differs).

Exit codes: 0 success, 2 invalid input, 3 feasibility cap hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .burning import max_rung
from .census import count_series, entropy_bounds
from .coding import (build_coding, check_transitive, influence_maps_monotone,
                     parry_chain, restrict, spectral)
from .errors import FeasibilityError, StepCapExceeded, ValidationError
from .graphs import Graph, Window, builtin_graph, parse_graph
from .measures import (CylinderEvent, cylinder_prob, mixture_experiment,
                       right_cylinder_prob, sample_chain_windows,
                       sample_finite_exact, sample_window_config)
from .toppling import (CANONICAL, PARALLEL, LadderConfig, Schedule,
                       demo_wave_config, random_schedule, rung_zero_blast,
                       stabilize)

BUILTIN_NAMES = ("point", "path2", "path3", "cycle3")


def _load_graph(spec: str, vertex_cap: int) -> Graph:
    path = Path(spec)
    if path.is_file():
        return parse_graph(path.read_text(), name=path.stem,
                           vertex_cap=vertex_cap)
    return builtin_graph(spec)


def _parse_rung(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.replace(" ", "").split(","))
    except ValueError:
        raise ValidationError(f"bad rung {text!r}; expected e.g. 3,2") from None


def _parse_event(text: str, at: Optional[int], centered: bool) -> CylinderEvent:
    rungs = tuple(_parse_rung(part) for part in text.split(";") if part)
    if centered:
        return CylinderEvent.centered(rungs)
    return CylinderEvent(rungs=rungs, lo=at or 0)


def _write(out: Optional[str], payload: str, manifest: dict) -> None:
    if out is None:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")
        return
    path = Path(out)
    path.write_text(payload)
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=1))


def _manifest(args: argparse.Namespace, outputs: list[str], t0: float) -> dict:
    params = {k: v for k, v in vars(args).items()
              if k not in ("func",) and v is not None}
    return {
        "command": args.command,
        "parameters": params,
        "graph_source": getattr(args, "graph", None),
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "outputs": outputs,
        "wall_clock_s": round(time.perf_counter() - t0, 6),
    }


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_graph(args, graph: Graph, t0: float) -> int:
    payload = _json_text(graph.to_json())
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_census(args, graph: Graph, t0: float) -> int:
    series = count_series(graph, args.variant, args.n, method=args.method,
                          max_enum=args.max_enum, threads=args.threads)
    if args.format == "csv":
        rows = [(series.variant, n, v)
                for n, v in enumerate(series.values, start=1)]
        payload = _csv_text(("variant", "n", "count"), rows)
    else:
        bounds = entropy_bounds(series)
        payload = _json_text({
            "variant": series.variant,
            "graph": graph.name,
            "provenance": series.provenance,
            "counts": {str(n): str(v)
                       for n, v in enumerate(series.values, start=1)},
            "entropy": {"lower": list(bounds.lower),
                        "upper": list(bounds.upper),
                        "estimate": bounds.estimate},
        })
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_coding(args, graph: Graph, t0: float) -> int:
    auto = build_coding(graph, max_states=args.max_states)
    irreducible, power = check_transitive(auto)
    doc = auto.to_json()
    doc["transitive"] = irreducible
    doc["positive_power"] = power
    doc["influence_maps_monotone"] = influence_maps_monotone(auto)
    payload = _json_text(doc)
    out = args.emit or args.out
    _write(out, payload, _manifest(args, [out] if out else [], t0))
    return 0


def cmd_spectral(args, graph: Graph, t0: float) -> int:
    auto = build_coding(graph, max_states=args.max_states)
    if args.nonmax:
        auto = restrict(auto, lambda c: c != max_rung(graph))
    spec = spectral(auto, tol=args.tol)
    doc = {
        "graph": graph.name,
        "states": len(auto),
        "restricted_to_nonmax": bool(args.nonmax),
        "rho": spec.rho,
        "entropy": spec.entropy,
        "residual_right": spec.residual_right,
        "residual_left": spec.residual_left,
        "strictly_positive": spec.strictly_positive,
    }
    if spec.strictly_positive:
        chain = parry_chain(auto, spec)
        doc["stationary"] = {"-".join(map(str, auto.states[i].rung)): p
                             for i, p in enumerate(chain.stationary.tolist())
                             if i in auto.inclusion.values()}
        doc["entropy_rate"] = chain.entropy_rate()
    payload = _json_text(doc)
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_measure(args, graph: Graph, t0: float) -> int:
    event = _parse_event(args.event, args.at, args.centered)
    methods = (("parry", "renewal", "finite_dp")
               if args.method == "all" else (args.method,))
    rows = []
    for method in methods:
        fn = right_cylinder_prob if args.right else cylinder_prob
        res = fn(graph, event, method,
                 renewal_order=args.renewal_order,
                 dp_halfwidth=args.dp_halfwidth)
        budget = res.detail.get("tail_bound", "")
        rows.append((f"[{event.lo},{event.hi}]", args.event, method,
                     repr(res.value), budget))
    if args.format == "csv":
        payload = _csv_text(("window", "event", "method", "value",
                             "error_budget"), rows)
    else:
        payload = _json_text([{"window": r[0], "event": r[1], "method": r[2],
                               "value": float(r[3]), "error_budget": r[4] or None}
                              for r in rows])
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_sample(args, graph: Graph, t0: float) -> int:
    if args.exact_window is not None:
        lo, hi = args.exact_window
        configs = sample_finite_exact(graph, lo, hi, args.seed, count=args.count)
        lines = [json.dumps({"window": [lo, hi],
                             "rungs": c.heights.tolist()}, sort_keys=True)
                 for c in configs]
    else:
        windows = sample_chain_windows(graph, args.width, args.count, args.seed)
        lines = [json.dumps({"rungs": [list(r) for r in w]}, sort_keys=True)
                 for w in windows]
    payload = "\n".join(lines) + "\n"
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def _schedule_from_args(args) -> Schedule:
    if args.schedule == "parallel":
        return PARALLEL
    if args.schedule == "canonical":
        return CANONICAL
    return random_schedule(args.schedule_seed if args.schedule_seed is not None
                           else (args.seed or 0))


def cmd_topple(args, graph: Graph, t0: float) -> int:
    if args.demo == "rightward-wave":
        config, site = demo_wave_config(args.length)
        additions = [site]
    else:
        if args.config is None:
            raise ValidationError("need --config FILE or --demo rightward-wave")
        config = LadderConfig.from_json(json.loads(Path(args.config).read_text()))
        additions = [tuple(map(int, a.split(","))) for a in (args.add or [])]
        additions = [(x, k) for x, k in additions]
    final, odo = stabilize(graph, config, additions,
                           _schedule_from_args(args), args.step_cap)
    payload = _json_text({
        "final": final.to_json(),
        "odometer": odo.to_json(),
        "additions": [list(a) for a in additions],
    })
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_blast(args, graph: Graph, t0: float) -> int:
    if args.config is not None:
        config = LadderConfig.from_json(json.loads(Path(args.config).read_text()))
    else:
        config = sample_window_config(graph, args.halfwidth, args.seed or 0)
    final, odo = rung_zero_blast(graph, config, _schedule_from_args(args),
                                 args.step_cap)
    payload = _json_text({
        "window": [config.window.n, config.window.m],
        "odometer": odo.to_json(),
        "rung_min": {str(k): v for k, v in odo.rung_min().items()},
        "all_toppled": bool((odo.counts >= 1).all()),
    })
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_mixture(args, graph: Graph, t0: float) -> int:
    event = _parse_event(args.event, args.at, args.centered)
    windows = [Window(-m, m) for m in args.halfwidths]
    rows = mixture_experiment(graph, windows, event, mode=args.mode,
                              samples=args.samples, seed=args.seed or 0,
                              max_enum=args.max_enum)
    table = [((f"[{r.window.n},{r.window.m}]"), args.event, args.mode,
              repr(r.measured), repr(r.predicted), repr(r.gap),
              r.total_configs) for r in rows]
    if args.format == "csv":
        payload = _csv_text(("window", "event", "mode", "measured",
                             "predicted", "gap", "configs"), table)
    else:
        payload = _json_text([{
            "window": [r.window.n, r.window.m], "weight_left": r.weight_left,
            "measured": r.measured, "predicted": r.predicted, "gap": r.gap,
            "configs": r.total_configs} for r in rows])
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


def cmd_experiment(args, graph: Graph, t0: float) -> int:
    if args.name != "cycle-topple":
        raise ValidationError(f"unknown experiment {args.name!r}")
    results = []
    for n_cyc in args.cycles:
        cyc = builtin_graph(f"cycle{n_cyc}")
        toppled = 0
        odometer_origin = 0
        for i in range(args.count):
            config = sample_window_config(cyc, args.halfwidth,
                                          (args.seed or 0) * 1000 + i)
            final, odo = stabilize(cyc, config, [(0, 0)],
                                   CANONICAL, args.step_cap)
            c = odo.count((0, 0))
            toppled += c > 0
            odometer_origin += c
        results.append({
            "cycle": n_cyc,
            "halfwidth": args.halfwidth,
            "samples": args.count,
            "origin_topple_fraction": toppled / args.count,
            "origin_mean_topplings": odometer_origin / args.count,
        })
    payload = _json_text(results)
    _write(args.out, payload, _manifest(args, [args.out] if args.out else [], t0))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laddersand",
        description="Abelian sandpiles on ladder graphs: censuses, the "
                    "rung-coding automaton, limit-measure samplers, and "
                    "avalanche dynamics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--graph", default="path2",
                       help=f"builtin ({', '.join(BUILTIN_NAMES)}, pathN, "
                            "cycleN) or an edge-list file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--max-states", type=int, default=10 ** 6)
        p.add_argument("--max-enum", type=int, default=10 ** 7)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--vertex-cap", type=int, default=12)
        p.add_argument("--step-cap", type=int, default=10 ** 7)

    p = sub.add_parser("graph", help="parse and validate a base graph, "
                                     "emit it as JSON")
    common(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("census", help="exact counts of burnable or recurrent "
                                      "window classes, with entropy bounds")
    common(p)
    p.add_argument("--variant", choices=("L", "L0", "S", "S0", "REC"),
                   default="L")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("brute", "automaton"), default="brute")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("coding", help="build the rung-coding automaton and "
                                      "emit states, matrix and transitivity data")
    common(p)
    p.add_argument("--emit", default=None, help="alias for --out")
    p.set_defaults(func=cmd_coding, format="json")

    p = sub.add_parser("spectral", help="growth rate and maximal-entropy "
                                        "chain of the coding automaton")
    common(p)
    p.add_argument("--nonmax", action="store_true",
                   help="restrict to states without the all-maximal rung")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_spectral, format="json")

    p = sub.add_parser("measure", help="cylinder probability under the "
                                       "one-sided limit measure")
    common(p)
    p.add_argument("--event", required=True,
                   help="rungs as 'h1,h2;h1,h2;...' left to right")
    p.add_argument("--at", type=int, default=None, help="leftmost event rung")
    p.add_argument("--centered", action="store_true")
    p.add_argument("--right", action="store_true",
                   help="use the right-sided measure")
    p.add_argument("--method", choices=("parry", "renewal", "finite_dp", "all"),
                   default="all")
    p.add_argument("--renewal-order", type=int, default=48)
    p.add_argument("--dp-halfwidth", type=int, default=32)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sample", help="draw rung windows from the stationary "
                                      "chain, or exactly uniform finite windows")
    common(p)
    p.add_argument("--width", type=int, default=9)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--exact-window", type=int, nargs=2, metavar=("N", "M"),
                   default=None)
    p.set_defaults(func=cmd_sample, seed=0)

    p = sub.add_parser("topple", help="stabilize a configuration after grain "
                                      "additions; reports the odometer")
    common(p)
    p.add_argument("--config", default=None, help="LadderConfig JSON file")
    p.add_argument("--add", action="append", default=None,
                   metavar="X,K", help="addition site; repeatable")
    p.add_argument("--demo", choices=("rightward-wave",), default=None)
    p.add_argument("--length", type=int, default=12)
    p.add_argument("--schedule", choices=("parallel", "canonical", "random"),
                   default="canonical")
    p.add_argument("--schedule-seed", type=int, default=None)
    p.set_defaults(func=cmd_topple, format="json")

    p = sub.add_parser("blast", help="add one grain to every site of rung 0 "
                                     "of a sampled window and stabilize")
    common(p)
    p.add_argument("--halfwidth", type=int, default=8)
    p.add_argument("--config", default=None)
    p.add_argument("--schedule", choices=("parallel", "canonical", "random"),
                   default="canonical")
    p.add_argument("--schedule-seed", type=int, default=None)
    p.set_defaults(func=cmd_blast, format="json")

    p = sub.add_parser("mixture", help="finite-window event probabilities "
                                       "against the mixture of one-sided limits")
    common(p)
    p.add_argument("--event", required=True)
    p.add_argument("--at", type=int, default=None)
    p.add_argument("--centered", action="store_true")
    p.add_argument("--halfwidths", type=lambda s: [int(x) for x in s.split(",")],
                   default=[2, 3])
    p.add_argument("--mode", choices=("enumerate", "sample"), default="enumerate")
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(func=cmd_mixture)

    p = sub.add_parser("experiment", help="exploratory runs; "
                                          "'cycle-topple' probes how often the "
                                          "origin topples on cycle ladders")
    common(p)
    p.add_argument("name", choices=("cycle-topple",))
    p.add_argument("--cycles", type=lambda s: [int(x) for x in s.split(",")],
                   default=[3, 4, 5])
    p.add_argument("--halfwidth", type=int, default=8)
    p.add_argument("--count", type=int, default=50)
    p.set_defaults(func=cmd_experiment, format="json")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        graph = _load_graph(args.graph, args.vertex_cap)
        return args.func(args, graph, t0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FeasibilityError as exc:
        print(f"feasibility: {exc}", file=sys.stderr)
        return 3
    except StepCapExceeded as exc:
        print(f"step cap: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
