"""``langant`` command line: simulate, detect, census, mine, construct, verify, render.

Subcommands print ``key=value`` lines on stdout unless a catalog is sent
there with ``--out -``.  Exit status is 0 on
success, 2 on usage errors and 1 when ``verify`` rejects a highway (the
reason goes to stderr) or another operation fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import antpat, constructions, render
from .engine import (DIR_NAMES, Ant, Configuration, EngineError, RuleWord,
                     as_rule)
from .highway import (CENSUS_MAX_PERIOD, Highway, catalog_add, catalog_dumps,
                      catalog_loads, detect, verify_highway)
from .montecarlo import ExperimentSpec, mine, run_census

log = logging.getLogger("langant")


def _emit(**kv) -> None:
    for k, v in kv.items():
        if isinstance(v, (tuple, list)):
            v = ",".join(str(x) for x in v)
        print(f"{k}={v}")


def _load_start(args) -> tuple[RuleWord, Configuration]:
    if args.input:
        rule, c = antpat.read(args.input)
        if args.rule and as_rule(args.rule) != rule:
            raise ValueError(f"{args.input} is for rule {rule}, not {args.rule}")
        return rule, c
    if not args.rule:
        raise ValueError("give a rule word or --input")
    return as_rule(args.rule), Configuration.white()


def _render_spec(args) -> render.RenderSpec:
    fmt = args.format or (Path(args.render).suffix.lstrip(".") or "pgm")
    return render.RenderSpec(fmt=fmt, cell=args.cell, ant=not args.no_ant)


def _write_catalog(path, highways) -> None:
    text = catalog_dumps(highways)
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands --------------------------------------------------------------------

def cmd_simulate(args) -> int:
    rule, c = _load_start(args)
    ant = Ant(rule, c, max_cells=args.max_cells)
    ant.advance(args.steps)
    out = ant.configuration()
    if args.out:
        antpat.write(args.out, rule, out)
    if args.render:
        render.render_to(args.render, out, len(rule), _render_spec(args))
    if args.figure:
        render.plot_configuration(out, len(rule), args.figure,
                                  title=f"{rule} after {args.steps} steps")
    _emit(rule=rule, steps=args.steps, x=out.position[0], y=out.position[1],
          dir=DIR_NAMES[out.direction], nonzero=ant.nonzero)
    return 0


def cmd_detect(args) -> int:
    rule, c = _load_start(args)
    rep = detect(rule, c, args.max_steps, args.max_period, max_cells=args.max_cells,
                 trace_capacity=max(1 << 16, 4 * args.max_period))
    if args.out != "-":
        _emit(rule=rule, **rep.to_dict())
    if rep.found and args.out:
        _write_catalog(args.out, [rep.highway])
    return 0


def cmd_census(args) -> int:
    spec = ExperimentSpec(args.rule, args.runs, args.steps_per_run, args.shape, args.size,
                          args.seed, args.max_period)
    rep = run_census(spec, workers=args.workers, checkpoint=args.checkpoint)
    if args.json:
        Path(args.json).write_text(rep.to_json(timing=args.timing))
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    if args.figure:
        render.plot_census(rep, args.figure)
    _emit(rule=rep.ruleword, runs=rep.total_runs, highway_runs=rep.highway_runs,
          highway_fraction=f"{rep.highway_fraction():.6f}",
          dominant_period=rep.dominant_period(), wall_clock_s=f"{rep.wall_clock_s:.2f}")
    for p in sorted(rep.period_counts):
        _emit(period=p, count=rep.period_counts[p], share=f"{rep.share(p):.6f}")
    return 0


def cmd_mine(args) -> int:
    periods = set(args.period or [])
    found = mine(args.rule, args.budget, lambda h: not periods or h.period in periods,
                 seed=args.seed, steps_per_run=args.steps_per_run,
                 max_period=args.max_period, first_run=args.first_run)
    catalog: dict = {}
    if args.catalog and Path(args.catalog).exists():
        for h in catalog_loads(Path(args.catalog).read_text()):
            catalog_add(catalog, h)
    added = sum(catalog_add(catalog, h) for h in found)
    if args.catalog:
        _write_catalog(args.catalog, catalog.values())
    _emit(rule=as_rule(args.rule), runs=args.budget, distinct=len(found), added=added)
    for h in found:
        _emit(period=h.period, drift=h.drift, run_index=h.provenance.get("run_index"))
    return 0


def _construct(args) -> list[Highway]:
    if args.family == "l2kr":
        if args.k is None:
            raise ValueError("--k is required for l2kr")
        if args.variant in (None, "fundamental"):
            return [constructions.fundamental_highway(args.k)]
        if args.variant == "harmonic":
            return constructions.harmonic_highways(args.k)
        return [constructions.harmonic_highway(args.k, int(args.variant))]
    if args.family == "l2k1r":
        if args.k is None:
            raise ValueError("--k is required for l2k1r")
        return [constructions.l2k1r_highway(args.k)]
    if args.n is None:
        raise ValueError("--n is required for llrlrl")
    return [constructions.llrlrl_highway(args.n)]


def cmd_construct(args) -> int:
    hs = _construct(args)
    _write_catalog(args.out, hs)
    if args.out == "-":
        return 0
    for h in hs:
        _emit(rule=h.rule, period=h.period, drift=h.drift, cells=len(h.pattern))
    return 0


def cmd_verify(args) -> int:
    hs = catalog_loads(Path(args.catalog).read_text())
    status = 0
    for i, h in enumerate(hs):
        v = verify_highway(h)
        _emit(index=i, rule=h.rule, period=h.period, verdict="accept" if v else "reject")
        if not v:
            print(f"highway {i}: {v}", file=sys.stderr)
            status = 1
    return status


def cmd_render(args) -> int:
    path = Path(args.input)
    if path.suffix == ".json":
        hs = catalog_loads(path.read_text())
        h = hs[args.index]
        rule, c = h.rule, h.configuration()
    else:
        rule, c = antpat.read(path)
    render.render_to(args.render, c, len(rule), _render_spec(args))
    if args.figure:
        render.plot_configuration(c, len(rule), args.figure, title=str(rule))
    _emit(rule=rule, out=args.render)
    return 0


# -- parser -------------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _add_start(p) -> None:
    p.add_argument("rule", nargs="?", help="rule word, e.g. LLRL or L^6R")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="antpat start configuration")
    src.add_argument("--white", action="store_true", help="all-0 start (the default)")
    p.add_argument("--max-cells", type=_positive, default=10**8)


def _add_render(p, required=False) -> None:
    p.add_argument("--render", required=required, help="write a PGM or SVG picture")
    p.add_argument("--format", choices=render.FORMATS)
    p.add_argument("--cell", type=int, default=4, help="pixels per cell")
    p.add_argument("--no-ant", action="store_true")
    p.add_argument("--figure", help="also save a matplotlib figure (png/pdf)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="langant", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a number of steps")
    _add_start(p)
    p.add_argument("--steps", type=_positive, required=True)
    p.add_argument("--out", help="write the final configuration (antpat)")
    _add_render(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="look for a highway")
    _add_start(p)
    p.add_argument("--max-steps", type=_positive, default=10**7)
    p.add_argument("--max-period", type=_positive, default=CENSUS_MAX_PERIOD)
    p.add_argument("--out", help="catalog JSON for the highway found ('-': stdout, "
                   "replacing the key=value lines)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("census", help="random-perturbation census")
    p.add_argument("rule")
    p.add_argument("--runs", type=_positive, default=10**4)
    p.add_argument("--steps-per-run", type=_positive, default=10**5)
    p.add_argument("--shape", choices=("square", "cross"), default="square")
    p.add_argument("--size", type=_positive, default=11)
    p.add_argument("--seed", type=_positive, default=0)
    p.add_argument("--max-period", type=_positive, default=CENSUS_MAX_PERIOD)
    p.add_argument("--workers", type=int, help="default: $LANGANT_WORKERS or 1")
    p.add_argument("--checkpoint")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--figure", help="bar chart of period shares")
    p.add_argument("--timing", action="store_true", help="include wall clock in the JSON")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("mine", help="collect distinct highways from random runs")
    p.add_argument("rule")
    p.add_argument("--budget", type=_positive, default=10**4)
    p.add_argument("--period", type=int, action="append", help="keep only these periods")
    p.add_argument("--seed", type=_positive, default=0)
    p.add_argument("--first-run", type=_positive, default=0)
    p.add_argument("--steps-per-run", type=_positive, default=10**5)
    p.add_argument("--max-period", type=_positive, default=CENSUS_MAX_PERIOD)
    p.add_argument("--catalog", help="catalog JSON to merge results into")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("construct", help="build a highway of a proved family")
    p.add_argument("--family", choices=("l2kr", "l2k1r", "llrlrl"), required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--variant", help="'fundamental', 'harmonic' (all) or an index i")
    p.add_argument("--n", type=int)
    p.add_argument("--out", default="-", help="catalog JSON (default '-': stdout, "
                   "replacing the key=value lines)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check every highway of a catalog")
    p.add_argument("catalog")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="picture of an antpat file or catalog entry")
    p.add_argument("input")
    p.add_argument("--index", type=int, default=0)
    _add_render(p, required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, antpat.AntpatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (EngineError, constructions.ConstructionError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
