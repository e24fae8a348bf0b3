"""Explicit highway families and the checks that back them.

* ``L^{2k}R``: elementary cycles, almost highways, the pictures
  ``C[k, i, n]`` and from them the fundamental (period ``16k+2``) and
  harmonic (period ``32k+4``) highways.
* ``L^{2k+1}R``: the period ``32k+20`` highway, obtained by mining.
* ``LLRLRL``: the widget concatenation ``M1 . L1^n . B1`` giving a
  highway of period ``220+24n`` for every n.

The elementary cycle is laid out with the ant on the cell holding ``a``
at the origin, facing north; turning left it visits ``b`` at (-1, 0),
``c`` at (-1, -1) and ``d`` at (0, -1) before returning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from . import antpat
from .engine import (DIRECTIONS, Ant, Cell, Configuration, Pattern, Picture,
                     RuleWord, apply_pattern_steps)
from .highway import (Highway, canonicalise, extract_at, highway_at_phase,
                      verify_highway)

NORTH = 1
CYCLE_CELLS: tuple[Cell, ...] = ((0, 0), (-1, 0), (-1, -1), (0, -1))

LLRLRL = RuleWord("LLRLRL")
LLRLRL_BASE_PERIOD = 220
LLRLRL_PERIOD_STEP = 24
LLRLRL_DRIFT = (-2, -2)

# step budgets of the four LLRLRL stages, per widget
STAGE_BUDGETS = {"M1": 84, "L1": 12, "B1": 4, "L2": 4, "M2": 100, "L3": 4,
                 "B2": 30, "L4": 4}


class ConstructionError(RuntimeError):
    """A construction failed verification (a bug or a bad fixture)."""


def l2kr_rule(k: int) -> RuleWord:
    return RuleWord("L" * (2 * k) + "R")


def l2k1r_rule(k: int) -> RuleWord:
    return RuleWord("L" * (2 * k + 1) + "R")


# -- elementary cycles ------------------------------------------------------------

def _check_cycle_params(k, a, b, c, d):
    if k < 1:
        raise ValueError("k must be >= 1")
    if not (2 * k >= a and all(a >= v >= 0 for v in (b, c, d))):
        raise ValueError(f"need 2k >= a >= b, c, d >= 0, got k={k} a={a} b={b} c={c} d={d}")


def elementary_cycle_pattern(k: int, a: int, b: int, c: int, d: int) -> tuple[Pattern, Pattern]:
    """The 2x2 patterns before and after the ``4(2k-a)``-step cycle.

    The ant starts and ends on (0, 0) facing north.
    """
    _check_cycle_params(k, a, b, c, d)
    r = 2 * k - a
    before = Pattern(dict(zip(CYCLE_CELLS, (a, b, c, d))))
    after = Pattern(dict(zip(CYCLE_CELLS, (2 * k, b + r, c + r, d + r))))
    return before, after


def cycle_trace(k: int, a: int, b: int, c: int, d: int) -> list[int]:
    _check_cycle_params(k, a, b, c, d)
    out = []
    for j in range(2 * k - a):
        out += [a + j, b + j, c + j, d + j]
    return out


# -- almost highways ---------------------------------------------------------------

def almost_highway_trace(k: int, i: int) -> list[int]:
    """The trace word from ``P_i`` to ``P'_{2k-i}``."""
    _check_variant(k, i)
    top = 2 * k
    return (cycle_trace(k, 0, 0, 0, 0) + [top]
            + cycle_trace(k, i, 0, 0, 0) + [top]
            + cycle_trace(k, i + 1, i - 1, i, 0) + [top, top, top - i, top])


def _check_variant(k: int, i: int):
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < i < 2 * k:
        raise ValueError(f"variant index must satisfy 0 < i < 2k, got i={i}, k={k}")


def l2kr_picture(k: int, i: int, n: int) -> Configuration:
    """The picture ``C[k, i, n]``; the ant sits at (-n, n) facing north."""
    _check_variant(k, i)
    if n < 0:
        raise ValueError("n must be >= 0")
    top = 2 * k
    pic = Picture()
    pic[(1 - n, n)] = i
    pic[(2 - n, n)] = i
    pic[(1 - n, n - 1)] = i + 1
    pic[(2 - n, n - 1)] = i - 1
    for x in range(-n, 0):
        pic[(x, -x - 2)] = top
    for x in range(2, n + 2):
        pic[(x, -x + 2)] = top - 1
        pic[(x, -x + 1)] = top - 2
    return Configuration(pic, (-n, n), NORTH)


class AlmostHighway(NamedTuple):
    before: Pattern
    after: Pattern
    steps: int
    trace: list[int]


def almost_highway(k: int, i: int) -> AlmostHighway:
    """``P_i`` and ``P'_{2k-i}`` on the cells the half-period touches.

    The support is the set of cells read during the ``24k-8i+2`` steps
    plus the landing cell; values come from ``C[k, i, 0]`` and
    ``C[k, 2k-i, 1]``.
    """
    _check_variant(k, i)
    steps = 24 * k - 8 * i + 2
    start = l2kr_picture(k, i, 0)
    ant = Ant(l2kr_rule(k), start)
    xs, ys = ant.advance_tracking(steps)
    support = set(zip(xs.tolist(), ys.tolist())) | {ant.position}
    before = Pattern.from_picture(start.picture, support)
    after = Pattern.from_picture(l2kr_picture(k, 2 * k - i, 1).picture, support)
    return AlmostHighway(before, after, steps, almost_highway_trace(k, i))


def cycle_mismatch(k: int, a: int, b: int, c: int, d: int) -> str | None:
    """Simulate one elementary cycle; None if it matches ``P'`` and the trace."""
    before, after = elementary_cycle_pattern(k, a, b, c, d)
    trace: list[int] = []
    got, pos, heading = apply_pattern_steps(l2kr_rule(k), before, (0, 0), NORTH,
                                            4 * (2 * k - a), trace)
    if (pos, heading) != ((0, 0), NORTH):
        return f"ant ends at {pos} heading {heading}"
    if got != after:
        return "final pattern differs"
    if trace != cycle_trace(k, a, b, c, d):
        return "trace differs"
    return None


def cycle_cases(k: int):
    top = 2 * k
    for a in range(top + 1):
        for b in range(a + 1):
            for c in range(a + 1):
                for d in range(a + 1):
                    yield a, b, c, d


def almost_highway_mismatch(k: int, i: int) -> str | None:
    ah = almost_highway(k, i)
    trace: list[int] = []
    pos0 = l2kr_picture(k, i, 0).position
    got, pos, heading = apply_pattern_steps(l2kr_rule(k), ah.before, pos0, NORTH,
                                            ah.steps, trace)
    if (pos, heading) != ((-1, 1), NORTH):
        return f"ant ends at {pos} heading {heading}"
    if got != ah.after:
        return "final pattern differs"
    if trace != ah.trace or len(trace) != 24 * k - 8 * i + 2:
        return "trace differs"
    return None


def highway_print(h: Highway, periods: int = 10) -> dict[Cell, int]:
    """Nonzero cells left behind after running ``h`` for ``periods`` periods."""
    ant = Ant(h.rule, h.configuration())
    ant.advance(periods * h.period)
    a, b = h.drift
    live = {(x + periods * a, y + periods * b) for x, y in h.pattern.values}
    return {c: s for c, s in ant.picture().items() if c not in live}


def print_diagonals(h: Highway, periods: int = 10) -> dict[int, set[int]]:
    """Map symbol -> set of anti-diagonal indices ``x + y`` its print cells lie on."""
    out: dict[int, set[int]] = {}
    for (x, y), s in highway_print(h, periods).items():
        out.setdefault(s, set()).add(x + y)
    return out


# -- L^{2k}R highways ---------------------------------------------------------------

def _highway_from(rule: RuleWord, config: Configuration, period: int,
                  expected_trace: list[int], provenance: dict) -> Highway:
    """Run whole periods so the print is in place, then cut out the highway."""
    ant = Ant(rule, config)
    ant.advance(2 * period)
    h = extract_at(ant, period)
    h.trace_cycle = tuple(expected_trace)
    h.provenance = {"seed": "constructed", "steps_to_detect": 0, **provenance}
    verdict = verify_highway(h)
    if not verdict:
        raise ConstructionError(f"{rule} period {period}: {verdict}")
    return h


def fundamental_highway(k: int) -> Highway:
    """Period ``16k+2``, drift (-1, 1), trace ``t[k, k]``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _highway_from(l2kr_rule(k), l2kr_picture(k, k, 0), 16 * k + 2,
                         almost_highway_trace(k, k),
                         {"family": "l2kr", "k": k, "variant": "fundamental"})


def harmonic_highway(k: int, i: int) -> Highway:
    """Period ``32k+4``, drift (-2, 2), trace ``t[k, i] . t[k, 2k-i]``."""
    if not 0 < i < k:
        raise ValueError(f"harmonic variants need 0 < i < k, got i={i}, k={k}")
    trace = almost_highway_trace(k, i) + almost_highway_trace(k, 2 * k - i)
    return _highway_from(l2kr_rule(k), l2kr_picture(k, i, 0), 32 * k + 4, trace,
                         {"family": "l2kr", "k": k, "variant": i})


def harmonic_highways(k: int) -> list[Highway]:
    return [harmonic_highway(k, i) for i in range(1, k)]


def harmonic_witness(i: int) -> list[int]:
    """Trace factor that occurs in variant ``i`` and no other variant."""
    return [i + 1, i - 1, i, 0]


def contains_factor(cyclic_word, factor) -> bool:
    w = list(cyclic_word)
    n, m = len(w), len(factor)
    ext = w + w[: m - 1]
    return any(ext[j:j + m] == list(factor) for j in range(n))


# -- L^{2k+1}R ----------------------------------------------------------------------

def l2k1r_highway(k: int, budget: int = 200, seed: int = 0) -> Highway:
    """The period ``32k+20`` highway of ``L^{2k+1}R``, found by mining."""
    from .montecarlo import mine

    if k < 1:
        raise ValueError("k must be >= 1")
    period = 32 * k + 20
    found = mine(l2k1r_rule(k), budget, lambda h: h.period == period, seed=seed,
                 stop=lambda hs: bool(hs))
    if not found:
        raise ConstructionError(f"no period-{period} highway of {l2k1r_rule(k)} "
                                f"within {budget} runs (mining budget exhausted)")
    return found[0]


# -- LLRLRL widgets ---------------------------------------------------------------

@dataclass
class WidgetSet:
    """``M1``, ``L1`` and ``B1`` in the frame of ``c_0`` / ``c_1``.

    ``L1`` is the first link copy; copy j sits at ``L1 + j * link_shift``
    and ``B1`` moves to ``B1 + n * link_shift``.  Each widget carries the
    pose at which the ant first enters it.
    """

    m1: Pattern
    l1: Pattern
    b1: Pattern
    start: tuple[Cell, int]
    l1_entry: tuple[Cell, int]
    b1_entry: tuple[Cell, int]
    link_shift: Cell
    budgets: dict = field(default_factory=lambda: dict(STAGE_BUDGETS))
    stages: dict = field(default_factory=dict)

    def assemble(self, n: int) -> Pattern:
        """``c_n = M1 . L1^n . B1``."""
        if n < 0:
            raise ValueError("n must be >= 0")
        vx, vy = self.link_shift
        out = dict(self.m1.values)
        parts = [self.l1.shifted(j * vx, j * vy) for j in range(n)]
        parts.append(self.b1.shifted(n * vx, n * vy))
        for part in parts:
            for cell, s in part.values.items():
                if out.get(cell, s) != s:
                    raise ConstructionError(f"widgets disagree at {cell}")
                out[cell] = s
        return Pattern(out)

    def regions(self, n: int) -> dict[Cell, str]:
        """Which widget copy each cell of ``c_n`` came from."""
        vx, vy = self.link_shift
        reg = {c: "M1" for c in self.m1.values}
        for j in range(n):
            for (x, y) in self.l1.values:
                reg[(x + j * vx, y + j * vy)] = f"L1[{j}]"
        for (x, y) in self.b1.values:
            reg[(x + n * vx, y + n * vy)] = "B1"
        return reg


def _split(p0: dict, p1: dict, axis: int, width: int, threshold: int):
    """Cut ``p0`` at ``threshold`` along ``axis``; the far part moves by ``width``."""
    shift = (width, 0) if axis == 0 else (0, width)
    sign = 1 if width > 0 else -1
    near, far = {}, {}
    for c, s in p0.items():
        (far if sign * c[axis] >= sign * threshold else near)[c] = s
    if any(p1.get(c) != s for c, s in near.items()):
        return None
    moved = {(x + shift[0], y + shift[1]): s for (x, y), s in far.items()}
    if any(p1.get(c) != s for c, s in moved.items()):
        return None
    link = {c: s for c, s in p1.items() if c not in near and c not in moved}
    if not link:
        return None
    return near, link, far, shift


def _first_entries(rule, pattern: Pattern, pose, regions: dict, steps: int):
    """Time, cell and heading of the first step spent in each region."""
    vals = dict(pattern.values)
    (x, y), d = pose
    n = len(rule)
    seen = {}
    for t in range(steps):
        r = regions.get((x, y))
        if r is not None and r not in seen:
            seen[r] = (t, (x, y), d)
        s = vals[(x, y)]
        vals[(x, y)] = (s + 1) % n
        d = (d + 1) & 3 if rule.letters[s] == "L" else (d - 1) & 3
        x += DIRECTIONS[d][0]
        y += DIRECTIONS[d][1]
    return seen


def stage_entries(ws: WidgetSet, n: int) -> dict[str, tuple[int, Cell, int]]:
    period = LLRLRL_BASE_PERIOD + LLRLRL_PERIOD_STEP * n
    return _first_entries(LLRLRL, ws.assemble(n), ws.start, ws.regions(n), period)


def first_pass_budgets(ws: WidgetSet, n: int) -> dict[str, int]:
    """Steps spent before entering the first link, per link, and before B1."""
    e = stage_entries(ws, n)
    marks = [0] + [e[f"L1[{j}]"][0] for j in range(n)] + [e["B1"][0]]
    out = {"M1": marks[1]}
    for j in range(n):
        out[f"L1[{j}]"] = marks[j + 2] - marks[j + 1]
    return out


def derive_widgets(short: Highway, long: Highway, *, check_up_to: int = 2) -> WidgetSet:
    """Recover ``M1``, ``L1``, ``B1`` from highways of periods 220 and 244.

    Searches phase pairs with a common 84-symbol trace opening, and cuts
    along an axis so that the long pattern is the short one with a link
    inserted.  The phase kept is the one where the ant spends exactly 84
    steps in ``M1`` and 12 in each link, and ``c_0 ... c_check_up_to``
    must verify.
    """
    if long.period - short.period != LLRLRL_PERIOD_STEP:
        raise ValueError("need highways of consecutive periods 220+24n, 220+24(n+1)")
    if short.period != LLRLRL_BASE_PERIOD:
        raise ValueError("the short highway must have period 220 (n = 0)")
    m1_budget, l1_budget = STAGE_BUDGETS["M1"], STAGE_BUDGETS["L1"]
    ts, tl = short.trace_cycle, long.trace_cycle
    ts2, tl2 = ts + ts, tl + tl
    for s0 in range(short.period):
        opening = ts2[s0:s0 + m1_budget]
        for s1 in range(long.period):
            if tl2[s1:s1 + m1_budget] != opening:
                continue
            a = highway_at_phase(short, s0)
            b = highway_at_phase(long, s1)
            if a.direction != b.direction or a.drift != b.drift:
                continue
            ws = _cut(a, b)
            if ws is None:
                continue
            ok = all(verify_highway(_llrlrl_candidate(ws, n)) for n in range(check_up_to + 1))
            if not ok:
                continue
            budgets = first_pass_budgets(ws, 2)
            if budgets == {"M1": m1_budget, "L1[0]": l1_budget, "L1[1]": l1_budget}:
                return ws
    raise ConstructionError("widget recovery failed: mined instances are inconsistent")


def _cut(a: Highway, b: Highway) -> WidgetSet | None:
    p0, p1 = a.pattern.values, b.pattern.values
    for axis in (0, 1):
        coords = [c[axis] for c in p0]
        for width in (1, -1, 2, -2, 3, -3):
            for thr in range(min(coords), max(coords) + 2):
                r = _split(p0, p1, axis, width, thr)
                if r is None:
                    continue
                near, link, far, shift = r
                m1 = Pattern(near)
                l1 = Pattern(link)
                b1 = Pattern(far)
                ws = WidgetSet(m1, l1, b1, ((0, 0), a.direction), ((0, 0), 0),
                               ((0, 0), 0), shift)
                e = stage_entries(ws, 1)
                if "L1[0]" not in e or "B1" not in e:
                    continue
                ws.l1_entry = (e["L1[0]"][1], e["L1[0]"][2])
                bx, by = e["B1"][1]
                ws.b1_entry = ((bx - shift[0], by - shift[1]), e["B1"][2])
                return ws
    return None


def _llrlrl_candidate(ws: WidgetSet, n: int) -> Highway:
    (pos, d) = ws.start
    return Highway(LLRLRL, ws.assemble(n), pos, d,
                   LLRLRL_BASE_PERIOD + LLRLRL_PERIOD_STEP * n, LLRLRL_DRIFT)


# fixtures

WIDGET_FILES = {"m1": "llrlrl_M1.antpat", "l1": "llrlrl_L1.antpat", "b1": "llrlrl_B1.antpat"}


def _fixture_dir() -> Path:
    return Path(str(resources.files("langant") / "fixtures"))


def write_widget_fixtures(ws: WidgetSet, directory: str | Path | None = None) -> None:
    d = Path(directory) if directory else _fixture_dir()
    d.mkdir(parents=True, exist_ok=True)
    poses = {"m1": ws.start, "l1": ws.l1_entry, "b1": ws.b1_entry}
    for name, fname in WIDGET_FILES.items():
        pos, heading = poses[name]
        antpat.write_pattern(d / fname, LLRLRL, getattr(ws, name), pos, heading)
    (d / "llrlrl_link_shift.txt").write_text(f"{ws.link_shift[0]} {ws.link_shift[1]}\n")


def load_widgets(directory: str | Path | None = None) -> WidgetSet:
    d = Path(directory) if directory else _fixture_dir()
    parts = {}
    for name, fname in WIDGET_FILES.items():
        rule, pat, pos, heading = antpat.read_pattern(d / fname)
        if rule != LLRLRL:
            raise ConstructionError(f"{fname} is for {rule}, expected {LLRLRL}")
        parts[name] = (pat, (pos, heading))
    sx, sy = (int(v) for v in (d / "llrlrl_link_shift.txt").read_text().split())
    return WidgetSet(parts["m1"][0], parts["l1"][0], parts["b1"][0], parts["m1"][1],
                     parts["l1"][1], parts["b1"][1], (sx, sy))


def stage_snapshot(ws: WidgetSet, n: int, t: int | None = None) -> dict[str, Pattern]:
    """Widget regions of ``c_n`` after ``t`` steps, each moved back to its own frame.

    The default ``t = 84 + 12n`` is the moment the ant first reaches ``B1``.
    By then every link it crossed has turned into the same pattern, except
    the last one, which the ant is still rewriting.
    """
    if t is None:
        t = ws.budgets["M1"] + ws.budgets["L1"] * n
    after, _, _ = apply_pattern_steps(LLRLRL, ws.assemble(n), ws.start[0], ws.start[1], t)
    vx, vy = ws.link_shift
    by_region: dict[str, dict] = {}
    for cell, r in ws.regions(n).items():
        by_region.setdefault(r, {})[cell] = after.values[cell]
    out = {"M1": Pattern(by_region["M1"]),
           "B1": Pattern(by_region["B1"]).shifted(-n * vx, -n * vy)}
    for j in range(n):
        out[f"L1[{j}]"] = Pattern(by_region[f"L1[{j}]"]).shifted(-j * vx, -j * vy)
    return out


def recover_widgets() -> WidgetSet:
    """Widget data from the checked-in fixtures, with stage snapshots attached."""
    ws = load_widgets()
    snap = stage_snapshot(ws, 2)
    ws.stages = {"L2": snap["L1[0]"], "L2'": snap["L1[1]"], "M1 rewritten": snap["M1"]}
    return ws


def llrlrl_highway(n: int, widgets: WidgetSet | None = None) -> Highway:
    """The highway of period ``220+24n`` started by ``c_n``."""
    ws = widgets or load_widgets()
    h = _llrlrl_candidate(ws, n)
    trace: list[int] = []
    apply_pattern_steps(LLRLRL, h.pattern, h.position, h.direction, h.period, trace)
    h.trace_cycle = tuple(trace)
    h.provenance = {"seed": "constructed", "steps_to_detect": 0, "family": "llrlrl", "n": n}
    verdict = verify_highway(h)
    if not verdict:
        raise ConstructionError(f"LLRLRL n={n}: {verdict}")
    return h


def mine_widgets(seed: int = 0, runs: tuple[int, int] | None = None,
                 budget: int = 50_000) -> WidgetSet:
    """Independent recovery: mine periods 220 and 244 and cut them apart.

    ``runs`` pins the two run indices to replay instead of searching.
    """
    from .montecarlo import mine, run_one, ExperimentSpec

    if runs is not None:
        pair = []
        for idx in runs:
            r = run_one(ExperimentSpec(str(LLRLRL), 1, seed=seed), idx, keep_highway=True)
            if r.highway is None:
                raise ConstructionError(f"run {idx} produced no highway")
            pair.append(canonicalise(r.highway))
        return derive_widgets(*sorted(pair, key=lambda h: h.period))
    want = {LLRLRL_BASE_PERIOD, LLRLRL_BASE_PERIOD + LLRLRL_PERIOD_STEP}
    found = mine(LLRLRL, budget, lambda h: h.period in want, seed=seed,
                 stop=lambda hs: {h.period for h in hs} >= want)
    shorts = [h for h in found if h.period == LLRLRL_BASE_PERIOD]
    longs = [h for h in found if h.period != LLRLRL_BASE_PERIOD]
    for s in shorts:
        for lg in longs:
            try:
                return derive_widgets(s, lg)
            except ConstructionError:
                continue
    raise ConstructionError(f"widget recovery failed: mined {len(found)} candidate highways "
                            f"in {budget} runs without a consistent 220/244 pair")
    raise ConstructionError("widget recovery failed: no consistent 220/244 pair mined")
