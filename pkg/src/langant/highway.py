"""Highway detection, extraction, verification and canonical forms.

A highway is a pattern plus ant pose that, after ``period`` steps confined
to the pattern, reappears shifted by a nonzero ``drift`` over a 0
background.  Detection watches the trace for an eventually periodic
suffix; every candidate it finds is checked by :func:`verify_highway`
before being reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import _kernels as K
from .engine import (DIR_NAMES, DIRECTIONS, Ant, Cell, Configuration,
                     OutOfSupportError, Pattern, RuleWord, apply_pattern_steps,
                     as_rule, dir_index, rotate_cell)

WINDOW_REPEATS = 3
CENSUS_MAX_PERIOD = 2048
MINING_MAX_PERIOD = 16384


class DegenerateDriftError(ValueError):
    """The candidate returned to its start: not a propagating structure."""


@dataclass
class Highway:
    rule: RuleWord
    pattern: Pattern
    position: Cell
    direction: int
    period: int
    drift: Cell
    trace_cycle: tuple[int, ...] = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rule = as_rule(self.rule)
        self.direction = dir_index(self.direction)
        self.position = (int(self.position[0]), int(self.position[1]))
        self.drift = (int(self.drift[0]), int(self.drift[1]))
        self.trace_cycle = tuple(int(s) for s in self.trace_cycle)
        n = len(self.rule)
        bad = [c for c, s in self.pattern.values.items() if not 0 <= s < n]
        if bad:
            raise ValueError(f"pattern symbol at {bad[0]} outside the alphabet of {self.rule}")

    def rotated(self, quarter_turns: int) -> "Highway":
        r = quarter_turns & 3
        return Highway(self.rule, self.pattern.rotated(r),
                       rotate_cell(self.position, r), (self.direction + r) & 3,
                       self.period, rotate_cell(self.drift, r), self.trace_cycle,
                       dict(self.provenance))

    def normalised(self) -> "Highway":
        """Same highway translated so the ant sits at the origin."""
        x, y = self.position
        return Highway(self.rule, self.pattern.shifted(-x, -y), (0, 0),
                       self.direction, self.period, self.drift, self.trace_cycle,
                       dict(self.provenance))

    def configuration(self) -> Configuration:
        """The pattern on a 0 background, ant in place."""
        return Configuration(self.pattern.to_picture(), self.position, self.direction)

    def key(self) -> tuple:
        return (self.trace_cycle, self.drift, self.direction,
                tuple(self.pattern.cells()))

    # catalog records
    def to_record(self) -> dict:
        h = self.normalised()
        return {
            "ruleword": str(h.rule),
            "period": h.period,
            "drift": list(h.drift),
            "trace_cycle": list(h.trace_cycle),
            "pattern": {"cells": [list(c) for c in h.pattern.cells()]},
            "ant": {"x": 0, "y": 0, "dir": DIR_NAMES[h.direction]},
            "provenance": dict(h.provenance),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Highway":
        pat = Pattern({(x, y): s for x, y, s in rec["pattern"]["cells"]})
        ant = rec["ant"]
        return cls(RuleWord.parse(rec["ruleword"]), pat, (ant["x"], ant["y"]),
                   ant["dir"], rec["period"], tuple(rec["drift"]),
                   tuple(rec["trace_cycle"]), dict(rec.get("provenance", {})))


@dataclass
class Verdict:
    accepted: bool
    clause: str = ""
    reason: str = ""
    cell: Cell | None = None
    step: int | None = None

    def __bool__(self) -> bool:
        return self.accepted

    def __str__(self) -> str:
        if self.accepted:
            return "accept"
        where = []
        if self.step is not None:
            where.append(f"step={self.step}")
        if self.cell is not None:
            where.append(f"cell={self.cell}")
        return f"reject clause={self.clause} {self.reason} {' '.join(where)}".strip()


def verify_highway(h: Highway, *, check_trace: bool = True) -> Verdict:
    if h.position not in h.pattern:
        return Verdict(False, "position", "ant position outside the support",
                       cell=h.position)
    if h.period < 1:
        return Verdict(False, "period", "period must be >= 1")
    if h.drift == (0, 0):
        return Verdict(False, "drift", "drift is (0, 0)")
    trace: list[int] = []
    try:
        after, pos, d = apply_pattern_steps(h.rule, h.pattern, h.position,
                                            h.direction, h.period, trace)
    except OutOfSupportError as e:
        return Verdict(False, "support", "ant left the support", cell=e.cell,
                       step=e.step_index)
    a, b = h.drift
    target = (h.position[0] + a, h.position[1] + b)
    if pos != target or d != h.direction:
        return Verdict(False, "pose",
                       f"ant at {pos} facing {DIR_NAMES[d]}, expected {target} "
                       f"facing {DIR_NAMES[h.direction]}", cell=pos)
    vals = after.values
    for (x, y), s in sorted(h.pattern.values.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        there = vals.get((x + a, y + b))
        expected = 0 if there is None else there
        if s != expected:
            return Verdict(False, "recurrence",
                           f"pattern holds {s}, shifted image holds {expected}",
                           cell=(x, y))
    if check_trace and h.trace_cycle and tuple(trace) != h.trace_cycle:
        return Verdict(False, "trace", "recorded trace differs from trace_cycle")
    return Verdict(True)


# -- extraction -----------------------------------------------------------------

def _candidate_support(xs: np.ndarray, ys: np.ndarray, landing: Cell,
                       drift: Cell) -> set[Cell]:
    visited = set(zip(xs.tolist(), ys.tolist()))
    visited.add(landing)
    a, b = drift
    return visited | {(x - a, y - b) for x, y in visited}


def extract_at(ant: Ant, p: int) -> Highway:
    """Candidate of period ``p`` at the ant's current time; the ant is restored."""
    start, d0 = ant.position, ant.direction
    xs, ys = ant.advance_tracking(p)
    landing = ant.position
    drift = (landing[0] - start[0], landing[1] - start[1])
    ant.retreat(p)
    if drift == (0, 0):
        raise DegenerateDriftError(f"period {p} returns the ant to {start}")
    support = _candidate_support(xs, ys, landing, drift)
    pat = Pattern({(x - start[0], y - start[1]): ant[(x, y)] for x, y in support})
    return Highway(ant.rule, pat, (0, 0), d0, p, drift)


def extract_candidate(w, c: Configuration, p: int) -> tuple[Pattern, Cell, int, Cell]:
    """Restrict ``c`` to the cells the next ``p`` steps use.

    The support is the visited set V (cells read, plus the landing cell)
    together with V shifted back by the drift.  Coordinates are translated
    so the ant starts at the origin.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    ant = Ant(w, c)
    h = extract_at(ant, p)
    return h.pattern, h.position, h.direction, h.drift


def _confirm(ant: Ant, p: int) -> Highway | None:
    try:
        h = extract_at(ant, p)
    except DegenerateDriftError:
        return None
    trace: list[int] = []
    if not verify_highway(h, check_trace=False):
        return None
    apply_pattern_steps(h.rule, h.pattern, h.position, h.direction, p, trace)
    h.trace_cycle = tuple(trace)
    return h


# -- detection ------------------------------------------------------------------

@dataclass
class DetectionReport:
    outcome: str                      # "highway" or "no_highway_within_budget"
    steps_simulated: int
    trace_suffix_checked: int
    period: int | None = None
    drift: Cell | None = None
    preperiod_bound: int | None = None
    periodic_onset: int | None = None
    highway: Highway | None = None

    @property
    def found(self) -> bool:
        return self.outcome == "highway"

    def to_dict(self) -> dict:
        out = {"outcome": self.outcome, "steps_simulated": self.steps_simulated,
               "trace_suffix_checked": self.trace_suffix_checked}
        if self.found:
            out.update(period=self.period, drift=list(self.drift),
                       preperiod_bound=self.preperiod_bound,
                       periodic_onset=self.periodic_onset)
        return out


def detect_on(ant: Ant, max_steps: int, max_period: int = CENSUS_MAX_PERIOD) -> DetectionReport:
    """Run ``ant`` until a verified highway shows up or ``max_steps`` is reached."""
    if WINDOW_REPEATS * max_period > len(ant.ring):
        raise ValueError("max_period exceeds trace ring capacity / 3")
    if not ant.rule.nontrivial:
        raise ValueError(f"detection needs a nontrivial rule word, got {ant.rule}")
    checked = 0
    while ant.time < max_steps:
        ant.advance(min(max_period, max_steps - ant.time))
        t = ant.time
        p = 0
        while True:
            p = K.smallest_suffix_period(ant.ring, t, p + 1, max_period, WINDOW_REPEATS)
            if not p:
                break
            checked = max(checked, WINDOW_REPEATS * p)
            h = _confirm(ant, p)
            if h is not None:
                h.provenance = {"steps_to_detect": t}
                return DetectionReport(
                    "highway", t, checked, p, h.drift, t,
                    int(K.periodic_onset(ant.ring, t, p)), h)
        checked = max(checked, min(t, WINDOW_REPEATS * max_period))
    return DetectionReport("no_highway_within_budget", ant.time, checked)


def detect(w, c: Configuration, max_steps: int, max_period: int = CENSUS_MAX_PERIOD,
           **ant_options) -> DetectionReport:
    ant = Ant(w, c, **ant_options)
    return detect_on(ant, max_steps, max_period)


# -- canonical forms ------------------------------------------------------------

def least_rotation(seq: tuple[int, ...]) -> int:
    """Start index of the lexicographically least rotation (Booth)."""
    s = list(seq) * 2
    n = len(seq)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n if n else 0


def primitive_period(seq: tuple[int, ...]) -> int:
    """Least q dividing len(seq) with seq a power of its length-q prefix."""
    n = len(seq)
    for q in range(1, n + 1):
        if n % q == 0 and all(seq[i] == seq[i - q] for i in range(q, n)):
            return q
    return n


def highway_at_phase(h: Highway, phase: int, warmup_periods: int = 2) -> Highway:
    """Re-extract ``h`` ``phase`` steps into its cycle.

    The pattern is run for a few whole periods first so that the cells
    behind the ant carry the highway's own print.
    """
    ant = Ant(h.rule, h.configuration())
    ant.advance(warmup_periods * h.period + phase)
    g = extract_at(ant, h.period)
    tc = h.trace_cycle
    if tc:
        s = phase % h.period
        g.trace_cycle = tc[s:] + tc[:s]
    g.provenance = dict(h.provenance)
    return g


def canonicalise(h: Highway) -> Highway:
    """Least representative over the four rotations and all phase shifts."""
    tc = h.trace_cycle
    if not tc:
        trace: list[int] = []
        apply_pattern_steps(h.rule, h.pattern, h.position, h.direction, h.period, trace)
        tc = tuple(trace)
        h = Highway(h.rule, h.pattern, h.position, h.direction, h.period,
                    h.drift, tc, h.provenance)
    s0 = least_rotation(tc)
    q = primitive_period(tc)
    best = None
    for phase in range(s0 % q, h.period, q):
        g = highway_at_phase(h, phase)
        for r in range(4):
            cand = g.rotated(r)
            key = cand.key()
            if best is None or key < best[0]:
                best = (key, cand)
    return best[1]


def same_highway(h1: Highway, h2: Highway) -> bool:
    return (str(h1.rule) == str(h2.rule) and h1.period == h2.period
            and canonicalise(h1).key() == canonicalise(h2).key())


def is_minimal(h: Highway) -> bool:
    """No proper divisor of the period gives a highway with proportional drift."""
    tc = h.trace_cycle
    if tc and primitive_period(tc) == h.period:
        return True
    for q in range(1, h.period):
        if h.period % q:
            continue
        a, b = h.drift
        if (a * q) % h.period or (b * q) % h.period:
            continue
        ant = Ant(h.rule, h.configuration())
        ant.advance(2 * h.period)
        try:
            g = extract_at(ant, q)
        except DegenerateDriftError:
            continue
        if g.drift == (a * q // h.period, b * q // h.period) and verify_highway(g, check_trace=False):
            return False
    return True


# -- catalog --------------------------------------------------------------------

def catalog_dumps(highways: Iterable[Highway]) -> str:
    recs = [h.to_record() for h in highways]
    recs.sort(key=lambda r: (r["ruleword"], r["period"], r["trace_cycle"], r["drift"]))
    return json.dumps({"highways": recs}, indent=1) + "\n"


def catalog_loads(text: str) -> list[Highway]:
    doc = json.loads(text)
    recs = doc["highways"] if isinstance(doc, dict) else doc
    return [Highway.from_record(r) for r in recs]


def write_catalog(path: str | Path, highways: Iterable[Highway]) -> None:
    Path(path).write_text(catalog_dumps(highways))


def read_catalog(path: str | Path) -> list[Highway]:
    return catalog_loads(Path(path).read_text())


def catalog_add(catalog: dict, h: Highway) -> bool:
    """Insert ``h`` keyed by canonical form; returns False for duplicates."""
    c = canonicalise(h)
    key = (str(c.rule), c.key())
    if key in catalog:
        return False
    catalog[key] = c
    return True
