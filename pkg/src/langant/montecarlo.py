"""Random-perturbation census of highway periods, and highway mining.

Each run draws an ``s x s`` (or cross shaped) random patch around the
origin, puts the ant in the centre cell facing north, and runs the
detector.  Runs are keyed by ``(seed, run_index)`` through a Philox
counter-based generator, so any run can be replayed alone and the
aggregate does not depend on how runs are scheduled over workers.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .engine import Ant, Configuration, Picture, ResourceLimitError, as_rule
from .highway import (CENSUS_MAX_PERIOD, WINDOW_REPEATS, Highway,
                      canonicalise, detect_on)

log = logging.getLogger(__name__)

WORKERS_ENV = "LANGANT_WORKERS"
EXAMPLE_SEEDS_KEPT = 5
CHUNK = 250


@dataclass(frozen=True)
class ExperimentSpec:
    ruleword: str
    runs: int
    steps_per_run: int = 10**5
    shape: str = "square"
    size: int = 11
    seed: int = 0
    max_period: int = CENSUS_MAX_PERIOD
    max_cells: int = 10**7

    def __post_init__(self):
        object.__setattr__(self, "ruleword", str(as_rule(self.ruleword)))
        if self.shape not in ("square", "cross"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.steps_per_run < WINDOW_REPEATS * self.max_period:
            raise ValueError("steps_per_run must be >= 3 * max_period")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def shape_cells(shape: str, size: int) -> list[tuple[int, int]]:
    """Cells of the random patch, sorted by (y, x); the centre is the origin.

    ``cross`` keeps the cells of the square within ``size // 4`` of either
    central axis.
    """
    lo = -(size // 2)
    hi = lo + size
    arm = size // 4
    cells = []
    for y in range(lo, hi):
        for x in range(lo, hi):
            if shape == "square" or min(abs(x), abs(y)) <= arm:
                cells.append((x, y))
    return cells


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    key = np.array([seed & (2**64 - 1), run_index & (2**64 - 1)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_initial(spec: ExperimentSpec, run_index: int) -> Configuration:
    n = len(spec.ruleword)
    cells = shape_cells(spec.shape, spec.size)
    vals = run_rng(spec.seed, run_index).integers(0, n, size=len(cells))
    return Configuration(Picture(zip(cells, vals.tolist())), (0, 0), 1)


@dataclass
class RunResult:
    run_index: int
    status: str                 # "highway", "none" or "resource"
    period: int | None = None
    steps: int = 0
    highway: Highway | None = None


def run_one(spec: ExperimentSpec, run_index: int, keep_highway: bool = False) -> RunResult:
    ant = Ant(spec.ruleword, random_initial(spec, run_index),
              trace_capacity=max(1 << 16, WINDOW_REPEATS * spec.max_period),
              max_cells=spec.max_cells)
    try:
        rep = detect_on(ant, spec.steps_per_run, spec.max_period)
    except ResourceLimitError as e:
        return RunResult(run_index, "resource", steps=e.steps_done)
    if not rep.found:
        return RunResult(run_index, "none", steps=rep.steps_simulated)
    h = rep.highway if keep_highway else None
    if h is not None:
        h.provenance = {"seed": spec.seed, "run_index": run_index,
                        "steps_to_detect": rep.preperiod_bound}
    return RunResult(run_index, "highway", rep.period, rep.preperiod_bound, h)


@dataclass
class CensusReport:
    ruleword: str
    total_runs: int = 0
    no_highway: int = 0
    resource_errors: int = 0
    period_counts: dict[int, int] = field(default_factory=dict)
    example_runs: dict[int, list[int]] = field(default_factory=dict)
    spec: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0

    @property
    def highway_runs(self) -> int:
        return sum(self.period_counts.values())

    def highway_fraction(self) -> float:
        return self.highway_runs / self.total_runs if self.total_runs else 0.0

    def share(self, period: int) -> float:
        """Fraction of highway runs that ended in ``period``."""
        h = self.highway_runs
        return self.period_counts.get(period, 0) / h if h else 0.0

    def dominant_period(self) -> int | None:
        if not self.period_counts:
            return None
        return max(sorted(self.period_counts), key=lambda p: self.period_counts[p])

    def add(self, r: RunResult) -> None:
        self.total_runs += 1
        if r.status == "highway":
            self.period_counts[r.period] = self.period_counts.get(r.period, 0) + 1
            ex = self.example_runs.setdefault(r.period, [])
            ex.append(r.run_index)
            ex.sort()
            del ex[EXAMPLE_SEEDS_KEPT:]
        elif r.status == "resource":
            self.resource_errors += 1
            self.no_highway += 1
        else:
            self.no_highway += 1

    def merge(self, other: "CensusReport") -> None:
        self.total_runs += other.total_runs
        self.no_highway += other.no_highway
        self.resource_errors += other.resource_errors
        for p, c in other.period_counts.items():
            self.period_counts[p] = self.period_counts.get(p, 0) + c
        for p, ex in other.example_runs.items():
            self.example_runs[p] = sorted(set(self.example_runs.get(p, [])) | set(ex))[:EXAMPLE_SEEDS_KEPT]

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "ruleword": self.ruleword,
            "spec": self.spec,
            "total_runs": self.total_runs,
            "highway_runs": self.highway_runs,
            "no_highway": self.no_highway,
            "resource_errors": self.resource_errors,
            "periods": [
                {"period": p, "count": self.period_counts[p],
                 "share": round(self.share(p), 6),
                 "example_runs": self.example_runs.get(p, [])}
                for p in sorted(self.period_counts)],
        }
        if timing:
            out["wall_clock_s"] = round(self.wall_clock_s, 3)
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CensusReport":
        rep = cls(d["ruleword"], d["total_runs"], d["no_highway"],
                  d.get("resource_errors", 0), spec=d.get("spec", {}),
                  wall_clock_s=d.get("wall_clock_s", 0.0))
        for row in d["periods"]:
            rep.period_counts[row["period"]] = row["count"]
            rep.example_runs[row["period"]] = list(row["example_runs"])
        return rep

    def to_csv(self) -> str:
        lines = ["period,count,frequency"]
        for p in sorted(self.period_counts):
            lines.append(f"{p},{self.period_counts[p]},{self.share(p):.6f}")
        lines.append(f"none,{self.no_highway},{self.no_highway / max(1, self.total_runs):.6f}")
        return "\n".join(lines) + "\n"


def _run_chunk(spec: ExperimentSpec, start: int, stop: int) -> CensusReport:
    rep = CensusReport(spec.ruleword)
    for i in range(start, stop):
        rep.add(run_one(spec, i))
    return rep


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _chunks(runs: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + size, runs)) for s in range(0, runs, size)]


def run_census(spec: ExperimentSpec, workers: int | None = None,
               checkpoint: str | Path | None = None,
               stop_after_chunks: int | None = None) -> CensusReport:
    """Classify ``spec.runs`` runs by highway period.

    Work is cut into fixed chunks of run indices.  With ``checkpoint`` the
    per-chunk reports are saved after each chunk and skipped on resume.
    ``stop_after_chunks`` interrupts deliberately (used to test resuming).
    """
    workers = default_workers() if workers is None else workers
    t0 = time.perf_counter()
    done: dict[int, dict] = {}
    ckpt = Path(checkpoint) if checkpoint else None
    if ckpt and ckpt.exists():
        saved = json.loads(ckpt.read_text())
        if saved["spec"] != asdict(spec):
            raise ValueError("checkpoint belongs to a different experiment")
        done = {int(k): v for k, v in saved["chunks"].items()}
    chunks = _chunks(spec.runs)
    todo = [i for i in range(len(chunks)) if i not in done]
    if stop_after_chunks is not None:
        todo = todo[:stop_after_chunks]

    def save():
        if ckpt:
            tmp = ckpt.with_suffix(ckpt.suffix + ".tmp")
            tmp.write_text(json.dumps({"spec": asdict(spec), "chunks": done}))
            tmp.replace(ckpt)

    if workers <= 1:
        for i in todo:
            done[i] = _run_chunk(spec, *chunks[i]).to_dict()
            save()
    else:
        with ProcessPoolExecutor(workers) as pool:
            futs = {i: pool.submit(_run_chunk, spec, *chunks[i]) for i in todo}
            for i in todo:
                done[i] = futs[i].result().to_dict()
                save()
    rep = CensusReport(spec.ruleword, spec=asdict(spec))
    for i in sorted(done):
        rep.merge(CensusReport.from_dict(done[i]))
    rep.wall_clock_s = time.perf_counter() - t0
    log.info("census rule=%s runs=%d highways=%d wall=%.1fs", spec.ruleword,
             rep.total_runs, rep.highway_runs, rep.wall_clock_s)
    return rep


def mine(ruleword, budget: int, predicate: Callable[[Highway], bool] = lambda h: True,
         *, seed: int = 0, steps_per_run: int = 10**5, max_period: int = CENSUS_MAX_PERIOD,
         shape: str = "square", size: int = 11, first_run: int = 0,
         stop: Callable[[list[Highway]], bool] | None = None) -> list[Highway]:
    """Collect distinct verified highways matching ``predicate``.

    Runs ``budget`` census runs starting at ``first_run``; every hit is
    canonicalised and deduplicated, keeping the first reproducing run in
    its provenance.  ``stop`` may end the search early.
    """
    spec = ExperimentSpec(str(as_rule(ruleword)), budget, steps_per_run, shape, size,
                          seed, max_period)
    found: dict[tuple, Highway] = {}
    for i in range(first_run, first_run + budget):
        r = run_one(spec, i, keep_highway=True)
        if r.highway is None or not predicate(r.highway):
            continue
        c = canonicalise(r.highway)
        c.provenance = dict(r.highway.provenance)
        found.setdefault(c.key(), c)
        if stop is not None and stop(list(found.values())):
            break
    return sorted(found.values(), key=lambda h: (h.period, h.key()))


def reproduce(h: Highway, *, steps_per_run: int = 10**5, max_period: int = CENSUS_MAX_PERIOD,
              shape: str = "square", size: int = 11) -> bool:
    """Re-run the stored seed and check the same canonical highway appears."""
    prov = h.provenance
    spec = ExperimentSpec(str(h.rule), 1, steps_per_run, shape, size,
                          prov["seed"], max_period)
    r = run_one(spec, prov["run_index"], keep_highway=True)
    if r.highway is None:
        return False
    return canonicalise(r.highway).key() == canonicalise(h).key()


def summarize(reports: Iterable[CensusReport]) -> list[dict]:
    return [r.to_dict() for r in reports]
