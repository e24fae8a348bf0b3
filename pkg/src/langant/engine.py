"""Generalised ant dynamics on the unbounded square grid.

Two layers live here.  The value layer (:class:`Picture`,
:class:`Configuration`, :func:`step`, :func:`unstep`,
:func:`apply_pattern_steps`) is plain Python and easy to reason about.
The fast layer (:class:`Ant`) keeps the picture in a tiled sparse grid and
drives the compiled kernels; :func:`run` bridges the two.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import _kernels as K

Cell = tuple[int, int]

DIRECTIONS: tuple[Cell, ...] = ((1, 0), (0, 1), (-1, 0), (0, -1))
DIR_NAMES = "ENWS"

DEFAULT_MAX_STEPS = 10**7
DEFAULT_MAX_CELLS = 10**8
DEFAULT_TRACE_CAPACITY = 1 << 20


class EngineError(Exception):
    pass


class ResourceLimitError(EngineError):
    """The nonzero-cell count went over the configured cap."""

    def __init__(self, nonzero: int, cap: int, steps_done: int):
        super().__init__(
            f"nonzero cells {nonzero} exceed cap {cap} after {steps_done} steps")
        self.nonzero = nonzero
        self.cap = cap
        self.steps_done = steps_done


class OutOfSupportError(EngineError):
    """The ant stepped off a pattern's support.

    ``step_index`` is 1-based: the step whose move landed outside.
    """

    def __init__(self, step_index: int, cell: Cell):
        super().__init__(f"ant left the support at step {step_index} ({cell})")
        self.step_index = step_index
        self.cell = cell


# -- rule words ---------------------------------------------------------------

_POWER = re.compile(r"([LR])(?:\^?\{?(\d+)\}?)?")


@dataclass(frozen=True)
class RuleWord:
    """An ant program: symbol ``s`` turns per ``letters[s]``."""

    letters: str

    def __post_init__(self):
        if not self.letters or set(self.letters) - {"L", "R"}:
            raise ValueError(f"rule word must be a nonempty word over L,R: {self.letters!r}")
        if len(self.letters) > 256:
            raise ValueError("rule words longer than 256 letters are not supported")

    @classmethod
    def parse(cls, text: str) -> "RuleWord":
        """Accept plain words (``LLRL``) and powers (``L6R``, ``L^6R``, ``L^{12}R``)."""
        text = text.strip().upper()
        pos = 0
        out = []
        for m in _POWER.finditer(text):
            if m.start() != pos:
                break
            out.append(m.group(1) * int(m.group(2) or 1))
            pos = m.end()
        if pos != len(text):
            raise ValueError(f"cannot parse rule word {text!r}")
        return cls("".join(out))

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def nontrivial(self) -> bool:
        return "L" in self.letters and "R" in self.letters

    @property
    def turns(self) -> np.ndarray:
        """Direction-index increment per symbol: +1 for L, -1 (mod 4) for R."""
        return np.array([1 if c == "L" else 3 for c in self.letters], dtype=np.int64)


def as_rule(w) -> RuleWord:
    return w if isinstance(w, RuleWord) else RuleWord.parse(str(w))


def rotate_left(d: int) -> int:
    return (d + 1) & 3


def rotate_right(d: int) -> int:
    return (d - 1) & 3


def dir_index(d) -> int:
    """Direction index from an index, a letter in ``ENWS`` or a unit vector."""
    if isinstance(d, str):
        return DIR_NAMES.index(d.upper())
    if isinstance(d, tuple):
        return DIRECTIONS.index(d)
    return int(d) & 3


# -- pictures and configurations ------------------------------------------------

class Picture:
    """Sparse total function Z^2 -> symbols; absent cells hold 0.

    Zero is never stored, so two pictures are equal iff their maps are.
    """

    __slots__ = ("_cells",)

    def __init__(self, cells=None):
        self._cells: dict[Cell, int] = {}
        if cells:
            items = cells.items() if hasattr(cells, "items") else cells
            for (x, y), s in items:
                if s:
                    self._cells[(int(x), int(y))] = int(s)

    def __getitem__(self, cell: Cell) -> int:
        return self._cells.get(cell, 0)

    def __setitem__(self, cell: Cell, s: int) -> None:
        if s:
            self._cells[cell] = s
        else:
            self._cells.pop(cell, None)

    def __eq__(self, other) -> bool:
        if isinstance(other, Picture):
            return self._cells == other._cells
        return NotImplemented

    def __len__(self) -> int:
        return len(self._cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self._cells)

    def __repr__(self) -> str:
        return f"Picture({dict(sorted(self._cells.items(), key=lambda kv: (kv[0][1], kv[0][0])))})"

    def items(self):
        return self._cells.items()

    def copy(self) -> "Picture":
        p = Picture()
        p._cells = dict(self._cells)
        return p

    def shifted(self, dx: int, dy: int) -> "Picture":
        p = Picture()
        p._cells = {(x + dx, y + dy): s for (x, y), s in self._cells.items()}
        return p

    def bbox(self) -> tuple[int, int, int, int] | None:
        if not self._cells:
            return None
        xs = [c[0] for c in self._cells]
        ys = [c[1] for c in self._cells]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass
class Configuration:
    picture: Picture = field(default_factory=Picture)
    position: Cell = (0, 0)
    direction: int = 1

    def __post_init__(self):
        if not isinstance(self.picture, Picture):
            self.picture = Picture(self.picture)
        self.position = (int(self.position[0]), int(self.position[1]))
        self.direction = dir_index(self.direction)

    @classmethod
    def white(cls, direction=1) -> "Configuration":
        return cls(Picture(), (0, 0), direction)

    def copy(self) -> "Configuration":
        return Configuration(self.picture.copy(), self.position, self.direction)


@dataclass
class Trace:
    """Symbols read by the ant, one per step.

    ``symbols`` holds the last ``len(symbols)`` entries of a trace whose full
    length is ``length`` (the ring buffer keeps only a bounded suffix).
    """

    symbols: np.ndarray
    length: int

    @property
    def complete(self) -> bool:
        return len(self.symbols) == self.length

    def __len__(self) -> int:
        return self.length

    def tolist(self) -> list[int]:
        return self.symbols.tolist()


# -- single steps on values ---------------------------------------------------------

def step(w, c: Configuration) -> Configuration:
    w = as_rule(w)
    n = len(w)
    x, y = c.position
    s = c.picture[(x, y)]
    pic = c.picture.copy()
    pic[(x, y)] = (s + 1) % n
    d = rotate_left(c.direction) if w.letters[s] == "L" else rotate_right(c.direction)
    dx, dy = DIRECTIONS[d]
    return Configuration(pic, (x + dx, y + dy), d)


def unstep(w, c: Configuration) -> Configuration:
    w = as_rule(w)
    n = len(w)
    dx, dy = DIRECTIONS[c.direction]
    prev = (c.position[0] - dx, c.position[1] - dy)
    s = (c.picture[prev] - 1) % n
    pic = c.picture.copy()
    pic[prev] = s
    d = rotate_right(c.direction) if w.letters[s] == "L" else rotate_left(c.direction)
    return Configuration(pic, prev, d)


# -- fast simulator ---------------------------------------------------------------

class Ant:
    """A mutable ant on a tiled sparse grid.

    The picture lives in ``TILE x TILE`` byte tiles looked up through a hash
    table; only tiles the ant has entered are allocated.  The last
    ``trace_capacity`` read symbols are kept in a ring buffer.
    """

    def __init__(self, w, config: Configuration | None = None, *,
                 trace_capacity: int = DEFAULT_TRACE_CAPACITY,
                 max_cells: int = DEFAULT_MAX_CELLS, tile_capacity: int = 64):
        self.rule = as_rule(w)
        self.nsym = len(self.rule)
        self._turn = self.rule.turns
        self.max_cells = int(max_cells)
        cap = 1 << max(4, int(trace_capacity - 1).bit_length())
        self.ring = np.zeros(cap, dtype=np.uint8)
        self._alloc(tile_capacity)
        self.state = np.zeros(6, dtype=np.int64)
        config = config or Configuration.white()
        self.load(config)

    def _alloc(self, n: int) -> None:
        self.tiles = np.zeros((n, K.TILE, K.TILE), dtype=np.uint8)
        hsize = 1 << (2 * n - 1).bit_length()
        self.keys_x = np.zeros(hsize, dtype=np.int64)
        self.keys_y = np.zeros(hsize, dtype=np.int64)
        self.slots = np.full(hsize, -1, dtype=np.int32)

    def _grow(self) -> None:
        old_tiles, kx, ky, sl = self.tiles, self.keys_x, self.keys_y, self.slots
        n = int(self.state[K.NTILES])
        self._alloc(2 * old_tiles.shape[0])
        self.tiles[: old_tiles.shape[0]] = old_tiles
        self.state[K.NTILES] = 0
        used = sl >= 0
        order = np.argsort(sl[used])
        for tx, ty in zip(kx[used][order], ky[used][order]):
            K.insert_tile(self.keys_x, self.keys_y, self.slots, self.state,
                          self.tiles.shape[0], tx, ty)
        assert self.state[K.NTILES] == n

    def load(self, config: Configuration) -> None:
        self.state[:] = 0
        self.tiles[:] = 0
        self.slots[:] = -1
        for (x, y), s in config.picture.items():
            if not 0 <= s < self.nsym:
                raise ValueError(f"symbol {s} at {(x, y)} outside alphabet of size {self.nsym}")
            self[(x, y)] = s
        self.state[K.X], self.state[K.Y] = config.position
        self.state[K.D] = config.direction
        self.state[K.T] = 0

    # cell access
    def _slot(self, x: int, y: int, create: bool) -> int:
        tx, ty = x >> K.TILE_SHIFT, y >> K.TILE_SHIFT
        s = K.find_tile(self.keys_x, self.keys_y, self.slots, tx, ty)
        while s < 0 and create:
            s = K.insert_tile(self.keys_x, self.keys_y, self.slots, self.state,
                              self.tiles.shape[0], tx, ty)
            if s < 0:
                self._grow()
        return s

    def __getitem__(self, cell: Cell) -> int:
        x, y = cell
        s = self._slot(x, y, False)
        return 0 if s < 0 else int(self.tiles[s, y & K.TILE_MASK, x & K.TILE_MASK])

    def __setitem__(self, cell: Cell, v: int) -> None:
        x, y = cell
        s = self._slot(x, y, True)
        old = int(self.tiles[s, y & K.TILE_MASK, x & K.TILE_MASK])
        self.tiles[s, y & K.TILE_MASK, x & K.TILE_MASK] = v
        self.state[K.NONZERO] += (v != 0) - (old != 0)

    @property
    def position(self) -> Cell:
        return int(self.state[K.X]), int(self.state[K.Y])

    @property
    def direction(self) -> int:
        return int(self.state[K.D])

    @property
    def time(self) -> int:
        return int(self.state[K.T])

    @property
    def nonzero(self) -> int:
        return int(self.state[K.NONZERO])

    def picture(self) -> Picture:
        pic = Picture()
        used = self.slots >= 0
        for tx, ty, s in zip(self.keys_x[used], self.keys_y[used], self.slots[used]):
            ys, xs = np.nonzero(self.tiles[s])
            vals = self.tiles[s][ys, xs]
            bx, by = int(tx) << K.TILE_SHIFT, int(ty) << K.TILE_SHIFT
            for x, y, v in zip(xs.tolist(), ys.tolist(), vals.tolist()):
                pic._cells[(bx + x, by + y)] = v
        return pic

    def configuration(self) -> Configuration:
        return Configuration(self.picture(), self.position, self.direction)

    # dynamics
    def advance(self, steps: int) -> None:
        left = int(steps)
        while left > 0:
            done, status = K.advance(self.tiles, self.keys_x, self.keys_y, self.slots,
                                     self.state, self._turn, self.nsym, left,
                                     self.ring, self.max_cells)
            left -= done
            if status == K.NEED_GROW:
                self._grow()
            elif status == K.CELL_CAP:
                raise ResourceLimitError(self.nonzero, self.max_cells, self.time)

    def retreat(self, steps: int) -> None:
        left = int(steps)
        while left > 0:
            done, status = K.retreat(self.tiles, self.keys_x, self.keys_y, self.slots,
                                     self.state, self._turn, self.nsym, left)
            left -= done
            if status == K.NEED_GROW:
                self._grow()

    def advance_tracking(self, steps: int) -> tuple[np.ndarray, np.ndarray]:
        """Advance and return the x, y arrays of the cells read."""
        xs = np.empty(steps, dtype=np.int64)
        ys = np.empty(steps, dtype=np.int64)
        done_total = 0
        while done_total < steps:
            done, status = K.advance_tracking(
                self.tiles, self.keys_x, self.keys_y, self.slots, self.state,
                self._turn, self.nsym, steps - done_total, self.ring,
                xs[done_total:], ys[done_total:])
            done_total += done
            if status == K.NEED_GROW:
                self._grow()
        return xs, ys

    def trace_suffix(self, n: int) -> np.ndarray:
        """The last ``n`` read symbols (n must not exceed what the ring holds)."""
        t = self.time
        if n > min(t, len(self.ring)):
            raise ValueError(f"only {min(t, len(self.ring))} trace symbols available")
        idx = np.arange(t - n, t) & (len(self.ring) - 1)
        return self.ring[idx].copy()


def run(w, c: Configuration, steps: int, *, max_cells: int = DEFAULT_MAX_CELLS,
        trace_capacity: int = DEFAULT_TRACE_CAPACITY,
        spill: str | Path | None = None) -> tuple[Configuration, Trace]:
    """Apply ``steps`` steps, recording the symbol read at each one.

    The returned trace keeps the last ``trace_capacity`` symbols; pass
    ``spill`` to also write the full trace to that file as raw bytes.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    ant = Ant(w, c, trace_capacity=trace_capacity, max_cells=max_cells)
    cap = len(ant.ring)
    if spill is None:
        ant.advance(steps)
    else:
        with open(spill, "wb") as fh:
            left = steps
            while left:
                chunk = min(left, cap)
                ant.advance(chunk)
                fh.write(ant.trace_suffix(chunk).tobytes())
                left -= chunk
    kept = min(steps, cap)
    return ant.configuration(), Trace(ant.trace_suffix(kept) if kept else
                                      np.zeros(0, dtype=np.uint8), steps)


# -- patterns ----------------------------------------------------------------------

class Pattern:
    """A symbol assignment on a finite support; zero is a legal value inside."""

    __slots__ = ("values",)

    def __init__(self, values=None):
        self.values: dict[Cell, int] = {}
        if values:
            items = values.items() if hasattr(values, "items") else values
            for (x, y), s in items:
                self.values[(int(x), int(y))] = int(s)

    @classmethod
    def from_picture(cls, pic: Picture, support: Iterable[Cell]) -> "Pattern":
        return cls({c: pic[c] for c in support})

    @property
    def support(self) -> set[Cell]:
        return set(self.values)

    def __contains__(self, cell) -> bool:
        return cell in self.values

    def __getitem__(self, cell: Cell) -> int:
        return self.values[cell]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if isinstance(other, Pattern):
            return self.values == other.values
        return NotImplemented

    def __repr__(self) -> str:
        return f"Pattern({len(self.values)} cells)"

    def copy(self) -> "Pattern":
        return Pattern(self.values)

    def shifted(self, dx: int, dy: int) -> "Pattern":
        return Pattern({(x + dx, y + dy): s for (x, y), s in self.values.items()})

    def rotated(self, quarter_turns: int) -> "Pattern":
        return Pattern({rotate_cell(c, quarter_turns): s for c, s in self.values.items()})

    def to_picture(self) -> Picture:
        return Picture(self.values)

    def cells(self) -> list[tuple[int, int, int]]:
        """(x, y, s) triples sorted by (y, x)."""
        return [(x, y, s) for (x, y), s in sorted(self.values.items(), key=lambda kv: (kv[0][1], kv[0][0]))]


def rotate_cell(c: Cell, quarter_turns: int) -> Cell:
    x, y = c
    for _ in range(quarter_turns & 3):
        x, y = -y, x
    return x, y


def apply_pattern_steps(w, p: Pattern, pos: Cell, d, steps: int,
                        trace: list | None = None) -> tuple[Pattern, Cell, int]:
    """Step the ant over ``p`` only, failing as soon as a move leaves the support.

    The landing cell after every step, including the last, must lie in the
    support.  Read symbols are appended to ``trace`` when given.
    """
    w = as_rule(w)
    n = len(w)
    letters = w.letters
    vals = dict(p.values)
    x, y = pos
    d = dir_index(d)
    if (x, y) not in vals:
        raise OutOfSupportError(0, (x, y))
    for i in range(1, steps + 1):
        s = vals[(x, y)]
        if trace is not None:
            trace.append(s)
        vals[(x, y)] = (s + 1) % n
        d = (d + 1) & 3 if letters[s] == "L" else (d - 1) & 3
        x += DIRECTIONS[d][0]
        y += DIRECTIONS[d][1]
        if (x, y) not in vals:
            raise OutOfSupportError(i, (x, y))
    out = Pattern()
    out.values = vals
    return out, (x, y), d
