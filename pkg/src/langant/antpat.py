"""The ``antpat`` v1 text format for configurations and patterns.

::

    antpat 1 LLRL
    ant 0 0 N
    3 -1 2
    ...

Cell lines are ``x y symbol`` sorted by (y, x).  Configurations list only
nonzero cells.  Patterns may also list cells holding 0: those mark the
support, everything else is outside it.
"""

from __future__ import annotations

from pathlib import Path

from .engine import DIR_NAMES, Configuration, Pattern, Picture, RuleWord


class AntpatError(ValueError):
    pass


def _sorted_cells(values: dict) -> list[tuple[int, int, int]]:
    return [(x, y, s) for (x, y), s in sorted(values.items(), key=lambda kv: (kv[0][1], kv[0][0]))]


def _dump(rule: RuleWord, pos, d: int, cells) -> str:
    lines = [f"antpat 1 {rule}", f"ant {pos[0]} {pos[1]} {DIR_NAMES[d]}"]
    lines += [f"{x} {y} {s}" for x, y, s in cells]
    return "\n".join(lines) + "\n"


def dumps(rule: RuleWord, c: Configuration) -> str:
    return _dump(rule, c.position, c.direction, _sorted_cells(dict(c.picture.items())))


def dumps_pattern(rule: RuleWord, p: Pattern, pos, d: int) -> str:
    return _dump(rule, pos, d, _sorted_cells(p.values))


def _parse(text: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        raise AntpatError("antpat needs a header and an ant line")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "antpat" or head[1] != "1":
        raise AntpatError(f"bad header: {lines[0]!r}")
    try:
        rule = RuleWord(head[2])
    except ValueError as e:
        raise AntpatError(str(e)) from None
    ant = lines[1].split()
    if len(ant) != 4 or ant[0] != "ant" or ant[3] not in DIR_NAMES:
        raise AntpatError(f"bad ant line: {lines[1]!r}")
    pos = (int(ant[1]), int(ant[2]))
    d = DIR_NAMES.index(ant[3])
    cells: dict = {}
    n = len(rule)
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split()
        if len(parts) != 3:
            raise AntpatError(f"line {lineno}: expected 'x y symbol'")
        x, y, s = (int(v) for v in parts)
        if not 0 <= s < n:
            raise AntpatError(f"line {lineno}: symbol {s} outside alphabet of size {n}")
        if (x, y) in cells:
            raise AntpatError(f"line {lineno}: duplicate cell {(x, y)}")
        cells[(x, y)] = s
    return rule, pos, d, cells


def loads(text: str) -> tuple[RuleWord, Configuration]:
    rule, pos, d, cells = _parse(text)
    return rule, Configuration(Picture(cells), pos, d)


def loads_pattern(text: str) -> tuple[RuleWord, Pattern, tuple[int, int], int]:
    rule, pos, d, cells = _parse(text)
    return rule, Pattern(cells), pos, d


def read(path: str | Path) -> tuple[RuleWord, Configuration]:
    return loads(Path(path).read_text(encoding="ascii"))


def write(path: str | Path, rule: RuleWord, c: Configuration) -> None:
    Path(path).write_bytes(dumps(rule, c).encode("ascii"))


def read_pattern(path: str | Path):
    return loads_pattern(Path(path).read_text(encoding="ascii"))


def write_pattern(path: str | Path, rule: RuleWord, p: Pattern, pos, d: int) -> None:
    Path(path).write_bytes(dumps_pattern(rule, p, pos, d).encode("ascii"))
