"""Pictures of configurations: PGM rasters, SVG, and matplotlib figures.

Symbol s of an n-letter rule is drawn with grey level
``floor(255 * (1 - s / (n - 1)))``: 0 is white, the last symbol black.
The ant is an isosceles triangle pointing along its heading.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import DIRECTIONS, Configuration

FORMATS = ("pgm", "svg")


@dataclass
class RenderSpec:
    region: tuple[int, int, int, int] | None = None   # xmin, ymin, xmax, ymax; None = fit
    fmt: str = "pgm"
    cell: int = 4
    ant: bool = True
    margin: int = 1

    def __post_init__(self):
        self.fmt = self.fmt.lower()
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}, expected one of {FORMATS}")
        if self.cell < 1:
            raise ValueError("cell size must be >= 1")


def palette(n: int) -> list[int]:
    if n < 2:
        return [255]
    if n > 256:
        raise ValueError("grey palette is injective only for up to 256 symbols")
    # integer form of floor(255 * (1 - s / (n - 1))), exact for every n
    return [255 * (n - 1 - s) // (n - 1) for s in range(n)]


def region_of(c: Configuration, spec: RenderSpec) -> tuple[int, int, int, int]:
    if spec.region is not None:
        return spec.region
    x, y = c.position
    box = c.picture.bbox()
    if box is None:
        x0, y0, x1, y1 = x, y, x, y
    else:
        x0, y0, x1, y1 = box
        x0, y0, x1, y1 = min(x0, x), min(y0, y), max(x1, x), max(y1, y)
    m = spec.margin
    return x0 - m, y0 - m, x1 + m, y1 + m


def _triangle_mask(size: int, direction: int) -> np.ndarray:
    """Boolean ``size x size`` mask (row 0 on top) of a triangle pointing along ``direction``."""
    t = (np.arange(size) + 0.5) / size - 0.5
    px, py = np.meshgrid(t, -t)            # py grows upwards
    dx, dy = DIRECTIONS[direction]
    fwd = px * dx + py * dy                # coordinate along the heading
    side = -px * dy + py * dx
    return (fwd >= -0.35) & (np.abs(side) <= (0.4 - fwd) * 0.35 / 0.75)


def raster(c: Configuration, n: int, spec: RenderSpec | None = None) -> np.ndarray:
    """Grey image as a uint8 array, row 0 at the top (largest y)."""
    spec = spec or RenderSpec()
    x0, y0, x1, y1 = region_of(c, spec)
    w, h = x1 - x0 + 1, y1 - y0 + 1
    pal = np.array(palette(n), dtype=np.uint8)
    grid = np.zeros((h, w), dtype=np.int64)
    for (x, y), s in c.picture.items():
        if x0 <= x <= x1 and y0 <= y <= y1:
            grid[y1 - y, x - x0] = s
    img = np.kron(pal[grid], np.ones((spec.cell, spec.cell), dtype=np.uint8))
    ax, ay = c.position
    if spec.ant and spec.cell >= 3 and x0 <= ax <= x1 and y0 <= ay <= y1:
        r, col = (y1 - ay) * spec.cell, (ax - x0) * spec.cell
        block = img[r:r + spec.cell, col:col + spec.cell]
        ink = 0 if block[0, 0] > 127 else 255
        block[_triangle_mask(spec.cell, c.direction)] = ink
    return img


def pgm_bytes(img: np.ndarray) -> bytes:
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def svg_text(c: Configuration, n: int, spec: RenderSpec | None = None) -> str:
    spec = spec or RenderSpec(fmt="svg")
    x0, y0, x1, y1 = region_of(c, spec)
    k = spec.cell
    w, h = (x1 - x0 + 1) * k, (y1 - y0 + 1) * k
    pal = palette(n)

    def grey(s):
        v = pal[s]
        return f"#{v:02x}{v:02x}{v:02x}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}">',
           f'<rect x="0" y="0" width="{w}" height="{h}" fill="{grey(0)}"/>']
    for (x, y), s in sorted(c.picture.items(), key=lambda kv: (-kv[0][1], kv[0][0])):
        if x0 <= x <= x1 and y0 <= y <= y1:
            out.append(f'<rect x="{(x - x0) * k}" y="{(y1 - y) * k}" width="{k}" '
                       f'height="{k}" fill="{grey(s)}"/>')
    ax, ay = c.position
    if spec.ant and x0 <= ax <= x1 and y0 <= ay <= y1:
        cx, cy = (ax - x0 + 0.5) * k, (y1 - ay + 0.5) * k
        dx, dy = DIRECTIONS[c.direction]
        dy = -dy                           # svg y axis points down
        pts = [(0.4, 0.0), (-0.35, 0.35), (-0.35, -0.35)]
        xy = [(cx + k * (f * dx - s * dy), cy + k * (f * dy + s * dx)) for f, s in pts]
        s_under = c.picture[(ax, ay)]
        ink = "#000000" if pal[s_under] > 127 else "#ffffff"
        out.append('<polygon points="' + " ".join(f"{px:g},{py:g}" for px, py in xy)
                   + f'" fill="{ink}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(c: Configuration, n: int, spec: RenderSpec | None = None) -> bytes:
    spec = spec or RenderSpec()
    if spec.fmt == "pgm":
        return pgm_bytes(raster(c, n, spec))
    return svg_text(c, n, spec).encode("ascii")


def render_to(path: str | Path, c: Configuration, n: int, spec: RenderSpec | None = None) -> None:
    Path(path).write_bytes(render(c, n, spec))


# -- matplotlib figures for reports -----------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_census(report, path: str | Path, top: int = 12) -> None:
    """Bar chart of the most frequent highway periods of one census report."""
    plt = _pyplot()
    rows = sorted(report.period_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if rows:
        labels = [str(p) for p, _ in rows]
        shares = [100 * report.share(p) for p, _ in rows]
        ax.bar(labels, shares, color="0.35")
        ax.set_xlabel("period")
    ax.set_ylabel("share of highway runs (%)")
    ax.set_title(f"{report.ruleword}: {report.highway_runs}/{report.total_runs} runs "
                 "reached a highway", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_configuration(c: Configuration, n: int, path: str | Path,
                       title: str = "", spec: RenderSpec | None = None) -> None:
    plt = _pyplot()
    spec = spec or RenderSpec(cell=1, ant=False)
    img = raster(c, n, spec)
    x0, y0, x1, y1 = region_of(c, spec)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(img, cmap="gray", vmin=0, vmax=255, interpolation="nearest",
              extent=(x0 - 0.5, x1 + 0.5, y0 - 0.5, y1 + 0.5))
    ax.plot([c.position[0]], [c.position[1]], marker="o", color="red", ms=3)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_periods(ns: Sequence[int], periods: Sequence[int], path: str | Path,
                 title: str = "") -> None:
    """Period against family index, e.g. the LLRLRL progression."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.plot(ns, periods, "o-", color="0.2")
    ax.set_xlabel("n")
    ax.set_ylabel("period")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
