"""Compiled inner loops for the tiled grid.

The grid is a pool of ``TILE x TILE`` byte tiles addressed through an
open-addressing hash table keyed by tile coordinate.  Kernels never
allocate: when the pool or the table is full they stop and report, the
Python side grows the arrays and calls again.
"""

import numpy as np
from numba import njit

TILE_SHIFT = 6
TILE = 1 << TILE_SHIFT
TILE_MASK = TILE - 1

# direction index -> unit vector; 0=E 1=N 2=W 3=S, left turn is +1
DX = np.array([1, 0, -1, 0], dtype=np.int64)
DY = np.array([0, 1, 0, -1], dtype=np.int64)

# state vector layout
X, Y, D, T, NTILES, NONZERO = range(6)

OK = 0
NEED_GROW = 1
CELL_CAP = 2


@njit(cache=True, inline="always")
def _hash(tx, ty, mask):
    h = (tx * 0x9E3779B1 + ty * 0x85EBCA77) & 0x7FFFFFFFFFFFFFFF
    h ^= h >> 17
    return h & mask


@njit(cache=True)
def find_tile(keys_x, keys_y, slots, tx, ty):
    mask = slots.shape[0] - 1
    h = _hash(tx, ty, mask)
    while True:
        s = slots[h]
        if s < 0:
            return -1
        if keys_x[h] == tx and keys_y[h] == ty:
            return s
        h = (h + 1) & mask


@njit(cache=True)
def _get_or_create(keys_x, keys_y, slots, state, capacity, tx, ty):
    mask = slots.shape[0] - 1
    h = _hash(tx, ty, mask)
    while True:
        s = slots[h]
        if s < 0:
            break
        if keys_x[h] == tx and keys_y[h] == ty:
            return s
        h = (h + 1) & mask
    n = state[NTILES]
    # keep load factor under 1/2
    if n >= capacity or 2 * (n + 1) > slots.shape[0]:
        return -1
    keys_x[h] = tx
    keys_y[h] = ty
    slots[h] = n
    state[NTILES] = n + 1
    return n


@njit(cache=True)
def insert_tile(keys_x, keys_y, slots, state, capacity, tx, ty):
    return _get_or_create(keys_x, keys_y, slots, state, capacity, tx, ty)


@njit(cache=True)
def advance(tiles, keys_x, keys_y, slots, state, turn, nsym, steps,
            ring, max_cells):
    """Run up to ``steps`` forward steps; returns (steps_done, status)."""
    x = state[X]
    y = state[Y]
    d = state[D]
    t = state[T]
    nz = state[NONZERO]
    rmask = ring.shape[0] - 1
    capacity = tiles.shape[0]
    slot = _get_or_create(keys_x, keys_y, slots, state, capacity,
                          x >> TILE_SHIFT, y >> TILE_SHIFT)
    if slot < 0:
        return 0, NEED_GROW
    tx = x >> TILE_SHIFT
    ty = y >> TILE_SHIFT
    tile = tiles[slot]
    done = 0
    status = OK
    while done < steps:
        lx = x & TILE_MASK
        ly = y & TILE_MASK
        s = tile[ly, lx]
        ring[t & rmask] = s
        ns = s + 1
        if ns == nsym:
            ns = 0
            nz -= 1
        elif s == 0:
            nz += 1
        tile[ly, lx] = ns
        d = (d + turn[s]) & 3
        x += DX[d]
        y += DY[d]
        t += 1
        done += 1
        if nz > max_cells:
            status = CELL_CAP
            break
        ntx = x >> TILE_SHIFT
        nty = y >> TILE_SHIFT
        if ntx != tx or nty != ty:
            tx = ntx
            ty = nty
            slot = _get_or_create(keys_x, keys_y, slots, state, capacity,
                                  tx, ty)
            if slot < 0:
                status = NEED_GROW
                break
            tile = tiles[slot]
    state[X] = x
    state[Y] = y
    state[D] = d
    state[T] = t
    state[NONZERO] = nz
    return done, status


@njit(cache=True)
def retreat(tiles, keys_x, keys_y, slots, state, turn, nsym, steps):
    """Exact inverse of ``advance``; returns (steps_done, status)."""
    x = state[X]
    y = state[Y]
    d = state[D]
    t = state[T]
    nz = state[NONZERO]
    capacity = tiles.shape[0]
    done = 0
    status = OK
    while done < steps:
        px = x - DX[d]
        py = y - DY[d]
        slot = _get_or_create(keys_x, keys_y, slots, state, capacity,
                              px >> TILE_SHIFT, py >> TILE_SHIFT)
        if slot < 0:
            status = NEED_GROW
            break
        lx = px & TILE_MASK
        ly = py & TILE_MASK
        ns = tiles[slot, ly, lx]
        if ns == 0:
            s = nsym - 1
            nz += 1
        else:
            s = ns - 1
            if s == 0:
                nz -= 1
        tiles[slot, ly, lx] = s
        d = (d - turn[s]) & 3
        x = px
        y = py
        t -= 1
        done += 1
    state[X] = x
    state[Y] = y
    state[D] = d
    state[T] = t
    state[NONZERO] = nz
    return done, status


@njit(cache=True)
def advance_tracking(tiles, keys_x, keys_y, slots, state, turn, nsym, steps,
                     ring, xs, ys):
    """Like ``advance`` but stores the cell read at each step in xs/ys."""
    x = state[X]
    y = state[Y]
    d = state[D]
    t = state[T]
    nz = state[NONZERO]
    rmask = ring.shape[0] - 1
    capacity = tiles.shape[0]
    done = 0
    status = OK
    while done < steps:
        slot = _get_or_create(keys_x, keys_y, slots, state, capacity,
                              x >> TILE_SHIFT, y >> TILE_SHIFT)
        if slot < 0:
            status = NEED_GROW
            break
        lx = x & TILE_MASK
        ly = y & TILE_MASK
        s = tiles[slot, ly, lx]
        ring[t & rmask] = s
        xs[done] = x
        ys[done] = y
        ns = s + 1
        if ns == nsym:
            ns = 0
            nz -= 1
        elif s == 0:
            nz += 1
        tiles[slot, ly, lx] = ns
        d = (d + turn[s]) & 3
        x += DX[d]
        y += DY[d]
        t += 1
        done += 1
    state[X] = x
    state[Y] = y
    state[D] = d
    state[T] = t
    state[NONZERO] = nz
    return done, status


@njit(cache=True)
def smallest_suffix_period(ring, t, start, max_period, repeats):
    """Smallest p in [start, max_period] with the last repeats*p symbols p-periodic.

    Only the last ``min(t, len(ring))`` symbols are available.  Returns 0
    when no such p exists.
    """
    rmask = ring.shape[0] - 1
    avail = min(t, ring.shape[0])
    for p in range(start, max_period + 1):
        window = repeats * p
        if window > avail:
            return 0
        good = True
        for j in range(window - p):
            i = t - 1 - j
            if ring[i & rmask] != ring[(i - p) & rmask]:
                good = False
                break
        if good:
            return p
    return 0


@njit(cache=True)
def periodic_onset(ring, t, p):
    """Earliest index s such that trace[s:t] is p-periodic (ring permitting)."""
    rmask = ring.shape[0] - 1
    lowest = max(0, t - ring.shape[0])
    i = t - 1 - p
    while i >= lowest and ring[i & rmask] == ring[(i + p) & rmask]:
        i -= 1
    return i + 1
