"""Problem instances: Chimera topology, weak-strong cluster networks, energies.

A Chimera graph is a grid of bipartite K4,4 unit cells (8 sites each: four
"left" sites fully coupled to four "right" sites).  Horizontally adjacent
cells are joined by four couplers between equal-slot left sites, vertically
adjacent cells by four couplers between equal-slot right sites.

A weak-strong cluster network assigns every used cell to exactly one
(strong, weak) pair of adjacent cells.  Within cells and between the two
cells of a pair every coupler is ferromagnetic (+scale).  Strong cells get a
local field of -scale per site, weak cells +lambda*scale with lambda < 1/2,
so a weak cluster prefers to follow its field at high temperature but is
dragged along by its strong partner in the ground state.  Strong cells are
wired to each other through "backbone" edges whose random signs frustrate
the network; each backbone edge applies one shared sign to its four
couplers.

All energies are exact integers in "scaled" units: the integer values of J
and h as stored (physical energy = scaled / scale).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from numba import njit

LEFT = 0
RIGHT = 1
SITES_PER_CELL = 8
SLOTS = 4

DEFAULT_SCALE = 25
#: Default weak-to-strong field ratio, as an exact rational (must stay < 1/2).
DEFAULT_LAMBDA = (11, 25)

#: Exhaustive enumeration refuses instances above this many sites.
BRUTE_FORCE_SITE_LIMIT = 24

FORMAT_VERSION = 1

Cell = tuple[int, int]


class ValidationError(ValueError):
    """A precondition on user-supplied data does not hold."""


class InstanceFormatError(ValidationError):
    """Instance text failed to parse or validate; message carries the field path."""


# ---------------------------------------------------------------------------
# Chimera topology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChimeraCoord:
    """Position of one site: unit cell, side of the bipartition, slot 0-3."""

    cell_row: int
    cell_col: int
    side: int
    slot: int

    def validate(self, rows: int, cols: int) -> None:
        if not (0 <= self.cell_row < rows and 0 <= self.cell_col < cols):
            raise ValidationError(f"cell ({self.cell_row},{self.cell_col}) outside {rows}x{cols} grid")
        if self.side not in (LEFT, RIGHT):
            raise ValidationError(f"side must be {LEFT} or {RIGHT}, got {self.side}")
        if not 0 <= self.slot < SLOTS:
            raise ValidationError(f"slot must be in 0..3, got {self.slot}")


@dataclass(frozen=True)
class ChimeraGraph:
    """Full rows x cols Chimera grid with a canonical site numbering."""

    rows: int
    cols: int
    edges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return SITES_PER_CELL * self.rows * self.cols

    def site_index(self, coord: ChimeraCoord) -> int:
        coord.validate(self.rows, self.cols)
        cell = coord.cell_row * self.cols + coord.cell_col
        return (cell * 2 + coord.side) * SLOTS + coord.slot

    def coord_at(self, site: int) -> ChimeraCoord:
        if not 0 <= site < self.n:
            raise ValidationError(f"site {site} outside 0..{self.n - 1}")
        slot = site % SLOTS
        side = (site // SLOTS) % 2
        cell = site // SITES_PER_CELL
        return ChimeraCoord(cell // self.cols, cell % self.cols, side, slot)


def build_chimera(rows: int, cols: int) -> ChimeraGraph:
    """Construct the Chimera grid graph; 8 sites and 16 internal edges per cell.

    Shared edges: 4 between equal-slot left sites of horizontal neighbours,
    4 between equal-slot right sites of vertical neighbours, so the total
    edge count is 16*r*c + 4*r*(c-1) + 4*(r-1)*c.
    """
    if not (1 <= rows <= 4 and 1 <= cols <= 4):
        raise ValidationError(f"grid dimensions must be in 1..4, got {rows}x{cols}")
    graph = ChimeraGraph(rows, cols, ())
    edges: list[tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            for a in range(SLOTS):
                for b in range(SLOTS):
                    i = graph.site_index(ChimeraCoord(r, c, LEFT, a))
                    j = graph.site_index(ChimeraCoord(r, c, RIGHT, b))
                    edges.append((min(i, j), max(i, j)))
            if c + 1 < cols:
                for a in range(SLOTS):
                    i = graph.site_index(ChimeraCoord(r, c, LEFT, a))
                    j = graph.site_index(ChimeraCoord(r, c + 1, LEFT, a))
                    edges.append((min(i, j), max(i, j)))
            if r + 1 < rows:
                for a in range(SLOTS):
                    i = graph.site_index(ChimeraCoord(r, c, RIGHT, a))
                    j = graph.site_index(ChimeraCoord(r + 1, c, RIGHT, a))
                    edges.append((min(i, j), max(i, j)))
    return ChimeraGraph(rows, cols, tuple(sorted(edges)))


def _cells_adjacent(a: Cell, b: Cell) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


# ---------------------------------------------------------------------------
# Weak-strong layouts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakStrongLayout:
    """Pairing of unit cells into (strong, weak) clusters plus the backbone.

    ``pairs`` lists (strong_cell, weak_cell); the two cells of a pair must be
    grid-adjacent and no cell may appear twice.  ``backbone`` lists
    (cell_a, cell_b, sign) edges between strong cells of *different* pairs;
    sign is -1 or +1, or 0 meaning "draw at generation time".
    ``lambda_num/lambda_den`` is the weak-to-strong field ratio (< 1/2).
    """

    grid_rows: int
    grid_cols: int
    pairs: tuple[tuple[Cell, Cell], ...]
    backbone: tuple[tuple[Cell, Cell, int], ...] = ()
    lambda_num: int = DEFAULT_LAMBDA[0]
    lambda_den: int = DEFAULT_LAMBDA[1]

    def validate(self) -> None:
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValidationError("layout grid must be at least 1x1")
        if not self.pairs:
            raise ValidationError("layout needs at least one (strong, weak) pair")
        if not (0 < self.lambda_num * 2 < self.lambda_den):
            raise ValidationError(
                f"weak/strong field ratio must be < 1/2, got {self.lambda_num}/{self.lambda_den}"
            )
        seen: set[Cell] = set()
        strong: set[Cell] = set()
        for k, (s, w) in enumerate(self.pairs):
            for cell in (s, w):
                if not (0 <= cell[0] < self.grid_rows and 0 <= cell[1] < self.grid_cols):
                    raise ValidationError(f"pairs[{k}]: cell {cell} outside grid")
                if cell in seen:
                    raise ValidationError(f"pairs[{k}]: cell {cell} used twice")
                seen.add(cell)
            if not _cells_adjacent(s, w):
                raise ValidationError(f"pairs[{k}]: cells {s} and {w} are not adjacent")
            strong.add(s)
        bseen: set[tuple[Cell, Cell]] = set()
        for k, (a, b, sign) in enumerate(self.backbone):
            if a not in strong or b not in strong:
                raise ValidationError(f"backbone[{k}]: {a}-{b} must join strong cells")
            if not _cells_adjacent(a, b):
                raise ValidationError(f"backbone[{k}]: cells {a} and {b} are not adjacent")
            key = tuple(sorted((a, b)))
            if key in bseen:
                raise ValidationError(f"backbone[{k}]: duplicate edge {a}-{b}")
            bseen.add(key)
            if sign not in (-1, 0, 1):
                raise ValidationError(f"backbone[{k}]: sign must be -1, 0 or +1, got {sign}")

    def used_cells(self) -> tuple[Cell, ...]:
        """All cells of the layout in row-major order; generated instances
        number their sites in consecutive 8-site blocks following this order."""
        cells: set[Cell] = set()
        for s, w in self.pairs:
            cells.add(s)
            cells.add(w)
        return tuple(sorted(cells))

    def to_payload(self) -> dict:
        return {
            "grid_rows": self.grid_rows,
            "grid_cols": self.grid_cols,
            "pairs": [[list(s), list(w)] for s, w in self.pairs],
            "backbone": [[list(a), list(b), sign] for a, b, sign in self.backbone],
            "lambda_num": self.lambda_num,
            "lambda_den": self.lambda_den,
        }


def ladder_layout(pairs: int) -> WeakStrongLayout:
    """Deterministic two-rail arrangement of ``pairs`` weak-strong pairs.

    Strong cells sit on two horizontal rails (cell rows 1 and 2); each top
    strong cell carries its weak partner above it, each bottom one below.
    The backbone consists of both rails plus a vertical rung per column,
    giving a connected strong-cell graph with one frustration plaquette per
    column gap.  An odd pair count appends a pendant pair on the top rail.
    Sites number 16*pairs; backbone signs are left open (drawn at
    generation).
    """
    if pairs < 1:
        raise ValidationError(f"pair count must be >= 1, got {pairs}")
    m, pendant = divmod(pairs, 2)
    pair_list: list[tuple[Cell, Cell]] = []
    backbone: list[tuple[Cell, Cell, int]] = []
    for j in range(m):
        pair_list.append(((1, j), (0, j)))
        pair_list.append(((2, j), (3, j)))
    for j in range(m - 1):
        backbone.append(((1, j), (1, j + 1), 0))
        backbone.append(((2, j), (2, j + 1), 0))
    for j in range(m):
        backbone.append(((1, j), (2, j), 0))
    if pendant:
        pair_list.append(((1, m), (0, m)))
        if m:
            backbone.append(((1, m - 1), (1, m), 0))
    rows = 2 if pairs == 1 else 4
    return WeakStrongLayout(rows, max(m + pendant, 1), tuple(pair_list), tuple(backbone))


def chain_layout(pairs: int) -> WeakStrongLayout:
    """Single-rail variant of :func:`ladder_layout`: a path backbone (no cycles)."""
    if pairs < 1:
        raise ValidationError(f"pair count must be >= 1, got {pairs}")
    pair_list = [((1, j), (0, j)) for j in range(pairs)]
    backbone = [((1, j), (1, j + 1), 0) for j in range(pairs - 1)]
    return WeakStrongLayout(2, pairs, tuple(pair_list), tuple(backbone))


# ---------------------------------------------------------------------------
# Problem instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """An Ising problem: integer couplers, integer fields, optional metadata.

    ``fields`` holds (site, h) entries sorted by site, ``couplings`` holds
    (i, j, J) with i < j sorted lexicographically.  ``offset_scaled`` is an
    additive constant (nonzero only for reduced instances, where collapsing
    a cell freezes its internal bonds).  ``reference_energy_scaled`` is the
    target used for success flags; its provenance is ``reference_method``
    ("construction", "exhaustive" or "consensus").
    """

    n: int
    scale: int
    fields: tuple[tuple[int, int], ...]
    couplings: tuple[tuple[int, int, int], ...]
    layout: WeakStrongLayout | None = None
    reference_energy_scaled: int | None = None
    reference_method: str | None = None
    offset_scaled: int = 0
    defaulted: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", tuple((int(s), int(h)) for s, h in self.fields))
        object.__setattr__(self, "couplings", tuple((int(i), int(j), int(J)) for i, j, J in self.couplings))
        if self.n < 1:
            raise ValidationError(f"site count must be >= 1, got {self.n}")
        if self.scale < 1:
            raise ValidationError(f"scale must be a positive integer, got {self.scale}")
        seen_sites: set[int] = set()
        for s, _ in self.fields:
            if not 0 <= s < self.n:
                raise ValidationError(f"field site {s} outside 0..{self.n - 1}")
            if s in seen_sites:
                raise ValidationError(f"duplicate field entry for site {s}")
            seen_sites.add(s)
        if list(self.fields) != sorted(self.fields):
            raise ValidationError("field entries must be sorted by site")
        seen_edges: set[tuple[int, int]] = set()
        for i, j, _ in self.couplings:
            if i == j:
                raise ValidationError(f"self-loop ({i},{j})")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"coupling ({i},{j}) outside 0..{self.n - 1}")
            if i > j:
                raise ValidationError(f"coupling ({i},{j}) must be ordered i < j")
            if (i, j) in seen_edges:
                raise ValidationError(f"duplicate coupling ({i},{j})")
            seen_edges.add((i, j))
        if list(self.couplings) != sorted(self.couplings):
            raise ValidationError("couplings must be sorted")
        if self.reference_method is not None and self.reference_method not in (
            "construction",
            "exhaustive",
            "consensus",
        ):
            raise ValidationError(f"unknown reference method {self.reference_method!r}")

    # -- dense/CSR views (cached; instances are immutable) ------------------

    @cached_property
    def field_array(self) -> np.ndarray:
        h = np.zeros(self.n, dtype=np.int64)
        for s, v in self.fields:
            h[s] = v
        return h

    @cached_property
    def coupling_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.couplings:
            ci, cj, cJ = (np.array(x, dtype=np.int64) for x in zip(*self.couplings))
        else:
            ci = cj = cJ = np.zeros(0, dtype=np.int64)
        return ci, cj, cJ

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR view (indptr, neighbour site, neighbour J) with every edge
        listed from both endpoints."""
        ci, cj, cJ = self.coupling_arrays
        counts = np.zeros(self.n + 1, dtype=np.int64)
        for i, j in zip(ci, cj):
            counts[i + 1] += 1
            counts[j + 1] += 1
        indptr = np.cumsum(counts)
        nbr = np.zeros(max(indptr[-1], 1), dtype=np.int64)
        jv = np.zeros_like(nbr)
        cursor = indptr[:-1].copy()
        for i, j, J in zip(ci, cj, cJ):
            nbr[cursor[i]] = j
            jv[cursor[i]] = J
            cursor[i] += 1
            nbr[cursor[j]] = i
            jv[cursor[j]] = J
            cursor[j] += 1
        return indptr, nbr, jv

    @property
    def max_abs_delta(self) -> int:
        """Upper bound on |energy change| of any single-site flip."""
        indptr, _, jv = self.adjacency
        h = self.field_array
        worst = 0
        for i in range(self.n):
            worst = max(worst, 2 * (np.abs(jv[indptr[i] : indptr[i + 1]]).sum() + abs(h[i])))
        return int(worst)

    # -- energies ------------------------------------------------------------

    def check_state(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state)
        if state.shape != (self.n,):
            raise ValidationError(f"state must have shape ({self.n},), got {state.shape}")
        if not np.all(np.abs(state) == 1):
            raise ValidationError("state entries must be -1 or +1")
        return state.astype(np.int8, copy=False)

    def energy(self, state: np.ndarray) -> int:
        """Exact integer energy -sum J s s - sum h s (+ offset) in scaled units."""
        s = self.check_state(state).astype(np.int64)
        ci, cj, cJ = self.coupling_arrays
        e = -(cJ * s[ci] * s[cj]).sum() - self.field_array @ s
        return int(e) + self.offset_scaled

    def delta_energy(self, state: np.ndarray, site: int) -> int:
        """Energy change of flipping ``site``, exact and O(degree)."""
        s = self.check_state(state)
        if not 0 <= site < self.n:
            raise ValidationError(f"site {site} outside 0..{self.n - 1}")
        indptr, nbr, jv = self.adjacency
        lo, hi = indptr[site], indptr[site + 1]
        local = int(self.field_array[site]) + int(jv[lo:hi] @ s[nbr[lo:hi]].astype(np.int64))
        return 2 * int(s[site]) * local

    def with_reference(self, energy_scaled: int, method: str) -> "ProblemInstance":
        return replace(self, reference_energy_scaled=int(energy_scaled), reference_method=method)


def all_down_state(n: int) -> np.ndarray:
    return np.full(n, -1, dtype=np.int8)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.integers(0, 2, size=n) * 2 - 1).astype(np.int8)


# ---------------------------------------------------------------------------
# Network generation
# ---------------------------------------------------------------------------


def _shared_couplers(graph_cols: int, a: Cell, b: Cell, cell_index: Mapping[Cell, int]) -> list[tuple[int, int]]:
    """The four equal-slot boundary couplers between adjacent cells a and b."""
    side = LEFT if a[0] == b[0] else RIGHT
    ka, kb = cell_index[a], cell_index[b]
    out = []
    for slot in range(SLOTS):
        i = ka * SITES_PER_CELL + side * SLOTS + slot
        j = kb * SITES_PER_CELL + side * SLOTS + slot
        out.append((min(i, j), max(i, j)))
    return out


def generate_network(
    layout: WeakStrongLayout,
    scale: int = DEFAULT_SCALE,
    rng: np.random.Generator | None = None,
) -> ProblemInstance:
    """Realize a weak-strong cluster network as a concrete problem instance.

    ``scale`` must be divisible by the field-ratio denominator so all fields
    are exact integers.  Backbone edges with sign 0 draw a fair +-1 from
    ``rng`` (required in that case); the realized signs are recorded in the
    returned instance's layout.  The reference energy is the exact optimum
    over cell-uniform states — the designed ground manifold of this family —
    enumerated for small cell counts and solved by an exact grid dynamic
    program otherwise; tiny instances are verified by full exhaustion.
    """
    layout.validate()
    if scale < 1 or scale % layout.lambda_den != 0:
        raise ValidationError(
            f"scale must be a positive multiple of {layout.lambda_den}, got {scale}"
        )
    weak_h = layout.lambda_num * (scale // layout.lambda_den)

    cells = layout.used_cells()
    cell_index = {cell: k for k, cell in enumerate(cells)}
    n = SITES_PER_CELL * len(cells)

    couplings: dict[tuple[int, int], int] = {}
    for k in range(len(cells)):
        base = k * SITES_PER_CELL
        for a in range(SLOTS):
            for b in range(SLOTS):
                couplings[(base + a, base + SLOTS + b)] = scale
    for s_cell, w_cell in layout.pairs:
        for edge in _shared_couplers(layout.grid_cols, s_cell, w_cell, cell_index):
            couplings[edge] = scale

    realized: list[tuple[Cell, Cell, int]] = []
    for a, b, sign in layout.backbone:
        if sign == 0:
            if rng is None:
                raise ValidationError("backbone has undrawn signs; an rng is required")
            sign = int(rng.integers(0, 2)) * 2 - 1
        for edge in _shared_couplers(layout.grid_cols, a, b, cell_index):
            couplings[edge] = sign * scale
        realized.append((a, b, sign))

    fields: list[tuple[int, int]] = []
    for s_cell, w_cell in layout.pairs:
        base = cell_index[s_cell] * SITES_PER_CELL
        fields.extend((base + t, -scale) for t in range(SITES_PER_CELL))
        base = cell_index[w_cell] * SITES_PER_CELL
        fields.extend((base + t, weak_h) for t in range(SITES_PER_CELL))

    final_layout = replace(layout, backbone=tuple(realized))
    inst = ProblemInstance(
        n=n,
        scale=scale,
        fields=tuple(sorted(fields)),
        couplings=tuple(sorted((i, j, J) for (i, j), J in couplings.items())),
        layout=final_layout,
    )

    if n <= BRUTE_FORCE_SITE_LIMIT:
        best_e, _ = brute_force_ground_state(inst)
        return inst.with_reference(best_e, "exhaustive")
    return inst.with_reference(_best_cell_uniform_energy(inst), "construction")


def _reduce_to_cells(inst: ProblemInstance) -> ProblemInstance:
    """Collapse each 8-site cell block to one logical spin.

    Inter-cell couplings sum; fields sum per cell; intra-cell bonds become an
    additive constant (each contributes exactly -J when its cell is uniform),
    carried in ``offset_scaled`` so reduced and physical energies agree
    exactly on cell-uniform states.  The reference (if any) carries over:
    success on the reduced instance means reaching the physical reference
    through the cell-uniform subspace.
    """
    if inst.layout is None:
        raise ValidationError("cell reduction requires an instance with cell structure")
    if inst.n != SITES_PER_CELL * len(inst.layout.used_cells()):
        raise ValidationError(
            f"site count {inst.n} does not match {len(inst.layout.used_cells())} layout cells"
        )
    n_cells = inst.n // SITES_PER_CELL
    h_log = np.zeros(n_cells, dtype=np.int64)
    for s, v in inst.fields:
        h_log[s // SITES_PER_CELL] += v
    j_log: dict[tuple[int, int], int] = {}
    offset = inst.offset_scaled
    for i, j, J in inst.couplings:
        a, b = i // SITES_PER_CELL, j // SITES_PER_CELL
        if a == b:
            offset -= J
        else:
            j_log[(a, b)] = j_log.get((a, b), 0) + J
    fields = tuple((k, int(h_log[k])) for k in range(n_cells) if h_log[k])
    couplings = tuple(sorted((a, b, J) for (a, b), J in j_log.items()))
    return ProblemInstance(
        n=n_cells,
        scale=inst.scale,
        fields=fields,
        couplings=couplings,
        offset_scaled=offset,
        reference_energy_scaled=inst.reference_energy_scaled,
        reference_method=inst.reference_method,
    )


def _best_cell_uniform_energy(inst: ProblemInstance) -> int:
    """Exact optimum over states constant on each cell (block of 8 sites).

    Small cell counts are enumerated; larger ones use an exact dynamic
    program over grid columns, which applies to every layout because cells
    only interact when grid-adjacent.
    """
    reduced = _reduce_to_cells(inst)
    if reduced.n <= BRUTE_FORCE_SITE_LIMIT:
        best_e, _ = brute_force_ground_state(reduced)
        return best_e
    return _grid_column_minimum(reduced, inst.layout.used_cells())


def _grid_column_minimum(reduced: ProblemInstance, cells: tuple[Cell, ...]) -> int:
    """Exact minimum of a cell-level instance by dynamic programming.

    ``cells[k]`` is the grid position of logical spin ``k``.  Every coupling
    joins cells in the same or adjacent grid columns, so minimizing column by
    column over all spin assignments of one column at a time (at most 2^4
    states, grids are at most four rows tall) is exact.
    """
    h = dict(reduced.fields)
    columns = sorted({col for _, col in cells})
    members = {col: [k for k, (_, c) in enumerate(cells) if c == col] for col in columns}
    internal: dict[int, list[tuple[int, int, int]]] = {col: [] for col in columns}
    crossing: dict[int, list[tuple[int, int, int]]] = {col: [] for col in columns}
    for a, b, J in reduced.couplings:
        ca, cb = cells[a][1], cells[b][1]
        if ca == cb:
            internal[ca].append((a, b, J))
        else:
            (lo, hi) = (a, b) if ca < cb else (b, a)
            crossing[max(ca, cb)].append((lo, hi, J))

    def assignments(col):
        spins = members[col]
        for bits in range(1 << len(spins)):
            yield {k: 1 - 2 * ((bits >> t) & 1) for t, k in enumerate(spins)}

    def local_cost(col, sigma):
        cost = -sum(h.get(k, 0) * sigma[k] for k in members[col])
        return cost - sum(J * sigma[a] * sigma[b] for a, b, J in internal[col])

    best: dict[tuple, int] = {}
    prev_col = None
    for col in columns:
        nxt: dict[tuple, int] = {}
        for sigma in assignments(col):
            key = tuple(sigma[k] for k in members[col])
            cost = local_cost(col, sigma)
            if prev_col is None:
                nxt[key] = cost
            elif prev_col + 1 != col or not crossing[col]:
                nxt[key] = cost + min(best.values())
            else:
                nxt[key] = cost + min(
                    b - sum(J * pkey[members[prev_col].index(a)] * sigma[bb]
                            for a, bb, J in crossing[col])
                    for pkey, b in best.items()
                )
        best, prev_col = nxt, col
    return min(best.values()) + reduced.offset_scaled


# ---------------------------------------------------------------------------
# Exhaustive ground states
# ---------------------------------------------------------------------------


@njit(cache=True)
def _gray_code_minimum(n, indptr, nbr, jv, hv, e0):
    """Walk all 2^n states in Gray-code order; return the minimum energy and
    the lexicographically smallest minimizer (with -1 ordered before +1)."""
    s = np.full(n, -1, np.int8)
    best = np.full(n, -1, np.int8)
    e = e0
    best_e = e0
    total = np.int64(1) << n
    for step in range(1, total):
        k = step
        site = 0
        while k & 1 == 0:
            k >>= 1
            site += 1
        local = hv[site]
        for t in range(indptr[site], indptr[site + 1]):
            local += jv[t] * s[nbr[t]]
        e += 2 * s[site] * local
        s[site] = -s[site]
        if e < best_e:
            best_e = e
            best[:] = s
        elif e == best_e:
            for t in range(n):
                if s[t] != best[t]:
                    if s[t] < best[t]:
                        best[:] = s
                    break
    return best_e, best


def brute_force_ground_state(inst: ProblemInstance) -> tuple[int, np.ndarray]:
    """Exhaustive minimum over all 2^n states; ties broken toward the
    lexicographically smallest state (-1 sorts before +1).

    Refuses instances above BRUTE_FORCE_SITE_LIMIT sites.
    """
    if inst.n > BRUTE_FORCE_SITE_LIMIT:
        raise ValidationError(
            f"exhaustive enumeration supports at most {BRUTE_FORCE_SITE_LIMIT} sites, got {inst.n}"
        )
    indptr, nbr, jv = inst.adjacency
    e0 = inst.energy(all_down_state(inst.n)) - inst.offset_scaled
    best_e, best = _gray_code_minimum(inst.n, indptr, nbr, jv, inst.field_array, e0)
    return int(best_e) + inst.offset_scaled, best.copy()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def serialize_instance(inst: ProblemInstance) -> str:
    """Canonical UTF-8 JSON text; identical instances serialize byte-identically."""
    payload: dict = {
        "format_version": FORMAT_VERSION,
        "n": inst.n,
        "scale": inst.scale,
        "fields": [[s, h] for s, h in inst.fields],
        "couplings": [[i, j, J] for i, j, J in inst.couplings],
        "layout": inst.layout.to_payload() if inst.layout is not None else None,
        "reference_energy_scaled": inst.reference_energy_scaled,
        "reference_method": inst.reference_method,
    }
    if inst.offset_scaled:
        payload["offset_scaled"] = inst.offset_scaled
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def _expect(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise InstanceFormatError(f"{where}: {message}")


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _parse_cell(value, where: str) -> Cell:
    _expect(isinstance(value, list) and len(value) == 2, where, "expected [row, col]")
    return (_as_int(value[0], where), _as_int(value[1], where))


def _parse_layout(obj, where: str) -> WeakStrongLayout:
    _expect(isinstance(obj, dict), where, "expected an object")
    for key in ("grid_rows", "grid_cols", "pairs", "backbone"):
        _expect(key in obj, where, f"missing key {key!r}")
    pairs = []
    _expect(isinstance(obj["pairs"], list), f"{where}.pairs", "expected a list")
    for k, entry in enumerate(obj["pairs"]):
        w = f"{where}.pairs[{k}]"
        _expect(isinstance(entry, list) and len(entry) == 2, w, "expected [strong, weak]")
        pairs.append((_parse_cell(entry[0], w), _parse_cell(entry[1], w)))
    backbone = []
    _expect(isinstance(obj["backbone"], list), f"{where}.backbone", "expected a list")
    for k, entry in enumerate(obj["backbone"]):
        w = f"{where}.backbone[{k}]"
        _expect(isinstance(entry, list) and len(entry) == 3, w, "expected [cell_a, cell_b, sign]")
        backbone.append((_parse_cell(entry[0], w), _parse_cell(entry[1], w), _as_int(entry[2], w)))
    layout = WeakStrongLayout(
        grid_rows=_as_int(obj["grid_rows"], f"{where}.grid_rows"),
        grid_cols=_as_int(obj["grid_cols"], f"{where}.grid_cols"),
        pairs=tuple(pairs),
        backbone=tuple(backbone),
        lambda_num=_as_int(obj.get("lambda_num", DEFAULT_LAMBDA[0]), f"{where}.lambda_num"),
        lambda_den=_as_int(obj.get("lambda_den", DEFAULT_LAMBDA[1]), f"{where}.lambda_den"),
    )
    try:
        layout.validate()
    except ValidationError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc
    return layout


def parse_instance(text: str) -> ProblemInstance:
    """Parse and validate instance JSON.

    Errors carry the offending field path (or JSON line/column for syntax
    errors).  A missing ``scale`` falls back to the default and is flagged in
    the instance's ``defaulted`` metadata; unknown future format versions are
    rejected.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    _expect(isinstance(obj, dict), "$", "expected a top-level object")

    _expect("format_version" in obj, "$", "missing key 'format_version'")
    version = _as_int(obj["format_version"], "format_version")
    _expect(
        version == FORMAT_VERSION,
        "format_version",
        f"unsupported version {version} (this build reads version {FORMAT_VERSION})",
    )

    _expect("n" in obj, "$", "missing key 'n'")
    n = _as_int(obj["n"], "n")

    defaulted: tuple[str, ...] = ()
    if "scale" in obj:
        scale = _as_int(obj["scale"], "scale")
    else:
        scale = DEFAULT_SCALE
        defaulted = ("scale",)

    fields = []
    _expect(isinstance(obj.get("fields"), list), "fields", "expected a list")
    for k, entry in enumerate(obj["fields"]):
        w = f"fields[{k}]"
        _expect(isinstance(entry, list) and len(entry) == 2, w, "expected [site, h]")
        fields.append((_as_int(entry[0], w), _as_int(entry[1], w)))

    couplings = []
    _expect(isinstance(obj.get("couplings"), list), "couplings", "expected a list")
    for k, entry in enumerate(obj["couplings"]):
        w = f"couplings[{k}]"
        _expect(isinstance(entry, list) and len(entry) == 3, w, "expected [i, j, J]")
        i, j, J = (_as_int(v, w) for v in entry)
        _expect(i != j, w, f"self-loop ({i},{j})")
        if i > j:
            i, j = j, i
        couplings.append((i, j, J))

    layout = None
    if obj.get("layout") is not None:
        layout = _parse_layout(obj["layout"], "layout")

    reference = obj.get("reference_energy_scaled")
    if reference is not None:
        reference = _as_int(reference, "reference_energy_scaled")
    method = obj.get("reference_method")
    if method is not None:
        _expect(isinstance(method, str), "reference_method", "expected a string or null")

    offset = _as_int(obj.get("offset_scaled", 0), "offset_scaled")

    try:
        return ProblemInstance(
            n=n,
            scale=scale,
            fields=tuple(sorted(fields)),
            couplings=tuple(sorted(couplings)),
            layout=layout,
            reference_energy_scaled=reference,
            reference_method=method,
            offset_scaled=offset,
            defaulted=defaulted,
        )
    except InstanceFormatError:
        raise
    except ValidationError as exc:
        raise InstanceFormatError(str(exc)) from exc
