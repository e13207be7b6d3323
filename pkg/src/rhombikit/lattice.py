"""Integer arithmetic on the face-centered cubic lattice.

Positions are integer triples whose coordinate sum is even; each position
has 12 nearest neighbors reached by the signed permutations of (1, 1, 0).
The module also carries the 24 proper rotations of the cell shape (the
chiral octahedral group) as exact signed-permutation matrices, so cell
orientations compose without any floating point.

Enumeration conventions (fixed, relied on by file formats and tests):

* ``FACE_DIRS`` lists the 12 neighbor directions in ascending
  lexicographic order.
* ``ROTATIONS`` lists the 24 rotation matrices in descending lexicographic
  order of their row-major flattening, which places the identity at
  index 0.
"""

from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .errors import ValidationError

Pos = tuple[int, int, int]
Matrix = tuple[tuple[int, int, int], ...]

# --------------------------------------------------------------------------
# face directions
# --------------------------------------------------------------------------

FACE_DIRS: tuple[Pos, ...] = tuple(
    sorted(
        p
        for p in itertools.product((-1, 0, 1), repeat=3)
        if sorted(map(abs, p)) == [0, 1, 1]
    )
)

FACE_DIR_INDEX: dict[Pos, int] = {d: i for i, d in enumerate(FACE_DIRS)}

# index of the opposite face for each direction
OPPOSITE_DIR: tuple[int, ...] = tuple(
    FACE_DIR_INDEX[(-d[0], -d[1], -d[2])] for d in FACE_DIRS
)


def _as_int(v) -> int:
    try:
        return operator.index(v)  # ints and numpy integers, not floats
    except TypeError:
        raise ValidationError(f"expected an integer, got {v!r}") from None


def is_valid_pos(p: Sequence[int]) -> bool:
    """True when p is an integer triple with even coordinate sum."""
    try:
        check_pos(p)
    except ValidationError:
        return False
    return True


def check_pos(p: Sequence[int]) -> Pos:
    """Validate and normalize a lattice position, raising ValidationError."""
    if len(p) != 3:
        raise ValidationError(f"lattice position must be an integer triple, got {p!r}")
    t = (_as_int(p[0]), _as_int(p[1]), _as_int(p[2]))
    if sum(t) % 2 != 0:
        raise ValidationError(f"lattice position {t} has odd coordinate sum")
    return t


def add(p: Pos, d: Pos) -> Pos:
    return (p[0] + d[0], p[1] + d[1], p[2] + d[2])


def sub(p: Pos, q: Pos) -> Pos:
    return (p[0] - q[0], p[1] - q[1], p[2] - q[2])


def neighbors(p: Sequence[int]) -> list[Pos]:
    """The 12 nearest-neighbor positions of p, in FACE_DIRS order."""
    p = check_pos(p)
    return [add(p, d) for d in FACE_DIRS]


def lattice_distance(p: Sequence[int], q: Sequence[int]) -> int:
    """Minimal number of neighbor steps between two lattice positions.

    Closed form: max(Chebyshev distance, ceil(L1 distance / 2)). Each step
    changes every coordinate by at most 1 (so Chebyshev is a lower bound)
    and the L1 norm by at most 2 (so half the L1 norm is too); the maximum
    of the two bounds is achievable on this lattice, which the test suite
    confirms against a breadth-first-search oracle out to radius 6.
    """
    p = check_pos(p)
    q = check_pos(q)
    ax = abs(q[0] - p[0])
    ay = abs(q[1] - p[1])
    az = abs(q[2] - p[2])
    return max(ax, ay, az, -((ax + ay + az) // -2))


# --------------------------------------------------------------------------
# rotation group
# --------------------------------------------------------------------------


def _generate_rotations() -> tuple[Matrix, ...]:
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            rows = [[0, 0, 0] for _ in range(3)]
            for r, (c, s) in enumerate(zip(perm, signs)):
                rows[r][c] = s
            # determinant of a signed permutation: sign(perm) * product(signs)
            parity = 1
            for i in range(3):
                for j in range(i + 1, 3):
                    if perm[i] > perm[j]:
                        parity = -parity
            if parity * signs[0] * signs[1] * signs[2] == 1:
                mats.append(tuple(tuple(r) for r in rows))
    mats.sort(key=lambda m: m[0] + m[1] + m[2], reverse=True)
    return tuple(mats)


ROTATIONS: tuple[Matrix, ...] = _generate_rotations()
ROTATION_INDEX: dict[Matrix, int] = {m: i for i, m in enumerate(ROTATIONS)}
IDENTITY: int = ROTATION_INDEX[((1, 0, 0), (0, 1, 0), (0, 0, 1))]
assert IDENTITY == 0 and len(ROTATIONS) == 24


def _mat_apply(m: Matrix, v: Sequence[int]) -> Pos:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def _check_rot(r: int) -> int:
    r = _as_int(r)
    if not 0 <= r < 24:
        raise ValidationError(f"rotation index must be in 0..23, got {r!r}")
    return r


# composition and inverse tables, plus the induced permutation of FACE_DIRS
ROT_MUL: tuple[tuple[int, ...], ...] = tuple(
    tuple(ROTATION_INDEX[_mat_mul(a, b)] for b in ROTATIONS) for a in ROTATIONS
)
ROT_INV: tuple[int, ...] = tuple(
    next(j for j in range(24) if ROT_MUL[i][j] == IDENTITY) for i in range(24)
)
DIR_PERM: tuple[tuple[int, ...], ...] = tuple(
    tuple(FACE_DIR_INDEX[_mat_apply(m, d)] for d in FACE_DIRS) for m in ROTATIONS
)


def rotation_matrix(r: int) -> Matrix:
    """The 3x3 signed-integer matrix of a rotation index."""
    return ROTATIONS[_check_rot(r)]


def compose(r1: int, r2: int) -> int:
    """Index of the rotation 'apply r2, then r1' (matrix product r1 @ r2)."""
    return ROT_MUL[_check_rot(r1)][_check_rot(r2)]


def inverse(r: int) -> int:
    """Index of the inverse rotation."""
    return ROT_INV[_check_rot(r)]


def apply_rotation(r: int, p: Sequence[int]) -> Pos:
    """Rotate a lattice position about the origin."""
    return _mat_apply(ROTATIONS[_check_rot(r)], check_pos(p))


def apply_rotation_dir(r: int, d: int) -> int:
    """Rotate a face direction (both given and returned as indices)."""
    if not 0 <= d < 12:
        raise ValidationError(f"face direction index must be in 0..11, got {d!r}")
    return DIR_PERM[_check_rot(r)][d]


# --------------------------------------------------------------------------
# cells and configurations
# --------------------------------------------------------------------------


class CellKind(Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


@dataclass(frozen=True)
class Cell:
    """One unit cell: lattice position, kind, and orientation index."""

    pos: Pos
    kind: CellKind = CellKind.PASSIVE
    orient: int = IDENTITY

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", check_pos(self.pos))
        _check_rot(self.orient)
        if not isinstance(self.kind, CellKind):
            raise ValidationError(f"bad cell kind {self.kind!r}")


class Configuration:
    """An immutable finite set of cells with pairwise distinct positions."""

    __slots__ = ("cells", "_by_pos", "_hash")

    def __init__(self, cells: Iterable[Cell]):
        cs = sorted(cells, key=lambda c: c.pos)
        by_pos = {c.pos: c for c in cs}
        if len(by_pos) != len(cs):
            seen: set[Pos] = set()
            for c in cs:
                if c.pos in seen:
                    raise ValidationError(f"duplicate cell position {c.pos}")
                seen.add(c.pos)
        self.cells: tuple[Cell, ...] = tuple(cs)
        self._by_pos: dict[Pos, Cell] = by_pos
        self._hash: int | None = None

    @classmethod
    def from_positions(
        cls,
        positions: Iterable[Sequence[int]],
        kind: CellKind = CellKind.PASSIVE,
        orient: int = IDENTITY,
    ) -> "Configuration":
        return cls(Cell(check_pos(p), kind, orient) for p in positions)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __contains__(self, pos: Pos) -> bool:
        return pos in self._by_pos

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Configuration) and self.cells == other.cells

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.cells)
        return self._hash

    def __repr__(self) -> str:
        return f"Configuration({len(self.cells)} cells)"

    @property
    def positions(self) -> tuple[Pos, ...]:
        return tuple(c.pos for c in self.cells)

    def cell_at(self, pos: Pos) -> Cell:
        return self._by_pos[pos]

    def translate(self, offset: Sequence[int]) -> "Configuration":
        """Shift all cells by an even-sum offset."""
        off = check_pos(offset)
        return Configuration(
            Cell(add(c.pos, off), c.kind, c.orient) for c in self.cells
        )


def _require_nonempty(c: Configuration) -> None:
    if len(c) == 0:
        raise ValidationError("configuration is empty")


def canonicalize(c: Configuration) -> Configuration:
    """Translate so the lexicographically smallest position is the origin.

    Any two configurations equal up to translation canonicalize to the same
    value (translations between valid positions always have even coordinate
    sum, so the shift is always valid). Kinds and orientations ride along.
    """
    _require_nonempty(c)
    m = c.cells[0].pos  # cells are kept sorted
    if m == (0, 0, 0):
        return c
    return c.translate((-m[0], -m[1], -m[2]))


def is_connected(c: Configuration) -> bool:
    """True when the face-adjacency graph of the cells has one component."""
    _require_nonempty(c)
    occupied = c._by_pos
    start = c.cells[0].pos
    seen = {start}
    stack = [start]
    while stack:
        p = stack.pop()
        for d in FACE_DIRS:
            n = add(p, d)
            if n in occupied and n not in seen:
                seen.add(n)
                stack.append(n)
    return len(seen) == len(c)
