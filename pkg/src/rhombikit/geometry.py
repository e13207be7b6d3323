"""Exact Euclidean geometry of the canonical cell.

The canonical cell is the rhombic dodecahedron with the 8 cube-type
vertices (+-1, +-1, +-1) and the 6 axis-type vertices (+-2, 0, 0),
(0, +-2, 0), (0, 0, +-2). At this scale every face plane is d.x = 2 for a
neighbor direction d, the face centers coincide with the FACE_DIRS
vectors, and a cell at lattice position p has its Euclidean center at 2p.
All twelve faces are congruent rhombi with diagonal ratio sqrt(2).

Besides the static solid (mesh, frames, dihedral angle, packing density)
this module covers the two geometric queries the rest of the package
needs: ground-contact classification of a rotated structure, and the
swept-volume blocker table for 120-degree edge rolls.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import ValidationError
from .lattice import FACE_DIRS, FACE_DIR_INDEX, Configuration, Pos, add

# --------------------------------------------------------------------------
# canonical solid
# --------------------------------------------------------------------------

CANONICAL_VERTICES: tuple[Pos, ...] = tuple(
    sorted(
        list(itertools.product((-1, 1), repeat=3))
        + [
            (2, 0, 0),
            (-2, 0, 0),
            (0, 2, 0),
            (0, -2, 0),
            (0, 0, 2),
            (0, 0, -2),
        ]
    )
)

_VERT_INDEX = {v: i for i, v in enumerate(CANONICAL_VERTICES)}


@dataclass(frozen=True)
class FaceFrame:
    """Right-handed orthonormal frame of one rhombic face.

    center sits at the FACE_DIRS vector, long_axis runs along the long
    diagonal toward its lexicographically larger endpoint, short_axis
    completes the frame so that normal = long_axis x short_axis.
    """

    center: np.ndarray
    normal: np.ndarray
    long_axis: np.ndarray
    short_axis: np.ndarray


def _build_frames() -> tuple[FaceFrame, ...]:
    frames = []
    for d in FACE_DIRS:
        verts = [v for v in CANONICAL_VERTICES if np.dot(v, d) == 2]
        octa = sorted(v for v in verts if 2 in v or -2 in v)
        center = np.array(d, dtype=float)
        normal = center / math.sqrt(2.0)
        long_axis = np.array(octa[1], dtype=float) - center
        long_axis /= np.linalg.norm(long_axis)
        short_axis = np.cross(normal, long_axis)
        for a in (center, normal, long_axis, short_axis):
            a.setflags(write=False)
        frames.append(FaceFrame(center, normal, long_axis, short_axis))
    return tuple(frames)


_FRAMES = _build_frames()


def face_frame(d: Pos | int) -> FaceFrame:
    """Frame of the face whose outward normal points along d."""
    if isinstance(d, int):
        if not 0 <= d < 12:
            raise ValidationError(f"face direction index out of range: {d}")
        return _FRAMES[d]
    if tuple(d) not in FACE_DIR_INDEX:
        raise ValidationError(f"not a face direction: {d!r}")
    return _FRAMES[FACE_DIR_INDEX[tuple(d)]]


def _face_vertex_cycle(d: Pos) -> tuple[int, ...]:
    """Vertex indices of face d, CCW from outside, starting at the
    positive long-axis endpoint."""
    fr = face_frame(d)
    verts = [v for v in CANONICAL_VERTICES if np.dot(v, d) == 2]

    def angle(v):
        rel = np.array(v, dtype=float) - fr.center
        a = math.atan2(float(rel @ fr.short_axis), float(rel @ fr.long_axis))
        return a % (2.0 * math.pi)

    ordered = sorted(verts, key=angle)
    return tuple(_VERT_INDEX[v] for v in ordered)


FACE_VERTICES: tuple[tuple[int, ...], ...] = tuple(
    _face_vertex_cycle(d) for d in FACE_DIRS
)

# the 24 edges as sorted vertex-index pairs
CELL_EDGES: tuple[tuple[int, int], ...] = tuple(
    sorted(
        {
            tuple(sorted((cyc[i], cyc[(i + 1) % 4])))
            for cyc in FACE_VERTICES
            for i in range(4)
        }
    )
)


@dataclass(frozen=True)
class Mesh:
    """Polygon mesh: float vertices plus CCW-from-outside index loops."""

    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        self.vertices.setflags(write=False)


def canonical_cell_mesh() -> Mesh:
    """Mesh of one cell centered at the origin (14 vertices, 12 rhombi)."""
    return Mesh(np.array(CANONICAL_VERTICES, dtype=float), FACE_VERTICES)


def mesh_volume(m: Mesh) -> float:
    """Signed volume by the divergence theorem (positive for outward CCW)."""
    vol = 0.0
    v = m.vertices
    for face in m.faces:
        v0 = v[face[0]]
        for i in range(1, len(face) - 1):
            vol += float(np.dot(v0, np.cross(v[face[i]], v[face[i + 1]])))
    return vol / 6.0


def mesh_surface_area(m: Mesh) -> float:
    area = 0.0
    v = m.vertices
    for face in m.faces:
        v0 = v[face[0]]
        for i in range(1, len(face) - 1):
            area += 0.5 * float(
                np.linalg.norm(np.cross(v[face[i]] - v0, v[face[i + 1]] - v0))
            )
    return area


def _face_plane(m: Mesh, face: tuple[int, ...]) -> tuple[np.ndarray, float]:
    """Outward unit normal and offset (n.x = c) of a planar mesh face."""
    v = m.vertices
    n = np.cross(v[face[1]] - v[face[0]], v[face[2]] - v[face[1]])
    n = n / np.linalg.norm(n)
    return n, float(n @ v[face[0]])


def dihedral_angle() -> float:
    """Interior angle across every edge of the cell mesh, in degrees.

    Derived from the mesh itself: for each pair of faces sharing an edge
    the interior dihedral is pi minus the angle between outward normals.
    The solid is face-transitive, so all 24 edges agree; the spread is
    checked here and the common value returned.
    """
    m = canonical_cell_mesh()
    planes = [_face_plane(m, f) for f in m.faces]
    angles = []
    for i in range(12):
        for j in range(i + 1, 12):
            if len(set(m.faces[i]) & set(m.faces[j])) == 2:
                cosang = float(np.clip(planes[i][0] @ planes[j][0], -1.0, 1.0))
                angles.append(180.0 - math.degrees(math.acos(cosang)))
    if max(angles) - min(angles) > 1e-9:
        raise AssertionError("mesh dihedral angles disagree")
    return sum(angles) / len(angles)


def inradius() -> float:
    """Distance from the cell center to each face plane (from the mesh)."""
    m = canonical_cell_mesh()
    return min(abs(_face_plane(m, f)[1]) for f in m.faces)


def packing_density() -> float:
    """Volume fraction of the inscribed sphere, pi/sqrt(18) ~ 0.74048.

    Computed from mesh-derived quantities (inradius and cell volume), not
    from the closed form, so the mesh itself is on the hook.
    """
    r = inradius()
    return (4.0 / 3.0) * math.pi * r**3 / mesh_volume(canonical_cell_mesh())


# --------------------------------------------------------------------------
# ground contact
# --------------------------------------------------------------------------


class ContactType(Enum):
    POINT = "point"
    EDGE = "edge"
    FACE = "face"


@dataclass(frozen=True)
class GroundContact:
    """Result of resting a rotated structure on the z = min plane."""

    contact_type: ContactType
    support_points: np.ndarray
    per_cell: dict[Pos, ContactType]

    def __post_init__(self) -> None:
        self.support_points.setflags(write=False)


def _affine_dim(points: np.ndarray, tol: float = 1e-6) -> int:
    if len(points) == 1:
        return 0
    rel = points[1:] - points[0]
    return int(np.linalg.matrix_rank(rel, tol=tol))


_DIM_TO_TYPE = {0: ContactType.POINT, 1: ContactType.EDGE, 2: ContactType.FACE}


def check_world_rotation(world_rot) -> np.ndarray:
    rot = np.asarray(world_rot, dtype=float)
    if rot.shape != (3, 3):
        raise ValidationError(f"rotation must be 3x3, got shape {rot.shape}")
    if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6) or abs(
        np.linalg.det(rot) - 1.0
    ) > 1e-6:
        raise ValidationError("rotation matrix is not a proper rotation")
    return rot


def classify_ground_contact(
    c: Configuration, world_rot, eps_z: float = 1e-6
) -> GroundContact:
    """Rest the rotated structure on the ground and classify the contact.

    The structure is rotated rigidly by world_rot, the ground is the
    horizontal plane through the lowest vertex, and the support set is
    every vertex within eps_z of it. Each touching cell is classified by
    the affine dimension of its own support vertices: one vertex is point
    contact, a segment is edge contact, a coplanar patch is face contact.
    Because all cells are translates of the same solid, every touching
    cell lands in the same class, which is returned as the overall type.
    """
    if len(c) == 0:
        raise ValidationError("configuration is empty")
    rot = check_world_rotation(world_rot)

    base = np.array(CANONICAL_VERTICES, dtype=float)
    centers = 2.0 * np.array([cell.pos for cell in c.cells], dtype=float)
    world = (centers[:, None, :] + base[None, :, :]) @ rot.T
    z = world[:, :, 2]
    zmin = float(z.min())
    mask = z <= zmin + eps_z

    per_cell: dict[Pos, ContactType] = {}
    support = []
    for i, cell in enumerate(c.cells):
        pts = world[i][mask[i]]
        if len(pts) == 0:
            continue
        dim = _affine_dim(pts)
        if dim not in _DIM_TO_TYPE:
            raise AssertionError("support set of one cell is not a face feature")
        per_cell[cell.pos] = _DIM_TO_TYPE[dim]
        support.append(pts)

    kinds = set(per_cell.values())
    if len(kinds) != 1:
        raise AssertionError("touching cells disagree on contact type")
    pts = np.vstack(support)
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    return GroundContact(kinds.pop(), pts[order], per_cell)


# --------------------------------------------------------------------------
# structure meshes
# --------------------------------------------------------------------------


def structure_mesh(c: Configuration) -> Mesh:
    """Union mesh of all cells with coincident interior faces removed.

    A face is interior exactly when the neighbor cell across it is also
    occupied, so the face count is 12n minus twice the number of adjacent
    pairs. The result is watertight whenever the configuration is
    connected.
    """
    if len(c) == 0:
        raise ValidationError("configuration is empty")
    vert_ids: dict[Pos, int] = {}
    verts: list[Pos] = []
    faces: list[tuple[int, ...]] = []
    for cell in c.cells:
        base = (2 * cell.pos[0], 2 * cell.pos[1], 2 * cell.pos[2])
        for di, d in enumerate(FACE_DIRS):
            if add(cell.pos, d) in c:
                continue
            loop = []
            for vi in FACE_VERTICES[di]:
                v = CANONICAL_VERTICES[vi]
                w = (base[0] + v[0], base[1] + v[1], base[2] + v[2])
                idx = vert_ids.get(w)
                if idx is None:
                    idx = len(verts)
                    vert_ids[w] = idx
                    verts.append(w)
                loop.append(idx)
            faces.append(tuple(loop))
    return Mesh(np.array(verts, dtype=float), tuple(faces))


# --------------------------------------------------------------------------
# swept volumes
# --------------------------------------------------------------------------


def shared_face_edge(d1: Pos, d2: Pos) -> tuple[Pos, Pos]:
    """Endpoints of the edge shared by faces d1 and d2, sorted."""
    i1, i2 = FACE_DIR_INDEX.get(tuple(d1)), FACE_DIR_INDEX.get(tuple(d2))
    if i1 is None or i2 is None:
        raise ValidationError(f"not face directions: {d1!r}, {d2!r}")
    common = set(FACE_VERTICES[i1]) & set(FACE_VERTICES[i2])
    if len(common) != 2:
        raise ValidationError(f"faces {d1} and {d2} do not share an edge")
    a, b = sorted(CANONICAL_VERTICES[i] for i in common)
    return a, b


def _rodrigues(axis: np.ndarray, theta: float) -> np.ndarray:
    u = axis / np.linalg.norm(axis)
    k = np.array(
        [[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]]
    )
    return np.eye(3) * math.cos(theta) + math.sin(theta) * k + (
        1.0 - math.cos(theta)
    ) * np.outer(u, u)


def rotation_from_axis_angle(axis, degrees: float) -> np.ndarray:
    """Proper rotation matrix about an arbitrary axis through the origin."""
    a = np.asarray(axis, dtype=float)
    if a.shape != (3,) or np.linalg.norm(a) < 1e-12:
        raise ValidationError("rotation axis must be a nonzero 3-vector")
    return _rodrigues(a, math.radians(degrees))


def roll_transform(from_dir: Pos, to_dir: Pos, theta: float):
    """Rigid transform of the mover at roll angle theta (radians).

    Returns (rot, trans) such that a mover point x maps to rot @ x + trans.
    theta = 0 is the rest pose on from_dir; the signed angle runs to
    +2*pi/3 when the mover reaches to_dir. The rotation axis is the edge
    shared by the substrate faces from_dir and to_dir.
    """
    e0, e1 = shared_face_edge(from_dir, to_dir)
    axis = np.array(e1, dtype=float) - np.array(e0, dtype=float)
    a0 = np.array(e0, dtype=float)
    start = 2.0 * np.array(from_dir, dtype=float)
    target = 2.0 * np.array(to_dir, dtype=float)
    for sgn in (1.0, -1.0):
        r = _rodrigues(axis, sgn * 2.0 * math.pi / 3.0)
        if np.allclose(a0 + r @ (start - a0), target, atol=1e-9):
            break
    else:  # pragma: no cover - the geometry guarantees one sign works
        raise AssertionError("no roll direction reaches the destination")
    r = _rodrigues(axis, sgn * theta)
    return r, a0 - r @ a0


_SQRT2 = math.sqrt(2.0)
_DIRS_ARR = np.array(FACE_DIRS, dtype=float)
_BASE_POLYS = np.array(
    [[CANONICAL_VERTICES[i] for i in loop] for loop in FACE_VERTICES], dtype=float
)
_POLY_LENS = np.full(12, 4, dtype=np.int64)

_blocker_lock = threading.Lock()
_blocker_table: dict[tuple[int, int], frozenset[Pos]] | None = None


def _swept_cells_uncached(
    from_dir: Pos, to_dir: Pos, step_deg: float, vol_eps: float
) -> frozenset[Pos]:
    fd = np.array(from_dir, dtype=float)
    n_steps = int(math.ceil(120.0 / step_deg))
    thetas = np.linspace(0.0, 2.0 * math.pi / 3.0, n_steps + 1)

    rots = []
    shifts = []
    for th in thetas:
        r, t = roll_transform(from_dir, to_dir, th)
        rots.append(r)
        shifts.append(t)
    rots = np.array(rots)
    shifts = np.array(shifts)

    start_polys = _BASE_POLYS + 2.0 * fd  # (12, 4, 3) at rest pose
    # mover face polygons, centers, and half-spaces for every sampled angle
    movers = np.einsum("tij,fvj->tfvi", rots, start_polys) + shifts[:, None, None, :]
    centers = np.einsum("tij,j->ti", rots, 2.0 * fd) + shifts
    normals = np.einsum("tij,fj->tfi", rots, _DIRS_ARR)
    offsets = np.einsum("tfi,ti->tf", normals, centers) + 2.0
    planes_a = np.concatenate([normals, offsets[:, :, None]], axis=2)

    # separating-plane precomputation: mover support values along the fixed
    # candidate normals, and canonical-cell support values along the mover
    # normals, for every angle. A candidate can only overlap at angles
    # where no face plane of either body separates them.
    verts_t = movers.reshape(len(thetas), -1, 3)  # (T, 48, 3)
    min_av = np.einsum("tvi,di->tvd", verts_t, _DIRS_ARR).min(axis=1)  # (T, 12)
    base_v = np.array(CANONICAL_VERTICES, dtype=float)
    min_bv = np.einsum("tfi,vi->tfv", normals, base_v).min(axis=2)  # (T, 12)

    skip = {(0, 0, 0), tuple(from_dir), tuple(to_dir)}
    blockers: set[Pos] = set()
    maxv = _kernels._MAXV
    padded = np.zeros((len(thetas), 12, maxv, 3))
    padded[:, :, :4, :] = movers
    padded_b = np.zeros((12, maxv, 3))

    for q in itertools.product(range(-3, 4), repeat=3):
        if sum(q) % 2 != 0 or q in skip:
            continue
        w = 2.0 * np.array(q, dtype=float)
        dist = np.linalg.norm(centers - w, axis=1)
        near = dist < 4.0  # circumspheres must overlap
        if not near.any():
            continue
        if np.any(dist[near] < 2.0 * _SQRT2 - 1e-9):
            blockers.add(q)  # inscribed spheres overlap: definite hit
            continue
        sep_b = np.any(min_av > (2.0 + _DIRS_ARR @ w) + 1e-12, axis=1)
        sep_a = np.any(
            np.einsum("tfi,i->tf", normals, w) + min_bv > offsets + 1e-12, axis=1
        )
        near &= ~(sep_a | sep_b)
        if not near.any():
            continue
        planes_b = np.hstack([_DIRS_ARR, (2.0 + _DIRS_ARR @ w)[:, None]])
        padded_b[:, :4, :] = _BASE_POLYS + w
        for k in np.nonzero(near)[0]:
            vol = _kernels.intersection_volume(
                padded[k], _POLY_LENS, planes_a[k],
                padded_b, _POLY_LENS, planes_b, 1e-9,
            )
            if vol > vol_eps:
                blockers.add(q)
                break
    return frozenset(blockers)


def swept_cells(
    from_dir: Pos,
    to_dir: Pos,
    step_deg: float = 1.0,
    vol_eps: float = 1e-9,
) -> frozenset[Pos]:
    """Lattice offsets (relative to the substrate) crossed by a roll.

    An offset is returned when the canonical cell there overlaps the
    mover with volume above vol_eps at any sampled angle of the
    120-degree roll from from_dir to to_dir. Grazing face or edge contact
    carries no volume and so never blocks. The substrate itself and the
    start/destination offsets are excluded. Results for the default
    parameters are cached for all 48 direction pairs on first use.
    """
    f = tuple(from_dir)
    t = tuple(to_dir)
    if f not in FACE_DIR_INDEX or t not in FACE_DIR_INDEX:
        raise ValidationError(f"not face directions: {from_dir!r}, {to_dir!r}")
    if sum(a * b for a, b in zip(f, t)) != 1:
        raise ValidationError(f"faces {f} and {t} are not edge-adjacent")
    if step_deg <= 0 or step_deg > 1.0:
        raise ValidationError("step_deg must be in (0, 1]")
    if step_deg == 1.0 and vol_eps == 1e-9:
        return blocker_table()[(FACE_DIR_INDEX[f], FACE_DIR_INDEX[t])]
    return _swept_cells_uncached(f, t, step_deg, vol_eps)


def blocker_table() -> dict[tuple[int, int], frozenset[Pos]]:
    """The full 48-entry blocker table, built once and then read-only.

    Keys are (from_index, to_index) pairs into FACE_DIRS.
    """
    global _blocker_table
    if _blocker_table is None:
        with _blocker_lock:
            if _blocker_table is None:
                table = {}
                for i, f in enumerate(FACE_DIRS):
                    for j, t in enumerate(FACE_DIRS):
                        if sum(a * b for a, b in zip(f, t)) == 1:
                            table[(i, j)] = _swept_cells_uncached(f, t, 1.0, 1e-9)
                _blocker_table = table
    return _blocker_table
