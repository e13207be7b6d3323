import numpy as np
import pytest

from rhombikit.errors import IllegalMove, ValidationError
from rhombikit.geometry import FACE_VERTICES, CANONICAL_VERTICES, shared_face_edge
from rhombikit.kinematics import (
    MoveLegality,
    PivotMove,
    apply_move,
    check_move,
    legal_moves,
    pivot_destinations,
    pivot_rotation,
)
from rhombikit.lattice import (
    FACE_DIRS,
    FACE_DIR_INDEX,
    IDENTITY,
    ROTATIONS,
    Cell,
    CellKind,
    Configuration,
    compose,
    is_connected,
    sub,
)

from conftest import random_connected_positions


def _all_pairs():
    for f in FACE_DIRS:
        for t in pivot_destinations(f):
            yield f, t


class TestPivotDestinations:
    def test_example(self):
        assert set(pivot_destinations((1, 1, 0))) == {
            (1, 0, 1),
            (1, 0, -1),
            (0, 1, 1),
            (0, 1, -1),
        }

    def test_four_for_all_dirs(self):
        for d in FACE_DIRS:
            dests = pivot_destinations(d)
            assert len(dests) == 4
            assert dests == sorted(dests)  # fixed enumeration order

    def test_symmetric_relation(self):
        for d in FACE_DIRS:
            for e in pivot_destinations(d):
                assert d in pivot_destinations(e)

    def test_matches_mesh_edge_incidence(self):
        # destinations are exactly the faces sharing a mesh edge with d
        for di, d in enumerate(FACE_DIRS):
            sharing = [
                FACE_DIRS[dj]
                for dj in range(12)
                if dj != di
                and len(set(FACE_VERTICES[di]) & set(FACE_VERTICES[dj])) == 2
            ]
            assert sorted(sharing) == pivot_destinations(d)

    def test_example_shared_edge(self):
        assert shared_face_edge((1, 1, 0), (1, 0, 1)) == ((1, 1, 1), (2, 0, 0))

    def test_invalid_dir(self):
        with pytest.raises(ValidationError):
            pivot_destinations((2, 0, 0))


class TestPivotRotation:
    def test_all_48_order_three_trace_zero(self):
        for f, t in _all_pairs():
            move = PivotMove(f, (0, 0, 0), f, t)
            r = pivot_rotation(move)
            m = np.array(ROTATIONS[r])
            assert np.trace(m) == 0
            assert compose(r, compose(r, r)) == IDENTITY

    def test_fixes_edge_direction_and_rolls_cell(self):
        for f, t in _all_pairs():
            move = PivotMove(f, (0, 0, 0), f, t)
            r = pivot_rotation(move)
            m = np.array(ROTATIONS[r])
            e0, e1 = shared_face_edge(f, t)
            axis = np.subtract(e1, e0)
            assert np.array_equal(m @ axis, axis)
            # the roll about the edge line carries the mover cell onto the
            # destination cell
            start = 2 * np.array(f)
            assert np.array_equal(np.array(e0) + m @ (start - e0), 2 * np.array(t))

    def test_preserves_vertex_set(self):
        verts = set(CANONICAL_VERTICES)
        for f, t in _all_pairs():
            r = pivot_rotation(PivotMove(f, (0, 0, 0), f, t))
            m = np.array(ROTATIONS[r])
            assert {tuple(m @ v) for v in verts} == verts

    def test_reverse_is_inverse(self):
        for f, t in _all_pairs():
            move = PivotMove(f, (0, 0, 0), f, t)
            assert compose(pivot_rotation(move), pivot_rotation(move.reversed())) == IDENTITY

    def test_step_between_faces_is_a_face_dir(self):
        for f, t in _all_pairs():
            assert sub(t, f) in FACE_DIR_INDEX

    def test_orientation_update_matches_physical_roll(self):
        # tracking a marked body point through the affine roll about the
        # pivot edge must agree with the orientation bookkeeping: the
        # marker at R_o v relative to the old center sits at R_(r o) v
        # relative to the new one
        rng = np.random.default_rng(67)
        for f, t in _all_pairs():
            o = int(rng.integers(24))
            v = np.array([1.0, 1.0, -1.0])  # a body-local marker vertex
            r = pivot_rotation(PivotMove(f, (0, 0, 0), f, t))
            e0, e1 = shared_face_edge(f, t)
            rot = np.array(ROTATIONS[r])
            world_before = 2 * np.array(f) + np.array(ROTATIONS[o]) @ v
            world_after = np.array(e0) + rot @ (world_before - np.array(e0))
            predicted = 2 * np.array(t) + np.array(ROTATIONS[compose(r, o)]) @ v
            assert np.allclose(world_after, predicted)


class TestPivotMoveValidation:
    def test_non_adjacent_faces_rejected(self):
        with pytest.raises(ValidationError):
            PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (-1, -1, 0))

    def test_mover_substrate_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            PivotMove((2, 2, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))

    def test_destination(self):
        m = PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))
        assert m.destination == (1, 0, 1)


class TestCheckMove:
    def setup_method(self):
        self.move = PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))

    def test_legal_two_cell(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0)])
        assert check_move(c, self.move) is MoveLegality.LEGAL

    def test_destination_occupied(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (1, 0, 1)])
        assert check_move(c, self.move) is MoveLegality.DESTINATION_OCCUPIED

    def test_disconnects_structure(self):
        line = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (2, 2, 0)])
        assert check_move(line, self.move) is MoveLegality.DISCONNECTS_STRUCTURE

    def test_mover_absent(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 0, -1)])
        assert check_move(c, self.move) is MoveLegality.MOVER_ABSENT

    def test_substrate_absent(self):
        c = Configuration.from_positions([(1, 1, 0), (2, 1, 1)])
        assert check_move(c, self.move) is MoveLegality.SUBSTRATE_ABSENT

    def test_swept_volume_blocked(self, blocker_table_ready):
        # (0,1,1) blocks the (1,1,0)->(1,0,1) roll; keep the rest connected
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (0, 1, 1)])
        assert check_move(c, self.move) is MoveLegality.SWEPT_VOLUME_BLOCKED

    def test_check_order_destination_before_connectivity(self):
        # middle of a line moving onto an occupied destination: destination
        # check fires first in the documented order
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (2, 2, 0), (1, 0, 1)])
        assert check_move(c, self.move) is MoveLegality.DESTINATION_OCCUPIED

    def test_strict_stability(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0)])
        assert check_move(c, self.move, strict_stability=True) is MoveLegality.UNSTABLE
        # (0,-1,1) braces the landing: adjacent to the destination, adjacent
        # to the substrate (so nothing disconnects), and not a blocker
        c2 = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (0, -1, 1)])
        assert sub(self.move.destination, (0, -1, 1)) in FACE_DIR_INDEX
        assert check_move(c2, self.move, strict_stability=True) is MoveLegality.LEGAL
        assert check_move(c2, self.move) is MoveLegality.LEGAL


class TestApplyMove:
    def test_bookkeeping(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0)])
        m = PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))
        c2 = apply_move(c, m)
        assert c2.positions == ((0, 0, 0), (1, 0, 1))

    def test_kind_preserved_orientation_composed(self):
        c = Configuration(
            [Cell((0, 0, 0)), Cell((1, 1, 0), CellKind.ACTIVE, orient=5)]
        )
        m = PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))
        c2 = apply_move(c, m)
        moved = c2.cell_at((1, 0, 1))
        assert moved.kind is CellKind.ACTIVE
        assert moved.orient == compose(pivot_rotation(m), 5)

    def test_cell_count_invariant_and_connected(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            c = Configuration.from_positions(random_connected_positions(rng, 6))
            moves = legal_moves(c)
            if not moves:
                continue
            m = moves[rng.integers(len(moves))]
            c2 = apply_move(c, m)
            assert len(c2) == len(c)
            assert is_connected(c2)
            assert all(sum(cell.pos) % 2 == 0 for cell in c2.cells)

    def test_move_then_reverse_restores(self):
        rng = np.random.default_rng(61)
        for _ in range(30):
            c = Configuration.from_positions(random_connected_positions(rng, 5))
            moves = legal_moves(c)
            if not moves:
                continue
            m = moves[rng.integers(len(moves))]
            c2 = apply_move(c, m)
            back = check_move(c2, m.reversed())
            assert back is MoveLegality.LEGAL  # reversibility
            c3 = apply_move(c2, m.reversed())
            assert c3 == c  # positions, kinds, and orientations restored

    def test_illegal_move_raises_with_reason(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (1, 0, 1)])
        m = PivotMove((1, 1, 0), (0, 0, 0), (1, 1, 0), (1, 0, 1))
        with pytest.raises(IllegalMove) as ei:
            apply_move(c, m)
        assert ei.value.reason is MoveLegality.DESTINATION_OCCUPIED


class TestLegalMoves:
    def test_two_cell_count(self):
        # an isolated mover on one substrate face has exactly 4 pivots;
        # both cells can move, so 8 in total
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0)])
        moves = legal_moves(c)
        assert len(moves) == 8
        per_mover = {}
        for m in moves:
            per_mover.setdefault(m.mover, []).append(m)
        assert all(len(v) == 4 for v in per_mover.values())

    def test_deterministic_lexicographic_order(self):
        c = Configuration.from_positions([(0, 0, 0), (1, 1, 0), (1, 0, 1)])
        moves = legal_moves(c)
        keys = [
            (m.mover, FACE_DIR_INDEX[m.from_dir], FACE_DIR_INDEX[m.to_dir])
            for m in moves
        ]
        assert keys == sorted(keys)

    def test_single_cell_no_moves(self):
        assert legal_moves(Configuration.from_positions([(0, 0, 0)])) == []

    def test_equivalent_to_check_move_filter(self):
        # the fast path shares nothing with check_move's per-move
        # connectivity test, so the brute filter is its oracle
        rng = np.random.default_rng(83)
        configs = []
        for _ in range(40):
            configs.append(
                Configuration.from_positions(
                    random_connected_positions(rng, int(rng.integers(2, 9)))
                )
            )
        # disconnected inputs too: two separated clusters, and a cluster
        # plus an isolated cell (whose removal reconnects the rest)
        configs.append(
            Configuration.from_positions([(0, 0, 0), (1, 1, 0), (4, 4, 0), (5, 5, 0)])
        )
        configs.append(
            Configuration.from_positions([(0, 0, 0), (1, 1, 0), (6, 6, 0)])
        )
        for strict in (False, True):
            for c in configs:
                brute = []
                for cell in c.cells:
                    for f in FACE_DIRS:
                        s = sub(cell.pos, f)
                        if s not in c:
                            continue
                        for t in pivot_destinations(f):
                            m = PivotMove(cell.pos, s, f, t)
                            if check_move(c, m, strict) is MoveLegality.LEGAL:
                                brute.append(m)
                assert legal_moves(c, strict) == brute
