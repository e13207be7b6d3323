#!/usr/bin/env python3
"""Benchmark the numba clip kernel against the numpy/scipy hull fallback.

Two workloads:

1. raw intersection-volume calls on the (angle, candidate) pairs that
   survive pruning while building one blocker-table entry, and
2. the full 48-entry blocker table build, timed per path by forcing the
   dispatch through RHOMBIKIT_NUMBA in a subprocess.

Run:  python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from rhombikit import _kernels, geometry
from rhombikit.geometry import (
    CANONICAL_VERTICES,
    FACE_VERTICES,
    roll_transform,
)
from rhombikit.lattice import FACE_DIRS


def _case_set(n_angles=121):
    """Volume-call inputs along one roll, against one annulus candidate."""
    base_polys = np.array(
        [[CANONICAL_VERTICES[i] for i in loop] for loop in FACE_VERTICES],
        dtype=float,
    )
    lens = np.full(12, 4, dtype=np.int64)
    dirs = np.array(FACE_DIRS, dtype=float)
    fd = np.array((1, 1, 0), dtype=float)
    q = np.array((0, 1, 1), dtype=float)  # a genuine blocker of this roll
    w = 2.0 * q

    maxv = _kernels._MAXV
    cases = []
    for th in np.linspace(0.0, 2.0 * np.pi / 3.0, n_angles):
        rot, trans = roll_transform((1, 1, 0), (1, 0, 1), th)
        mover = np.einsum("ij,fvj->fvi", rot, base_polys + 2.0 * fd) + trans
        center = rot @ (2.0 * fd) + trans
        normals = dirs @ rot.T
        planes_a = np.hstack([normals, (normals @ center + 2.0)[:, None]])
        planes_b = np.hstack([dirs, (2.0 + dirs @ w)[:, None]])
        pa = np.zeros((12, maxv, 3))
        pa[:, :4, :] = mover
        pb = np.zeros((12, maxv, 3))
        pb[:, :4, :] = base_polys + w
        cases.append((pa, lens, planes_a, pb, lens, planes_b))
    return cases


def bench_volume_calls(repeat=5):
    cases = _case_set()
    impls = [("numpy/scipy hull", _kernels.intersection_volume_hull)]
    if _kernels.USE_NUMBA:
        impls.insert(0, ("numba clip", _kernels.intersection_volume_clip))
        _kernels.intersection_volume_clip(*cases[0], 1e-9)  # JIT warmup

    print(f"intersection volume, {len(cases)} calls per pass, best of {repeat}:")
    results = {}
    for name, fn in impls:
        best = float("inf")
        checksum = 0.0
        for _ in range(repeat):
            t0 = time.perf_counter()
            checksum = 0.0
            for case in cases:
                checksum += fn(*case, 1e-9)
            best = min(best, time.perf_counter() - t0)
        per_call = best / len(cases) * 1e6
        results[name] = best
        print(f"  {name:<18} {best * 1e3:8.2f} ms  ({per_call:7.2f} us/call)"
              f"  sum={checksum:.6f}")
    if len(results) == 2:
        a, b = results["numba clip"], results["numpy/scipy hull"]
        print(f"  speedup: {b / a:.1f}x")


def bench_table_build():
    print("\nfull 48-entry blocker table build (fresh subprocess per path):")
    code = (
        "import time; t0=time.perf_counter();"
        "from rhombikit import geometry;"
        "geometry.blocker_table();"
        "print('%.2f' % (time.perf_counter()-t0))"
    )
    times = {}
    for label, flag in (("numba clip", "1"), ("numpy/scipy hull", "0")):
        env = dict(os.environ, RHOMBIKIT_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        if out.returncode != 0:
            print(f"  {label:<18} FAILED:\n{out.stderr}")
            continue
        times[label] = float(out.stdout.strip().splitlines()[-1])
        print(f"  {label:<18} {times[label]:8.2f} s")
    if len(times) == 2:
        print(f"  speedup: {times['numpy/scipy hull'] / times['numba clip']:.1f}x")


def main():
    print(f"numba available and enabled: {_kernels.USE_NUMBA}")
    bench_volume_calls()
    bench_table_build()
    # the two paths must agree on what they are for: the blocker sets
    table = geometry.blocker_table()
    print(f"\nblocker table entries: {len(table)} "
          f"(sizes: {sorted({len(v) for v in table.values()})})")


if __name__ == "__main__":
    main()
