"""Numba kernels vs the numpy fallback on the three preset domains.

    python benchmarks/bench_kernels.py [--samples N] [--repeat R]

Prints seconds per call and the max abs difference between backends.
"""
import argparse
import time

import numpy as np

from equiaffine import geometry, moduli
from equiaffine.kernels import get_backend

CASES = [
    ("disk", geometry.disk(), (0.0, 0.0)),
    ("square", geometry.square(), (0.3, -0.2)),
    ("quadrant", geometry.quadrant(), (1.0, 2.0)),
]


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run(samples, repeat):
    bases = moduli.sample_bases(samples, 7)
    jit, vec = get_backend("numba"), get_backend("numpy")
    # warm up / compile
    jit.reduce_bases(bases[:4])
    rows = []
    for name, dom, p in CASES:
        kd = dom.kernel()
        d = dom.boundary_distance(p)
        p = np.asarray(p, dtype=float)
        res = {}
        for label, k in (("numba", jit), ("numpy", vec)):
            red, U, _ = k.reduce_bases(bases)
            k.tropical_min(kd.kind, kd.verts, kd.rays, kd.center, kd.smat, p, d, red[:4], U[:4])

            def call(k=k, red=red, U=U):
                return k.tropical_min(kd.kind, kd.verts, kd.rays, kd.center, kd.smat, p, d, red, U)[0]

            res[label] = timed(call, repeat)
        diff = float(np.max(np.abs(res["numba"][1] - res["numpy"][1])))
        rows.append((name, res["numba"][0], res["numpy"][0], diff))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    print(f"{'domain':10s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, tj, tv, diff in run(a.samples, a.repeat):
        print(f"{name:10s} {tj:10.4f} {tv:10.4f} {tv / tj:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
