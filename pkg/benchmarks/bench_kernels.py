"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-N wall time for one workload under both
backends and checks that the two produce the same answer.
"""
import argparse
import time

import numpy as np

from acer._accel import HAS_NUMBA
from acer.envs.radar import body_ray_directions, rotate_body_to_world, scan_numba, scan_numpy
from acer import sumtree as st


def best_of(fn, repeat):
    fn()  # warm-up (jit compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def tree_workloads(capacity=1 << 16, n_updates=4096, n_queries=4096, seed=0):
    rng = np.random.default_rng(seed)
    size = 1 << (capacity - 1).bit_length()
    mk = lambda: (np.zeros(2 * size), np.zeros(2 * size), np.zeros(2 * size))
    slots = rng.integers(0, capacity, n_updates)
    prios = rng.uniform(0.01, 2.0, n_updates)
    alpha = 0.6
    samp_v, rep_v = prios ** alpha, prios ** -alpha
    full = mk()
    st._set_leaves_py(*full, size, np.arange(capacity), np.ones(capacity), np.ones(capacity), np.ones(capacity))
    targets = rng.uniform(0, full[0][1], n_queries)

    def upd(kernel):
        def run():
            a = mk()
            kernel(*a, size, slots, samp_v, rep_v, prios)
            return a[0][1]
        return run

    return {
        f"tree update x{n_updates}": (upd(st._set_leaves_nb), upd(st._set_leaves_py)),
        f"tree search x{n_queries}": (lambda: st._search_many_nb(full[0], size, targets),
                                      lambda: st._search_many_np(full[0], size, targets)),
    }


def radar_workloads(n_scenes=500, n_obstacles=20, seed=0):
    rng = np.random.default_rng(seed)
    body = body_ray_directions(np.linspace(-60, 60, 8), (-30, -15, 0, 10))
    scenes = []
    for _ in range(n_scenes):
        dirs = rotate_body_to_world(body, rng.uniform(-np.pi, np.pi), rng.uniform(-0.5, 0.5))
        origin = np.array([*rng.uniform(0, 12000, 2), rng.uniform(10, 1000)])
        scenes.append((origin, dirs, rng.uniform(0, 12000, (n_obstacles, 2)),
                       rng.uniform(500, 1000, n_obstacles)))

    def run(scan):
        return lambda: [scan(o, d, c, r, 500.0) for o, d, c, r in scenes]

    return {f"radar 32 rays x{n_scenes} scenes": (run(scan_numba), run(scan_numpy))}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not HAS_NUMBA:
        raise SystemExit("numba disabled (ACER_DISABLE_NUMBA set or numba missing); nothing to compare")
    work = {**tree_workloads(), **radar_workloads()}
    print(f"{'workload':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, (fast, slow) in work.items():
        a, b = fast(), slow()
        agree = all(np.allclose(x, y) for x, y in zip(a, b)) if isinstance(a, list) else np.allclose(a, b)
        t_nb, t_np = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:34s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
