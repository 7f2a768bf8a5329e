"""Deterministic inequalities: integrated power means and parameter systems.

Part one evaluates the built-in fixtures for
    integral of the s-sup-convolution  >=  M_{s/(ns+1)}(integral f, integral g)
together with the rearranged variant.  Part two scans a random linear
parameter system and a two-point system whose integral is |1 - 2t|.

Run:  python3 demos/bbl_and_shadow_demo.py
"""
import numpy as np

from sconcave.experiments import run_bbl
from sconcave.shadow import LpsSpec, scan_convexity


def main():
    print(f"{'fixture':<20} {'lhs':>10} {'rhs':>10} {'lhs*':>10}  method")
    for r in run_bbl():
        print(f"{r.name:<20} {r.lhs:10.6f} {r.rhs:10.6f} {r.lhs_rearranged:10.6f}  {r.method}")

    two = scan_convexity(LpsSpec(1.0, [[0.0], [1.0]], [1.0, -1.0], [1.0, 1.0], 0, (0.0, 0.5), 11))
    print("\ntwo-point system, t vs integral:")
    for t, v in zip(two.t, two.values):
        print(f"  {t:5.2f}  {v:.6f}")

    rng = np.random.default_rng(1)
    spec = LpsSpec(0.5, rng.uniform(-1, 1, (6, 2)), rng.uniform(-1, 1, 6), rng.uniform(0.3, 1.5, 6), 0, (-1, 1), 21)
    rep = scan_convexity(spec)
    print(f"\nrandom 2D system (s=0.5): min normalized second difference {rep.normalized_min:.3e}",
          "(convex)" if rep.ok else "(NOT convex)")


if __name__ == "__main__":
    main()
