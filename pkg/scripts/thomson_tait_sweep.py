"""Search gyro_dissipative_km for damping-induced destabilization.

A witness is a parameter triple (a, b, s) whose c = 0 system has every
eigenvalue on or left of the imaginary axis (max Re <= 1e-9) while the same
triple with c = 0.01 has max Re > 1e-6.

    python scripts/thomson_tait_sweep.py [--c 0.01]
"""

import argparse
import itertools

import numpy as np

from curlforge.diagnostics import linear_stability


def witnesses(a_vals, b_vals, s_vals, c=0.01):
    found = []
    for a, b, s in itertools.product(a_vals, b_vals, s_vals):
        base = linear_stability("gyro_dissipative_km", {"a": a, "b": b, "s": s, "c": 0.0})
        damped = linear_stability("gyro_dissipative_km", {"a": a, "b": b, "s": s, "c": c})
        if base.max_real_part <= 1e-9 and damped.max_real_part > 1e-6:
            found.append((a, b, s, base.max_real_part, damped.max_real_part))
    return found


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--c", type=float, default=0.01)
    args = ap.parse_args()
    a_vals = np.round(np.linspace(-2, 2, 9), 12)
    b_vals = np.round(np.linspace(-2, 2, 9), 12)
    s_vals = np.round(np.linspace(0, 4, 9), 12)
    found = witnesses(a_vals, b_vals, s_vals, args.c)
    print(f"{len(a_vals) * len(b_vals) * len(s_vals)} triples swept, {len(found)} witnesses")
    for a, b, s, r0, r1 in found:
        print(f"a={a:g} b={b:g} s={s:g}  max Re: c=0 -> {r0:.3g}, c={args.c:g} -> {r1:.3g}")
    neg = [w for w in found if w[1] < 0]
    print(f"witnesses with b < 0: {len(neg)}")


if __name__ == "__main__":
    main()
