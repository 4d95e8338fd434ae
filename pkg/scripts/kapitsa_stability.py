"""Maximal real part of the Kapitsa-model spectrum over an (a, b) grid.

Any nonzero curl coupling a destabilizes the otherwise stable b > 0
oscillator pair; in the table only the a = 0, b >= 0 entries stay off the right half-plane.

    python scripts/kapitsa_stability.py [--n 9] [--span 2]
"""

import argparse

import numpy as np

from curlforge.diagnostics import linear_stability


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--span", type=float, default=2.0)
    args = ap.parse_args()
    a_vals = np.round(np.linspace(-args.span, args.span, args.n), 12)
    b_vals = np.round(np.linspace(-args.span, args.span, args.n), 12)
    print("b \\ a " + " ".join(f"{a:>7.2f}" for a in a_vals))
    for b in b_vals:
        row = [linear_stability("kapitsa", {"a": a, "b": b}).max_real_part for a in a_vals]
        print(f"{b:>6.2f} " + " ".join(f"{r:>7.3f}" for r in row))
    for a in a_vals:
        for b in b_vals:
            r = linear_stability("kapitsa", {"a": a, "b": b})
            if r.max_real_part <= 1e-9:
                print(f"max Re <= 1e-9 at a={a:g}, b={b:g}: {r.classification}")


if __name__ == "__main__":
    main()
