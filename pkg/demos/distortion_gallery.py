#!/usr/bin/env python3
"""Tour of the built-in distortion families and their risk-attitude indices.

Prints each family at a few probability levels together with the local
probability risk aversion index pra = -T''/T' and its relative version
rpra = t * pra.  Positive pra at small t means the holder inflates small
exceedance probabilities (tail averse); negative means the opposite.
"""

import math

from paretopool import Distortion

LEVELS = (0.05, 0.2, 1.0 / math.e, 0.6, 0.9)


def show(d: Distortion) -> None:
    print(f"\n{d.label()}")
    print(f"  {'t':>8} {'T(t)':>12} {'pra':>12} {'rpra':>12}")
    for t in LEVELS:
        try:
            pra = f"{d.pra(t):12.6f}"
            rpra = f"{d.rpra(t):12.6f}"
        except Exception as exc:
            pra = rpra = f"{type(exc).__name__:>12}"
        print(f"  {t:8.4f} {d(t):12.6f} {pra} {rpra}")


def main() -> None:
    print("distortion gallery")
    print("=" * 50)
    for d in (Distortion.identity(),
              Distortion.power(0.5),
              Distortion.power(1.5),
              Distortion.prelec1(0.5),
              Distortion.prelec2(0.5, 1.8),
              Distortion.kahneman_tversky(0.4),
              Distortion.tvar(0.15)):
        show(d)

    e_inv = 1.0 / math.e
    print("\nPrelec fixed point: T(1/e) stays at 1/e for every alpha")
    for a in (0.2, 0.5, 0.8):
        d = Distortion.prelec1(a)
        print(f"  alpha={a:.1f}  T(1/e)={d(e_inv):.15f}  pra(1/e)={d.pra(e_inv):+.2e}")

    print("\nCompounding a distortion with itself raises pra pointwise:")
    base = Distortion.power(0.8)
    comp = Distortion.power(0.4)          # power(0.8) applied twice
    for t in (0.1, 0.3, 0.7):
        print(f"  t={t:.1f}  pra[T]={base.pra(t):.4f}  pra[T o T]={comp.pra(t):.4f}")


if __name__ == "__main__":
    main()
