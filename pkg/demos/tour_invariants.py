#!/usr/bin/env python3
"""A walk through the bundled complexes and their knot-level invariants.

Run as: python3 demos/tour_invariants.py
"""

from hfplus import (BUILTIN_NAMES, alexander_polynomial, builtin, genus,
                    hfk_hat, kernel_rank_v, serialize_text)


def main():
    print("The five bundled complexes")
    print("=" * 60)
    for name in BUILTIN_NAMES:
        k = builtin(name)
        print(f"\n{name}: {len(k.generators)} generators, "
              f"{sum(len(v) for v in k.differential.values())} arrows")
        for g in k.generators:
            print(f"    {g.name} at filtration ({g.i}, {g.j}), "
                  f"grading {g.m}")

    print("\n\nText form of the right-handed trefoil")
    print("=" * 60)
    print(serialize_text(builtin("trefoil_right")), end="")

    print("\nHat-flavor homology, genus, Alexander polynomial")
    print("=" * 60)
    for name in BUILTIN_NAMES:
        k = builtin(name)
        levels = sorted({g.j - g.i for g in k.generators}, reverse=True)
        cells = []
        for s in levels:
            h = hfk_hat(k, s)
            for d in h.support():
                cells.append(f"s={s}: Z^{h.free_rank(d)} in degree {d}")
        print(f"\n{name}")
        for cell in cells:
            print(f"    {cell}")
        print(f"    genus {genus(k)},  "
              f"alexander {alexander_polynomial(k)}")

    print("\n\nKernel of the vertical map at s = 0")
    print("=" * 60)
    print("rank ker(v_0 on homology) is 0 exactly for the unknot:")
    for name in BUILTIN_NAMES:
        print(f"    {name:15s} {kernel_rank_v(builtin(name), 0)}")


if __name__ == "__main__":
    main()
