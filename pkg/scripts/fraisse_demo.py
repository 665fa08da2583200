"""Build two limit chains for a class, check extensions and run back-and-forth.

    python3 scripts/fraisse_demo.py --class linord --steps 100 --depth 40 --k 16
    python3 scripts/fraisse_demo.py --class graph --steps 120 --depth 40 --k 12
"""

import argparse
import time

from sitekit.fraisse import (HorizonTooShort, back_and_forth, build_limit, check_limit_extension,
                             get_class, verify_class_properties)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--class", dest="cls", default="linord")
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs=2, default=[1, 2])
    ap.add_argument("--depth", type=int, default=40)
    ap.add_argument("--size", type=int, default=3)
    ap.add_argument("--k", type=int, default=16)
    args = ap.parse_args()

    cls = get_class(args.cls)
    t0 = time.perf_counter()
    rep = verify_class_properties(cls)
    print(f"{cls.name}: AP={rep.amalgamation} JEP={rep.joint_embedding} "
          f"({rep.spans_checked} spans, n={rep.n}, {time.perf_counter() - t0:.1f}s)")

    chains = []
    for seed in args.seeds:
        t0 = time.perf_counter()
        L = build_limit(cls, args.steps, seed)
        chains.append(L)
        created = sum(t.created for t in L.task_log)
        print(f"seed {seed}: {L.size} elements, {len(L.task_log)} tasks "
              f"({created} created, {len(L.task_log) - created} already satisfied), "
              f"pending {L.pending}, {time.perf_counter() - t0:.1f}s")
        try:
            ext = check_limit_extension(L, args.depth, args.size)
            print(f"  extension depth {args.depth} size {args.size}: passed={ext.passed} "
                  f"({ext.checked} checks)")
        except HorizonTooShort as e:
            print(f"  extension: horizon too short ({e})")

    t0 = time.perf_counter()
    try:
        res = back_and_forth(chains[0], chains[1], args.k)
    except HorizonTooShort as e:
        print(f"back-and-forth: {e}")
        return
    print(f"back-and-forth k={args.k}: found={res.found} after {res.nodes} nodes "
          f"({time.perf_counter() - t0:.1f}s)")
    if res.found:
        for x, y in sorted(res.mapping.items()):
            print(f"  {x:3d} -> {y:3d}")


if __name__ == "__main__":
    main()
