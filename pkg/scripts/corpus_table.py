"""Print a table of the bundled corpus: sizes, topology counts and the site invariants.

    python3 scripts/corpus_table.py [--json]
"""

import argparse
import json

from sitekit.category import check_amalgamation, check_joint_embedding, check_right_ore, opposite
from sitekit.corpus import corpus
from sitekit.sheaves import enumerate_subterminal_sheaves, site_invariants
from sitekit.sieves import sieve_space
from sitekit.topologies import canonical_topology, enumerate_topologies, trivial_topology


def row(C) -> dict:
    ore = check_right_ore(C).holds
    ap = check_amalgamation(C).holds
    out = {
        "category": C.name,
        "objects": C.n_objects,
        "arrows": C.n_arrows,
        "sieves": len(sieve_space(C)),
        "topologies": len(enumerate_topologies(C)),
        "right_ore": ore,
        "amalgamation": ap,
        "joint_embedding": check_joint_embedding(C).holds,
        "presheaf_site_boolean": site_invariants(trivial_topology(C)).boolean_site,
    }
    if ap:
        D = opposite(C)
        out["op_atomic_subterminals"] = enumerate_subterminal_sheaves(canonical_topology(D, "atomic")).count
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = [row(C) for C in corpus()]
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return
    cols = ["category", "objects", "arrows", "sieves", "topologies", "right_ore", "amalgamation",
            "joint_embedding", "presheaf_site_boolean", "op_atomic_subterminals"]
    heads = ["category", "obj", "arr", "sieves", "tops", "ore", "AP", "JEP", "bool(psh)", "sub(op,at)"]
    table = [[str(r.get(c, "-")) for c in cols] for r in rows]
    widths = [max(len(h), *(len(t[i]) for t in table)) for i, h in enumerate(heads)]
    print("  ".join(h.ljust(w) for h, w in zip(heads, widths)))
    for t in table:
        print("  ".join(x.ljust(w) for x, w in zip(t, widths)))


if __name__ == "__main__":
    main()
