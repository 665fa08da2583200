import itertools

from hypothesis import HealthCheck, settings, strategies as st

from sitekit.category import make_category
from sitekit.corpus import corpus

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CORPUS = corpus()


def poset_category(n, pairs):
    """Preorder category of the reflexive-transitive closure of ``pairs``."""
    le = {(i, i) for i in range(n)} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(le), repeat=2):
            if b == c and (a, d) not in le:
                le.add((a, d))
                changed = True
    order = sorted(le)
    arrows = [(f"id_p{a}" if a == b else f"p{a}p{b}", a, b) for a, b in order]
    idx = {(a, b): k for k, (a, b) in enumerate(order)}
    identities = [idx[(i, i)] for i in range(n)]
    return make_category(f"poset{n}", [f"p{i}" for i in range(n)], arrows, identities,
                         lambda g, f: idx[(order[f][0], order[g][1])])


@st.composite
def posets(draw, max_objects=4):
    n = draw(st.integers(1, max_objects))
    cand = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(cand), unique=True)) if cand else []
    return poset_category(n, chosen)


corpus_categories = st.sampled_from(CORPUS)
small_categories = st.one_of(corpus_categories, posets())
