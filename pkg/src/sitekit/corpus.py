"""Small categories used by tests, the acceptance run and the scripts."""

from __future__ import annotations

from .category import FinCategory, category_from_text


def terminal() -> FinCategory:
    return category_from_text("terminal", ["*"])


def arrow() -> FinCategory:
    return category_from_text("arrow", ["a", "b"], ["f: a -> b"])


def discrete(n: int = 2) -> FinCategory:
    return category_from_text(f"discrete{n}", [f"o{i}" for i in range(n)])


def cyclic(n: int) -> FinCategory:
    """The group Z/n as a one-object category, generator ``s``."""
    names = ["s" if k == 1 else f"s{k}" for k in range(1, n)]
    eqs = []
    for i in range(1, n):
        for j in range(1, n):
            k = (i + j) % n
            eqs.append(f"{names[i - 1]} {names[j - 1]} = {'id_*' if k == 0 else names[k - 1]}")
    return category_from_text(f"Z{n}", ["*"], [f"{nm}: * -> *" for nm in names], eqs)


def chain3() -> FinCategory:
    return category_from_text("chain3", ["a", "b", "c"],
                              ["f: a -> b", "g: b -> c", "h: a -> c"], ["g f = h"])


def span() -> FinCategory:
    return category_from_text("span", ["c", "a", "b"], ["p: c -> a", "q: c -> b"])


def cospan() -> FinCategory:
    return category_from_text("cospan", ["a", "b", "c"], ["p: a -> c", "q: b -> c"])


def parallel_pair() -> FinCategory:
    return category_from_text("parallel", ["a", "b"], ["f: a -> b", "g: a -> b"])


def idempotent() -> FinCategory:
    return category_from_text("idempotent", ["*"], ["e: * -> *"], ["e e = e"])


def left_zero() -> FinCategory:
    """Monoid {1, x, y} with uv = u for non-identity u."""
    return category_from_text("left_zero", ["*"], ["x: * -> *", "y: * -> *"],
                              ["x x = x", "x y = x", "y x = y", "y y = y"])


def right_zero() -> FinCategory:
    """Monoid {1, x, y} with uv = v for non-identity v."""
    return category_from_text("right_zero", ["*"], ["x: * -> *", "y: * -> *"],
                              ["x x = x", "x y = y", "y x = x", "y y = y"])


def square() -> FinCategory:
    """The poset 0 < a, b < 1."""
    return category_from_text(
        "square", ["z", "a", "b", "t"],
        ["i: z -> a", "j: z -> b", "k: a -> t", "l: b -> t", "d: z -> t"],
        ["k i = d", "l j = d"])


def coequalized_pair() -> FinCategory:
    return category_from_text(
        "coequalized", ["a", "b", "c"],
        ["f: a -> b", "g: a -> b", "h: b -> c", "e: a -> c"],
        ["h f = e", "h g = e"])


def arrow_plus_point() -> FinCategory:
    return category_from_text("arrow+point", ["a", "b", "p"], ["f: a -> b"])


def z2_plus_point() -> FinCategory:
    return category_from_text("Z2+point", ["*", "p"], ["s: * -> *"], ["s s = id_*"])


def retraction() -> FinCategory:
    """Split idempotent: r∘i = id_a, i∘r = e idempotent on b."""
    return category_from_text(
        "retraction", ["a", "b"], ["i: a -> b", "r: b -> a", "e: b -> b"],
        ["r i = id_a", "i r = e", "e e = e", "e i = i", "r e = r"])


def corpus() -> list[FinCategory]:
    return [
        terminal(), arrow(), discrete(2), discrete(3), cyclic(2), cyclic(3), chain3(),
        span(), cospan(), parallel_pair(), idempotent(), left_zero(), right_zero(),
        square(), coequalized_pair(), arrow_plus_point(), z2_plus_point(), retraction(),
    ]


def corpus_by_name() -> dict[str, FinCategory]:
    return {C.name: C for C in corpus()}
