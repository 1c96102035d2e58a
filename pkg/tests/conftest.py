import sys
from fractions import Fraction

import pytest

from folnerflow.graphs import (GeneratorSet, LabeledGraph, build_cayley_window,
                               graph_from_doc)
from folnerflow.weights import WeightFunction


@pytest.fixture(scope="session")
def z1_r6():
    return build_cayley_window("z", dim=1, radius=6)


@pytest.fixture(scope="session")
def z1_r52():
    return build_cayley_window("z", dim=1, radius=52)


@pytest.fixture(scope="session")
def z2_r12():
    return build_cayley_window("z", dim=2, radius=12)


@pytest.fixture(scope="session")
def f2_r4():
    return build_cayley_window("free", dim=2, radius=4)


@pytest.fixture(scope="session")
def unit():
    return WeightFunction.unit()


def path_graph(n: int, labels=("+1", "-1")) -> LabeledGraph:
    """A labeled path on vertices "0".."n-1" (not a full Cayley window)."""
    fwd, bwd = labels
    gens = GeneratorSet((fwd, bwd), {fwd: bwd, bwd: fwd})
    adj = {str(i): {} for i in range(n)}
    for i in range(n - 1):
        adj[str(i)][fwd] = str(i + 1)
        adj[str(i + 1)][bwd] = str(i)
    return LabeledGraph(gens, adj, interior=set())


def cycle_graph(n: int) -> LabeledGraph:
    """A labeled n-cycle: the rotation generator acts everywhere, so the
    whole cycle is interior."""
    gens = GeneratorSet(("s", "s'"), {"s": "s'", "s'": "s"})
    adj = {str(i): {} for i in range(n)}
    for i in range(n):
        adj[str(i)]["s"] = str((i + 1) % n)
        adj[str((i + 1) % n)]["s'"] = str(i)
    return LabeledGraph(gens, adj, interior={str(i) for i in range(n)})


def two_step_line(radius: int) -> LabeledGraph:
    """Z with generators {+-1, +-2} as a custom window [-radius, radius]."""
    inv = {"s1": "S1", "S1": "s1", "s2": "S2", "S2": "s2"}
    gens = GeneratorSet(("s1", "S1", "s2", "S2"), inv)
    adj = {str(i): {} for i in range(-radius, radius + 1)}
    for i in range(-radius, radius + 1):
        for step, s in ((1, "s1"), (2, "s2")):
            if i + step <= radius:
                adj[str(i)][s] = str(i + step)
                adj[str(i + step)][inv[s]] = str(i)
    interior = {str(i) for i in range(-radius + 2, radius - 1)}
    return LabeledGraph(gens, adj, interior)


def random_weights(rng, vertices, max_den: int = 16) -> WeightFunction:
    vals = {v: Fraction(rng.randint(1, max_den), rng.randint(1, max_den))
            for v in vertices}
    return WeightFunction(vals, default=Fraction(1))


def announce(line: str) -> None:
    """One visible line per acceptance criterion, bypassing pytest capture."""
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
