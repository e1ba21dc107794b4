"""Shared builders for the test suite."""

import numpy as np

from graphrothe import build_finite_graph, field_on_interior, make_domain


def path_graph(k, mu=1.0, w=1.0):
    """Path 0-1-...-(k-1) with constant measure and weight."""
    edges = [(i, i + 1, w) for i in range(k - 1)]
    return build_finite_graph(edges, {i: mu for i in range(k)})


def star_graph(leaves, mu=1.0, w=1.0):
    """Center 0 joined to 1..leaves."""
    edges = [(0, i, w) for i in range(1, leaves + 1)]
    return build_finite_graph(edges, {i: mu for i in range(leaves + 1)})


def random_connected_graph(rng, n_min=5, n_max=50):
    """Random spanning tree plus extra edges; mu in [0.5, 2], w in [0.1, 3]."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = []
    present = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, float(rng.uniform(0.1, 3.0))))
        present.add((u, v))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in present:
            continue
        present.add(key)
        edges.append((key[0], key[1], float(rng.uniform(0.1, 3.0))))
    measure = {i: float(rng.uniform(0.5, 2.0)) for i in range(n)}
    return build_finite_graph(edges, measure)


def random_domain(rng, g, keep=0.7):
    """A random domain with nonempty interior (falls back to all vertices)."""
    import warnings

    from graphrothe.errors import EmptyInteriorWarning, EmptyOmega

    n = g.num_vertices
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyInteriorWarning)
        for _ in range(50):
            omega = [i for i in range(n) if rng.random() < keep]
            try:
                dom = make_domain(g, omega)
            except EmptyOmega:
                continue
            if dom.interior:
                return dom
    return make_domain(g, range(n))


def random_admissible(rng, dom, scale=1.0):
    vals = rng.normal(0.0, scale, size=len(dom.interior_ids))
    return field_on_interior(dom, vals)


def five_path_domain():
    """P5 with omega {1,2,3}: boundary {1,3}, single interior vertex 2."""
    g = path_graph(5)
    return g, make_domain(g, [1, 2, 3])
