"""Communication graphs: trees, chains, full graphs, augmented trees.

Nodes are numbered from 1.  A random tree is the sparsest connected
option; adding random edges densifies it gradually; the full graph is
the other extreme.  A rewiring schedule redraws the topology every
``period`` rounds during a collaborative run.
"""
import numpy as np

from riskcal import RewireSchedule, add_random_edges, build_topology, chain, full_graph, random_tree, rewire

rng = np.random.default_rng(7)
n = 10

tree = random_tree(n, rng)
print(f"random tree on {n} nodes: {len(tree.edges)} edges, sparseness {tree.sparseness():.3f}")
print("  edges:", sorted(tree.edges))

print(f"chain: sparseness {chain(n).sparseness():.3f}")
print(f"full graph: sparseness {full_graph(n).sparseness():.3f}")

denser = add_random_edges(tree, 6, rng)
print(f"tree + 6 random edges: {len(denser.edges)} edges, sparseness {denser.sparseness():.3f}")

# the same thing via the topology strings the experiment config uses
for name in ("tree", "chain", "full", "tree+6"):
    g = build_topology(name, n, np.random.default_rng(7))
    print(f"  build_topology({name!r:8}) -> {len(g.edges):2d} edges")

# a schedule redraws the graph when t is a multiple of the period
schedule = RewireSchedule("tree", period=2)
g = schedule.initial(n, rng)
for t in range(1, 5):
    g2 = rewire(schedule, t, g, rng)
    print(f"t={t}: {'rewired' if g2 is not g else 'kept   '} {sorted(g2.edges)[:4]} ...")
    g = g2
