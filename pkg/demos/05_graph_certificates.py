"""Graph certificates: why the divergence spaces vanish.
======================================================

Each component functional on a divergence space has a multigraph: one edge
per index pair of each quatern.  When the distinguished letter is connected
to a cycle, the cyclic-sum identities walk the functional into a component
with three equal indices — which is zero.  The walk is recorded as a
rewrite trace and replayed against the computed kernels as a
machine-checked proof.
"""

from divlab import (ComponentKey, classify_hairy, connected_to_cycle,
                    div_space, graph_of_component, key_edge, replay_trace,
                    vanish_by_cycle, zero_functional_oracle)
from divlab.graphs import Multigraph

# --- the worked example --------------------------------------------------------

key = ComponentKey(6, (1, 2, 1), ((1, 1, 4, 3), (1, 2, 1, 2), (6, 2, 6, 1)))
g = graph_of_component(key)
print("component", key)
print("graph edges:", sorted(g.edges))
print("distinguished letter 1 connected to a cycle:",
      connected_to_cycle(g, 1))
trace = vanish_by_cycle(key)
print("vanishing trace:")
for step in trace.steps:
    print("  ", step.rule, "on triple", step.triple,
          "->", step.key_after or "0")

# --- hairy cycles ---------------------------------------------------------------

tri_hair = Multigraph(5, [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5)])
deco = classify_hairy(tri_hair)
print("\ntriangle with a two-edge tail: cycle", deco.cycle_vertices,
      "+ hair", deco.hairs[0].vertices)

fig8 = Multigraph(1, [(1, 1), (1, 1)])
print("figure-eight hairy?", classify_hairy(fig8) is not None)
print("figure-eight key edge:", key_edge(fig8))

# --- replaying traces against the computed kernel --------------------------------

ds = div_space(3, 2, 1)
print(f"\ndivergence space (n=3, p=2, m=1): dim {ds.dim}")
sample = ComponentKey(3, (2, 1), ((1, 1, 2, 3),))
trace = vanish_by_cycle(sample)
print("key", sample, "-> trace of", len(trace.steps), "step(s)")
print("oracle confirms the functional vanishes on the kernel:",
      zero_functional_oracle(sample, ds))
print("step-by-step replay on the kernel basis:", replay_trace(trace, ds))

witness = ComponentKey(3, (1, 1), ((1, 2, 2, 3),))
print("\na functional that does NOT vanish (tree component, no certificate):",
      zero_functional_oracle(witness, ds))
