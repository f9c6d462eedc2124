"""Build a small tower construction and watch coarse partitions fail.

The final graph is regular with respect to its finest level partition, while
every coarser level still carries irregularity. The counting diagnostics are
printed for a candidate that stops one level short.
"""

from fractions import Fraction

from regtower import ConstructionParams, build, irreg_partition, verify_construction
from regtower.diagnostics import color_trace, counting_report, refinement_closeness


def main():
    trace = build(ConstructionParams(alpha=Fraction(1, 4), x=(2, 2), seed=3, strict_properties=False))
    rep = verify_construction(trace)
    print(f"side size N={trace.N}, steps s={trace.s}, structural checks ok: {rep.structural_ok}")
    g = trace.final_graph()
    for i in range(trace.s + 1):
        P = trace.joint_partition(i)
        total = irreg_partition(g, P, cap=16)[0]
        print(f"level {i}: {len(P):3d} parts, partition irregularity {total:g}")

    cand = trace.joint_partition(1)
    ct = color_trace(trace, cand)
    print("blue fraction per level, V side:", ct.v)
    print("closeness (V, W):", refinement_closeness(trace, cand))
    print(counting_report(trace, cand, 2, cap=16).format())


if __name__ == "__main__":
    main()
