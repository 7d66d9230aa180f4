"""Herald tables for all four entanglement protocols.

Runs each protocol through the exact engine at a common per-node detection
probability and prints every valid click pattern with its probability, Bell
target, and corrected fidelity, next to the closed-form budget.
"""

from pmesim.protocols import (
    KINDS,
    NodeParams,
    ProtocolConfig,
    analytic_herald_prob,
    rate_ratio_number_vs_two_photon,
    run_protocol,
)

EPSILON = 0.01  # per-node detection probability epsilon


def build(kind):
    p_e = 0.05 if kind == "number" else 1.0
    node = NodeParams(excitation_probability=p_e, branching_ratio=1.0,
                      solid_angle_fraction=EPSILON, transmission=1.0,
                      detector_efficiency=1.0)
    return ProtocolConfig(kind=kind, node0=node, node1=node,
                          enhanced_analyzer=kind in ("polarization", "frequency"))


for kind in KINDS:
    config = build(kind)
    table = run_protocol(config)
    analytic = analytic_herald_prob(config)
    print(f"\n=== {kind} ===")
    print(f"total success {table.total_success:.3e} "
          f"(closed form {analytic:.3e}, "
          f"deviation {abs(table.total_success - analytic) / analytic:.2%})")
    for entry in table.valid_entries():
        clicks = " + ".join(entry.pattern)
        print(f"  {clicks:28s} p = {entry.probability:.3e}  "
              f"-> {entry.target:9s}  F = {entry.fidelity:.4f}")

ratio = rate_ratio_number_vs_two_photon(0.05, EPSILON)
print(f"\nnumber vs two-photon rate advantage at p_e = 0.05, "
      f"eps = {EPSILON}: {ratio:.0f}x")
print("(the single-photon protocol wins while eps < 4 p_e, at the cost of a "
      "1 - p_e fidelity ceiling)")
