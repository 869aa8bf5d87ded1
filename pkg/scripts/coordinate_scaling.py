"""Position decoherence time against coupling strength and field (f = 0).

tau_q should scale as 1/gamma, and a field with theta != 0 stretches it by
1/|1 - B theta / 4|.
"""

import argparse

from ncdeco.harness.io import emit_results, format_tau
from ncdeco.harness.presets import coordinate
from ncdeco.harness.scenarios import run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/coordinate_scaling")
    ap.add_argument("--theta", type=float, default=0.01)
    args = ap.parse_args()

    reports = {}
    for gamma in (1.0, 2.0):
        reports[f"gamma{gamma:g}"] = r = run_scenario(coordinate(gamma=gamma))
        print(f"gamma={gamma:g}: tau_q={format_tau(r.tau('position'))} tau_k={format_tau(r.tau('momentum'))}")

    base = None
    for B in (0.0, 10.0, 20.0):
        r = run_scenario(coordinate(theta=args.theta, B=B))
        reports[f"theta{args.theta:g}_B{B:g}"] = r
        tau = r.tau("position")
        base = base or tau
        predicted = 1 / abs(1 - B * args.theta / 4)
        print(f"theta={args.theta:g} B={B:g}: tau_q={format_tau(tau)} ratio={tau / base:.4f} predicted={predicted:.4f}")

    emit_results(reports, args.out, "coordinate_scaling")


if __name__ == "__main__":
    main()
