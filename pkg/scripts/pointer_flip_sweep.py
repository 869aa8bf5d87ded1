"""Field sweep for the three coupling configurations.

Prints tau_q and tau_k per field, the regime label and the field where the
pointer basis flips from momentum to position.
"""

import argparse

from ncdeco.harness.io import emit_results, format_tau
from ncdeco.harness.presets import SWEEP_FIELDS, PRESETS
from ncdeco.harness.scenarios import run_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/pointer_flip")
    ap.add_argument("--configs", default="coordinate,momentum,general")
    ap.add_argument("--fields", default=",".join(f"{B:g}" for B in SWEEP_FIELDS))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    fields = [float(x) for x in args.fields.split(",")]

    for name in args.configs.split(","):
        sweep = run_sweep(PRESETS[name](), fields, workers=args.workers)
        print(f"[{name}]")
        for B, r in sorted(sweep.reports.items()):
            print(f"  B={B:<8g} tau_q={format_tau(r.tau('position'))!s:<10} tau_k={format_tau(r.tau('momentum'))}")
        label = sweep.classification.value if sweep.classification else sweep.note
        print(f"  regime {label}, crossover B* = {sweep.crossover}")
        emit_results(sweep.reports, f"{args.out}/{name}", name, sweep=sweep)


if __name__ == "__main__":
    main()
