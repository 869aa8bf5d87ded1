"""Coherence traces converge to the commutative ones as theta = sigma -> 0."""

import argparse

import numpy as np

from ncdeco.harness.config import TimeConfig
from ncdeco.harness.presets import general
from ncdeco.harness.scenarios import run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-end", type=float, default=10.0)
    args = ap.parse_args()
    window = TimeConfig(t_end=args.t_end)

    base = run_scenario(general().replace(time=window))
    for x in (1e-3, 1e-4, 1e-5, 1e-6):
        r = run_scenario(general(theta=x, sigma=x).replace(time=window))
        diff = max(np.max(np.abs(r.trace.coh_norm[b] - base.trace.coh_norm[b])) for b in base.trace.coh_norm)
        print(f"theta=sigma={x:g}: sup |delta coherence| = {diff:.3e}")


if __name__ == "__main__":
    main()
