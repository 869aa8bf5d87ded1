"""Decoherence at B = 4/(e theta), where only the theta-weighted channel survives.

tau_q should grow linearly with theta at fixed couplings.
"""

import argparse

from ncdeco.harness.io import emit_results, format_tau
from ncdeco.harness.presets import reveal
from ncdeco.harness.scenarios import run_nc_reveal


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/nc_reveal")
    ap.add_argument("--thetas", default="0.05,0.1,0.2")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    thetas = [float(x) for x in args.thetas.split(",")]

    report = run_nc_reveal(reveal(thetas[0]), thetas, workers=args.workers)
    info = report.extras["reveal"]
    print(f"c_qg = {info['c_qg']!r}, g-channel norm = {info['g_channel_norm']:.2e}")
    for theta, tau in info["tau_q"].items():
        print(f"theta={theta:g}: tau_q={format_tau(tau)} ratio={info['ratios'][theta]}")
    emit_results(report, args.out, "nc_reveal")


if __name__ == "__main__":
    main()
