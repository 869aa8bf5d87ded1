"""Fast invariant checks run by ``ncdeco selftest``.

Each check returns (passed, detail).  Everything here runs at small sizes and
finishes in a few seconds.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .diagnostics import PointerBasisCandidate, Regime, classify_regime, coherence_l1, pointer_residual
from .dynamics import CompositeState, make_propagator, reduce_system
from .model import (
    CouplingMatrices,
    build_bare_interaction,
    build_effective_interaction,
    compute_effective_coefficients,
    default_environment,
)
from .operators import LEVI_CIVITA, HilbertSpec, NCParams, bopp_shift, build_canonical_ops, commutator, product_eigenbasis


def low_lying_indices(d: int, cutoff: int) -> np.ndarray:
    """Flat product indices whose Fock numbers on both axes are below ``cutoff``."""
    n1, n2 = np.divmod(np.arange(d * d), d)
    return np.nonzero((n1 < cutoff) & (n2 < cutoff))[0]


def expected_commutators(params: NCParams) -> np.ndarray:
    """[X_a, X_b] / (i hbar) for X = (x1, x2, p1, p2)."""
    eps, t, s = LEVI_CIVITA, params.theta, params.sigma
    mixed = (1 + t * s / 4) * np.eye(2)
    return np.block([[t * eps, mixed], [-mixed, s * eps]])


def check_algebra(tol: float = 1e-9) -> tuple[bool, str]:
    spec = HilbertSpec(d_axis=8)
    ops = build_canonical_ops(spec)
    keep = low_lying_indices(spec.d_axis, 6)
    worst = 0.0
    for theta in (0.0, 0.01, 0.1):
        for sigma in (0.0, 0.01, 0.1):
            p = NCParams(theta, sigma)
            x, pp = bopp_shift(ops.q, ops.k, p)
            X = (*x, *pp)
            want = expected_commutators(p)
            for a in range(4):
                for b in range(4):
                    c = commutator(X[a], X[b])[np.ix_(keep, keep)]
                    dev = np.max(np.abs(c - 1j * p.hbar * want[a, b] * np.eye(len(keep))))
                    worst = max(worst, float(dev))
    return worst < tol, f"max deviation {worst:.2e}"


def check_coefficients(n: int = 1000, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        theta, sigma, e, B = rng.uniform(-1, 1, 4) * [0.2, 0.2, 2.0, 500.0]
        c = compute_effective_coefficients(NCParams(theta, sigma, charge_e=e), B)
        want = (1 - e * B * theta / 4, -(e * B / 2 - sigma / 2), 1.0, -theta / 2)
        got = (c.c_qg, c.c_qf, c.c_kf, c.c_kg)
        worst = max(worst, max(abs(a - b) for a, b in zip(got, want)))
    reveal = compute_effective_coefficients(NCParams(0.1), 4 / 0.1).c_qg
    ok = worst <= 1e-15 and reveal == 0.0
    return ok, f"max deviation {worst:.1e}, c_qg at reveal field {reveal!r}"


def check_interaction_paths(n: int = 20, seed: int = 1) -> tuple[bool, str]:
    """Effective-coefficient build vs minimal coupling followed by the Bopp shift."""
    rng = np.random.default_rng(seed)
    spec = HilbertSpec(d_axis=4, env_banks=(("C", 2), ("D", 2)))
    ops = build_canonical_ops(spec)
    env = default_environment(spec)
    worst = 0.0
    for _ in range(n):
        p = NCParams(*rng.uniform(-0.2, 0.2, 2), charge_e=rng.uniform(0.5, 2))
        B = rng.uniform(-50, 50)
        cpl = CouplingMatrices(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)))
        a = p.charge_e * B / 2
        k_min = (ops.k[0] - a * ops.q[1], ops.k[1] + a * ops.q[0])
        x, pp = bopp_shift(ops.q, k_min, p)
        oracle = build_bare_interaction(x, pp, cpl, env)
        got = build_effective_interaction(ops, cpl, env, p, B).h_int_total
        worst = max(worst, float(np.max(np.abs(got - oracle))))
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_partial_trace(seed: int = 2) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    rho = reduce_system(CompositeState(v), 4, 4).rho
    full = np.outer(v, v.conj()).reshape(4, 4, 4, 4)
    oracle = np.einsum("aebe->ab", full)
    dev = float(np.max(np.abs(rho - oracle)))
    return dev < 1e-12 and abs(np.trace(rho) - 1) < 1e-12, f"max deviation {dev:.1e}"


def check_unitarity(seed: int = 3) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    prop = make_propagator((m + m.conj().T) / 2, 0.05)
    u = prop.u
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(64))))
    return err < 1e-10, f"|U^dag U - 1|_max = {err:.1e}"


def check_pointer_diagonal() -> tuple[bool, str]:
    """Coordinate coupling is block-diagonal in the position basis and not in momentum."""
    spec = HilbertSpec(d_axis=4)
    ops = build_canonical_ops(spec)
    env = default_environment(spec)
    eff = build_effective_interaction(ops, CouplingMatrices(np.eye(2), np.zeros((2, 2))), env, NCParams(), 0.0)
    rq = pointer_residual(eff.h_int_total, PointerBasisCandidate("q", product_eigenbasis(ops.q_axis)[1]), env.dim)
    rk = pointer_residual(eff.h_int_total, PointerBasisCandidate("k", product_eigenbasis(ops.k_axis)[1]), env.dim)
    return rq < 1e-12 and rk > 0.1, f"R_position = {rq:.1e}, R_momentum = {rk:.2f}"


def check_coherence_zero_on_diagonal() -> tuple[bool, str]:
    basis = PointerBasisCandidate("std", np.eye(5))
    rho = np.diag([0.1, 0.2, 0.3, 0.15, 0.25])
    c = coherence_l1(rho, basis)
    return c == 0.0, f"l1 = {c}"


def check_classification() -> tuple[bool, str]:
    fields = (0.0, 0.01, 1.0, 200.0, 400.0)
    cases = {
        Regime.COORDINATE: {B: (0.2, None) for B in fields},
        Regime.MOMENTUM: {B: ((None, 0.2) if B < 1 else (0.5 / B, 0.2)) for B in fields},
        Regime.GENERAL: {B: ((None, None) if B < 1 else (1 / B, None)) for B in fields},
        Regime.UNDECOHERED: {B: (None, None) for B in fields},
    }
    got = {want: classify_regime(sweep, 1.0) for want, sweep in cases.items()}
    bad = [f"{w.value}->{g.value}" for w, g in got.items() if w != g]
    return not bad, "all four regimes" if not bad else ", ".join(bad)


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "nc_algebra": check_algebra,
    "coefficients": check_coefficients,
    "interaction_paths": check_interaction_paths,
    "partial_trace": check_partial_trace,
    "unitarity": check_unitarity,
    "pointer_diagonal": check_pointer_diagonal,
    "coherence_diagonal": check_coherence_zero_on_diagonal,
    "classification": check_classification,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    ok_all = True
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok_all
