"""Scenario pipeline: build, evolve, measure, extract."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from ..diagnostics import (
    ClassificationUnavailable,
    CoherenceTrace,
    DecoherenceEstimate,
    NoInitialCoherence,
    PointerBasisCandidate,
    Regime,
    classify_regime,
    coarse_grain_sectors,
    coherence_l1_batch,
    extract_decoherence_time,
    macroscopic_decomposition,
    pointer_residual,
    recurrence_estimate,
)
from ..dynamics import Segment, build_segments, iter_evolve, EvolutionStats
from ..model import (
    CouplingMatrices,
    EffectiveCoefficients,
    EnvSpec,
    assemble_total_hamiltonian,
    build_effective_interaction,
    compute_effective_coefficients,
    default_environment,
    effective_env_operators,
    system_hamiltonian,
)
from ..operators import CanonicalOps, build_canonical_ops, product_eigenbasis
from .config import ScenarioConfig


class ScenarioError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"scenario failed at stage '{stage}': {type(exc).__name__}: {exc}")
        self.stage = stage


@dataclass
class ScenarioReport:
    config: dict[str, Any]
    trace: CoherenceTrace
    field_values: np.ndarray
    estimates: dict[str, DecoherenceEstimate]
    residuals: dict[str, dict[float, float]]
    coefficients: dict[float, EffectiveCoefficients]
    macroscopic: dict[float, tuple[float, float]]
    recurrence_time: dict[str, float]
    horizon: float
    hygiene: dict[str, float]
    wall_time: float
    seed: int
    regime: str | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    def tau(self, basis: str) -> float | None:
        est = self.estimates.get(basis)
        return None if est is None else est.tau_d


@dataclass
class Prepared:
    ops: CanonicalOps
    env: EnvSpec
    bases: dict[str, PointerBasisCandidate]


def prepare(config: ScenarioConfig) -> Prepared:
    ops = build_canonical_ops(config.hilbert, config.params.hbar)
    env = default_environment(config.hilbert, config.env_omega)
    _, vq = product_eigenbasis(ops.q_axis)
    _, vk = product_eigenbasis(ops.k_axis)
    bases = {
        "position": PointerBasisCandidate("position", vq),
        "momentum": PointerBasisCandidate("momentum", vk),
    }
    return Prepared(ops, env, bases)


def initial_system_states(config: ScenarioConfig, prep: Prepared) -> list[tuple[tuple[str, ...], np.ndarray]]:
    """(bases measured on this trajectory, system state) pairs."""
    init = config.initial_state
    tracked = config.diagnostics.bases
    d = config.hilbert.d_axis

    def cat(basis: str) -> np.ndarray:
        m1, m2 = init.cat_indices(d)
        v = prep.bases[basis].vectors
        return (v[:, m1] + v[:, m2]) / np.sqrt(2)

    if init.kind == "per_basis":
        return [((b,), cat(b)) for b in tracked]
    if init.kind == "position_cat":
        return [(tracked, cat("position"))]
    if init.kind == "momentum_cat":
        return [(tracked, cat("momentum"))]
    if init.kind == "custom":
        psi = np.asarray(init.vector, dtype=complex)
    else:
        rng = np.random.default_rng(config.seed)
        psi = rng.normal(size=prep.ops.dim) + 1j * rng.normal(size=prep.ops.dim)
    return [(tracked, psi / np.linalg.norm(psi))]


def cadence(config: ScenarioConfig):
    tc = config.time
    if not tc.auto_cadence:
        return tc.dt

    def dt_for(freq: float) -> float:
        n = max(1, math.ceil(tc.dt * freq * tc.points_per_radian))
        return tc.dt / n

    return dt_for


def _cap_segments(segs: list[Segment], max_snapshots: int) -> list[Segment]:
    budget = max_snapshots - 1
    kept = []
    for seg in segs:
        n = seg.n_steps
        if n >= budget:
            kept.append(Segment(seg.t_start, seg.t_start + budget * seg.propagator.dt, seg.B, seg.propagator))
            break
        kept.append(seg)
        budget -= n
    return kept


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    t_wall = time.perf_counter()
    stage = "operators"
    try:
        prep = prepare(config)
        ops, env = prep.ops, prep.env
        p = config.params

        stage = "model"
        effs = {}
        for _, B in config.schedule.segments:
            if B not in effs:
                effs[B] = build_effective_interaction(ops, config.couplings, env, p, B)

        def hamiltonian(B: float) -> np.ndarray:
            h_sys = system_hamiltonian(config.system_hamiltonian, ops, B, p.charge_e)
            return assemble_total_hamiltonian(h_sys, env, effs[B])

        stage = "dynamics"
        segs = build_segments(config.schedule, hamiltonian, config.time.t_end, cadence(config), p.hbar)
        segs = _cap_segments(segs, config.time.max_snapshots)

        dim_s, dim_e = ops.dim, env.dim
        raw: dict[str, list[np.ndarray]] = {b: [] for b in config.diagnostics.bases}
        purities: list[np.ndarray] = []
        times: list[np.ndarray] = []
        fields: list[np.ndarray] = []
        stats = EvolutionStats()
        for t_idx, (measured, psi_s) in enumerate(initial_system_states(config, prep)):
            psi0 = np.kron(psi_s, env.initial_env_state)
            pur_parts = []
            for chunk in iter_evolve(psi0, segs, stats=stats):
                if t_idx == 0:
                    times.append(chunk.times)
                    fields.append(chunk.B)
                for j, b in enumerate(measured):
                    coh, pur = coherence_l1_batch(chunk.amplitudes, dim_s, dim_e, prep.bases[b])
                    raw[b].append(coh)
                    if j == 0:
                        pur_parts.append(pur)
            purities.append(np.concatenate(pur_parts))
        purity = np.min(np.stack(purities), axis=0)
        trace = CoherenceTrace(np.concatenate(times), {b: np.concatenate(v) for b, v in raw.items()}, purity)

        stage = "diagnostics"
        estimates = {}
        for b in config.diagnostics.bases:
            try:
                estimates[b] = extract_decoherence_time(trace, b)
            except NoInitialCoherence as exc:
                estimates[b] = DecoherenceEstimate(None, b, note=str(exc))
        residuals = {
            b: {B: pointer_residual(eff.h_int_total, prep.bases[b], dim_e) for B, eff in effs.items()}
            for b in config.diagnostics.bases
        }
        recurrence = {
            b: min(recurrence_estimate(eff.h_int_total, env.h_env, prep.bases[b]) for eff in effs.values())
            for b in config.diagnostics.bases
        }
        w = config.diagnostics.bin_width
        sectors_q = [coarse_grain_sectors(q, w) for q in ops.q]
        sectors_k = [coarse_grain_sectors(k, w) for k in ops.k]
        macro = {B: macroscopic_decomposition(eff, sectors_q, sectors_k) for B, eff in effs.items()}
        hygiene = {
            "max_unitarity_error": stats.max_unitarity_error,
            "max_norm_drift": stats.max_norm_drift,
            "max_trace_error": (1 + stats.max_norm_drift) ** 2 - 1,
            "min_purity": float(np.min(np.stack(purities))),
            "max_purity": float(np.max(np.stack(purities))),
            "dim_system": dim_s,
        }
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage attached
        raise ScenarioError(stage, exc) from exc

    return ScenarioReport(
        config=config.to_dict(),
        trace=trace,
        field_values=np.concatenate(fields),
        estimates=estimates,
        residuals=residuals,
        coefficients={B: eff.coefficients for B, eff in effs.items()},
        macroscopic=macro,
        recurrence_time=recurrence,
        horizon=float(trace.times[-1]),
        hygiene=hygiene,
        wall_time=time.perf_counter() - t_wall,
        seed=config.seed,
    )


@dataclass
class SweepResult:
    reports: dict[float, ScenarioReport]
    classification: Regime | None
    crossover: float | None
    note: str = ""

    def taus(self, basis: str) -> dict[float, float | None]:
        return {B: r.tau(basis) for B, r in self.reports.items()}


def _censored(r: ScenarioReport, basis: str) -> float:
    tau = r.tau(basis)
    return r.horizon if tau is None else tau


def crossover_field(reports: dict[float, ScenarioReport]) -> float | None:
    """Field where the position and momentum decoherence times cross.

    Uses log(tau_q / tau_k) with a missing tau censored at the run horizon,
    over positive fields only; interpolates linearly in log B between the
    last field where momentum is faster and the first where position is.
    """
    pts = []
    for B in sorted(reports):
        r = reports[B]
        if B <= 0 or (r.tau("position") is None and r.tau("momentum") is None):
            continue
        pts.append((B, math.log(_censored(r, "position") / _censored(r, "momentum"))))
    for (b0, s0), (b1, s1) in zip(pts, pts[1:]):
        if s0 > 0 > s1:
            frac = s0 / (s0 - s1)
            return float(math.exp(math.log(b0) + frac * (math.log(b1) - math.log(b0))))
    return None


def run_sweep(base: ScenarioConfig, values: Iterable[float], workers: int = 1) -> SweepResult:
    values = sorted({float(v) for v in values})
    if not values:
        raise ValueError("sweep needs at least one field value")
    configs = [base.with_field(B) for B in values]
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = dict(zip(values, pool.map(run_scenario, configs)))
    else:
        reports = {B: run_scenario(c) for B, c in zip(values, configs)}

    note = ""
    try:
        regime = classify_regime(
            {B: (r.estimates.get("position"), r.estimates.get("momentum")) for B, r in reports.items()},
            base.couplings.field_scale,
            base.params.charge_e,
        )
        for r in reports.values():
            r.regime = regime.value
    except ClassificationUnavailable as exc:
        regime, note = None, f"classification unavailable: {exc}"
    return SweepResult(reports, regime, crossover_field(reports), note)


def nc_reveal_field(theta: float, charge_e: float = 1.0) -> float:
    if theta == 0:
        raise ValueError("theta = 0: the reveal field 4/(e theta) is undefined")
    return 4 / (charge_e * theta)


def g_channel_norm(config: ScenarioConfig, B: float) -> float:
    """Spectral norm of the g-dependent part of E_i at field B (max over i)."""
    env = default_environment(config.hilbert, config.env_omega)
    coeffs = compute_effective_coefficients(config.params, B)
    with_g, _ = effective_env_operators(config.couplings, env, coeffs)
    f_only = CouplingMatrices(np.zeros((2, 2)), config.couplings.f)
    without_g, _ = effective_env_operators(f_only, env, coeffs)
    return max(float(np.linalg.norm(a - b, 2)) for a, b in zip(with_g, without_g))


def run_nc_reveal(
    base: ScenarioConfig, thetas: Sequence[float] | None = None, workers: int = 1
) -> ScenarioReport:
    """Run at B = 4/(e theta), where the g-channel coupling to q drops out.

    With ``thetas`` the scenario is repeated across noncommutativity values
    at fixed couplings and the position decoherence times and their ratios
    to the smallest theta are stored in ``report.extras['reveal']``.
    """
    p = base.params
    if p.theta == 0:
        raise ValueError("run_nc_reveal needs theta != 0")
    if not (np.any(base.couplings.g) and np.any(base.couplings.f)):
        raise ValueError("run_nc_reveal needs both g and f nonzero")

    def at(theta: float) -> ScenarioConfig:
        cfg = base.replace(params=type(p)(theta, p.sigma, p.hbar, p.charge_e))
        return cfg.with_field(nc_reveal_field(theta, p.charge_e))

    cfg = at(p.theta)
    B = cfg.schedule.segments[0][1]
    c_qg = compute_effective_coefficients(cfg.params, B).c_qg
    # 1 - e B theta / 4 may keep a few ulps for theta values that are not exact in binary
    if abs(c_qg) > 4 * np.finfo(float).eps:
        raise ValueError(f"c_qg = {c_qg!r} at B = {B!r}; the reveal condition is not met")
    sweep_thetas = sorted(set(thetas or [])) or [p.theta]
    configs = [at(t) for t in sweep_thetas]
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = dict(zip(sweep_thetas, pool.map(run_scenario, configs)))
    else:
        runs = {t: run_scenario(c) for t, c in zip(sweep_thetas, configs)}
    report = runs[p.theta] if p.theta in runs else run_scenario(cfg)
    taus = {t: r.tau("position") for t, r in runs.items()}
    t0 = taus[sweep_thetas[0]]
    report.extras["reveal"] = {
        "B": B,
        "c_qg": c_qg,
        "g_channel_norm": g_channel_norm(cfg, B),
        "tau_q": taus,
        "ratios": {t: (None if v is None or t0 is None else v / t0) for t, v in taus.items()},
        "hygiene": {t: r.hygiene for t, r in runs.items()},
    }
    return report
