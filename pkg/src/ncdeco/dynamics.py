"""Pure-state evolution of system + environment and the partial trace.

Each field segment gets one propagator U = exp(-i H dt / hbar), built from a
Hermitian eigendecomposition of the segment Hamiltonian.  Applying U j times
is done in the eigenbasis, where U is diagonal, so the j-th snapshot costs a
phase multiply plus one (batched) basis change and no rounding accumulates
from step to step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .model import FieldSchedule
from .operators import DimensionError, is_hermitian

NORM_ABORT = 1e-8
UNITARITY_TOL = 1e-10
BOUNDARY_TOL = 1e-9


class PropagatorError(RuntimeError):
    pass


class NormDriftError(RuntimeError):
    pass


@dataclass
class CompositeState:
    amplitudes: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"state norm is {norm!r}, expected 1")

    @classmethod
    def product(cls, system: np.ndarray, env: np.ndarray, t: float = 0.0) -> "CompositeState":
        return cls(np.kron(system, env), t)


@dataclass(frozen=True)
class Propagator:
    energies: np.ndarray
    vectors: np.ndarray
    dt: float
    hbar: float = 1.0
    unitarity_error: float = 0.0

    @property
    def u(self) -> np.ndarray:
        return self.power(1)

    def phases(self, steps: np.ndarray | int) -> np.ndarray:
        """exp(-i E_n j dt / hbar) with shape (len(steps), dim)."""
        steps = np.atleast_1d(np.asarray(steps, dtype=float))
        return np.exp(-1j * np.outer(steps * self.dt, self.energies) / self.hbar)

    def power(self, j: int) -> np.ndarray:
        ph = self.phases(j)[0]
        return (self.vectors * ph[None, :]) @ self.vectors.conj().T

    @property
    def frequency_scale(self) -> float:
        """Half the spectral width over hbar: the fastest rate the segment can drive."""
        return float(self.energies[-1] - self.energies[0]) / (2 * self.hbar)


def _unitarity_error(prop: Propagator) -> float:
    u = prop.u
    return float(np.max(np.abs(u.conj().T @ u - np.eye(len(prop.energies)))))


def _diagonalize(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if not is_hermitian(h):
        raise ValueError("propagator needs a Hermitian Hamiltonian")
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise PropagatorError(
            f"eigendecomposition failed: dim={h.shape[0]}, "
            f"finite={bool(np.all(np.isfinite(h)))}, |H|_max={np.max(np.abs(h)):.3e}"
        ) from exc


def propagator_from_eigh(w: np.ndarray, v: np.ndarray, dt: float, hbar: float = 1.0) -> Propagator:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    prop = Propagator(energies=w, vectors=v, dt=dt, hbar=hbar)
    err = _unitarity_error(prop)
    if err > UNITARITY_TOL:
        raise PropagatorError(f"propagator not unitary: |U^dag U - 1|_max = {err:.3e}")
    return Propagator(energies=w, vectors=v, dt=dt, hbar=hbar, unitarity_error=err)


def make_propagator(h: np.ndarray, dt: float, hbar: float = 1.0) -> Propagator:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    w, v = _diagonalize(h)
    return propagator_from_eigh(w, v, dt, hbar)


@dataclass(frozen=True)
class Segment:
    """A constant-field stretch of the run with its own snapshot cadence."""

    t_start: float
    t_stop: float
    B: float
    propagator: Propagator

    @property
    def n_steps(self) -> int:
        span = self.t_stop - self.t_start
        n = int(round(span / self.propagator.dt))
        if abs(n * self.propagator.dt - span) > BOUNDARY_TOL:
            raise ValueError(
                f"dt={self.propagator.dt} does not divide the segment [{self.t_start}, {self.t_stop}]"
            )
        return n


@dataclass
class EvolutionChunk:
    times: np.ndarray
    amplitudes: np.ndarray  # (n, dim)
    B: np.ndarray


@dataclass
class EvolutionStats:
    max_norm_drift: float = 0.0
    max_unitarity_error: float = 0.0
    n_snapshots: int = 0


def iter_evolve(
    psi0: np.ndarray,
    segments: Sequence[Segment],
    chunk_size: int = 512,
    stats: EvolutionStats | None = None,
) -> Iterator[EvolutionChunk]:
    """Yield snapshots in chunks: every segment grid point, then the final time."""
    if not segments:
        raise ValueError("no segments to evolve")
    psi = np.asarray(psi0, dtype=complex)
    stats = stats if stats is not None else EvolutionStats()
    for s_idx, seg in enumerate(segments):
        prop = seg.propagator
        if prop.vectors.shape[0] != psi.shape[0]:
            raise DimensionError(f"state length {psi.shape[0]} vs Hamiltonian {prop.vectors.shape[0]}")
        stats.max_unitarity_error = max(stats.max_unitarity_error, prop.unitarity_error)
        n = seg.n_steps
        last = s_idx == len(segments) - 1
        n_emit = n + 1 if last else n
        coeff = prop.vectors.conj().T @ psi
        for start in range(0, n_emit, chunk_size):
            steps = np.arange(start, min(start + chunk_size, n_emit))
            amps = (prop.phases(steps) * coeff[None, :]) @ prop.vectors.T
            drift = float(np.max(np.abs(np.linalg.norm(amps, axis=1) - 1)))
            stats.max_norm_drift = max(stats.max_norm_drift, drift)
            if drift > NORM_ABORT:
                raise NormDriftError(
                    f"norm drift {drift:.3e} in segment {s_idx} (B={seg.B}) near t={seg.t_start + steps[0] * prop.dt}"
                )
            stats.n_snapshots += len(steps)
            yield EvolutionChunk(
                times=seg.t_start + steps * prop.dt,
                amplitudes=amps,
                B=np.full(len(steps), seg.B),
            )
        psi = prop.vectors @ (prop.phases(n)[0] * coeff)


def build_segments(
    schedule: FieldSchedule,
    hamiltonian: Callable[[float], np.ndarray],
    t_end: float,
    dt: float | Callable[[float], float],
    hbar: float = 1.0,
) -> list[Segment]:
    """One propagator per segment; a field value seen before reuses its eigendecomposition.

    ``dt`` may be a callable taking the segment's frequency scale (half the
    spectral width over hbar) and returning that segment's cadence.
    """
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    eig: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    segs = []
    for t0, t1, B in schedule.intervals(t_end):
        if B not in eig:
            eig[B] = _diagonalize(hamiltonian(B))
        w, v = eig[B]
        seg_dt = dt((w[-1] - w[0]) / (2 * hbar)) if callable(dt) else dt
        segs.append(Segment(t0, t1, B, propagator_from_eigh(w, v, seg_dt, hbar)))
    return segs


def evolve(
    state: CompositeState,
    schedule: FieldSchedule,
    hamiltonian: Callable[[float], np.ndarray],
    t_end: float,
    dt: float,
    hbar: float = 1.0,
) -> list[CompositeState]:
    """Snapshots every ``dt`` from ``state.t`` (taken as 0) to ``t_end``.

    ``hamiltonian(B)`` returns the total Hamiltonian for field value B; a
    fresh propagator is used at every field-segment boundary.
    """
    for t0, _ in schedule.segments[1:]:
        if t0 < t_end and abs(round(t0 / dt) * dt - t0) > BOUNDARY_TOL:
            raise ValueError(f"dt={dt} does not divide the segment boundary t={t0}")
    segs = build_segments(schedule, hamiltonian, t_end, dt, hbar)
    return [
        CompositeState(a, float(t))
        for chunk in iter_evolve(state.amplitudes, segs)
        for t, a in zip(chunk.times, chunk.amplitudes)
    ]


@dataclass(frozen=True)
class ReducedState:
    rho: np.ndarray
    t: float = 0.0

    def check(self, tol: float = 1e-10) -> None:
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("reduced state is not Hermitian")
        if abs(np.trace(rho).real - 1) > tol:
            raise ValueError(f"reduced state trace {np.trace(rho).real!r}")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise ValueError("reduced state has negative eigenvalues")

    @property
    def purity(self) -> float:
        return float(np.sum(np.abs(self.rho) ** 2))


def reduce_system(state: CompositeState, dim_s: int, dim_e: int) -> ReducedState:
    """rho_S[a, b] = sum_e psi[a, e] conj(psi[b, e])."""
    amps = np.asarray(state.amplitudes)
    if amps.shape != (dim_s * dim_e,):
        raise DimensionError(f"state length {amps.shape} does not factor as {dim_s} x {dim_e}")
    m = amps.reshape(dim_s, dim_e)
    return ReducedState(m @ m.conj().T, state.t)
