"""Decoherence diagnostics on reduced system states and interaction operators."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dynamics import ReducedState
from .model import EffectiveInteraction
from .operators import DimensionError, require_hermitian

# prefactor of the macroscopic-observable error bound, kept as metadata only
VON_NEUMANN_FACTOR = 60.0
POINTER_SEPARATION = 10.0


class NoInitialCoherence(ValueError):
    pass


class ClassificationUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class PointerBasisCandidate:
    label: str
    vectors: np.ndarray  # columns

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError(f"basis must be a square matrix of column vectors, got {v.shape}")
        dev = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))
        if dev > 1e-10:
            raise ValueError(f"basis {self.label!r} is not orthonormal (Gram deviation {dev:.2e})")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def coherence_l1(rho: ReducedState | np.ndarray, basis: PointerBasisCandidate) -> float:
    """Sum of |<m|rho|m'>| over m != m'."""
    r = rho.rho if isinstance(rho, ReducedState) else np.asarray(rho)
    v = basis.vectors
    m = v.conj().T @ r @ v
    return float(np.abs(m).sum() - np.abs(np.diagonal(m)).sum())


def coherence_l1_batch(
    amplitudes: np.ndarray, dim_s: int, dim_e: int, basis: PointerBasisCandidate
) -> tuple[np.ndarray, np.ndarray]:
    """l1 coherence and purity of the reduced state for a stack of composite states.

    ``amplitudes`` has shape (n, dim_s * dim_e).  Purity does not depend on the
    basis but comes for free here.
    """
    p = amplitudes.reshape(-1, dim_s, dim_e)
    pb = np.matmul(basis.vectors.conj().T[None], p)
    rho = np.matmul(pb, pb.conj().transpose(0, 2, 1))
    mag = np.abs(rho)
    coh = mag.sum(axis=(1, 2)) - np.trace(mag, axis1=1, axis2=2)
    purity = np.sum(mag**2, axis=(1, 2))
    return coh, purity


@dataclass
class CoherenceTrace:
    times: np.ndarray
    coh_raw: dict[str, np.ndarray]
    purity: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coh_raw = {k: np.asarray(v, dtype=float) for k, v in self.coh_raw.items()}
        self.purity = np.asarray(self.purity, dtype=float)

    @property
    def coh_norm(self) -> dict[str, np.ndarray]:
        out = {}
        for label, c in self.coh_raw.items():
            if len(c) and c[0] > 0:
                out[label] = c / c[0]
            else:
                out[label] = np.full_like(c, np.nan)
        return out

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DecoherenceEstimate:
    tau_d: float | None
    basis_label: str
    method: str = "first 1/e crossing of normalized l1 coherence, linear interpolation"
    note: str = ""


def crossing_time(times: np.ndarray, values: np.ndarray, level: float) -> float | None:
    """First time ``values`` falls to ``level``, linearly interpolated; None if never."""
    below = np.nonzero(values <= level)[0]
    below = below[below > 0]
    if len(below) == 0:
        return None
    i = int(below[0])
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    if v0 == v1:
        return float(t1)
    return float(t0 + (t1 - t0) * (v0 - level) / (v0 - v1))


def extract_decoherence_time(trace: CoherenceTrace, basis_label: str) -> DecoherenceEstimate:
    if len(trace) < 2:
        raise ValueError("need at least two samples to extract a decoherence time")
    raw = trace.coh_raw[basis_label]
    if not raw[0] > 0:
        raise NoInitialCoherence(f"no initial coherence in the {basis_label} basis")
    tau = crossing_time(trace.times, raw / raw[0], 1 / math.e)
    return DecoherenceEstimate(tau, basis_label)


def _block_norms(h: np.ndarray, basis: PointerBasisCandidate, dim_e: int) -> np.ndarray:
    dim_s = basis.dim
    if h.shape != (dim_s * dim_e, dim_s * dim_e):
        raise DimensionError(f"operator shape {h.shape} does not match {dim_s} x {dim_e}")
    v = basis.vectors
    blocks = h.reshape(dim_s, dim_e, dim_s, dim_e)
    blocks = np.einsum("am,aebf,bn->menf", v.conj(), blocks, v, optimize=True)
    return np.sum(np.abs(blocks) ** 2, axis=(1, 3))


def pointer_residual(h_int: np.ndarray, basis: PointerBasisCandidate, dim_e: int) -> float:
    """Share of the Hilbert-Schmidt weight of H_int in off-diagonal system blocks.

    Each <m|H_int|m'> is an operator on the environment; R = 0 exactly when
    the basis diagonalizes the interaction.
    """
    w = _block_norms(np.asarray(h_int), basis, dim_e)
    total = w.sum()
    if total == 0:
        raise ValueError("H_int vanishes; the residual is undefined")
    return float(np.clip((total - np.trace(w)) / total, 0.0, 1.0))


def recurrence_estimate(
    h_int: np.ndarray, h_env: np.ndarray, basis: PointerBasisCandidate
) -> float:
    """Time before coherence in ``basis`` can start to revive.

    While the system sits in |m>, the environment evolves under
    H_E + <m|H_int|m>.  The overlap of branches m and n is driven by
    U_n^dag U_m, whose phases spread at most at W_m + W_n, the sum of their
    spectral widths; revivals need a spread of pi, so pi / (2 max W) bounds
    the window in which decay is free of them.
    """
    dim_s, dim_e = basis.dim, h_env.shape[0]
    if h_int.shape != (dim_s * dim_e, dim_s * dim_e):
        raise DimensionError(f"operator shape {h_int.shape} does not match {dim_s} x {dim_e}")
    v = basis.vectors
    diag = np.einsum("am,aebf,bm->mef", v.conj(), h_int.reshape(dim_s, dim_e, dim_s, dim_e), v, optimize=True)
    w = np.linalg.eigvalsh(diag + h_env[None])
    width = float(np.max(w[:, -1] - w[:, 0]))
    return math.inf if width == 0 else math.pi / (2 * width)


@dataclass(frozen=True)
class SectorDecomposition:
    projectors: tuple[np.ndarray, ...]
    labels: np.ndarray
    bin_width: float
    max_deviation: float
    spreads: np.ndarray
    degenerate: bool = False
    bound_factor: float = VON_NEUMANN_FACTOR

    @property
    def observable(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.labels, self.projectors))

    def __len__(self) -> int:
        return len(self.projectors)


def coarse_grain_sectors(op: np.ndarray, bin_width: float) -> SectorDecomposition:
    """Bin the spectrum of ``op`` into intervals of ``bin_width`` starting at its minimum.

    Each non-empty bin gives one sector projector, labelled by the bin centre.
    ``max_deviation`` is max_n ||(op - Lambda) P_n|| (spectral norm) which the
    binning bounds by ``bin_width / 2``.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    require_hermitian(op)
    w, v = np.linalg.eigh(op)
    scale = max(1.0, float(np.max(np.abs(w))))
    # merge numerically degenerate eigenvalues before binning
    new_level = np.concatenate([[True], np.diff(w) > 1e-9 * scale])
    level_id = np.cumsum(new_level) - 1
    level_vals = np.array([w[level_id == i].mean() for i in range(level_id[-1] + 1)])
    gaps = np.diff(level_vals)
    degenerate = bool(len(gaps) and bin_width < gaps.min())
    if degenerate:
        warnings.warn(
            f"bin_width {bin_width} is below the smallest eigenvalue gap {gaps.min():.3g}; "
            "sectors reduce to single eigenspaces",
            stacklevel=2,
        )
    lo = level_vals[0]
    n_bins = max(1, math.ceil((level_vals[-1] - lo) / bin_width - 1e-12))
    level_bin = np.minimum(np.floor((level_vals - lo) / bin_width).astype(int), n_bins - 1)
    bins = level_bin[level_id]
    projectors, labels, spreads, devs = [], [], [], []
    for n in np.unique(bins):
        cols = v[:, bins == n]
        proj = cols @ cols.conj().T
        center = lo + (n + 0.5) * bin_width
        projectors.append(proj)
        labels.append(center)
        spreads.append(float(np.ptp(w[bins == n])))
        devs.append(float(np.max(np.abs(w[bins == n] - center))))
    return SectorDecomposition(
        projectors=tuple(projectors),
        labels=np.array(labels),
        bin_width=float(bin_width),
        max_deviation=max(devs),
        spreads=np.array(spreads),
        degenerate=degenerate,
    )


def macroscopic_decomposition(
    eff: EffectiveInteraction,
    sectors_q: Sequence[SectorDecomposition],
    sectors_k: Sequence[SectorDecomposition],
) -> tuple[float, float]:
    """(||H_int - H'||_HS, ||H'||_HS) with q_i, k_i replaced by their binned observables.

    H' = H_int - sum_i (xi_i (x) E_i + pi_i (x) F_i).
    """
    main = sum(
        np.kron(sectors_q[i].observable, eff.e_ops[i]) + np.kron(sectors_k[i].observable, eff.f_ops[i])
        for i in range(2)
    )
    if main.shape != eff.h_int_total.shape:
        raise DimensionError("sector observables do not match the interaction's system space")
    residual = eff.h_int_total - main
    return float(np.linalg.norm(main)), float(np.linalg.norm(residual))


class Regime(str, enum.Enum):
    GENERAL = "model_general_13"
    MOMENTUM = "model_momentum_28"
    COORDINATE = "model_coordinate_24"
    UNDECOHERED = "undecohered_18"
    AMBIGUOUS = "ambiguous"


def _tau(x) -> float | None:
    if isinstance(x, DecoherenceEstimate):
        return x.tau_d
    return None if x is None else float(x)


def pointer_basis(tau_q, tau_k, separation: float = POINTER_SEPARATION) -> str | None:
    """'position', 'momentum' or None for one field value.

    A basis counts as the pointer basis when it decoheres and the other basis
    either does not or is slower by at least ``separation``.
    """
    tq, tk = _tau(tau_q), _tau(tau_k)
    if tq is not None and (tk is None or tk >= separation * tq):
        return "position"
    if tk is not None and (tq is None or tq >= separation * tk):
        return "momentum"
    return None


def field_regimes(
    fields: Sequence[float], field_scale: float, charge_e: float = 1.0
) -> tuple[list[float], list[float]]:
    """Split field values into weak (eB/2 <= 0.01 scale) and strong (eB/2 >= 100 scale)."""
    weak = [B for B in fields if abs(charge_e * B / 2) <= 0.01 * field_scale]
    strong = [B for B in fields if abs(charge_e * B / 2) >= 100 * field_scale]
    return weak, strong


def classify_regime(
    sweep: Mapping[float, tuple],
    field_scale: float,
    charge_e: float = 1.0,
    separation: float = POINTER_SEPARATION,
    slope_tol: float = 0.2,
) -> Regime:
    """Map a B-sweep of (tau_q, tau_k) pairs onto the four linear-coupling cases.

    Entries may be DecoherenceEstimate objects, floats or None.
    """
    if not sweep:
        raise ClassificationUnavailable("empty sweep")
    weak, strong = field_regimes(list(sweep), field_scale, charge_e)
    if not weak or not strong:
        raise ClassificationUnavailable(
            f"sweep needs weak (eB/2 <= {0.01 * field_scale:g}) and strong "
            f"(eB/2 >= {100 * field_scale:g}) entries; weak={weak}, strong={strong}"
        )
    taus = {B: (_tau(a), _tau(b)) for B, (a, b) in sweep.items()}
    if all(tq is None and tk is None for tq, tk in taus.values()):
        return Regime.UNDECOHERED
    kind = {B: pointer_basis(*taus[B], separation) for B in taus}
    if all(kind[B] == "position" for B in weak + strong):
        return Regime.COORDINATE
    if all(kind[B] == "momentum" for B in weak):
        return Regime.MOMENTUM
    if all(kind[B] == "position" for B in strong) and not any(kind[B] == "position" for B in weak):
        pos = sorted(B for B in strong if B > 0)
        if len(pos) >= 2:
            x = np.log(pos)
            y = np.log([taus[B][0] for B in pos])
            slope = np.polyfit(x, y, 1)[0]
            if abs(slope + 1) > slope_tol:
                return Regime.AMBIGUOUS
        return Regime.GENERAL
    return Regime.AMBIGUOUS
