"""Truncated phase-space operators for a particle on the 2D plane.

The canonical pair (q, k) of each axis is built from a Fock-truncated
harmonic-oscillator ladder.  Noncommutative coordinates (x, p) follow from
the Bopp shift

    x_a = q_a - (theta/2) eps_ab k_b,     p_a = k_a + (sigma/2) eps_ab q_b

with eps_12 = +1.  Operators are plain complex ``numpy`` arrays; the system
space is ordered axis1 (x) axis2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# eps[a, b] for a, b in {0, 1}; eps_12 = +1, eps_21 = -1
LEVI_CIVITA = np.array([[0.0, 1.0], [-1.0, 0.0]])

HERMITIAN_TOL = 1e-12
DEFAULT_MAX_DIM = 4096


class DimensionError(ValueError):
    """Raised when operator shapes disagree or a space would be too large."""


@dataclass(frozen=True)
class HilbertSpec:
    """Truncation of the plane and layout of the qubit environment."""

    d_axis: int = 8
    env_banks: tuple[tuple[str, int], ...] = (("C", 2), ("D", 2))
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if int(self.d_axis) != self.d_axis or self.d_axis < 4:
            raise ValueError(f"d_axis must be an integer >= 4, got {self.d_axis}")
        for label, count in self.env_banks:
            if label not in ("C", "D"):
                raise ValueError(f"unknown environment bank label {label!r}")
            if int(count) != count or count < 1:
                raise ValueError(f"bank {label} needs a positive qubit count, got {count}")

    @property
    def dim_system(self) -> int:
        return self.d_axis**2

    @property
    def n_env_qubits(self) -> int:
        return sum(count for _, count in self.env_banks)

    @property
    def dim_env(self) -> int:
        return 2**self.n_env_qubits

    @property
    def dim_total(self) -> int:
        return self.dim_system * self.dim_env

    def check_size(self) -> None:
        if self.dim_total > self.max_dim:
            raise DimensionError(
                f"composite dimension {self.dim_total} = {self.d_axis}^2 x 2^{self.n_env_qubits} "
                f"exceeds the cap {self.max_dim} "
                f"(~{self.dim_total**2 * 16 / 2**20:.0f} MiB per dense operator)"
            )


@dataclass(frozen=True)
class NCParams:
    theta: float = 0.0
    sigma: float = 0.0
    hbar: float = 1.0
    charge_e: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        for name in ("theta", "sigma", "charge_e"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class CanonicalOps:
    """q_a, k_a on the d_axis**2 system space plus the single-axis blocks."""

    q: tuple[np.ndarray, np.ndarray]
    k: tuple[np.ndarray, np.ndarray]
    q_axis: np.ndarray
    k_axis: np.ndarray
    hbar: float = 1.0
    d_axis: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d_axis", self.q_axis.shape[0])

    @property
    def dim(self) -> int:
        return self.q[0].shape[0]


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) < tol)


def require_hermitian(op: np.ndarray, name: str = "operator", tol: float = HERMITIAN_TOL) -> None:
    if not is_hermitian(op, tol):
        op = np.asarray(op)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionError(f"{name} must be a square matrix, got shape {op.shape}")
        dev = np.max(np.abs(op - op.conj().T))
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def ladder(d: int) -> np.ndarray:
    """Truncated annihilation operator on ``d`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def axis_ops(d: int, hbar: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Single-axis (q, k) from the ladder: q = sqrt(hbar/2)(a + a^dag), k = i sqrt(hbar/2)(a^dag - a)."""
    if d < 1:
        raise ValueError("need at least one Fock level")
    a = ladder(d)
    ad = a.conj().T
    s = np.sqrt(hbar / 2.0)
    return s * (a + ad), 1j * s * (ad - a)


def build_canonical_ops(spec: HilbertSpec, hbar: float = 1.0) -> CanonicalOps:
    spec.check_size()
    q, k = axis_ops(spec.d_axis, hbar)
    eye = np.eye(spec.d_axis)
    return CanonicalOps(
        q=(np.kron(q, eye), np.kron(eye, q)),
        k=(np.kron(k, eye), np.kron(eye, k)),
        q_axis=q,
        k_axis=k,
        hbar=hbar,
    )


def bopp_shift(
    q: tuple[np.ndarray, np.ndarray],
    k: tuple[np.ndarray, np.ndarray],
    params: NCParams,
) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Map canonical (q, k) to noncommutative (x, p).

    Returns ``((x1, x2), (p1, p2))``.
    """
    shapes = {op.shape for op in (*q, *k)}
    if len(shapes) != 1:
        raise DimensionError(f"mismatched operator shapes {sorted(shapes)}")
    eps = LEVI_CIVITA
    x = tuple(
        q[a] - (params.theta / 2) * sum(eps[a, b] * k[b] for b in range(2)) for a in range(2)
    )
    p = tuple(
        k[a] + (params.sigma / 2) * sum(eps[a, b] * q[b] for b in range(2)) for a in range(2)
    )
    return x, p


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each column real positive
    idx = np.argmax(np.abs(vecs) > np.abs(vecs).max(axis=0) * (1 - 1e-9), axis=0)
    ph = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)[None, :]


def eigenbasis(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of a Hermitian operator.

    Each eigenvector is phase-fixed so its largest component is real and
    positive, which keeps runs reproducible.  Called on a truncated q this is
    the position basis, on k the momentum basis.
    """
    require_hermitian(op)
    w, v = np.linalg.eigh(op)
    return w, _fix_phases(v)


position_eigenbasis = eigenbasis


def product_eigenbasis(axis_op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint eigenbasis of (op x 1, 1 x op) on the 2D space.

    Column ``i1 * d + i2`` is the product of the i1-th and i2-th single-axis
    eigenvectors; the returned eigenvalues have shape (d*d, 2).
    """
    w, v = eigenbasis(axis_op)
    d = len(w)
    vals = np.stack([np.repeat(w, d), np.tile(w, d)], axis=1)
    return vals, np.kron(v, v)
