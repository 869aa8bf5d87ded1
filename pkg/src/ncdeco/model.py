"""Composite Hamiltonian: system + qubit environment + linear interaction.

The interaction g_ij x_i C_j + f_pq p_p D_q is rewritten in canonical
variables with the perpendicular field folded in through minimal coupling
k_l -> k_l - e A_l, A_l = (B/2) eps_lm q_m (symmetric gauge).  Collecting
terms gives

    H_int = q_i E_i + k_i F_i
    E_i = c_qg g_ij C_j + c_qf f_pq eps_pi D_q
    F_i = c_kf f_ij D_j + c_kg eps_pi g_pq C_q

with the four scalar prefactors from :func:`compute_effective_coefficients`.
Tensor ordering is system (x) environment everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import (
    LEVI_CIVITA,
    CanonicalOps,
    DimensionError,
    HilbertSpec,
    NCParams,
    require_hermitian,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class CouplingMatrices:
    g: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if g.shape != (2, 2) or f.shape != (2, 2):
            raise ValueError(f"g and f must be 2x2, got {g.shape} and {f.shape}")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(f))):
            raise ValueError("coupling entries must be finite")
        if not (np.any(g) or np.any(f)):
            raise ValueError("g = f = 0: no interaction, nothing can decohere")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", f)

    def scaled(self, s: float) -> "CouplingMatrices":
        return CouplingMatrices(s * self.g, s * self.f)

    @property
    def field_scale(self) -> float:
        """Reference coupling for weak/strong field thresholds: max|f|, else max|g|."""
        fmax = float(np.max(np.abs(self.f)))
        return fmax if fmax > 0 else float(np.max(np.abs(self.g)))


@dataclass(frozen=True)
class EnvSpec:
    c_ops: tuple[np.ndarray, np.ndarray]
    d_ops: tuple[np.ndarray, np.ndarray]
    h_env: np.ndarray
    initial_env_state: np.ndarray

    def __post_init__(self):
        if len(self.c_ops) != 2 or len(self.d_ops) != 2:
            raise ValueError("need exactly two C and two D operators")
        dim = self.h_env.shape[0]
        for name, op in [("C1", self.c_ops[0]), ("C2", self.c_ops[1]),
                         ("D1", self.d_ops[0]), ("D2", self.d_ops[1]), ("H_E", self.h_env)]:
            if op.shape != (dim, dim):
                raise DimensionError(f"{name} has shape {op.shape}, expected {(dim, dim)}")
            require_hermitian(op, name)
        chi = np.asarray(self.initial_env_state, dtype=complex)
        if chi.shape != (dim,):
            raise DimensionError(f"initial environment state has shape {chi.shape}, expected ({dim},)")
        if abs(np.linalg.norm(chi) - 1) > 1e-12:
            raise ValueError("initial environment state is not normalized")
        stacked = np.stack([op.ravel() for op in (*self.c_ops, *self.d_ops)])
        if np.linalg.matrix_rank(stacked, tol=1e-10) < 4:
            raise ValueError("environment observables {C_j, D_q} are linearly dependent")
        object.__setattr__(self, "initial_env_state", chi)

    @property
    def dim(self) -> int:
        return self.h_env.shape[0]


def _qubit_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i in range(n):
        out = np.kron(out, op if i == site else np.eye(2))
    return out


def default_environment(spec: HilbertSpec, omega: float | Sequence[float] = 1.0) -> EnvSpec:
    """Qubit banks: C_j, D_q are Pauli-x on the first two qubits of the C and D banks.

    H_E = sum_n (omega_n / 2) Z_n and the initial state has every qubit in
    its ground state (Z = -1).
    """
    n = spec.n_env_qubits
    omegas = np.broadcast_to(np.asarray(omega, dtype=float), (n,))
    sites: dict[str, list[int]] = {"C": [], "D": []}
    pos = 0
    for label, count in spec.env_banks:
        sites[label].extend(range(pos, pos + count))
        pos += count
    for label in ("C", "D"):
        if len(sites[label]) < 2:
            raise ValueError(f"the {label} bank needs at least two qubits, has {len(sites[label])}")
    h_env = sum((omegas[i] / 2) * _qubit_op(PAULI_Z, i, n) for i in range(n))
    ground = np.zeros(2**n, dtype=complex)
    ground[-1] = 1.0
    return EnvSpec(
        c_ops=tuple(_qubit_op(PAULI_X, i, n) for i in sites["C"][:2]),
        d_ops=tuple(_qubit_op(PAULI_X, i, n) for i in sites["D"][:2]),
        h_env=h_env,
        initial_env_state=ground,
    )


@dataclass(frozen=True)
class FieldSchedule:
    """Piecewise-constant field: ``segments`` is a sequence of (t_start, B)."""

    segments: tuple[tuple[float, float], ...] = ((0.0, 0.0),)

    def __post_init__(self):
        segs = tuple((float(t), float(b)) for t, b in self.segments)
        if not segs or segs[0][0] != 0.0:
            raise ValueError("the first field segment must start at t = 0")
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise ValueError("segment start times must be strictly increasing")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, B: float) -> "FieldSchedule":
        return cls(((0.0, B),))

    def field_at(self, t: float) -> float:
        B = self.segments[0][1]
        for t0, b in self.segments:
            if t >= t0:
                B = b
        return B

    def intervals(self, t_end: float) -> list[tuple[float, float, float]]:
        """(t_start, t_stop, B) for every segment that begins before ``t_end``."""
        out = []
        for i, (t0, b) in enumerate(self.segments):
            if t0 >= t_end and i > 0:
                break
            t1 = self.segments[i + 1][0] if i + 1 < len(self.segments) else t_end
            out.append((t0, min(t1, t_end), b))
        return out


@dataclass(frozen=True)
class EffectiveCoefficients:
    c_qg: float
    c_qf: float
    c_kf: float
    c_kg: float


def compute_effective_coefficients(params: NCParams, B: float) -> EffectiveCoefficients:
    e = params.charge_e
    return EffectiveCoefficients(
        c_qg=1 - e * B * params.theta / 4,
        c_qf=-(e * B / 2 - params.sigma / 2),
        c_kf=1.0,
        c_kg=-params.theta / 2,
    )


@dataclass(frozen=True)
class EffectiveInteraction:
    e_ops: tuple[np.ndarray, np.ndarray]
    f_ops: tuple[np.ndarray, np.ndarray]
    h_int_total: np.ndarray
    coefficients: EffectiveCoefficients
    B: float


def _check_dims(sys_ops: Sequence[np.ndarray], env: EnvSpec) -> None:
    shapes = {op.shape for op in sys_ops}
    if len(shapes) != 1:
        raise DimensionError(f"system operators disagree in shape: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionError(f"system operators must be square, got {shape}")


def build_bare_interaction(
    x: Sequence[np.ndarray],
    p: Sequence[np.ndarray],
    couplings: CouplingMatrices,
    env: EnvSpec,
) -> np.ndarray:
    """sum_ij g_ij x_i (x) C_j + sum_pq f_pq p_p (x) D_q."""
    _check_dims([*x, *p], env)
    dim = x[0].shape[0] * env.dim
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            if couplings.g[i, j]:
                h += couplings.g[i, j] * np.kron(x[i], env.c_ops[j])
            if couplings.f[i, j]:
                h += couplings.f[i, j] * np.kron(p[i], env.d_ops[j])
    return h


def effective_env_operators(
    couplings: CouplingMatrices, env: EnvSpec, coeffs: EffectiveCoefficients
) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    g, f, eps = couplings.g, couplings.f, LEVI_CIVITA
    C, D = env.c_ops, env.d_ops
    E, F = [], []
    for i in range(2):
        Ei = np.zeros_like(env.h_env)
        Fi = np.zeros_like(env.h_env)
        for j in range(2):
            Ei = Ei + coeffs.c_qg * g[i, j] * C[j]
            Fi = Fi + coeffs.c_kf * f[i, j] * D[j]
        for p_ in range(2):
            for q_ in range(2):
                Ei = Ei + coeffs.c_qf * f[p_, q_] * eps[p_, i] * D[q_]
                Fi = Fi + coeffs.c_kg * eps[p_, i] * g[p_, q_] * C[q_]
        E.append(Ei)
        F.append(Fi)
    return (E[0], E[1]), (F[0], F[1])


def build_effective_interaction(
    ops: CanonicalOps,
    couplings: CouplingMatrices,
    env: EnvSpec,
    params: NCParams,
    B: float,
) -> EffectiveInteraction:
    _check_dims([*ops.q, *ops.k], env)
    coeffs = compute_effective_coefficients(params, B)
    E, F = effective_env_operators(couplings, env, coeffs)
    h = sum(np.kron(ops.q[i], E[i]) + np.kron(ops.k[i], F[i]) for i in range(2))
    return EffectiveInteraction(e_ops=E, f_ops=F, h_int_total=h, coefficients=coeffs, B=B)


SYSTEM_HAMILTONIANS = ("none", "harmonic", "free", "landau_toggle")


def system_hamiltonian(
    kind: str,
    ops: CanonicalOps,
    B: float = 0.0,
    charge_e: float = 1.0,
    mass: float = 1.0,
    omega: float = 1.0,
) -> np.ndarray:
    """Self-Hamiltonian of the particle in the commuting variables.

    ``harmonic`` is the isotropic trap, ``free`` the kinetic term only,
    ``landau_toggle`` the trap with minimal coupling k -> k - eA applied to the
    kinetic term as well, and ``none`` is H_S = 0.
    """
    q1, q2 = ops.q
    k1, k2 = ops.k
    if kind == "none":
        return np.zeros_like(q1)
    if kind == "free":
        return (k1 @ k1 + k2 @ k2) / (2 * mass)
    if kind == "harmonic":
        return (k1 @ k1 + k2 @ k2) / (2 * mass) + 0.5 * mass * omega**2 * (q1 @ q1 + q2 @ q2)
    if kind == "landau_toggle":
        a = charge_e * B / 2
        pi1 = k1 - a * q2
        pi2 = k2 + a * q1
        return (pi1 @ pi1 + pi2 @ pi2) / (2 * mass) + 0.5 * mass * omega**2 * (q1 @ q1 + q2 @ q2)
    raise ValueError(f"unknown system Hamiltonian {kind!r}; choose from {SYSTEM_HAMILTONIANS}")


def assemble_total_hamiltonian(
    h_sys: np.ndarray, env: EnvSpec, eff: EffectiveInteraction
) -> np.ndarray:
    dim_s = h_sys.shape[0]
    if eff.h_int_total.shape != (dim_s * env.dim, dim_s * env.dim):
        raise DimensionError(
            f"interaction shape {eff.h_int_total.shape} does not match "
            f"system {dim_s} x environment {env.dim}"
        )
    h = (
        np.kron(h_sys, np.eye(env.dim))
        + np.kron(np.eye(dim_s), env.h_env)
        + eff.h_int_total
    )
    require_hermitian(h, "total Hamiltonian")
    return h
