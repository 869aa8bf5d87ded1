import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncdeco.model import (
    PAULI_X,
    SYSTEM_HAMILTONIANS,
    CouplingMatrices,
    EnvSpec,
    FieldSchedule,
    assemble_total_hamiltonian,
    build_bare_interaction,
    build_effective_interaction,
    compute_effective_coefficients,
    default_environment,
    system_hamiltonian,
)
from ncdeco.operators import DimensionError, HilbertSpec, NCParams, bopp_shift, build_canonical_ops, is_hermitian

SMALL = HilbertSpec(d_axis=4)
OPS = build_canonical_ops(SMALL)
ENV = default_environment(SMALL)

finite = dict(allow_nan=False, allow_infinity=False)
mat2 = st.lists(st.floats(-3, 3, **finite), min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


def couplings_strategy():
    return st.tuples(mat2, mat2).filter(lambda gf: np.any(gf[0]) or np.any(gf[1])).map(lambda gf: CouplingMatrices(*gf))


def hand_env_operators(c, g, f, C, D):
    """E_i, F_i written out component by component with eps_12 = +1, eps_21 = -1."""
    E1 = c.c_qg * (g[0, 0] * C[0] + g[0, 1] * C[1]) - c.c_qf * (f[1, 0] * D[0] + f[1, 1] * D[1])
    E2 = c.c_qg * (g[1, 0] * C[0] + g[1, 1] * C[1]) + c.c_qf * (f[0, 0] * D[0] + f[0, 1] * D[1])
    F1 = c.c_kf * (f[0, 0] * D[0] + f[0, 1] * D[1]) - c.c_kg * (g[1, 0] * C[0] + g[1, 1] * C[1])
    F2 = c.c_kf * (f[1, 0] * D[0] + f[1, 1] * D[1]) + c.c_kg * (g[0, 0] * C[0] + g[0, 1] * C[1])
    return (E1, E2), (F1, F2)


def minimal_coupling_oracle(ops, couplings, env, params, B):
    """Substitute k -> k - e A into the canonical momenta, then Bopp-shift, then build the bare form."""
    a = params.charge_e * B / 2
    k_min = (ops.k[0] - a * ops.q[1], ops.k[1] + a * ops.q[0])
    x, p = bopp_shift(ops.q, k_min, params)
    return build_bare_interaction(x, p, couplings, env)


def test_couplings_reject_all_zero():
    with pytest.raises(ValueError):
        CouplingMatrices(np.zeros((2, 2)), np.zeros((2, 2)))


def test_couplings_reject_nonfinite():
    with pytest.raises(ValueError):
        CouplingMatrices(np.array([[np.nan, 0], [0, 1]]), np.zeros((2, 2)))


def test_field_scale_prefers_f():
    assert CouplingMatrices(5 * np.eye(2), 2 * np.eye(2)).field_scale == 2.0
    assert CouplingMatrices(5 * np.eye(2), np.zeros((2, 2))).field_scale == 5.0


def test_default_environment_layout():
    assert ENV.dim == 16
    assert np.allclose(ENV.initial_env_state, np.eye(16)[-1])
    assert np.allclose(ENV.h_env @ ENV.initial_env_state, -2.0 * ENV.initial_env_state)
    # C1 flips the first qubit only
    assert np.allclose(ENV.c_ops[0], np.kron(PAULI_X, np.eye(8)))


def test_env_rejects_linear_dependence():
    with pytest.raises(ValueError, match="linearly dependent"):
        EnvSpec(
            c_ops=(ENV.c_ops[0], ENV.c_ops[1]),
            d_ops=(ENV.c_ops[0], ENV.d_ops[1]),
            h_env=ENV.h_env,
            initial_env_state=ENV.initial_env_state,
        )


def test_env_rejects_unnormalized_state():
    with pytest.raises(ValueError):
        EnvSpec(ENV.c_ops, ENV.d_ops, ENV.h_env, 2 * ENV.initial_env_state)


def test_env_rejects_non_hermitian():
    bad = ENV.c_ops[0] * 1j
    with pytest.raises(ValueError):
        EnvSpec((bad, ENV.c_ops[1]), ENV.d_ops, ENV.h_env, ENV.initial_env_state)


def test_schedule_validation_and_lookup():
    with pytest.raises(ValueError):
        FieldSchedule(((1.0, 0.0),))
    with pytest.raises(ValueError):
        FieldSchedule(((0.0, 0.0), (2.0, 1.0), (2.0, 3.0)))
    s = FieldSchedule(((0.0, 0.0), (5.0, 40.0)))
    assert s.field_at(4.99) == 0.0 and s.field_at(5.0) == 40.0
    assert s.intervals(10.0) == [(0.0, 5.0, 0.0), (5.0, 10.0, 40.0)]
    assert s.intervals(3.0) == [(0.0, 3.0, 0.0)]


def test_coefficients_commutative_field_free():
    c = compute_effective_coefficients(NCParams(), 0.0)
    assert (c.c_qg, c.c_qf, c.c_kf, c.c_kg) == (1.0, 0.0, 1.0, 0.0)


def test_coefficients_vanish_at_reveal_field():
    assert compute_effective_coefficients(NCParams(theta=0.1), 4 / 0.1).c_qg == 0.0


def test_coefficients_hand_values():
    c = compute_effective_coefficients(NCParams(theta=0.1, sigma=0.01), 2.0)
    assert c.c_qg == pytest.approx(0.95, abs=1e-15)
    assert c.c_qf == pytest.approx(-0.995, abs=1e-15)
    assert c.c_kf == 1.0
    assert c.c_kg == pytest.approx(-0.05, abs=1e-15)


@given(
    theta=st.floats(-1, 1, **finite),
    sigma=st.floats(-1, 1, **finite),
    e=st.floats(-5, 5, **finite),
    B=st.floats(-1e3, 1e3, **finite),
)
def test_coefficients_match_recomputation(theta, sigma, e, B):
    c = compute_effective_coefficients(NCParams(theta, sigma, charge_e=e), B)
    assert c.c_qg == 1 - e * B * theta / 4
    assert c.c_qf == -(e * B / 2 - sigma / 2)
    assert c.c_kf == 1
    assert c.c_kg == -theta / 2


def test_bare_interaction_coordinate_form():
    gamma = 0.7
    cpl = CouplingMatrices(gamma * np.eye(2), np.zeros((2, 2)))
    h = build_bare_interaction(OPS.q, OPS.k, cpl, ENV)
    want = gamma * (np.kron(OPS.q[0], ENV.c_ops[0]) + np.kron(OPS.q[1], ENV.c_ops[1]))
    assert np.array_equal(h, want)


def test_bare_interaction_rejects_mismatch():
    other = build_canonical_ops(HilbertSpec(d_axis=5))
    with pytest.raises(DimensionError):
        build_bare_interaction(OPS.q, other.k, CouplingMatrices(np.eye(2), np.eye(2)), ENV)


@given(theta=st.floats(-0.5, 0.5), sigma=st.floats(-0.5, 0.5), cpl=couplings_strategy())
def test_bare_on_bopp_equals_term_by_term_expansion(theta, sigma, cpl):
    """Substituting the shift into g x C + f p D, expanded by hand in q and k."""
    (x1, x2), (p1, p2) = bopp_shift(OPS.q, OPS.k, NCParams(theta, sigma))
    got = build_bare_interaction((x1, x2), (p1, p2), cpl, ENV)
    q1, q2 = OPS.q
    k1, k2 = OPS.k
    xs = (q1 - theta / 2 * k2, q2 + theta / 2 * k1)
    ps = (k1 + sigma / 2 * q2, k2 - sigma / 2 * q1)
    want = sum(
        cpl.g[i, j] * np.kron(xs[i], ENV.c_ops[j]) + cpl.f[i, j] * np.kron(ps[i], ENV.d_ops[j])
        for i in range(2)
        for j in range(2)
    )
    assert np.max(np.abs(got - want)) < 1e-12


def test_effective_equals_bare_in_commutative_field_free_limit():
    cpl = CouplingMatrices(np.array([[1.0, 0.3], [-0.2, 0.5]]), np.array([[0.4, 0.0], [0.1, -1.0]]))
    eff = build_effective_interaction(OPS, cpl, ENV, NCParams(), 0.0)
    assert np.max(np.abs(eff.h_int_total - build_bare_interaction(OPS.q, OPS.k, cpl, ENV))) < 1e-15


@given(
    theta=st.floats(-0.5, 0.5),
    sigma=st.floats(-0.5, 0.5),
    e=st.floats(0.1, 3),
    B=st.floats(-100, 100),
    cpl=couplings_strategy(),
)
def test_effective_matches_minimal_coupling_path(theta, sigma, e, B, cpl):
    params = NCParams(theta, sigma, charge_e=e)
    eff = build_effective_interaction(OPS, cpl, ENV, params, B)
    oracle = minimal_coupling_oracle(OPS, cpl, ENV, params, B)
    scale = max(1.0, np.max(np.abs(oracle)))
    assert np.max(np.abs(eff.h_int_total - oracle)) < 1e-12 * scale


@given(theta=st.floats(-0.5, 0.5), sigma=st.floats(-0.5, 0.5), B=st.floats(-50, 50), cpl=couplings_strategy())
def test_env_operators_match_hand_expansion(theta, sigma, B, cpl):
    eff = build_effective_interaction(OPS, cpl, ENV, NCParams(theta, sigma), B)
    (E1, E2), (F1, F2) = hand_env_operators(eff.coefficients, cpl.g, cpl.f, ENV.c_ops, ENV.d_ops)
    for got, want in zip((*eff.e_ops, *eff.f_ops), (E1, E2, F1, F2)):
        assert np.max(np.abs(got - want)) < 1e-12


@given(theta=st.floats(-0.5, 0.5), sigma=st.floats(-0.5, 0.5), B=st.floats(-50, 50), cpl=couplings_strategy())
def test_effective_interaction_hermitian_and_reconstructs(theta, sigma, B, cpl):
    eff = build_effective_interaction(OPS, cpl, ENV, NCParams(theta, sigma), B)
    assert is_hermitian(eff.h_int_total, 1e-12)
    rebuilt = sum(np.kron(OPS.q[i], eff.e_ops[i]) + np.kron(OPS.k[i], eff.f_ops[i]) for i in range(2))
    assert np.max(np.abs(rebuilt - eff.h_int_total)) < 1e-12


@given(theta=st.floats(-0.5, 0.5), e=st.floats(0.1, 3), B=st.floats(-50, 50), cpl=couplings_strategy())
def test_env_operators_affine_in_field(theta, e, B, cpl):
    p = NCParams(theta, 0.0, charge_e=e)
    E0 = build_effective_interaction(OPS, cpl, ENV, p, 0.0).e_ops
    EB = build_effective_interaction(OPS, cpl, ENV, p, B).e_ops
    g, f, C, D = cpl.g, cpl.f, ENV.c_ops, ENV.d_ops
    eps = {(0, 1): 1.0, (1, 0): -1.0}
    for i in range(2):
        slope = sum(-(e / 4) * theta * g[i, j] * C[j] for j in range(2))
        slope = slope + sum(-(e / 2) * f[p_, q_] * eps.get((p_, i), 0.0) * D[q_] for p_ in range(2) for q_ in range(2))
        assert np.max(np.abs(EB[i] - E0[i] - B * slope)) < 1e-10 * max(1.0, abs(B))


def test_strong_field_position_part_grows_linearly():
    cpl = CouplingMatrices(np.zeros((2, 2)), np.eye(2))
    ratios = []
    for B in (200.0, 400.0, 800.0):
        eff = build_effective_interaction(OPS, cpl, ENV, NCParams(), B)
        q_part = np.linalg.norm(sum(np.kron(OPS.q[i], eff.e_ops[i]) for i in range(2)))
        k_part = np.linalg.norm(sum(np.kron(OPS.k[i], eff.f_ops[i]) for i in range(2)))
        ratios.append(q_part / k_part)
    assert ratios[1] / ratios[0] == pytest.approx(2.0, rel=1e-12)
    assert ratios[2] / ratios[1] == pytest.approx(2.0, rel=1e-12)
    assert ratios[0] > 10


def test_total_hamiltonian_without_system_or_environment_is_interaction():
    env0 = EnvSpec(ENV.c_ops, ENV.d_ops, np.zeros_like(ENV.h_env), ENV.initial_env_state)
    eff = build_effective_interaction(OPS, CouplingMatrices(np.eye(2), np.eye(2)), env0, NCParams(0.1, 0.1), 3.0)
    h = assemble_total_hamiltonian(np.zeros_like(OPS.q[0]), env0, eff)
    assert np.array_equal(h, eff.h_int_total)


@pytest.mark.parametrize("kind", SYSTEM_HAMILTONIANS)
def test_total_hamiltonian_trace_linearity(kind):
    eff = build_effective_interaction(OPS, CouplingMatrices(np.eye(2), np.eye(2)), ENV, NCParams(0.1, 0.05), 7.0)
    hs = system_hamiltonian(kind, OPS, 7.0)
    h = assemble_total_hamiltonian(hs, ENV, eff)
    want = np.trace(hs) * ENV.dim + np.trace(ENV.h_env) * OPS.dim + np.trace(eff.h_int_total)
    assert abs(np.trace(h) - want) < 1e-10
    assert is_hermitian(h, 1e-12)


def test_default_total_hamiltonian_size():
    spec = HilbertSpec()
    ops = build_canonical_ops(spec)
    env = default_environment(spec)
    eff = build_effective_interaction(ops, CouplingMatrices(np.eye(2), np.eye(2)), env, NCParams(0.01, 0.01), 1.0)
    h = assemble_total_hamiltonian(system_hamiltonian("harmonic", ops), env, eff)
    assert h.shape == (1024, 1024)
    assert is_hermitian(h, 1e-12)


def test_total_hamiltonian_rejects_mismatch():
    eff = build_effective_interaction(OPS, CouplingMatrices(np.eye(2), np.eye(2)), ENV, NCParams(), 0.0)
    with pytest.raises(DimensionError):
        assemble_total_hamiltonian(np.zeros((9, 9)), ENV, eff)


def test_unknown_system_hamiltonian():
    with pytest.raises(ValueError):
        system_hamiltonian("anharmonic", OPS)


def test_landau_toggle_reduces_to_trap_at_zero_field():
    assert np.allclose(system_hamiltonian("landau_toggle", OPS, 0.0), system_hamiltonian("harmonic", OPS))
