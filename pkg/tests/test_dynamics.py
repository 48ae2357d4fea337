import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from nmflow import jc, sbm
from nmflow.dynamics import (
    IDENTITY, PAULI, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, IntegratorConfig, TimeLocalGenerator,
    bloch_rhs, dissipator_bloch, field_matrix, integrate,
)
from nmflow.errors import DomainError, IntegrationError, SingularRateError


def rho_of(B):
    return 0.5 * (IDENTITY + sum(b * s for b, s in zip(B, PAULI)))


def liouville_rhs(gen, t, rho):
    """Master equation evaluated directly on the density matrix."""
    h = gen.field_at(t)
    H = 0.5 * sum(x * s for x, s in zip(h, PAULI))
    out = -1j * (H @ rho - rho @ H)
    for rate, A in gen.dissipators:
        A = A(t) if callable(A) else A
        Ad = A.conj().T
        out += rate(t) * (A @ rho @ Ad - 0.5 * (Ad @ A @ rho + rho @ Ad @ A))
    return out


def bloch_of(rho):
    return np.array([np.trace(s @ rho).real for s in PAULI])


def test_sigma_minus_lowers():
    e, g = np.array([1, 0]), np.array([0, 1])
    assert np.allclose(SIGMA_MINUS @ e, g) and np.allclose(SIGMA_PLUS @ g, e)
    assert np.allclose(SIGMA_Z @ e, e)


def test_amplitude_damping_bloch_form():
    M, b = dissipator_bloch(SIGMA_MINUS)
    assert np.allclose(M, np.diag([-0.5, -0.5, -1.0]))
    assert np.allclose(b, [0, 0, -1])
    M, b = dissipator_bloch(SIGMA_PLUS)
    assert np.allclose(b, [0, 0, 1])


def test_dissipator_rejects_bad_shape():
    with pytest.raises(DomainError):
        dissipator_bloch(np.eye(3))


@settings(max_examples=40, deadline=None)
@given(h=st.lists(st.floats(-3, 3), min_size=3, max_size=3),
       rates=st.lists(st.floats(0, 2), min_size=3, max_size=3),
       B=st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3))
def test_bloch_rhs_matches_density_matrix(h, rates, B):
    ops = [SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z]
    gen = TimeLocalGenerator(field=tuple(h), dissipators=[(lambda t, g=g: g, A) for g, A in zip(rates, ops)])
    ref = bloch_of(liouville_rhs(gen, 0.0, rho_of(B)))
    assert np.allclose(bloch_rhs(gen, 0.0, B), ref, atol=1e-13)


def test_time_dependent_operator_is_supported():
    gen = TimeLocalGenerator(dissipators=[(lambda t: 1.0, lambda t: np.cos(t) * SIGMA_MINUS)])
    B = np.array([0.1, 0.2, 0.3])
    assert np.allclose(bloch_rhs(gen, 0.4, B), bloch_of(liouville_rhs(gen, 0.4, rho_of(B))))


def test_precession():
    w0 = 1.3
    gen = TimeLocalGenerator(field=(0, 0, w0))
    B = np.array([0.3, -0.2, 0.5])
    assert np.allclose(bloch_rhs(gen, 0.0, B), w0 * np.array([-B[1], B[0], 0]))
    assert np.allclose(field_matrix((0, 0, w0)) @ B, np.cross([0, 0, w0], B))


def test_jc_ground_state_is_stationary():
    gen = jc.jc_generator(jc.JcParams(1.0, 0.2, 1.0))
    assert bloch_rhs(gen, 1.7, [0, 0, -1])[2] == 0.0


def test_sbm_drift_at_origin():
    p = sbm.SbmParams(1.0, sbm.OhmicFamily(0.02, 1.0, 10.0), 0.5)
    ints = sbm.sbm_integrals(p, sbm.uniform_grid(2.0, 1e-2))
    i = 123
    assert np.allclose(bloch_rhs(sbm.sbm_generator(ints), ints.t[i], np.zeros(3)),
                       [0, 0, ints.gamma_d[i]], atol=1e-15)


def test_zero_generator_keeps_state():
    B0 = np.array([0.1, 0.2, -0.3])
    tr = integrate(TimeLocalGenerator(), B0, np.linspace(0, 5, 11))
    assert np.all(tr.B == B0)
    assert np.all(tr.I_E == 0) and np.all(tr.I_Q == 0)


def test_constant_generator_matches_matrix_exponential():
    gen = TimeLocalGenerator(field=(0.2, 0.0, 1.0),
                             dissipators=[(lambda t: 0.3, SIGMA_MINUS), (lambda t: 0.1, SIGMA_PLUS)])
    M, b = gen.coefficients(0.0)
    A = np.zeros((4, 4))
    A[:3, :3], A[:3, 3] = M, b
    t = np.linspace(0, 10, 41)
    B0 = np.array([1.0, 0, 0])
    tr = integrate(gen, B0, t)
    ref = np.array([(expm(A * s) @ np.append(B0, 1))[:3] for s in t])
    assert np.max(np.abs(tr.B - ref)) < 1e-9


def test_energy_current_uses_field():
    gen = TimeLocalGenerator(field=(0, 0, 2.0), dissipators=[(lambda t: 0.5, SIGMA_MINUS)])
    tr = integrate(gen, [0, 0, 1.0], np.linspace(0, 3, 31))
    assert np.allclose(tr.I_E, 0.5 * 2.0 * (-0.5) * (tr.B[:, 2] + 1), atol=1e-9)
    assert tr.omega0 == 2.0


def test_nonuniform_grid_uses_exact_flow():
    gen = TimeLocalGenerator(dissipators=[(lambda t: 0.5, SIGMA_MINUS)])
    t = np.array([0.0, 0.1, 0.5, 2.0])
    tr = integrate(gen, [1.0, 0, 0], t)
    dB = np.array([bloch_rhs(gen, s, b) for s, b in zip(t, tr.B)])
    assert np.allclose(tr.I_Q, 2 * np.sum(tr.B * dB, axis=1))


def test_jc_weak_coherence():
    p = jc.JcParams(1.0, 0.2, 1.0)
    t = np.linspace(0, 20, 201)
    tr = integrate(jc.jc_generator(p), [1.0, 0, 0], t)
    assert np.max(np.abs(tr.B[:, 0] - jc.g_closed_form(p, t).G)) < 1e-6


def test_jc_strong_reports_singularity():
    p = jc.JcParams(1.0, 5.0, 1.0)
    with pytest.raises(IntegrationError) as info:
        integrate(jc.jc_generator(p), [1.0, 0, 0], np.linspace(0, 3, 31))
    assert info.value.t_fail == pytest.approx(jc.g_zeros(p, 3.0)[0], abs=1e-3)


@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
def test_non_finite_rate_is_reported():
    gen = TimeLocalGenerator(dissipators=[(lambda t: np.inf if t > 0.5 else 0.1, SIGMA_MINUS)])
    with pytest.raises(IntegrationError) as info:
        integrate(gen, [0, 0, 1.0], np.linspace(0, 1, 11))
    assert info.value.t_fail > 0.5


def test_singular_rate_error_is_wrapped():
    def rate(t):
        if t > 0.5:
            raise SingularRateError(t, 0.0)
        return 0.1
    with pytest.raises(IntegrationError) as info:
        integrate(TimeLocalGenerator(dissipators=[(rate, SIGMA_MINUS)]), [0, 0, 1.0], [0, 1.0])
    assert isinstance(info.value.__cause__, SingularRateError)


def test_sbm_oracle_matches_analytic(ohmic_ints):
    k = 10
    tr = integrate(sbm.sbm_generator(ohmic_ints), [0, 0, 1.0], ohmic_ints.t[::k])
    assert np.max(np.abs(tr.B - sbm.sbm_bloch(ohmic_ints, 0.0)[::k])) < 1e-6


def test_validation():
    gen = TimeLocalGenerator()
    with pytest.raises(DomainError):
        integrate(gen, [1.0, 1.0, 0], [0, 1])
    with pytest.raises(DomainError):
        integrate(gen, [0, 0, 1.0], [0, 0])
    with pytest.raises(DomainError):
        IntegratorConfig(rtol=0)
