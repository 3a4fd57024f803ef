import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oxdistill.bell import (
    IDEAL,
    MAXIMALLY_MIXED,
    PAULIS,
    CorrelationTriple,
    DomainError,
    LocalRotation,
    NotBellDiagonalError,
    apply_local_rotation,
    bell_populations,
    canonicalize,
    check_density_matrix,
    degree_of_separability,
    fidelity,
    from_density_matrix,
    is_separable,
    make_binary,
    make_isotropic,
    make_werner,
    ppt_min_eigenvalue,
    raw_separability,
    separable_by_coefficients,
    to_density_matrix,
)

# Bell vectors in the A, B, C, D order used by bell_populations
_S = 1 / math.sqrt(2)
BELL = {
    "phi+": np.array([_S, 0, 0, _S]),
    "psi-": np.array([0, _S, -_S, 0]),
    "psi+": np.array([0, _S, _S, 0]),
    "phi-": np.array([_S, 0, 0, -_S]),
}


@st.composite
def triples(draw):
    w = np.array([draw(st.floats(0, 1)) for _ in range(4)]) + 1e-9
    w = w / w.sum()
    return CorrelationTriple(
        w[0] - w[1] + w[2] - w[3],
        -w[0] - w[1] + w[2] + w[3],
        w[0] - w[1] - w[2] + w[3],
    )


def bell_diagonal_in_basis(s):
    rho = to_density_matrix(s)
    return [float(np.real(v.conj() @ rho @ v)) for v in BELL.values()]


def test_convention_map():
    s = CorrelationTriple.from_target_frame(0.16, 0.08, 0.84)
    assert s.as_tuple() == (0.16, -0.08, 0.84)
    assert s.target == pytest.approx((0.16, 0.08, 0.84))
    m = CorrelationTriple.from_minus_form(0.3, 0.2, 0.1)
    assert m.as_tuple() == (-0.3, -0.2, -0.1)
    assert m.minus == pytest.approx((0.3, 0.2, 0.1))


def test_invalid_triples_rejected():
    with pytest.raises(DomainError):
        CorrelationTriple(1.2, 0, 0)
    with pytest.raises(DomainError):
        CorrelationTriple(1.0, 1.0, 1.0)  # Phi+ population -1/2


def test_werner_examples():
    w1 = make_werner(1.0)
    assert w1.abs_sum() == pytest.approx(3.0)
    assert not is_separable(w1)
    assert degree_of_separability(w1) == pytest.approx(0.0)
    w0 = make_werner(0.0)
    assert w0 == MAXIMALLY_MIXED
    assert fidelity(w0) == 0.25
    assert is_separable(make_werner(1 / 3))
    assert is_separable(make_werner(1 / 3), "ppt")
    assert degree_of_separability(make_isotropic((1 + 3 * 0.9) / 4)) == pytest.approx(0.15, abs=1e-12)
    with pytest.raises(DomainError):
        make_werner(-0.5)


def test_werner_is_singlet_centred():
    # t = 1 is the pure singlet, which is Psi- (population B)
    pops = bell_populations(make_werner(1.0))
    assert pops.B == pytest.approx(1.0)


def test_binary_examples():
    assert fidelity(make_binary(1.0)) == 1.0
    assert make_binary(1.0) == IDEAL
    assert degree_of_separability(make_binary(0.5)) == 1.0
    pops = bell_populations(make_binary(0.75))
    assert sorted(pops.as_tuple(), reverse=True) == pytest.approx([0.75, 0.25, 0, 0])
    assert (pops.A, pops.C) == pytest.approx((0.75, 0.25))
    with pytest.raises(DomainError):
        make_binary(0.0)


def test_fidelity_examples():
    s = CorrelationTriple.from_target_frame(0.84, 0.16, 0.08)
    assert fidelity(s) == pytest.approx(0.52, abs=1e-15)
    assert fidelity(IDEAL) == 1.0
    assert fidelity(MAXIMALLY_MIXED) == 0.25


def test_separability_examples():
    assert separable_by_coefficients(0.3, 0.3, 0.3)
    assert not separable_by_coefficients(0.5, 0.4, 0.2)
    assert is_separable(CorrelationTriple.from_minus_form(0.3, 0.3, 0.3))
    assert not is_separable(CorrelationTriple.from_minus_form(0.5, 0.4, 0.2))
    assert not is_separable(CorrelationTriple.from_minus_form(0.5, 0.4, 0.2), "ppt")


def test_negative_product_example_is_not_a_state():
    # the product test calls it separable, but one Bell population is -0.05
    assert separable_by_coefficients(0.5, 0.4, -0.3)
    with pytest.raises(DomainError):
        CorrelationTriple.from_minus_form(0.5, 0.4, -0.3)


def test_degree_of_separability_examples():
    s = CorrelationTriple.from_target_frame(0.84, 0.16, 0.08)
    assert degree_of_separability(s) == pytest.approx(0.96, abs=1e-15)
    assert 2 * fidelity(s) + degree_of_separability(s) == pytest.approx(2, abs=1e-12)
    assert degree_of_separability(IDEAL) == 0.0
    assert degree_of_separability(MAXIMALLY_MIXED) == 1.0
    assert raw_separability(MAXIMALLY_MIXED) == 1.5


def test_populations_golden():
    s = CorrelationTriple.from_target_frame(0.84, 0.16, 0.08)
    pops = bell_populations(s)
    assert pops.as_tuple() == pytest.approx((0.52, 0.06, 0.4, 0.02), abs=1e-15)
    assert pops.as_tuple() == pytest.approx(bell_diagonal_in_basis(s), abs=1e-12)
    assert bell_populations(IDEAL).as_tuple() == pytest.approx((1, 0, 0, 0))


def test_density_matrix_examples():
    assert np.allclose(to_density_matrix(MAXIMALLY_MIXED), np.eye(4) / 4)
    rho = to_density_matrix(IDEAL)
    assert np.trace(rho @ rho).real == pytest.approx(1.0)
    assert np.allclose(rho, np.outer(BELL["phi+"], BELL["phi+"]))
    assert from_density_matrix(np.eye(4) / 4) == MAXIMALLY_MIXED


def test_not_bell_diagonal():
    rho = np.eye(4, dtype=complex) / 4 + 0.1 * np.kron(PAULIS[1], PAULIS[2])
    with pytest.raises(NotBellDiagonalError):
        from_density_matrix(rho)


def test_check_density_matrix_rejects():
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(4), 4)
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5, 0, 0]), 4)
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(2) / 2, 4)


def test_round_trip_many():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        w = rng.dirichlet(np.ones(4))
        s = CorrelationTriple(w[0] - w[1] + w[2] - w[3], -w[0] - w[1] + w[2] + w[3],
                              w[0] - w[1] - w[2] + w[3])
        rho = check_density_matrix(to_density_matrix(s), 4)
        back = from_density_matrix(rho)
        worst = max(worst, float(np.max(np.abs(back.as_array() - s.as_array()))))
    assert worst <= 1e-12


@settings(max_examples=300, deadline=None)
@given(triples())
def test_populations_match_bell_basis(s):
    pops = bell_populations(s)
    assert sum(pops.as_tuple()) == pytest.approx(1.0, abs=1e-12)
    assert pops.A == pytest.approx(fidelity(s), abs=1e-12)
    assert pops.as_tuple() == pytest.approx(bell_diagonal_in_basis(s), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(triples())
def test_ppt_agrees_with_coefficients(s):
    assert is_separable(s, "coefficients") == is_separable(s, "ppt")
    assert ppt_min_eigenvalue(s) >= -1e-10 or not is_separable(s)


@pytest.mark.parametrize("r", list(LocalRotation))
def test_rotation_map_matches_unitary(r):
    rng = np.random.default_rng(3)
    u = r.unitary()
    assert np.allclose(u @ u.conj().T, np.eye(4))
    for _ in range(20):
        w = rng.dirichlet(np.ones(4))
        s = CorrelationTriple(w[0] - w[1] + w[2] - w[3], -w[0] - w[1] + w[2] + w[3],
                              w[0] - w[1] - w[2] + w[3])
        direct = from_density_matrix(u @ to_density_matrix(s) @ u.conj().T)
        assert np.allclose(direct.as_array(), apply_local_rotation(s, r).as_array(), atol=1e-12)
        assert sorted(bell_populations(direct).as_tuple()) == pytest.approx(
            sorted(bell_populations(s).as_tuple()), abs=1e-12)
        assert is_separable(direct) == is_separable(s)


def test_rotation_examples():
    s = CorrelationTriple(0.1, -0.2, 0.3)
    assert apply_local_rotation(s, LocalRotation.U1Z).as_tuple() == (-0.1, 0.2, 0.3)
    t = CorrelationTriple.from_target_frame(0.7, 0.2, 0.1)
    assert apply_local_rotation(t, LocalRotation.U12X).target == pytest.approx((0.7, 0.1, 0.2))


def test_rotations_fix_target_for_bilateral():
    for r in (LocalRotation.U12X, LocalRotation.U12Y, LocalRotation.U12Z):
        assert apply_local_rotation(IDEAL, r) == IDEAL


def test_canonicalize_reference_start():
    s = CorrelationTriple.from_target_frame(0.16, 0.08, 0.84)
    c, witness = canonicalize(s)
    assert c.target == pytest.approx((0.84, 0.16, 0.08))
    cur = s
    for r in witness:
        cur = apply_local_rotation(cur, r)
    assert cur == c
    assert canonicalize(c) == (c, [])


def test_canonicalize_separable_negative():
    s = CorrelationTriple.from_minus_form(0.2, -0.5, 0.1)
    c, _ = canonicalize(s)
    assert [abs(v) for v in c.target] == pytest.approx([0.5, 0.2, 0.1])
    assert is_separable(c) == is_separable(s) is True


@settings(max_examples=500, deadline=None)
@given(triples())
def test_canonicalize_properties(s):
    c, witness = canonicalize(s)
    cur = s
    for r in witness:
        cur = apply_local_rotation(cur, r)
    assert cur == c
    m = [abs(v) for v in c.target]
    assert m[0] >= m[1] >= m[2]
    assert c.target[0] >= 0 and c.target[1] >= 0
    again, w2 = canonicalize(c)
    assert again == c and w2 == []
    if not is_separable(s):
        assert c.target[2] > 0
        assert 2 * fidelity(c) + degree_of_separability(c) == pytest.approx(2, abs=1e-12)
