import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kirchhoffkit.errors import PreconditionError
from kirchhoffkit.frobenius import REDUCED, FrobeniusSystem, first_order_system, perturbation_first_order, unperturbed_residue
from kirchhoffkit.liepoisson import E3, field_jacobian
from kirchhoffkit.monodromy import affine_monodromy, eigen_defect, exp_oracle, linear_monodromy
from kirchhoffkit.series import LogLaurentSeries as S

ALPHA, BETA = 0.6, 0.8


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def random_A(rng, n=5, bound=3.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A * bound / np.max(np.abs(np.linalg.eigvals(A)))


def test_diagonal_integer_exponents():
    rep = linear_monodromy(np.diag([1.0, -1.0]))
    assert np.allclose(rep.matrix, np.eye(2), atol=1e-9)
    assert rep.semisimple and not rep.log_detected


def test_jordan_block():
    rep = linear_monodromy([[0, 1], [0, 0]])
    assert np.allclose(rep.matrix, [[1, 2j * math.pi], [0, 1]], atol=1e-9)
    assert rep.unipotent_defect == 1
    assert rep.log_detected


def test_oracle_jordan_block():
    assert np.allclose(exp_oracle([[0, 1], [0, 0]]), [[1, 2j * math.pi], [0, 1]])


def test_eigen_defect_of_identity():
    _, d = eigen_defect(np.eye(4, dtype=complex))
    assert d == 0


def test_random_systems_match_oracle():
    rng = np.random.default_rng(2)
    for _ in range(5):
        A = random_A(rng)
        rep = linear_monodromy(A)
        assert rel(rep.matrix, exp_oracle(A)) <= 1e-6


def test_radius_independence():
    A = random_A(np.random.default_rng(3))
    mats = [linear_monodromy(A, r).matrix for r in (0.5, 1.0, 2.0)]
    assert rel(mats[0], mats[1]) <= 1e-6
    assert rel(mats[2], mats[1]) <= 1e-6


def test_two_turns_is_square():
    A = random_A(np.random.default_rng(4), bound=1.5)
    once = linear_monodromy(A).matrix
    twice = linear_monodromy(A, turns=2).matrix
    assert rel(twice, once @ once) <= 1e-6


def test_kirchhoff_variational_monodromy_is_identity(kirchhoff):
    x0 = unperturbed_residue(1, 1, 3, ALPHA, BETA)
    J = field_jacobian(kirchhoff.K, E3, x0)
    for A in (J, J[np.ix_(REDUCED, REDUCED)]):
        rep = linear_monodromy(A)
        assert np.max(np.abs(rep.matrix - np.eye(len(A)))) <= 1e-7
        assert not rep.log_detected


def test_radius_must_be_positive():
    with pytest.raises(PreconditionError):
        linear_monodromy(np.eye(2), radius=0.0)


def test_zero_forcing_zero_shift():
    A = np.diag([1.0, -1.0, 2.0])
    rep = affine_monodromy(FrobeniusSystem(A))
    assert np.max(np.abs(rep.particular_shift)) <= 1e-12
    assert not rep.shift_in_log_direction


def test_scalar_resonant_shift():
    # xi = t ln t jumps by 2 pi i t
    rep = affine_monodromy(FrobeniusSystem([[1]], (S.monomial(1, 0),)), radius=2.0)
    assert rep.particular_shift[0] == pytest.approx(4j * math.pi, rel=1e-8)
    assert rep.shift_in_log_direction


@pytest.mark.parametrize("which", ["kirchhoff", "chaplygin"])
def test_perturbation_shift(which, kirchhoff, chaplygin):
    model = kirchhoff if which == "kirchhoff" else chaplygin
    _, _, sysm, basis = first_order_system(model, which, ALPHA, BETA)
    ln4 = perturbation_first_order(model, which, ALPHA, BETA).ln_coefficient(4)
    rep = affine_monodromy(sysm, 1.0, 1e-12, basis)
    assert rep.shift_in_log_direction
    assert abs(abs(rep.k_shift[3]) - 2 * math.pi * abs(ln4)) <= 1e-5 * 2 * math.pi * abs(ln4)
    assert abs(rep.k_shift[3] - 2j * math.pi * ln4) <= 1e-6
    others = np.delete(rep.k_shift, 3)
    assert np.max(np.abs(others)) <= 1e-6
    assert np.max(np.abs(rep.homogeneous.matrix - np.eye(5))) <= 1e-7


def test_kirchhoff_shift_is_pi_times_k4_direction(kirchhoff):
    _, _, sysm, basis = first_order_system(kirchhoff, "kirchhoff", ALPHA, BETA)
    rep = affine_monodromy(sysm, 1.0, 1e-12, basis)
    assert np.max(np.abs(rep.particular_shift - math.pi * basis[3][1])) <= 1e-6


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_integer_diagonal_gives_identity(ks):
    rep = linear_monodromy(np.diag(np.array(ks, dtype=float)))
    assert np.max(np.abs(rep.matrix - np.eye(3))) <= 1e-7
