import numpy as np
import pytest

from conftest import E4_PARAMS, random_complex
from kirchhoffkit.dim4 import (
    DEFAULT_BINDING,
    IntegralSet4,
    binding_table,
    casimirs_e4,
    chaplygin4_invariant_check,
    integral_drift,
    integrals4,
    invariant_relation_brackets,
    involution_matrix,
    mixed_term_rates,
    mixed_term_witness,
    submanifold_states,
)
from kirchhoffkit.errors import PreconditionError
from kirchhoffkit.liepoisson import COORDS, E4, PhaseState, bracket, build_model, coordinate


def state(**entries):
    x = np.zeros(10, dtype=complex)
    for k, v in entries.items():
        x[COORDS[E4].index(k)] = v
    return x


def test_integrals_single_entry(kirchhoff4):
    vals = integrals4(state(M12=1, p1=1), kirchhoff4)
    assert vals["F1"] == 1 and vals["F2"] == 0 and vals["F3"] == 1
    assert vals["F4"] == 0 and vals["F5"] == 0


def test_integrals_zero_state(kirchhoff4):
    assert all(v == 0 for v in integrals4(np.zeros(10), kirchhoff4).values())


def test_integrals_pure_translation(kirchhoff4):
    vals = integrals4(state(p1=1, p2=1, p3=1, p4=1), kirchhoff4)
    assert vals["F1"] == 4 and vals["F2"] == 0


def test_f5_by_hand(kirchhoff4):
    x = random_complex(np.random.default_rng(1), 10)
    g = dict(zip(COORDS[E4], x))
    M12, M13, M14, M23, M24, M34 = (g[k] for k in COORDS[E4][:6])
    p1, p2, p3, p4 = (g[f"p{i}"] for i in range(1, 5))
    a1, c1, c3 = E4_PARAMS["A1313"], E4_PARAMS["C11"], E4_PARAMS["C33"]
    F5 = (a1 * (M12 * M34 + M14 * M23 - M13 * M24) ** 2
          - c1 * ((M13 * p4 - M14 * p3 + M34 * p1) ** 2 + (M23 * p4 + M34 * p2 - M24 * p3) ** 2)
          - c3 * ((M23 * p1 + M12 * p3 - M13 * p2) ** 2 + (M24 * p1 - M14 * p2 + M12 * p4) ** 2))
    assert integrals4(x, kirchhoff4)["F5"] == pytest.approx(F5, abs=1e-12)


def test_integral_set_requires_e4(kirchhoff):
    with pytest.raises(PreconditionError):
        IntegralSet4.of(kirchhoff)


def test_integral_gradients_match_finite_differences(kirchhoff4):
    rng = np.random.default_rng(2)
    h = 1e-7
    for obs in IntegralSet4.of(kirchhoff4).observables():
        x = random_complex(rng, 10)
        g = obs.gradient(x)
        fd = np.array([(obs(x + h * e) - obs(x - h * e)) / (2 * h) for e in np.eye(10)])
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.max(np.abs(g))))


def test_casimirs_commute_with_coordinates():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = random_complex(rng, 10)
        for F in casimirs_e4():
            for name in COORDS[E4]:
                assert abs(bracket(F, coordinate(E4, name), x)) <= 1e-10


@pytest.mark.parametrize("A1234", [0.0, 0.4, -1.3 + 0.5j])
def test_involution(A1234):
    m = build_model("kirchhoff_e4", **{**E4_PARAMS, "A1234": A1234})
    rep = involution_matrix(m, 1000, seed=42)
    assert rep.passes
    assert rep.binding == DEFAULT_BINDING
    assert rep.names == ("H", "F1", "F2", "F3", "F4", "F5")
    assert np.max(rep.matrix) <= rep.tolerance
    assert np.array_equal(rep.matrix, rep.matrix.T)


def test_m12_m34_bracket_identically_zero(kirchhoff4):
    rep = involution_matrix(kirchhoff4, 100)
    assert rep.matrix[3, 4] == 0


def test_binding_table_single_winner(kirchhoff4):
    table = binding_table(kirchhoff4, 100)
    assert len(table) == 6
    winners = [row["binding"] for row in table if row["passes"]]
    assert winners == [DEFAULT_BINDING]


def test_binding_search_recovers(kirchhoff4):
    wrong = {"a1": "C11", "c1": "A1313", "c3": "C33"}
    rep = involution_matrix(kirchhoff4, 100, binding=wrong)
    assert rep.passes and rep.binding == DEFAULT_BINDING
    first = rep.binding_search[0]
    assert first["binding"] == wrong and not first["passes"]
    assert not involution_matrix(kirchhoff4, 100, binding=wrong, search=False).passes


def test_involution_needs_enough_points(kirchhoff4):
    with pytest.raises(PreconditionError):
        involution_matrix(kirchhoff4, 10)


def test_integrals_conserved_along_flow(kirchhoff4):
    x0 = random_complex(np.random.default_rng(4), 10, 0.5)
    drift = integral_drift(kirchhoff4, x0, 1.0, 1e-10)
    assert set(drift) == {"H", "F1", "F2", "F3", "F4", "F5"}
    assert max(drift.values()) <= 1e-8


def test_mixed_term_rate_by_hand():
    # {M12, p1} = p2, so B121 M12 p1 moves M12 at rate B121 M12 p2
    rates = mixed_term_rates({"B121": 1.0}, state(M12=1, p2=1))
    assert rates["M12"] == pytest.approx(1)


@pytest.mark.parametrize("name", ["B121", "B123", "B341", "B343", "B122", "B344"])
def test_witness_found(name):
    w = mixed_term_witness({name: 1.0})
    assert w.found
    assert max(abs(v) for v in w.rates.values()) >= 1e-6


def test_witness_for_b343_moves_m34():
    w = mixed_term_witness({"B343": 1.0})
    assert abs(w.rates["M34"]) > 1e-6


def test_witness_requires_nonzero_b():
    with pytest.raises(PreconditionError):
        mixed_term_witness({"B121": 0.0})
    with pytest.raises(PreconditionError):
        mixed_term_witness({"A1212": 1.0})


def test_chaplygin_without_extras_matches_kirchhoff_hamiltonian(kirchhoff4):
    m = build_model("chaplygin_e4", **E4_PARAMS)
    x = random_complex(np.random.default_rng(5), 10)
    assert m.hamiltonian()(x) == kirchhoff4.hamiltonian()(x)


def test_chaplygin_zero_state_zero_drift(chaplygin4):
    rep = chaplygin4_invariant_check(chaplygin4, starts=[np.zeros(10)], n_points=100)
    assert rep.max_drift == 0


def test_chaplygin_invariant_relations(chaplygin4):
    rep = chaplygin4_invariant_check(chaplygin4, 1e-10, n_starts=10, seed=42)
    assert rep.passes
    assert len(rep.drifts) == 10
    assert rep.max_drift <= 1e-8
    assert rep.max_bracket <= 1e-10


def test_chaplygin_brackets_vanish_on_submanifold(chaplygin4):
    for x in submanifold_states(100, seed=9):
        assert all(abs(v) <= 1e-10 for v in invariant_relation_brackets(chaplygin4, x).values())


def test_invariant_relation_is_not_a_first_integral(chaplygin4):
    x = submanifold_states(1, seed=10)[0]
    x[0] = 0.5
    rates = invariant_relation_brackets(chaplygin4, PhaseState.from_vector(E4, x))
    assert abs(rates["M12"]) > 1e-6


def test_start_off_submanifold_rejected(chaplygin4):
    with pytest.raises(PreconditionError):
        chaplygin4_invariant_check(chaplygin4, starts=[state(M12=0.5)], n_points=100)
