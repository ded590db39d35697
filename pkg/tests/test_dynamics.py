import math

import numpy as np
import pytest

from conftest import random_complex
from kirchhoffkit.dim4 import casimirs_e4
from kirchhoffkit.dynamics import Arc, Line, TimePath, drift_report, integrate
from kirchhoffkit.errors import PreconditionError, StepCollapse
from kirchhoffkit.frobenius import unperturbed_residue
from kirchhoffkit.liepoisson import E3, PhaseState, build_model, casimirs_e3, invariants_of


def laurent_residue():
    # alpha = 1, beta = 0, a1 = 1, c3 - c1 = 2
    return np.array([1j, 0, 0, 0, -1j / math.sqrt(2), 1 / math.sqrt(2)])


# -- paths ----------------------------------------------------------------------


def test_circle_is_closed_and_has_circumference():
    path = TimePath.circle(2.0)
    assert abs(path.end - path.start) < 1e-14
    assert path.length == pytest.approx(4 * math.pi)


def test_non_contiguous_path_rejected():
    with pytest.raises(PreconditionError):
        TimePath((Line(0, 1), Line(2, 3)))


def test_arc_orientation_checked():
    with pytest.raises(PreconditionError):
        Arc(0, 1.0, 0.0, 1.0, -1)


def test_reversed_path_endpoints():
    path = TimePath((Line(1, 1j), Arc(0, 1.0, math.pi / 2, math.pi, 1)))
    back = path.reversed()
    assert back.start == pytest.approx(path.end)
    assert back.end == pytest.approx(path.start)


# -- integrate ------------------------------------------------------------------


def test_zero_state_stays_zero(kirchhoff, chaplygin4):
    for m in (kirchhoff, chaplygin4):
        traj = integrate(m, np.zeros(m.dim), TimePath.line(0, 1 + 1j), 1e-10)
        assert np.all(traj.xs == 0)


def test_relative_equilibrium_is_constant(kirchhoff):
    x0 = PhaseState(E3, (0, 0, 1), (0, 0, 1))
    traj = integrate(kirchhoff, x0, TimePath.line(0, 10), 1e-10)
    assert np.max(np.abs(traj.xs - x0.vector)) == 0


def test_laurent_solution_reproduced(kirchhoff):
    x0 = laurent_residue()
    assert np.allclose(unperturbed_residue(1, 1, 3, 1, 0), x0)
    tol = 1e-10
    traj = integrate(kirchhoff, x0, TimePath.line(1, 2), tol)
    exact = x0[None, :] / traj.ts[:, None]
    assert np.max(np.abs(traj.xs - exact)) <= 10 * tol


def test_order_of_endpoint_error(kirchhoff):
    # error per step is controlled, so the endpoint error is proportional to tol
    x0 = laurent_residue()
    tols = [1e-6 / 2**k for k in range(5)]
    errs = []
    for tol in tols:
        traj = integrate(kirchhoff, x0, TimePath.line(1, 2), tol)
        errs.append(np.max(np.abs(traj.final - x0 / 2)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    design = 2.0
    assert np.all(ratios >= design / 4)
    assert np.all(ratios <= design * 4)


@pytest.mark.parametrize("tol", [1e-8, 1e-10])
def test_path_reversal(chaplygin, tol):
    rng = np.random.default_rng(21)
    x0 = random_complex(rng, 6, 0.5)
    path = TimePath((Line(0, 0.5), Arc(0.5 + 0.5j, 0.5, -math.pi / 2, 0.0, 1)))
    there = integrate(chaplygin, x0, path, tol)
    back = integrate(chaplygin, there.final, path.reversed(), tol)
    assert np.max(np.abs(back.final - x0)) <= 100 * tol


def test_deterministic(chaplygin):
    x0 = random_complex(np.random.default_rng(3), 6, 0.5)
    a = integrate(chaplygin, x0, TimePath.line(0, 1), 1e-10)
    b = integrate(chaplygin, x0, TimePath.line(0, 1), 1e-10)
    assert np.array_equal(a.xs, b.xs) and a.steps == b.steps


def test_samples_lie_on_path(kirchhoff):
    traj = integrate(kirchhoff, laurent_residue(), TimePath.line(1, 1 + 1j), 1e-10, sample_ds=0.1)
    assert np.allclose(traj.ts.real, 1.0)
    assert np.all(np.diff(traj.ts.imag) > 0)
    assert len(traj) == 11


def test_tol_out_of_range(kirchhoff):
    for tol in (1e-15, 1e-2):
        with pytest.raises(PreconditionError):
            integrate(kirchhoff, np.zeros(6), TimePath.line(0, 1), tol)


def test_step_collapse_at_pole(kirchhoff):
    with pytest.raises(StepCollapse):
        integrate(kirchhoff, laurent_residue() / -1, TimePath.line(-1, 1), 1e-10)


def test_extended_precision_agrees(kirchhoff):
    x0 = laurent_residue()
    traj = integrate(kirchhoff, x0, TimePath.line(1, 1.5), 1e-12, extended=True)
    assert traj.extended
    assert np.max(np.abs(traj.final - x0 / 1.5)) <= 1e-11


def test_csv_layout(kirchhoff):
    traj = integrate(kirchhoff, laurent_residue(), TimePath.line(1, 2), 1e-8)
    lines = traj.to_csv().splitlines()
    assert lines[0].split(",")[:4] == ["t_re", "t_im", "M1_re", "M1_im"]
    assert len(lines[0].split(",")) == 14
    assert len(lines) == len(traj) + 1
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == 1.0 and first[3] == 1.0


# -- drift ----------------------------------------------------------------------


def test_constant_trajectory_has_zero_drift(kirchhoff):
    traj = integrate(kirchhoff, PhaseState(E3, (0, 0, 1), (0, 0, 1)), TimePath.line(0, 1), 1e-10)
    rep = drift_report(traj, invariants_of(kirchhoff))
    assert all(d.absolute == 0 and d.conserved for d in rep.values())


def test_kirchhoff_integrals_conserved(kirchhoff_b):
    x0 = random_complex(np.random.default_rng(11), 6, 0.5)
    traj = integrate(kirchhoff_b, x0, TimePath.line(0, 1), 1e-10)
    rep = drift_report(traj, invariants_of(kirchhoff_b))
    assert set(rep) == {"H", "<M,p>", "<p,p>", "M3"}
    assert all(d.relative <= 1e-8 for d in rep.values())


def test_chaplygin_invariant_relation_preserved(chaplygin):
    x0 = random_complex(np.random.default_rng(12), 6, 0.5)
    x0[2] = 0
    traj = integrate(chaplygin, x0, TimePath.line(0, 1), 1e-10)
    assert np.max(np.abs(traj.xs[:, 2])) <= 1e-8


def test_chaplygin_m3_not_conserved_off_manifold(chaplygin):
    x0 = random_complex(np.random.default_rng(12), 6, 0.5)
    x0[2] = 0.3
    traj = integrate(chaplygin, x0, TimePath.line(0, 1), 1e-10)
    assert np.max(np.abs(traj.xs[:, 2] - 0.3)) > 1e-4


def test_casimirs_conserved_for_generic_models():
    rng = np.random.default_rng(13)
    for _ in range(3):
        X = [rng.standard_normal((3, 3)) for _ in range(3)]
        A, B, C = (x + x.T for x in X)
        m = build_model("generic_e3", A=A, B=B, C=C)
        traj = integrate(m, random_complex(rng, 6, 0.3), TimePath.line(0, 0.5), 1e-10)
        rep = drift_report(traj, casimirs_e3())
        assert all(d.conserved for d in rep.values())


def test_e4_casimirs_conserved(chaplygin4):
    traj = integrate(chaplygin4, random_complex(np.random.default_rng(14), 10, 0.4), TimePath.line(0, 1), 1e-10)
    rep = drift_report(traj, casimirs_e4())
    assert all(d.conserved for d in rep.values())


def test_drift_threshold_defaults_to_100_tol(kirchhoff):
    traj = integrate(kirchhoff, PhaseState(E3, (0, 0, 1), (0, 0, 1)), TimePath.line(0, 1), 1e-6)
    H = invariants_of(kirchhoff)[0]
    assert drift_report(traj, [H])["H"].conserved
