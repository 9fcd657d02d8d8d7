import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import slantlab as sl
from slantlab.errors import ContractError, UsageError, XiDirectionError
from slantlab.slant import (
    CLASS_ANTI_INVARIANT,
    CLASS_INVARIANT,
    CLASS_NON_SLANT,
    CLASS_PROPER_SLANT,
    d_eigenvectors,
)

from conftest import THETA0, interior_points

ORIGIN3 = np.zeros(3)


def test_slant_angle_invariant_zero(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], ORIGIN3)
    assert sl.slant_angle(split, frame, frame.tangent_basis[:, 0]) == pytest.approx(
        0.0, abs=1e-9
    )


def test_slant_angle_anti_invariant_right_angle(catalog, frames_at):
    frame, split = frames_at(catalog["anti"], ORIGIN3)
    assert sl.slant_angle(split, frame, frame.tangent_basis[:, 0]) == math.pi / 2


def test_slant_angle_candidate_theta(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    angle = sl.slant_angle(split, frame, frame.tangent_basis[:, 0])
    assert angle == pytest.approx(THETA0, abs=1e-6)


def test_slant_angle_xi_direction_error(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    with pytest.raises(XiDirectionError):
        sl.slant_angle(split, frame, frame.xi_chart)


def test_slant_angle_non_tangent_rejected(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    with pytest.raises(UsageError):
        sl.slant_angle(split, frame, np.array([0.0, 1.0, 0.0, 0.0, 0.0]))


@given(a=st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=30, deadline=None)
def test_slant_angle_scale_invariant(catalog, frames_at, a):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    x = frame.tangent_basis[:, 0] + 0.3 * frame.tangent_basis[:, 1]
    t1 = sl.slant_angle(split, frame, x)
    t2 = sl.slant_angle(split, frame, a * x)
    assert abs(t1 - t2) < 1e-10


def test_angle_bounded_by_cauchy_schwarz(catalog, frames_at):
    rng = np.random.default_rng(17)
    for name in ("invariant", "anti", "slant"):
        frame, split = frames_at(catalog[name], np.array([0.1, 0.2, -0.15]))
        for _ in range(10):
            xf = rng.uniform(-1, 1, 3)
            tx = split.tangential @ xf
            t_norm = math.sqrt(max(frame.inner_frame(tx, tx), 0.0))
            phi_x = frame.push(tx) + frame.normal_basis @ (split.normal @ xf)
            phi_norm = math.sqrt(max(float(phi_x @ frame.metric_chart @ phi_x), 0.0))
            assert t_norm <= phi_norm + 1e-9


def test_q_operator_anti_invariant_zero(catalog, frames_at):
    _, split = frames_at(catalog["anti"], ORIGIN3)
    assert np.max(np.abs(sl.q_operator(split))) < 1e-12


def test_q_operator_invariant_matches_structure(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], np.array([0.3, -0.2, 0.1]))
    q = sl.q_operator(split)
    expected = -np.eye(3) + np.outer(frame.xi_in_frame, frame.eta_frame())
    np.testing.assert_allclose(q, expected, atol=1e-9)


def test_q_operator_slant_on_d(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    q = sl.q_operator(split)
    for a in range(2):
        image = q @ frame.d_in_frame[:, a]
        np.testing.assert_allclose(
            image, -0.75 * frame.d_in_frame[:, a], atol=1e-9
        )


def test_q_annihilates_xi(catalog, frames_at):
    for name in ("invariant", "anti", "slant"):
        frame, split = frames_at(catalog[name], np.array([0.1, 0.1, 0.1]))
        assert np.max(np.abs(sl.q_operator(split) @ frame.xi_in_frame)) < 1e-9


def test_q_spectrum_triple(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], ORIGIN3)
    assert sl.q_spectrum(sl.q_operator(split), frame) == [(-1.0, 2), (0.0, 1)]
    frame, split = frames_at(catalog["anti"], ORIGIN3)
    assert sl.q_spectrum(sl.q_operator(split), frame) == [(0.0, 3)]
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    spectrum = sl.q_spectrum(sl.q_operator(split), frame)
    assert len(spectrum) == 2
    assert spectrum[0][0] == pytest.approx(-0.75, abs=1e-9)
    assert spectrum[0][1] == 2
    assert spectrum[1] == (0.0, 1)


def test_q_negative_semidefinite_on_d(canonical, catalog, frames_at):
    for name in ("invariant", "anti", "slant"):
        f = catalog[name]
        for u in interior_points(f, 10):
            frame, split = frames_at(f, u)
            for lam, mult in sl.q_spectrum(sl.q_operator(split), frame):
                assert -1.0 - 1e-6 <= lam <= 1e-6
                if lam != 0.0:
                    assert mult % 2 == 0


def test_theorem31_invariant_unit_vector(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], ORIGIN3)
    rec = sl.theorem31_check(split, frame)
    assert rec.max_residual < 1e-9


def test_theorem31_on_slant_candidate(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    rec = sl.theorem31_check(split, frame)
    assert rec.max_residual < 1e-6
    # eigen route and projection route agree on the angle itself
    for lam, vec in d_eigenvectors(sl.q_operator(split), frame):
        assert math.cos(sl.slant_angle(split, frame, vec)) == pytest.approx(
            math.sqrt(-lam), abs=1e-6
        )


def test_theorem31_zero_eigenvalue_anti(catalog, frames_at):
    frame, split = frames_at(catalog["anti"], ORIGIN3)
    rec = sl.theorem31_check(split, frame)
    assert rec.max_residual < 1e-12


def test_theorem31_rejects_non_eigenvector(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], ORIGIN3)
    bogus = frame.d_basis[:, 0] + frame.xi_chart  # not an eigenvector sample
    with pytest.raises(ContractError):
        sl.theorem31_check(split, frame, vectors=[(-0.5, bogus)])


def test_slant_fit_invariant(canonical, catalog, cfg, frames_at):
    data = [frames_at(catalog["invariant"], u) for u in interior_points(catalog["invariant"], 50)]
    report = sl.slant_fit(data)
    assert report.classification == CLASS_INVARIANT
    assert report.lambda_fit == pytest.approx(1.0, abs=1e-6)
    assert report.theta == pytest.approx(0.0, abs=1e-6)


def test_slant_fit_anti_invariant(canonical, catalog, frames_at):
    data = [frames_at(catalog["anti"], u) for u in interior_points(catalog["anti"], 50)]
    report = sl.slant_fit(data)
    assert report.classification == CLASS_ANTI_INVARIANT
    assert report.lambda_fit == pytest.approx(0.0, abs=1e-6)
    assert report.theta == pytest.approx(math.pi / 2, abs=1e-6)


def test_slant_fit_candidate_origin_only(catalog, frames_at):
    report = sl.slant_fit([frames_at(catalog["slant"], ORIGIN3)])
    assert report.lambda_fit == pytest.approx(0.75, abs=1e-6)
    assert report.classification == CLASS_PROPER_SLANT
    assert report.theta == pytest.approx(math.acos(math.sqrt(report.lambda_fit)), abs=1e-12)


def test_slant_fit_candidate_global(catalog, frames_at):
    # the catalog candidate turns out to be slant over the whole box, not
    # just at the origin; the fit must see a constant angle
    f = catalog["slant"]
    data = [frames_at(f, u) for u in interior_points(f, 25, seed=11)]
    report = sl.slant_fit(data)
    assert report.classification == CLASS_PROPER_SLANT
    assert report.lambda_fit == pytest.approx(0.75, abs=1e-8)
    thetas = [th for _, th in report.per_point]
    assert max(thetas) - min(thetas) < 1e-7


def test_slant_fit_lambda_matches_eigenvalue(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    report = sl.slant_fit([(frame, split)])
    nonzero = [lam for lam, _ in report.spectrum if lam != 0.0]
    assert abs(report.lambda_fit + nonzero[0]) < 1e-8


def test_slant_fit_detects_non_slant(cfg):
    # a 2-dim D is pointwise slant by skewness of T, so a genuine
    # counterexample needs a 4-dim D mixing an invariant pair (x1, y1)
    # with an anti-invariant pair (x2, x3) in the R^7 chart
    s7 = sl.canonical_lorentzian_sasakian(3)
    f = sl.Immersion(
        name="semi-slant",
        m=5,
        ambient_dim=7,
        mapping=lambda u: np.array([u[0], u[2], u[3], u[1], 0.0, 0.0, u[4]]),
        domain_box=((-1.0, 1.0),) * 5,
    )
    frame = sl.frame_at(s7, f, np.zeros(5), cfg)
    split = sl.phi_split(s7, frame)
    report = sl.slant_fit([(frame, split)])
    assert report.classification == CLASS_NON_SLANT
    assert report.spectrum == ((-1.0, 2), (0.0, 3))
    assert report.fit_residual > 0.5


def test_slant_fit_requires_samples():
    with pytest.raises(UsageError):
        sl.slant_fit([])


def test_metric_identities_at_xi_forced_zero(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    records = {r.name: r for r in sl.metric_identities(split, frame, THETA0, pairs=0)}
    assert records["corollary-metric-tangential"].max_residual < 1e-12
    assert records["corollary-metric-normal"].max_residual < 1e-12


def test_metric_identities_invariant(catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], np.array([0.2, 0.1, -0.3]))
    records = {r.name: r for r in sl.metric_identities(split, frame, 0.0)}
    assert records["corollary-metric-tangential"].passed
    assert records["corollary-metric-normal"].passed
    # printed form fails by exactly 2 cos^2(theta) at X = Y = xi
    assert records["paper-as-printed-(3.5)"].max_residual == pytest.approx(2.0, abs=1e-9)


def test_metric_identities_slant_values(catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    g = frame.metric_chart
    xf = frame.d_in_frame[:, 0]  # unit spacelike, orthogonal to xi
    tx = frame.push(split.tangential @ xf)
    nx = frame.normal_basis @ (split.normal @ xf)
    assert float(tx @ g @ tx) == pytest.approx(0.75, abs=1e-6)
    assert float(nx @ g @ nx) == pytest.approx(0.25, abs=1e-6)
    records = {r.name: r for r in sl.metric_identities(split, frame, THETA0)}
    assert records["corollary-metric-tangential"].max_residual < 1e-6
    assert records["corollary-metric-normal"].max_residual < 1e-6


def test_slant_report_serializable_fields(catalog, frames_at):
    report = sl.slant_fit([frames_at(catalog["slant"], ORIGIN3)])
    assert isinstance(report.spectrum, tuple)
    assert isinstance(report.per_point, tuple)
    point, theta = report.per_point[0]
    assert point == (0.0, 0.0, 0.0)
    assert theta == pytest.approx(THETA0, abs=1e-8)
