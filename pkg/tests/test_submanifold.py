import math

import numpy as np
import pytest

import slantlab as sl
from slantlab.errors import (
    DegenerateImmersionError,
    EvaluationError,
    UsageError,
    XiNotTangentError,
)

from conftest import THETA0, interior_points

ORIGIN3 = np.zeros(3)


def test_invariant_frame_induced_metric(canonical, catalog, cfg):
    frame = sl.frame_at(canonical, catalog["invariant"], ORIGIN3, cfg)
    np.testing.assert_allclose(
        frame.induced_metric, np.diag([0.25, 0.25, -0.25]), atol=1e-10
    )


def test_d_basis_orthogonal_to_xi(canonical, catalog, cfg):
    for f in catalog.values():
        for u in interior_points(f, 5):
            frame = sl.frame_at(canonical, f, u, cfg)
            for a in range(frame.d_basis.shape[1]):
                pairing = frame.d_basis[:, a] @ frame.metric_chart @ frame.xi_chart
                assert abs(pairing) < 1e-9


def test_xi_not_tangent_rejected(canonical, cfg):
    bad = sl.Immersion(
        name="line",
        m=1,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0], 0.0, 0.0, 0.0, 0.0]),
        domain_box=((-1.0, 1.0),),
    )
    with pytest.raises(XiNotTangentError):
        sl.frame_at(canonical, bad, np.zeros(1), cfg)


def test_degenerate_immersion_rejected(canonical, cfg):
    bad = sl.Immersion(
        name="collapsed",
        m=3,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0] + u[1], 0.0, u[0] + u[1], 0.0, u[2]]),
    )
    with pytest.raises(DegenerateImmersionError):
        sl.frame_at(canonical, bad, ORIGIN3, cfg)


def test_interior_margin_enforced(canonical, catalog, cfg):
    with pytest.raises(EvaluationError) as excinfo:
        sl.frame_at(canonical, catalog["invariant"], np.array([1.0, 0.0, 0.0]), cfg)
    assert excinfo.value.coordinate == 0


def test_frame_decomposition_exact(canonical, catalog, cfg):
    for f in catalog.values():
        for u in interior_points(f, 3):
            frame = sl.frame_at(canonical, f, u, cfg)
            for i in range(frame.m):
                e = frame.tangent_basis[:, i]
                recon = frame.project_tangent(e)
                assert np.max(np.abs(recon - e)) < 1e-9
            # D + xi reconstructs every tangent vector
            for i in range(frame.m):
                xf = np.eye(frame.m)[i]
                a = -frame.inner_frame(xf, frame.xi_in_frame)
                d_part = xf - a * frame.xi_in_frame
                np.testing.assert_allclose(
                    frame.push(d_part + a * frame.xi_in_frame),
                    frame.tangent_basis[:, i],
                    atol=1e-9,
                )


def test_normal_basis_spacelike_orthonormal(canonical, catalog, cfg):
    for f in catalog.values():
        frame = sl.frame_at(canonical, f, np.array([0.1, 0.2, -0.1]), cfg)
        nb = frame.normal_basis
        gram = nb.T @ frame.metric_chart @ nb
        np.testing.assert_allclose(gram, np.eye(nb.shape[1]), atol=1e-10)
        # and orthogonal to the tangent space
        cross = frame.tangent_basis.T @ frame.metric_chart @ nb
        assert np.max(np.abs(cross)) < 1e-9


def test_invariant_split_has_no_normal_part(canonical, catalog, frames_at):
    frame, split = frames_at(catalog["invariant"], np.array([0.2, -0.1, 0.3]))
    assert np.max(np.abs(split.normal)) < 1e-9
    # T^2 = -I + eta (x) xi on the frame
    expected = -np.eye(3) + np.outer(frame.xi_in_frame, frame.eta_frame())
    np.testing.assert_allclose(
        split.tangential @ split.tangential, expected, atol=1e-9
    )


def test_anti_invariant_split_has_no_tangential_part(canonical, catalog, frames_at):
    _, split = frames_at(catalog["anti"], np.array([0.2, -0.1, 0.3]))
    assert np.max(np.abs(split.tangential)) < 1e-9


def test_slant_candidate_projection_ratio(canonical, catalog, frames_at):
    frame, split = frames_at(catalog["slant"], ORIGIN3)
    xf = np.eye(3)[0]  # pushforward of the first parameter direction
    tx = split.tangential @ xf
    t_norm = math.sqrt(frame.inner_frame(tx, tx))
    phi_x = frame.push(tx) + frame.normal_basis @ (split.normal @ xf)
    phi_norm = math.sqrt(float(phi_x @ frame.metric_chart @ phi_x))
    assert t_norm / phi_norm == pytest.approx(math.cos(THETA0), abs=1e-6)


def test_split_skewness(canonical, catalog, frames_at):
    for f in catalog.values():
        frame, split = frames_at(f, np.array([0.15, 0.25, -0.2]))
        gt = frame.induced_metric @ split.tangential
        assert np.max(np.abs(gt + gt.T)) < 1e-9


def test_split_reconstructs_phi_on_normals(canonical, catalog, frames_at):
    frame, split = frames_at(catalog["slant"], np.array([0.1, 0.3, 0.0]))
    phi = canonical.phi(frame.base)
    for j in range(frame.normal_basis.shape[1]):
        image = phi @ frame.normal_basis[:, j]
        recon = frame.push(split.normal_to_tangent[:, j]) + frame.normal_basis @ (
            split.normal_to_normal[:, j]
        )
        assert np.max(np.abs(image - recon)) < 1e-9


def test_totally_geodesic_linear_immersion_in_flat_product(flat, cfg):
    linear = sl.Immersion(
        name="linear-flat",
        m=3,
        ambient_dim=5,
        mapping=lambda u: np.array([u[0], u[1], 0.0, 0.0, u[2]]),
    )
    sff = sl.second_fundamental(flat, linear, np.array([0.1, -0.2, 0.3]), cfg)
    assert np.max(np.abs(sff.h)) < 1e-9


def test_second_fundamental_symmetry(canonical, catalog, cfg):
    for f in catalog.values():
        sff = sl.second_fundamental(canonical, f, np.array([0.1, 0.2, -0.3]), cfg)
        assert np.max(np.abs(sff.h - sff.h.transpose(1, 0, 2))) < 1e-7


def test_shape_operator_duality(canonical, catalog, cfg):
    rng = np.random.default_rng(21)
    for f in catalog.values():
        sff = sl.second_fundamental(canonical, f, np.array([-0.2, 0.1, 0.25]), cfg)
        frame = sff.frame
        for _ in range(5):
            xf, yf = rng.uniform(-1, 1, (2, 3))
            for v in range(sff.shape_ops.shape[0]):
                lhs = frame.inner_frame(sff.shape_ops[v] @ xf, yf)
                rhs = float(np.einsum("ij,i,j->", sff.h[:, :, v], xf, yf))
                assert abs(lhs - rhs) < 1e-7


def test_gauss_decomposition_exact(canonical, catalog, cfg):
    f = catalog["slant"]
    u = np.array([0.910141, 0.2, -0.3]) * 0.4
    frame = sl.frame_at(canonical, f, u, cfg)
    rng = np.random.default_rng(3)
    for _ in range(5):
        v = rng.uniform(-1, 1, 5)
        recon = frame.project_tangent(v) + frame.project_normal(v)
        assert np.max(np.abs(recon - v)) < 1e-12


def test_xi_identities_invariant(canonical, catalog, cfg):
    records = {
        r.name: r
        for r in sl.xi_identities(canonical, catalog["invariant"], np.array([0.1, -0.2, 0.3]), cfg)
    }
    # invariant: no normal part, so h(X, xi) = NX = 0
    assert records["xi-transport-normal"].max_residual < 1e-6
    assert records["xi-transport-tangential"].max_residual < 1e-6


def test_xi_identities_anti_invariant(canonical, catalog, cfg):
    records = {
        r.name: r
        for r in sl.xi_identities(canonical, catalog["anti"], np.array([0.1, -0.2, 0.3]), cfg)
    }
    assert records["xi-transport-tangential"].max_residual < 1e-6
    assert records["xi-transport-normal"].max_residual < 1e-6


def test_slant_h_xi_norm_matches_angle(canonical, catalog, cfg, frames_at):
    # |h(X, xi)| = |NX| = sin(theta0) |phi X| for X in D
    f = catalog["slant"]
    u = np.array([0.05, 0.12, -0.07])
    frame, split = frames_at(f, u)
    sff = sl.second_fundamental(canonical, f, u, cfg)
    xf = frame.d_in_frame[:, 0]
    h_x_xi = np.einsum("ijv,i,j->v", sff.h, xf, frame.xi_in_frame)
    nx = split.normal @ xf
    assert np.max(np.abs(h_x_xi - nx)) < 1e-5
    phi_x = frame.push(split.tangential @ xf) + frame.normal_basis @ nx
    phi_norm = math.sqrt(float(phi_x @ frame.metric_chart @ phi_x))
    assert np.linalg.norm(nx) == pytest.approx(
        math.sin(THETA0) * phi_norm, abs=1e-5
    )


def test_catalog_names():
    assert sl.get_immersion("invariant-R5").name == "invariant-R5"
    assert sl.get_immersion("anti-invariant-R5").m == 3
    cand = sl.get_immersion(f"slant-candidate-R5({THETA0!r})")
    assert cand.ambient_dim == 5
    with pytest.raises(UsageError):
        sl.get_immersion("nope")
    with pytest.raises(UsageError):
        sl.get_immersion("slant-candidate-R5(bad)")
    assert "invariant-R5" in sl.list_immersions()


def test_immersion_domain_validation():
    with pytest.raises(UsageError):
        sl.Immersion(
            name="bad", m=2, ambient_dim=5,
            mapping=lambda u: np.zeros(5), domain_box=((0.0, 0.0), (-1.0, 1.0)),
        )
    f = sl.invariant_r5()
    with pytest.raises(UsageError):
        f.require_interior(np.zeros(2), 0.1)  # wrong parameter count


def test_sample_parameters_respect_margin(catalog):
    pts = catalog["invariant"].sample_parameters(50, 9, margin=0.25)
    for u in pts:
        assert np.all(u >= -0.75) and np.all(u <= 0.75)
