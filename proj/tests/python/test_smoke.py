import json
import math

import pytest

import hft


def test_bounds_and_constants():
    b = hft.theorem_bound(1.0, 1.0, 1.0)
    assert b == pytest.approx(math.exp(math.sqrt(2.0 * math.pi) * math.exp(0.5)), rel=1e-14)
    assert hft.theorem_bound(1.0, 1.0, 0.0) == 1.0
    assert hft.transfer_constant(1.0, 1.0, 1.0) == pytest.approx(b * b, rel=1e-14)
    assert hft.choose_t_max(1.0, 1.0, 1e-6) == pytest.approx(math.log(1e6), rel=1e-12)


def test_gamma_calculus_closed_forms():
    ou = hft.Generator.ou()
    # f = x: every Gamma_n is 1 on the Gaussian space
    for n in (1, 2, 3):
        assert hft.gamma_n(ou, 0.7, [0.7, 1.0], n) == pytest.approx(1.0, abs=1e-12)
    lag = hft.Generator.laguerre(2.0)
    derivs = [0.3, 1.1, -0.4, 0.25]
    for n in (1, 2, 3):
        rec = hft.gamma_n(lag, 1.8, derivs, n)
        ref = hft.laguerre_gamma_explicit(2.0, 1.8, derivs[1], derivs[2], derivs[3], n)
        assert rec == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_curvature_certification():
    rep = hft.certify_curvature(hft.Generator.laguerre(1.5), 1, 0.5, samples=2000)
    assert rep.ok
    assert rep.min_margin >= -1e-9
    # asking for more curvature than the space has must fail
    hot = hft.certify_curvature(hft.Generator.ou(), 1, 1.5, samples=2000)
    assert not hot.ok


def test_semigroup_eigenfunction_decay():
    ou = hft.Generator.ou()
    ev = hft.Semigroup(ou, "mehler")
    f = next(f for f in hft.ou_test_suite() if f.name == "x")
    assert ev.pt(f, 1.0, 0.5) == pytest.approx(0.5 * math.exp(-1.0), abs=1e-12)
    assert ev.pt_of_values(lambda y: y, 1.0, 0.5) == pytest.approx(
        0.5 * math.exp(-1.0), abs=1e-10
    )


def test_transport_map_is_a_translation():
    ou = hft.Generator.ou()
    prob = hft.make_problem(ou, hft.Potential.linear(1.0), "mehler", grid_points=21)
    tmap = hft.transport_grid(prob)
    assert abs(tmap.lipschitz - 1.0) <= 1e-6
    assert tmap.lipschitz <= tmap.bound + 1e-6
    worst = max(abs(t - (x - 1.0)) for x, t in zip(tmap.points, tmap.values))
    assert worst <= 1e-4
    assert hft.transport_eval(prob, 0.3) == pytest.approx(-0.7, abs=1e-4)


def test_quantile_map_and_ks():
    ou = hft.Generator.ou()
    prob = hft.make_problem(ou, hft.Potential.linear(1.0), "mehler", grid_points=21)
    tmap = hft.transport_grid(prob)
    mu = hft.MeasureCDF.from_generator(ou)
    nu = hft.MeasureCDF.perturbed(ou, prob.pot)
    assert hft.monge_quantile_map(mu, nu, 0.0) == pytest.approx(-1.0, abs=1e-6)
    rep = hft.compare_transport_to_monge(tmap, mu, nu, ou)
    assert rep.ok
    assert hft.pushforward_ks_distance(tmap.points, tmap.values, mu, nu) <= 0.01


def test_inequality_suite_passes():
    ou = hft.Generator.ou()
    ev = hft.Semigroup(ou, "mehler")
    rep = hft.semigroup_inequality_suite(
        ev, hft.ou_test_suite(), [0.25, 1.0], [-1.0, 0.0, 1.5]
    )
    assert rep.ok
    assert rep.margin >= -1e-7
    assert "mehler" in rep.fingerprint


def test_harness_commands(tmp_path):
    cfg = {
        "space": "ou",
        "potential": {"kind": "linear", "K_or_c": 1.0},
        "backend": "mehler",
        "grid": {"lo": -5.0, "hi": 5.0, "n": 21},
        "tolerances": {"ode_tol": 1e-8, "quadrature_tol": 1e-12, "horizon_eps": 1e-6},
        "t_schedule": [0.25, 1.0],
        "seed": 20240614,
        "output_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    assert hft.transport(str(path)) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "PASS"
    assert summary["lipschitz"] == pytest.approx(1.0, abs=1e-4)

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**cfg, "space": "hyperbolic"}))
    with pytest.raises(hft.ConfigError):
        hft.transport(str(bad))
