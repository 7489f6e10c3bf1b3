import json

import numpy as np
import pytest

from jacobi_harmonic import verify as vf


def cfg(*suites, **kw):
    return vf.RunConfig(suites=suites, **kw)


def by_name(reports):
    return {r.name: r for r in reports}


def test_make_report_modes():
    r = vf.make_report("x", [1.0, 2.0], [1.0, 2.2], 1e-3, {})
    assert r.abs_err == pytest.approx(0.2) and r.rel_err == pytest.approx(0.1)
    p = vf.make_report("x", [1.0, 0.1], [1.0, 0.2], 1e-3, {}, mode="pointwise")
    assert p.rel_err == pytest.approx(1.0)
    s = vf.make_report("x", 3e-11, 0.0, 1e-10, {}, scale=1.0)
    assert s.passed and s.rel_err == pytest.approx(3e-11)


def test_rel_err_floor_for_zero_reference():
    r = vf.make_report("x", 0.0, 0.0, 1e-12, {})
    assert r.rel_err == 0.0 and r.passed
    r = vf.make_report("x", 0.0, 1e-200, 1e-12, {})
    assert np.isfinite(r.rel_err)


def test_negative_control_scoring():
    name = "haar.rho0_control"
    weak = vf.make_report(name, 1.0, 1.0 + 5e-6, 1e-6, {}, negative=True)
    strong = vf.make_report(name, 1.0, 2.0, 1e-6, {}, negative=True)
    assert not weak.passed and not weak.ok
    assert not strong.passed and strong.ok
    assert strong.power == vf.POWER[name]


def test_report_dict_layout():
    d = vf.make_report("x", 1 + 2j, 1 + 2j, 1e-3, {"a": 1}).to_dict()
    assert d["lhs"] == [1.0, 2.0] and d["pass"] and d["ok"]
    assert d["grid_hash"] == vf.grid_hash({"a": 1})
    assert "runtime_ms" not in d


def test_circle_parseval_example():
    r = vf.make_report("p", 5.0, abs(1.0) ** 2 + abs(2j) ** 2, 1e-12, {})
    assert r.passed


def test_plancherel_g_pi_oracle():
    reps = by_name(vf.suite_plancherel_g(cfg("plancherel-g")))
    r = reps["plancherel-g.character_gaussian"]
    # int |e^{i phi}|^2 dk * int e^{-n^2} dn * int e^{-t^2} dt = pi
    assert complex(r.lhs).real == pytest.approx(np.pi, rel=1e-12)
    assert all(x.passed for x in reps.values())


def test_fast_suites_pass():
    reports, runtimes = vf.run_suites(cfg("iwasawa", "parseval-circle", "lifts", "span-closure", "haar"))
    assert set(runtimes) == {"iwasawa", "parseval-circle", "lifts", "span-closure", "haar"}
    bad = [r.name for r in reports if not r.ok]
    assert not bad


def test_haar_control_fails_strongly():
    r = by_name(vf.suite_haar(cfg("haar")))["haar.rho0_control"]
    assert r.negative_control and r.rel_err > 10 * r.tolerance


def test_span_closure_single_bump_control():
    reps = by_name(vf.suite_span_closure(cfg("span-closure")))
    ctrl = [r for r in reps.values() if r.negative_control]
    assert ctrl and all(r.ok for r in ctrl)


def test_coarse_grid_fails():
    reps = vf.suite_plancherel_j(cfg("plancherel-j", grid={"n": 4}))
    main = [r for r in reps if not r.negative_control]
    assert any(not r.passed for r in main)


def test_seeded_determinism():
    c = cfg("iwasawa", "parseval-circle", seed=7)
    a = vf.to_json(c, vf.run_suites(c)[0])
    b = vf.to_json(c, vf.run_suites(c, threads=1)[0])
    assert a == b
    other = vf.to_json(cfg("parseval-circle", seed=8), vf.run_suites(cfg("parseval-circle", seed=8))[0])
    assert json.loads(other)["reports"][0]["lhs"] != json.loads(a)["reports"][-1]["lhs"]


def test_samples_override():
    reps = vf.suite_iwasawa(cfg("iwasawa", samples=5))
    assert all(r.grid_spec == {"samples": 5} for r in reps)


def test_resolve_suites():
    assert vf.resolve_suites(["all"]) == list(vf.SUITES)
    assert vf.resolve_suites(["haar", "haar", "lifts"]) == ["haar", "lifts"]
    with pytest.raises(KeyError):
        vf.resolve_suites(["nope"])


def test_max_workers_env(monkeypatch):
    monkeypatch.setenv("JH_THREADS", "1")
    assert vf.max_workers() == 1
    monkeypatch.setenv("JH_THREADS", "junk")
    assert vf.max_workers() >= 1


def test_csv_output():
    c = cfg("parseval-circle")
    text = vf.to_csv(vf.run_suites(c)[0])
    lines = text.strip().splitlines()
    assert lines[0].split(",") == list(vf.CSV_COLUMNS)
    assert lines[1].startswith("parseval-circle.random_degree,")


def test_json_payload_keys():
    c = cfg("parseval-circle")
    doc = json.loads(vf.to_json(c, vf.run_suites(c)[0], {"total_ms": 1}))
    assert list(doc) == ["version", "defaults", "tolerances", "config", "reports", "metadata"]
    assert doc["tolerances"]["axioms"]["tolerance"] == 1e-10


def test_random_unimodular():
    g = vf.random_unimodular(np.random.default_rng(0), 200)
    assert g.shape == (200, 2, 2)
    np.testing.assert_allclose(np.linalg.det(g), 1.0, atol=1e-12)
    assert np.max(np.abs(g)) <= 10.0


HALF = {
    "parseval-circle": {"phi": 32},
    "plancherel-g": {"phi": 32, "n": 128, "t": 128, "xi": 128, "lam": 128},
    "inversion-g": {"phi": 32, "n": 128, "t": 128, "xi": 128, "lam": 128},
    "parseval-h": {"z": 64, "y": 64, "x": 64, "eta1": 64, "eta2": 64, "eta3": 64},
    "plancherel-j": {"z": 128, "y": 128, "x": 128, "phi": 32, "n": 128, "t": 128, "freq": 128},
}


@pytest.mark.parametrize("suite", sorted(HALF))
def test_refinement_monotone(suite):
    # roundoff floor: below 1e-14 the ratio is noise
    coarse = {r.name: r.rel_err for r in vf.SUITES[suite](cfg(suite, grid=HALF[suite])) if not r.negative_control}
    fine = {r.name: r.rel_err for r in vf.SUITES[suite](cfg(suite)) if not r.negative_control}
    for name, err in fine.items():
        assert err <= 2 * max(coarse[name], 1e-14), (name, coarse[name], err)
