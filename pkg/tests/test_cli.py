import json

import numpy as np

from nashstates.cli import (
    EXIT_CONFIG,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_SOLVER,
    RunConfig,
    load_instance_file,
    load_state_file,
    main,
    run,
)


def _read_meta(path):
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            meta[key] = json.loads(value)
    return meta


def test_qpd_orbits_separable(tmp_path):
    out = tmp_path / "orbits.json"
    assert main(["qpd", "orbits", "--chi", "0", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    maxima = [p for p in doc["points"] if p["nash_max"]]
    assert len(maxima) == 2
    zs = sorted(round(p["xyz"][2], 6) for p in maxima)
    assert zs == [-1.0, 1.0]
    for p in maxima:
        assert abs(abs(p["rebit"][3]) - 1) < 1e-9
    assert doc["meta"]["version"]
    assert len(doc["meta"]["config_sha256"]) == 64


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["qpd", "orbits", "--chi", "0.22", "--seed", "5",
                     "-o", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    for path in (c, d):
        assert main(["tfim", "correlators", "--n", "6", "--g", "0.5",
                     "--beta", "0.5", "--beta", "2", "-o", str(path)]) == EXIT_OK
    assert c.read_bytes() == d.read_bytes()


def test_tfim_correlators_columns_and_audit(tmp_path):
    out = tmp_path / "corr.csv"
    assert main(["tfim", "correlators", "--n", "6", "--g", "1.5",
                 "--beta", "1", "-o", str(out)]) == EXIT_OK
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "temperature,g,x_avg,zz_avg,hs11,hs22,hs33"
    meta = _read_meta(out)
    assert meta["seed"] == 0 and meta["version"]
    assert main(["audit", str(out), "-o", str(tmp_path / "rep.json")]) == EXIT_OK


def test_tfim_hessian_report(tmp_path):
    out = tmp_path / "hs.json"
    assert main(["tfim", "hessian", "--n", "8", "--g", "0.5", "--g", "1.5",
                 "--beta", "0.5", "--beta", "5", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["all_psd"] is True
    assert len(doc["grid"]) == 4


def test_qpd_variety_artifact(tmp_path):
    out = tmp_path / "qv.csv"
    assert main(["qpd", "variety", "--n-starts", "120", "--step", "0.05",
                 "--max-steps", "600", "-o", str(out)]) == EXIT_OK
    meta = _read_meta(out)
    comps = meta["extra"]["components"]
    assert len(comps) == 4 and all(c["closed"] for c in comps)
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    assert header[:4] == ["x", "y", "z", "on_max_set"]
    assert "residual" in header
    assert main(["audit", str(out), "-o", str(tmp_path / "rep.json")]) == EXIT_OK


def test_variety_sample_and_trace(tmp_path):
    out = tmp_path / "vs.csv"
    assert main(["variety", "sample", "--n-qubits", "2", "--real-symmetric",
                 "--n-starts", "40", "--seed", "3", "-o", str(out)]) == EXIT_OK
    meta = _read_meta(out)
    assert meta["extra"]["est_dims"] == [1]
    assert main(["audit", str(out), "-o", str(tmp_path / "r1.json")]) == EXIT_OK

    tr = tmp_path / "vt.csv"
    assert main(["variety", "trace", "--n-qubits", "2", "--real-symmetric",
                 "--n-starts", "40", "--seed", "3", "--step", "0.03",
                 "--max-steps", "3000", "-o", str(tr)]) == EXIT_OK
    comps = _read_meta(tr)["extra"]["components"]
    assert comps and all(c["closed"] for c in comps)
    assert main(["audit", str(tr), "-o", str(tmp_path / "r2.json")]) == EXIT_OK


def test_nash_check_report(tmp_path):
    state_file = tmp_path / "state.json"
    inst_file = tmp_path / "inst.json"
    amps = np.zeros((4, 2))
    amps[3, 0] = 1.0
    state_file.write_text(json.dumps({"amplitudes": amps.tolist()}))
    h1 = np.diag([3.0, 0.0, 5.0, 1.0])
    h2 = np.diag([3.0, 5.0, 0.0, 1.0])

    def enc(m):
        return np.stack([m, np.zeros_like(m)], axis=-1).tolist()

    inst_file.write_text(json.dumps({
        "n_qubits": 2,
        "observables": [enc(h1), enc(h2)],
        "generators": "su2",
    }))
    out = tmp_path / "report.json"
    assert main(["nash", "check", "--state", str(state_file),
                 "--instance", str(inst_file), "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["is_nash"] is True
    assert doc["classification"] == "local_max"
    assert doc["max_residual"] < 1e-12
    # loader round trip
    assert load_state_file(str(state_file)).dim == 4
    assert load_instance_file(str(inst_file)).n_blocks == 2

    # density-matrix state files work too: the maximally mixed state is
    # stationary for every instance
    rho_file = tmp_path / "rho.json"
    rho = np.stack([np.eye(4) / 4, np.zeros((4, 4))], axis=-1)
    rho_file.write_text(json.dumps({"density": rho.tolist()}))
    out2 = tmp_path / "report2.json"
    assert main(["nash", "check", "--state", str(rho_file),
                 "--instance", str(inst_file), "-o", str(out2)]) == EXIT_OK
    assert json.loads(out2.read_text())["is_nash"] is True


def test_haar_and_theorem1(tmp_path):
    hu = tmp_path / "hu.json"
    assert main(["haar", "ubiquity", "--n", "6", "--samples", "40",
                 "-o", str(hu)]) == EXIT_OK
    doc = json.loads(hu.read_text())
    assert 0.0 <= doc["fraction_epsilon_nash"] <= 1.0
    assert abs(doc["epsilon"] - 2 ** (-6 / 4)) < 1e-12

    t1 = tmp_path / "t1.json"
    assert main(["theorem1", "audit", "--count", "6", "-o", str(t1)]) == EXIT_OK
    doc = json.loads(t1.read_text())
    assert doc["all_pass"] is True
    assert {r["n"] for r in doc["hamiltonians"]} == {3, 4, 5}


def test_exit_codes(tmp_path):
    # bad flag -> config error
    assert main(["qpd", "orbits", "--nonsense"]) == EXIT_CONFIG
    # chi out of range -> config error
    assert main(["qpd", "orbits", "--chi", "0.9"]) == EXIT_CONFIG
    # missing input file -> config error
    assert main(["nash", "check", "--state", "/nonexistent.json",
                 "--instance", "/nonexistent.json"]) == EXIT_CONFIG
    # corrupted artifact -> invariant violation on audit
    out = tmp_path / "orb.json"
    assert main(["qpd", "orbits", "--chi", "0", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    doc["points"][0]["rebit"] = [0.9, 0.1, 0.3, 0.4]
    out.write_text(json.dumps(doc))
    assert main(["audit", str(out)]) == EXIT_INVARIANT


def test_solver_failure_exit(tmp_path):
    # complex two-qubit variety has only isolated points: tracing must report
    # a solver failure rather than emit fabricated curves
    code = main(["variety", "trace", "--n-qubits", "2", "--n-starts", "5",
                 "--seed", "1", "-o", str(tmp_path / "x.csv")])
    assert code == EXIT_SOLVER


def test_run_config_roundtrip():
    cfg = RunConfig("tfim correlators", seed=4, tol=1e-9,
                    params={"n": 4, "g": [1.0], "beta": [1.0]})
    assert run(cfg) in (EXIT_OK,)  # stdout emission
    assert "tfim correlators" in cfg.canonical()
