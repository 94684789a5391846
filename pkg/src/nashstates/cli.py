"""Reproducible experiment driver.

Every subcommand is a deterministic function of its configuration: outputs
embed the package version, the canonical configuration JSON, its SHA-256
hash, and the seed, and identical configurations produce byte-identical
numeric payloads.  Point-cloud artifacts carry a residual per emitted point;
``nashstates audit FILE`` rebuilds the generating system from the embedded
configuration and re-verifies those residuals.

Exit codes: 0 success, 2 solver non-convergence, 3 invariant violation,
4 bad configuration.  Thread count for multistart searches can be overridden
with the ``NASHSTATES_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .conditions import (
    NASH_TOL,
    NashInstance,
    classify_local,
    global_su2_check,
    nash_residual,
    single_qubit_instance,
    su2_generators,
)
from .errors import (
    InvariantViolationError,
    NashStatesError,
    NotNashStateError,
    SolverError,
)
from .operators import (
    DenseOperator,
    DensityMatrix,
    InteractionGraph,
    StateVector,
    diagonalize,
    embed,
    random_hermitian,
    random_state,
    star_hamiltonians,
)
from .qpd import (
    orbit_joint_system,
    orbit_variety_intersections,
    qpd_nash_max_check,
    qpd_rebit_system,
)
from .tfim import TFIMSpec, correlators, thermal_hessian
from .variety import (
    build_system,
    estimate_local_dimension,
    random_start_search,
    stereographic,
    trace_component,
)

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_INVARIANT = 3
EXIT_CONFIG = 4


@dataclass(frozen=True)
class RunConfig:
    """Full specification of one CLI invocation."""

    subcommand: str
    seed: int = 0
    out: str | None = None
    tol: float = NASH_TOL
    params: dict = field(default_factory=dict)

    def canonical(self) -> str:
        payload = {"subcommand": self.subcommand, "seed": self.seed,
                   "tol": self.tol, "params": self.params}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _metadata(config: RunConfig) -> dict:
    canon = config.canonical()
    return {
        "artifact": f"nashstates {config.subcommand}",
        "version": __version__,
        "config": json.loads(canon),
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "seed": config.seed,
    }


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _emit(config: RunConfig, text: str) -> None:
    if config.out is None:
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_csv(config: RunConfig, header: list[str], rows: list[tuple],
               extra_meta: dict | None = None) -> None:
    meta = _metadata(config)
    if extra_meta:
        meta = {**meta, "extra": extra_meta}
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    _emit(config, buf.getvalue())


def _write_json(config: RunConfig, payload: dict) -> None:
    doc = {"meta": _metadata(config), **payload}
    _emit(config, json.dumps(doc, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# shared builders (also used by the audit pass)

def random_observable_instance(n_qubits: int, seed: int,
                               real_symmetric: bool) -> NashInstance:
    """One random dense observable per single-qubit block, seeded."""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63, size=n_qubits)
    obs = [random_hermitian(2**n_qubits, int(s), real_symmetric) for s in seeds]
    return single_qubit_instance(obs, n_qubits)


def two_local_ring_instance(n_qubits: int, seed: int) -> NashInstance:
    """Normalized random nearest-neighbour 2-local terms on a ring."""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63, size=n_qubits)
    obs = []
    for i in range(n_qubits):
        local = random_hermitian(4, int(seeds[i]))
        local = local * (1.0 / local.operator_norm())
        obs.append(embed(local, [i, (i + 1) % n_qubits], n_qubits))
    return single_qubit_instance(obs, n_qubits)


def complete_graph_hamiltonian(n_qubits: int, seed: int) -> InteractionGraph:
    """Strictly 2-local Hamiltonian: random Hermitian term on every edge."""
    rng = np.random.default_rng(seed)
    edges = {}
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            edges[(i, j)] = random_hermitian(4, int(rng.integers(0, 2**63)))
    return InteractionGraph(n_qubits, edges)


def _projection_columns(x: np.ndarray) -> tuple[float, float, float, str]:
    antipodal = 1.0 + x[0] < 1e-9
    xyz = stereographic(x, antipodal=antipodal)
    return float(xyz[0]), float(xyz[1]), float(xyz[2]), "south" if antipodal else "north"


# ---------------------------------------------------------------------------
# subcommands

def _run_variety_sample(config: RunConfig) -> int:
    p = config.params
    inst = random_observable_instance(p["n_qubits"], config.seed, p["real_symmetric"])
    system = build_system(inst, real_symmetric=p["real_symmetric"])
    points = random_start_search(
        system, p["n_starts"], config.seed, tol=config.tol,
        start_subspace="real" if p["real_symmetric"] else "full")
    rows = []
    dims = []
    for pt in points:
        frame = estimate_local_dimension(system, pt)
        dims.append(frame.est_dim)
        row = list(pt.coords)
        if p["real_symmetric"]:
            px, py, pz, chart = _projection_columns(pt.coords[:4])
            row += [px, py, pz, chart]
        row += [pt.residual, frame.est_dim]
        rows.append(tuple(row))
    header = [f"v{i}" for i in range(system.ambient_dim)]
    if p["real_symmetric"]:
        header += ["px", "py", "pz", "chart"]
    header += ["residual", "est_dim"]
    _write_csv(config, header, rows,
               {"n_points": len(points), "est_dims": sorted(set(dims))})
    return EXIT_OK


def _run_variety_trace(config: RunConfig) -> int:
    p = config.params
    inst = random_observable_instance(p["n_qubits"], config.seed, p["real_symmetric"])
    system = build_system(inst, real_symmetric=p["real_symmetric"])
    seeds_pts = random_start_search(
        system, p["n_starts"], config.seed, tol=config.tol,
        start_subspace="real" if p["real_symmetric"] else "full")
    if not seeds_pts:
        raise SolverError("no variety points found to trace")
    rows = []
    components = []
    cover = float(np.cos(1.6 * p["step"]))  # rep lies between sampled trace points
    for pt in seeds_pts:
        if len(components) >= p["max_components"]:
            break
        covered = any(
            system.gauge_overlap(pt.coords, np.asarray(prev)) > cover
            for comp in components for prev in comp["sample"])
        if covered:
            continue
        frame = estimate_local_dimension(system, pt)
        if frame.est_dim != 1:
            continue
        trace = trace_component(system, pt, p["step"], p["max_steps"], tol=config.tol)
        comp_idx = len(components)
        sample = []
        for k, tp in enumerate(trace.points):
            row = [comp_idx, k] + list(tp.coords)
            if p["real_symmetric"]:
                row += list(_projection_columns(tp.coords[:4]))
            row += [tp.residual]
            rows.append(tuple(row))
            if k % 2 == 0:
                sample.append(list(tp.coords))
        components.append({"closed": trace.closed, "n_points": len(trace.points),
                           "failure": trace.failure, "sample": sample})
    for comp in components:
        comp.pop("sample")
    if not components:
        raise SolverError("no one-dimensional components found")
    header = ["component", "step"] + [f"v{i}" for i in range(system.ambient_dim)]
    if p["real_symmetric"]:
        header += ["px", "py", "pz", "chart"]
    header += ["residual"]
    _write_csv(config, header, rows, {"components": components})
    return EXIT_OK


def _run_tfim_correlators(config: RunConfig) -> int:
    p = config.params
    rows = []
    for g in p["g"]:
        for beta in p["beta"]:
            spec = TFIMSpec(p["n"], g, beta)
            c = correlators(spec)
            hs = thermal_hessian(spec)
            rows.append((1.0 / beta, g, c.x_avg, c.zz_avg,
                         hs[0, 0], hs[1, 1], hs[2, 2]))
    rows.sort(key=lambda r: (r[1], r[0]))
    _write_csv(config, ["temperature", "g", "x_avg", "zz_avg",
                        "hs11", "hs22", "hs33"], rows)
    return EXIT_OK


def _run_tfim_hessian(config: RunConfig) -> int:
    p = config.params
    report = []
    min_entry = np.inf
    for g in p["g"]:
        for beta in p["beta"]:
            hs = thermal_hessian(TFIMSpec(p["n"], g, beta))
            entries = [float(hs[i, i]) for i in range(3)]
            min_entry = min(min_entry, *entries)
            report.append({"g": g, "beta": beta, "entries": entries,
                           "psd": bool(min(entries) >= -1e-10)})
    payload = {"n": p["n"], "grid": report, "min_entry": float(min_entry),
               "all_psd": bool(min_entry >= -1e-10)}
    _write_json(config, payload)
    if not payload["all_psd"]:
        raise InvariantViolationError(
            f"thermal form has a negative entry: {min_entry}")
    return EXIT_OK


def _run_qpd_variety(config: RunConfig) -> int:
    p = config.params
    system = qpd_rebit_system()
    reps = random_start_search(system, p["n_starts"], config.seed, tol=config.tol)
    if not reps:
        raise SolverError("no points found on the stationary set")
    rows = []
    components = []
    traced = []
    cover = float(np.cos(1.6 * p["step"]))
    for pt in reps:
        if len(components) >= p["max_components"]:
            break
        if any(abs(float(pt.coords @ prev)) > cover
               for comp in traced for prev in comp):
            continue
        trace = trace_component(system, pt, p["step"], p["max_steps"], tol=config.tol)
        comp_idx = len(components)
        traced.append([tp.coords for tp in trace.points[::2]])
        for k, tp in enumerate(trace.points):
            for x in (tp.coords, -tp.coords):  # emit the full double cover
                px, py, pz, chart = _projection_columns(x)
                rows.append((px, py, pz,
                             qpd_nash_max_check(x, tol=max(config.tol, 1e-8)),
                             x[0], x[1], x[2], x[3], tp.residual, comp_idx, chart))
        components.append({"closed": trace.closed, "n_points": len(trace.points),
                           "failure": trace.failure})
    _write_csv(config, ["x", "y", "z", "on_max_set", "X0", "X1", "X2", "X3",
                        "residual", "component", "chart"], rows,
               {"components": components})
    return EXIT_OK


def _run_qpd_orbits(config: RunConfig) -> int:
    p = config.params
    points = orbit_variety_intersections(
        p["chi"], tol=config.tol, seed=config.seed, n_starts=p["n_starts"],
        dedup_antipodal=p["dedup_antipodal"])
    records = []
    for pt in points:
        records.append({
            "rebit": [float(v) for v in pt.rebit.values],
            "xyz": [pt.projected.x, pt.projected.y, pt.projected.z],
            "chart": pt.projected.chart,
            "family": pt.family,
            "nash_max": bool(pt.nash_max),
            "residual": float(pt.residual),
            "payoffs": [float(u) for u in pt.payoffs],
        })
    payload = {"chi": p["chi"], "points": records,
               "n_points": len(records),
               "n_nash_max": sum(1 for r in records if r["nash_max"])}
    _write_json(config, payload)
    return EXIT_OK


def _decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InvariantViolationError(
            "matrices must be nested [[...[re, im]...]] with square shape")
    return arr[..., 0] + 1j * arr[..., 1]


def load_state_file(path: str) -> StateVector | DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "amplitudes" in doc:
        amps = np.asarray(doc["amplitudes"], dtype=float)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise InvariantViolationError("amplitudes must be [re, im] pairs")
        return StateVector.normalized(amps[:, 0] + 1j * amps[:, 1])
    if "density" in doc:
        return DensityMatrix(_decode_matrix(doc["density"]))
    raise InvariantViolationError("state file needs 'amplitudes' or 'density'")


def load_instance_file(path: str) -> NashInstance:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    n = int(doc["n_qubits"])
    obs = [DenseOperator.from_matrix(_decode_matrix(m), "hermitian")
           for m in doc["observables"]]
    blocks = doc.get("blocks")
    if blocks is None:
        blocks = [[i] for i in range(n)]
    blocks = tuple(tuple(int(q) for q in b) for b in blocks)
    gen_spec = doc.get("generators", "su2")
    if gen_spec == "su2":
        if any(len(b) != 1 for b in blocks):
            raise InvariantViolationError("'su2' generators need single-qubit blocks")
        gens = tuple(su2_generators(b[0], n) for b in blocks)
    else:
        gens = tuple(tuple(DenseOperator.from_matrix(_decode_matrix(g), "anti_hermitian")
                           for g in block_gens) for block_gens in gen_spec)
    return NashInstance(n, tuple(obs), blocks, gens)


def _run_nash_check(config: RunConfig) -> int:
    p = config.params
    state = load_state_file(p["state"])
    inst = load_instance_file(p["instance"])
    res = nash_residual(state, inst)
    is_nash = res.max < config.tol
    classification = None
    spectra = None
    if is_nash:
        cls = classify_local(state, inst, tol=max(config.tol, 1e-7))
        classification = cls.kind.value
        spectra = [[float(v) for v in block] for block in cls.eigenvalue_lists]
    payload = {
        "per_block_residuals": [float(r) for r in res.per_block],
        "max_residual": float(res.max),
        "is_nash": bool(is_nash),
        "tolerance": config.tol,
        "classification": classification,
        "bilinear_spectra": spectra,
    }
    _write_json(config, payload)
    return EXIT_OK


def _run_haar_ubiquity(config: RunConfig) -> int:
    p = config.params
    n = p["n"]
    inst = two_local_ring_instance(n, config.seed)
    epsilon = p["epsilon"] if p["epsilon"] is not None else 2.0 ** (-n / 4)
    rng = np.random.default_rng(config.seed)
    seeds = rng.integers(0, 2**63, size=p["samples"])
    residuals = []
    hits = 0
    for s in seeds:
        state = random_state(2**n, int(s))
        res = nash_residual(state, inst)
        residuals.append(res.max)
        if res.max <= epsilon:
            hits += 1
    residuals = np.array(residuals)
    payload = {
        "n_qubits": n,
        "epsilon": float(epsilon),
        "samples": int(p["samples"]),
        "fraction_epsilon_nash": hits / p["samples"],
        "residual_max": float(np.max(residuals)),
        "residual_median": float(np.median(residuals)),
    }
    _write_json(config, payload)
    return EXIT_OK


def _run_theorem1_audit(config: RunConfig) -> int:
    p = config.params
    rng = np.random.default_rng(config.seed)
    sizes = p["sizes"]
    records = []
    all_ok = True
    for idx in range(p["count"]):
        n = sizes[idx % len(sizes)]
        graph = complete_graph_hamiltonian(n, int(rng.integers(0, 2**63)))
        terms = star_hamiltonians(graph)
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        inst = single_qubit_instance(terms, n)
        _, vecs = diagonalize(total)
        worst = max(nash_residual(v, inst).max for v in vecs)
        ground = vecs[0]
        ground_ok = all(
            global_su2_check(ground, terms[i], i, "min", tol=1e-8)[1]
            for i in range(n))
        ok = worst < 1e-8 and ground_ok
        all_ok = all_ok and ok
        records.append({"n": n, "max_eigenstate_residual": float(worst),
                        "ground_globally_minimal": bool(ground_ok), "ok": bool(ok)})
    _write_json(config, {"hamiltonians": records, "all_pass": bool(all_ok)})
    if not all_ok:
        raise InvariantViolationError("eigenstate stationarity audit failed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# post-hoc audit of emitted artifacts

def _parse_csv_artifact(path: str) -> tuple[dict, list[str], list[list[str]]]:
    meta = {}
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            elif not header:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    return meta, header, rows


def _audit_points(system, header, rows, tol) -> float:
    idx = {name: i for i, name in enumerate(header)}
    worst = 0.0
    for row in rows:
        v = np.array([float(row[idx[f"v{i}"]]) for i in range(system.ambient_dim)])
        worst = max(worst, system.residual_of(v))
    if worst >= tol:
        raise InvariantViolationError(f"audit failed: residual {worst:.3e} >= {tol:.1e}")
    return worst


def _run_audit(config: RunConfig) -> int:
    path = config.params["file"]
    if path.endswith(".json") or _sniff_json(path):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        meta = doc.get("meta", {})
        sub = meta.get("config", {}).get("subcommand", "")
        if sub != "qpd orbits":
            raise InvariantViolationError(f"no audit rule for JSON artifact {sub!r}")
        chi = doc["chi"]
        tol = max(meta["config"].get("tol", NASH_TOL), 1e-8)
        worst = 0.0
        for rec in doc["points"]:
            system = orbit_joint_system(chi, rec["family"])
            worst = max(worst, system.residual_of(np.asarray(rec["rebit"])))
        if worst >= tol:
            raise InvariantViolationError(f"audit failed: residual {worst:.3e}")
        _write_json(config, {"audited": path, "points": len(doc["points"]),
                             "worst_residual": float(worst), "ok": True})
        return EXIT_OK

    meta, header, rows = _parse_csv_artifact(path)
    cfg = meta.get("config", {})
    sub = cfg.get("subcommand", "")
    tol = max(cfg.get("tol", NASH_TOL), 1e-8)
    if sub in ("variety sample", "variety trace"):
        inst = random_observable_instance(cfg["params"]["n_qubits"], cfg["seed"],
                                          cfg["params"]["real_symmetric"])
        system = build_system(inst, real_symmetric=cfg["params"]["real_symmetric"])
        worst = _audit_points(system, header, rows, tol)
    elif sub == "qpd variety":
        system = qpd_rebit_system()
        idx = {name: i for i, name in enumerate(header)}
        worst = 0.0
        for row in rows:
            x = np.array([float(row[idx[c]]) for c in ("X0", "X1", "X2", "X3")])
            worst = max(worst, system.residual_of(x))
        if worst >= tol:
            raise InvariantViolationError(f"audit failed: residual {worst:.3e}")
    elif sub == "tfim correlators":
        idx = {name: i for i, name in enumerate(header)}
        worst = 0.0
        for row in rows:
            g = float(row[idx["g"]])
            beta = 1.0 / float(row[idx["temperature"]])
            c = correlators(TFIMSpec(cfg["params"]["n"], g, beta))
            worst = max(worst,
                        abs(c.x_avg - float(row[idx["x_avg"]])),
                        abs(c.zz_avg - float(row[idx["zz_avg"]])))
        if worst >= 1e-12:
            raise InvariantViolationError(f"audit failed: curve deviation {worst:.3e}")
    else:
        raise InvariantViolationError(f"no audit rule for CSV artifact {sub!r}")
    _write_json(config, {"audited": path, "rows": len(rows),
                         "worst_residual": float(worst), "ok": True})
    return EXIT_OK


def _sniff_json(path: str) -> bool:
    with open(path, encoding="utf-8") as fh:
        head = fh.read(1)
    return head == "{"


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nashstates",
                     description="Nash states of quantum observables: "
                                 "experiments and artifact emission")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=NASH_TOL)
        sp.add_argument("--out", "-o", default=None, help="output path (default stdout)")

    variety = sub.add_parser("variety").add_subparsers(dest="action", required=True,
                                                       parser_class=_Parser)
    vs = variety.add_parser("sample", help="random instance -> point cloud + est_dims")
    vs.add_argument("--n-qubits", type=int, default=2)
    vs.add_argument("--n-starts", type=int, default=200)
    vs.add_argument("--real-symmetric", action="store_true")
    common(vs)
    vt = variety.add_parser("trace", help="trace one-dimensional components")
    vt.add_argument("--n-qubits", type=int, default=2)
    vt.add_argument("--n-starts", type=int, default=100)
    vt.add_argument("--real-symmetric", action="store_true")
    vt.add_argument("--step", type=float, default=0.02)
    vt.add_argument("--max-steps", type=int, default=10000)
    vt.add_argument("--max-components", type=int, default=8)
    common(vt)

    tfim_sub = sub.add_parser("tfim").add_subparsers(dest="action", required=True,
                                                     parser_class=_Parser)
    tc = tfim_sub.add_parser("correlators", help="thermal curves as CSV")
    tc.add_argument("--n", type=int, default=10)
    tc.add_argument("--g", type=float, action="append", required=True)
    tc.add_argument("--beta", type=float, action="append", required=True)
    common(tc, seed=False)
    th = tfim_sub.add_parser("hessian", help="thermal-form positivity report")
    th.add_argument("--n", type=int, default=10)
    th.add_argument("--g", type=float, action="append", required=True)
    th.add_argument("--beta", type=float, action="append", required=True)
    common(th, seed=False)

    qpd_sub = sub.add_parser("qpd").add_subparsers(dest="action", required=True,
                                                   parser_class=_Parser)
    qv = qpd_sub.add_parser("variety", help="stationary-set point cloud as CSV")
    qv.add_argument("--n-starts", type=int, default=200)
    qv.add_argument("--step", type=float, default=0.03)
    qv.add_argument("--max-steps", type=int, default=2000)
    qv.add_argument("--max-components", type=int, default=8)
    common(qv)
    qo = qpd_sub.add_parser("orbits", help="orbit/equilibrium intersections as JSON")
    qo.add_argument("--chi", type=float, required=True)
    qo.add_argument("--n-starts", type=int, default=400)
    qo.add_argument("--dedup-antipodal", action="store_true")
    common(qo)

    nash = sub.add_parser("nash").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    nc = nash.add_parser("check", help="residual/classification report for a state file")
    nc.add_argument("--state", required=True)
    nc.add_argument("--instance", required=True)
    common(nc, seed=False)

    haar = sub.add_parser("haar").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    hu = haar.add_parser("ubiquity", help="random-state approximate-stationarity sweep")
    hu.add_argument("--n", type=int, default=8)
    hu.add_argument("--samples", type=int, default=200)
    hu.add_argument("--epsilon", type=float, default=None)
    common(hu)

    thm = sub.add_parser("theorem1").add_subparsers(dest="action", required=True,
                                                    parser_class=_Parser)
    ta = thm.add_parser("audit", help="eigenstate stationarity sweep for strictly "
                                      "2-local Hamiltonians")
    ta.add_argument("--count", type=int, default=20)
    ta.add_argument("--sizes", type=int, action="append", default=None)
    common(ta)

    audit = sub.add_parser("audit", help="re-verify residuals in an emitted artifact")
    audit.add_argument("file")
    audit.add_argument("--out", "-o", default=None)

    return parser


def parse_config(argv) -> RunConfig:
    args = _build_parser().parse_args(argv)
    group = args.group
    action = getattr(args, "action", None)
    sub = f"{group} {action}" if action else group
    seed = getattr(args, "seed", 0)
    tol = getattr(args, "tol", NASH_TOL)
    skip = {"group", "action", "seed", "tol", "out"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    if sub == "theorem1 audit" and params.get("sizes") is None:
        params["sizes"] = [3, 4, 5]
    if sub == "qpd orbits" and params["chi"] ** 2 > 0.25 + 1e-12:
        raise InvariantViolationError("chi^2 must lie in [0, 1/4]")
    return RunConfig(sub, seed=seed, out=args.out, tol=tol, params=params)


_RUNNERS = {
    "variety sample": _run_variety_sample,
    "variety trace": _run_variety_trace,
    "tfim correlators": _run_tfim_correlators,
    "tfim hessian": _run_tfim_hessian,
    "qpd variety": _run_qpd_variety,
    "qpd orbits": _run_qpd_orbits,
    "nash check": _run_nash_check,
    "haar ubiquity": _run_haar_ubiquity,
    "theorem1 audit": _run_theorem1_audit,
    "audit": _run_audit,
}


def run(config: RunConfig) -> int:
    """Execute one configuration; returns the process exit status."""
    runner = _RUNNERS.get(config.subcommand)
    if runner is None:
        print(f"unknown subcommand {config.subcommand!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return runner(config)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InvariantViolationError, NotNashStateError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NashStatesError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"bad configuration or input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except (NashStatesError, ValueError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
