"""Batch front end: ``qfactor run``, ``qfactor schema``, ``qfactor demo``.

A run config names the chain parameters, a lattice, an ordered task list and
an output spec.  Each task reports inputs, outputs and checks; every check is
one of the module invariants listed in ``INVARIANTS`` with its tolerance
(scaled by the QFACTOR_TOL_SCALE environment variable).

Exit codes: 0 all checks pass, 1 a check failed, 2 the config does not parse,
3 a numeric domain or parameter error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .chain import ChainParams, ParameterError, build_level, qhahn_params
from .climit import (
    classical_hahn,
    classical_harmonic,
    classical_isotropic,
    limit_scan,
    riccati_residual,
    scan_order_ok,
)
from .eigen import annihilation_residual, ground_state, ladder_eigenvalue, ladder_up
from .oper import factorization_residuals, pearson_residual
from .oracle import compare_family
from .oscillators import (
    OscillatorCase,
    Variant,
    commutation_check,
    osc_spectrum,
    osc_state,
)
from .qcore import DomainError, LatticeFn, QLattice, geometric_lattice
from .qhahn import (
    hahn_equation_residual,
    hahn_family,
    hahn_level,
    hahn_eigen,
    hahn_orthogonality,
    poly_on_lattice,
)

SCHEMA_VERSION = "1.0"
TASK_TYPES = ("build-chain", "ground-state", "ladder", "qhahn", "oscillator", "verify",
              "oracle-compare", "limit-scan")
FAMILIES = ("generic", "qhahn", "harmonic", "isotropic3d")

# invariant id -> (module, tolerance)
INVARIANTS = {
    "chain.q_pearson": ("chain", 1e-10),
    "oper.factorization": ("oper", 1e-10),
    "oper.intertwining": ("oper", 1e-10),
    "eigen.annihilation": ("eigen", 1e-9),
    "eigen.ground_eigen": ("eigen", 1e-8),
    "eigen.ladder_eigen": ("eigen", 1e-8),
    "qhahn.equation": ("qhahn", 1e-10),
    "qhahn.orthogonality": ("qhahn", 1e-8),
    "oscillators.commutation": ("oscillators", 1e-11),
    "oscillators.lemma_ground": ("oscillators", 1e-12),
    "oscillators.ladder_eigen": ("oscillators", 1e-8),
    "oracle.eigenvalue": ("oracle", 1.0),
    "oracle.eigenvector": ("oracle", 1e-6),
    "climit.order": ("climit", 0.0),
    "climit.riccati": ("climit", 1e-8),
}


class ConfigError(ValueError):
    """The run config does not parse or violates the config schema."""


LATTICE_PROPERTIES = {
    "q": {"type": ["string", "number"]},
    "a": {"type": "number", "minimum": 0},
    "b": {"type": ["string", "number"]},
    "depth": {"type": "integer", "minimum": 1},
    "x_min": {"type": ["string", "number"]},
    "extended_precision": {"type": "boolean"},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["params", "lattice", "tasks"],
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "object",
            "required": ["q"],
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "q": {"type": ["string", "number"]},
            },
        },
        "lattice": {
            "type": "object",
            "required": ["b"],
            "additionalProperties": False,
            "oneOf": [{"required": ["depth"]}, {"required": ["x_min"]}],
            "properties": LATTICE_PROPERTIES,
        },
        "tasks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type"],
                "properties": {
                    "id": {"type": "string"},
                    "type": {"enum": list(TASK_TYPES)},
                    "lattice": {"type": "object", "additionalProperties": False, "properties": LATTICE_PROPERTIES},
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
                "precision": {"type": "integer", "minimum": 1, "maximum": 17},
            },
        },
    },
}


def report_schema() -> dict:
    """JSON schema of the run report."""
    check = {
        "type": "object",
        "required": ["name", "invariant", "residual", "tolerance", "status"],
        "additionalProperties": False,
        "properties": {
            "name": {"type": "string"},
            "invariant": {"enum": sorted(INVARIANTS)},
            "residual": {"type": ["number", "null"]},
            "tolerance": {"type": "number"},
            "status": {"enum": ["pass", "fail"]},
        },
    }
    task = {
        "type": "object",
        "required": ["id", "type", "inputs", "outputs", "checks", "status"],
        "additionalProperties": False,
        "properties": {
            "id": {"type": "string"},
            "type": {"enum": list(TASK_TYPES)},
            "inputs": {"type": "object"},
            "outputs": {"type": "object"},
            "checks": {"type": "array", "items": check},
            "status": {"enum": ["pass", "fail"]},
            "files": {"type": "array", "items": {"type": "string"}},
        },
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "qfactor run report",
        "type": "object",
        "required": ["schema_version", "status", "tol_scale", "tasks"],
        "additionalProperties": False,
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "status": {"enum": ["pass", "fail"]},
            "tol_scale": {"type": "number"},
            "tasks": {"type": "array", "items": task},
        },
    }


# -- config --------------------------------------------------------------------


def _float(v, what: str) -> float:
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: cannot read {v!r} as a number") from exc


def load_config(source) -> dict:
    """Parse a path, JSON text or dict and validate it against CONFIG_SCHEMA."""
    if isinstance(source, dict):
        cfg = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema: {exc.message}") from exc
    return cfg


_PARAM_FIELDS = {"gamma", "b0", "b1", "b2", "h", "a0", "a1", "d_power", "d_list", "A0_shift", "A0_coeffs", "max_k"}


@dataclass(frozen=True)
class Setup:
    params: ChainParams
    lattice: QLattice
    case: OscillatorCase | None = None


def make_setup(cfg: dict, depth_override: int | None = None) -> Setup:
    p = dict(cfg["params"])
    family = p.pop("family", "generic")
    q = _float(p.pop("q"), "params.q")
    unknown = set(p) - _PARAM_FIELDS - {"h_tilde"}
    if unknown:
        raise ConfigError(f"unknown params field(s): {sorted(unknown)}")
    case = None
    if family == "generic":
        if "gamma" not in p:
            raise ConfigError("generic params need gamma")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in p.items() if k != "h_tilde"}
        params = ChainParams.with_h_tilde(p["h_tilde"], q=q, **kw) if "h_tilde" in p else ChainParams(q=q, **kw)
    elif family == "qhahn":
        params = qhahn_params(q, **p)
    else:
        variant = Variant.HARMONIC if family == "harmonic" else Variant.ISOTROPIC_3D
        extra = set(p) - {"a0", "a1", "h", "max_k"}
        if extra:
            raise ConfigError(f"{family} params take a0, a1, h, max_k; got {sorted(extra)}")
        case = OscillatorCase(variant, q, **{k: _float(v, k) if k != "max_k" else int(v) for k, v in p.items()})
        params = case.params()
    lattice = make_lattice(cfg["lattice"], q, depth_override)
    if lattice.extended_precision:
        params = params.updated(extended_precision=True)
    return Setup(params, lattice, case)


def make_lattice(spec: dict, q: float, depth_override: int | None = None) -> QLattice:
    """QLattice from {b, depth} or {b, x_min}; ``depth_override`` wins over both."""
    lq = _float(spec.get("q", q), "lattice.q")
    if lq != q:
        raise ConfigError(f"lattice.q={lq} differs from params.q={q}")
    a, b = float(spec.get("a", 0.0)), _float(spec["b"], "lattice.b")
    ext = bool(spec.get("extended_precision", False))
    if depth_override is None and "depth" not in spec:
        if "x_min" not in spec:
            raise ConfigError("lattice needs depth or x_min")
        return geometric_lattice(q, b, _float(spec["x_min"], "lattice.x_min"), a=a, extended_precision=ext)
    depth = depth_override if depth_override is not None else spec["depth"]
    return QLattice(q, a, b, int(depth), ext)


def task_setup(base: Setup, cfg: dict, task: dict, depth_override: int | None) -> Setup:
    """The run setup with the task's own lattice fields merged over the config lattice."""
    if "lattice" not in task:
        return base
    spec = {**cfg["lattice"], **task["lattice"]}
    if "x_min" in task["lattice"]:
        spec.pop("depth", None)
    elif "depth" in task["lattice"]:
        spec.pop("x_min", None)
    lattice = make_lattice(spec, base.params.q, depth_override)
    params = base.params.updated(extended_precision=lattice.extended_precision)
    return Setup(params, lattice, base.case)


def expand_tasks(tasks: list[dict]) -> list[dict]:
    """Assign ids and insert the ground state each ladder starts from."""
    out, seen = [], set()
    for i, t in enumerate(tasks):
        t = dict(t)
        t.setdefault("id", f"t{i}-{t['type']}")
        if t["type"] == "ladder":
            k, n = int(t.get("k", 1)), int(t.get("n", 1))
            key = ("ground-state", k - n)
            if key not in seen:
                out.append({"id": f"{t['id']}-ground", "type": "ground-state", "k": k - n})
                seen.add(key)
        if t["type"] == "ground-state":
            seen.add(("ground-state", int(t.get("k", 0))))
        out.append(t)
    ids = [t["id"] for t in out]
    if len(set(ids)) != len(ids):
        raise ConfigError("task ids must be unique")
    return out


# -- tasks -----------------------------------------------------------------------


@dataclass
class TaskResult:
    id: str
    type: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    functions: dict = field(default_factory=dict)

    def check(self, name: str, invariant: str, residual: float, tolerance: float | None = None,
              tol_scale: float = 1.0) -> None:
        tol = (INVARIANTS[invariant][1] if tolerance is None else tolerance) * tol_scale
        r = float(residual)
        ok = bool(np.isfinite(r) and r <= tol)
        self.checks.append({"name": name, "invariant": invariant, "residual": r, "tolerance": tol,
                            "status": "pass" if ok else "fail"})

    @property
    def status(self) -> str:
        return "pass" if all(c["status"] == "pass" for c in self.checks) else "fail"


def _random_functions(lattice: QLattice, count: int, seed: int) -> list[LatticeFn]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.normal(size=4)
        out.append(lattice.fn(lambda x, c=c: np.polyval(c, x) * np.exp(-x)))
    return out


def _task_build_chain(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    k_max = int(t.get("k_max", 3))
    r.outputs["a_k"] = [float(s.params.a(k)) for k in range(k_max + 1)]
    for k in range(k_max + 1):
        lev = build_level(s.params, s.lattice, k)
        r.check(f"pearson k={k}", "chain.q_pearson", pearson_residual(lev), tol_scale=scale)
        r.functions[f"rho_{k}"] = lev.rhok


def _task_ground(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    k = int(t.get("k", 0))
    pair = ground_state(s.params, s.lattice, k)
    r.outputs.update(eigenvalue=float(pair.lam), normalized=pair.normalized)
    r.check("A_k psi = 0", "eigen.annihilation", annihilation_residual(s.params, k, pair.psi), tol_scale=scale)
    r.check("H_k psi = a_k psi", "eigen.ground_eigen", pair.residual, tol_scale=scale)
    r.functions["psi"] = pair.psi


def _task_ladder(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    k, n = int(t.get("k", 1)), int(t.get("n", 1))
    pair = ladder_up(s.params, s.lattice, k, n)
    r.outputs["eigenvalue"] = float(pair.lam)
    r.check(f"H_{k} psi_{k}^{n} = lambda psi", "eigen.ladder_eigen", pair.residual, tol_scale=scale)
    r.functions["psi"] = pair.psi


def _task_verify(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    ks = [int(k) for k in t.get("k", [0, 1, 2])]
    fns = _random_functions(s.lattice, int(t.get("functions", 20)), int(t.get("seed", 0)))
    for k in ks:
        reps = [factorization_residuals(s.params, s.lattice, k, psi) for psi in fns]
        r.check(f"A*A + a_k = H_k, k={k}", "oper.factorization", max(x.identity for x in reps), tol_scale=scale)
        r.check(f"intertwining, k={k}", "oper.intertwining",
                max(max(x.intertwining, x.commutator) for x in reps), tol_scale=scale)


def _task_qhahn(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    k = int(t.get("k", 4))
    n_max = int(t.get("n_max", k))
    fam = hahn_family(s.params, k, n_max)
    top = hahn_level(s.params, k)
    r.outputs["coefficients"] = [[float(c) for c in p.coef] for p, _ in fam]
    r.outputs["eigenvalues"] = [float(hahn_eigen(top, n)) for n in range(n_max + 1)]
    for n, (p, lam) in enumerate(fam):
        r.check(f"q-Hahn equation n={n}", "qhahn.equation", hahn_equation_residual(s.params, k, p, lam),
                tol_scale=scale)
    G, off = hahn_orthogonality(s.params, s.lattice, k, n_max)
    r.outputs["gram"] = [[float(v) for v in row] for row in G]
    r.check("Gram off-diagonal", "qhahn.orthogonality", off, tol_scale=scale)
    for n, (p, _) in enumerate(fam):
        r.functions[f"psi_{n}"] = poly_on_lattice(p, s.lattice)


def _need_case(s: Setup, what: str) -> OscillatorCase:
    if s.case is None:
        raise ConfigError(f"{what} needs params.family harmonic or isotropic3d")
    return s.case


def _task_oscillator(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    case = _need_case(s, "oscillator")
    k = int(t.get("k", 2))
    n_max = int(t.get("n_max", k if case.variant is Variant.ISOTROPIC_3D else 3))
    r.outputs["eigenvalues"] = [osc_spectrum(case, k, n) for n in range(n_max + 1)]
    lam0, ak = osc_spectrum(case, k, 0), float(s.params.a(k))
    r.check("lambda_k^0 = a_k", "oscillators.lemma_ground", abs(lam0 - ak) / max(abs(ak), 1.0), tol_scale=scale)
    for n in range(n_max + 1):
        pair = osc_state(case, s.lattice, k, n)
        r.check(f"H_{k} psi_{k}^{n} = lambda psi", "oscillators.ladder_eigen", pair.residual, tol_scale=scale)
        r.functions[f"psi_{n}"] = pair.psi
    if case.variant is Variant.HARMONIC and k >= 1:
        psi = osc_state(case, s.lattice, k, 0).psi
        for name, dev in commutation_check(case, s.lattice, k, psi).items():
            r.check(f"Q-commutation {name}", "oscillators.commutation", dev, tol_scale=scale)


def _task_oracle(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    k = int(t.get("k", 3))
    n_max = int(t.get("n_max", 5))
    if s.case is not None:
        states = [(osc_state(s.case, s.lattice, k, n).psi, osc_spectrum(s.case, k, n)) for n in range(n_max + 1)]
    else:
        states = [(poly_on_lattice(p, s.lattice), ladder_eigenvalue(s.params, k, n))
                  for n, (p, _) in enumerate(hahn_family(s.params, k, n_max))]
    matches = compare_family(s.params, s.lattice, k, states)
    r.outputs["found"] = [m.found for m in matches]
    r.outputs["predicted"] = [m.predicted for m in matches]
    for m in matches:
        # eigenvalue residual is the error measured in units of its tolerance
        r.check(f"eigenvalue n={m.n}", "oracle.eigenvalue", abs(m.found - m.predicted) / (m.tolerance * scale))
        r.check(f"eigenvector n={m.n}", "oracle.eigenvector", 1 - m.cosine, tol_scale=scale)


_CLASSICAL = {"harmonic": classical_harmonic, "isotropic": classical_isotropic, "hahn": classical_hahn}


def _task_limit(s: Setup, t: dict, r: TaskResult, scale: float) -> None:
    quantity = t.get("quantity", "harmonic_lambda")
    q_list = [_float(q, "q_list") for q in t.get("q_list", [0.9, 0.99, 0.999])]
    kw = t.get("kwargs", {})
    if quantity == "riccati":
        chain = _CLASSICAL[kw.get("chain", "harmonic")]()
        for k in range(int(kw.get("k_max", 4)) + 1):
            r.check(f"Riccati k={k}", "climit.riccati", float(np.max(riccati_residual(chain, k))), tol_scale=scale)
        return
    try:
        rows = limit_scan(quantity, q_list, **kw)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    r.outputs["rows"] = [{"q": row.q, "q_value": row.q_value, "classical": row.classical, "gap": row.gap,
                          "order": row.order} for row in rows]
    r.check("empirical order in [0.8, 1.2] or >= 1.8", "climit.order", 0.0 if scan_order_ok(rows) else 1.0)


RUNNERS = {
    "build-chain": _task_build_chain,
    "ground-state": _task_ground,
    "ladder": _task_ladder,
    "qhahn": _task_qhahn,
    "oscillator": _task_oscillator,
    "verify": _task_verify,
    "oracle-compare": _task_oracle,
    "limit-scan": _task_limit,
}


def run_task(setup: Setup, task: dict, tol_scale: float = 1.0) -> TaskResult:
    inputs = {k: v for k, v in task.items() if k not in ("id", "type")}
    inputs["lattice_depth"] = setup.lattice.depth
    res = TaskResult(task["id"], task["type"], inputs)
    RUNNERS[task["type"]](setup, task, res, tol_scale)
    return res


# -- report ------------------------------------------------------------------------


def _rounded(v, digits: int):
    if isinstance(v, dict):
        return {k: _rounded(x, digits) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_rounded(x, digits) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.{digits}g}") if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path: Path, fn: LatticeFn, digits: int) -> None:
    lat = fn.lattice
    x = np.asarray(lat.x, dtype=float)
    v = np.asarray(fn.values, dtype=float)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["branch", "n", "x", "value"])
        for br in range(v.shape[0]):
            for n in range(v.shape[1]):
                w.writerow([br, n, f"{x[br, n]:.{digits}g}", f"{v[br, n]:.{digits}g}"])


def tol_scale_from_env() -> float:
    raw = os.environ.get("QFACTOR_TOL_SCALE", "1")
    try:
        s = float(raw)
    except ValueError as exc:
        raise ConfigError(f"QFACTOR_TOL_SCALE={raw!r} is not a number") from exc
    if not s > 0:
        raise ConfigError("QFACTOR_TOL_SCALE must be positive")
    return s


def run(config, out_dir: str | Path | None = None, parallel: bool = False,
        depth_override: int | None = None) -> tuple[int, dict]:
    """Execute a config; returns (exit code, report).  Raises ConfigError,
    ParameterError or DomainError for exit codes 2 and 3."""
    cfg = load_config(config)
    scale = tol_scale_from_env()
    tasks = expand_tasks(cfg["tasks"])
    for t in tasks:
        if t["type"] == "oscillator" or (t["type"] == "oracle-compare" and cfg["params"].get("family") in
                                         ("harmonic", "isotropic3d")):
            fam = cfg["params"].get("family")
            if fam not in ("harmonic", "isotropic3d"):
                raise ConfigError(f"task {t['id']} needs params.family harmonic or isotropic3d")
    base = make_setup(cfg, depth_override) if tasks else None
    setups = [task_setup(base, cfg, t, depth_override) for t in tasks]
    if parallel and len(tasks) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda st: run_task(st[0], st[1], scale), zip(setups, tasks)))
    else:
        results = [run_task(st, t, scale) for st, t in zip(setups, tasks)]
    out = cfg.get("output", {})
    digits = int(out.get("precision", 12))
    fmt = out.get("format", "json")
    report_tasks = []
    dest = Path(out_dir) if out_dir is not None else None
    if dest is not None:
        dest.mkdir(parents=True, exist_ok=True)
    for res in results:
        entry = {"id": res.id, "type": res.type, "inputs": res.inputs, "outputs": res.outputs,
                 "checks": res.checks, "status": res.status}
        if dest is not None and fmt == "csv" and res.functions:
            files = []
            for name, fn in res.functions.items():
                fname = f"{res.id}_{name}.csv"
                write_csv(dest / fname, fn, digits)
                files.append(fname)
            entry["files"] = files
        report_tasks.append(entry)
    status = "pass" if all(t["status"] == "pass" for t in report_tasks) else "fail"
    report = _rounded({"schema_version": SCHEMA_VERSION, "status": status, "tol_scale": scale,
                       "tasks": report_tasks}, digits)
    if dest is not None:
        name = out.get("path", "report.json")
        (dest / name).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return (0 if status == "pass" else 1), report


# -- demos -------------------------------------------------------------------------


def _q_pow(q: float, m: int) -> float:
    return float(q**m)


DEMOS = {
    "qhahn": {
        "params": {"family": "qhahn", "q": "0.5", "max_k": 8},
        "lattice": {"b": 1.0, "depth": 200},
        "tasks": [
            {"id": "chain", "type": "build-chain", "k_max": 4},
            {"id": "hahn", "type": "qhahn", "k": 8, "n_max": 8},
            {"id": "factorization", "type": "verify", "k": [0, 1, 2, 3], "functions": 20, "seed": 1,
             "lattice": {"x_min": 0.05}},
        ],
        "output": {"format": "csv", "path": "report.json", "precision": 12},
    },
    "oscillator": {
        "params": {"family": "harmonic", "q": "0.5", "a0": 1.0, "a1": 0.5, "h": 0.3},
        "lattice": {"b": 4096.0, "depth": 14, "extended_precision": True},
        "tasks": [{"id": "harmonic", "type": "oscillator", "k": 3, "n_max": 5}],
        "output": {"format": "json", "path": "report.json", "precision": 12},
    },
    "isotropic3d": {
        "params": {"family": "isotropic3d", "q": "0.9", "a0": 1.0, "a1": 0.5, "h": (0.9**6 / 0.1) ** 2},
        "lattice": {"b": _q_pow(0.9, -60), "depth": 300},
        "tasks": [
            {"id": "iso", "type": "oscillator", "k": 5, "n_max": 5, "lattice": {"b": 1.0, "x_min": 0.05}},
            {"id": "oracle", "type": "oracle-compare", "k": 5, "n_max": 5},
        ],
        "output": {"format": "json", "path": "report.json", "precision": 12},
    },
    "limit": {
        "params": {"family": "harmonic", "q": "0.9"},
        "lattice": {"b": 1.0, "depth": 10},
        "tasks": [
            {"id": "harmonic", "type": "limit-scan", "quantity": "harmonic_lambda", "q_list": [0.9, 0.99, 0.999]},
            {"id": "isotropic", "type": "limit-scan", "quantity": "isotropic_lambda", "q_list": [0.9, 0.99, 0.999]},
            {"id": "hahn", "type": "limit-scan", "quantity": "hahn_lambda", "q_list": [0.9, 0.99, 0.999]},
            {"id": "riccati", "type": "limit-scan", "quantity": "riccati", "kwargs": {"chain": "hahn"}},
        ],
        "output": {"format": "json", "path": "report.json", "precision": 12},
    },
}


# -- entry point ---------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="qfactor", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    pr = sub.add_parser("run", help="execute a run config")
    pr.add_argument("config")
    pr.add_argument("--out", default=".", help="directory for report and CSV files")
    pr.add_argument("--parallel", action="store_true", help="run tasks concurrently")
    pr.add_argument("--depth-override", type=int, default=None, metavar="N")
    sub.add_parser("schema", help="print the report JSON schema")
    pd = sub.add_parser("demo", help="print a canned config")
    pd.add_argument("name", choices=sorted(DEMOS))
    args = ap.parse_args(argv)

    if args.command == "schema":
        print(json.dumps(report_schema(), indent=2, sort_keys=True))
        return 0
    if args.command == "demo":
        print(json.dumps(DEMOS[args.name], indent=2))
        return 0
    try:
        code, report = run(args.config, args.out, args.parallel, args.depth_override)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"qfactor: config error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, DomainError) as exc:
        print(f"qfactor: domain error: {exc}", file=sys.stderr)
        return 3
    for t in report["tasks"]:
        for c in t["checks"]:
            if c["status"] == "fail":
                print(f"FAIL {t['id']}: {c['name']} residual={c['residual']} tol={c['tolerance']}", file=sys.stderr)
    print(f"{report['status']}: {len(report['tasks'])} task(s)")
    return code


if __name__ == "__main__":
    sys.exit(main())
