"""Batch experiments: parse a JSON config, run the instance matrix, write reports.

The matrix is ``rings x theorems x seeds``.  Instances fail soft (an error is
recorded and the run continues) but any violated proof chain makes the run's
exit status nonzero.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import random
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import sets as S
from .graph import DEFAULT_MAX_N, IMPLICIT, MATERIALIZED, SPGraph, certify, degree_check, is_connected, lambda_bound
from .harness import THEOREMS, ChainViolation, ExpansionReport, evaluate_theorem
from .rings import DEFAULT_ENUMERATION_CAP, RingError, RingSpec, parse_ring

log = logging.getLogger(__name__)

ENV_MAX_N = "SUMPRODUCT_MAX_N"
ENV_ENUM_CAP = "SUMPRODUCT_ENUM_CAP"

SET_ROLES = ("A", "B", "C")
DEFAULT_SET = {"kind": "random-units", "size": 4}
DEFAULT_FUNCS = {"g": {"func": "identity"}, "h": {"func": "constant", "value": 1}}


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def env_caps() -> dict[str, int]:
    caps = {"max_n": DEFAULT_MAX_N, "enumeration": DEFAULT_ENUMERATION_CAP}
    for key, var in (("max_n", ENV_MAX_N), ("enumeration", ENV_ENUM_CAP)):
        if os.environ.get(var):
            try:
                caps[key] = int(os.environ[var])
            except ValueError as exc:
                raise ConfigError(f"${var}", "must be an integer") from exc
    return caps


def derive_seed(seed: int, *labels: str) -> int:
    """Stable per-role seed, independent of hash randomization."""
    digest = hashlib.sha256(":".join([str(seed), *labels]).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ExperimentConfig:
    rings: list[str]
    theorems: list[str]
    seeds: list[int]
    sets: dict[str, dict]
    functions: dict[str, dict]
    domain: dict
    certify: bool
    caps: dict[str, int]
    jobs: int = 1
    out: str | None = None

    def normalized(self) -> dict:
        return {
            "rings": self.rings,
            "theorems": self.theorems,
            "seeds": self.seeds,
            "sets": self.sets,
            "functions": self.functions,
            "domain": self.domain,
            "certify": self.certify,
            "caps": self.caps,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.normalized(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _listify(doc: dict, single: str, plural: str) -> tuple[list, str] | tuple[None, None]:
    if plural in doc:
        val = doc[plural]
        if not isinstance(val, list):
            raise ConfigError(plural, "must be a list")
        return val, plural
    if single in doc:
        return [doc[single]], single
    return None, None


def _check_int(val, path: str, minimum: int | None = None) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(path, f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return val


_SET_KINDS = {"random-units", "random-elements", "geometric", "geometric-progression", "interval",
              "explicit", "subgroup", "domain", "random-domain"}
_FUNC_KINDS = {"identity", "monomial", "constant", "table", "random"}


def _check_set(desc, path: str) -> dict:
    if not isinstance(desc, dict):
        raise ConfigError(path, "set descriptor must be an object")
    kind = desc.get("kind")
    if kind not in _SET_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown set kind {kind!r}")
    if kind in ("random-units", "random-elements", "random-domain", "interval"):
        _check_int(desc.get("size"), f"{path}.size", 0)
    if kind in ("geometric", "geometric-progression"):
        _check_int(desc.get("length", desc.get("size")), f"{path}.length", 1)
    if kind == "explicit" and not isinstance(desc.get("elements"), list):
        raise ConfigError(f"{path}.elements", "explicit sets need an element list")
    return dict(desc)


def _check_func(desc, path: str) -> dict:
    if not isinstance(desc, dict):
        raise ConfigError(path, "function descriptor must be an object")
    kind = desc.get("func")
    if kind not in _FUNC_KINDS:
        raise ConfigError(f"{path}.func", f"unknown function kind {kind!r}")
    if kind == "monomial":
        _check_int(desc.get("k"), f"{path}.k")
    if kind == "table" and not isinstance(desc.get("pairs"), list):
        raise ConfigError(f"{path}.pairs", "table functions need a pair list")
    return dict(desc)


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a JSON experiment config; errors name the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")
    overrides = overrides or {}

    caps = env_caps()
    raw_caps = doc.get("caps", {})
    if not isinstance(raw_caps, dict):
        raise ConfigError("caps", "must be an object")
    for key, val in raw_caps.items():
        if key not in caps:
            raise ConfigError(f"caps.{key}", "unknown cap")
        caps[key] = _check_int(val, f"caps.{key}", 1)
    if overrides.get("max_n") is not None:
        caps["max_n"] = _check_int(overrides["max_n"], "--max-n", 1)

    rings, rpath = _listify(doc, "ring", "rings")
    if not rings:
        raise ConfigError("rings", "at least one ring is required")
    for i, text_spec in enumerate(rings):
        path = f"{rpath}[{i}]" if rpath == "rings" else rpath
        if not isinstance(text_spec, str):
            raise ConfigError(path, "ring spec must be a string")
        try:
            ring = parse_ring(text_spec)
        except RingError as exc:
            raise ConfigError(path, str(exc)) from exc
        if ring.order > caps["enumeration"]:
            raise ConfigError(path, f"ring order {ring.order} exceeds caps.enumeration={caps['enumeration']}")

    theorems, tpath = _listify(doc, "theorem", "theorems")
    theorems = theorems or []
    for i, t in enumerate(theorems):
        if t not in THEOREMS:
            path = f"{tpath}[{i}]" if tpath == "theorems" else tpath
            raise ConfigError(path, f"unknown theorem {t!r}; expected one of {', '.join(THEOREMS)}")

    do_certify = doc.get("certify", not theorems)
    if not isinstance(do_certify, bool):
        raise ConfigError("certify", "must be true or false")
    if do_certify:
        for i, text_spec in enumerate(rings):
            n = parse_ring(text_spec).order ** 2
            if n > caps["max_n"]:
                raise ConfigError(f"rings[{i}]", f"certification needs n={n} <= caps.max_n={caps['max_n']}")

    seeds, spath = _listify(doc, "seed", "seeds")
    if overrides.get("seed") is not None:
        seeds, spath = [overrides["seed"]], "--seed"
    if theorems and not seeds:
        raise ConfigError("seed", "missing seed: every instance needs an explicit seed")
    seeds = [_check_int(s, f"{spath}[{i}]") for i, s in enumerate(seeds or [])]

    raw_sets = doc.get("sets", {k: doc[k] for k in SET_ROLES if k in doc})
    if not isinstance(raw_sets, dict):
        raise ConfigError("sets", "must be an object with keys A, B, C")
    sets = {}
    for role in SET_ROLES:
        sets[role] = _check_set(raw_sets.get(role, DEFAULT_SET), f"sets.{role}")

    raw_funcs = doc.get("functions", {})
    if not isinstance(raw_funcs, dict):
        raise ConfigError("functions", "must be an object with keys g, h")
    funcs = {k: _check_func(raw_funcs.get(k, DEFAULT_FUNCS[k]), f"functions.{k}") for k in ("g", "h")}

    domain = doc.get("domain", {"kind": "units"})
    if not isinstance(domain, dict) or domain.get("kind") not in ("units", "subgroup"):
        raise ConfigError("domain.kind", "expected 'units' or 'subgroup'")

    jobs = overrides.get("jobs") or doc.get("jobs", 1)
    jobs = _check_int(jobs, "jobs", 1)
    out = overrides.get("out") or doc.get("out")
    return ExperimentConfig(
        rings=list(rings),
        theorems=list(theorems),
        seeds=seeds,
        sets=sets,
        functions=funcs,
        domain=dict(domain),
        certify=do_certify,
        caps=caps,
        jobs=jobs,
        out=out,
    )


# ---------------------------------------------------------------------------
# building instance inputs


def build_domain(ring: RingSpec, desc: dict) -> S.ElemSet:
    if desc.get("kind") == "subgroup":
        gens = desc.get("generators") or [desc.get("generator", 1)]
        return S.subgroup_generate(ring, *gens).elements
    return S.ElemSet(ring, tuple(u.code for u in ring.units()), "units")


def build_set(ring: RingSpec, desc: dict, seed: int, role: str, domain: S.ElemSet) -> S.ElemSet:
    kind = desc["kind"]
    rseed = derive_seed(seed, role)
    if kind == "domain":
        return domain
    if kind == "random-domain":
        size = desc["size"]
        if size > len(domain):
            raise ValueError(f"{role}: requested {size} elements from a domain of {len(domain)}")
        return S.ElemSet(ring, tuple(sorted(random.Random(rseed).sample(domain.codes, size))), S.RANDOM_UNITS)
    if kind == "explicit":
        return S.ElemSet.of(ring, desc["elements"])
    if kind in ("geometric", "geometric-progression"):
        return S.geometric(ring, desc.get("base", 2), desc.get("length", desc.get("size")), desc.get("start"))
    params = {k: v for k, v in desc.items() if k not in ("kind", "size")}
    return S.set_family(ring, kind, desc["size"], rseed, **params)


def build_function(ring: RingSpec, desc: dict, domain: S.ElemSet, seed: int, name: str) -> S.FuncTable:
    kind = desc["func"]
    if kind == "identity":
        return S.identity(domain)
    if kind == "monomial":
        return S.monomial(domain, desc["k"], desc.get("coeff", 1))
    if kind == "constant":
        return S.constant(domain, desc.get("value", 1))
    if kind == "table":
        return S.from_pairs(domain, desc["pairs"])
    return S.random_table(domain, derive_seed(seed, "func", name))


# ---------------------------------------------------------------------------
# running


@dataclass
class InstanceResult:
    ring: str
    theorem: str
    seed: int
    status: str  # ok | chain-failed | error
    wall_time: float
    report: dict | None = None
    csv_row: list[str] | None = None
    error: str | None = None


@dataclass
class RunManifest:
    config_hash: str
    instances: list[dict] = field(default_factory=list)
    certificates: list[dict] = field(default_factory=list)
    files: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def chain_failures(self) -> int:
        return sum(1 for i in self.instances if i["status"] == "chain-failed")

    @property
    def errors(self) -> int:
        return sum(1 for i in self.instances if i["status"] == "error")

    @property
    def exit_code(self) -> int:
        return 1 if self.chain_failures else 0

    def to_json(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "instances": self.instances,
            "certificates": self.certificates,
            "files": self.files,
            "wall_time": self.wall_time,
            "chain_failures": self.chain_failures,
            "errors": self.errors,
        }


def run_instance(cfg: ExperimentConfig, ring_text: str, theorem: str, seed: int, lam: float | None) -> InstanceResult:
    start = time.perf_counter()
    ring = parse_ring(ring_text)
    try:
        domain = build_domain(ring, cfg.domain)
        sets = {role: build_set(ring, cfg.sets[role], seed, role, domain) for role in SET_ROLES}
        g = build_function(ring, cfg.functions["g"], domain, seed, "g")
        h = build_function(ring, cfg.functions["h"], domain, seed, "h")
        graph = SPGraph(ring, IMPLICIT, cfg.caps["max_n"])
        rep: ExpansionReport = evaluate_theorem(theorem, g, h, sets["A"], sets["B"], sets["C"], graph, lam=lam, strict=False)
        rep.seed = seed
        status = "ok" if rep.chain_ok else "chain-failed"
        return InstanceResult(ring_text, theorem, seed, status, time.perf_counter() - start, rep.to_json(), rep.csv_row())
    except ChainViolation as exc:
        return InstanceResult(ring_text, theorem, seed, "chain-failed", time.perf_counter() - start, error=str(exc))
    except (ValueError, ArithmeticError) as exc:
        return InstanceResult(ring_text, theorem, seed, "error", time.perf_counter() - start, error=f"{type(exc).__name__}: {exc}")


def certificate_for(ring: RingSpec, max_n: int) -> dict:
    """Spectral certificate when the graph fits in memory, structural checks otherwise."""
    if ring.order**2 <= max_n:
        graph = SPGraph(ring, MATERIALIZED, max_n)
        cert = certify(graph).to_json()
        cert["mode"] = MATERIALIZED
        cert["degree_deviation"] = degree_check(graph)
        return cert
    graph = SPGraph(ring, IMPLICIT, max_n)
    bound = lambda_bound(ring)
    return {
        "ring": ring.label,
        "mode": IMPLICIT,
        "n": graph.n,
        "d": graph.d,
        "lambda": None,
        "bound": bound,
        "bound_holds": None,
        "bound_nontrivial": bound < graph.d,
        "connected": is_connected(graph),
        "non_bipartite": None,
        "residual": None,
    }


def _slug(label: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "_", label).strip("_")


def csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ExpansionReport.CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def run(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> RunManifest:
    """Execute every instance; write certificates, CSV/JSON reports and a manifest."""
    t0 = time.perf_counter()
    out = Path(out_dir or cfg.out or "sumproduct-out")
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.config_hash)
    written: list[Path] = []

    # spectra are computed once per ring, up front, so workers only count edges
    lams: dict[str, float | None] = {}
    for ring_text in cfg.rings:
        ring = parse_ring(ring_text)
        need_spectrum = cfg.certify or (cfg.theorems and ring.order**2 <= cfg.caps["max_n"])
        if not need_spectrum:
            lams[ring_text] = None
            continue
        log.info("certifying %s", ring)
        cert = certificate_for(ring, cfg.caps["max_n"])
        lams[ring_text] = cert["lambda"]
        if cfg.certify:
            manifest.certificates.append(cert)
            path = out / f"certificate_{_slug(ring.label)}.json"
            path.write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
            written.append(path)

    matrix = [(r, t, s) for r in cfg.rings for t in cfg.theorems for s in cfg.seeds]
    if cfg.jobs > 1 and len(matrix) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(run_instance, cfg, r, t, s, lams[r]) for r, t, s in matrix]
            results = [f.result() for f in futures]
    else:
        results = [run_instance(cfg, r, t, s, lams[r]) for r, t, s in matrix]

    rows, reports = [], []
    for res in results:
        manifest.instances.append(
            {"ring": res.ring, "theorem": res.theorem, "seed": res.seed, "status": res.status,
             "wall_time": res.wall_time, "error": res.error}
        )
        if res.csv_row is not None:
            rows.append(res.csv_row)
            reports.append(res.report)
        if res.status != "ok":
            log.warning("%s %s seed=%s: %s %s", res.ring, res.theorem, res.seed, res.status, res.error or "")

    if matrix:
        csv_path = out / "report.csv"
        csv_path.write_text(csv_text(rows))
        json_path = out / "report.json"
        doc = {"config_hash": cfg.config_hash, "config": cfg.normalized(), "instances": reports,
               # timings are left out so the JSON mirror is reproducible too
               "errors": [{k: v for k, v in i.items() if k != "wall_time"}
                          for i in manifest.instances if i["status"] != "ok"]}
        json_path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
        written += [csv_path, json_path]

    manifest.files = [p.name for p in written]
    manifest.wall_time = time.perf_counter() - t0
    (out / "manifest.json").write_text(json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n")
    return manifest
