"""Batch verification of (generator, preconditioner, theorem) triples.

A suite is a JSON object::

    {"seeds": [1, 2, ...],
     "entries": [{"generator": {"kind": "random_tridiag", "sizes": [40, 25, 10],
                                "params": {"a2_zero": true, "a3_zero": true}},
                  "preconditioner": "pd_tri",
                  "theorem": "pdt_six_eigenvalues",
                  "solver": "minres", "max_iterations": 7}]}

An entry may name a ``"manifest"`` path instead of a generator, and may give
its own ``"seeds"``.  ``"preconditioner": "none"`` with theorem
``"arrow_bounds"`` or ``"tridiag_bounds"`` checks the unpreconditioned
eigenvalue intervals.
"""

from __future__ import annotations

import csv
import io as _io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import arrow_bounds, eig_sym, spectral_summary, tridiag_bounds, verify_containment
from .block_model import Layout, assemble_dense
from .errors import S3Error
from .io import load_manifest
from .krylov import gmres, minres
from .precond import THEOREMS, build, verify_theorem
from .problems import GeneratorSpec, generate

CSV_COLUMNS = ("theorem_id", "seed", "sizes", "matched", "max_violation", "iterations")
BOUND_THEOREMS = ("arrow_bounds", "tridiag_bounds")

DEFAULT_SEEDS = list(range(1, 21))


def _entry(kind, sizes, pc, theorem, solver=None, max_it=None, seeds=None, **params):
    e = {"generator": {"kind": kind, "sizes": list(sizes), "params": params},
         "preconditioner": pc, "theorem": theorem}
    if solver:
        e["solver"] = solver
        e["max_iterations"] = max_it
    if seeds is not None:
        e["seeds"] = seeds
    return e


DEFAULT_SUITE = {
    "seeds": DEFAULT_SEEDS,
    "entries": [
        _entry("random_tridiag", (40, 25, 10), "pd_tri", "pdt_six_eigenvalues", "minres", 7,
               a2_zero=True, a3_zero=True),
        _entry("random_tridiag", (40, 25, 10), "pd_tri", "pdt_planted_nullity", a2_zero=True, b2_nullity=2),
        _entry("random_tridiag", (20, 12, 6), "pd_tri", "pdt_intervals"),
        _entry("random_tridiag", (20, 12, 6), "pt_tri", "ptt_minimal_polynomial", "gmres", 3),
        _entry("random_arrow", (20, 6, 5), "pd1_arrow", "pd1_gamma_intervals", a2_zero=True, a3_zero=True),
        _entry("random_arrow", (20, 6, 5), "pd2_arrow", "pd2_unit_golden", a2_zero=True, a3_zero=True),
        _entry("random_arrow", (20, 6, 5), "pt1_arrow", "pt1_minimal_polynomial", "gmres", 3),
        _entry("random_arrow", (20, 6, 5), "pt2_arrow", "pt2_real_interval", a2_zero=True),
        _entry("random_arrow", (12, 4, 5), "none", "arrow_bounds"),
        _entry("random_tridiag", (12, 7, 4), "none", "tridiag_bounds"),
        _entry("constrained_lsq", (10, 6, 3), "pd_tri", "pdt_six_eigenvalues", "minres", 7),
        _entry("pdeco_1d", (8,), "pd_tri", "pdt_intervals", "minres", None, seeds=[0], beta=1e-2),
        _entry("pdeco_1d", (8,), "none", "tridiag_bounds", seeds=[0], beta=1e-2),
        _entry("ipm_step", (10, 4), "pt1_arrow", "pt1_minimal_polynomial", "gmres", 3),
    ],
}


@dataclass
class Record:
    entry: int
    theorem_id: str
    seed: int
    sizes: tuple
    matched: bool
    max_violation: float
    iterations: int | None
    source: str
    preconditioner: str
    detail: str
    seconds: float = 0.0
    extras: dict = field(default_factory=dict)

    def csv_row(self):
        it = "" if self.iterations is None else str(self.iterations)
        return [self.theorem_id, str(self.seed), "x".join(str(n) for n in self.sizes),
                "true" if self.matched else "false", format(self.max_violation, ".17g"), it]


def validate_suite(suite, base="."):
    """Check the suite shape; raise ValueError with a precise message."""
    if not isinstance(suite, dict) or not isinstance(suite.get("entries"), list):
        raise ValueError("suite must be an object with an 'entries' list")
    if not suite["entries"]:
        raise ValueError("suite has no entries")
    for i, e in enumerate(suite["entries"]):
        if ("generator" in e) == ("manifest" in e):
            raise ValueError(f"entry {i}: give exactly one of 'generator' or 'manifest'")
        th = e.get("theorem")
        if th not in THEOREMS and th not in BOUND_THEOREMS:
            raise ValueError(f"entry {i}: unknown theorem '{th}'")
        if th in BOUND_THEOREMS and e.get("preconditioner", "none") != "none":
            raise ValueError(f"entry {i}: bound theorems take preconditioner 'none'")
        if "manifest" in e:
            path = Path(base) / e["manifest"]
            if not path.exists():
                raise ValueError(f"entry {i}: manifest '{e['manifest']}' not found")
        seeds = e.get("seeds", suite.get("seeds", DEFAULT_SEEDS))
        if not seeds:
            raise ValueError(f"entry {i}: empty seed list")


def _instance(e, seed, base):
    if "manifest" in e:
        return load_manifest(Path(base) / e["manifest"]), str(e["manifest"])
    g = e["generator"]
    spec = GeneratorSpec(g["kind"], tuple(g.get("sizes", ())), dict(g.get("params", {})), int(seed))
    return generate(spec), g["kind"]


def _check_bounds(sys, theorem, tol):
    M = assemble_dense(sys)
    summ = spectral_summary(sys)
    want = Layout.ARROW if theorem == "arrow_bounds" else Layout.TRIDIAGONAL
    if summ.layout is not want:
        return False, float("nan"), f"theorem needs layout '{want.value}'", {}
    rep = arrow_bounds(summ) if want is Layout.ARROW else tridiag_bounds(summ)
    scale = float(np.linalg.norm(M, 2))
    verify_containment(eig_sym(M), rep, tol * scale)
    detail = (f"negative [{rep.negative_interval.lo:.6g}, {rep.negative_interval.hi:.6g}], positive "
              f"[{rep.positive_interval.lo:.6g}, {rep.positive_interval.hi:.6g}]; tolerance {tol:g}*||M||")
    return rep.contained, rep.max_violation, detail, {}


def run_one(index, e, seed, tol, base=".", bound_tol=1e-10):
    """Evaluate one (entry, seed) pair.  Errors become unmatched records."""
    t0 = time.perf_counter()
    theorem = e["theorem"]
    pc = e.get("preconditioner", "none")
    sizes, source, iterations, extras = (), e.get("manifest") or e["generator"]["kind"], None, {}
    try:
        sys, source = _instance(e, seed, base)
        sizes = sys.sizes
        if theorem in BOUND_THEOREMS:
            matched, worst, detail, extras = _check_bounds(sys, theorem, bound_tol)
        else:
            p = build(pc, sys)
            v = verify_theorem(sys, p, theorem_id=theorem, tol=tol)
            matched, worst, detail, extras = v.matched, v.max_violation, v.detail, v.extras
            solver = e.get("solver")
            if solver:
                fn = minres if solver == "minres" else gmres
                _, stats = fn(sys, p, np.ones(sys.dim), tol=tol)
                iterations = stats.iterations
                limit = e.get("max_iterations")
                ok = stats.converged and (limit is None or iterations <= limit)
                detail += f"; {solver} {iterations} iterations, residual {stats.relative_residual:.2e}"
                if not ok:
                    detail += f" (limit {limit}, converged {stats.converged})"
                matched = matched and ok
    except (S3Error, ValueError, np.linalg.LinAlgError) as exc:
        matched, worst, detail = False, float("inf"), f"error: {exc}"
    return Record(index, theorem, int(seed), tuple(sizes), bool(matched), float(worst), iterations, source, pc,
                  detail, time.perf_counter() - t0, extras)


def run_suite(suite, tol=1e-8, threads=1, base=".", bound_tol=1e-10):
    """Run every (entry, seed) pair; records come back sorted by (entry, seed)."""
    validate_suite(suite, base)
    jobs = []
    for i, e in enumerate(suite["entries"]):
        for seed in e.get("seeds", suite.get("seeds", DEFAULT_SEEDS)):
            jobs.append((i, e, seed))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda j: run_one(*j, tol=tol, base=base, bound_tol=bound_tol), jobs))
    else:
        records = [run_one(*j, tol=tol, base=base, bound_tol=bound_tol) for j in jobs]
    return sorted(records, key=lambda r: (r.entry, r.seed))


def records_csv(records):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()
