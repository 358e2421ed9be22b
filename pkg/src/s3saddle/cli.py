"""Command-line interface: ``s3saddle <command> ...``.

Every command prints one JSON object on stdout.  Exit status is 0 on
success, 2 when a contract or verification fails, and 1 on usage errors
(bad flags, unreadable or malformed input files, empty suites).

The default tolerance is 1e-8; ``--tol`` overrides it, and so does the
``S3SADDLE_TOL`` environment variable when ``--tol`` is absent.  The
effective value and its source are echoed in every report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    arrow_bounds,
    check_necessary_invertibility,
    check_sufficient_invertibility,
    eig_sym,
    spectral_summary,
    tridiag_bounds,
    verify_containment,
)
from .block_model import BlockMatrix3, BlockSystem3, Layout, assemble_dense, check_conditions, classify_dense
from .errors import BoundInapplicableError, ManifestError, S3Error
from .factor import Variant, expected_inertia, inertia_of, ldl
from .io import dumps, load_manifest, save_manifest, save_multi_manifest, to_jsonable
from .krylov import gmres, minres
from .precond import Kind, build, preconditioned_spectrum, verify_theorem
from .problems import GeneratorKind, GeneratorSpec, generate
from .suite import CSV_COLUMNS, DEFAULT_SUITE, records_csv, run_suite, validate_suite

TOL_ENV = "S3SADDLE_TOL"
DEFAULT_TOL = 1e-8

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Config echo and hashing


def _resolve_tol(args):
    if args.tol is not None:
        return args.tol, "flag"
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return float(env), f"env:{TOL_ENV}"
        except ValueError as exc:
            raise UsageError(f"{TOL_ENV}='{env}' is not a number") from exc
    return DEFAULT_TOL, "default"


def _input_files(manifest_path):
    """The manifest and every block file it references, in a fixed order."""
    path = Path(manifest_path)
    files = [path]
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError):
        return files
    refs = []
    if isinstance(data, dict):
        if isinstance(data.get("blocks"), dict):
            refs = [v for v in data["blocks"].values() if isinstance(v, str)]
        elif isinstance(data.get("matrix"), str):
            refs = [data["matrix"]]
        else:
            refs = [d.get("block") for d in data.get("diag_blocks", []) if isinstance(d, dict)]
            refs += list(data.get("off_blocks", []))
    files += [path.parent / r for r in refs if isinstance(r, str)]
    return files


def config_hash(config, files=()):
    """SHA-256 over the canonical config JSON and the bytes of every input file."""
    h = hashlib.sha256()
    h.update(json.dumps(config, sort_keys=True, default=str).encode())
    for f in files:
        h.update(str(f).encode())
        try:
            h.update(Path(f).read_bytes())
        except OSError:
            h.update(b"<missing>")
    return h.hexdigest()


def _config(args, argv, tol, tol_source):
    return {
        "command": args.command,
        "argv": list(argv),
        "seed": args.seed,
        "tol": tol,
        "tol_source": tol_source,
        "threads": args.threads,
        "version": __version__,
    }


def _emit(payload, out=None):
    (out or sys.stdout).write(dumps(payload) + "\n")


# --------------------------------------------------------------------------
# Commands


def _load_system(path):
    obj = load_manifest(path)
    if not isinstance(obj, BlockSystem3):
        raise UsageError(f"{path}: raw matrix manifests can only be classified")
    return obj


def _parse_sizes(text):
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.replace("x", ",").split(",") if t)
    except ValueError as exc:
        raise UsageError(f"--sizes expects comma-separated integers, got '{text}'") from exc


def _parse_params(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got '{item}'")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except ValueError:
            out[k] = v
    return out


def cmd_generate(args, tol):
    spec = GeneratorSpec(args.kind, _parse_sizes(args.sizes), _parse_params(args.param), args.seed)
    obj = generate(spec)
    out = Path(args.out)
    if spec.kind is GeneratorKind.MULTI_SADDLE:
        path = save_multi_manifest(obj, out, stem=args.stem)
        return EXIT_OK, {"manifest": str(path), "kind": spec.kind.value, "sizes": list(obj.sizes)}, [path]
    path = save_manifest(obj, out, stem=args.stem, inline=args.inline)
    report = check_conditions(obj)
    return EXIT_OK, {
        "manifest": str(path),
        "kind": spec.kind.value,
        "layout": obj.layout.value,
        "label": obj.label,
        "sizes": list(obj.sizes),
        "generator": {"kind": spec.kind.value, "sizes": list(spec.sizes), "params": spec.params, "seed": spec.seed},
        "conditions": to_jsonable(report),
    }, _input_files(path)


def cmd_classify(args, tol):
    obj = load_manifest(args.manifest)
    if isinstance(obj, BlockMatrix3):
        c = classify_dense(obj, args.nullity_threshold)
        return EXIT_OK, {"raw": True, "classification": to_jsonable(c)}, None
    report = check_conditions(obj, args.nullity_threshold)
    inertia = inertia_of(obj)
    payload = {
        "raw": False,
        "layout": obj.layout.value,
        "sizes": list(obj.sizes),
        "conditions": to_jsonable(report),
        "all_hold": report.all_hold,
        "necessary_invertibility": to_jsonable(check_necessary_invertibility(obj)),
        "sufficient_invertibility": to_jsonable(check_sufficient_invertibility(obj)),
        "inertia": to_jsonable(inertia),
        "expected_inertia": to_jsonable(expected_inertia(obj)),
    }
    return EXIT_OK, payload, None


def cmd_factor(args, tol):
    sys_ = _load_system(args.manifest)
    f = ldl(sys_, args.variant)
    schur = {}
    for k, S in f.schur.items():
        ev = eig_sym(S)
        schur[k] = {"lambda_min": float(ev[0]), "lambda_max": float(ev[-1])}
    res = f.reconstruction_residual()
    inertia = inertia_of(f.M)
    d_inertia = inertia_of(f.D)
    payload = {
        "variant": f.variant.value,
        "sizes": list(f.sizes),
        "schur": schur,
        "reconstruction_residual": res,
        "inertia": to_jsonable(inertia),
        "middle_factor_inertia": to_jsonable(d_inertia),
        "expected_inertia": to_jsonable(expected_inertia(sys_)),
        "ok": res <= 1e-10,
    }
    return (EXIT_OK if payload["ok"] else EXIT_FAIL), payload, None


def cmd_bounds(args, tol):
    sys_ = _load_system(args.manifest)
    summ = spectral_summary(sys_)
    payload = {"layout": summ.layout.value, "summary": to_jsonable(summ)}
    try:
        rep = arrow_bounds(summ) if summ.layout is Layout.ARROW else tridiag_bounds(summ)
    except BoundInapplicableError as exc:
        payload.update(verdict="inapplicable", reason=str(exc))
        return EXIT_FAIL, payload, None
    M = assemble_dense(sys_)
    scale = float(np.linalg.norm(M, 2))
    ev = eig_sym(M)
    verify_containment(ev, rep, tol * scale)
    payload.update(
        verdict="contained" if rep.contained else "violated",
        report=to_jsonable(rep),
        spectrum_extremes={"min": float(ev[0]), "max": float(ev[-1])},
        tolerance_absolute=tol * scale,
    )
    return (EXIT_OK if rep.contained else EXIT_FAIL), payload, None


def cmd_spectrum(args, tol):
    sys_ = _load_system(args.manifest)
    p = build(args.kind, sys_, alpha=args.alpha)
    if args.theorem == "none" or p.kind is Kind.SHIFT_SPLIT and args.theorem is None:
        ev = preconditioned_spectrum(sys_, p)
        return EXIT_OK, {"kind": p.kind.value, "observed": ev, "theorem_id": None}, None
    v = verify_theorem(sys_, p, theorem_id=args.theorem, tol=tol)
    payload = {"kind": p.kind.value, "side": p.side.value, **to_jsonable(v)}
    return (EXIT_OK if v.matched else EXIT_FAIL), payload, None


def _rhs(spec, n):
    if spec == "ones":
        return np.ones(n)
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"--rhs random:SEED needs an integer seed, got '{spec}'") from exc
        return np.random.default_rng(seed).standard_normal(n)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--rhs: '{spec}' is not 'ones', 'random:SEED' or an existing file")
    from .io import read_mtx

    b = read_mtx(path).ravel() if path.suffix == ".mtx" else np.loadtxt(path).ravel()
    if b.size != n:
        raise UsageError(f"--rhs file has {b.size} entries, expected {n}")
    return b


def cmd_solve(args, tol):
    sys_ = _load_system(args.manifest)
    p = None if args.precond == "none" else build(args.precond, sys_, alpha=args.alpha)
    method = args.method
    if method is None:
        method = "minres" if p is None or p.symmetric else "gmres"
    b = _rhs(args.rhs, sys_.dim)
    fn = minres if method == "minres" else gmres
    x, stats = fn(sys_, p, b, tol=tol, maxit=args.maxit)
    true_res = float(np.linalg.norm(b - assemble_dense(sys_) @ x) / max(np.linalg.norm(b), 1e-300))
    payload = {"method": method, "preconditioner": args.precond, **to_jsonable(stats), "true_relative_residual": true_res}
    return (EXIT_OK if stats.converged else EXIT_FAIL), payload, None


def _parse_seeds(text):
    if text is None:
        return None
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            seeds += list(range(int(a), int(b) + 1))
        else:
            seeds.append(int(part))
    return seeds


def cmd_verify_all(args, tol):
    base = "."
    files = []
    if args.suite:
        path = Path(args.suite)
        try:
            suite = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"{path}: cannot read suite: {exc}") from exc
        base = str(path.parent)
        files.append(path)
    else:
        suite = json.loads(json.dumps(DEFAULT_SUITE))
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError as exc:
        raise UsageError(f"--seeds: {exc}") from exc
    if seeds is not None:
        suite["seeds"] = seeds
    try:
        validate_suite(suite, base)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for e in suite["entries"]:
        if "manifest" in e:
            files += _input_files(Path(base) / e["manifest"])
    t0 = time.perf_counter()
    records = run_suite(suite, tol=tol, threads=args.threads, base=base)
    wall = time.perf_counter() - t0
    failed = [r for r in records if not r.matched]
    report = {
        "suite": suite,
        "csv_columns": list(CSV_COLUMNS),
        "records": [to_jsonable(r) for r in records],
        "all_matched": not failed,
        "failed": [{"entry": r.entry, "theorem_id": r.theorem_id, "seed": r.seed, "source": r.source,
                    "preconditioner": r.preconditioner, "detail": r.detail} for r in failed],
        "timings": {"total_seconds": wall, "per_record_seconds": [r.seconds for r in records]},
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.csv").write_text(records_csv(records))
        report["csv_path"] = str(out / "summary.csv")
        report["json_path"] = str(out / "records.json")
    for r in failed:
        print(f"FAILED: entry {r.entry} theorem {r.theorem_id} seed {r.seed} ({r.source}, {r.preconditioner}): "
              f"{r.detail}", file=sys.stderr)
    return (EXIT_OK if not failed else EXIT_FAIL), report, files


# --------------------------------------------------------------------------
# Parser and entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="s3saddle", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="random seed for generators (default 0)")
    ap.add_argument("--tol", type=float, default=None, help=f"tolerance (default 1e-8, or ${TOL_ENV})")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for verify-all (default 1)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated instance as a manifest")
    g.add_argument("--kind", required=True, choices=[k.value for k in GeneratorKind])
    g.add_argument("--sizes", default="", help="comma-separated sizes, e.g. 40,25,10")
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--stem", default="system", help="file stem (default 'system')")
    g.add_argument("--inline", action="store_true", help="store blocks inline instead of .mtx files")

    c = sub.add_parser("classify", help="membership conditions, invertibility tests and inertia")
    c.add_argument("manifest")
    c.add_argument("--nullity-threshold", type=int, default=1)

    f = sub.add_parser("factor", help="block-LDL factorization")
    f.add_argument("manifest")
    f.add_argument("--variant", choices=[v.value for v in Variant], default=None)

    b = sub.add_parser("bounds", help="eigenvalue intervals and containment check")
    b.add_argument("manifest")

    s = sub.add_parser("spectrum", help="preconditioned spectrum and theorem verdict")
    s.add_argument("manifest")
    s.add_argument("--kind", required=True, choices=[k.value for k in Kind])
    s.add_argument("--theorem", default=None, help="theorem id to check (default: inferred; 'none' to skip)")
    s.add_argument("--alpha", type=float, default=1.0, help="shift for shift_split")

    v = sub.add_parser("solve", help="preconditioned Krylov solve")
    v.add_argument("manifest")
    v.add_argument("--precond", default="none", choices=["none", *[k.value for k in Kind]])
    v.add_argument("--method", choices=["minres", "gmres"], default=None)
    v.add_argument("--rhs", default="ones", help="'ones', 'random:SEED' or a file (.mtx or text)")
    v.add_argument("--maxit", type=int, default=None)
    v.add_argument("--alpha", type=float, default=1.0)

    a = sub.add_parser("verify-all", help="run a verification suite")
    a.add_argument("--suite", default=None, help="suite JSON (default: built-in suite)")
    a.add_argument("--seeds", default=None, help="seed list such as 1-20 or 1,3,5")
    a.add_argument("--out", default=None, help="directory for summary.csv and records.json")
    return ap


COMMANDS = {
    "generate": cmd_generate,
    "classify": cmd_classify,
    "factor": cmd_factor,
    "bounds": cmd_bounds,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "verify-all": cmd_verify_all,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        tol, tol_source = _resolve_tol(args)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        config = _config(args, argv, tol, tol_source)
        t0 = time.perf_counter()
        code, payload, files = COMMANDS[args.command](args, tol)
        elapsed = time.perf_counter() - t0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (S3Error, np.linalg.LinAlgError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if files is None:
        files = _input_files(args.manifest) if getattr(args, "manifest", None) else []
    report = {"config": config, "config_hash": config_hash(config, files), "wall_seconds": elapsed, **payload}
    if args.command == "verify-all" and args.out:
        Path(report["json_path"]).write_text(dumps(report) + "\n")
    _emit(report)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
