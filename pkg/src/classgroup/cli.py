"""Command-line driver: polynomial in, class group + regulator + units out.

Wires the full pipeline (field construction, factor base, sieving, linear
algebra, unit lattice, Euler-product certification) behind a flat key=value
report with an optional JSON mirror.  Runs are deterministic for a fixed
seed and thread count; relation logs are append-only text and can be
replayed to skip the sieving stage.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import clgrp, factorbase, nfcore, sieve, units
from .nfcore import FieldError, VerificationFailed


class CorruptLog(Exception):
    """Relation log line that does not parse; carries the line number."""


class ConfigError(Exception):
    pass


SAT_PRIMES = (2, 3, 5, 7)


class RunConfig:
    """Validated driver options."""

    def __init__(self, field, bound=None, bach_bound=False, sieve_I=None,
                 sieve_J=None, slack=None, threads=1, seed=0,
                 budget_relations=None, budget_seconds=None,
                 relations_out=None, replay=None, generators=False,
                 no_saturation=False, json_out=False, euler_cutoff=None,
                 verbose=False):
        self.field = tuple(int(c) for c in field)
        self.bound = int(bound) if bound else None
        self.bach_bound = bool(bach_bound)
        self.sieve_I = int(sieve_I) if sieve_I else None
        self.sieve_J = int(sieve_J) if sieve_J else None
        self.slack = float(slack) if slack else None
        self.threads = int(threads)
        self.seed = int(seed)
        self.budget_relations = int(budget_relations) if budget_relations else None
        self.budget_seconds = float(budget_seconds) if budget_seconds else None
        self.relations_out = relations_out
        self.replay = replay
        self.generators = bool(generators)
        self.no_saturation = bool(no_saturation)
        self.json_out = bool(json_out)
        self.euler_cutoff = int(euler_cutoff) if euler_cutoff else None
        self.verbose = bool(verbose)
        if len(self.field) < 3:
            raise ConfigError("field polynomial must have degree >= 2")
        if self.sieve_I is not None and (self.sieve_I < 16 or self.sieve_I % 2):
            raise ConfigError("sieve I must be even and >= 16")
        if self.sieve_J is not None and self.sieve_J < 1:
            raise ConfigError("sieve J must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def _status(cfg, msg):
    print(msg, file=sys.stderr)
    if cfg.verbose:
        sys.stderr.flush()


# ---------------------------------------------------------------------------
# relation log

def _write_log(path, lines):
    if not path:
        return
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def _load_relations(K, fb, path):
    """Parse and re-verify a relation log; exact verification per relation."""
    M = sieve.RelationMatrix(fb)
    rels = []
    with open(path) as fh:
        raw = fh.read().splitlines()
    idx = 0
    for lineno, line in enumerate(raw, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            # a unit relation has an empty exponent field: "R q x y : c : "
            norm = line.rstrip().rstrip(":").rstrip()
            parts = norm.split(" : ")
            if len(parts) == 2:
                parts.append("")
            head, coeffs, exp_field = parts
            tag, qs, xs, ys = head.split()
            if tag != "R":
                raise ValueError(f"bad tag {tag!r}")
            q, x, y = int(qs), int(xs), int(ys)
            ib = tuple(int(t) for t in coeffs.split(","))
            row = [0] * len(fb)
            if exp_field.strip():
                for term in exp_field.strip().split(","):
                    i, e = term.split(":")
                    row[int(i)] = int(e)
        except (ValueError, IndexError) as exc:
            raise CorruptLog(f"line {lineno}: {exc}") from exc
        try:
            true_row = nfcore.verify_relation(K, fb, ib=ib)
        except Exception as exc:
            raise VerificationFailed(
                f"relation {idx} (line {lineno}): {exc}") from exc
        if list(true_row) != row:
            raise VerificationFailed(
                f"relation {idx} (line {lineno}): logged exponents disagree "
                f"with exact factorization")
        rels.append(sieve.Relation(tuple(ib), row, x, y, q, "replay"))
        idx += 1
    M.extend(rels)
    return M


# ---------------------------------------------------------------------------
# pipeline

def _sort_kernel(cands):
    def key(u):
        return max(abs(float(v)) for v in u.real_logs(64))
    return sorted(cands, key=key)


def _build_units(M, cg, est, cfg):
    """Unit basis from the kernel of the relation matrix."""
    cands = _sort_kernel(units.kernel_units(M))
    basis = units.UnitBasis(M._unit_gens)
    rlow = est.hstar / cg.h if cg.h else None
    for u in cands:
        units.insert_unit(basis, u, euler_lower_bound_R=rlow)
        if len(basis.units) == basis.rank:
            units.size_reduce_basis(basis)
    units.size_reduce_basis(basis)
    return basis


def _saturation_sweep(basis, fb, cg, est, cfg, sat_used):
    cert = clgrp.certify(cg.h, basis.regulator, est)
    for _round in range(6):
        if cert.passed or basis.rank == 0:
            break
        hR = cg.h * basis.regulator
        bsat = int(round(2.0 * hR / est.hstar)) + 1
        changed = False
        for p in SAT_PRIMES:
            if p > bsat:
                continue
            before = basis.regulator
            try:
                units.saturate(basis, fb, p)
            except units.RootExtractionFailed as exc:
                _status(cfg, f"status: saturation p={p} gave up: {exc}")
                continue
            if basis.regulator < before * (1 - 1e-12):
                changed = True
                if p not in sat_used:
                    sat_used.append(p)
                cert = clgrp.certify(cg.h, basis.regulator, est)
                if cert.passed:
                    break
        if not changed:
            break
    return cert


def _pipeline(cfg, M, K, fb, timings):
    t1 = time.monotonic()
    cg = clgrp.class_group_from_relations(M, generators=cfg.generators)
    timings["linalg"] = time.monotonic() - t1

    t2 = time.monotonic()
    P0 = cfg.euler_cutoff or clgrp.default_cutoff(fb.bound)
    est = clgrp.euler_hstar(K, P0)
    timings["euler"] = time.monotonic() - t2

    t3 = time.monotonic()
    basis = _build_units(M, cg, est, cfg)
    timings["units"] = time.monotonic() - t3

    t4 = time.monotonic()
    sat_used = []
    cert = clgrp.certify(cg.h, basis.regulator, est)
    if not cert.passed and not cfg.no_saturation:
        cert = _saturation_sweep(basis, fb, cg, est, cfg, sat_used)
    timings["certify"] = time.monotonic() - t4
    return cg, est, basis, cert, sat_used


def _unit_lines(basis):
    lines = []
    for u in basis.units:
        elems = units.compact_representation(u, 2, reducers=basis.units)
        blocks = []
        for ib, den in elems:
            s = ",".join(str(c) for c in ib)
            blocks.append(f"{s}/{den}" if den != 1 else s)
        lines.append("CR 2 : " + " ; ".join(blocks))
    return lines


def _report_dict(cfg, K, fb, M, cg, est, basis, cert, sat_used, timings):
    rep = {
        "field": ",".join(str(c) for c in cfg.field),
        "degree": K.n,
        "r1": K.r1,
        "r2": K.r2,
        "disc": str(K.disc),
        "index": str(K.index),
        "torsion": basis.torsion_order if basis is not None else K.torsion_order(),
        "B": fb.bound,
        "N": len(fb),
        "relations": len(M),
        "rank": M.rank_profile()[0],
        "h": cg.h,
        "factors": list(cg.invariant_factors),
        "R": float(basis.regulator),
        "R_err": float(basis.regulator_error),
        "hstar": est.hstar,
        "P0": est.truncation_bound,
        "hR": cert.hR,
        "ratio": cert.ratio,
        "certified": bool(cert.passed),
        "certify_status": cert.status,
        "sat_primes": list(sat_used),
        "seed": cfg.seed,
        "threads": cfg.threads,
        "units": _unit_lines(basis),
        "reg_line": f"REG {basis.regulator!r} ±{basis.regulator_error:.3e}",
        "stats": M.stats.as_dict(),
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }
    if cfg.generators and cg.generators is not None:
        rep["generators"] = [
            [[int(i), int(e)] for i, e in gen] for gen in cg.generators]
    return rep


def format_report(rep):
    """Flat key=value text; timings and sieve stats are marked lines that
    determinism comparisons strip."""
    out = []
    out.append(
        f"h={rep['h']} factors={rep['factors']} hR={rep['hR']:.12g} "
        f"hstar={rep['hstar']:.12g} certified={str(rep['certified']).lower()} GRH")
    for key in ("field", "degree", "r1", "r2", "disc", "index", "torsion",
                "B", "N", "relations", "rank", "h"):
        out.append(f"{key}={rep[key]}")
    out.append("factors=" + ",".join(str(d) for d in rep["factors"]))
    out.append(f"R={rep['R']!r}")
    out.append(f"R_err={rep['R_err']:.3e}")
    out.append(f"hstar={rep['hstar']!r}")
    out.append(f"P0={rep['P0']}")
    out.append(f"ratio={rep['ratio']:.6f}")
    out.append(f"certified={str(rep['certified']).lower()}")
    out.append(f"certify_status={rep['certify_status']}")
    out.append("sat_primes=" + ",".join(str(p) for p in rep["sat_primes"]))
    out.append(f"seed={rep['seed']} threads={rep['threads']}")
    if "generators" in rep:
        for k, gen in enumerate(rep["generators"]):
            word = ",".join(f"{i}:{e}" for i, e in gen)
            out.append(f"gen_{k}={word}")
    for line in rep["units"]:
        out.append(line)
    out.append(rep["reg_line"])
    for k, v in sorted(rep["stats"].items()):
        out.append(f"stat_{k}={v}")
    for k, v in sorted(rep["timings"].items()):
        out.append(f"time_{k}={v}")
    return "\n".join(out)


def run(config):
    """Full pipeline; returns (exit_code, report dict or error dict)."""
    cfg = config
    timings = {}
    try:
        K = nfcore.create_field(cfg.field)
    except FieldError as exc:
        return 1, {"error": f"{type(exc).__name__}: {exc}"}
    if cfg.bound:
        B = cfg.bound
    elif cfg.bach_bound:
        B = factorbase.bach_bound(K)
    else:
        B = factorbase.default_bound(K)
    try:
        fb = factorbase.build_factor_base(K, B)
    except FieldError as exc:
        return 1, {"error": f"{type(exc).__name__}: {exc}"}

    log_lines = []
    t0 = time.monotonic()
    try:
        if cfg.replay:
            M = _load_relations(K, fb, cfg.replay)
            if not len(M):
                missing = [repr(P) for P in fb.primes]
                return 2, {"error": "RankStalled: empty relation log",
                           "missing": missing}
        else:
            try:
                M = sieve.collect_relations(
                    K, fb, I=cfg.sieve_I, J=cfg.sieve_J, slack=cfg.slack,
                    seed=cfg.seed, threads=cfg.threads,
                    budget_relations=cfg.budget_relations,
                    budget_seconds=cfg.budget_seconds, log_lines=log_lines)
            finally:
                _write_log(cfg.relations_out, log_lines)
    except CorruptLog as exc:
        return 1, {"error": f"CorruptLog: {exc}"}
    except VerificationFailed as exc:
        return 1, {"error": f"VerificationFailed: {exc}"}
    except sieve.RankStalled as exc:
        return 2, {"error": f"RankStalled: {exc}", "missing": exc.missing}
    except sieve.Timeout as exc:
        return 2, {"error": f"Timeout: {exc}"}
    timings["sieve"] = time.monotonic() - t0
    secs = max(timings["sieve"], 1e-9)
    _status(cfg, f"status: relations={len(M)} "
                 f"rank={M.rank_profile()[0]}/{len(fb)} "
                 f"rel_per_sec={len(M) / secs:.1f}")

    try:
        cg, est, basis, cert, sat_used = _pipeline(cfg, M, K, fb, timings)
    except clgrp.NotFullRank as exc:
        return 2, {"error": f"RankStalled: {exc}"}
    except (units.PrecisionExhausted, units.LeopoldtAlert,
            units.NoAdmissiblePrime) as exc:
        return 1, {"error": f"{type(exc).__name__}: {exc}"}

    rep = _report_dict(cfg, K, fb, M, cg, est, basis, cert, sat_used, timings)
    code = 0 if cert.passed else 2
    rep["exit"] = code
    return code, rep


def replay(relation_log_path, config):
    """Report from a stored relation log (raises CorruptLog or
    VerificationFailed on bad input); report["exit"] carries the code."""
    cfg = config
    cfg.replay = relation_log_path
    try:
        K = nfcore.create_field(cfg.field)
    except FieldError as exc:
        return {"error": f"{type(exc).__name__}: {exc}", "exit": 1}
    if cfg.bound:
        B = cfg.bound
    elif cfg.bach_bound:
        B = factorbase.bach_bound(K)
    else:
        B = factorbase.default_bound(K)
    fb = factorbase.build_factor_base(K, B)
    M = _load_relations(K, fb, relation_log_path)
    if not len(M):
        missing = [repr(P) for P in fb.primes]
        return {"error": "RankStalled: empty relation log",
                "missing": missing, "exit": 2}
    timings = {"sieve": 0.0}
    try:
        cg, est, basis, cert, sat_used = _pipeline(cfg, M, K, fb, timings)
    except clgrp.NotFullRank as exc:
        return {"error": f"RankStalled: {exc}", "exit": 2}
    rep = _report_dict(cfg, K, fb, M, cg, est, basis, cert, sat_used, timings)
    rep["exit"] = 0 if cert.passed else 2
    return rep


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    ap = argparse.ArgumentParser(
        prog="classgroup",
        description="Class group, regulator and fundamental units of a "
                    "number field given by an irreducible monic polynomial.")
    ap.add_argument("--field", required=True,
                    help="comma-separated integer coefficients, constant "
                         "first (monic): e.g. '-2,0,1' for x^2 - 2")
    ap.add_argument("--bound", type=int, default=None,
                    help="factor-base smoothness bound override")
    ap.add_argument("--bach-bound", action="store_true",
                    help="use the Bach bound instead of the default")
    ap.add_argument("--sieve-I", type=int, default=None, dest="sieve_I")
    ap.add_argument("--sieve-J", type=int, default=None, dest="sieve_J")
    ap.add_argument("--slack", type=float, default=None,
                    help="smoothness threshold slack in bits")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget-relations", type=int, default=None)
    ap.add_argument("--budget-seconds", type=float, default=None)
    ap.add_argument("--relations-out", default=None,
                    help="append-only relation log path")
    ap.add_argument("--replay", default=None,
                    help="skip sieving; verify and reuse this relation log")
    ap.add_argument("--generators", action="store_true",
                    help="recover explicit generators of each cyclic factor")
    ap.add_argument("--no-saturation", action="store_true")
    ap.add_argument("--euler-cutoff", type=int, default=None,
                    help="Euler product truncation bound P0")
    ap.add_argument("--json", action="store_true", dest="json_out",
                    help="emit the report as JSON instead of key=value text")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        field = tuple(int(t) for t in args.field.replace(" ", "").split(","))
        cfg = RunConfig(field, bound=args.bound, bach_bound=args.bach_bound,
                        sieve_I=args.sieve_I, sieve_J=args.sieve_J,
                        slack=args.slack, threads=args.threads,
                        seed=args.seed,
                        budget_relations=args.budget_relations,
                        budget_seconds=args.budget_seconds,
                        relations_out=args.relations_out,
                        replay=args.replay, generators=args.generators,
                        no_saturation=args.no_saturation,
                        json_out=args.json_out,
                        euler_cutoff=args.euler_cutoff,
                        verbose=args.verbose)
    except (ValueError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        code, rep = run(cfg)
    except KeyboardInterrupt:
        print("interrupted; relation log flushed", file=sys.stderr)
        return 2
    if "error" in rep:
        print(f"error: {rep['error']}", file=sys.stderr)
        if "missing" in rep:
            for m in rep["missing"]:
                print(f"missing: {m}", file=sys.stderr)
        return code
    if cfg.json_out:
        print(json.dumps(rep, sort_keys=True))
    else:
        print(format_report(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
