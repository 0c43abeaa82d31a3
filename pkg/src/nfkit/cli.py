"""Batch verification harness.

Subcommands wire the library into reproducible experiments: family synthesis
and sweeps, unit/norm-equation queries, class numbers and certificates,
relative class numbers, and the two theorem-verification sweeps. Reports are
JSON lines (one record per member, then one summary object, then one meta
object); every number is a decimal string. Identical invocations produce
byte-identical output except for the meta line, which carries the timestamp
and timing and is excluded from comparisons.

Exit codes: 0 success, 2 input/precondition, 3 verification finding,
4 internal disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

from . import __version__, arith, cyclo, family, pell, quadclass
from ._jsonutil import dumps
from .errors import (
    CertificateFailureError,
    DomainError,
    MethodDisagreementError,
    NfkitError,
    NoIntegralProgressionError,
    NonIntegralResultError,
    NotAdmissibleError,
    NotFoundError,
    PrecisionExhaustedError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FINDING = 3
EXIT_INTERNAL = 4

CACHE_ENV = "NFKIT_CACHE"
CACHE_VERSION = "v1"
REPORT_SCHEMA = "nfkit/sweep-report/v1"


def _parse_word(text: str) -> family.SymmetricWord:
    try:
        entries = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise DomainError(f"cannot parse word {text!r}: expected comma-separated integers")
    return family.SymmetricWord(entries)


def _parse_range(text: str) -> range:
    """Inclusive 'A..B' range."""
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise DomainError(f"cannot parse range {text!r}: expected A..B")
    return range(lo_i, hi_i + 1)


def _emit(record: dict) -> None:
    sys.stdout.write(dumps(record) + "\n")


def _note(args, message: str) -> None:
    """Human-readable side channel; silenced by --json."""
    if not getattr(args, "json", False):
        print(message, file=sys.stderr)


def _meta_record(started: float) -> dict:
    return {
        "kind": "meta",
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": f"{time.monotonic() - started:.3f}",
    }


class Cache:
    """Append-only JSON-lines cache keyed by canonical operation strings."""

    def __init__(self, path: str | None, verify: bool = False):
        self.path = path
        self.verify = verify
        self.entries: dict[str, dict] = {}
        self.mismatches: list[str] = []
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    if row.get("version") == CACHE_VERSION:
                        self.entries[row["key"]] = row["value"]

    def get(self, key: str) -> dict | None:
        if self.path is None:
            return None
        return self.entries.get(key)

    def put(self, key: str, value: dict) -> None:
        if self.path is None or key in self.entries:
            return
        self.entries[key] = value
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"key": key, "version": CACHE_VERSION, "value": value},
                                sort_keys=True, separators=(",", ":")) + "\n")

    def should_verify(self, key: str) -> bool:
        # deterministic sparse sampling of hits
        if not self.verify:
            return False
        return hashlib.sha256(key.encode()).digest()[0] % 4 == 0

    def record_mismatch(self, key: str) -> None:
        self.mismatches.append(key)


def _open_cache(args) -> Cache:
    path = getattr(args, "cache", None) or os.environ.get(CACHE_ENV)
    return Cache(path, verify=getattr(args, "verify_cache", False))


# ---------------------------------------------------------------- workers

CERT_LIMIT = quadclass.DEFAULT_SPLIT_PRIME_LIMIT


def _certificate_payload(d: int) -> dict:
    try:
        cert = quadclass.nontriviality_certificate(d, CERT_LIMIT)
        return {"ok": True, "record": quadclass.certificate_to_json_dict(cert)}
    except CertificateFailureError as exc:
        return {"ok": False, "failed_step": exc.step, "message": str(exc)}


def _lemma_findings(word: tuple[int, ...], modulus: int, residue: int,
                    k: int, p_limit: int) -> list[dict]:
    fam = family.synthesize(family.SymmetricWord(word))
    target = next(s for s in family.refine_mod4(fam, 3)
                  if (s.modulus, s.residue) == (modulus, residue))
    findings = []
    p = 5
    while p <= p_limit:
        if arith.is_prime(p):
            for n, sign, x, y in pell.lemma31_scan(target, p, [k]):
                findings.append({"p": str(p), "n": str(n), "sign": str(sign),
                                 "x": str(x), "y": str(y)})
        p += 4
    return findings


def _verify_member_worker(payload: tuple) -> dict:
    """One sweep member: evaluate, filter, class number, certificate, lemma scan."""
    word, modulus, residue, k, p_limit = payload
    n = modulus * k + residue
    fam = family.synthesize(family.SymmetricWord(word))
    d, z, _ = family.evaluate(fam, n)
    record: dict = {
        "kind": "member",
        "k": str(k),
        "n": str(n),
        "d": str(d),
        "z": str(z),
        "d_mod4": str(d % 4),
        "slice": {"modulus": str(modulus), "residue": str(residue)},
        "squarefree": arith.is_squarefree(d),
    }
    if not record["squarefree"]:
        record["skipped"] = "not squarefree"
        record["pass"] = None
        return record
    data = quadclass.class_number(d)
    record["h"] = str(data.h)
    record["certificate"] = _certificate_payload(d)
    record["lemma_findings"] = _lemma_findings(word, modulus, residue, k, p_limit)
    record["pass"] = data.h > 1 and record["certificate"]["ok"]
    return record


def _theorem11_member_worker(payload: tuple) -> dict:
    case, p, n = payload
    d = _theorem11_d(case, p, n)
    record: dict = {
        "kind": "member",
        "case": str(case),
        "p": str(p),
        "n": str(n),
        "d": str(d),
        "d_mod4": str(d % 4),
        "squarefree": arith.is_squarefree(d),
    }
    if case == 2 and n % 3 != 0:
        record["skipped"] = "n not a multiple of 3"
        record["pass"] = None
        return record
    if not record["squarefree"]:
        record["skipped"] = "not squarefree"
        record["pass"] = None
        return record
    data = quadclass.class_number(d)
    record["h"] = str(data.h)
    record["certificate"] = _certificate_payload(d)
    record["pass"] = data.h > 1 and record["certificate"]["ok"]
    return record


def _theorem11_d(case: int, p: int, n: int) -> int:
    if case == 1:
        return (2 * n * p) ** 2 - 1
    if case == 2:
        return (2 * n * p) ** 2 + 3
    if case == 3:
        return ((2 * n + 1) * p) ** 2 + 2
    if case == 4:
        return ((2 * n + 1) * p) ** 2 - 2
    raise DomainError(f"case must be 1..4, got {case}")


def _theorem11_validate(case: int, p: int) -> None:
    if not arith.is_prime(p):
        raise DomainError(f"{p} is not prime")
    if case == 1 and p % 4 != 1:
        raise DomainError(f"case 1 needs p = 1 (mod 4), got {p}")
    if case == 2 and p % 2 == 0:
        raise DomainError(f"case 2 needs an odd prime, got {p}")
    if case == 3 and p % 8 not in (1, 7):
        raise DomainError(f"case 3 needs p = +-1 (mod 8), got {p}")
    if case == 4 and (p % 8 not in (1, 3) or p == 3):
        raise DomainError(f"case 4 needs p = 1,3 (mod 8) and p != 3, got {p}")


def _run_members(args, cache: Cache, key_prefix: str, payloads: list[tuple],
                 worker) -> list[dict]:
    """Evaluate members through the cache and an optional process pool,
    returning records in the order of `payloads` (single-writer cache)."""
    keys = [f"{key_prefix}:{'-'.join(map(str, p))}" for p in payloads]
    records: dict[int, dict] = {}
    pending: list[tuple[int, tuple]] = []
    for i, key in enumerate(keys):
        hit = cache.get(key)
        if hit is not None:
            records[i] = hit
            if cache.should_verify(key):
                if worker(payloads[i]) != hit:
                    cache.record_mismatch(key)
        else:
            pending.append((i, payloads[i]))
    jobs = args.jobs or os.cpu_count() or 1
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fresh = list(pool.map(worker, [p for _, p in pending]))
    else:
        fresh = [worker(p) for _, p in pending]
    for (i, _), rec in zip(pending, fresh):
        records[i] = rec
        cache.put(keys[i], rec)
    return [records[i] for i in range(len(payloads))]


# ------------------------------------------------------------- subcommands

def cmd_family_synth(args) -> int:
    word = _parse_word(args.word)
    fam = family.synthesize(word)
    _emit(family.to_json_dict(fam))
    return EXIT_OK


def cmd_family_sweep(args) -> int:
    started = time.monotonic()
    word = _parse_word(args.word)
    fam = family.synthesize(word)
    targets: list = [fam]
    if args.mod4 is not None:
        targets = family.refine_mod4(fam, args.mod4)
        if not targets:
            raise DomainError(f"family has no d = {args.mod4} (mod 4) slice")
    count = 0
    for target in targets:
        for n, d in family.members(target, _parse_range(args.n), args.squarefree):
            _, z, p_of_n = family.evaluate(target, n)
            record = {
                "kind": "member", "n": str(n), "d": str(d), "z": str(z),
                "p": str(p_of_n), "d_mod4": str(d % 4),
                "squarefree": arith.is_squarefree(d),
            }
            if isinstance(target, family.FamilySlice):
                record["slice"] = {"modulus": str(target.modulus),
                                   "residue": str(target.residue)}
            _emit(record)
            count += 1
    _emit({"kind": "summary", "schema": REPORT_SCHEMA, "command": "family sweep",
           "family": family.to_json_dict(fam), "params": {"n": args.n,
           "mod4": str(args.mod4) if args.mod4 is not None else None,
           "squarefree": bool(args.squarefree)},
           "counts": {"members": str(count)}, "tool_version": __version__})
    _emit(_meta_record(started))
    return EXIT_OK


def cmd_pell_unit(args) -> int:
    _emit(pell.unit_to_json_dict(pell.fundamental_unit(args.d)))
    return EXIT_OK


def cmd_pell_norm(args) -> int:
    if args.method == "small" or (args.method == "auto" and args.N * args.N < args.d):
        sol = pell.solve_norm_small(args.d, args.N)
    else:
        sol = pell.solve_norm_bounded(args.d, args.N)
    _emit(pell.norm_solution_to_json_dict(sol))
    return EXIT_OK


def cmd_pell_scan(args) -> int:
    started = time.monotonic()
    word = _parse_word(args.word)
    fam = family.synthesize(word)
    targets: list = [fam]
    if args.mod4 is not None:
        targets = family.refine_mod4(fam, args.mod4)
        if not targets:
            raise DomainError(f"family has no d = {args.mod4} (mod 4) slice")
    findings = []
    for target in targets:
        for n, sign, x, y in pell.lemma31_scan(target, args.p, _parse_range(args.n)):
            record = {"kind": "finding", "n": str(n), "sign": str(sign),
                      "x": str(x), "y": str(y), "N": str(sign * args.p)}
            if isinstance(target, family.FamilySlice):
                record["slice"] = {"modulus": str(target.modulus),
                                   "residue": str(target.residue)}
            findings.append(record)
    for record in findings:
        _emit(record)
    _emit({"kind": "summary", "schema": REPORT_SCHEMA, "command": "pell scan",
           "params": {"word": args.word, "p": str(args.p), "n": args.n,
                      "mod4": str(args.mod4) if args.mod4 is not None else None},
           "counts": {"findings": str(len(findings))},
           "unsolvable_everywhere": not findings, "tool_version": __version__})
    _emit(_meta_record(started))
    return EXIT_OK


def cmd_class_h(args) -> int:
    d = args.d
    if args.method == "both":
        data = quadclass.class_number(d)
        _emit({
            "schema": "nfkit/class-data/v1", "d": str(d), "D": str(data.D),
            "h_narrow": str(data.h_narrow), "h": str(data.h),
            "unit": pell.unit_to_json_dict(data.unit),
            "methods_agree": data.methods_agree, "method": "both",
        })
        return EXIT_OK
    if args.method == "forms":
        D = quadclass.field_discriminant(d)
        h_narrow = quadclass.narrow_class_number_forms(D)
        _, _, _, norm = pell.field_unit(d)
        h = h_narrow if norm == -1 else h_narrow // 2
        _emit({"schema": "nfkit/class-data/v1", "d": str(d), "D": str(D),
               "h_narrow": str(h_narrow), "h": str(h),
               "unit": pell.unit_to_json_dict(pell.fundamental_unit(d)),
               "method": "forms"})
        return EXIT_OK
    h = quadclass.analytic_class_number(d)
    _emit({"schema": "nfkit/class-data/v1", "d": str(d),
           "D": str(quadclass.field_discriminant(d)), "h": str(h),
           "method": "analytic"})
    return EXIT_OK


def cmd_class_cert(args) -> int:
    try:
        cert = quadclass.nontriviality_certificate(args.d, args.p_limit)
    except CertificateFailureError as exc:
        _emit({"schema": quadclass.CERTIFICATE_SCHEMA, "d": str(args.d),
               "ok": False, "failed_step": exc.step, "message": str(exc)})
        return EXIT_FINDING
    _emit(quadclass.certificate_to_json_dict(cert))
    return EXIT_OK


def cmd_cyclo_minus(args) -> int:
    h_exact = cyclo.minus_class_number(args.m)
    h_float = round(cyclo.minus_class_number_float(args.m))
    if h_float != h_exact:
        _emit({"schema": cyclo.CYCLO_SCHEMA, "m": str(args.m),
               "error": f"exact {h_exact} vs float {h_float}"})
        return EXIT_INTERNAL
    _emit(cyclo.to_json_dict(args.m, h_exact, float_checked=True))
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    started = time.monotonic()
    word = _parse_word(args.word)
    fam = family.synthesize(word)  # raises NotAdmissible -> exit 2
    if fam.t % 2 != 0:
        raise DomainError(f"word {args.word} has odd t={fam.t}; unit norm -1 families "
                          "are outside the verification pipeline")
    slices = family.refine_mod4(fam, 3)
    if not slices:
        raise DomainError(f"family of word {args.word} has no d = 3 (mod 4) slice")
    cache = _open_cache(args)
    all_records: list[dict] = []
    for sl in slices:
        ks = [k for k, _ in family.members(sl, _parse_range(args.n))]
        payloads = [(tuple(word.a), sl.modulus, sl.residue, k, args.p_limit) for k in ks]
        prefix = f"verify-member/{CACHE_VERSION}:word={args.word}:p_limit={args.p_limit}"
        all_records.extend(_run_members(args, cache, prefix, payloads,
                                        _verify_member_worker))
    evaluated = [r for r in all_records if r["pass"] is not None]
    failed = [r for r in evaluated if not r["pass"]]
    for record in all_records:
        _emit(record)
        status = "SKIP" if record["pass"] is None else ("PASS" if record["pass"] else "FAIL")
        _note(args, f"{status} n={record['n']} d={record['d']}"
                    + (f" ({record.get('skipped')})" if record["pass"] is None else ""))
    summary = {
        "kind": "summary", "schema": REPORT_SCHEMA, "command": "verify paper",
        "family": family.to_json_dict(fam),
        "params": {"word": args.word, "n": args.n, "p_limit": str(args.p_limit)},
        "counts": {
            "members": str(len(all_records)),
            "passed": str(sum(1 for r in evaluated if r["pass"])),
            "failed": str(len(failed)),
            "skipped": str(len(all_records) - len(evaluated)),
            "lemma_findings": str(sum(len(r.get("lemma_findings", ())) for r in all_records)),
        },
        "all_pass": not failed,
        "tool_version": __version__,
    }
    _emit(summary)
    _emit(_meta_record(started))
    if cache.mismatches:
        _note(args, f"cache verification failed for keys: {cache.mismatches}")
        return EXIT_INTERNAL
    return EXIT_FINDING if failed else EXIT_OK


def cmd_verify_theorem11(args) -> int:
    started = time.monotonic()
    _theorem11_validate(args.case, args.p)
    ns = [n for n in _parse_range(args.n) if n >= 1]
    cache = _open_cache(args)
    payloads = [(args.case, args.p, n) for n in ns]
    prefix = f"theorem11-member/{CACHE_VERSION}"
    records = _run_members(args, cache, prefix, payloads, _theorem11_member_worker)
    evaluated = [r for r in records if r["pass"] is not None]
    failed = [r for r in evaluated if not r["pass"]]
    for record in records:
        _emit(record)
        status = "SKIP" if record["pass"] is None else ("PASS" if record["pass"] else "FAIL")
        _note(args, f"{status} n={record['n']} d={record['d']}"
                    + (f" ({record.get('skipped')})" if record["pass"] is None else ""))
    _emit({
        "kind": "summary", "schema": REPORT_SCHEMA, "command": "verify theorem11",
        "params": {"case": str(args.case), "p": str(args.p), "n": args.n},
        "counts": {"members": str(len(records)),
                   "passed": str(sum(1 for r in evaluated if r["pass"])),
                   "failed": str(len(failed)),
                   "skipped": str(len(records) - len(evaluated))},
        "all_pass": not failed,
        "tool_version": __version__,
    })
    _emit(_meta_record(started))
    if cache.mismatches:
        return EXIT_INTERNAL
    return EXIT_FINDING if failed else EXIT_OK


# ------------------------------------------------------------------ parser

def _add_common(sub, cache_flags=False) -> None:
    sub.add_argument("--json", action="store_true",
                     help="machine output only (suppress stderr notes)")
    if cache_flags:
        sub.add_argument("--cache", default=None,
                         help=f"cache file path (default: ${CACHE_ENV})")
        sub.add_argument("--verify-cache", action="store_true", dest="verify_cache",
                         help="recompute a sample of cache hits and compare")
        sub.add_argument("--jobs", type=int, default=None,
                         help="parallel member evaluations (default: cpu count)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nfkit",
        description="Exact toolkit for quadratic families, norm-form equations, "
                    "class numbers, and relative cyclotomic class numbers.",
    )
    top = ap.add_subparsers(dest="group", required=True)

    fam = top.add_parser("family", help="synthesize and sweep quadratic families")
    fam_sub = fam.add_subparsers(dest="op", required=True)
    synth = fam_sub.add_parser("synth", help="synthesize a family from a word")
    synth.add_argument("--word", required=True, help="comma-separated palindrome, e.g. 1,2,1")
    _add_common(synth)
    synth.set_defaults(fn=cmd_family_synth)
    sweep = fam_sub.add_parser("sweep", help="list family members")
    sweep.add_argument("--word", required=True)
    sweep.add_argument("--n", required=True, help="inclusive index range A..B")
    sweep.add_argument("--mod4", type=int, choices=(2, 3), default=None)
    sweep.add_argument("--squarefree", action="store_true")
    _add_common(sweep)
    sweep.set_defaults(fn=cmd_family_sweep)

    pl = top.add_parser("pell", help="fundamental units and norm equations")
    pl_sub = pl.add_subparsers(dest="op", required=True)
    unit = pl_sub.add_parser("unit", help="fundamental unit of Z[sqrt(d)]")
    unit.add_argument("--d", type=int, required=True)
    _add_common(unit)
    unit.set_defaults(fn=cmd_pell_unit)
    norm = pl_sub.add_parser("norm", help="decide x^2 - d*y^2 = N")
    norm.add_argument("--d", type=int, required=True)
    norm.add_argument("--N", type=int, required=True)
    norm.add_argument("--method", choices=("auto", "small", "bounded"), default="auto")
    _add_common(norm)
    norm.set_defaults(fn=cmd_pell_norm)
    scan = pl_sub.add_parser("scan", help="scan x^2 - d(n)*y^2 = +-p over a family")
    scan.add_argument("--word", required=True)
    scan.add_argument("--p", type=int, required=True)
    scan.add_argument("--n", required=True)
    scan.add_argument("--mod4", type=int, choices=(2, 3), default=None)
    _add_common(scan)
    scan.set_defaults(fn=cmd_pell_scan)

    cl = top.add_parser("class", help="class numbers and certificates")
    cl_sub = cl.add_subparsers(dest="op", required=True)
    ch = cl_sub.add_parser("h", help="class number of Q(sqrt(d))")
    ch.add_argument("--d", type=int, required=True)
    ch.add_argument("--method", choices=("forms", "analytic", "both"), default="both")
    _add_common(ch)
    ch.set_defaults(fn=cmd_class_h)
    cert = cl_sub.add_parser("cert", help="non-triviality certificate for d = 3 (mod 4)")
    cert.add_argument("--d", type=int, required=True)
    cert.add_argument("--p-limit", type=int, default=quadclass.DEFAULT_SPLIT_PRIME_LIMIT,
                      dest="p_limit")
    _add_common(cert)
    cert.set_defaults(fn=cmd_class_cert)

    cy = top.add_parser("cyclo", help="relative class numbers of Q(zeta_m)")
    cy_sub = cy.add_subparsers(dest="op", required=True)
    minus = cy_sub.add_parser("minus", help="h^-(m), exact with float cross-check")
    minus.add_argument("--m", type=int, required=True)
    _add_common(minus)
    minus.set_defaults(fn=cmd_cyclo_minus)

    vf = top.add_parser("verify", help="theorem verification sweeps")
    vf_sub = vf.add_subparsers(dest="op", required=True)
    paper = vf_sub.add_parser("paper", help="certify h > 1 over a family's d=3 (mod 4) slice")
    paper.add_argument("--word", required=True)
    paper.add_argument("--n", required=True)
    paper.add_argument("--p-limit", type=int, default=50, dest="p_limit")
    _add_common(paper, cache_flags=True)
    paper.set_defaults(fn=cmd_verify_paper)
    thm = vf_sub.add_parser("theorem11", help="certify one of the four classic d-forms")
    thm.add_argument("--case", type=int, required=True, choices=(1, 2, 3, 4))
    thm.add_argument("--p", type=int, required=True)
    thm.add_argument("--n", required=True)
    _add_common(thm, cache_flags=True)
    thm.set_defaults(fn=cmd_verify_theorem11)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (NotAdmissibleError, NoIntegralProgressionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except (MethodDisagreementError, NonIntegralResultError, PrecisionExhaustedError) as exc:
        print(f"internal disagreement: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except NfkitError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
