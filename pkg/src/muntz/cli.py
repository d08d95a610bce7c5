"""Command-line front end: one subcommand per module, JSON reports, CSV plot series.

Every run is described by a :class:`JobSpec`.  Flags are turned into a job,
the job's inputs are merged with the subcommand defaults (unknown keys are
rejected), and :func:`run` returns the exit code together with a report whose
``job`` entry is the fully resolved spec.  ``muntz report`` runs a list of jobs
read from a JSON file and writes one report per job plus ``index.json``.

Exit codes: 0 success, 1 error, 2 when ``--strict`` is set and every verdict
in the result is inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import __version__, compop, embedding, exponents, measure, realpoly
from .exprdsl import DomainError, ParseError
from .quadrature import abs_tol_override

__all__ = [
    "JobSpec",
    "JobError",
    "RunResult",
    "SUBCOMMANDS",
    "resolve_inputs",
    "run",
    "report_bundle",
    "build_parser",
    "main",
]

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
REQUIRED = object()
TOLERANCE_KEYS = ("quad_abs_tol",)


class JobError(ValueError):
    """Malformed job description."""


# --------------------------------------------------------------------------- #
# Job description
# --------------------------------------------------------------------------- #


@dataclass
class JobSpec:
    """One unit of work.

    ``inputs`` holds the subcommand parameters (see :data:`DEFAULTS`);
    ``tolerances`` may set ``quad_abs_tol``.  ``out`` and ``plot_data`` are
    file paths for the JSON report and the CSV plot series.
    """

    subcommand: str
    inputs: dict = field(default_factory=dict)
    out: str | None = None
    plot_data: str | None = None
    tolerances: dict = field(default_factory=dict)
    strict: bool = False
    timestamp: bool = True

    @classmethod
    def from_dict(cls, obj: Mapping) -> "JobSpec":
        if not isinstance(obj, Mapping):
            raise JobError("a job must be a JSON object")
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - allowed
        if unknown:
            raise JobError(f"unknown job fields {sorted(unknown)}")
        if "subcommand" not in obj:
            raise JobError("job has no subcommand")
        job = cls(**obj)
        job.validate()
        return job

    def validate(self) -> None:
        if self.subcommand not in HANDLERS:
            raise JobError(f"unknown subcommand {self.subcommand!r}; choose from {sorted(HANDLERS)}")
        if not isinstance(self.inputs, Mapping):
            raise JobError("inputs must be an object")
        if not isinstance(self.tolerances, Mapping):
            raise JobError("tolerances must be an object")
        unknown = set(self.tolerances) - set(TOLERANCE_KEYS)
        if unknown:
            raise JobError(f"unknown tolerance fields {sorted(unknown)}")

    def resolved(self) -> dict:
        """The job with every default filled in."""
        self.validate()
        out = asdict(self)
        out["inputs"] = resolve_inputs(self.subcommand, self.inputs)
        out["tolerances"] = {"quad_abs_tol": self.tolerances.get("quad_abs_tol")}
        return out


@dataclass
class RunResult:
    code: int
    report: dict
    plot_rows: list = field(default_factory=list)


# --------------------------------------------------------------------------- #
# JSON helpers
# --------------------------------------------------------------------------- #


def plain(obj: Any) -> Any:
    """Convert to strict-JSON data: numpy to Python, ``inf`` to ``"+inf"``,
    ``nan`` to ``None`` and fractions to strings."""
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def dumps(obj: Any, compact: bool = False) -> str:
    if compact:
        return json.dumps(plain(obj), separators=(",", ":"), allow_nan=False)
    return json.dumps(plain(obj), indent=2, allow_nan=False) + "\n"


def _maybe_json(value):
    """Decode JSON object/array literals passed as flag values."""
    if isinstance(value, str) and value.strip()[:1] in ("{", "["):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise JobError(f"invalid JSON {value!r}: {exc.msg}") from None
    return value


def _number(text):
    """Exact ``Fraction`` for rational literals, float otherwise."""
    if isinstance(text, (int, Fraction)):
        return text
    if isinstance(text, float):
        return text
    try:
        return Fraction(str(text))
    except ValueError:
        return float(text)


# --------------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------------- #

SEQ_CHECKS = ("lacunary", "gap", "muntz", "quasilacunary", "closure")
POLY_ACTIONS = ("expand", "schinzel", "invariance", "membership", "binomial")

DEFAULTS: dict[str, dict] = {
    "seq": {"seq": REQUIRED, "tail": None, "check": None, "block": 3, "eta": None},
    "poly": {
        "action": "expand", "p": None, "pow": 1, "count": False, "seq": None, "lam": None,
        "alpha": None, "zeta1": None, "beta": None, "zeta2": None, "terms": 10,
    },
    "measure": {
        "mu": None, "phi": None, "density": None, "atoms": [], "profile": True, "eps": None,
        "tail": [], "moments": [], "pushforward": [], "mc": 0, "seed": 0,
    },
    "embed": {
        "seq": REQUIRED, "mu": "lebesgue", "n": None, "normalization": "normalized",
        "svals": False, "opnorm": False, "essnorm": False, "n0": None, "schatten": [],
        "classify": True, "block": 3,
    },
    "compop": {
        "phi": REQUIRED, "seq": REQUIRED, "psi": None, "n": None, "route": "direct",
        "normalization": "normalized", "svals": False, "essnorm": False, "n0": None,
        "classify": None, "holder_eps": 1e-3,
    },
}

SUBCOMMANDS = (*DEFAULTS, "report")
DEFAULT_PLOT = "muntz_plot.csv"


def _section_size(seq: exponents.ExponentSequence, n) -> int:
    n = min(len(seq), 12) if n is None else int(n)
    if not 1 <= n <= len(seq):
        raise JobError(f"section size {n} not in 1..{len(seq)}")
    return n


def _tail_offsets(n: int, n0) -> list[int]:
    if n0 is not None:
        return [int(k) for k in n0]
    return list(range(2, n - 3)) if n >= 6 else list(range(n))


def resolve_inputs(subcommand: str, inputs: Mapping) -> dict:
    """Merge ``inputs`` into the defaults of ``subcommand`` and fill the
    data-dependent defaults (section size, tail offsets, checks)."""
    if subcommand not in DEFAULTS:
        raise JobError(f"unknown subcommand {subcommand!r}")
    defaults = DEFAULTS[subcommand]
    unknown = set(inputs) - set(defaults)
    if unknown:
        raise JobError(f"unknown {subcommand} inputs {sorted(unknown)}")
    out = {k: inputs.get(k, v) for k, v in defaults.items()}
    missing = [k for k, v in out.items() if v is REQUIRED]
    if missing:
        raise JobError(f"{subcommand} needs {', '.join(missing)}")
    if subcommand == "seq":
        if out["check"] is None:
            out["check"] = ["lacunary", "gap", "muntz", "quasilacunary"]
            if out["eta"] is not None:
                out["check"].append("closure")
        elif isinstance(out["check"], str):
            out["check"] = [out["check"]]
        bad = set(out["check"]) - set(SEQ_CHECKS)
        if bad:
            raise JobError(f"unknown checks {sorted(bad)}; choose from {list(SEQ_CHECKS)}")
    elif subcommand == "poly":
        if out["action"] not in POLY_ACTIONS:
            raise JobError(f"unknown poly action {out['action']!r}; choose from {list(POLY_ACTIONS)}")
    elif subcommand in ("embed", "compop"):
        svals = out["svals"]
        if not isinstance(svals, bool) and isinstance(svals, int):
            if out["n"] is None:
                out["n"] = svals
            out["svals"] = True
        seq = _seq(out)
        out["n"] = _section_size(seq, out["n"])
        out["n0"] = _tail_offsets(out["n"], out["n0"])
        if out["classify"] is None:
            out["classify"] = not (out["svals"] or out["essnorm"])
    return out


def _seq(inputs: dict) -> exponents.ExponentSequence:
    value = inputs["seq"]
    if isinstance(value, list):
        return exponents.parse_sequence(json.dumps(value), inputs.get("tail"))
    return exponents.parse_sequence(str(value), inputs.get("tail"))


def _measure(spec) -> measure.MeasureSpec:
    return measure.measure_from_json(_maybe_json(spec))


def _verdict_values(report: dict) -> list[str]:
    return [v["value"] for v in report.get("verdicts", {}).values()]


def _run_seq(inp: dict):
    seq = _seq(inp)
    res: dict = {}
    verdicts: list[str] = []
    notes: list[str] = []
    for check in inp["check"]:
        if check == "lacunary":
            lac = exponents.lacunarity(seq)
            res.update(gamma=lac.gamma, lacunary=lac.lacunary_on_prefix)
            notes.append(lac.caveat)
        elif check == "gap":
            gap = exponents.gap_condition(seq)
            res.update(inf_gap=gap.inf_gap, gap_condition=gap.holds_on_prefix)
        elif check == "muntz":
            ms = exponents.muntz_partial_sum(seq)
            res.update(
                reciprocal_sum=ms.partial, summable=ms.verdict, basis=ms.basis, tail_bound=ms.tail_bound
            )
            notes.extend(ms.warnings)
            verdicts.append("inconclusive" if ms.verdict == "inconclusive" else "yes")
        elif check == "quasilacunary":
            block = int(inp["block"])
            res.update(
                block=block,
                block_gamma=exponents.best_block_ratio(seq, block),
                quasilacunary=exponents.quasilacunary(seq, block),
            )
        elif check == "closure":
            if inp["eta"] is None:
                raise JobError("closure check needs eta")
            cl = exponents.closure_check(seq, float(inp["eta"]))
            res.update(eta=cl.eta, closed_on_prefix=cl.closed_on_prefix, first_failure=cl.first_failure)
    return res, notes, verdicts, []


def _run_poly(inp: dict):
    action = inp["action"]
    if action == "binomial":
        keys = ("alpha", "zeta1", "beta", "zeta2", "lam")
        if any(inp[k] is None for k in keys):
            raise JobError("binomial needs alpha, zeta1, beta, zeta2 and lam")
        args = [_number(inp[k]) for k in keys]
        series = realpoly.binomial_expand(*args, int(inp["terms"]))
        res = {
            "coefficients": [str(c) if isinstance(c, Fraction) else c for c in series.coeffs],
            "exponents": [str(e) if isinstance(e, Fraction) else e for e in series.exponents],
            "radius": series.radius,
        }
        return res, [], [], [("coefficient", k, float(c)) for k, c in enumerate(series.coeffs)]
    if not inp["p"]:
        raise JobError(f"poly {action} needs p")
    p = realpoly.parse_poly(str(inp["p"]))
    lam = int(inp["pow"])
    if action == "expand":
        q = realpoly.power(p, lam)
        if inp["count"]:
            return {"terms": q.term_count}, [], [], []
        return {"terms": q.term_count, "polynomial": str(q), "json": q.to_json()}, [], [], []
    if action == "schinzel":
        sr = realpoly.schinzel_check(p, lam)
        return {"count": sr.count, "bound": sr.bound, "holds": sr.holds}, [], [], []
    if inp["seq"] is None:
        raise JobError(f"poly {action} needs seq")
    seq = _seq(inp)
    if action == "membership":
        mr = realpoly.membership_check(p, seq)
        return {"member": mr.member, "witnesses": list(mr.witnesses)}, [], [], []
    lam_values = seq.values if inp["lam"] is None else [float(v) for v in inp["lam"]]
    rep = realpoly.invariance_test(p, seq, lam_values).to_dict()
    verdict = "inconclusive" if rep["structural_verdict"] == "inconclusive" else "yes"
    return rep, list(rep["notes"]), [verdict], []


def _run_measure(inp: dict):
    given = [k for k in ("mu", "phi") if inp[k] is not None]
    if inp["density"] is not None or inp["atoms"]:
        given.append("density/atoms")
    if len(given) != 1:
        raise JobError("give exactly one of mu, phi, or density/atoms")
    if inp["mu"] is not None:
        mu = _measure(inp["mu"])
    elif inp["phi"] is not None:
        mu = measure.pullback(inp["phi"])
    else:
        mu = measure.literal(inp["density"], _maybe_json(inp["atoms"]) or ())
    at_one = measure.mu_at_one(mu)
    res: dict = {"measure": mu.describe(), "total_mass": mu.total_mass(), "mass_at_one": at_one}
    verdicts: list[str] = []
    rows: list = []
    if at_one > 0:
        res["embedding_measure"] = "no"
        res["embedding_rule"] = "mu({1}) > 0"
        verdicts.append("no")
    if inp["profile"]:
        prof = measure.sublinearity_profile(mu, inp["eps"])
        res["profile"] = prof.to_dict()
        rows += [("tail_ratio", e, r) for e, r in zip(prof.eps, prof.ratio)]
    if inp["tail"]:
        res["tail_mass"] = {str(e): float(measure.tail_mass(mu, float(e))) for e in inp["tail"]}
    if inp["moments"]:
        vals, errs = measure.moments(mu, np.asarray(inp["moments"], dtype=float))
        res["moments"] = [{"s": float(s), "value": v, "error": e} for s, v, e in zip(inp["moments"], vals, errs)]
    if inp["pushforward"]:
        if inp["phi"] is None:
            raise JobError("the pushforward check needs phi")
        chk = measure.pushforward_identity_check(
            inp["phi"], list(inp["pushforward"]), n_mc=int(inp["mc"]), mu=mu, seed=int(inp["seed"])
        )
        res["pushforward"] = {
            "g": list(inp["pushforward"]),
            "lhs": chk.lhs, "rhs": chk.rhs, "diff": chk.diff,
            "mc": chk.mc, "ok": bool(np.all(chk.ok())),
        }
    return res, [], verdicts, rows


def _run_embed(inp: dict):
    seq = _seq(inp)
    mu = _measure(inp["mu"])
    n, norm = inp["n"], inp["normalization"]
    res: dict = {}
    rows: list = []
    verdicts: list[str] = []
    notes: list[str] = []
    if inp["svals"] or inp["schatten"]:
        spec = embedding.embedding_svals(seq, n, mu, norm)
        res["svals"] = spec.to_dict()
        rows += [("sval", k + 1, s) for k, s in enumerate(spec.values)]
        if inp["schatten"]:
            res["schatten"] = {}
            for q in inp["schatten"]:
                total, ok = embedding.schatten_qnorm(spec, float(q))
                res["schatten"][str(q)] = {"partial_sum": total, "converged": ok}
    if inp["opnorm"]:
        res["operator_norm"] = embedding.operator_norm_estimate(seq, mu, range(2, n + 1), norm).to_dict()
    if inp["essnorm"]:
        tr = embedding.essential_norm_estimate(seq, mu, n, inp["n0"], norm)
        res["essential_norm"] = tr.to_dict()
        rows += [("tail_estimate", k, e) for k, e in zip(tr.n0_list, tr.values)]
    if inp["classify"]:
        rep = embedding.classify_embedding(seq, mu, n=n, block_bound=int(inp["block"])).to_dict()
        res["classification"] = rep
        verdicts += _verdict_values(rep)
        notes += rep.get("notes", [])
        prof = rep["evidence"].get("tail_profile")
        if prof:
            rows += [("tail_ratio", e, r) for e, r in zip(prof["eps"], prof["ratio"])]
    return res, notes, verdicts, rows


def _run_compop(inp: dict):
    seq = _seq(inp)
    phi, psi = inp["phi"], inp["psi"]
    n, norm, route = inp["n"], inp["normalization"], inp["route"]
    res: dict = {}
    rows: list = []
    verdicts: list[str] = []
    notes: list[str] = []
    if inp["svals"]:
        spec = compop.compop_svals(phi, seq, n, route, psi, norm)
        res["svals"] = spec.to_dict()
        rows += [("sval", k + 1, s) for k, s in enumerate(spec.values)]
    if inp["essnorm"]:
        tr = compop.compop_tail_estimates(phi, seq, n, inp["n0"], route, psi, norm)
        res["essential_norm"] = tr.to_dict()
        rows += [("tail_estimate", k, e) for k, e in zip(tr.n0_list, tr.values)]
        res["essential_norm_formula"] = compop.essential_norm_formula(phi).to_dict()
    if inp["classify"]:
        rep = compop.classify_compop(
            phi, seq, psi=psi, n=n, holder_eps=float(inp["holder_eps"])
        ).to_dict()
        res["classification"] = rep
        verdicts += _verdict_values(rep)
        notes += rep.get("notes", [])
    return res, notes, verdicts, rows


HANDLERS: dict[str, Callable] = {
    "seq": _run_seq,
    "poly": _run_poly,
    "measure": _run_measure,
    "embed": _run_embed,
    "compop": _run_compop,
}


# --------------------------------------------------------------------------- #
# Running jobs
# --------------------------------------------------------------------------- #


def _error_info(exc: BaseException) -> dict:
    info = {"type": type(exc).__name__, "message": str(exc)}
    offset = getattr(exc, "offset", None)
    if isinstance(offset, int):
        info["offset"] = offset
    return info


def _envelope(job: dict | None, timestamp: bool) -> dict:
    rep: dict = {"tool": "muntz", "version": __version__, "job": job}
    if timestamp:
        rep["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return rep


def run(job: JobSpec | Mapping) -> RunResult:
    """Execute one job; never raises for bad input (the report carries the error)."""
    timestamp = True
    if isinstance(job, Mapping):
        timestamp = bool(job.get("timestamp", True))
    try:
        if not isinstance(job, JobSpec):
            job = JobSpec.from_dict(job)
        timestamp = bool(job.timestamp)
        resolved = job.resolved()
    except (JobError, ValueError, TypeError) as exc:
        rep = _envelope(None, timestamp)
        rep.update(status="error", error=_error_info(exc))
        return RunResult(EXIT_ERROR, rep)
    rep = _envelope(resolved, timestamp)
    try:
        with abs_tol_override(resolved["tolerances"]["quad_abs_tol"]):
            result, notes, verdicts, rows = HANDLERS[job.subcommand](resolved["inputs"])
    except (ParseError, DomainError, JobError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        rep.update(status="error", error=_error_info(exc))
        return RunResult(EXIT_ERROR, rep)
    inconclusive = bool(verdicts) and all(v == "inconclusive" for v in verdicts)
    rep.update(status="inconclusive" if inconclusive else "ok", result=result)
    if notes:
        rep["notes"] = list(dict.fromkeys(notes))
    code = EXIT_INCONCLUSIVE if inconclusive and job.strict else EXIT_OK
    return RunResult(code, plain(rep), rows)


def plot_csv(rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for series, x, y in rows:
        writer.writerow([series, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def _write_outputs(res: RunResult, out: str | None, plot: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(dumps(res.report))
    if plot:
        Path(plot).parent.mkdir(parents=True, exist_ok=True)
        Path(plot).write_text(plot_csv(res.plot_rows))


def _run_dict(obj) -> RunResult:
    return run(obj)


def _summary(res: RunResult) -> dict:
    result = res.report.get("result") or {}
    cls = result.get("classification") if isinstance(result, dict) else None
    verdicts = {k: v["value"] for k, v in cls["verdicts"].items()} if cls else None
    return {"status": res.report.get("status"), "exit_code": res.code, "verdicts": verdicts}


def report_bundle(
    jobs: Sequence[Mapping | JobSpec],
    out_dir: str | Path,
    workers: int = 1,
    timestamp: bool = True,
    emit_plot_data: bool = False,
) -> int:
    """Run ``jobs`` and write ``job_NNN_<subcommand>.json`` files plus ``index.json``.

    Reports are written by the calling process in job order, so concurrent
    runs (``workers > 1``) still produce the same files.  Per-job ``out`` and
    ``plot_data`` paths are replaced by paths inside ``out_dir``.  Returns the
    largest job exit code.
    """
    if not jobs:
        raise JobError("a bundle needs at least one job")
    payloads = []
    for job in jobs:
        obj = asdict(job) if isinstance(job, JobSpec) else job
        if isinstance(obj, Mapping):
            obj = dict(obj)
            obj.setdefault("timestamp", timestamp)
        payloads.append(obj)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_dict, payloads))
    else:
        results = [_run_dict(p) for p in payloads]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for i, (obj, res) in enumerate(zip(payloads, results)):
        sub = obj.get("subcommand") if isinstance(obj, Mapping) else None
        stem = f"job_{i:03d}_{sub if sub in HANDLERS else 'invalid'}"
        (out / f"{stem}.json").write_text(dumps(res.report))
        entry = {"index": i, "subcommand": sub, "report": f"{stem}.json", **_summary(res)}
        if res.code == EXIT_ERROR:
            entry["status"] = "failed"
            entry["error"] = res.report.get("error")
        if emit_plot_data and res.plot_rows:
            (out / f"{stem}.csv").write_text(plot_csv(res.plot_rows))
            entry["plot_data"] = f"{stem}.csv"
        index.append(entry)
    code = max(r.code for r in results)
    doc = {"tool": "muntz", "version": __version__, "exit_code": code, "jobs": index}
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    (out / "index.json").write_text(dumps(doc))
    return code


# --------------------------------------------------------------------------- #
# Argument parsing
# --------------------------------------------------------------------------- #


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the JSON report to this file")
    p.add_argument(
        "--emit-plot-data", metavar="CSV", nargs="?", const="",
        help=f"write plot series as CSV (default path: the --out stem or {DEFAULT_PLOT})",
    )
    p.add_argument("--strict", action="store_true", help="exit 2 when every verdict is inconclusive")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time")
    p.add_argument("--quad-tol", type=float, help="absolute quadrature tolerance")
    p.add_argument("--full", action="store_true", help="print the whole report, not only the result")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muntz",
        description="Muntz-space embeddings, composition operators and real-exponent polynomials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("seq", help="exponent-sequence diagnostics")
    p.add_argument("seq", help="geom:2,12 | pow:p=2,n=50 | range:n=10 | list:1,2,4 | JSON array")
    p.add_argument("--tail", help="asserted | geometric:<ratio> | none")
    p.add_argument("--check", action="append", choices=SEQ_CHECKS)
    p.add_argument("--block", type=int)
    p.add_argument("--eta", type=float)
    _common(p)

    p = sub.add_parser("poly", help="real-exponent polynomial algebra")
    p.add_argument("action", choices=POLY_ACTIONS)
    p.add_argument("--p", help='polynomial literal, e.g. "x + x^(s:sqrt2)"')
    p.add_argument("--pow", type=int)
    p.add_argument("--count", action="store_true", default=None)
    p.add_argument("--seq")
    p.add_argument("--lam", type=_floats)
    for name in ("alpha", "zeta1", "beta", "zeta2"):
        p.add_argument(f"--{name}")
    p.add_argument("--binom-lam", dest="binom_lam")
    p.add_argument("--terms", type=int)
    _common(p)

    p = sub.add_parser("measure", help="measure construction and tail profile")
    p.add_argument("--mu", help='JSON measure, e.g. {"density": "1-x"} or "lebesgue"')
    p.add_argument("--phi")
    p.add_argument("--density")
    p.add_argument("--atoms", help="JSON list of [point, mass]")
    p.add_argument("--no-profile", dest="profile", action="store_false", default=None)
    p.add_argument("--eps", type=_floats)
    p.add_argument("--tail-at", dest="tail", type=_floats)
    p.add_argument("--moments", type=_floats)
    p.add_argument("--pushforward", action="append", metavar="G")
    p.add_argument("--mc", type=int)
    p.add_argument("--seed", type=int)
    _common(p)

    for name, helptext in (("embed", "embedding i_mu spectra and classification"),
                           ("compop", "composition operator spectra and classification")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--seq", required=True)
        if name == "embed":
            p.add_argument("--mu")
            p.add_argument("--opnorm", action="store_true", default=None)
            p.add_argument("--schatten", "--q", dest="schatten", type=_floats,
                           help="comma-separated Schatten exponents q")
            p.add_argument("--block", type=int)
            p.add_argument("--no-classify", dest="classify", action="store_false", default=None)
        else:
            p.add_argument("--phi", required=True)
            p.add_argument("--psi")
            p.add_argument("--route", choices=("direct", "pullback"))
            p.add_argument("--holder-eps", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--normalization", choices=embedding.NORMALIZATIONS)
        p.add_argument(
            "--svals", metavar="N", nargs="?", const=True, type=int, default=None,
            help="report singular values; N sets the section size when --n is absent",
        )
        p.add_argument("--essnorm", action="store_true", default=None)
        p.add_argument("--n0", type=_ints)
        if name == "compop":
            p.add_argument("--classify", action="store_true", default=None)
        _common(p)

    p = sub.add_parser("report", help="run a JSON list of jobs into a report directory")
    p.add_argument("jobs_file", help="JSON file holding a list of job objects")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="number of concurrent jobs")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--emit-plot-data", action="store_true", help="write one CSV per job")
    return parser


_NOT_INPUTS = {"subcommand", "out", "emit_plot_data", "strict", "no_timestamp", "quad_tol", "full"}


def job_from_args(args: argparse.Namespace) -> JobSpec:
    ns = vars(args)
    inputs = {k: v for k, v in ns.items() if k not in _NOT_INPUTS and v is not None}
    if args.subcommand == "poly" and "binom_lam" in inputs:
        inputs["lam"] = inputs.pop("binom_lam")
    if args.subcommand == "seq" and "check" in inputs:
        inputs["check"] = list(dict.fromkeys(inputs["check"]))
    for key in ("mu", "atoms"):
        if key in inputs:
            inputs[key] = _maybe_json(inputs[key])
    tol = {"quad_abs_tol": args.quad_tol} if args.quad_tol is not None else {}
    plot = args.emit_plot_data
    if plot == "":
        plot = str(Path(args.out).with_suffix(".csv")) if args.out else DEFAULT_PLOT
    return JobSpec(
        subcommand=args.subcommand,
        inputs=inputs,
        out=args.out,
        plot_data=plot,
        tolerances=tol,
        strict=args.strict,
        timestamp=not args.no_timestamp,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "report":
        try:
            jobs = json.loads(Path(args.jobs_file).read_text())
            if not isinstance(jobs, list):
                raise JobError("the jobs file must hold a JSON list")
            code = report_bundle(
                jobs, args.out, workers=max(1, args.jobs),
                timestamp=not args.no_timestamp, emit_plot_data=args.emit_plot_data,
            )
        except (OSError, json.JSONDecodeError, JobError) as exc:
            print(dumps({"error": _error_info(exc)}, compact=True), file=sys.stderr)
            return EXIT_ERROR
        print(dumps({"index": str(Path(args.out) / "index.json"), "exit_code": code}, compact=True))
        return code
    job = job_from_args(args)
    res = run(job)
    _write_outputs(res, job.out, job.plot_data)
    if res.report.get("job") is not None:
        print(dumps({"job": res.report["job"]}, compact=True), file=sys.stderr)
    if res.code == EXIT_ERROR:
        print(dumps({"error": res.report["error"]}, compact=True), file=sys.stderr)
    elif args.full:
        print(dumps(res.report), end="")
    else:
        print(dumps(res.report["result"], compact=True))
    return res.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
