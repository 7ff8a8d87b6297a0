"""Problem files, run reports and CSV output."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy.io
import scipy.sparse

from .core import GramSpace
from .errors import InputError, LoadError

__all__ = [
    "Problem", "load_problem", "save_problem", "problem_to_dict", "make_report",
    "report_to_json", "emit_report", "encode", "margin_csv", "growth_csv",
    "PROBLEM_SCHEMA", "REPORT_SCHEMA",
]

PROBLEM_SCHEMA = "pispec-1"
REPORT_SCHEMA = "pispec-report-1"
GRAM_HERM_TOL = 1e-10
GA_WARN_TOL = 1e-8
GA_ERROR_TOL = 1e-4

MARGIN_HEADER = ["lambda_re", "lambda_im", "epsilon", "k", "nu"]
GROWTH_HEADER = ["t", "norm", "fit"]


@dataclass(eq=False)
class Problem:
    A: np.ndarray
    space: GramSpace
    metadata: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    gram_correction: float = 0.0
    ga_residual: float = 0.0
    source: str = ""

    @property
    def n(self) -> int:
        return self.space.n


def _schema():
    text = resources.files("pispec").joinpath("schemas/pispec-1.json").read_text()
    return json.loads(text)


def _matrix_from(part, n, name):
    re = np.asarray(part["re"], dtype=float)
    if re.ndim != 2 or re.shape != (n, n):
        raise LoadError(f"{name} has shape {re.shape}, expected ({n}, {n})", code="size-mismatch")
    if "im" in part:
        im = np.asarray(part["im"], dtype=float)
        if im.shape != re.shape:
            raise LoadError(f"{name}: real and imaginary parts differ in shape", code="size-mismatch")
        if np.any(im):
            return re + 1j * im
    return re


def _validate(A, G, metadata, source):
    n = A.shape[0]
    if A.shape != (n, n) or G.shape != (n, n):
        raise LoadError(f"A is {A.shape} and G is {G.shape}", code="size-mismatch")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(G))):
        raise LoadError("matrices contain non-finite entries", code="schema-violation")
    gnorm = float(np.linalg.norm(G, 2))
    corr = float(np.linalg.norm(G - G.conj().T, 2))
    if corr > GRAM_HERM_TOL * max(1.0, gnorm):
        raise LoadError(f"G is not Hermitian: ||G - G^H|| = {corr:.3g}", code="gram-not-hermitian")
    space = GramSpace(G)
    GA = space.G @ A
    ga_norm = float(np.linalg.norm(GA, 2))
    ga_res = float(np.linalg.norm(GA - GA.conj().T, 2))
    warnings = []
    if ga_res > GA_ERROR_TOL * max(ga_norm, 1e-300) and ga_res > 1e-14:
        raise LoadError(f"G A is not Hermitian: residual {ga_res:.3g}", code="ga-not-hermitian")
    if ga_res > GA_WARN_TOL * max(1.0, ga_norm):
        warnings.append(f"G A deviates from Hermitian by {ga_res:.3g}")
    return Problem(A, space, dict(metadata), warnings, corr / 2, ga_res, source)


def _load_json(path: Path):
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: not valid JSON ({exc})", code="schema-violation") from exc
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        raise LoadError(f"{path}: {exc.message}", code="schema-violation") from exc
    n = data["n"]
    A = _matrix_from(data["matrix_a"], n, "matrix_a")
    G = _matrix_from(data["gram_g"], n, "gram_g")
    return _validate(A, G, data.get("metadata", {}), str(path))


def _read_mtx(path: Path):
    try:
        M = scipy.io.mmread(str(path))
    except (ValueError, OSError) as exc:
        raise LoadError(f"{path}: cannot read Matrix Market file ({exc})", code="schema-violation") from exc
    if scipy.sparse.issparse(M):
        M = M.toarray()
    M = np.asarray(M)
    if np.iscomplexobj(M):
        raise LoadError(f"{path}: Matrix Market input must be real", code="schema-violation")
    return M.astype(float)


def load_problem(path, gram=None) -> Problem:
    """Load ``(A, G)`` from a ``pispec-1`` JSON file or a Matrix Market pair.

    A Matrix Market pair is given either as a directory holding ``a.mtx`` and
    ``g.mtx`` or as the path of ``A`` together with ``gram``.
    """
    p = Path(path)
    if p.is_dir():
        a, g = p / "a.mtx", p / "g.mtx"
        if not (a.exists() and g.exists()):
            raise LoadError(f"{p}: directory must contain a.mtx and g.mtx")
        return _validate(_read_mtx(a), _read_mtx(g), {"format": "matrix-market"}, str(p))
    if not p.exists():
        raise LoadError(f"{p}: no such file")
    if p.suffix == ".mtx":
        if gram is None:
            raise LoadError("a Matrix Market A needs a Gram matrix file as well")
        return _validate(_read_mtx(p), _read_mtx(Path(gram)), {"format": "matrix-market"}, str(p))
    return _load_json(p)


def _split(M):
    M = np.asarray(M)
    out = {"re": M.real.tolist()}
    if np.iscomplexobj(M):
        out["im"] = M.imag.tolist()
    return out


def problem_to_dict(A, G, metadata=None):
    G = G.G if isinstance(G, GramSpace) else np.asarray(G)
    A = np.asarray(A)
    return {"schema": PROBLEM_SCHEMA, "n": int(A.shape[0]), "matrix_a": _split(A),
            "gram_g": _split(G), "metadata": dict(metadata or {})}


def save_problem(path, A, G, metadata=None):
    Path(path).write_text(json.dumps(problem_to_dict(A, G, metadata), sort_keys=True, indent=1) + "\n")


def encode(obj):
    """JSON-ready copy: arrays become lists, complex numbers ``{re, im}``,
    non-finite floats strings."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": encode(obj.real.tolist()), "im": encode(obj.imag.tolist())}
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": encode(float(obj.real)), "im": encode(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def inputs_digest(problem: Problem | None, args: dict) -> str:
    h = hashlib.sha256()
    if problem is not None:
        h.update(json.dumps(encode(problem_to_dict(problem.A, problem.space)), sort_keys=True).encode())
    h.update(json.dumps(encode(args), sort_keys=True).encode())
    return h.hexdigest()


def make_report(command, results, residuals=None, warnings=None, problem=None, args=None,
                status="ok", error=None):
    rep = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "status": status,
        "inputs_digest": inputs_digest(problem, args or {}),
        "results": results,
        "residuals": residuals or {},
        "warnings": list(warnings or []),
    }
    if error is not None:
        rep["error"] = {"code": getattr(error, "code", "error"), "message": str(error)}
    return rep


def report_to_json(report) -> str:
    return json.dumps(encode(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def margin_csv(rows) -> str:
    """Rows ``(lambda, epsilon, k, nu)`` as CSV text."""
    return _csv_text(MARGIN_HEADER, [(complex(l).real, complex(l).imag, e, k, nu) for l, e, k, nu in rows])


def growth_csv(estimate) -> str:
    fit = estimate.fitted(estimate.t_values)
    return _csv_text(GROWTH_HEADER, list(zip(estimate.t_values, estimate.norms, fit)))


def emit_report(report, out=None, plots=None, plot_text=None):
    """Write the JSON report to ``out`` (or return it) and CSV data to ``plots``."""
    text = report_to_json(report)
    try:
        if plots is not None and plot_text is not None:
            Path(plots).write_text(plot_text)
        if out is not None:
            Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write output: {exc}", code="unwritable-path") from exc
    return text
