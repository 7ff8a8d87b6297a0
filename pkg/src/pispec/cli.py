"""Command line front end: ``pispec <command> --problem FILE ...``.

Exit codes: 0 success, 1 bad input, 2 the computation says no (a structural
hypothesis fails or a residual misses its tolerance); a report is still
written in the last case.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aps import aps_decompose, build_type_perturbation
from .core import compress_gram, definiteness_margin, orthogonal_companion
from .errors import InputError, PispecError
from .gallery import CanonicalSpec, canonical_pair, g_symmetry_residual, random_canonical_spec
from .io import emit_report, growth_csv, load_problem, make_report, margin_csv, save_problem
from .jordan import RANK_TOL, classify_point, kernel_basis, scan_interval
from .resolvent import growth_order, interval_bound_check
from .spectral import local_spectral_function, verify_axioms

COMMANDS = ("classify", "scan", "aps", "perturb", "spectral-function", "axioms",
            "resolvent", "margin-field", "gallery")

PROJ_TOL = 1e-8
AXIOM_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _parse_lambda(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse --lambda {text!r}") from exc
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise InputError(f"--lambda expects RE or RE,IM, got {text!r}")


def _parse_interval(text):
    try:
        a, b = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise InputError(f"--interval expects A,B, got {text!r}") from exc
    if not a < b:
        raise InputError(f"--interval requires A < B, got {text!r}")
    return a, b


def build_parser():
    p = _Parser(prog="pispec", description="Spectral type analysis of G-symmetric matrices.")
    p.add_argument("--version", action="version", version=f"pispec {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        if name != "gallery":
            s.add_argument("--problem", required=True, help="pispec-1 JSON file, .mtx file or directory")
            s.add_argument("--gram", help="Matrix Market Gram matrix when --problem is a .mtx file")
        s.add_argument("--lambda", dest="lam", help="RE[,IM]")
        s.add_argument("--interval", action="append", default=[], help="A,B (repeatable for axioms)")
        s.add_argument("--epsilon", type=float, default=1e-3)
        s.add_argument("--budget", type=int)
        s.add_argument("--rank-tol", type=float)
        s.add_argument("--grid", type=int, default=64)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out")
        s.add_argument("--plots")
        if name == "perturb":
            s.add_argument("--orientation", choices=("plus", "minus"), default="plus")
        if name == "resolvent":
            s.add_argument("--t-min", type=float, default=1e-4)
            s.add_argument("--t-max", type=float, default=1e-2)
            s.add_argument("--samples", type=int, default=16)
        if name == "gallery":
            s.add_argument("--spec", help="canonical spec JSON file")
            s.add_argument("--save-problem", help="write the generated pair as a problem file")
    return p


def _normalize_argv(argv):
    # values such as "-1,1" would otherwise be mistaken for options
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--interval", "--lambda"):
            val = next(it, None)
            if val is None:
                out.append(tok)
            else:
                out.append(f"{tok}={val}")
        else:
            out.append(tok)
    return out


def _need_lambda(args):
    if args.lam is None:
        raise InputError(f"{args.command} requires --lambda")
    return _parse_lambda(args.lam)


def _need_interval(args):
    if not args.interval:
        raise InputError(f"{args.command} requires --interval")
    return _parse_interval(args.interval[0])


def _classification(c, budget=None):
    out = {
        "lambda": c.lam, "verdict": c.verdict.value, "kernel_inertia": list(c.kernel_inertia),
        "kernel_dim": c.kernel.d, "budget_plus": c.budget_plus, "budget_minus": c.budget_minus,
        "pi_plus": c.pi_plus, "pi_minus": c.pi_minus, "slack_dim": c.margins.slack_dim,
        "nu": list(c.margins.nu), "nu_minus": list(c.margins.nu_minus),
    }
    if budget is not None:
        out["requested_budget"] = budget
        out["certified_plus_at_budget"] = c.margins.certified_plus(budget)
        out["certified_minus_at_budget"] = c.margins.certified_minus(budget)
    return out


def _rank_tol(args, default=RANK_TOL):
    if args.rank_tol is None:
        return default
    if not args.rank_tol > 0:
        raise InputError("--rank-tol must be positive")
    return args.rank_tol


def cmd_classify(prob, args):
    lam = _need_lambda(args)
    c = classify_point(prob.A, prob.space, lam, args.epsilon, _rank_tol(args))
    K = c.kernel.basis
    N = prob.A - lam * np.eye(prob.n)
    resid = {"kernel_residual": float(np.linalg.norm(N @ K, 2)) if K.shape[1] else 0.0}
    return _classification(c, args.budget), resid, True, None


def cmd_scan(prob, args):
    a, b = _need_interval(args)
    r = scan_interval(prob.A, prob.space, a, b, args.epsilon, args.grid, _rank_tol(args))
    res = {
        "interval": list(r.interval), "sigma": list(r.sigma), "alpha": r.alpha,
        "neighborhood": list(r.neighborhood), "all_offreal_regular": r.all_offreal_regular,
        "nonreal_in_neighborhood": list(r.nonreal_in_neighborhood),
        "eigenvalues": [_classification(c) for c in r.eigenvalues_in_U], "notes": list(r.notes),
    }
    return res, {}, True, None


def cmd_aps(prob, args):
    lam = _need_lambda(args)
    tol = _rank_tol(args)
    ker = kernel_basis(prob.A, lam, tol)
    d = aps_decompose(ker, prob.space, tol)
    G = prob.space.G
    resid = {}
    resid["p_neutrality"] = float(np.abs(compress_gram(d.p_space, prob.space)).max(initial=0.0))
    if d.pairing_dim:
        J = d.j_operator()
        W = d.pairing_basis
        resid["j_involution"] = float(np.linalg.norm(J @ J @ W - W, 2))
        resid["pairing"] = float(np.linalg.norm(d.y_basis.conj().T @ G @ d.x_basis - np.eye(d.pairing_dim), 2))
    comp = orthogonal_companion(ker, prob.space)
    resid["companion_split"] = float(comp.distance(d.isotropic + d.m_space))
    proj = d.projections()
    resid["projection_sum"] = float(np.linalg.norm(sum(proj.values()) - np.eye(prob.n), 2))
    res = {
        "lambda": lam, "kernel_dim": ker.d,
        "dims": {"plus": d.l_plus.d, "minus": d.l_minus.d, "l_00": d.l_00.d,
                 "l_01": d.l_01.d, "p": d.p_space.d, "m": d.m_space.d},
        "bases": {"plus": d.l_plus.basis, "minus": d.l_minus.basis, "l_00": d.l_00.basis,
                  "l_01": d.x_basis, "p": d.y_basis, "m": d.m_space.basis},
        "j_matrix": d.j_matrix,
    }
    ok = all(v <= 1e-8 for v in resid.values())
    return res, resid, ok, None


def cmd_perturb(prob, args):
    lam = _need_lambda(args)
    r = build_type_perturbation(prob.A, prob.space, lam, args.orientation, _rank_tol(args),
                                args.epsilon)
    good = ("positive_type", "regular") if args.orientation == "plus" else ("negative_type", "regular")
    Fn = float(np.linalg.norm(r.f_matrix, 2))
    res = {
        "lambda": lam, "orientation": r.orientation, "f_matrix": r.f_matrix, "rank_f": r.rank_f,
        "predicted_rank": r.predicted_rank, "post_verdict": _classification(r.post_verdict),
        "eigenvalues_after": np.sort_complex(np.linalg.eigvals(prob.A + r.f_matrix)),
    }
    resid = {"g_symmetry": r.g_symmetry_residual, "kernel_distance": r.kernel_distance}
    ok = (r.rank_f == r.predicted_rank and r.post_verdict.verdict.value in good
          and r.g_symmetry_residual <= 1e-8 * max(1.0, prob.space.gram_norm * Fn)
          and r.kernel_distance <= 1e-6)
    return res, resid, ok, None


def cmd_spectral(prob, args):
    iv = _need_interval(args)
    sp = local_spectral_function(prob.A, prob.space, iv, proj_tol=PROJ_TOL)
    res = {
        "interval": list(sp.interval), "rank": sp.rank, "range_inertia": list(sp.range_inertia),
        "delta_plus": sp.decomposition.delta_plus, "e_matrix": sp.e_matrix,
        "enclosed_eigenvalues": list(sp.enclosed), "quadrature_nodes_used": sp.quadrature_nodes_used,
        "contour": {"shape": sp.contour.shape, "center": sp.contour.center,
                    "semi_axes": list(sp.contour.geometry["semi_axes"])},
        "notes": list(sp.notes),
    }
    resid = {"idempotency": sp.idempotency_residual, "commutation": sp.commutation_residual,
             "g_symmetry": sp.g_symmetry_residual}
    ok = (sp.idempotency_residual <= PROJ_TOL
          and sp.g_symmetry_residual <= PROJ_TOL * max(1.0, prob.space.gram_norm))
    return res, resid, ok, None


def cmd_axioms(prob, args):
    if not args.interval:
        raise InputError("axioms requires at least one --interval")
    ivs = [_parse_interval(t) for t in args.interval]
    rep = verify_axioms(prob.A, prob.space, ivs, seed=args.seed)
    res = {"intervals": [list(iv) for iv in ivs], "per_interval": list(rep.per_interval),
           "notes": list(rep.notes)}
    resid = rep.as_dict()
    return res, resid, rep.worst <= AXIOM_TOL, None


def cmd_resolvent(prob, args):
    if args.interval:
        a, b = _parse_interval(args.interval[0])
        r = interval_bound_check(prob.A, prob.space, a, b, grid=min(args.grid, 32),
                                 t_min=args.t_min, t_max=max(args.t_max, 10 * args.t_min),
                                 epsilon=args.epsilon, rank_tol=_rank_tol(args))
        res = {"mode": "interval", "interval": list(r.interval), "sigma": list(r.sigma),
               "positive_type": r.positive_type, "k": r.k, "c": r.c, "M_hat": r.M_hat,
               "bounded": r.bounded, "unrestricted_bounded": r.unrestricted_bounded,
               "t_values": list(r.t_values), "construction": r.construction}
        resid = {"slope": r.slope, "unrestricted_slope": r.unrestricted_slope}
        return res, resid, r.bounded, None
    x0 = _need_lambda(args)
    if x0.imag:
        raise InputError("resolvent --lambda must be real (the probe line is x0 + i t)")
    g = growth_order(prob.A, x0.real, args.t_min, args.t_max, args.samples, _rank_tol(args))
    res = {"mode": "growth", "x0": g.x0, "t_values": list(g.t_values), "norms": list(g.norms),
           "m_hat": g.m_hat, "M_hat": g.M_hat, "predicted_m": g.predicted_m,
           "fit_window": list(g.fit_window)}
    return res, {"r2": g.r2}, True, growth_csv(g)


def cmd_margin(prob, args):
    k_max = args.budget if args.budget is not None else prob.n
    if k_max < 0:
        raise InputError("--budget must be non-negative")
    if args.interval:
        a, b = _parse_interval(args.interval[0])
        lams = [complex(x) for x in np.linspace(a, b, args.grid)]
    else:
        lams = [_need_lambda(args)]
    rows, fields = [], []
    for lam in lams:
        mf = definiteness_margin(prob.A, prob.space, lam, args.epsilon, k_max)
        fields.append({"lambda": lam, "slack_dim": mf.slack_dim, "nu": list(mf.nu),
                       "nu_minus": list(mf.nu_minus), "positive_type": mf.positive_type,
                       "negative_type": mf.negative_type})
        rows += [(lam, args.epsilon, k, nu) for k, nu in zip(mf.budgets, mf.nu)]
    return {"epsilon": args.epsilon, "k_max": k_max, "points": fields}, {}, True, margin_csv(rows)


def cmd_gallery(args):
    if args.spec:
        try:
            spec = CanonicalSpec.from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read spec file: {exc}") from exc
    else:
        spec = random_canonical_spec(np.random.default_rng(args.seed))
    A, space, truth = canonical_pair(spec)
    if args.save_problem:
        save_problem(args.save_problem, A, space, {"canonical_spec": spec.to_dict()})
    res = {
        "spec": spec.to_dict(), "n": space.n, "matrix_a": A, "gram_g": space.G,
        "truth": [{"eigenvalue": js.eigenvalue, "lengths": list(js.lengths),
                   "signs": list(js.signs) if js.signs is not None else None} for js in truth],
    }
    return res, {"g_symmetry": g_symmetry_residual(A, space)}, True, None


HANDLERS = {
    "classify": cmd_classify, "scan": cmd_scan, "aps": cmd_aps, "perturb": cmd_perturb,
    "spectral-function": cmd_spectral, "axioms": cmd_axioms, "resolvent": cmd_resolvent,
    "margin-field": cmd_margin,
}


def _digest_args(args):
    d = {k: v for k, v in vars(args).items() if k not in ("out", "plots", "save_problem", "problem", "gram")}
    return d


def run_command(argv=None, stdout=None):
    """Run one command; returns the exit code."""
    stdout = stdout if stdout is not None else sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_normalize_argv(argv))
    except InputError as exc:
        print(f"pispec: error: {exc}", file=sys.stderr)
        return 1
    problem = None
    try:
        if args.command == "gallery":
            res, resid, ok, plot = cmd_gallery(args)
        else:
            problem = load_problem(args.problem, args.gram)
            res, resid, ok, plot = HANDLERS[args.command](problem, args)
    except InputError as exc:
        print(f"pispec: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except PispecError as exc:
        rep = make_report(args.command, {}, {}, problem.warnings if problem else [], problem,
                          _digest_args(args), status="refused", error=exc)
        print(f"pispec: {exc.code}: {exc}", file=sys.stderr)
        return 2 if _emit(rep, args, None, stdout) else 1
    status = "ok" if ok else "tolerance-exceeded"
    rep = make_report(args.command, res, resid, problem.warnings if problem else [], problem,
                      _digest_args(args), status=status)
    if args.plots is not None and plot is None:
        print(f"pispec: note: {args.command} produces no CSV data", file=sys.stderr)
    if not _emit(rep, args, plot, stdout):
        return 1
    return 0 if ok else 2


def _emit(rep, args, plot, stdout):
    try:
        text = emit_report(rep, args.out, args.plots, plot)
    except InputError as exc:
        print(f"pispec: {exc.code}: {exc}", file=sys.stderr)
        return False
    if args.out is None:
        stdout.write(text)
    return True


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
