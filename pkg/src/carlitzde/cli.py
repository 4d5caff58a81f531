"""Command-line front end.

Subcommands: `carlitz bracket|factorial|feval`, `solve
model|system|euler2|euler-general|hypergeom`, `eval`, `classify`,
`verify`, `replay`.  Exit codes: 0 on success (and a passing verify),
1 for domain errors (and a failing verify), 2 for usage and file
format errors.

Scalar options take either an inline integer (a constant in the
coefficient field, reduced mod p when |n| < p, an encoding otherwise)
or `@path` pointing at a serialized file.  `--out PATH` writes the
primary artifact plus a `PATH.manifest` reproducibility record holding
the full text of every file input, the seed, and the branch log, so
`replay PATH.manifest` re-creates the artifact byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional

from . import textio
from .analysis import (EulerEq, HypergeomEq, ModelEq, SystemEq, classify,
                       residual_check)
from .carlitz import CarlitzContext
from .field import AlgebraError, FieldDesc, Series, SeriesMatrix
from .operators import CarlitzCoeffs, MatrixCarlitzCoeffs, carlitz_eval
from .solvers import (RegularSystem, euler_general, euler_m2,
                      hypergeom_coeffs, model_matrix, model_scalar,
                      regular_system_w)

MANIFEST_FORMAT = "carlitzde-manifest 1"


class UsageError(ValueError):
    """Bad invocation caught after argparse (exit code 2)."""


class Job:
    """One fully specified run: command path, options, input texts.

    Inputs hold the complete text of every `@file` option, so a job
    rebuilt from a manifest never touches the original paths.
    """

    def __init__(self, command, options, inputs=None):
        self.command = list(command)
        self.options = dict(options)
        self.inputs = dict(inputs or {})

    def opt(self, name, default=None):
        v = self.options.get(name)
        return default if v is None else v

    def text_of(self, name: str) -> str:
        """Content of the @file behind option `name`, reading at most once."""
        if name not in self.inputs:
            path = self.options[name][1:]
            try:
                with open(path, "r") as fh:
                    self.inputs[name] = fh.read()
            except OSError as exc:
                raise UsageError("cannot read %s: %s" % (path, exc))
        return self.inputs[name]


class RunResult:
    def __init__(self, summary: str, machine, artifact: Optional[str] = None,
                 branch_log=None, ok: bool = True):
        self.summary = summary
        self.machine = list(machine)
        self.artifact = artifact
        self.branch_log = branch_log
        self.ok = ok


# -- option resolution


def _parse_prec(job) -> Optional[Fraction]:
    v = job.opt("prec")
    if v is None:
        return None
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError):
        raise UsageError("bad precision %r" % v)


def _field_of(job) -> FieldDesc:
    if job.opt("field") is not None:
        if not job.options["field"].startswith("@"):
            raise UsageError("--field takes @path")
        return textio.parse_field(job.text_of("field"))
    if job.opt("p") is None:
        raise UsageError("give a field via --p [--v --f] or --field @path")
    try:
        return FieldDesc(int(job.options["p"]),
                         int(job.opt("v", "1")), int(job.opt("f", "1")))
    except (ValueError, AlgebraError) as exc:
        raise UsageError("bad field parameters: %s" % exc)


def _scalar_arg(job, name: str, field: FieldDesc,
                default: Optional[str] = None):
    """Series (or matrix) from an inline literal or an @file option."""
    v = job.opt(name, default)
    if v is None:
        raise UsageError("missing --%s" % name)
    if isinstance(v, str) and v.startswith("@"):
        kind, obj = textio.parse_any(job.text_of(name), field=field)
        if kind not in ("series", "matrix"):
            raise UsageError("--%s file holds a %s, expected a series"
                             % (name, kind))
        return obj
    try:
        return Series.const(field, field.elem(int(v)))
    except ValueError:
        raise UsageError("--%s wants an integer or @path, got %r" % (name, v))


def _series_arg(job, name, field, default=None) -> Series:
    s = _scalar_arg(job, name, field, default)
    if not isinstance(s, Series):
        raise UsageError("--%s must be a scalar series" % name)
    return s


def _matrix_arg(job, name: str, field: FieldDesc) -> SeriesMatrix:
    if job.opt(name) is None or not job.options[name].startswith("@"):
        raise UsageError("--%s takes @path to a matrix file" % name)
    return textio.parse_matrix(job.text_of(name), field=field)


def _carlitz_arg(job, name: str, field=None):
    if job.opt(name) is None or not job.options[name].startswith("@"):
        raise UsageError("--%s takes @path to a carlitz file" % name)
    kind, obj = textio.parse_any(job.text_of(name), field=field)
    if kind == "carlitz_list":
        idx = _int_opt(job, "index", 0)
        if not 0 <= idx < len(obj):
            raise UsageError("--index %d is out of range (file has %d "
                             "expansions)" % (idx, len(obj)))
        return obj[idx]
    if kind != "carlitz":
        raise UsageError("--%s file holds a %s, expected a carlitz block"
                         % (name, kind))
    return obj


def _int_opt(job, name: str, default: Optional[int] = None) -> int:
    v = job.opt(name)
    if v is None:
        if default is None:
            raise UsageError("missing --%s" % name)
        return default
    try:
        return int(v)
    except ValueError:
        raise UsageError("--%s wants an integer, got %r" % (name, v))


def _fmt_val(v) -> str:
    from math import inf
    return "inf" if v == inf else str(Fraction(v))


def _coeff_stats(c) -> list:
    lines = ["n: %d" % (len(c.coeffs) - 1), "complete: %d" % int(c.complete)]
    pl = textio._profile_line(c.profile)
    if pl is not None:
        lines.append("profile: %s" % pl[len("profile "):])
    for i in range(len(c.coeffs)):
        ci = c.coeffs[i]
        if isinstance(ci, SeriesMatrix):
            v = min(ci[a, b].val for a in range(ci.rows)
                    for b in range(ci.cols))
        else:
            v = ci.val
        lines.append("val.%d: %s" % (i, _fmt_val(v)))
    return lines


# -- command handlers


def _run_carlitz(job: Job) -> RunResult:
    field = _field_of(job)
    ctx = CarlitzContext(field)
    prec = _parse_prec(job)
    which = job.command[1]
    if which == "bracket":
        s = ctx.bracket(_int_opt(job, "j"))
        art = textio.series_to_text(s)
        return RunResult(art.rstrip("\n"),
                         ["kind: series", "val: %s" % _fmt_val(s.val)], art)
    if which == "factorial":
        d, l = ctx.factorials(_int_opt(job, "i"))
        art = textio.series_list_to_text([d, l])
        return RunResult("D then L:\n" + art.rstrip("\n"),
                         ["kind: series_list",
                          "val.D: %s" % _fmt_val(d.val),
                          "val.L: %s" % _fmt_val(l.val)], art)
    if which == "feval":
        t = _series_arg(job, "t", field)
        s = ctx.f_eval(_int_opt(job, "i"), t, prec=prec)
        art = textio.series_to_text(s)
        return RunResult(art.rstrip("\n"),
                         ["kind: series", "val: %s" % _fmt_val(s.val)], art)
    raise UsageError("unknown carlitz action %r" % which)


def _run_solve(job: Job) -> RunResult:
    field = _field_of(job)
    ctx = CarlitzContext(field)
    prec = _parse_prec(job)
    which = job.command[1]

    if which == "model":
        lam = _scalar_arg(job, "lambda", field)
        n = _int_opt(job, "n")
        if isinstance(lam, SeriesMatrix):
            c0 = (_matrix_arg(job, "c0", field) if job.opt("c0") is not None
                  else SeriesMatrix.identity(field, lam.rows))
            sol = model_matrix(ctx, lam, c0, n, prec=prec)
        else:
            sol = model_scalar(ctx, lam, _series_arg(job, "c0", field, "1"),
                               n, prec=prec)
        art = textio.carlitz_to_text(sol.coeffs)
        return RunResult("model expansion to order %d" % n,
                         ["kind: carlitz"] + _coeff_stats(sol.coeffs), art)

    if which == "system":
        if job.opt("pi") is None or not job.options["pi"].startswith("@"):
            raise UsageError("--pi takes @path to a matrix list file")
        pis = textio.parse_matrices(job.text_of("pi"), field=field)
        system = RegularSystem(ctx, pis)
        k = _int_opt(job, "n")
        w = regular_system_w(system, k, prec=prec)
        art = textio.matrices_to_text(w.w)
        machine = ["kind: matrix_list", "m: %d" % system.m, "K: %d" % k]
        for i, wk in enumerate(w.w):
            v = min(wk[a, b].val for a in range(wk.rows)
                    for b in range(wk.cols))
            machine.append("val.%d: %s" % (i, _fmt_val(v)))
        return RunResult("w_0..w_%d for an order-%d system" % (k, system.m),
                         machine, art)

    if which == "euler2":
        pair = euler_m2(ctx, _series_arg(job, "b0", field),
                        _series_arg(job, "b1", field), _int_opt(job, "n"),
                        prec=prec)
        art = textio.carlitz_list_to_text([pair.psi1, pair.psi2])
        machine = (["kind: carlitz_list",
                    "repeated: %d" % int(pair.repeated),
                    "delta_val: %s" % _fmt_val(pair.delta.val),
                    "lam1_val: %s" % _fmt_val(pair.lam1.val),
                    "lam2_val: %s" % _fmt_val(pair.lam2.val)]
                   + ["psi1." + s for s in _coeff_stats(pair.psi1)]
                   + ["psi2." + s for s in _coeff_stats(pair.psi2)])
        summary = ("independent solutions psi1, psi2 (%s roots)"
                   % ("repeated" if pair.repeated else "distinct"))
        return RunResult(summary, machine, art)

    if which == "euler-general":
        res = euler_general(ctx, _matrix_arg(job, "b0", field),
                            _matrix_arg(job, "nil", field),
                            _matrix_arg(job, "x", field),
                            _matrix_arg(job, "c0", field),
                            _int_opt(job, "n"), prec=prec)
        art = textio.carlitz_list_to_text([res.psi, res.phi])
        machine = (["kind: carlitz_list", "m: %d" % res.b0.rows]
                   + ["psi." + s for s in _coeff_stats(res.psi)])
        return RunResult("matrix solutions Psi and Phi = X^-1 Psi X",
                         machine, art)

    if which == "hypergeom":
        # hypergeom is the one randomized solver; pin its seed into the
        # job so the manifest always carries it
        job.options.setdefault("seed", "0")
        theta = job.opt("theta")
        theta_seq = None
        if theta is not None:
            try:
                theta_seq = [int(t) for t in theta.split(",") if t != ""]
            except ValueError:
                raise UsageError("--theta wants comma-separated integers")
        run = hypergeom_coeffs(ctx, _int_opt(job, "a"), _int_opt(job, "b"),
                               _series_arg(job, "c0", field, "1"),
                               _series_arg(job, "c1", field, "1"),
                               _int_opt(job, "n"),
                               policy=job.opt("policy", "principal"),
                               theta_seq=theta_seq,
                               seed=_int_opt(job, "seed", 0), prec=prec)
        art = textio.carlitz_to_text(run.coeffs)
        log = ",".join(str(t) for t in run.branch_log)
        machine = (["kind: carlitz", "policy: %s" % run.policy,
                    "branch_log: %s" % log] + _coeff_stats(run.coeffs))
        return RunResult("hypergeometric coefficients, policy %s"
                         % run.policy, machine, art, branch_log=log)

    raise UsageError("unknown solve target %r" % which)


def _run_eval(job: Job) -> RunResult:
    u = _carlitz_arg(job, "u")
    field = u.ctx.field
    t = _series_arg(job, "t", field)
    s = carlitz_eval(u, t, prec=_parse_prec(job))
    art = textio.series_to_text(s) if isinstance(s, Series) \
        else textio.matrix_to_text(s)
    if isinstance(s, Series):
        v = s.val
    else:
        v = min(s[a, b].val for a in range(s.rows) for b in range(s.cols))
    return RunResult(art.rstrip("\n"),
                     ["kind: %s" % ("series" if isinstance(s, Series)
                                    else "matrix"),
                      "val: %s" % _fmt_val(v)], art)


def _run_classify(job: Job) -> RunResult:
    u = _carlitz_arg(job, "u")
    rep = classify(u)
    return RunResult(rep.as_text(), rep.as_machine(),
                     "\n".join(rep.as_machine()) + "\n")


def _run_verify(job: Job) -> RunResult:
    u = _carlitz_arg(job, "u")
    field = u.ctx.field
    kind = job.opt("kind")
    if kind == "model":
        eq = ModelEq(_scalar_arg(job, "lambda", field))
    elif kind == "system":
        if job.opt("pi") is None or not job.options["pi"].startswith("@"):
            raise UsageError("--pi takes @path to a matrix list file")
        eq = SystemEq(textio.parse_matrices(job.text_of("pi"), field=field))
    elif kind == "euler":
        bs = job.opt("b")
        if not bs:
            raise UsageError("verify --kind euler needs --b (repeatable)")
        coeffs = []
        for i, v in enumerate(bs):
            sub = Job(job.command, {"b.%d" % i: v}, job.inputs)
            coeffs.append(_series_arg(sub, "b.%d" % i, field))
            job.inputs.update(sub.inputs)
        eq = EulerEq(coeffs)
    elif kind == "hypergeom":
        bs = job.opt("b")
        if not bs:
            raise UsageError("verify --kind hypergeom needs --a and --b")
        try:
            b = int(bs[0] if isinstance(bs, (list, tuple)) else bs)
        except ValueError:
            raise UsageError("--b wants an integer for hypergeom")
        eq = HypergeomEq(_int_opt(job, "a"), b)
    else:
        raise UsageError("--kind must be model, system, euler or hypergeom")
    points = ()
    if job.opt("points") is not None:
        if not job.options["points"].startswith("@"):
            raise UsageError("--points takes @path to a series list file")
        points = textio.parse_series_list(job.text_of("points"), field=field)
    rep = residual_check(eq, u, points=points, prec=_parse_prec(job))
    return RunResult(rep.as_text(), rep.as_machine(),
                     "\n".join(rep.as_machine()) + "\n", ok=rep.passed)


_HANDLERS = {"carlitz": _run_carlitz, "solve": _run_solve,
             "eval": _run_eval, "classify": _run_classify,
             "verify": _run_verify}

# options whose values are repeatable lists (joined with newlines in
# manifests)
_LIST_OPTS = ("b",)


def run_job(job: Job) -> RunResult:
    return _HANDLERS[job.command[0]](job)


# -- manifests


def job_manifest(job: Job, result: RunResult) -> str:
    entries = [("format", MANIFEST_FORMAT),
               ("command", " ".join(job.command))]
    for k in sorted(job.options):
        v = job.options[k]
        if v is None:
            continue
        if isinstance(v, (list, tuple)):
            v = "\n".join(str(x) for x in v)
        entries.append(("opt.%s" % k, v))
    for k in sorted(job.inputs):
        entries.append(("input.%s" % k, job.inputs[k]))
    if result.branch_log is not None:
        entries.append(("branch_log", result.branch_log))
    return textio.manifest_to_text(entries)


def job_from_manifest(text: str) -> Job:
    mani = textio.parse_manifest(text)
    if mani.get("format") != MANIFEST_FORMAT:
        raise textio.FormatError("not a %s file" % MANIFEST_FORMAT)
    if "command" not in mani:
        raise textio.FormatError("manifest has no command")
    command = mani["command"].split()
    if not command or command[0] not in _HANDLERS:
        raise textio.FormatError("manifest command %r is not runnable"
                                 % mani.get("command"))
    options = {}
    inputs = {}
    for k, v in mani.items():
        if k.startswith("opt."):
            name = k[4:]
            if name in _LIST_OPTS and command[0] == "verify":
                options[name] = v.split("\n")
            else:
                options[name] = v
        elif k.startswith("input."):
            inputs[k[6:]] = v
    return Job(command, options, inputs)


# -- argument parsing


def _add_field_opts(p):
    p.add_argument("--field", metavar="@PATH",
                   help="field file (overrides --p/--v/--f)")
    p.add_argument("--p", help="characteristic (prime)")
    p.add_argument("--v", help="q = p^v (default 1)")
    p.add_argument("--f", help="coefficient field F_{q^f} (default 1)")


def _add_common(p, out=True):
    p.add_argument("--prec", help="working precision, integer or a/b")
    p.add_argument("--machine", action="store_true",
                   help="flat key:value output")
    if out:
        p.add_argument("--out", metavar="PATH",
                       help="write the artifact here plus PATH.manifest")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="carlitzde",
        description="Carlitz-derivative differential equations at a "
                    "regular singularity: solve, evaluate, classify, "
                    "verify.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    pc = sub.add_parser("carlitz", help="basic Carlitz data")
    pcs = pc.add_subparsers(dest="action", required=True)
    b = pcs.add_parser("bracket", help="[j] = x^(q^j) - x")
    b.add_argument("--j", required=True)
    _add_field_opts(b), _add_common(b)
    fa = pcs.add_parser("factorial", help="D_i and L_i")
    fa.add_argument("--i", required=True)
    _add_field_opts(fa), _add_common(fa)
    fe = pcs.add_parser("feval", help="f_i(t)")
    fe.add_argument("--i", required=True)
    fe.add_argument("--t", required=True, help="integer or @series")
    _add_field_opts(fe), _add_common(fe)

    ps = sub.add_parser("solve", help="run a solver")
    pss = ps.add_subparsers(dest="target", required=True)

    m = pss.add_parser("model", help="tau d u = lambda u")
    m.add_argument("--lambda", dest="lam", required=True,
                   help="integer, @series or @matrix")
    m.add_argument("--c0", help="initial coefficient (default 1)")
    m.add_argument("-n", required=True, help="expansion order")
    _add_field_opts(m), _add_common(m)

    s = pss.add_parser("system", help="tau d u = P(tau) u")
    s.add_argument("--pi", required=True, help="@file of pi_0..pi_J blocks")
    s.add_argument("-n", required=True, help="truncation K")
    _add_field_opts(s), _add_common(s)

    e2 = pss.add_parser("euler2", help="order-2 scalar equation")
    e2.add_argument("--b0", required=True)
    e2.add_argument("--b1", required=True)
    e2.add_argument("-n", required=True)
    _add_field_opts(e2), _add_common(e2)

    eg = pss.add_parser("euler-general", help="order-m matrix form")
    eg.add_argument("--b0", required=True, help="@matrix, diagonal part")
    eg.add_argument("--nil", required=True, help="@matrix, nilpotent part")
    eg.add_argument("--x", required=True, help="@matrix, change of basis")
    eg.add_argument("--c0", required=True, help="@matrix, initial data")
    eg.add_argument("-n", required=True)
    _add_field_opts(eg), _add_common(eg)

    h = pss.add_parser("hypergeom", help="order-2 hypergeometric recursion")
    h.add_argument("--a", required=True)
    h.add_argument("--b", required=True)
    h.add_argument("--c0", help="default 1")
    h.add_argument("--c1", help="default 1")
    h.add_argument("-n", required=True)
    h.add_argument("--policy", choices=("principal", "generic", "scripted"),
                   default="principal")
    h.add_argument("--theta", help="scripted branch choices, comma-separated")
    h.add_argument("--seed", help="seed for the generic policy (default 0)")
    _add_field_opts(h), _add_common(h)

    ev = sub.add_parser("eval", help="evaluate a carlitz expansion")
    ev.add_argument("--u", required=True, help="@carlitz file")
    ev.add_argument("--t", required=True, help="integer or @series")
    ev.add_argument("--index", help="expansion to pick from a list file")
    _add_common(ev)

    cl = sub.add_parser("classify", help="regularity class of an expansion")
    cl.add_argument("--u", required=True, help="@carlitz file")
    cl.add_argument("--index", help="expansion to pick from a list file")
    _add_common(cl)

    vf = sub.add_parser("verify", help="residual check against an equation")
    vf.add_argument("--kind", required=True,
                    choices=("model", "system", "euler", "hypergeom"))
    vf.add_argument("--u", required=True, help="@carlitz file")
    vf.add_argument("--lambda", dest="lam", help="model coefficient")
    vf.add_argument("--pi", help="@file of pi blocks (system)")
    vf.add_argument("--b", action="append",
                    help="euler coefficient b_k, repeatable")
    vf.add_argument("--a", help="hypergeom parameter")
    vf.add_argument("--points", help="@file of extra test points")
    vf.add_argument("--index", help="expansion to pick from a list file")
    _add_common(vf)

    rp = sub.add_parser("replay", help="re-run a manifest byte for byte")
    rp.add_argument("manifest", help="path to a .manifest file")
    rp.add_argument("--machine", action="store_true")
    rp.add_argument("--out", metavar="PATH")
    return ap


_SKIP_KEYS = ("cmd", "action", "target", "machine", "out", "manifest")
_RENAME = {"lam": "lambda"}


def job_from_args(ns: argparse.Namespace) -> Job:
    command = [ns.cmd]
    for attr in ("action", "target"):
        if getattr(ns, attr, None) is not None:
            command.append(getattr(ns, attr))
    options = {}
    for k, v in vars(ns).items():
        if k in _SKIP_KEYS or v is None:
            continue
        options[_RENAME.get(k, k)] = v
    return Job(command, options)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    machine = getattr(ns, "machine", False)
    out = getattr(ns, "out", None)
    try:
        if ns.cmd == "replay":
            try:
                with open(ns.manifest, "r") as fh:
                    job = job_from_manifest(fh.read())
            except OSError as exc:
                raise UsageError(str(exc))
        else:
            job = job_from_args(ns)
        result = run_job(job)
        if out is not None:
            art = result.artifact if result.artifact is not None \
                else result.summary + "\n"
            with open(out, "w") as fh:
                fh.write(art)
            with open(out + ".manifest", "w") as fh:
                fh.write(job_manifest(job, result))
        print("\n".join(result.machine) if machine else result.summary)
        return 0 if result.ok else 1
    except (UsageError, textio.FormatError) as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except (AlgebraError, ValueError) as exc:
        print("%s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
