"""Plain-text serialization with bit-exact round-trips.

Grammar, one construct per block, nestable:

    field p=<p> v=<v> f=<f> modulus=<c0,c1,...,1>
    series e=<e> prec=<num>/<den or inf>
    <num>/<den> : <F_p coordinates, comma-separated>   (per stored term)
    matrix <rows> <cols>            followed by row-major series blocks
    carlitz n=<N> complete=<0|1>    followed by N+1 series or matrix blocks
    profile finite last=<n>         (optional line after a carlitz header)
    profile arithmetic start=<n> base=<r> step=<r>
    profile exponential start=<n> alpha=<r> beta=<r>

Exponent lines are strictly increasing.  Top-level dumps are
self-contained: they start with their field line; nested blocks never
repeat it.  prec=inf marks an exact value.  Manifests are flat
`key: value` lines with backslash-escaped newlines in values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence, Union

from .carlitz import CarlitzContext
from .field import FieldDesc, Series, SeriesMatrix
from .operators import (ArithmeticTail, CarlitzCoeffs, ExponentialTail,
                        FiniteTail, MatrixCarlitzCoeffs)


class FormatError(ValueError):
    """Malformed text input; carries the 1-based offending line."""

    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(msg if line is None
                         else "line %d: %s" % (line, msg))


# -- scalar pieces


def _fmt_frac(v: Union[Fraction, int]) -> str:
    v = Fraction(v)
    return "%d/%d" % (v.numerator, v.denominator)


def _fmt_prec(prec: Optional[Fraction]) -> str:
    return "inf" if prec is None else _fmt_frac(prec)


def _parse_frac(tok: str, line: int) -> Fraction:
    try:
        if "/" in tok:
            num, den = tok.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(tok))
    except (ValueError, ZeroDivisionError):
        raise FormatError("bad rational %r" % tok, line)


def _coords_of(field: FieldDesc, enc: int) -> str:
    digits = []
    for _ in range(field.n):
        digits.append(str(enc % field.p))
        enc //= field.p
    return ",".join(digits)


def _enc_of(field: FieldDesc, tok: str, line: int) -> int:
    parts = tok.split(",")
    if len(parts) > field.n:
        raise FormatError("too many coordinates for this field", line)
    enc = 0
    try:
        for d in reversed(parts):
            c = int(d)
            if not 0 <= c < field.p:
                raise ValueError
            enc = enc * field.p + c
    except ValueError:
        raise FormatError("bad coordinate list %r" % tok, line)
    return enc


# -- cursor over numbered lines


class _Cursor:
    __slots__ = ("lines", "pos")

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def peek(self) -> Optional[str]:
        while self.pos < len(self.lines):
            s = self.lines[self.pos].strip()
            if s and not s.startswith("#"):
                return s
            self.pos += 1
        return None

    def take(self) -> str:
        s = self.peek()
        if s is None:
            raise FormatError("unexpected end of input", len(self.lines))
        self.pos += 1
        return s

    @property
    def lineno(self) -> int:
        return self.pos + 1


def _kv_line(line: str, head: str, keys: Sequence[str], lineno: int) -> dict:
    parts = line.split()
    if not parts or parts[0] != head:
        raise FormatError("expected a %r header" % head, lineno)
    got = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise FormatError("expected key=value, got %r" % tok, lineno)
        k, v = tok.split("=", 1)
        if k not in keys:
            raise FormatError("unknown key %r in %r header" % (k, head),
                              lineno)
        got[k] = v
    return got


# -- field


def field_to_text(fd: FieldDesc) -> str:
    return "field p=%d v=%d f=%d modulus=%s\n" % (
        fd.p, fd.v, fd.f, ",".join(str(c) for c in fd.modulus))


def _parse_field_block(cur: _Cursor) -> FieldDesc:
    lineno = cur.lineno
    got = _kv_line(cur.take(), "field", ("p", "v", "f", "modulus"), lineno)
    for k in ("p", "v", "f", "modulus"):
        if k not in got:
            raise FormatError("field header is missing %s=" % k, lineno)
    try:
        p, v, f = int(got["p"]), int(got["v"]), int(got["f"])
        modulus = [int(c) for c in got["modulus"].split(",")]
    except ValueError:
        raise FormatError("field header has non-integer data", lineno)
    try:
        return FieldDesc(p, v, f, modulus=modulus)
    except Exception as exc:
        raise FormatError("bad field parameters: %s" % exc, lineno)


def parse_field(text: str) -> FieldDesc:
    cur = _Cursor(text)
    fd = _parse_field_block(cur)
    if cur.peek() is not None:
        raise FormatError("trailing data after field line", cur.lineno)
    return fd


# -- series


def _series_block(s: Series) -> str:
    out = ["series e=%d prec=%s" % (s.e, _fmt_prec(s.prec))]
    for exp in s.exponents():
        out.append("%s : %s" % (_fmt_frac(exp),
                                _coords_of(s.field, s.coeff(exp).enc)))
    return "\n".join(out) + "\n"


def series_to_text(s: Series, with_field: bool = True) -> str:
    head = field_to_text(s.field) if with_field else ""
    return head + _series_block(s)


def _parse_series_block(cur: _Cursor, field: FieldDesc) -> Series:
    lineno = cur.lineno
    got = _kv_line(cur.take(), "series", ("e", "prec"), lineno)
    if "e" not in got or "prec" not in got:
        raise FormatError("series header needs e= and prec=", lineno)
    try:
        e = int(got["e"])
    except ValueError:
        raise FormatError("bad ramification index %r" % got["e"], lineno)
    prec = None if got["prec"] == "inf" else _parse_frac(got["prec"], lineno)
    terms = {}
    last = None
    while True:
        nxt = cur.peek()
        if nxt is None or " : " not in nxt:
            break
        lineno = cur.lineno
        left, right = cur.take().split(" : ", 1)
        exp = _parse_frac(left.strip(), lineno)
        if last is not None and exp <= last:
            raise FormatError("exponents must be strictly increasing",
                              lineno)
        last = exp
        enc = _enc_of(field, right.strip(), lineno)
        if enc == 0:
            raise FormatError("zero coefficients are never stored", lineno)
        terms[exp] = enc
    try:
        s = Series.build(field, terms, prec=prec)
    except Exception as exc:
        raise FormatError("bad series data: %s" % exc, lineno)
    if s.e != e:
        raise FormatError("declared e=%d does not match the terms (e=%d)"
                          % (e, s.e), lineno)
    return s


# -- matrix


def _matrix_block(m: SeriesMatrix) -> str:
    out = ["matrix %d %d" % (m.rows, m.cols)]
    for i in range(m.rows):
        for j in range(m.cols):
            out.append(_series_block(m[i, j]).rstrip("\n"))
    return "\n".join(out) + "\n"


def matrix_to_text(m: SeriesMatrix, with_field: bool = True) -> str:
    head = field_to_text(m.field) if with_field else ""
    return head + _matrix_block(m)


def _parse_matrix_block(cur: _Cursor, field: FieldDesc) -> SeriesMatrix:
    lineno = cur.lineno
    parts = cur.take().split()
    if len(parts) != 3 or parts[0] != "matrix":
        raise FormatError("expected 'matrix <rows> <cols>'", lineno)
    try:
        r, c = int(parts[1]), int(parts[2])
    except ValueError:
        raise FormatError("bad matrix shape", lineno)
    if r < 1 or c < 1:
        raise FormatError("matrix shape must be positive", lineno)
    data = [[_parse_series_block(cur, field) for _ in range(c)]
            for _ in range(r)]
    return SeriesMatrix(field, data)


# -- carlitz expansions


def _profile_line(profile) -> Optional[str]:
    if profile is None:
        return None
    if isinstance(profile, FiniteTail):
        return "profile finite last=%d" % profile.last
    if isinstance(profile, ArithmeticTail):
        return ("profile arithmetic start=%d base=%s step=%s"
                % (profile.start, _fmt_frac(profile.base),
                   _fmt_frac(profile.step)))
    if isinstance(profile, ExponentialTail):
        return ("profile exponential start=%d alpha=%s beta=%s"
                % (profile.start, _fmt_frac(profile.alpha),
                   _fmt_frac(profile.beta)))
    raise FormatError("unknown profile %r" % (profile,))


def _parse_profile(cur: _Cursor):
    lineno = cur.lineno
    parts = cur.take().split()
    kind = parts[1] if len(parts) > 1 else ""
    got = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise FormatError("expected key=value in profile", lineno)
        k, v = tok.split("=", 1)
        got[k] = v
    try:
        if kind == "finite":
            return FiniteTail(int(got["last"]))
        if kind == "arithmetic":
            return ArithmeticTail(int(got["start"]),
                                  _parse_frac(got["base"], lineno),
                                  _parse_frac(got["step"], lineno))
        if kind == "exponential":
            return ExponentialTail(int(got["start"]),
                                   _parse_frac(got["alpha"], lineno),
                                   _parse_frac(got["beta"], lineno))
    except KeyError as exc:
        raise FormatError("profile is missing %s=" % exc.args[0], lineno)
    raise FormatError("unknown profile kind %r" % kind, lineno)


def carlitz_to_text(c: Union[CarlitzCoeffs, MatrixCarlitzCoeffs],
                    with_field: bool = True) -> str:
    out = [field_to_text(c.ctx.field).rstrip("\n")] if with_field else []
    out.append("carlitz n=%d complete=%d" % (len(c.coeffs) - 1,
                                             1 if c.complete else 0))
    pl = _profile_line(c.profile)
    if pl is not None:
        out.append(pl)
    for ci in c.coeffs:
        if isinstance(ci, Series):
            out.append(_series_block(ci).rstrip("\n"))
        else:
            out.append(_matrix_block(ci).rstrip("\n"))
    return "\n".join(out) + "\n"


def _parse_carlitz_block(cur: _Cursor, field: FieldDesc,
                         ctx: Optional[CarlitzContext] = None):
    lineno = cur.lineno
    got = _kv_line(cur.take(), "carlitz", ("n", "complete"), lineno)
    if "n" not in got:
        raise FormatError("carlitz header needs n=", lineno)
    try:
        n = int(got["n"])
        complete = bool(int(got.get("complete", "0")))
    except ValueError:
        raise FormatError("bad carlitz header data", lineno)
    if n < 0:
        raise FormatError("n must be nonnegative", lineno)
    profile = None
    nxt = cur.peek()
    if nxt is not None and nxt.startswith("profile"):
        profile = _parse_profile(cur)
    nxt = cur.peek()
    if nxt is None:
        raise FormatError("carlitz block has no coefficients", cur.lineno)
    matrix_form = nxt.startswith("matrix")
    coeffs = []
    for _ in range(n + 1):
        if matrix_form:
            coeffs.append(_parse_matrix_block(cur, field))
        else:
            coeffs.append(_parse_series_block(cur, field))
    if ctx is None:
        ctx = CarlitzContext(field)
    cls = MatrixCarlitzCoeffs if matrix_form else CarlitzCoeffs
    return cls(ctx, coeffs, complete=complete, profile=profile)


def carlitz_list_to_text(cs, with_field: bool = True) -> str:
    if not cs:
        raise ValueError("nothing to write")
    if any(c.ctx.field != cs[0].ctx.field for c in cs):
        raise ValueError("all expansions must live in one field")
    head = field_to_text(cs[0].ctx.field) if with_field else ""
    return head + "".join(carlitz_to_text(c, with_field=False) for c in cs)


def parse_carlitz_list(text: str, field: Optional[FieldDesc] = None,
                       ctx: Optional[CarlitzContext] = None) -> list:
    cur, field = _with_field(text, field)
    out = []
    while cur.peek() is not None:
        out.append(_parse_carlitz_block(cur, field, ctx=ctx))
    if not out:
        raise FormatError("no carlitz blocks found", cur.lineno)
    return out


# -- top-level parsing


def _check_ambient(own: FieldDesc, ambient: Optional[FieldDesc],
                   lineno: int) -> FieldDesc:
    if ambient is not None and own != ambient:
        raise FormatError("file field %s does not match the ambient "
                          "field %s" % (field_to_text(own).strip(),
                                        field_to_text(ambient).strip()),
                          lineno)
    return own


def _with_field(text: str, field: Optional[FieldDesc]):
    cur = _Cursor(text)
    nxt = cur.peek()
    if nxt is not None and nxt.startswith("field"):
        lineno = cur.lineno
        field = _check_ambient(_parse_field_block(cur), field, lineno)
    if field is None:
        raise FormatError("no field line and no ambient field given",
                          cur.lineno)
    return cur, field


def parse_series(text: str, field: Optional[FieldDesc] = None) -> Series:
    cur, field = _with_field(text, field)
    s = _parse_series_block(cur, field)
    if cur.peek() is not None:
        raise FormatError("trailing data after series block", cur.lineno)
    return s


def parse_matrix(text: str,
                 field: Optional[FieldDesc] = None) -> SeriesMatrix:
    cur, field = _with_field(text, field)
    m = _parse_matrix_block(cur, field)
    if cur.peek() is not None:
        raise FormatError("trailing data after matrix block", cur.lineno)
    return m


def parse_carlitz(text: str, field: Optional[FieldDesc] = None,
                  ctx: Optional[CarlitzContext] = None):
    cur, field = _with_field(text, field)
    c = _parse_carlitz_block(cur, field, ctx=ctx)
    if cur.peek() is not None:
        raise FormatError("trailing data after carlitz block", cur.lineno)
    return c


def series_list_to_text(ss: Sequence[Series],
                        with_field: bool = True) -> str:
    if not ss:
        raise ValueError("nothing to write")
    if any(s.field != ss[0].field for s in ss):
        raise ValueError("all series must live in one field")
    head = field_to_text(ss[0].field) if with_field else ""
    return head + "".join(_series_block(s) for s in ss)


def parse_series_list(text: str,
                      field: Optional[FieldDesc] = None) -> list:
    cur, field = _with_field(text, field)
    out = []
    while cur.peek() is not None:
        out.append(_parse_series_block(cur, field))
    if not out:
        raise FormatError("no series blocks found", cur.lineno)
    return out


def matrices_to_text(ms: Sequence[SeriesMatrix],
                     with_field: bool = True) -> str:
    if not ms:
        raise ValueError("nothing to write")
    if any(m.field != ms[0].field for m in ms):
        raise ValueError("all matrices must live in one field")
    head = field_to_text(ms[0].field) if with_field else ""
    return head + "".join(_matrix_block(m) for m in ms)


def parse_matrices(text: str,
                   field: Optional[FieldDesc] = None) -> list:
    cur, field = _with_field(text, field)
    out = []
    while cur.peek() is not None:
        out.append(_parse_matrix_block(cur, field))
    if not out:
        raise FormatError("no matrix blocks found", cur.lineno)
    return out


def parse_any(text: str, field: Optional[FieldDesc] = None,
              ctx: Optional[CarlitzContext] = None):
    """Parse whatever single construct the text holds.

    Returns (kind, value) with kind in field/series/matrix/carlitz;
    bare multi-block files come back as ("series_list", [...]) or
    ("matrix_list", [...]).
    """
    cur, field2 = _Cursor(text), field
    nxt = cur.peek()
    if nxt is not None and nxt.startswith("field"):
        lineno = cur.lineno
        field2 = _check_ambient(_parse_field_block(cur), field, lineno)
        nxt = cur.peek()
        if nxt is None:
            return "field", field2
    if nxt is None:
        raise FormatError("empty input", cur.lineno)
    if field2 is None:
        raise FormatError("no field line and no ambient field given",
                          cur.lineno)
    if nxt.startswith("carlitz"):
        cs = []
        while cur.peek() is not None:
            cs.append(_parse_carlitz_block(cur, field2, ctx=ctx))
        return ("carlitz", cs[0]) if len(cs) == 1 else ("carlitz_list", cs)
    if nxt.startswith("matrix"):
        ms = []
        while cur.peek() is not None:
            ms.append(_parse_matrix_block(cur, field2))
        return ("matrix", ms[0]) if len(ms) == 1 else ("matrix_list", ms)
    if nxt.startswith("series"):
        ss = []
        while cur.peek() is not None:
            ss.append(_parse_series_block(cur, field2))
        return ("series", ss[0]) if len(ss) == 1 else ("series_list", ss)
    raise FormatError("unrecognized block %r" % nxt.split()[0], cur.lineno)


# -- manifests


def manifest_to_text(entries) -> str:
    lines = []
    for k, v in (entries.items() if hasattr(entries, "items") else entries):
        k = str(k)
        if ":" in k or k != k.strip() or not k:
            raise ValueError("bad manifest key %r" % k)
        v = str(v).replace("\\", "\\\\").replace("\n", "\\n")
        lines.append("%s: %s" % (k, v))
    return "\n".join(lines) + "\n"


def _unescape(v: str, lineno: int) -> str:
    out = []
    i = 0
    while i < len(v):
        ch = v[i]
        if ch == "\\":
            if i + 1 >= len(v):
                raise FormatError("dangling escape", lineno)
            nxt = v[i + 1]
            if nxt == "n":
                out.append("\n")
            elif nxt == "\\":
                out.append("\\")
            else:
                raise FormatError("unknown escape \\%s" % nxt, lineno)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse_manifest(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ": " not in line:
            raise FormatError("expected 'key: value'", lineno)
        k, v = line.split(": ", 1)
        k = k.strip()
        if k in out:
            raise FormatError("duplicate key %r" % k, lineno)
        out[k] = _unescape(v, lineno)
    return out
