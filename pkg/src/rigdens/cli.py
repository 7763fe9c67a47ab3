"""Batch driver: declarative map description in, certified artifacts out.

Map grammar (line oriented; ';' separates statements on one line, '#'
starts a comment):

    poly [a,b] : <expr> [mod 1]     one monotone branch; rational literals
    linear R [mod 1]                sugar for poly [0,1] : R x mod 1
    iterate N                       study the N-th iterate (polynomial maps)
    circle                          treat [0,1] as the circle S^1

<expr> is a polynomial in x with rational coefficients (decimals are exact),
supporting + - * ^ and juxtaposition ("2x", "(1/2)x(1-x)"), plus at most one
sinusoidal term "A sin(B pi x)" with rational A, B.

Config files are INI style: a [run] section with the keys mirrored by the
command line flags (mode, k, nu, eps_num, iterate, workers, out_dir,
dump_matrix, verbose, no_lyap) and a [map] section with either text= or
file=.  Flags override config values.

Exit codes: 0 success, 1 bad configuration, 2 failed expansion check,
3 no observed contraction.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

from .certify import attach_lyapunov, certify_l1, certify_linf, lyapunov, report
from .enclosure import NotContractingError, contraction_sweep
from .hatbasis import assemble_linearized
from .maps import (
    Branch,
    Endpoint,
    ExpansionError,
    PiecewiseMap,
    iterate_map,
    ly_coefficients_bv,
    ly_coefficients_lip,
    split_mod_branches,
)
from .polys import Poly
from .ulam import AssemblyConfig, assemble_ulam, dump_matrix, markovize

__all__ = ["RunConfig", "MapSpec", "parse_map", "run", "emit_plot_data", "main"]


class MapParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# expression parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]+)|(?P<sym>[()+\-*/^]))"
)


def _tokenize(s: str) -> List[Tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(s):
        m = _TOKEN_RE.match(s, pos)
        if not m or m.end() == pos:
            if s[pos:].strip() == "":
                break
            raise MapParseError(f"bad token at ...{s[pos:pos + 12]!r}")
        pos = m.end()
        if m.group("num"):
            out.append(("num", m.group("num")))
        elif m.group("name"):
            out.append(("name", m.group("name")))
        else:
            out.append(("sym", m.group("sym")))
    return out


class _PolyTrig:
    """Polynomial plus an optional A sin(B pi x) term, closed under the
    operations the grammar allows."""

    def __init__(self, poly: Poly, amp: Fraction = Fraction(0),
                 freq: Fraction = Fraction(0)):
        self.poly = poly
        self.amp = amp
        self.freq = freq

    @property
    def has_trig(self) -> bool:
        return self.amp != 0

    def _const(self) -> Optional[Fraction]:
        if self.has_trig or any(c != 0 for c in self.poly[1:]):
            return None
        return self.poly[0]

    def __add__(self, other: "_PolyTrig") -> "_PolyTrig":
        if self.has_trig and other.has_trig:
            raise MapParseError("at most one sinusoidal term per branch")
        from .polys import poly_add
        amp, freq = (self.amp, self.freq) if self.has_trig else (other.amp, other.freq)
        return _PolyTrig(poly_add(self.poly, other.poly), amp, freq)

    def __neg__(self) -> "_PolyTrig":
        return _PolyTrig([-c for c in self.poly], -self.amp, self.freq)

    def __mul__(self, other: "_PolyTrig") -> "_PolyTrig":
        from .polys import poly_mul, poly_scale
        if self.has_trig or other.has_trig:
            trig, factor = (self, other) if self.has_trig else (other, self)
            c = factor._const()
            if c is None:
                raise MapParseError("sinusoidal terms admit constant factors only")
            return _PolyTrig(poly_scale(trig.poly, c), trig.amp * c, trig.freq)
        return _PolyTrig(poly_mul(self.poly, other.poly))

    def divide(self, other: "_PolyTrig") -> "_PolyTrig":
        c = other._const()
        if c is None or c == 0:
            raise MapParseError("division only by nonzero constants")
        from .polys import poly_scale
        return _PolyTrig(poly_scale(self.poly, 1 / c), self.amp / c, self.freq)

    def power(self, n: int) -> "_PolyTrig":
        if self.has_trig:
            raise MapParseError("cannot raise sinusoidal terms to powers")
        out = _PolyTrig([Fraction(1)])
        for _ in range(n):
            out = out * self
        return out


class _ExprParser:
    def __init__(self, tokens: List[Tuple[str, str]]):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> _PolyTrig:
        v = self.expr()
        if self.i != len(self.toks):
            raise MapParseError(f"trailing tokens near {self.peek()[1]!r}")
        return v

    def expr(self) -> _PolyTrig:
        kind, val = self.peek()
        neg = False
        if (kind, val) == ("sym", "-"):
            self.take()
            neg = True
        elif (kind, val) == ("sym", "+"):
            self.take()
        v = self.term()
        if neg:
            v = -v
        while self.peek() == ("sym", "+") or self.peek() == ("sym", "-"):
            _, op = self.take()
            rhs = self.term()
            v = v + (-rhs if op == "-" else rhs)
        return v

    def term(self) -> _PolyTrig:
        v = self.factor()
        while True:
            kind, val = self.peek()
            if (kind, val) == ("sym", "*"):
                self.take()
                v = v * self.factor()
            elif (kind, val) == ("sym", "/"):
                self.take()
                v = v.divide(self.factor())
            elif kind == "num" or (kind == "name" and val in ("x", "sin")) or \
                    (kind, val) == ("sym", "("):
                v = v * self.factor()  # juxtaposition
            else:
                return v

    def factor(self) -> _PolyTrig:
        base = self.atom()
        while self.peek() == ("sym", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or "." in val:
                raise MapParseError("exponent must be a plain integer")
            base = base.power(int(val))
        return base

    def atom(self) -> _PolyTrig:
        kind, val = self.take()
        if kind == "num":
            return _PolyTrig([Fraction(val)])
        if kind == "name" and val == "x":
            return _PolyTrig([Fraction(0), Fraction(1)])
        if kind == "name" and val == "sin":
            return self.sin_term()
        if (kind, val) == ("sym", "("):
            v = self.expr()
            if self.take() != ("sym", ")"):
                raise MapParseError("unbalanced parentheses")
            return v
        if (kind, val) == ("sym", "-"):
            return -self.atom()
        raise MapParseError(f"unexpected token {val!r}")

    def sin_term(self) -> _PolyTrig:
        if self.take() != ("sym", "("):
            raise MapParseError("sin needs parenthesized argument")
        freq = Fraction(1)
        kind, val = self.peek()
        if kind == "num":
            self.take()
            freq = Fraction(val)
            if self.peek() == ("sym", "/"):
                self.take()
                k2, v2 = self.take()
                if k2 != "num":
                    raise MapParseError("bad rational in sin argument")
                freq /= Fraction(v2)
            if self.peek() == ("sym", "*"):
                self.take()
        if self.take() != ("name", "pi"):
            raise MapParseError("sin argument must be 'R pi x'")
        if self.peek() == ("sym", "*"):
            self.take()
        if self.take() != ("name", "x"):
            raise MapParseError("sin argument must be 'R pi x'")
        if self.take() != ("sym", ")"):
            raise MapParseError("unbalanced sin parentheses")
        return _PolyTrig([Fraction(0)], Fraction(1), freq)


def _parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MapParseError(f"bad rational literal {s!r}") from exc


# ---------------------------------------------------------------------------
# map specification
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class _BranchStmt:
    lo: Fraction
    hi: Fraction
    poly: Tuple[Fraction, ...]
    amp: Fraction
    freq: Fraction
    mod_one: bool


@dataclasses.dataclass(frozen=True)
class MapSpec:
    """Parsed declarative map description, before branch splitting."""

    stmts: Tuple[_BranchStmt, ...]
    iterate: int = 1
    circle: bool = False

    def canonical(self) -> str:
        lines = []
        if self.circle:
            lines.append("circle")
        for s in self.stmts:
            terms = []
            for n, c in enumerate(s.poly):
                if c == 0:
                    continue
                mag = abs(c)
                body = str(mag) if n == 0 else (
                    f"{mag} x" if n == 1 else f"{mag} x^{n}")
                terms.append((c < 0, body))
            if s.amp != 0:
                terms.append((s.amp < 0, f"{abs(s.amp)} sin({s.freq} pi x)"))
            if not terms:
                expr = "0"
            else:
                parts = [("- " if terms[0][0] else "") + terms[0][1]]
                parts += [("- " if neg else "+ ") + body for neg, body in terms[1:]]
                expr = " ".join(parts)
            tail = " mod 1" if s.mod_one else ""
            lines.append(f"poly [{s.lo},{s.hi}] : {expr}{tail}")
        if self.iterate != 1:
            lines.append(f"iterate {self.iterate}")
        return "\n".join(lines) + "\n"

    def build(self) -> PiecewiseMap:
        branches: List[Branch] = []
        for s in self.stmts:
            br = Branch(Endpoint.from_rational(s.lo), Endpoint.from_rational(s.hi),
                        s.poly, s.amp, s.freq)
            if s.mod_one:
                branches.extend(split_mod_branches(br))
            else:
                branches.append(br)
        branches.sort(key=lambda b: float(b.lo.enc.lo))
        m = PiecewiseMap(tuple(branches), circle=self.circle)
        m.validate_monotone()
        if self.iterate > 1:
            m = iterate_map(m, self.iterate)
        return m


def parse_map(text: str) -> MapSpec:
    """Parse the declarative grammar into a MapSpec.

    Raises MapParseError on syntax errors and on overlapping or gapped
    branch domains (with the offending location in the message).
    """
    stmts: List[_BranchStmt] = []
    iterate = 1
    circle = False
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        for stmt in filter(None, (p.strip() for p in line.split(";"))):
            try:
                parsed = _parse_statement(stmt)
            except MapParseError as exc:
                raise MapParseError(f"line {lineno}: {exc}") from exc
            if parsed is None:
                continue
            kind, payload = parsed
            if kind == "branch":
                stmts.append(payload)
            elif kind == "iterate":
                iterate = payload
            elif kind == "circle":
                circle = True
    if not stmts:
        raise MapParseError("no branches defined")
    stmts.sort(key=lambda s: s.lo)
    if stmts[0].lo != 0 or stmts[-1].hi != 1:
        raise MapParseError("branch domains must cover [0,1]")
    for a, b in zip(stmts, stmts[1:]):
        if a.hi != b.lo:
            raise MapParseError(
                f"gap or overlap between branch ending at {a.hi} "
                f"and branch starting at {b.lo}"
            )
    return MapSpec(tuple(stmts), iterate=iterate, circle=circle)


def _parse_statement(stmt: str):
    if stmt.startswith("iterate"):
        try:
            n = int(stmt.split()[1])
        except (IndexError, ValueError) as exc:
            raise MapParseError("iterate needs a positive integer") from exc
        if n < 1:
            raise MapParseError("iterate needs a positive integer")
        return ("iterate", n)
    if stmt == "circle":
        return ("circle", True)
    if stmt.startswith("linear"):
        body = stmt[len("linear"):].strip()
        mod = body.endswith("mod 1")
        if mod:
            body = body[: -len("mod 1")].strip()
        slope = _parse_rational(body)
        return ("branch", _BranchStmt(Fraction(0), Fraction(1),
                                      (Fraction(0), slope),
                                      Fraction(0), Fraction(0), mod))
    if stmt.startswith("poly"):
        m = re.match(r"poly\s*\[([^,\]]+),([^,\]]+)\]\s*:\s*(.+)$", stmt)
        if not m:
            raise MapParseError(f"cannot parse branch statement {stmt!r}")
        lo = _parse_rational(m.group(1))
        hi = _parse_rational(m.group(2))
        if not lo < hi:
            raise MapParseError(f"empty branch domain [{lo},{hi}]")
        body = m.group(3).strip()
        mod = bool(re.search(r"\bmod\s*1\s*$", body))
        if mod:
            body = re.sub(r"\bmod\s*1\s*$", "", body).strip()
        pt = _ExprParser(_tokenize(body)).parse()
        return ("branch", _BranchStmt(lo, hi, tuple(pt.poly), pt.amp, pt.freq, mod))
    raise MapParseError(f"unknown statement {stmt.split()[0]!r}")


# ---------------------------------------------------------------------------
# run configuration and pipeline
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class RunConfig:
    map_text: str
    mode: str = "L1"
    k: int = 1024
    nu: Optional[float] = None
    eps_num: Optional[float] = None
    iterate: Optional[int] = None
    workers: int = 1
    out_dir: str = "out"
    dump_matrix: Optional[str] = None
    verbose: bool = False
    no_lyap: bool = False
    map_id: str = "map"

    def __post_init__(self):
        if self.mode not in ("L1", "Linf"):
            raise ValueError(f"mode must be L1 or Linf, got {self.mode!r}")
        if self.k < 8:
            raise ValueError("k must be at least 8")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def emit_plot_data(density, m: PiecewiseMap, k: int, out_dir: Path) -> None:
    """Write plot-ready files: density at cell midpoints and the map graph."""
    out_dir.mkdir(parents=True, exist_ok=True)
    vals = density.values
    scale = k if density.norm_kind == "L1" else 1.0
    with open(out_dir / "density_plot.dat", "w") as fh:
        for i in range(k):
            x = (i + 0.5) / k
            fh.write(f"{x!r} {float(scale * vals[i])!r}\n")
    with open(out_dir / "map_graph.dat", "w") as fh:
        n = max(k, 512)
        for i in range(n + 1):
            x = i / n
            imgs = []
            for br in m.branches:
                dom = br.domain_outer()
                if dom.lo <= x <= dom.hi:
                    from .intervals import Interval
                    imgs.append(br.value_iv(Interval(x, x)).mid)
            for y in imgs:
                fh.write(f"{x!r} {y!r}\n")


def _write_density_csv(density, k: int, path: Path) -> None:
    vals = density.values
    with open(path, "w") as fh:
        fh.write("i,left,right,value\n")
        for i in range(k):
            left, right = i / k, (i + 1) / k
            v = float(k * vals[i] if density.norm_kind == "L1" else vals[i])
            fh.write(f"{i},{left!r},{right!r},{v!r}\n")


def run(config: RunConfig) -> int:
    """Execute the full pipeline; returns the process exit code."""
    out_dir = Path(config.out_dir)
    try:
        spec = parse_map(config.map_text)
        if config.iterate is not None:
            spec = dataclasses.replace(spec, iterate=config.iterate)
        if config.mode == "Linf":
            spec = dataclasses.replace(spec, circle=True)
        mapped = spec.build()
    except (MapParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    eps_num = config.eps_num if config.eps_num is not None else (
        1e-4 if config.mode == "L1" else 1e-5
    )
    try:
        if config.mode == "L1":
            ly = ly_coefficients_bv(mapped)
        else:
            ly = ly_coefficients_lip(mapped)
            if ly.k_iter != 1:
                raise ExpansionError(
                    f"Lipschitz contraction needs iterate {ly.k_iter}; "
                    "rerun with --iterate on a polynomial map"
                )
    except ExpansionError as exc:
        print(f"error: {exc} (try --iterate)", file=sys.stderr)
        return 2

    if config.mode == "L1":
        nu_frac = Fraction(config.nu) if config.nu is not None else None
        cfg = AssemblyConfig(nu=nu_frac)
        raw = assemble_ulam(mapped, config.k, cfg, workers=config.workers)
        matrix = markovize(raw)
        nu_val = float(cfg.resolved_nu(config.k))
    else:
        matrix = markovize(assemble_linearized(mapped, config.k, ly))
        nu_val = 0.0
    if config.dump_matrix:
        dump_matrix(matrix, config.dump_matrix)

    try:
        contraction, density = contraction_sweep(matrix, eps_num,
                                                 verbose=config.verbose,
                                                 workers=config.workers)
    except NotContractingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    if config.mode == "L1":
        cert = certify_l1(ly, matrix, contraction, density,
                          nu=nu_val, eps_num=eps_num, map_id=config.map_id)
    else:
        cert = certify_linf(ly, matrix, contraction, density,
                            nu=nu_val, eps_num=eps_num, map_id=config.map_id)
    lyap = None
    if not config.no_lyap:
        lyap = lyapunov(mapped, density, cert)
        cert = attach_lyapunov(cert, lyap)

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_density_csv(density, config.k, out_dir / "density.csv")
    rep = report(cert, lyap, density)
    (out_dir / "certificate.json").write_text(rep.to_json(indent=2) + "\n")
    (out_dir / "report.txt").write_text(rep.text + "\n")
    emit_plot_data(density, mapped, config.k, out_dir)
    print(rep.text)
    return 0


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    out: dict = {}
    if cp.has_section("run"):
        for key in ("mode", "out_dir", "dump_matrix"):
            if cp.has_option("run", key):
                out[key] = cp.get("run", key)
        for key in ("k", "iterate", "workers"):
            if cp.has_option("run", key):
                out[key] = cp.getint("run", key)
        for key in ("nu", "eps_num"):
            if cp.has_option("run", key):
                out[key] = cp.getfloat("run", key)
        for key in ("verbose", "no_lyap"):
            if cp.has_option("run", key):
                out[key] = cp.getboolean("run", key)
    if cp.has_section("map"):
        if cp.has_option("map", "text"):
            out["map_text"] = cp.get("map", "text")
        elif cp.has_option("map", "file"):
            out["map_text"] = Path(cp.get("map", "file")).read_text()
        if cp.has_option("map", "id"):
            out["map_id"] = cp.get("map", "id")
    return out


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="rigdens",
        description="certified invariant densities of expanding interval maps",
    )
    ap.add_argument("--config", help="INI config file ([run] and [map] sections)")
    ap.add_argument("--map", help="map description file (grammar in module docs)")
    ap.add_argument("--mode", choices=["L1", "Linf"])
    ap.add_argument("--k", type=int)
    ap.add_argument("--nu", type=float)
    ap.add_argument("--eps-num", dest="eps_num", type=float)
    ap.add_argument("--iterate", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out-dir", dest="out_dir")
    ap.add_argument("--dump-matrix", dest="dump_matrix")
    ap.add_argument("--verbose", action="store_true", default=None)
    ap.add_argument("--no-lyap", dest="no_lyap", action="store_true", default=None)
    args = ap.parse_args(argv)

    try:
        settings = _load_config(args.config)
        if args.map:
            settings["map_text"] = Path(args.map).read_text()
            settings.setdefault("map_id", Path(args.map).stem)
        for key in ("mode", "k", "nu", "eps_num", "iterate", "workers",
                    "out_dir", "dump_matrix", "verbose", "no_lyap"):
            v = getattr(args, key)
            if v is not None:
                settings[key] = v
        if "map_text" not in settings:
            print("error: no map given (use --map or a [map] config section)",
                  file=sys.stderr)
            return 1
        config = RunConfig(**settings)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
