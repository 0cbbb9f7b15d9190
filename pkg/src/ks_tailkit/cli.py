"""Command-line surface: exact values, bounds, verification sweeps, Monte
Carlo probes, and figure/table data.

Exit codes: 0 expected outcome, 1 usage error, 2 a certified result
contradicting the verified claim, 3 undecidable cells at the precision cap.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import click

from . import __version__
from .finite_sampling_mc import PopulationSpec, Sidedness, conjecture_report
from .hypergeom import (
    HgBoundKind,
    HypergeomParams,
    hg_bound,
    moments,
    pmf,
    tail_standardized,
)
from .ks_bounds import (
    C_WEI_DUDLEY_HALF,
    KsBoundKind,
    combined_min_bound,
    ks_bound,
    pb2_log,
    pb3_log,
)
from .ks_exact import (
    StatKind,
    TwoSampleParams,
    atom_for_a,
    atom_grid,
    dist_table,
    exact_general,
    exact_onesided_equal,
    exact_twosided_equal,
)
from .rational_core import DomainError, Interval, clamp_unit
from .verify import (
    SweepConfig,
    Target,
    default_workers,
    figure_data,
    run_target,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTRADICTION = 2
EXIT_UNDECIDED = 3


@dataclass
class RunConfig:
    format: str = "plain"
    digits: int = 6
    precision: int = 4096
    guard: float = 1e-12
    workers: int = 1
    seed: int = 0
    out: str | None = None

    def as_dict(self) -> dict:
        return {
            "format": self.format,
            "digits": self.digits,
            "precision": self.precision,
            "guard": self.guard,
            "workers": self.workers,
            "seed": self.seed,
            "out": self.out,
            "version": __version__,
        }

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(
            guard=self.guard, max_precision=self.precision, workers=self.workers
        )


# ----------------------------------------------------------------------------
# parsing helpers
# ----------------------------------------------------------------------------


def _parse_fraction(text: str) -> Fraction:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise click.UsageError(f"cannot parse number {text!r}") from err


def _parse_keyvals(tokens, aliases=()) -> tuple[dict, list]:
    """Split 'key=value' tokens from bare words; normalize unicode lambda."""
    kv = {}
    bare = []
    for tok in tokens:
        if "=" in tok:
            key, val = tok.split("=", 1)
            key = key.strip()
            if key in ("λ", "l"):
                key = "lambda"
            kv[key] = val.strip()
        else:
            bare.append(tok)
    return kv, bare


def _need(kv: dict, *keys: str) -> list[str]:
    missing = [k for k in keys if k not in kv]
    if missing:
        raise click.UsageError(f"missing argument(s): {', '.join(k + '=' for k in missing)}")
    return [kv[k] for k in keys]


def _parse_kind(word: str) -> StatKind:
    norm = word.lower().replace("-", "_")
    table = {
        "plus": StatKind.PLUS,
        "minus": StatKind.MINUS,
        "two": StatKind.TWO_SIDED,
        "two_sided": StatKind.TWO_SIDED,
        "twosided": StatKind.TWO_SIDED,
    }
    if norm not in table:
        raise click.UsageError(f"unknown statistic kind {word!r} (plus|minus|two_sided)")
    return table[norm]


def _format_exact(value: Fraction, digits: int) -> str:
    return f"{value.numerator}/{value.denominator} ≈ {float(value):.{digits}g}"


def _format_value(x, digits: int) -> str:
    if isinstance(x, Fraction):
        return _format_exact(x, digits)
    if isinstance(x, Interval):
        return f"{x.midpoint:.{digits}g}"
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


def _emit_text(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_rows(cfg: RunConfig, header: list[str], rows: list[list], meta: dict) -> None:
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        _emit_text(cfg, buf.getvalue())
    elif cfg.format == "json":
        payload = {
            "columns": header,
            "rows": rows,
            "config": cfg.as_dict(),
            **meta,
        }
        _emit_text(cfg, json.dumps(payload, indent=2, default=str) + "\n")
    else:
        widths = [
            max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
            for i, h in enumerate(header)
        ]
        lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
        for row in rows:
            lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
        _emit_text(cfg, "\n".join(lines) + "\n")


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


# ----------------------------------------------------------------------------
# command group
# ----------------------------------------------------------------------------


@click.group(name="ks-tailkit")
@click.version_option(__version__)
@click.option("--format", "fmt", type=click.Choice(["plain", "csv", "json"]), default="plain")
@click.option("--digits", type=int, default=6, help="significant digits for decimals")
@click.option("--precision", type=int, default=4096, help="certified-comparison precision cap (bits)")
@click.option("--guard", type=float, default=1e-12, help="equality guard in log space")
@click.option("--workers", type=int, default=None, help="worker count (default: KS_TAILKIT_WORKERS or 1)")
@click.option("--seed", type=int, default=0, help="RNG seed for Monte Carlo")
@click.option("--out", type=click.Path(), default=None, help="write output to a file")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value file merged under explicit flags")
@click.pass_context
def cli(ctx, fmt, digits, precision, guard, workers, seed, out, config_path):
    merged = {
        "format": fmt,
        "digits": digits,
        "precision": precision,
        "guard": guard,
        "workers": workers if workers is not None else default_workers(),
        "seed": seed,
        "out": out,
    }
    if config_path:
        file_vals = _load_config_file(config_path)
        casts = {"digits": int, "precision": int, "guard": float, "workers": int, "seed": int}
        for key, raw in file_vals.items():
            if key not in merged:
                raise click.UsageError(f"unknown config key {key!r}")
            src = ctx.get_parameter_source(key if key != "format" else "fmt")
            if src is not None and src.name == "COMMANDLINE":
                continue  # explicit flags win
            merged[key] = casts.get(key, str)(raw)
    ctx.obj = RunConfig(**merged)


# ---------------------------------------------------------------- hypergeom


@cli.group()
def hypergeom():
    """Exact hypergeometric pmf, standardized tails, and bounds."""


def _hg_params(kv: dict) -> HypergeomParams:
    n, D, N = _need(kv, "n", "D", "N")
    try:
        return HypergeomParams(int(n), int(D), int(N))
    except ValueError as err:
        raise click.UsageError(str(err)) from err


@hypergeom.command("pmf")
@click.argument("params", nargs=-1)
@click.pass_obj
def hypergeom_pmf(cfg: RunConfig, params):
    kv, _ = _parse_keyvals(params)
    p = _hg_params(kv)
    (k,) = _need(kv, "k")
    value = pmf(p, int(k))
    _emit_rows(
        cfg,
        ["n", "D", "N", "k", "pmf", "pmf_decimal"],
        [[p.n_draws, p.D, p.N, int(k), f"{value.numerator}/{value.denominator}",
          f"{float(value):.{cfg.digits}g}"]],
        {"command": "hypergeom pmf"},
    )
    return EXIT_OK


@hypergeom.command("tail")
@click.argument("params", nargs=-1)
@click.pass_obj
def hypergeom_tail(cfg: RunConfig, params):
    kv, _ = _parse_keyvals(params)
    p = _hg_params(kv)
    (lam_text,) = _need(kv, "lambda")
    lam = _parse_fraction(lam_text)
    if lam <= 0:
        raise click.UsageError("lambda must be > 0")
    value = tail_standardized(p, lam)
    mean, var = moments(p)
    _emit_rows(
        cfg,
        ["n", "D", "N", "lambda", "tail", "tail_decimal", "mean", "variance_of_mean"],
        [[p.n_draws, p.D, p.N, str(lam),
          f"{value.numerator}/{value.denominator}", f"{float(value):.{cfg.digits}g}",
          str(mean), str(var)]],
        {"command": "hypergeom tail"},
    )
    return EXIT_OK


@hypergeom.command("bounds")
@click.argument("params", nargs=-1)
@click.pass_obj
def hypergeom_bounds(cfg: RunConfig, params):
    kv, _ = _parse_keyvals(params)
    p = _hg_params(kv)
    (lam_text,) = _need(kv, "lambda")
    lam = _parse_fraction(lam_text)
    if lam <= 0:
        raise click.UsageError("lambda must be > 0")
    exact = tail_standardized(p, lam)
    rows = [["exact", f"{exact.numerator}/{exact.denominator}",
             f"{float(exact):.{cfg.digits}g}", f"{min(1.0, float(exact)):.{cfg.digits}g}", ""]]
    for kind in HgBoundKind:
        try:
            iv = hg_bound(kind, p, lam)
        except DomainError as err:
            rows.append([kind.value, "", "", "", f"n/a (precondition: {err})"])
            continue
        rows.append([
            kind.value, "",
            f"{iv.midpoint:.{cfg.digits}g}",
            f"{clamp_unit(iv).midpoint:.{cfg.digits}g}",
            "",
        ])
    _emit_rows(
        cfg,
        ["bound", "fraction", "raw", "clamped", "domain"],
        rows,
        {"command": "hypergeom bounds",
         "params": {"n": p.n_draws, "D": p.D, "N": p.N, "lambda": str(lam)}},
    )
    return EXIT_OK


# ----------------------------------------------------------------------- ks


@cli.group()
def ks():
    """Exact two-sample KS distributions and bounds."""


def _two_sample(kv: dict) -> TwoSampleParams:
    if "m" in kv and "n" in kv:
        return TwoSampleParams(int(kv["m"]), int(kv["n"]))
    if "n" in kv:
        n = int(kv["n"])
        return TwoSampleParams(n, n)
    raise click.UsageError("missing sample sizes (m=, n=)")


@ks.command("exact")
@click.argument("params", nargs=-1)
@click.pass_obj
def ks_exact_cmd(cfg: RunConfig, params):
    kv, bare = _parse_keyvals(params)
    if not bare:
        raise click.UsageError("statistic kind required (plus|minus|two_sided)")
    kind = _parse_kind(bare[0])
    p = _two_sample(kv)
    rows = []
    if "a" in kv or "d" in kv:
        if "a" in kv:
            atom = atom_for_a(p.n, int(kv["a"]))
            if p.m != p.n:
                raise click.UsageError("a= notation requires m = n")
        else:
            from .ks_exact import Atom

            atom = Atom(int(kv["d"]), p.scale_sq)
        value = exact_general(p, atom, kind)
        rows.append([atom.d, f"{atom.t:.{cfg.digits}g}",
                     f"{value.numerator}/{value.denominator}", f"{float(value):.{cfg.digits}g}"])
    else:
        if p.m == p.n:
            for a in range(0, p.n + 1):
                atom = atom_for_a(p.n, a)
                if kind is StatKind.TWO_SIDED:
                    value = exact_twosided_equal(p.n, a) if a >= 1 else Fraction(1)
                else:
                    value = exact_onesided_equal(p.n, a)
                rows.append([atom.d, f"{atom.t:.{cfg.digits}g}",
                             f"{value.numerator}/{value.denominator}",
                             f"{float(value):.{cfg.digits}g}"])
        else:
            table = dist_table(p, kind)
            for atom, value in table.rows:
                rows.append([atom.d, f"{atom.t:.{cfg.digits}g}",
                             f"{value.numerator}/{value.denominator}",
                             f"{float(value):.{cfg.digits}g}"])
    _emit_rows(
        cfg,
        ["d", "t", "exact", "exact_decimal"],
        rows,
        {"command": "ks exact", "m": p.m, "n": p.n, "kind": kind.value},
    )
    return EXIT_OK


_KS_BOUND_NAMES = {
    "pb2": KsBoundKind.PB2,
    "pb3": KsBoundKind.PB3,
    "dkw": KsBoundKind.DKW,
    "dkwm_one": KsBoundKind.DKWM_ONE,
    "dkwm_two": KsBoundKind.DKWM_TWO,
    "modified_dkwm_one": KsBoundKind.MODIFIED_DKWM_ONE,
    "modified_dkwm_two": KsBoundKind.MODIFIED_DKWM_TWO,
    "serfling_heuristic": KsBoundKind.SERFLING_HEURISTIC,
    "combined_min": KsBoundKind.COMBINED_MIN,
}


@ks.command("bound")
@click.argument("params", nargs=-1)
@click.pass_obj
def ks_bound_cmd(cfg: RunConfig, params):
    kv, bare = _parse_keyvals(params)
    if not bare:
        raise click.UsageError(f"bound kind required ({'|'.join(_KS_BOUND_NAMES)})")
    name = bare[0].lower()
    if name not in _KS_BOUND_NAMES:
        raise click.UsageError(f"unknown bound kind {bare[0]!r}")
    kind = _KS_BOUND_NAMES[name]
    p = _two_sample(kv)
    sided = _parse_kind(bare[1]) if len(bare) > 1 else StatKind.PLUS
    if "a" in kv:
        if p.m != p.n:
            raise click.UsageError("a= notation requires m = n")
        t = atom_for_a(p.n, int(kv["a"]))
        t_str = f"a={kv['a']}"
    elif "t" in kv:
        t = _parse_fraction(kv["t"])
        t_str = kv["t"]
    else:
        raise click.UsageError("threshold required (a=K or t=FRACTION)")
    c = _parse_fraction(kv["c"]) if "c" in kv else None
    try:
        if kind is KsBoundKind.COMBINED_MIN:
            iv = combined_min_bound(p, t, c if c is not None else C_WEI_DUDLEY_HALF)
        else:
            iv = ks_bound(kind, p, t, sided, c)
    except DomainError as err:
        raise click.UsageError(str(err)) from err
    _emit_rows(
        cfg,
        ["kind", "m", "n", "t", "raw", "clamped"],
        [[name, p.m, p.n, t_str,
          f"{iv.midpoint:.{cfg.digits}g}", f"{clamp_unit(iv).midpoint:.{cfg.digits}g}"]],
        {"command": "ks bound"},
    )
    return EXIT_OK


@ks.command("table")
@click.argument("params", nargs=-1)
@click.pass_obj
def ks_table_cmd(cfg: RunConfig, params):
    """Exact table with the finite-sampling and plain bound columns (m = n)."""
    kv, bare = _parse_keyvals(params)
    kind = _parse_kind(bare[0]) if bare else StatKind.PLUS
    p = _two_sample(kv)
    if p.m != p.n:
        raise click.UsageError("ks table is the m = n layout; use ks exact for general (m, n)")
    n = p.n
    rows = []
    for a in range(0, n + 1):
        atom = atom_for_a(n, a)
        if kind is StatKind.TWO_SIDED:
            exact = exact_twosided_equal(n, a) if a >= 1 else Fraction(1)
        else:
            exact = exact_onesided_equal(n, a)
        if a == 0:
            pb2_v = pb3_v = 1.0
        else:
            pb2_v = ks_bound(KsBoundKind.PB2, p, atom).midpoint
            pb3_v = ks_bound(KsBoundKind.PB3, p, atom).midpoint
        exact_f = float(exact)
        rows.append([
            a,
            f"{exact.numerator}/{exact.denominator}",
            f"{exact_f:.{cfg.digits}g}",
            f"{pb2_v:.{cfg.digits}g}",
            f"{pb2_v - exact_f:.{cfg.digits}g}",
            f"{pb3_v:.{cfg.digits}g}",
            f"{pb3_v - exact_f:.{cfg.digits}g}",
        ])
    _emit_rows(
        cfg,
        ["a", "exact", "exact_decimal", "pb2", "pb2_minus_exact", "pb3", "pb3_minus_exact"],
        rows,
        {"command": "ks table", "n": n, "kind": kind.value},
    )
    return EXIT_OK


# ------------------------------------------------------------------- verify


_TARGET_ALIASES = {
    "thm4a": (Target.THM4A, None),
    "thm4b": (Target.THM4B, None),
    "thm5": (Target.THM5, None),
    "thm6": (Target.THM6, None),
    "conj_general": (Target.CONJ_GENERAL, None),
    "conj": (Target.CONJ_GENERAL, None),
    "hg_bounds": (Target.HG_BOUNDS, None),
}
for _part in "acde":
    _TARGET_ALIASES[f"thm5{_part}"] = (Target.THM5, _part)
for _part in "abcd":
    _TARGET_ALIASES[f"thm6{_part}"] = (Target.THM6, _part)


@cli.command("verify")
@click.argument("target")
@click.option("--max-n", "max_n", type=int, default=None)
@click.option("--max-N", "--max-big-n", "max_big_n", type=int, default=None)
@click.option("--parts", type=str, default=None)
@click.pass_obj
def verify_cmd(cfg: RunConfig, target, max_n, max_big_n, parts):
    """Run a certified verification sweep and write its report."""
    key = target.lower()
    if key not in _TARGET_ALIASES:
        raise click.UsageError(f"unknown target {target!r}")
    tgt, implied_parts = _TARGET_ALIASES[key]
    if implied_parts:
        parts = implied_parts if parts is None else parts
    try:
        report = run_target(
            tgt, max_n=max_n, max_N=max_big_n, parts=parts, config=cfg.sweep_config()
        )
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    payload = report.as_dict()
    payload["cli_config"] = cfg.as_dict()
    text = json.dumps(payload, indent=2, default=str) + "\n"
    if cfg.format == "plain":
        summary = (
            f"target={report.target} cells={report.cells_checked} "
            f"violations={len(report.violations)} equal_within_guard={len(report.equalities)} "
            f"witnesses={len(report.witnesses)} undecided={len(report.undecided)} "
            f"passed={report.passed}\n"
        )
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
            click.echo(summary, nl=False)
        else:
            click.echo(summary + text, nl=False)
    else:
        _emit_text(cfg, text)
    if not report.decided:
        return EXIT_UNDECIDED
    if not report.passed:
        return EXIT_CONTRADICTION
    return EXIT_OK


# ------------------------------------------------------------------- figure


@cli.command("figure")
@click.argument("which", type=click.Choice(["fig1", "fig2"]))
@click.option("--n", "n", type=int, default=None, help="sample size (defaults: fig1 128, fig2 23)")
@click.pass_obj
def figure_cmd(cfg: RunConfig, which, n):
    """Emit per-atom bound/diff data for the one-sided figures."""
    if n is None:
        n = 128 if which == "fig1" else 23
    table = figure_data(n, which)
    header = table.header()
    rows = []
    for row in table.rows:
        out = [row["a"], f"{row['t']:.{cfg.digits}g}", f"{row['exact']:.{cfg.digits}g}"]
        out += [f"{row[f'bound_{name}']:.{cfg.digits}g}" for name in table.bound_names]
        out += [f"{row[f'diff_{name}']:.{cfg.digits}g}" for name in table.bound_names]
        rows.append(out)
    _emit_rows(cfg, header, rows, {"command": "figure", "figure": which, "n": n, "notes": table.notes})
    return EXIT_OK


# ----------------------------------------------------------------------- mc


@cli.command("mc")
@click.option("--binary", type=str, default=None, help="0/1 population D/N, e.g. 50/100")
@click.option("--values", type=str, default=None, help="comma separated population values")
@click.option("--n", "n", type=int, required=True)
@click.option("--reps", type=int, default=10000)
@click.option("--lambdas", type=str, default="1/4,1/2,3/4,1,3/2")
@click.option("--sided", type=click.Choice(["one", "two"]), default="one")
@click.pass_obj
def mc_cmd(cfg: RunConfig, binary, values, n, reps, lambdas, sided):
    """Monte Carlo probe of the conjectured finite-sampling bound."""
    if (binary is None) == (values is None):
        raise click.UsageError("exactly one of --binary or --values is required")
    if binary is not None:
        try:
            ones, size = binary.split("/")
            pop = PopulationSpec.binary(int(ones), int(size))
        except ValueError as err:
            raise click.UsageError(f"cannot parse --binary {binary!r}") from err
    else:
        try:
            pop = PopulationSpec(values=tuple(float(v) for v in values.split(",")))
        except ValueError as err:
            raise click.UsageError(f"cannot parse --values") from err
    if not 1 <= n <= pop.size:
        raise click.UsageError(f"need 1 <= n <= {pop.size}")
    if reps < 1:
        raise click.UsageError("reps must be >= 1")
    grid = [float(_parse_fraction(tok)) for tok in lambdas.split(",") if tok.strip()]
    rows_data = conjecture_report(
        pop, n, grid, reps=reps, seed=cfg.seed,
        sided=Sidedness(sided), workers=cfg.workers,
    )
    header = ["lambda", "p_hat", "stderr", "bound_conjecture", "bound_serfling_pointwise", "flag"]
    rows = [
        [f"{r.lam:.{cfg.digits}g}", f"{r.p_hat:.{cfg.digits}g}", f"{r.stderr:.{cfg.digits}g}",
         f"{r.bound_conjecture:.{cfg.digits}g}", f"{r.bound_serfling_pointwise:.{cfg.digits}g}",
         "FLAG" if r.flagged else ""]
        for r in rows_data
    ]
    _emit_rows(
        cfg, header, rows,
        {"command": "mc", "population_size": pop.size, "n": n, "reps": reps,
         "seed": cfg.seed, "sided": sided,
         "note": "flags are evidence against the conjectured bound, not refutation"},
    )
    return EXIT_OK


# ----------------------------------------------------------------------------


def main(argv=None) -> int:
    """Entry point with the package's exit-code contract."""
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as err:
        err.show()
        return EXIT_USAGE
    except click.ClickException as err:
        err.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    return int(result) if isinstance(result, int) else EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
