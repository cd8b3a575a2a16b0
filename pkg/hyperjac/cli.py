"""Command line: ``hyperjac det | minor | check | counterexample | sobolev | ibp-check``.

Results go to stdout; logs and progress bars go to stderr.  Library errors map
to their exit codes (2 usage/config, 3 resource/resolution, 1 verification).
"""

import functools
import logging
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import typer

from .calculus import BoxDomain, QuadratureSpec, SobolevParams, interpolation_ratio, sobolev_norm
from .config import get_settings
from .errors import ConfigError, HyperjacError, VerificationError
from .experiments.families import FamilyConfig, parse_rational
from .experiments.report import dumps, write_report
from .experiments.runner import run_family
from .experiments.suite import compare_extension_identity, random_ibp_case, run_lemma_suite
from .fields import load_field
from .hypermatrix import HyperMatrix, MinorSpec, det_full, det_layer_fold, minor_det
from .log import setup_logging, stderr_console

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True, help=__doc__)


class Method(str, Enum):
    full = "full"
    fold = "fold"


class Suite(str, Enum):
    lemmas = "lemmas"
    ibp = "ibp"
    bounds = "bounds"
    all = "all"


class Family(str, Enum):
    prop45 = "prop45"
    prop47 = "prop47"
    prop49 = "prop49"
    thm411case2 = "thm411case2"
    thm411case3 = "thm411case3"


def _exits(func):
    """Report HyperjacError on stderr and exit with its code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except HyperjacError as e:
            stderr_console.print(f"[bold red]error:[/] {e}", highlight=False)
            raise typer.Exit(e.exit_code) from e

    return wrapper


def _format(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return format(float(value), ".17g")


def _emit(payload, out: Optional[Path]) -> None:
    raw = dumps(payload)
    if out is None:
        typer.echo(raw.decode(), nl=False)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(raw)
    logger.info("wrote %s", out)


def _int_list(text: str, flag: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError as e:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from e
    if not values:
        raise ConfigError(f"{flag} is empty")
    return values


def _rational(text: Optional[str], flag: str) -> Optional[Fraction]:
    if text is None:
        return None
    try:
        return parse_rational(text)
    except ValueError as e:
        raise ConfigError(f"{flag}: {e}") from e


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level, default from HYPERJAC_LOG_LEVEL."),
):
    setup_logging(log_level)


@app.command()
@_exits
def det(
    path: Path = typer.Argument(..., help="Matrix JSON: {orders, entries, scalar}."),
    method: Method = typer.Option(Method.full, help="Permutation sum or layer fold."),
    budget: Optional[int] = typer.Option(None, help="Permutation-term budget, default HYPERJAC_BUDGET."),
    workers: int = typer.Option(1, min=1, help="Workers for the layer fold."),
):
    """Print the determinant of a cubical matrix."""
    A = HyperMatrix.load(path)
    if method is Method.fold:
        value = det_layer_fold(A, budget=budget, workers=workers)
    else:
        value = det_full(A, budget=budget)
    typer.echo(_format(value))


@app.command()
@_exits
def minor(
    path: Path = typer.Argument(..., help="Matrix JSON."),
    beta: str = typer.Option(..., help="Selection along direction 1, e.g. 1,3."),
    alpha: List[str] = typer.Option(..., help="Selection along the next direction; repeat per direction."),
    budget: Optional[int] = typer.Option(None),
):
    """Print a minor; unsorted selections are sorted and the sign is tracked."""
    A = HyperMatrix.load(path)
    alphas = [_int_list(a, "--alpha") for a in alpha]
    if len(alphas) != A.dims - 1:
        raise ConfigError(f"a {A.dims}-dimensional matrix needs {A.dims - 1} --alpha selections, got {len(alphas)}")
    N = A.orders[1] if A.dims > 1 else A.orders[0]
    spec, sign = MinorSpec.normalized(_int_list(beta, "--beta"), alphas, A.orders[0], N)
    value = minor_det(A, spec, budget=budget)
    typer.echo(_format(sign * value))


@app.command()
@_exits
def check(
    suite: Suite = typer.Option(Suite.all, help="Which identities to test."),
    seed: Optional[int] = typer.Option(None, help="Base seed, default HYPERJAC_SEED."),
    trials: int = typer.Option(200, min=1),
    m: Optional[int] = typer.Option(None, "--m", min=1, help="Fix the derivative order of field checks."),
    workers: int = typer.Option(1, min=1),
    out: Optional[Path] = typer.Option(None, help="Write the report here instead of stdout."),
):
    """Run randomized identity checks; exit 1 if any trial fails."""
    report = run_lemma_suite(seed, trials, suite.value, workers, m)
    _emit(report, out)
    if not report["passed"]:
        failed = [c["name"] for c in report["checks"] if c["failed"]]
        raise VerificationError(f"identity checks failed: {', '.join(failed)}")


@app.command()
@_exits
def counterexample(
    family: Family = typer.Option(..., help="Construction to sweep."),
    dimension: Optional[int] = typer.Option(None, "--N", help="Dimension of the domain."),
    components: Optional[int] = typer.Option(None, "--n", help="Components of u, default N."),
    m: Optional[int] = typer.Option(None, "--m"),
    r: Optional[int] = typer.Option(None, "--r"),
    rho: Optional[str] = typer.Option(None, help="Amplitude exponent, e.g. 3/4."),
    s: Optional[str] = typer.Option(None),
    p: Optional[str] = typer.Option(None),
    k: Optional[str] = typer.Option(None, "--k", help="Comma-separated k schedule."),
    reduced: bool = typer.Option(True, "--reduced/--full", help="Lacunary frequencies k*base^l or full scale."),
    base: Optional[int] = typer.Option(None),
    smoothness: Optional[int] = typer.Option(None),
    psi_correction: Optional[float] = typer.Option(None, help="prop49: psi = |x|^m (1 + c|x|)."),
    norms: bool = typer.Option(True, "--norms/--no-norms"),
    workers: int = typer.Option(1, min=1),
    out: Optional[Path] = typer.Option(None, help="Report directory, default HYPERJAC_REPORT_DIR."),
    progress: bool = typer.Option(False, help="tqdm bar over k on stderr."),
):
    """Sweep a family over k, fit rates and judge them against the predicted exponents."""
    cfg = FamilyConfig.build(
        family=family.value,
        N=dimension,
        n=components,
        m=m,
        r=r,
        rho=_rational(rho, "--rho"),
        s=_rational(s, "--s"),
        p=_rational(p, "--p"),
        ks=_int_list(k, "--k") if k is not None else None,
        reduced=reduced,
        base=base,
        smoothness=smoothness,
        psi_correction=psi_correction,
        norms=norms,
    )
    exp = run_family(cfg, workers=workers, progress=progress)
    json_path, csv_path = write_report(exp, out or get_settings().report_dir)
    summary = {
        "family": exp.family,
        "fits": exp.fits,
        "verdicts": exp.verdicts,
        "notes": exp.notes,
        "passed": exp.passed,
        "report": str(json_path),
        "table": str(csv_path) if csv_path else None,
    }
    _emit(summary, None)
    if not exp.passed:
        failed = [name for name, ok in exp.verdicts.items() if not ok]
        raise VerificationError(f"{exp.family} verdicts failed: {', '.join(failed)}")


@app.command()
@_exits
def sobolev(
    path: Path = typer.Argument(..., help="Scalar or vector field JSON."),
    s: str = typer.Option(..., help="Smoothness, e.g. 1/2."),
    p: str = typer.Option(..., help="Integrability exponent."),
    lo: float = typer.Option(0.0, help="Lower corner of the cube box."),
    hi: float = typer.Option(1.0, help="Upper corner of the cube box."),
    nodes: Optional[int] = typer.Option(None, help="Gauss nodes per panel."),
    panels: Optional[int] = typer.Option(None, help="Panels per axis."),
    pair_grid: Optional[int] = typer.Option(None, help="Pair-grid cells per axis in 2-D."),
    workers: int = typer.Option(1, min=1),
    s1: Optional[str] = typer.Option(None),
    p1: Optional[str] = typer.Option(None),
    s2: Optional[str] = typer.Option(None),
    p2: Optional[str] = typer.Option(None),
):
    """Print the W^{s,p} norm with its integer and fractional parts."""
    u = load_field(path)
    box = BoxDomain.cube(lo, hi, u.dim)
    overrides = {"nodes": nodes, "panels": panels, "pair_grid": pair_grid}
    spec = QuadratureSpec.from_settings(**{key: v for key, v in overrides.items() if v is not None})
    sp = SobolevParams(_rational(s, "--s"), _rational(p, "--p"))
    norm = sobolev_norm(u, sp, box, spec, workers=workers)
    payload = {
        "s": str(sp.s),
        "p": str(sp.p),
        "box": box.to_dict(),
        "norm": norm.total,
        "integer_part": norm.integer_part,
        "fractional_part": norm.fractional_part,
    }
    endpoints = (s1, p1, s2, p2)
    if any(e is not None for e in endpoints):
        if any(e is None for e in endpoints):
            raise ConfigError("the interpolation ratio needs all of --s1 --p1 --s2 --p2")
        low = SobolevParams(_rational(s1, "--s1"), _rational(p1, "--p1"))
        high = SobolevParams(_rational(s2, "--s2"), _rational(p2, "--p2"))
        ratio, theta = interpolation_ratio(u, sp, low, high, box, spec)
        payload["interpolation"] = {"ratio": ratio, "theta": str(theta)}
    _emit(payload, None)


@app.command("ibp-check")
@_exits
def ibp_check(
    seed: Optional[int] = typer.Option(None, help="Seed, default HYPERJAC_SEED."),
    dimension: int = typer.Option(2, "--N", min=1),
    m: int = typer.Option(1, "--m", min=1),
    r: int = typer.Option(2, "--r", min=1),
):
    """Build a random (u, psi) pair and compare both sides of the extension identity."""
    if r > dimension:
        raise ConfigError(f"degree r={r} exceeds N={dimension}")
    seed = get_settings().seed if seed is None else seed
    rng = np.random.default_rng(seed)
    u, psi, spec, box = random_ibp_case(rng, dimension, m, r)
    outcome = compare_extension_identity(u, psi, spec, box)
    _emit({"seed": seed, "N": dimension, "m": m, "spec": str(spec), **outcome}, None)
    if not outcome["agrees"]:
        raise VerificationError(f"extension identity disagrees: lhs {outcome['lhs']!r}, rhs {outcome['rhs']!r}")
