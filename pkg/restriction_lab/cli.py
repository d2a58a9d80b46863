"""
Command line entry point: ``restriction-lab <subcommand> [flags]``.

Every subcommand writes ``<out_dir>/<subcommand>.csv`` and/or
``<out_dir>/<subcommand>.json`` once all computation has finished.
Subcommand parameters come from the command line, then from the config
file (plain keys or keys under a ``[<subcommand>]`` section), then from
the defaults below.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from restriction_lab import __version__
from restriction_lab._compat import canonical_json, model_dump, to_jsonable
from restriction_lab.acceptance import run_acceptance
from restriction_lab.config import FORMATS, LabConfig
from restriction_lab.exceptions import EXIT_NUMERICAL, EXIT_OK, ConfigurationError, exit_code_for
from restriction_lab.lab import RestrictionLab
from restriction_lab.models.chain import ChainId, ChainMode
from restriction_lab.models.common import RunManifest
from restriction_lab.models.knapp import KnappParams
from restriction_lab.models.normal_form import NormalFormSurface
from restriction_lab.models.surface import ExponentPair, SurfaceDescriptor, SurfaceKind
from restriction_lab.resources.extension import EvalGrid, SampledDensity, bump
from restriction_lab.resources.norms import CHECKERS
from restriction_lab.resources.slicing import DEFAULT_BOX


logger = logging.getLogger("restriction_lab")

Rows = list[dict[str, Any]]
Result = tuple[Rows, dict[str, Any]]

SURFACE_CHOICES = ("circle",) + tuple(kind.value for kind in SurfaceKind)
DEMOS = ("cylinder", "developable", "paraboloid")
DENSITIES = ("one", "bump")
CHAINS = tuple(chain.value for chain in ChainId)
MODES = tuple(mode.value for mode in ChainMode)


def _number(value: Any) -> float:
    """Float from a number or a fraction such as ``4/3``."""
    try:
        return float(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"Cannot parse '{value}' as a number")


def _flag(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text not in ("true", "false", "1", "0", "yes", "no"):
        raise ValueError(value)
    return text in ("true", "1", "yes")


def _floats(value: Any) -> list[float]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return [_number(item) for item in items if str(item).strip()]


@dataclass(frozen=True)
class Param:
    name: str
    cast: Callable[[Any], Any]
    default: Any
    choices: tuple[str, ...] | None = None


PARAMS: dict[str, tuple[Param, ...]] = {
    "surface": (
        Param("surface", str, None, SURFACE_CHOICES),
        Param("n", int, 2),
        Param("k", int, 2),
        Param("point", _floats, None),
    ),
    "norm": (
        Param("checker", str, "minkowski", CHECKERS),
        Param("p", _number, 1.5),
        Param("count", int, 1000),
    ),
    "extend": (
        Param("surface", str, "circle", SURFACE_CHOICES),
        Param("n", int, 2),
        Param("k", int, 2),
        Param("u", str, "one", DENSITIES),
        Param("box", _number, 5.0),
        Param("res", int, 64),
        Param("grid", int, 4096),
    ),
    "chain": (
        Param("chain", str, "sphere", CHAINS),
        Param("mode", str, "whole", MODES),
        Param("pprime", _number, 6.0),
        Param("q", _number, 2.0),
        Param("n", int, 2),
        Param("count", int, 20),
        Param("box", _number, DEFAULT_BOX),
        Param("seed", int, None),
    ),
    "knapp": (
        Param("k", int, 2),
        Param("pprime", _number, 6.0),
        Param("q", _number, 2.0),
        Param("eps", _number, 1.0),
        Param("lambdas", _floats, [4.0, 8.0, 16.0, 32.0]),
    ),
    "ode": (
        Param("k", int, 5),
        Param("count", int, 100),
        Param("t0", _number, 0.1),
    ),
    "normalform": (
        Param("demo", str, "cylinder", DEMOS),
    ),
    "acceptance": (
        Param("full", _flag, False),
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restriction-lab",
        description="Numerical checks of Fourier restriction estimates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, default=None, help="Key-value config file.")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every random corpus.")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads for sweeps.")
    parser.add_argument("--out-dir", default=None, help="Directory for CSV/JSON artifacts.")
    parser.add_argument("--format", choices=FORMATS, default=None, help="Artifact format.")
    parser.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Logging level on stderr.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", help="Descriptor, measure weight, curvature and type at a point.")
    p.add_argument("--surface", choices=SURFACE_CHOICES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--point", help="Comma separated chart point.")

    p = sub.add_parser("norm", help="Census of an inequality checker.")
    p.add_argument("--checker", choices=CHECKERS)
    p.add_argument("--p", help="Exponent, e.g. 1.5 or 4/3.")
    p.add_argument("--count", type=int)

    p = sub.add_parser("extend", help="Extension operator on a box grid.")
    p.add_argument("--surface", choices=SURFACE_CHOICES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--u", choices=DENSITIES)
    p.add_argument("--box", help="Half-width of the evaluation box.")
    p.add_argument("--res", type=int, help="Evaluation points per axis.")
    p.add_argument("--grid", type=int, help="Chart resolution of the surface grid.")

    p = sub.add_parser("chain", help="Verify an inequality chain and the transferred bound.")
    p.add_argument("--chain", choices=CHAINS)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--pprime")
    p.add_argument("--q")
    p.add_argument("--n", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--box", help="Half-width of the slice evaluation box.")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Seed of the chain corpora.")

    p = sub.add_parser("knapp", help="Knapp scaling fit and necessity verdict.")
    p.add_argument("--k", type=int)
    p.add_argument("--pprime")
    p.add_argument("--q")
    p.add_argument("--eps")
    p.add_argument("--lambdas", help="Comma separated dilations, at least four.")

    p = sub.add_parser("ode", help="Sweep of the singular Cauchy problem.")
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--t0")

    p = sub.add_parser("normalform", help="Normal-form checks on a demo surface.")
    p.add_argument("--demo", choices=DEMOS)

    p = sub.add_parser("acceptance", help="Run the acceptance suite.")
    p.add_argument("--full", action="store_true", default=None, help="Full census sizes.")
    return parser


def resolve_params(command: str, args: argparse.Namespace, extra: dict[str, Any]) -> dict[str, Any]:
    """CLI flag, then ``<command>.<name>`` or ``<name>`` from the config, then the default."""
    _check_extra(extra)
    params: dict[str, Any] = {}
    for param in PARAMS[command]:
        value = getattr(args, param.name, None)
        if value is None:
            value = extra.get(f"{command}.{param.name}", extra.get(param.name))
        if value is None:
            params[param.name] = param.default
            continue
        try:
            params[param.name] = param.cast(value)
        except ValueError:
            raise ConfigurationError(f"Cannot parse '{value}'", key=param.name)
        if param.choices is not None and params[param.name] not in param.choices:
            raise ConfigurationError(f"Unknown value '{value}'", hint=", ".join(param.choices), key=param.name)
    return params


def _check_extra(extra: dict[str, Any]) -> None:
    plain = {param.name for params in PARAMS.values() for param in params}
    for key in extra:
        section, _, name = key.rpartition(".")
        if section == "surface":
            continue
        if section and section in PARAMS and name in {p.name for p in PARAMS[section]}:
            continue
        if not section and key in plain:
            continue
        raise ConfigurationError("Unknown config key", hint="See docs/CONFIG.md", key=key)


# -- subcommands -----------------------------------------------------------


def _surface(lab: RestrictionLab, params: dict[str, Any]) -> SurfaceDescriptor:
    kind = params["surface"]
    if kind is None:
        if any(key.startswith("surface.") for key in lab.config.extra):
            return lab.surfaces.from_config(lab.config.extra)
        kind = "circle"
    if kind == "circle":
        return lab.surfaces.sphere(2)
    n, k = params["n"], params["k"]
    builders = {
        SurfaceKind.SPHERE.value: lambda: lab.surfaces.sphere(n),
        SurfaceKind.PARABOLOID.value: lambda: lab.surfaces.paraboloid(n),
        SurfaceKind.HYPERBOLOID.value: lambda: lab.surfaces.hyperboloid(n),
        SurfaceKind.CONE.value: lambda: lab.surfaces.cone(n),
        SurfaceKind.FINITE_TYPE.value: lambda: lab.surfaces.finite_type(k),
    }
    return builders[kind]()


def run_surface(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    surface = _surface(lab, params)
    if params["point"] is not None:
        point = np.asarray(params["point"], dtype=float)
    elif surface.kind is SurfaceKind.CONE:
        point = np.zeros(surface.chart_dim)
        point[0] = 0.5 * (surface.r0 + surface.r1)
    else:
        point = 0.5 * (np.asarray(surface.lower) + np.asarray(surface.upper))

    row: dict[str, Any] = {
        "kind": surface.kind.value,
        "n": surface.n,
        "point": " ".join(f"{x:.12g}" for x in point),
        "measure_weight": lab.surfaces.measure_weight(surface, point),
        "known_range": lab.surfaces.known_range(surface.kind, surface.n),
    }
    if surface.kind is SurfaceKind.FINITE_TYPE:
        row["gaussian_curvature"] = lab.surfaces.gaussian_curvature(surface.graph, point, surface.diameter)
        row["contact_order"] = lab.surfaces.contact_order(surface.graph, point, diameter=surface.diameter).order
    return [row], {"surface": model_dump(surface), **row}


def run_norm(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    rows = lab.norms.census(params["checker"], params["p"], params["count"])
    ratios = [row.ratio for row in rows]
    return [model_dump(row) for row in rows], {
        "checker": params["checker"],
        "p": params["p"],
        "count": len(rows),
        "max_ratio": max(ratios, default=0.0),
        "mean_ratio": float(np.mean(ratios)) if ratios else 0.0,
    }


def run_extend(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    surface = _surface(lab, params)
    chart = lab.surfaces.grid(surface, params["grid"] if surface.chart_dim == 1 else min(params["grid"], 256))
    if params["u"] == "one":
        u: Any = 1.0
    else:
        center = 0.5 * (np.asarray(surface.lower) + np.asarray(surface.upper))
        radius = 0.5 * float(np.min(np.subtract(surface.upper, surface.lower)))
        u = lambda pts: bump(np.linalg.norm(pts - center, axis=-1) / radius)  # noqa: E731
    density = SampledDensity.from_grid(surface, chart, u)
    grid = EvalGrid.box(params["box"], params["res"], surface.ambient_dim)
    values = lab.extension.extend(density, grid)
    origin = lab.extension.extend(density, EvalGrid.scattered(np.zeros((1, surface.ambient_dim))))[0]

    axes = [f"x{i + 1}" for i in range(surface.ambient_dim)]
    rows = [
        {**dict(zip(axes, point.tolist())), "re": value.real, "im": value.imag, "abs": abs(value)}
        for point, value in zip(grid.points, values)
    ]
    return rows, {
        "surface": model_dump(surface),
        "points": grid.size,
        "value_at_origin": to_jsonable(complex(origin)),
        "max_abs": float(np.max(np.abs(values))),
    }


def run_chain(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    chain, mode, n = ChainId(params["chain"]), ChainMode(params["mode"]), params["n"]
    pair = ExponentPair.from_primes(params["pprime"], params["q"])
    slicing = lab.slicing
    box = params["box"]
    c_slice = slicing.slice_constant(chain, n, pair, box=box)
    corpus = slicing.chain_corpus(chain, n, params["count"])
    bound, reports = slicing.sandwich(chain, pair, c_slice, corpus, mode, n, box=box)
    rows = [
        {"density": report.density, "link": link.name, "lhs": link.lhs, "rhs": link.rhs,
         "ratio": link.ratio, "identity": link.identity, "violated": link.violated}
        for report in reports for link in report.links
    ]
    return rows, {
        "bound": model_dump(bound),
        "margin": to_jsonable(bound.margin),
        "holds": bound.holds,
        "trivial": sum(report.trivial for report in reports),
        "violating_densities": [report.density for report in reports if not report.ok],
    }


def run_knapp(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    k = params["k"]
    kp = KnappParams(k=k, eps=params["eps"], p_prime=params["pprime"], q=params["q"])
    fit = lab.knapp.knapp_slope_fit(lab.surfaces.finite_type(k), kp, params["lambdas"])
    verdict = lab.knapp.necessity_verdict(k, kp.p_prime, kp.q)
    return [model_dump(sample, by_alias=True) for sample in fit.samples], {
        "fit": model_dump(fit, by_alias=True),
        "error": fit.error,
        "exponent": lab.knapp.knapp_exponent(kp),
        "necessity": model_dump(verdict),
    }


def run_ode(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    verdicts = lab.normal_form.ode_sweep(params["k"], params["count"], t0=params["t0"])
    counts: dict[str, int] = {}
    for verdict in verdicts:
        counts[verdict.status.value] = counts.get(verdict.status.value, 0) + 1
    return [model_dump(v) for v in verdicts], {
        "k": params["k"],
        "runs": len(verdicts),
        "status": counts,
        "supports_claim": all(v.supports_claim for v in verdicts),
    }


def run_normalform(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    normal_form = lab.normal_form
    demo = params["demo"]
    if demo == "cylinder":
        cylinder = NormalFormSurface(k=3, coefficients={"0,0": 1.0})
        f = cylinder.f
        report = normal_form.verify_normal_form(cylinder)
    elif demo == "developable":
        f = normal_form.tangent_developable()
        report = normal_form.verify_normal_form(f, k=2, half_width=0.5)
    else:
        f = lambda x1, x2: 0.5 * (x1**2 + x2**2)  # noqa: E731
        report = normal_form.verify_normal_form(f, k=2, half_width=0.5)

    axis = np.linspace(-0.25, 0.25, 9)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    residual = normal_form.curvature_residual(f, np.stack([x1.ravel(), x2.ravel()], axis=-1))
    return [model_dump(check) for check in report.checks], {
        "demo": demo,
        "report": model_dump(report),
        "passed": report.passed,
        "curvature_residual": residual,
    }


def run_acceptance_command(lab: RestrictionLab, params: dict[str, Any]) -> Result:
    items = run_acceptance(lab, full=params["full"])
    return [model_dump(item) for item in items], {
        "full": params["full"],
        "passed": all(item.passed for item in items),
        "items": [model_dump(item) for item in items],
    }


COMMANDS: dict[str, Callable[[RestrictionLab, dict[str, Any]], Result]] = {
    "surface": run_surface,
    "norm": run_norm,
    "extend": run_extend,
    "chain": run_chain,
    "knapp": run_knapp,
    "ode": run_ode,
    "normalform": run_normalform,
    "acceptance": run_acceptance_command,
}


# -- artifacts -------------------------------------------------------------


def write_csv(path: Path, rows: Rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fields: list[str] = []
    for row in rows:
        fields.extend(key for key in row if key not in fields)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_value(value) for key, value in row.items()})


def _csv_value(value: Any) -> Any:
    value = to_jsonable(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return canonical_json(value).strip().replace("\n", "")
    return value


def write_json(path: Path, manifest: RunManifest, payload: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json({"manifest": model_dump(manifest), "result": payload}), encoding="utf-8")


def load_config(args: argparse.Namespace) -> LabConfig:
    config = LabConfig.from_file(args.config) if args.config is not None else LabConfig()
    overrides = {
        key: value
        for key, value in (("seed", args.seed), ("workers", args.workers),
                           ("out_dir", args.out_dir), ("format", args.format))
        if value is not None
    }
    return replace(config, **overrides) if overrides else config


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        params = resolve_params(args.command, args, config.extra)
        if "seed" in params:
            if params["seed"] is None:
                params["seed"] = config.seed
            config = replace(config, seed=params["seed"])
        lab = RestrictionLab(config=config)
        rows, payload = COMMANDS[args.command](lab, params)
    except Exception as e:
        logger.error("%s failed: %s", args.command, e)
        return exit_code_for(e)

    out_dir = Path(config.out_dir)
    manifest = RunManifest(subcommand=args.command, version=__version__, config_hash=config.config_hash(),
                           seed=config.seed, parameters=to_jsonable(params))
    written = []
    if config.format in ("csv", "both") and rows:
        write_csv(out_dir / f"{args.command}.csv", rows)
        written.append(f"{args.command}.csv")
    if config.format in ("json", "both"):
        write_json(out_dir / f"{args.command}.json", manifest, payload)
        written.append(f"{args.command}.json")
    logger.info("Wrote %s to %s", ", ".join(written), out_dir)

    if args.command == "acceptance":
        for row in rows:
            print(f"{row['criterion']:>2} {row['name']:<16} {'pass' if row['passed'] else 'FAIL'}  {row['detail']}")
        return EXIT_OK if payload["passed"] else EXIT_NUMERICAL
    return EXIT_OK
