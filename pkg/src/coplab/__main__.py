"""Command-line entry point for the copolymer laboratory."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from coplab.bounds import (
    QuadratureSpec,
    ThresholdKind,
    alpha_threshold,
    bound_curves,
    optimize_kappa,
    quasiexpl_closed_lower,
    quasiexpl_value,
    weak_coupling_slope_report,
)
from coplab.fracmom import FracParams, delocalization_certificate, parameter_recipe
from coplab.metrics import initialize_metrics
from coplab.model import CopolymerLabError, DisorderLaw, ModelSpec, ReturnLaw, law_from_name
from coplab.partition import free_energy_estimate, localization_certificate
from coplab.phase import (
    ExperimentConfig,
    SearchBudget,
    dumps,
    run_experiment,
    scan_csv_text,
    scan_phase,
    write_records,
)
from coplab.renewal import delta_laplace_curve, log_renewal_table
from coplab.settings import LabSettings, default_metrics_log_path

LOGGER = logging.getLogger("coplab")

EXIT_OK = 0
EXIT_IO = 1
EXIT_ERROR = 2


class UsageError(Exception):
    """A flag combination argparse cannot express was not satisfied."""


def configure_logging(verbose: bool = False, log_file: str | None = None) -> None:
    """Set up console logging and, when requested, a rolling log file.

    - Console level is INFO, or DEBUG with ``--verbose``.
    - With a log file, DEBUG records are also written there (1 MB, 2 backups).
    """
    fmt = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    handlers: list[logging.Handler] = []

    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(logging.DEBUG if verbose else logging.INFO)
    ch.setFormatter(fmt)
    handlers.append(ch)

    file_error: OSError | None = None
    if log_file:
        try:
            from logging.handlers import RotatingFileHandler

            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            fh = RotatingFileHandler(
                str(log_path), maxBytes=1_000_000, backupCount=2, encoding="utf-8"
            )
            fh.setLevel(logging.DEBUG)
            fh.setFormatter(fmt)
            handlers.append(fh)
        except OSError as exc:
            file_error = exc

    root = logging.getLogger("coplab")
    root.setLevel(logging.DEBUG)
    root.propagate = False
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    if file_error is not None:
        LOGGER.warning("Cannot open log file %s, logging to console only: %s", log_file, file_error)


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--law", default="srw", help="srw, zipf, heavyhead or custom:FILE")
    common.add_argument("--alpha", type=float, help="tail exponent of zipf/heavyhead laws")
    common.add_argument("--head-size", type=int, help="head size N0 of the heavyhead law")
    common.add_argument("--n-max", help="precomputed horizon of the return law")
    common.add_argument("--disorder", default="gaussian", choices=["gaussian", "rademacher"])
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--h", type=float, default=0.0)
    common.add_argument("--samples", type=int, help="Monte Carlo samples")
    common.add_argument("--confidence", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default="json")
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--log-file")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(
        prog="coplab", description="Copolymer at a selective interface: bounds and certificates"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="critical-curve bounds and slopes")
    p.add_argument("--lambda-grid", type=_float_list)
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("quasiexpl", parents=[common], help="A(alpha, kappa) and its roots")
    p.add_argument("--kappa", type=float)
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--threshold", choices=[kind.value for kind in ThresholdKind])
    p.set_defaults(handler=_cmd_quasiexpl)

    p = sub.add_parser("free-energy", parents=[common], help="(1/N) E log Z^c_N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--free", action="store_true", help="use the free partition function")
    p.set_defaults(handler=_cmd_free_energy)

    p = sub.add_parser("certify-loc", parents=[common], help="localization certificate")
    p.add_argument("--n-schedule", type=_int_list)
    p.set_defaults(handler=_cmd_certify_loc)

    p = sub.add_parser("certify-deloc", parents=[common], help="delocalization certificate")
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--knob", type=float, help="rho (alpha > 1) or c (alpha <= 1) of the recipe")
    p.set_defaults(handler=_cmd_certify_deloc)

    p = sub.add_parser("scan", parents=[common], help="bracket h_c over a lambda grid")
    p.add_argument("--lambda-grid", type=_float_list, required=True)
    p.add_argument("--records-dir", help="directory for per-probe JSON records")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--wall-budget", type=float, help="seconds per lambda")
    p.add_argument("--moment-samples", type=int)
    p.set_defaults(handler=_cmd_scan, format="csv")

    p = sub.add_parser("renewal-check", parents=[common], help="renewal masses and occupation")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--q", type=_float_list, default=[1.0, 2.0, 8.0])
    p.add_argument("--conditioned", action="store_true")
    p.set_defaults(handler=_cmd_renewal_check)

    p = sub.add_parser("experiment", help="numerical experiments")
    experiments = p.add_subparsers(dest="experiment", required=True)
    e = experiments.add_parser("ldp", parents=[common], help="neutral-stretch LDP rate")
    e.add_argument("--ell", type=int, default=400)
    e.add_argument("--delta", type=float, default=0.3)
    e.add_argument("--method", choices=["importance", "direct"], default="importance")
    e.set_defaults(handler=_cmd_experiment, kind="ldp_rate")
    e = experiments.add_parser("heavy-head", parents=[common], help="heavy-head return laws")
    e.add_argument("--epsilon", type=float, default=0.2)
    e.add_argument("--head-schedule", type=_int_list, default=[2**4, 2**8, 2**12])
    e.add_argument("--h-step", type=float, default=0.05)
    e.set_defaults(handler=_cmd_experiment, kind="heavy_head")
    return parser


# Helpers -------------------------------------------------------------------


def _settings(args: argparse.Namespace) -> LabSettings:
    base = LabSettings.load(Path(args.config)) if args.config else LabSettings()
    return base.merged(
        n_max=args.n_max,
        n_samples=args.samples,
        confidence=args.confidence,
        workers=args.workers,
        log_file=args.log_file,
    )


def _law(args: argparse.Namespace, settings: LabSettings) -> ReturnLaw:
    return law_from_name(args.law, args.alpha, settings.n_max, args.head_size)


def _model(args: argparse.Namespace, settings: LabSettings) -> ModelSpec:
    return ModelSpec.build(_law(args, settings), DisorderLaw.parse(args.disorder), args.lam, args.h)


def _quadrature(settings: LabSettings) -> QuadratureSpec:
    return QuadratureSpec(settings.hermite_order, settings.t_split, settings.rel_tol)


def _require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError("--seed is required")
    return int(args.seed)


def _records_csv(records: Sequence[dict[str, Any]]) -> str:
    flat = [{key: _cell(value) for key, value in record.items()} for record in records]
    buffer = io.StringIO()
    if flat:
        writer = csv.DictWriter(buffer, fieldnames=list(flat[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
    return buffer.getvalue()


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (dict, list)):
        return dumps(value).strip().replace("\n", " ")
    return "" if value is None else value


def _emit(args: argparse.Namespace, payload: Any, text: str | None = None) -> None:
    """Write ``text`` (or ``payload`` in the requested format) to --out or stdout."""
    if text is None:
        if args.format == "csv":
            records = payload if isinstance(payload, list) else [payload]
            text = _records_csv(records)
        else:
            text = dumps(payload)
    if args.out:
        target = Path(args.out)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        LOGGER.info("Wrote %s", target)
    else:
        sys.stdout.write(text)


# Subcommands ---------------------------------------------------------------


def _cmd_bounds(args: argparse.Namespace, settings: LabSettings) -> int:
    quad = _quadrature(settings)
    if not args.lambda_grid:
        if args.alpha is None:
            raise UsageError("--alpha or --lambda-grid is required")
        _emit(args, weak_coupling_slope_report(args.alpha, quad))
        return EXIT_OK
    law = _law(args, settings)
    disorder = DisorderLaw.parse(args.disorder)
    rows = [bound_curves(law, disorder, lam, quad=quad).to_dict() for lam in args.lambda_grid]
    _emit(args, rows)
    return EXIT_OK


def _cmd_quasiexpl(args: argparse.Namespace, settings: LabSettings) -> int:
    quad = _quadrature(settings)
    if args.threshold:
        kind = ThresholdKind(args.threshold)
        _emit(args, {"threshold": kind.value, "alpha": alpha_threshold(kind, quad)})
        return EXIT_OK
    if args.alpha is None:
        raise UsageError("--alpha is required")
    if args.optimize or args.kappa is None:
        kappa, value = optimize_kappa(args.alpha, quad)
    else:
        kappa, value = args.kappa, quasiexpl_value(args.alpha, args.kappa, quad)
    _emit(
        args,
        {
            "alpha": args.alpha,
            "kappa": kappa,
            "A": value,
            "closed_form_lower": quasiexpl_closed_lower(args.alpha, kappa),
        },
    )
    return EXIT_OK


def _cmd_free_energy(args: argparse.Namespace, settings: LabSettings) -> int:
    model = _model(args, settings)
    estimate = free_energy_estimate(
        model,
        args.n,
        settings.n_samples,
        args.seed or 0,
        settings.confidence,
        constrained=not args.free,
        workers=settings.workers,
        chunk_size=settings.chunk_size,
    )
    _emit(
        args,
        {
            "model": model.describe(),
            "n": args.n,
            "constrained": not args.free,
            **estimate.to_dict(),
            "lower": estimate.lower(),
            "upper": estimate.upper(),
        },
    )
    return EXIT_OK


def _cmd_certify_loc(args: argparse.Namespace, settings: LabSettings) -> int:
    model = _model(args, settings)
    verdict = localization_certificate(
        model,
        args.n_schedule or settings.n_schedule,
        settings.n_samples,
        settings.confidence,
        args.seed or 0,
        settings.workers,
        settings.chunk_size,
    )
    _emit(args, {"model": model.describe(), **verdict.to_record()})
    return EXIT_OK


def _cmd_certify_deloc(args: argparse.Namespace, settings: LabSettings) -> int:
    model = _model(args, settings)
    if args.gamma is not None and args.k is not None:
        params = FracParams(args.gamma, args.k)
    elif args.knob is not None:
        params = parameter_recipe(model.alpha, model.lam, args.knob)
    else:
        raise UsageError("give --gamma and --k, or --knob")
    certificate = delocalization_certificate(
        model,
        params,
        settings.n_samples,
        settings.confidence,
        args.seed or 0,
        settings.workers,
        settings.chunk_size,
        settings.exact_tail_horizon,
    )
    _emit(args, certificate.to_record())
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace, settings: LabSettings) -> int:
    seed = _require_seed(args)
    model = _model(args, settings)
    budget = SearchBudget.from_settings(
        settings,
        tolerance=args.tolerance,
        wall_budget_s=args.wall_budget,
        moment_samples=args.moment_samples,
    )
    rows = scan_phase(model, args.lambda_grid, budget, seed, quad=_quadrature(settings))
    if args.records_dir:
        write_records(rows, args.records_dir)
    if args.format == "csv":
        _emit(args, None, scan_csv_text(rows))
    else:
        _emit(args, [row.to_record() for row in rows])
    return EXIT_OK


def _cmd_renewal_check(args: argparse.Namespace, settings: LabSettings) -> int:
    law = _law(args, settings)
    n = args.n
    u_n = math.exp(float(log_renewal_table(law, n)[n]))
    mean = law.mean_return_time()
    curve = delta_laplace_curve(
        law,
        n,
        args.q,
        settings.n_samples,
        conditioned=args.conditioned,
        rng_seed=args.seed or 0,
        confidence=settings.confidence,
        workers=settings.workers,
        chunk_size=settings.chunk_size,
    )
    _emit(
        args,
        {
            "law": law.describe(),
            "n": n,
            "u_n": u_n,
            "mean_return_time_times_u_n": mean * u_n if math.isfinite(mean) else None,
            "u_n_log_n": u_n * math.log(n),
            "laplace": [
                {"q": q, **estimate.to_dict()} for q, estimate in zip(args.q, curve)
            ],
        },
    )
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace, settings: LabSettings) -> int:
    seed = _require_seed(args)
    disorder = DisorderLaw.parse(args.disorder)
    if args.kind == "ldp_rate":
        parameters: dict[str, Any] = {
            "lambda": args.lam,
            "h": args.h,
            "ell": args.ell,
            "delta": args.delta,
            "n_samples": settings.n_samples,
            "method": args.method,
        }
        law = _law(args, settings)
    else:
        if args.alpha is None:
            raise UsageError("--alpha is required")
        parameters = {
            "alpha": args.alpha,
            "lambda": args.lam,
            "epsilon": args.epsilon,
            "head_schedule": args.head_schedule,
            "h_step": args.h_step,
        }
        law = None
    config = ExperimentConfig(args.kind, parameters, seed)
    record = run_experiment(config, law, SearchBudget.from_settings(settings), disorder)
    _emit(args, record)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Run one coplab subcommand."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    handler: Callable[[argparse.Namespace, LabSettings], int] = args.handler
    try:
        settings = _settings(args)
        if settings.log_file and not args.log_file:
            configure_logging(args.verbose, settings.log_file)
        initialize_metrics(
            enabled=settings.telemetry_enabled,
            log_path=default_metrics_log_path() if settings.telemetry_enabled else None,
        )
        return handler(args, settings)
    except UsageError as exc:
        parser.error(f"{args.command}: {exc}")
    except CopolymerLabError as exc:
        LOGGER.error("%s", exc)
        return EXIT_ERROR
    except (TypeError, ValueError) as exc:
        LOGGER.error("Invalid argument: %s", exc)
        return EXIT_ERROR
    except OSError as exc:
        LOGGER.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
