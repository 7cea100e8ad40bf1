"""Command-line front end.

Subcommands: gen, validate, extend, moe, pnorm, ccoe, verify. Every solver
artifact embeds its full effective configuration and root seed, so any output
file can be replayed exactly. Exit status: 0 success, 1 validation failure,
2 failed asserted check, 3 usage error.

Optimizer defaults can be overridden by environment variables with the
QCHANLAB_ prefix (QCHANLAB_RESTARTS, QCHANLAB_MAX_ITER, QCHANLAB_TOL_STEP,
QCHANLAB_TOL_VALUE, QCHANLAB_SEED, QCHANLAB_WORKERS, QCHANLAB_FORMAT,
QCHANLAB_P); command-line flags win over both.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .channels import (
    NAMED_CHANNELS,
    Channel,
    channel_hash,
    load_channel,
    parse_channel_spec,
    random_channel,
    save_channel,
    validate,
)
from .errors import DomainError, QChanLabError, ValidationError
from .extensions import build_extension_bundle, load_bundle, save_bundle
from .linalg import matrix_from_json, maximally_mixed
from .solvers import (
    OptimizerConfig,
    convex_closure,
    max_output_pnorm,
    min_output_entropy,
)
from .verify import (
    check_ccoe_transfer,
    check_moe_transfer,
    check_pnorm_transfer,
    check_unital_reduction,
    check_unital_shift,
)

_ENV_PREFIX = "QCHANLAB_"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2
EXIT_USAGE = 3


class UsageError(QChanLabError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit status 3
        raise UsageError(message)


def _env(name: str, cast, fallback):
    raw = os.environ.get(_ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {_ENV_PREFIX}{name}: {raw!r}") from exc


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"bad value for --p: {text!r}") from exc


def _add_optimizer_flags(sub):
    sub.add_argument("--restarts", type=int, default=_env("RESTARTS", int, 64))
    sub.add_argument("--max-iter", type=int, default=_env("MAX_ITER", int, 2000))
    sub.add_argument(
        "--tol-step", type=float, default=_env("TOL_STEP", float, 1e-10)
    )
    sub.add_argument(
        "--tol-value", type=float, default=_env("TOL_VALUE", float, 1e-7)
    )
    sub.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    sub.add_argument("--workers", type=int, default=_env("WORKERS", int, 1))


def _add_output_flags(sub):
    sub.add_argument("-o", "--output", default=None, help="write JSON artifact here")
    sub.add_argument(
        "--format",
        choices=("json", "text"),
        default=_env("FORMAT", str, "text"),
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="qchanlab", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a random channel")
    gen.add_argument("--din", type=int, required=True)
    gen.add_argument("--dout", type=int, required=True)
    gen.add_argument("--env", type=int, default=None, dest="env_dim")
    gen.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    gen.add_argument("--label", default=None)
    _add_output_flags(gen)
    gen.set_defaults(func=_cmd_gen)

    val = subs.add_parser("validate", help="validate a channel or bundle file")
    val.add_argument("path")
    _add_output_flags(val)
    val.set_defaults(func=_cmd_validate)

    ext = subs.add_parser("extend", help="build the extension bundle of a channel")
    ext.add_argument("channel")
    _add_output_flags(ext)
    ext.set_defaults(func=_cmd_extend)

    moe = subs.add_parser("moe", help="minimize output entropy over pure inputs")
    moe.add_argument("channel")
    _add_optimizer_flags(moe)
    _add_output_flags(moe)
    moe.set_defaults(func=_cmd_moe)

    pnorm = subs.add_parser("pnorm", help="maximize the output p-norm")
    pnorm.add_argument("channel")
    pnorm.add_argument("--p", default=_env("P", str, "2"))
    _add_optimizer_flags(pnorm)
    _add_output_flags(pnorm)
    pnorm.set_defaults(func=_cmd_pnorm)

    ccoe = subs.add_parser(
        "ccoe", help="convex closure of output entropy at a prescribed state"
    )
    ccoe.add_argument("channel")
    ccoe.add_argument(
        "--rho", default=None, help="matrix JSON file; default maximally mixed"
    )
    _add_optimizer_flags(ccoe)
    _add_output_flags(ccoe)
    ccoe.set_defaults(func=_cmd_ccoe)

    ver = subs.add_parser("verify", help="run a claim-catalog check on channel pairs")
    ver.add_argument(
        "--theorem",
        required=True,
        choices=("1-moe", "1-pnorm", "1-ccoe", "2", "3"),
        help="which claim to certify",
    )
    ver.add_argument("--phi", required=True, help="channel file or name:dim[:param]")
    ver.add_argument(
        "--omega", default="identity:2", help="channel file or name:dim[:param]"
    )
    ver.add_argument("--p", default=_env("P", str, "2"))
    ver.add_argument("--rho", default=None, help="matrix JSON file (1-ccoe only)")
    _add_optimizer_flags(ver)
    _add_output_flags(ver)
    ver.set_defaults(func=_cmd_verify)

    return parser


def _load_channel_arg(arg: str) -> Channel:
    head = arg.split(":", 1)[0]
    if ":" in arg and head in NAMED_CHANNELS:
        return parse_channel_spec(arg)
    if not os.path.exists(arg):
        raise ValidationError(f"channel file not found: {arg}")
    return load_channel(arg)


def _load_state_arg(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))


def _config_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        max_iterations=args.max_iter,
        step_tolerance=args.tol_step,
        value_tolerance=args.tol_value,
        seed=args.seed,
    )


def _emit(args, payload: dict, text: str, write_artifact: bool = True) -> None:
    if write_artifact and args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _cmd_gen(args) -> int:
    phi = random_channel(
        args.din, args.dout, env_dim=args.env_dim, seed=args.seed, label=args.label
    )
    if not args.output:
        raise UsageError("gen requires -o/--output")
    save_channel(args.output, phi)
    report = validate(phi)
    _emit(
        args,
        report.to_json(),
        f"wrote {args.output}: {phi.label} "
        f"(TP residual {report.tp_residual:.2e}, kind {report.kind})",
        write_artifact=False,
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    if not os.path.exists(args.path):
        raise ValidationError(f"file not found: {args.path}")
    with open(args.path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if "bistochastic_ext" in obj:
        bundle = load_bundle(args.path, strict=False)
        reports = {
            "base": validate(bundle.base),
            "bistochastic_ext": validate(bundle.bistochastic_ext),
            "unital_ext": validate(bundle.unital_ext),
        }
        ok = (
            all(r.valid for r in reports.values())
            and reports["bistochastic_ext"].kind in ("bistochastic", "unital")
            and reports["unital_ext"].kind == "unital"
        )
        payload = {name: r.to_json() for name, r in reports.items()}
        lines = [
            f"{name}: kind {r.kind}, TP residual {r.tp_residual:.2e}, "
            f"unitality residual {r.unitality_residual:.2e}"
            for name, r in reports.items()
        ]
        _emit(args, payload, "\n".join(lines))
        return EXIT_OK if ok else EXIT_INVALID
    from .channels import channel_from_json

    phi = channel_from_json(obj, strict=False)
    report = validate(phi)
    _emit(
        args,
        report.to_json(),
        f"{phi.label or args.path}: kind {report.kind}, "
        f"TP residual {report.tp_residual:.2e}, "
        f"unitality residual {report.unitality_residual:.2e}, "
        f"{'valid' if report.valid else 'INVALID'}",
    )
    return EXIT_OK if report.valid else EXIT_INVALID


def _cmd_extend(args) -> int:
    phi = _load_channel_arg(args.channel)
    bundle = build_extension_bundle(phi)
    if not args.output:
        raise UsageError("extend requires -o/--output")
    save_bundle(args.output, bundle)
    _emit(
        args,
        {
            "d": bundle.d,
            "c": bundle.c,
            "bistochastic_ext": validate(bundle.bistochastic_ext).to_json(),
            "unital_ext": validate(bundle.unital_ext).to_json(),
        },
        f"wrote {args.output}: extensions of {phi.label or args.channel} "
        f"(d={bundle.d}, c={bundle.c})",
        write_artifact=False,
    )
    return EXIT_OK


def _optimum_payload(command: str, phi: Channel, opt, args, extra: dict | None = None) -> dict:
    # workers is deliberately not echoed: it can never change the result
    payload = {
        "command": command,
        "channel": {"label": phi.label, "hash": channel_hash(phi)},
    }
    if extra:
        payload.update(extra)
    payload["optimum"] = opt.to_json()
    return payload


def _cmd_moe(args) -> int:
    phi = _load_channel_arg(args.channel)
    cfg = _config_from_args(args)
    opt = min_output_entropy(phi, cfg, workers=args.workers)
    _emit(
        args,
        _optimum_payload("moe", phi, opt, args),
        f"S_min({phi.label or args.channel}) = {opt.value:.10f} nats "
        f"(converged={opt.converged}, {opt.restarts_agreeing}/{cfg.restarts} "
        "restarts agree)",
    )
    return EXIT_OK


def _cmd_pnorm(args) -> int:
    phi = _load_channel_arg(args.channel)
    p = _parse_p(args.p)
    cfg = _config_from_args(args)
    opt = max_output_pnorm(phi, p, cfg, workers=args.workers)
    _emit(
        args,
        _optimum_payload("pnorm", phi, opt, args, {"p": args.p}),
        f"nu_{args.p}({phi.label or args.channel}) = {opt.value:.10f} "
        f"(converged={opt.converged}, {opt.restarts_agreeing}/{cfg.restarts} "
        "restarts agree)",
    )
    return EXIT_OK


def _cmd_ccoe(args) -> int:
    phi = _load_channel_arg(args.channel)
    rho = _load_state_arg(args.rho) if args.rho else maximally_mixed(phi.dim_in)
    cfg = _config_from_args(args)
    opt = convex_closure(phi, rho, cfg, workers=args.workers)
    _emit(
        args,
        _optimum_payload("ccoe", phi, opt, args),
        f"H({phi.label or args.channel}) = {opt.value:.10f} nats at the "
        f"prescribed state ({len(opt.argument.members)} ensemble members)",
    )
    return EXIT_OK


def _cmd_verify(args) -> int:
    phi = _load_channel_arg(args.phi)
    omega = _load_channel_arg(args.omega)
    cfg = _config_from_args(args)
    p = _parse_p(args.p)
    if args.theorem == "1-moe":
        report = check_moe_transfer(phi, omega, cfg, workers=args.workers)
    elif args.theorem == "1-pnorm":
        report = check_pnorm_transfer(phi, omega, p, cfg, workers=args.workers)
    elif args.theorem == "1-ccoe":
        rho = _load_state_arg(args.rho) if args.rho else None
        report = check_ccoe_transfer(phi, omega, rho, cfg, workers=args.workers)
    elif args.theorem == "2":
        report = check_unital_shift(phi, omega, p, cfg)
    else:
        report = check_unital_reduction(phi, omega, cfg, workers=args.workers)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report.dumps())
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=2))
    else:
        print(report.render_text(), end="")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"validation error: cannot parse JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
