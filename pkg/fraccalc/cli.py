"""Command-line surface: integral, deriv, converge, falva-sim and verify.

CSV goes to standard output (or ``--out``), diagnostics to standard error.
Exit status: 0 success, 1 property failure, 2 invalid input, 3 numerical
failure.
"""
import argparse
import contextlib
import logging
import math
import sys
from typing import Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd

from fraccalc import falva, properties
from fraccalc.config import Settings, load_settings
from fraccalc.convergence import convergence_table, doubling_grids
from fraccalc.errors import DerivativeUnavailableError, NumericalFailure, ValidationError
from fraccalc.fracops import (
    OperatorKind,
    OperatorRequest,
    Side,
    apply_operator,
    rl_integral_on_grid,
)
from fraccalc.funcspace import (
    AnalyticFunction,
    FractionalOrder,
    GridFunction,
    parse_function,
    read_grid_csv,
    sample,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_PROPERTY_FAILURE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULT_DOMAIN = (0.0, 1.0)
DEFAULT_N = 1025


class CommandLineParser(argparse.ArgumentParser):
    """Turns argparse's usage dump into a ValidationError with a one-line message."""

    def error(self, message):
        raise ValidationError(message)


def _real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _reals(text: str) -> List[float]:
    return [_real(part) for part in text.split(",")]


def _pair(text: str) -> Tuple[float, float]:
    values = _reals(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return values[0], values[1]


def configure_logging(level: str) -> None:
    root = logging.getLogger()
    root.setLevel(level)
    if not any(getattr(h, "_fraccalc", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler._fraccalc = True
        root.addHandler(handler)


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        fp = open(path, "w", newline="")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}")
    with fp:
        yield fp


def _write_frame(frame: pd.DataFrame, path: Optional[str], trailer: str = "") -> None:
    """Check the frame is finite, then write it; nothing is created on failure."""
    if not np.all(np.isfinite(frame.to_numpy(dtype=float))):
        raise NumericalFailure("result contains non-finite values")
    with _output(path) as fp:
        frame.to_csv(fp, index=False, float_format="%.17g")
        fp.write(trailer)


def _operand(args) -> Tuple[object, float, float, int]:
    """The --func operand with its grid; csv:<path> operands bring their own grid."""
    if args.func.startswith("csv:"):
        g = read_grid_csv(args.func[len("csv:"):])
        return g, g.a, g.b, g.n_points
    f = parse_function(args.func)
    a, b = args.domain or DEFAULT_DOMAIN
    n = args.n or DEFAULT_N
    if not b > a:
        raise ValidationError(f"--domain needs a < b, got {a:g},{b:g}")
    if n < 3:
        raise ValidationError(f"--n must be at least 3, got {n}")
    return f, a, b, n


def _points(args, a: float, b: float, n: int, side: Side, skip: int = 1) -> np.ndarray:
    """--at, or every node at least ``skip`` steps away from the terminal."""
    if args.at is not None:
        return np.asarray(args.at, dtype=float)
    nodes = np.linspace(a, b, n)
    return nodes[skip:] if side is Side.LEFT else nodes[: n - skip]


def _evaluate(method: str, f, a: float, b: float, n: int, side: Side, alpha: float, points) -> List[float]:
    kind = OperatorKind.from_method(method)
    req = OperatorRequest.on_grid(kind, side, alpha, a, b)
    if kind is OperatorKind.CAPUTO and isinstance(f, GridFunction):
        raise DerivativeUnavailableError("Caputo needs exact derivatives; csv operands have none")
    operand = f if kind is OperatorKind.CAPUTO or isinstance(f, GridFunction) else sample(f, a, b, n)
    return [apply_operator(req, operand, x, grid=(a, b, n)) for x in points]


def run_integral(args, settings: Settings) -> int:
    f, a, b, n = _operand(args)
    side = Side(args.side)
    g = f if isinstance(f, GridFunction) else sample(f, a, b, n)
    if args.beta is not None:
        g = rl_integral_on_grid(g, FractionalOrder(args.beta), side)
    points = _points(args, a, b, n, side)
    values = _evaluate("integral", g, a, b, n, side, args.alpha, points)
    _write_frame(pd.DataFrame({"x": points, "value": values}), args.out)
    return EXIT_OK


def run_deriv(args, settings: Settings) -> int:
    f, a, b, n = _operand(args)
    side = Side(args.side)
    points = _points(args, a, b, n, side, skip=FractionalOrder(args.alpha).n)
    if args.method == "all":
        columns = {"x": points}
        for method in ("rl", "caputo", "gl"):
            columns[method] = _evaluate(method, f, a, b, n, side, args.alpha, points)
        frame = pd.DataFrame(columns)
    else:
        frame = pd.DataFrame({"x": points, "value": _evaluate(args.method, f, a, b, n, side, args.alpha, points)})
    _write_frame(frame, args.out)
    return EXIT_OK


def run_converge(args, settings: Settings) -> int:
    f, a, b, n = _operand(args)
    if not isinstance(f, AnalyticFunction):
        raise ValidationError("convergence studies need an analytic --func with a closed form")
    if args.at is not None and len(args.at) != 1:
        raise ValidationError("converge takes a single --at point")
    x = args.at[0] if args.at is not None else b
    table = convergence_table(
        f,
        args.method,
        args.alpha,
        x,
        a,
        b,
        doubling_grids(args.grid or 65, n),
        Side(args.side),
        settings.workers,
    )
    with _output(args.out) as fp:
        table.to_csv(fp, index=False, float_format="%.17g", na_rep="nan")
    return EXIT_OK


def run_falva_sim(args, settings: Settings) -> int:
    a, t = args.horizon
    q0 = np.asarray(args.q0, dtype=float)
    problem = falva.FalvaProblem(
        falva.parse_model(args.model, dim=q0.size),
        args.alpha,
        a,
        t,
        q0,
        args.v0,
        epsilon=args.eps,
        steps=args.steps,
        convention=falva.FrictionConvention(args.convention),
    )
    path = falva.simulate(problem)
    trailer = ""
    if args.action:
        action = falva.falva_action(problem, path)
        if not math.isfinite(action):
            raise NumericalFailure("action is not finite")
        trailer = f"# action={action:.17g}\n"
    _write_frame(falva.trajectory_frame(path), args.out, trailer)
    return EXIT_OK


def run_verify(args, settings: Settings) -> int:
    params = settings.verify_parameters(args.grid)
    only = args.only.split(",") if args.only else None
    results = properties.run_suites(params, only)
    for result in results:
        print(result.line())
    if args.out:
        with _output(args.out) as fp:
            properties.write_report(results, params, fp)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PROPERTY_FAILURE
    return EXIT_OK


def _add_operand_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--func", required=True, help="const:c, pow:m, poly:c0,c1,..., exp:l, sin:w or csv:<path>")
    parser.add_argument("--alpha", type=_real, required=True)
    parser.add_argument("--domain", type=_pair, default=None, help="a,b (default 0,1)")
    parser.add_argument("--n", type=int, default=None, help=f"grid points (default {DEFAULT_N})")
    parser.add_argument("--at", type=_reals, default=None, help="x[,x...] (default: every node off the terminal)")
    parser.add_argument("--side", choices=[s.value for s in Side], default=Side.LEFT.value)
    parser.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(prog="fraccalc", description="Fractional integrals, derivatives and FALVA dynamics.")
    commands = parser.add_subparsers(dest="command", required=True)

    integral = commands.add_parser("integral", help="Riemann-Liouville fractional integral")
    _add_operand_flags(integral)
    integral.add_argument("--beta", type=_real, default=None, help="evaluate I^alpha(I^beta f) instead")
    integral.set_defaults(handler=run_integral)

    deriv = commands.add_parser("deriv", help="fractional derivative")
    _add_operand_flags(deriv)
    deriv.add_argument("--method", choices=["rl", "caputo", "gl", "all"], default="rl")
    deriv.set_defaults(handler=run_deriv)

    converge = commands.add_parser("converge", help="observed order against the closed form")
    _add_operand_flags(converge)
    converge.add_argument("--method", choices=["integral", "rl", "caputo", "gl"], default="integral")
    converge.add_argument("--grid", type=int, default=None, help="smallest grid (default 65); --n is the largest")
    converge.set_defaults(handler=run_converge)

    sim = commands.add_parser("falva-sim", help="simulate a FALVA trajectory")
    sim.add_argument("--model", default="oscillator:1", help="oscillator:w, freeparticle or well:k")
    sim.add_argument("--alpha", type=_real, required=True)
    sim.add_argument("--horizon", type=_pair, default=(0.0, 1.0), help="a,t")
    sim.add_argument("--q0", type=_reals, default=[1.0])
    sim.add_argument("--v0", type=_reals, default=[0.0])
    sim.add_argument("--steps", type=int, default=1024)
    sim.add_argument("--eps", type=_real, default=None)
    sim.add_argument(
        "--convention",
        choices=[c.value for c in falva.FrictionConvention],
        default=falva.FrictionConvention.AS_WRITTEN.value,
        help="sign of the friction term; variational paths are stationary points of the action",
    )
    sim.add_argument("--action", action="store_true", help="append '# action=<value>'")
    sim.add_argument("--out", default=None)
    sim.set_defaults(handler=run_falva_sim)

    verify = commands.add_parser("verify", help="run the property suites")
    verify.add_argument("--only", default=None, help=f"comma-separated subset of: {', '.join(properties.SUITES)}")
    verify.add_argument("--grid", type=int, default=None)
    verify.add_argument("--out", default=None, help="also write a JSON report")
    verify.set_defaults(handler=run_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = load_settings()
        configure_logging(settings.log_level)
        args = build_parser().parse_args(argv)
        return args.handler(args, settings)
    except ValidationError as exc:
        logger.debug("validation failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        logger.debug("numerical failure", exc_info=True)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
