"""Empirical order of accuracy against the closed-form oracles."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from fraccalc import closedforms
from fraccalc.errors import NoClosedFormError, NumericalFailure, ValidationError
from fraccalc.fracops import OperatorKind, OperatorRequest, Side, apply_operator
from fraccalc.funcspace import AnalyticFunction

logger = logging.getLogger(__name__)

DEFAULT_N_POINTS = (65, 129, 257, 513, 1025)

# Errors this close to the oracle are rounding noise and carry no order information.
ROUNDING_FLOOR = 1e-12


def doubling_grids(start: int, stop: int) -> list:
    """start, 2 start - 1, ... up to stop; consecutive grids share every other node."""
    if start < 3 or stop < start:
        raise ValidationError(f"grid sizes need 3 <= start <= stop, got {start} and {stop}")
    sizes = [start]
    while 2 * sizes[-1] - 1 <= stop:
        sizes.append(2 * sizes[-1] - 1)
    return sizes


def observed_orders(errors: Sequence[float], exact: float = 0.0) -> np.ndarray:
    """log2(err[k-1] / err[k]); nan for the first row and wherever an error sits at rounding level."""
    errors = np.asarray(errors, dtype=float)
    floor = ROUNDING_FLOOR * max(1.0, abs(exact))
    orders = np.full(errors.size, np.nan)
    for k in range(1, errors.size):
        if errors[k - 1] > floor and errors[k] > floor:
            orders[k] = math.log2(errors[k - 1] / errors[k])
    return orders


def convergence_table(
    f: AnalyticFunction,
    method: str,
    alpha: float,
    x: float,
    a: float = 0.0,
    b: float = 1.0,
    n_points: Sequence[int] = DEFAULT_N_POINTS,
    side: Side = Side.LEFT,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Rows n_points, h, abs_error, observed_order for one operator at one point."""
    kind = OperatorKind.from_method(method)
    if side is not Side.LEFT:
        raise NoClosedFormError("closed forms exist for left-sided operators only")
    oracle = "rl" if kind is OperatorKind.GRUNWALD_LETNIKOV else method
    exact = closedforms.exact_value(f, oracle, alpha, x, terminal=a)
    req = OperatorRequest.on_grid(kind, side, alpha, a, b)

    def error_at(n: int) -> float:
        return abs(apply_operator(req, f, x, grid=(a, b, n)) - exact)

    logger.info(f"Convergence study of {method} for {f} at x={x:g} over grids {list(n_points)}")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        errors = list(executor.map(error_at, n_points))
    if not all(math.isfinite(e) for e in errors):
        raise NumericalFailure("convergence study produced a non-finite error")

    return pd.DataFrame(
        {
            "n_points": list(n_points),
            "h": [(b - a) / (n - 1) for n in n_points],
            "abs_error": errors,
            "observed_order": observed_orders(errors, exact),
        }
    )
