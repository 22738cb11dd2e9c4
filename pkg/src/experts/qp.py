# -*- coding: utf-8 -*-

"""
lifetrack - Continual learning of an adaptive path-tracking policy.
Copyright (C) 2024  lifetrack developers
Licensed under the GNU General Public License v3 or later, see README.md.

--------------------------------------------------------------------------------------------

Box-constrained convex QP: min 1/2 x'Hx + f'x  s.t.  lower <= x <= upper.

Solved by projected Newton with an active set: variables sitting on a bound with the gradient pushing
outward are fixed, a Newton step is taken on the free ones and the step is projected back onto the box with
an Armijo backtracking search. A projected gradient step with step size 1/||H|| serves as fallback.

Last modification: 18.10.2026
"""

__version__ = "1"
__author__ = "lifetrack developers"

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, lstsq, solve

from config.global_constants import QP_DEFAULT_MAX_ITER, QP_DEFAULT_TOLERANCE
from src.tools.custom_errors import QpFailureError

logger = logging.getLogger(__name__)

ARMIJO_SIGMA = 1e-4
MIN_STEP = 1e-10
SYMMETRY_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class QpProblem:

    H: np.ndarray
    f: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):

        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        f = np.atleast_1d(np.asarray(self.f, dtype=float))
        n = f.size

        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()

        if H.shape != (n, n):
            raise QpFailureError(f"H must be {n}x{n}, got {H.shape}")

        scale = max(1.0, float(np.max(np.abs(H))))

        if np.max(np.abs(H - H.T)) > SYMMETRY_TOLERANCE * scale:
            raise QpFailureError("H is not symmetric")

        if np.any(lower > upper):
            raise QpFailureError("Lower bounds exceed upper bounds")

        # Symmetrize the roundoff away
        H = 0.5 * (H + H.T)

        if np.min(np.linalg.eigvalsh(H)) < -SYMMETRY_TOLERANCE * scale:
            raise QpFailureError("H is not positive semidefinite")

        object.__setattr__(self, "H", H)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return int(self.f.size)

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.H @ x + self.f @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.H @ x + self.f

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def kkt_residual(self, x: np.ndarray) -> float:
        """Norm of the projected gradient step, zero exactly at the KKT points."""
        return float(np.max(np.abs(x - self.project(x - self.gradient(x))), initial=0.0))


def _newton_direction(problem: QpProblem, x: np.ndarray, gradient: np.ndarray) -> np.ndarray:

    at_lower = (x <= problem.lower) & (gradient > 0.0)
    at_upper = (x >= problem.upper) & (gradient < 0.0)
    free = ~(at_lower | at_upper)

    direction = np.zeros_like(x)

    if not np.any(free):
        return direction

    H_free = problem.H[np.ix_(free, free)]

    try:
        direction[free] = solve(H_free, -gradient[free], assume_a="pos")
    except LinAlgError:
        direction[free] = lstsq(H_free, -gradient[free])[0]

    return direction


def _armijo_step(problem: QpProblem, x: np.ndarray, gradient: np.ndarray, direction: np.ndarray):

    objective = problem.objective(x)
    alpha = 1.0

    while alpha > MIN_STEP:
        candidate = problem.project(x + alpha * direction)
        if problem.objective(candidate) <= objective + ARMIJO_SIGMA * float(gradient @ (candidate - x)):
            if np.any(candidate != x):
                return candidate
            return None
        alpha *= 0.5

    return None


def solve_box_qp(problem: QpProblem, tol: float = QP_DEFAULT_TOLERANCE,
                 max_iter: int = QP_DEFAULT_MAX_ITER) -> np.ndarray:
    """
    Solve the box-constrained QP.

    :param problem: The QpProblem.
    :param tol: Bound on the KKT residual ||x - P(x - (Hx + f))||_inf of the returned point.
    :param max_iter: Iteration limit.
    :return: Minimizer within the bounds.

    :raises QpFailureError: If the residual is still above tol after max_iter iterations.
    """

    x = problem.project(np.zeros(problem.n))
    lipschitz = max(float(np.linalg.norm(problem.H, 2)), 1e-12)

    for iteration in range(max_iter):

        gradient = problem.gradient(x)
        residual = float(np.max(np.abs(x - problem.project(x - gradient)), initial=0.0))

        if residual <= tol:
            logger.debug(f"Box QP converged after {iteration} iterations (residual {residual:.3e})")
            return x

        direction = _newton_direction(problem, x, gradient)
        candidate = _armijo_step(problem, x, gradient, direction)

        if candidate is None:
            # Objective differences drown in roundoff close to the optimum
            full_step = problem.project(x + direction)
            if problem.kkt_residual(full_step) < 0.5 * residual:
                candidate = full_step

        if candidate is None:
            candidate = problem.project(x - gradient / lipschitz)

        x = candidate

    residual = problem.kkt_residual(x)

    if residual <= tol:
        return x

    raise QpFailureError(f"Box QP did not converge in {max_iter} iterations", kkt_residual=residual)
