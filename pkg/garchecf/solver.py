"""
Constrained multistart minimization over the GARCH parameter domain.

Both estimators minimize a smooth cost of theta = (alpha0, alpha, beta)
subject to theta >= 1e-8 and sum(alpha) + sum(beta) <= 1 - 1e-6. Each start
runs SLSQP in variables scaled by the start, keeps its result only when it
lowers the cost, and then polishes with capped projected Newton steps on the
caller's curvature matrix until the gradient norm drops below the tolerance.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from . import rng
from .errors import GarchEcfError, NoConvergence

# pylint: disable=invalid-name, too-many-arguments, too-many-locals

logger = logging.getLogger(__name__)

LOWER_BOUND = 1e-8
PERSISTENCE_LIMIT = 1.0 - 1e-6
JITTER = 0.2
PENALTY = 1e20
TYPICAL_LAG = 1e-3
MAX_STEP = 0.5

# failures of a single cost evaluation, treated as an infeasible point
EVAL_ERRORS = (GarchEcfError, ValueError, FloatingPointError)


def initial_point(y, r, s):
    # type: (np.array, int, int) -> np.array
    """
    Moment-matched start: gamma = sample variance, alpha_1 = 0.1,
    beta_1 = 0.8, remaining lags 0.01, alpha0 = gamma (1 - persistence).
    """
    gamma = float(np.var(y))
    if not gamma > 0:
        logger.warning('series has zero sample variance, starting from gamma = 1')
        gamma = 1.0
    alpha = np.full(r, 0.01)
    alpha[0] = 0.1
    beta = np.full(s, 0.01)
    if s:
        beta[0] = 0.8
    return np.concatenate(([gamma * (1.0 - alpha.sum() - beta.sum())], alpha, beta))


def project(theta):
    """
    Nearest-by-scaling point of the feasible domain.
    """
    theta = np.maximum(np.asarray(theta, dtype=float), LOWER_BOUND)
    total = theta[1:].sum()
    if total > PERSISTENCE_LIMIT:
        theta[1:] *= PERSISTENCE_LIMIT / total
    return theta


def on_boundary(theta):
    theta = np.asarray(theta)
    return bool(np.any(theta <= LOWER_BOUND * (1 + 1e-6)) or
                theta[1:].sum() >= PERSISTENCE_LIMIT - 1e-9)


def jittered_starts(theta0, n_starts, seed):
    """
    theta0 itself followed by n_starts - 1 multiplicative log-normal jitters,
    start k drawn from stream (seed, k).
    """
    theta0 = project(theta0)
    starts = [theta0]
    for k in range(1, n_starts):
        gen = rng.stream(seed, k)
        starts.append(project(theta0 * np.exp(JITTER * gen.standard_normal(len(theta0)))))
    return starts


@dataclass
class Outcome:
    """
    Result of one start.
    """
    start: np.ndarray
    theta: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    boundary: bool
    message: str

    def to_dict(self):
        return {
            'start': self.start.tolist(),
            'theta': self.theta.tolist(),
            'value': self.value,
            'grad_norm': self.grad_norm,
            'iterations': self.iterations,
            'converged': self.converged,
            'boundary': self.boundary,
            'message': self.message,
        }


def _typical(theta0):
    """
    Variable scales: the start itself, with lag coefficients floored at 1e-3.
    """
    typ = np.array(theta0, dtype=float)
    typ[1:] = np.maximum(typ[1:], TYPICAL_LAG)
    return typ


def _slsqp(evaluate, theta0, max_iter):
    """
    SLSQP in the variables x = theta / typical, on a cost normalized so its
    gradient at the start has unit sup norm in x.
    :return: (theta, iterations, message); theta0 when SLSQP ends above the
        starting cost
    """
    p = len(theta0)
    typ = _typical(theta0)
    value0, grad0, _ = evaluate(theta0, False)
    norm = float(np.max(np.abs(grad0 * typ)))
    fscale = 1.0 / norm if norm > 0 else 1.0

    def fun(x):
        try:
            value, grad, _ = evaluate(x * typ, False)
        except EVAL_ERRORS:
            return PENALTY, np.zeros(p)
        return fscale * value, fscale * grad * typ

    constraints = [
        {'type': 'ineq',
         'fun': lambda x: PERSISTENCE_LIMIT - np.dot(x[1:], typ[1:]),
         'jac': lambda x: np.concatenate(([0.0], -typ[1:])),
         }
    ]
    res = scipy.optimize.minimize(
        fun=fun,
        x0=theta0 / typ,
        jac=True,
        method='SLSQP',
        bounds=[[LOWER_BOUND / t, None] for t in typ],
        constraints=constraints,
        options={'maxiter': max_iter, 'ftol': 1e-12})
    if not res['success']:
        logger.debug('SLSQP: %s', res['message'])
    theta = project(res['x'] * typ)
    try:
        value = evaluate(theta, False)[0]
    except EVAL_ERRORS:
        value = np.inf
    if not value <= value0:
        logger.debug('SLSQP ended at cost %.6g above the start %.6g, keeping the start',
                     value, value0)
        return theta0, int(res['nit']), 'SLSQP rejected: ' + str(res['message'])
    return theta, int(res['nit']), str(res['message'])


def _cap(step, theta, typ):
    """
    Shrink step so no component moves by more than MAX_STEP of its scale.
    """
    ratio = float(np.max(np.abs(step) / (MAX_STEP * np.maximum(np.abs(theta), typ))))
    return step / ratio if ratio > 1.0 else step


def _polish(evaluate, theta, gtol, max_iter, typ):
    """
    Projected Newton iterations with capped steps and backtracking on the cost.
    :return: (theta, value, grad_norm, iterations, converged)
    """
    value, grad, curv = evaluate(theta, True)
    for it in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm < gtol:
            return theta, value, gnorm, it, True
        try:
            step = -scipy.linalg.solve(curv, grad, assume_a='sym')
        except (np.linalg.LinAlgError, ValueError):
            step = -grad
        if float(grad.dot(step)) >= 0:
            step = -grad
        step = _cap(step, theta, typ)
        slope = float(grad.dot(step))
        t = 1.0
        accepted = False
        while t > 1e-12:
            cand = project(theta + t * step)
            if np.allclose(cand, theta, rtol=1e-15, atol=0):
                break
            try:
                c_value, c_grad, c_curv = evaluate(cand, True)
            except EVAL_ERRORS:
                t *= 0.5
                continue
            if c_value <= value + 1e-4 * t * slope:
                theta, value, grad, curv = cand, c_value, c_grad, c_curv
                accepted = True
                break
            t *= 0.5
        if not accepted:
            gnorm = float(np.linalg.norm(grad))
            return theta, value, gnorm, it, gnorm < gtol
    gnorm = float(np.linalg.norm(grad))
    return theta, value, gnorm, max_iter, gnorm < gtol


def solve_from(evaluate, theta0, gtol=1e-8, max_iter=200):
    # type: (callable, np.array, float, int) -> Outcome
    """
    Minimize from a single start. The returned cost never exceeds the cost
    at the start.
    :param evaluate: f(theta, curvature) -> (value, gradient, curvature or None)
    :param theta0: feasible start
    :param gtol: gradient norm tolerance
    :param max_iter: iteration limit of each phase
    :return: Outcome
    """
    start = project(theta0)
    theta, nit, message = _slsqp(evaluate, start, max_iter)
    theta, value, gnorm, polish_it, converged = _polish(
        evaluate, theta, gtol, max_iter, _typical(start))
    return Outcome(start=start, theta=theta, value=float(value), grad_norm=gnorm,
                   iterations=nit + polish_it, converged=converged,
                   boundary=on_boundary(theta), message=message)


def distinct_solutions(outcomes, rtol=1e-3, atol=1e-5):
    """
    True when converged starts ended at different points.
    """
    done = [o.theta for o in outcomes if o.converged]
    return any(not np.allclose(a, done[0], rtol=rtol, atol=atol) for a in done[1:])


def preference(outcome):
    """
    Sort key: converged interior outcomes first, then the lowest cost.
    """
    return (not outcome.converged, outcome.boundary, outcome.value)


def multistart(evaluate, theta0, n_starts=5, seed=0, gtol=1e-8, max_iter=200,
               extra_starts=(), label=''):
    """
    Run solve_from on theta0, the extra starts and the jitters of theta0, and
    keep the preferred outcome.
    :return: (best Outcome, all Outcomes, distinct flag)
    """
    starts = jittered_starts(theta0, n_starts, seed)
    starts[1:1] = [project(t) for t in extra_starts]
    outcomes = []
    for k, start in enumerate(starts):
        try:
            outcome = solve_from(evaluate, start, gtol, max_iter)
        except EVAL_ERRORS as ex:
            logger.warning('%s start %d failed: %s', label, k, ex)
            continue
        logger.debug('%s start %d: value %.6g, |grad| %.3g, converged %s',
                     label, k, outcome.value, outcome.grad_norm, outcome.converged)
        outcomes.append(outcome)
    if not outcomes:
        raise NoConvergence('{:s}: every start failed'.format(label or 'solver'))
    best = min(outcomes, key=preference)
    distinct = distinct_solutions(outcomes)
    if distinct:
        logger.warning('%s: starts converged to distinct solutions', label)
    return best, outcomes, distinct

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
