"""
Closed-form convergence bounds.

With S the sum of squared gradient norms over the local steps of a round:

    drift:       L_{t+1} <= L_t - (eta - L eta²/2) S + (L E eta²/2) sigma²
                            + 2 eta (Gamma + rho²) + L eta² (2 rho² + sigma² + Gamma)
    monotone:    eta < [2S - 4(Gamma + rho²)] / [L (S + E rho² + 2(2 rho² + sigma² + Gamma))]
    rounds:      T = 2 kappa / (E eta ((2 - L eta) eps - 3 L eta sigma²
                                       - 2 (2 + L eta) Gamma - 4 (1 + L eta) rho²))
"""

from src.convergence_lab.models import ConvergenceConstants, EtaBound
from src.shared.exceptions import ConvergenceError, UnreachableEpsilonError


def drift_bound(c: ConvergenceConstants, loss_t: float, grad_norm_sq_sum: float) -> float:
    """Upper bound on a client's loss after one more round."""
    eta, L, s = c.eta, c.L, grad_norm_sq_sum
    return (
        loss_t
        - (eta - L * eta * eta / 2.0) * s
        + (L * c.E * eta * eta / 2.0) * c.sigma2
        + 2.0 * eta * (c.gamma + c.rho2)
        + L * eta * eta * (2.0 * c.rho2 + c.sigma2 + c.gamma)
    )


def _step_size_ratio(c: ConvergenceConstants, level: float) -> EtaBound:
    if c.L == 0.0:
        raise ConvergenceError("step-size bound is undefined for L == 0")
    numerator = 2.0 * level - 4.0 * (c.gamma + c.rho2)
    denominator = c.L * (level + c.E * c.rho2 + 2.0 * (2.0 * c.rho2 + c.sigma2 + c.gamma))
    if denominator <= 0.0:
        raise ConvergenceError(f"step-size bound has non-positive denominator {denominator}")
    value = numerator / denominator
    return EtaBound(value=value, admissible=value > 0.0)


def eta_bound_monotone(c: ConvergenceConstants, grad_norm_sq_sum: float) -> EtaBound:
    """
    Learning-rate bound under which the per-round loss keeps decreasing.

    Reduces to 2/L when sigma², rho and Gamma are all zero. A non-positive
    value is returned as-is with ``admissible=False``.

    Raises:
        ConvergenceError: If L == 0 or the denominator is not positive.
    """
    return _step_size_ratio(c, grad_norm_sq_sum)


def eta_bound_for_epsilon(c: ConvergenceConstants) -> EtaBound:
    """The step-size condition paired with ``rounds_to_epsilon`` (S replaced by epsilon)."""
    return _step_size_ratio(c, c.epsilon)


def rounds_to_epsilon(c: ConvergenceConstants) -> float:
    """
    Rounds needed for the average squared gradient norm to fall below epsilon.

    Raises:
        UnreachableEpsilonError: If the denominator is not positive.
    """
    L, eta = c.L, c.eta
    inner_term = (
        (2.0 - L * eta) * c.epsilon
        - 3.0 * L * eta * c.sigma2
        - 2.0 * (2.0 + L * eta) * c.gamma
        - 4.0 * (1.0 + L * eta) * c.rho2
    )
    denominator = c.E * eta * inner_term
    if denominator <= 0.0:
        raise UnreachableEpsilonError("ε not reachable with these constants")
    return 2.0 * c.kappa / denominator
