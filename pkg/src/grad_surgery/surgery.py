"""
Cross-layer gradient surgery.

Mixes a stage's anchor-layer gradient g0 into a deeper layer's gradient gk:
plain cross-layer sums, pairwise normalization, and the closed-form
projection of gk onto the halfspace {x : <x, g0> >= 0}, composed into the
server-side update rule

    g_k^{t+1} = (gk' - theta * g0') * (||gk|| + ||g0||) / 2

where g' denotes the unit gradient and theta = <gk', g0'> / <g0', g0'>.
"""

import numpy as np

from src.grad_surgery.models import (
    Branch,
    GradientView,
    ProjectionOutcome,
    SurgeryConfig,
    SurgeryResult,
)
from src.shared.exceptions import ZeroAnchorError
from src.tensor_core import Tensor, ensure_same_shape, inner, norm


def cross_layer_sum(g0: GradientView, gk: GradientView) -> Tensor:
    """Raw cross-layer gradient gk + g0 (no normalization, no projection)."""
    ensure_same_shape(g0.tensor, gk.tensor, f"cross-layer pair {g0.layer}/{gk.layer}")
    return gk.tensor + g0.tensor


def normalize_pair(
    g0: Tensor, gk: Tensor, eps: float = 1e-12,
) -> tuple[Tensor, Tensor, float]:
    """
    Unit-normalize both gradients and compute the shared rescale factor.

    Args:
        g0: Anchor gradient.
        gk: Deep-layer gradient.
        eps: Lower bound on the divisor; an all-zero input stays all-zero.

    Returns:
        (g0_unit, gk_unit, scale) with scale = (||g0|| + ||gk||) / 2.
    """
    ensure_same_shape(g0, gk, "normalization pair")
    n0 = norm(g0)
    nk = norm(gk)
    g0_unit = g0 / max(n0, eps)
    gk_unit = gk / max(nk, eps)
    return g0_unit, gk_unit, (n0 + nk) / 2.0


def project_halfspace(g0: Tensor, gk: Tensor) -> ProjectionOutcome:
    """
    Closest point to gk inside the halfspace <x, g0> >= 0.

    Solves min ||gk - x||² s.t. <x, g0> >= 0 in closed form. With
    alpha = <g0, g0> and beta = <gk, g0>: beta >= 0 keeps gk, beta < 0
    returns gk - (beta/alpha) g0, which lies on the boundary. The flat inner
    product equals the trace form, so matrices and their flattenings give
    identical results.

    Raises:
        ShapeMismatchError: If the shapes differ.
        ZeroAnchorError: If g0 is all-zero (alpha == 0).
    """
    ensure_same_shape(g0, gk, "projection pair")
    alpha = inner(g0, g0)
    if alpha == 0.0:
        raise ZeroAnchorError("zero anchor gradient")
    beta = inner(gk, g0)
    theta = beta / alpha
    if beta >= 0.0:
        return ProjectionOutcome(
            g_opt=np.array(gk, dtype=np.float64),
            theta=theta, alpha=alpha, beta=beta, branch=Branch.IDENTITY,
        )
    return ProjectionOutcome(
        g_opt=gk - theta * g0,
        theta=theta, alpha=alpha, beta=beta, branch=Branch.CORRECTED,
    )


def _apply_projection(
    g0: Tensor, gk: Tensor, always_subtract: bool,
) -> tuple[Tensor, Branch, ProjectionOutcome]:
    outcome = project_halfspace(g0, gk)
    if always_subtract:
        applied = Branch.CORRECTED if outcome.theta != 0.0 else Branch.IDENTITY
        return gk - outcome.theta * g0, applied, outcome
    return outcome.g_opt, outcome.branch, outcome


def mix_cross_layer(
    g0: GradientView, gk: GradientView, cfg: SurgeryConfig,
) -> SurgeryResult:
    """
    Compute the surgered update for a deep layer and the coefficients behind it.

    Variants by (normalize, optimize):
      (True, True)   unit gradients, projection coefficients on the units,
                     result rescaled by (||g0|| + ||gk||) / 2.
      (True, False)  (g0' + gk') * scale.
      (False, True)  projection on the raw gradients.
      (False, False) gk + g0.
    ``always_subtract`` applies gk - theta*g0 regardless of the sign of beta;
    otherwise the exact projection branch is used. The reported branch is
    the one applied, so with ``always_subtract`` any nonzero theta reports
    CORRECTED.

    Raises:
        ZeroAnchorError: If optimize is set and the anchor is all-zero.
    """
    ensure_same_shape(g0.tensor, gk.tensor, f"cross-layer pair {g0.layer}/{gk.layer}")

    if cfg.normalize:
        a, b, scale = normalize_pair(g0.tensor, gk.tensor, cfg.epsilon_norm)
    else:
        a, b, scale = g0.tensor, gk.tensor, 1.0

    if cfg.optimize:
        direction, applied, outcome = _apply_projection(a, b, cfg.always_subtract)
        update = direction * scale if cfg.normalize else direction
        return SurgeryResult(
            update=update,
            alpha=outcome.alpha,
            beta=outcome.beta,
            theta=outcome.theta,
            branch=applied,
        )

    # Coefficients are still reported so beta statistics exist for every variant.
    alpha = inner(a, a)
    beta = inner(b, a) if alpha > 0.0 else None
    theta = beta / alpha if beta is not None else None
    if cfg.normalize:
        update = (a + b) * scale
    else:
        update = cross_layer_sum(g0, gk)
    return SurgeryResult(
        update=update,
        alpha=alpha if alpha > 0.0 else None,
        beta=beta,
        theta=theta,
        branch=None,
    )


def inco_update(g0: GradientView, gk: GradientView, cfg: SurgeryConfig) -> Tensor:
    """The surgered update tensor for ``gk`` (see ``mix_cross_layer``)."""
    return mix_cross_layer(g0, gk, cfg).update
