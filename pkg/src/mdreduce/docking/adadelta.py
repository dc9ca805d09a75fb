"""ADADELTA update on a genotype vector."""

from __future__ import annotations

import numpy as np

from ..errors import NumericDomainError
from .model import AdadeltaState, Genotype, angular_mask, wrap_angle


def adadelta_update(state: AdadeltaState, vec: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """In-place state update; returns the new genotype vector (angles wrapped)."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != vec.shape:
        raise ValueError(f"gradient has {grad.size} entries for a {vec.size}-dimensional genotype")
    if not np.all(np.isfinite(grad)):
        raise NumericDomainError("non-finite gradient component")
    rho, eps = state.rho, state.epsilon
    state.avg_sq_grad = rho * state.avg_sq_grad + (1.0 - rho) * grad * grad
    delta = -np.sqrt(state.avg_sq_update + eps) / np.sqrt(state.avg_sq_grad + eps) * grad
    state.avg_sq_update = rho * state.avg_sq_update + (1.0 - rho) * delta * delta
    out = vec + delta
    ang = angular_mask(len(out))
    out[ang] = wrap_angle(out[ang])
    return out


def adadelta_step(state: AdadeltaState, g: Genotype, grad) -> tuple[AdadeltaState, Genotype]:
    """One ADADELTA step. Returns a new state and the moved genotype."""
    new_state = AdadeltaState(state.avg_sq_grad.copy(), state.avg_sq_update.copy(), state.rho, state.epsilon)
    vec = adadelta_update(new_state, g.as_array(), grad)
    return new_state, Genotype.from_array(vec)
