"""Pure-NumPy quadric kernels.

Reference implementation of the hot numerical core: evaluating stacks of real
symmetric quadratic forms, their Jacobians, and a damped Gauss-Newton solve of

    v^T Q_c v = 0   (c = 1..C)
    L v       = 0   (optional linear rows)
    v^T v - 1 = 0

The compiled backend in ``_quadric_cy`` mirrors this control flow exactly;
both are selected interchangeably in ``nashstates._kernels``.
"""

import numpy as np

BACKEND_NAME = "python"

# Gauss-Newton status codes (shared with the compiled backend)
GN_CONVERGED = 0
GN_NO_CONVERGENCE = 1
GN_RANK_COLLAPSE = 2

_ALPHA_MIN = 1e-12


def quadric_values(forms, v):
    """Values v^T Q_c v for a stack of symmetric forms, shape (C,)."""
    return np.einsum("i,cij,j->c", v, forms, v)


def quadric_gradients(forms, v):
    """Gradients 2 Q_c v, shape (C, n)."""
    return 2.0 * np.einsum("cij,j->ci", forms, v)


def residual_vector(forms, linear, v):
    """Stacked residual [quadrics; linear rows; norm constraint]."""
    parts = [quadric_values(forms, v)]
    if linear is not None and len(linear):
        parts.append(linear @ v)
    parts.append(np.array([v @ v - 1.0]))
    return np.concatenate(parts)


def gauss_newton(forms, linear, v0, tol, max_iter, damping=0.5, rcond=1e-10):
    """Damped Gauss-Newton with a min-norm least-squares step.

    Returns ``(v, residual_inf, status, iterations)``.  The residual check
    runs before each step, so a start already satisfying the system returns
    after zero iterations.  The step is halved (``damping``) whenever the
    squared residual norm would increase; if no step length down to
    ``_ALPHA_MIN`` decreases it, the solve reports non-convergence.
    """
    v = np.array(v0, dtype=float, copy=True)
    rinf = np.inf
    for it in range(max_iter + 1):
        r = residual_vector(forms, linear, v)
        rinf = float(np.max(np.abs(r)))
        if rinf < tol:
            return v, rinf, GN_CONVERGED, it
        if it == max_iter:
            break
        rows = [quadric_gradients(forms, v)]
        if linear is not None and len(linear):
            rows.append(np.asarray(linear, dtype=float))
        rows.append(2.0 * v[None, :])
        jac = np.concatenate(rows, axis=0)
        step, _, rank, _ = np.linalg.lstsq(jac, -r, rcond=rcond)
        if rank == 0:
            return v, rinf, GN_RANK_COLLAPSE, it
        f0 = float(r @ r)
        alpha = 1.0
        while True:
            trial = v + alpha * step
            rt = residual_vector(forms, linear, trial)
            ft = float(rt @ rt)
            if ft < f0 or alpha < _ALPHA_MIN:
                break
            alpha *= damping
        if ft >= f0:
            return v, rinf, GN_NO_CONVERGENCE, it
        v = trial
    return v, rinf, GN_NO_CONVERGENCE, max_iter
