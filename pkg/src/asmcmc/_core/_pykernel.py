"""Pure-Python chain kernel.

Mirrors ``_ckernel.pyx`` operation for operation so that both backends give
bit-identical traces for the builtin targets.  Keep the two files in sync:
same parameter layouts, same evaluation order, no fused multiply-adds.
"""

from math import exp, inf, log, log1p, sqrt

import numpy as np

GAUSSIAN = 0
EXPONENTIAL_POWER = 1
UNIFORM_BALL = 2
UNIFORM_BOX = 3
SMOOTH_BUMP = 4

PHI_EXP = 0
PHI_SOFTPLUS_POWER = 1


def logpdf(code, p, x, d):
    """Log-density of a builtin target at ``x`` (a list of floats).

    ``p`` is the flat parameter list produced by the target's
    ``kernel_params``; element 0 is always the additive log-normaliser.
    """
    if code == GAUSSIAN:
        # p = [const, mean(d), L row-major (d*d)], L lower-triangular
        q = 0.0
        w = [0.0] * d
        for i in range(d):
            acc = x[i] - p[1 + i]
            for j in range(i):
                acc = acc - p[1 + d + i * d + j] * w[j]
            w[i] = acc / p[1 + d + i * d + i]
            q = q + w[i] * w[i]
        return p[0] - 0.5 * q
    if code == EXPONENTIAL_POWER:
        # p = [const, power, scale]
        r2 = 0.0
        for i in range(d):
            r2 = r2 + x[i] * x[i]
        r = sqrt(r2)
        return p[0] - (r / p[2]) ** p[1]
    if code == UNIFORM_BALL:
        # p = [const, radius**2, center(d)]
        r2 = 0.0
        for i in range(d):
            t = x[i] - p[2 + i]
            r2 = r2 + t * t
        return p[0] if r2 <= p[1] else -inf
    if code == UNIFORM_BOX:
        # p = [const, lo(d), hi(d)]
        for i in range(d):
            if not (p[1 + i] <= x[i] <= p[1 + d + i]):
                return -inf
        return p[0]
    if code == SMOOTH_BUMP:
        # p = [const, radius**2, floor, center(d)]
        r2 = 0.0
        for i in range(d):
            t = x[i] - p[3 + i]
            r2 = r2 + t * t
        t = r2 / p[1]
        if t > 1.0:
            return -inf
        u = 1.0 - t
        return p[0] + log(p[2] + (1.0 - p[2]) * (u * u))
    raise ValueError(f"unknown target code {code}")


def phi(code, param, s):
    if code == PHI_EXP:
        return exp(s)
    if s > 0.0:
        sp = s + log1p(exp(-s))
    else:
        sp = log1p(exp(s))
    return sp ** param


def run_chain(code, params, x, s, W, U, eta, alpha_star, adapt, binary,
              lo, hi, phi_code, phi_param, X_out, S_out, A_out, ACC_out,
              log_density=None):
    """Advance one chain over ``len(U)`` steps.

    ``W`` holds unit-scale increments (already multiplied by the shape
    matrix), ``U`` the acceptance uniforms and ``eta`` the gain used for
    the scale update of each step.  ``lo``/``hi`` are the restriction
    bounds applied to the updated parameter, or ``None``.  ``x`` is
    updated in place; the final adaptation parameter is returned.
    """
    n, d = W.shape
    if log_density is None:
        p = [float(v) for v in params]

        def f(pt):
            return logpdf(code, p, pt, d)
    else:
        def f(pt):
            return float(log_density(np.asarray(pt, dtype=float)))

    xs = [float(v) for v in x]
    lp = f(xs)
    Wl = W.tolist()
    Ul = U.tolist()
    El = eta.tolist()
    restricted = lo is not None
    if restricted:
        lol = lo.tolist()
        hil = hi.tolist()
    theta = phi(phi_code, phi_param, s)

    xrec = [None] * n
    srec = [0.0] * n
    arec = [0.0] * n
    crec = [0] * n
    for k in range(n):
        w = Wl[k]
        y = [xs[i] + theta * w[i] for i in range(d)]
        ly = f(y)
        v = ly - lp
        a = exp(v if v < 0.0 else 0.0)
        accepted = Ul[k] <= a
        if accepted:
            xs = y
            lp = ly
        if adapt:
            if binary:
                h = (1.0 if accepted else 0.0) - alpha_star
            else:
                h = a - alpha_star
            s_new = s + El[k] * h
            if restricted:
                if lol[k] <= s_new <= hil[k]:
                    s = s_new
            else:
                s = s_new
            theta = phi(phi_code, phi_param, s)
        xrec[k] = xs
        srec[k] = s
        arec[k] = a
        crec[k] = 1 if accepted else 0

    if n:
        X_out[:] = xrec
        S_out[:] = srec
        A_out[:] = arec
        ACC_out[:] = crec
    x[:] = xs
    return s
