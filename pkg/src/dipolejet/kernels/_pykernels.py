"""Pure-Python dipole kernels.

Same numerical recipe as the compiled ``_ckernels`` module, written with
plain floats: for 4-component states this beats numpy's per-call overhead.
"""

import math

from ._tableau import A, B, E3, E5, N_STAGES

INV_PI = 1.0 / math.pi


def make_pack(poly, gauss):
    """Convert potential term tables into the form used by this backend.

    ``poly`` rows are ``(cx, cy, j, k, c)`` for ``c (x-cx)^j (y-cy)^k``;
    ``gauss`` rows are ``(cx, cy, amplitude, width)``.
    """
    prow = tuple((float(r[0]), float(r[1]), int(r[2]), int(r[3]), float(r[4])) for r in poly)
    grow = tuple(tuple(float(v) for v in r) for r in gauss)
    return prow, grow


def grad(x, y, pack):
    gx = 0.0
    gy = 0.0
    poly, gauss = pack
    for cx, cy, j, k, c in poly:
        u = x - cx
        v = y - cy
        if j:
            gx += c * j * u ** (j - 1) * v ** k
        if k:
            gy += c * k * u ** j * v ** (k - 1)
    for cx, cy, amp, w in gauss:
        u = x - cx
        v = y - cy
        iw2 = 1.0 / (w * w)
        e = amp * math.exp(-0.5 * (u * u + v * v) * iw2)
        gx -= e * u * iw2
        gy -= e * v * iw2
    return gx, gy


def rhs(y, pplus, pminus):
    """Velocities ``(v+x, v+y, v-x, v-y)`` of the dipole at state ``y``."""
    d1 = y[0] - y[2]
    d2 = y[1] - y[3]
    r2 = d1 * d1 + d2 * d2
    s = INV_PI / r2
    i1 = d2 * s
    i2 = -d1 * s
    gx, gy = grad(y[0], y[1], pplus)
    hx, hy = grad(y[2], y[3], pminus)
    return (i1 + gy, i2 - gx, i1 - hy, i2 + hx)


def step(y, f0, h, atol, rtol, pplus, pminus):
    """One DOP853 step; returns ``(y_new, f_new, error_norm)``."""
    K = [None] * (N_STAGES + 1)
    K[0] = f0
    for i in range(1, N_STAGES):
        a = A[i]
        yi = [
            y[n] + h * sum(a[j] * K[j][n] for j in range(i) if a[j] != 0.0)
            for n in range(4)
        ]
        K[i] = rhs(yi, pplus, pminus)
    y1 = tuple(
        y[n] + h * sum(B[j] * K[j][n] for j in range(N_STAGES) if B[j] != 0.0)
        for n in range(4)
    )
    f1 = rhs(y1, pplus, pminus)
    K[N_STAGES] = f1
    e5sq = 0.0
    e3sq = 0.0
    for n in range(4):
        sc = atol + rtol * max(abs(y[n]), abs(y1[n]))
        e5 = sum(E5[j] * K[j][n] for j in range(N_STAGES + 1) if E5[j] != 0.0) / sc
        e3 = sum(E3[j] * K[j][n] for j in range(N_STAGES + 1) if E3[j] != 0.0) / sc
        e5sq += e5 * e5
        e3sq += e3 * e3
    if e5sq == 0.0 and e3sq == 0.0:
        err = 0.0
    else:
        err = abs(h) * e5sq / math.sqrt((e5sq + 0.01 * e3sq) * 4.0)
    return y1, f1, err


def advance(y, h, pplus, pminus):
    """Single high-order step of size ``h`` without error control."""
    f0 = rhs(y, pplus, pminus)
    y1, _, _ = step(y, f0, h, 1.0, 1.0, pplus, pminus)
    return y1
