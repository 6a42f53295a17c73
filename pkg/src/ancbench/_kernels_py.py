"""Pure-Python block kernels.

Same arithmetic, in the same order, as ``_kernels.pyx``; used when the
compiled extension is unavailable or ``ANCBENCH_PURE_PYTHON`` is set.

Every kernel mutates ``w``, ``taps`` (and ``P``/``gain`` for RLS) in place,
fills ``out_y``/``out_e`` and returns ``(status, index)`` where status is
0 (ok), 1 (non-finite weight at ``index``) or 2 (RLS breakdown at ``index``).
"""
from math import isfinite

OK = 0
DIVERGED = 1
BREAKDOWN = 2


def lms_block(desired, reference, w, taps, mu, out_y, out_e):
    n_taps = len(w)
    ww = w.tolist()
    uu = taps.tolist()
    d = desired.tolist()
    r = reference.tolist()
    status, where = OK, -1
    for n in range(len(d)):
        for k in range(n_taps - 1, 0, -1):
            uu[k] = uu[k - 1]
        uu[0] = r[n]
        y = 0.0
        for k in range(n_taps):
            y += uu[k] * ww[k]
        e = d[n] - y
        out_y[n] = y
        out_e[n] = e
        g = mu * e
        bad = False
        for k in range(n_taps):
            ww[k] += g * uu[k]
            if not isfinite(ww[k]):
                bad = True
        if bad:
            status, where = DIVERGED, n
            break
    w[:] = ww
    taps[:] = uu
    return status, where


def nlms_block(desired, reference, w, taps, mu, eps, out_y, out_e):
    n_taps = len(w)
    ww = w.tolist()
    uu = taps.tolist()
    d = desired.tolist()
    r = reference.tolist()
    status, where = OK, -1
    for n in range(len(d)):
        for k in range(n_taps - 1, 0, -1):
            uu[k] = uu[k - 1]
        uu[0] = r[n]
        y = 0.0
        power = 0.0
        for k in range(n_taps):
            y += uu[k] * ww[k]
            power += uu[k] * uu[k]
        e = d[n] - y
        out_y[n] = y
        out_e[n] = e
        g = mu * e / (power + eps)
        bad = False
        for k in range(n_taps):
            ww[k] += g * uu[k]
            if not isfinite(ww[k]):
                bad = True
        if bad:
            status, where = DIVERGED, n
            break
    w[:] = ww
    taps[:] = uu
    return status, where


def rls_block(desired, reference, w, taps, P, gain, forgetting, out_y, out_e):
    n_taps = len(w)
    ww = w.tolist()
    uu = taps.tolist()
    pp = P.tolist()
    kk = gain.tolist()
    pu = [0.0] * n_taps
    d = desired.tolist()
    r = reference.tolist()
    m = forgetting
    status, where = OK, -1
    for n in range(len(d)):
        for k in range(n_taps - 1, 0, -1):
            uu[k] = uu[k - 1]
        uu[0] = r[n]
        y = 0.0
        for k in range(n_taps):
            y += uu[k] * ww[k]
        e = d[n] - y
        out_y[n] = y
        out_e[n] = e

        den = m
        for i in range(n_taps):
            row = pp[i]
            s = 0.0
            for j in range(n_taps):
                s += row[j] * uu[j]
            pu[i] = s
            den += uu[i] * s
        if not (den > 0.0 and isfinite(den)):
            status, where = BREAKDOWN, n
            break
        for i in range(n_taps):
            kk[i] = pu[i] / den

        bad = False
        for i in range(n_taps):
            ww[i] += e * kk[i]
            if not isfinite(ww[i]):
                bad = True
        if bad:
            status, where = DIVERGED, n
            break

        for i in range(n_taps):
            row_i = pp[i]
            for j in range(i, n_taps):
                a = (row_i[j] - kk[i] * pu[j]) / m
                b = (pp[j][i] - kk[j] * pu[i]) / m
                v = (a + b) * 0.5
                if not isfinite(v):
                    bad = True
                row_i[j] = v
                pp[j][i] = v
        if bad:
            status, where = BREAKDOWN, n
            break
    w[:] = ww
    taps[:] = uu
    P[:, :] = pp
    gain[:] = kk
    return status, where
