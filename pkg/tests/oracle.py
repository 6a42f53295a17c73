"""Straight-from-the-equations reference filters, for cross-checking only.

Plain Python lists, no numpy, no shared code with the package.
"""


def brute_force(algorithm, desired, reference, order, mu=0.0, forgetting=1.0, delta=100.0, eps=0.0):
    n_taps = order
    w = [0.0] * n_taps
    u = [0.0] * n_taps
    P = [[delta if i == j else 0.0 for j in range(n_taps)] for i in range(n_taps)]
    ys, es, weights = [], [], []
    for d, r in zip(desired, reference):
        u = [float(r)] + u[:-1]
        y = sum(u[i] * w[i] for i in range(n_taps))  # s(n) = u^T w
        e = float(d) - y
        if algorithm == "lms":
            w = [w[i] + mu * e * u[i] for i in range(n_taps)]
        elif algorithm == "nlms":
            norm = sum(x * x for x in u) + eps
            w = [w[i] + mu * e * u[i] / norm for i in range(n_taps)]
        elif algorithm == "rls":
            Pu = [sum(P[i][j] * u[j] for j in range(n_taps)) for i in range(n_taps)]
            den = forgetting + sum(u[i] * Pu[i] for i in range(n_taps))
            k = [Pu[i] / den for i in range(n_taps)]
            w = [w[i] + e * k[i] for i in range(n_taps)]
            uTP = [sum(u[i] * P[i][j] for i in range(n_taps)) for j in range(n_taps)]
            P = [[(P[i][j] - k[i] * uTP[j]) / forgetting for j in range(n_taps)] for i in range(n_taps)]
            P = [[(P[i][j] + P[j][i]) / 2.0 for j in range(n_taps)] for i in range(n_taps)]
        else:
            raise ValueError(algorithm)
        ys.append(y)
        es.append(e)
        weights.append(list(w))
    return ys, es, weights
