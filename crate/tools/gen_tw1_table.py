"""Generate the embedded Tracy-Widom (beta = 1) CDF table.

Primary route: Fredholm determinant F1(s) = det(I - B_s) on L^2(0, inf) with
B_s(x, y) = Ai(x + y + s), discretised by Gauss-Legendre quadrature.

Check route: Hastings-McLeod solution of Painleve II integrated backwards from
an Airy initial condition at high precision, giving
F1(s) = exp(-1/2 int_s^inf q) * sqrt(F2(s)).

Usage: python3 tools/gen_tw1_table.py > crates/core/assets/tw1.csv
"""
import sys

import mpmath as mp
import numpy as np
from scipy.special import airy

S_MIN, S_MAX, STEP = -10.0, 8.0, 0.05
NODES = 160


def f1_fredholm(s):
    upper = max(0.0, -s) + 18.0
    x, w = np.polynomial.legendre.leggauss(NODES)
    x = 0.5 * upper * (x + 1.0)
    w = 0.5 * upper * w
    sw = np.sqrt(w)
    k = airy(x[:, None] + x[None, :] + s)[0]
    m = np.eye(NODES) - sw[:, None] * k * sw[None, :]
    sign, logdet = np.linalg.slogdet(m)
    return float(sign * np.exp(logdet))


def f1_painleve(points, s0=8.0, dps=40):
    """Return {s: F1(s)} for s in points (all <= s0) via Painleve II."""
    mp.mp.dps = dps
    # state: q, q', I1 = int_s^s0 q, I2 = int_s^s0 (x - s) q^2 handled via
    # J0 = int q^2 and J1 = int x q^2 so that I2 = J1 - s*J0.
    def rhs(t, y):
        s = -t
        q, dq = y[0], y[1]
        return [-dq, -(s * q + 2 * q ** 3), q, q ** 2, s * q ** 2]

    q0 = mp.airyai(s0)
    dq0 = mp.airyai(s0, derivative=1)
    # tails beyond s0 are below 1e-9 and neglected for the check route
    sol = mp.odefun(rhs, -s0, [q0, dq0, 0, 0, 0])
    out = {}
    for s in points:
        q, dq, i1, j0, j1 = sol(-s)
        i2 = j1 - s * j0
        f2 = mp.e ** (-i2)
        out[s] = float(mp.e ** (-i1 / 2) * mp.sqrt(f2))
    return out


def main():
    grid = np.round(np.arange(S_MIN, S_MAX + STEP / 2, STEP), 10)
    values = [f1_fredholm(s) for s in grid]
    values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))

    checks = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0]
    pii = f1_painleve(checks)
    for s in checks:
        fred = f1_fredholm(s)
        err = abs(fred - pii[s])
        print(f"# check s={s:+.2f} fredholm={fred:.12f} painleve={pii[s]:.12f} diff={err:.2e}",
              file=sys.stderr)
        assert err < 1e-7, s

    print("s,F")
    for s, f in zip(grid, values):
        print(f"{s:.2f},{f:.17e}")


if __name__ == "__main__":
    main()
