"""Independent reference values by adaptive quadrature of the smooth formulas.

Nothing here touches the package's grid discretization; the frozen numbers in
the tests were produced by running this module (``python tests/oracles.py``).
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

HALF_PI = math.pi / 2


def raw_bump(a, w):
    return lambda th: a * math.exp(-((th - HALF_PI) ** 2) / w**2)


def corrected_bump(a, w):
    slope0 = math.pi / w**2 * math.exp(-(math.pi**2) / (4 * w**2))
    return lambda th: a * (math.exp(-((th - HALF_PI) ** 2) / w**2) - slope0 * math.sin(th) * math.cos(th) ** 2)


def dumbbell_u(neck, w, lobe=0.2, offset=math.pi / 6):
    z0 = math.sin(offset)

    def u(th):
        z = math.cos(th)
        g = lambda c: math.exp(-((z - c) ** 2) / w**2)
        return -neck * g(0.0) + lobe * (g(z0) + g(-z0))

    return u


def cap_area(u, theta):
    return 2 * math.pi * quad(lambda s: math.exp(2 * u(s)) * math.sin(s), 0.0, theta, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def area(u):
    return cap_area(u, math.pi)


def h_sum(u, theta, total=None):
    total = area(u) if total is None else total
    ap = cap_area(u, theta)
    L = 2 * math.pi * math.exp(u(theta)) * math.sin(theta)
    return L * total / (ap * (total - ap))


def h_min(u, theta, total=None):
    total = area(u) if total is None else total
    ap = cap_area(u, theta)
    L = 2 * math.pi * math.exp(u(theta)) * math.sin(theta)
    return L / min(ap, total - ap)


def scan(u, fn, n_nodes=1024):
    """Brute-force scan of ``fn`` over interior nodes of a 1024-interval grid."""
    total = area(u)
    th = np.linspace(0, math.pi, n_nodes + 1)[1:-1]
    vals = np.array([fn(u, t, total) for t in th])
    i = int(np.argmin(vals))
    return th[i], vals[i]


def curvature(u, theta, eps=1e-4):
    """K from a Richardson-extrapolated central difference of the smooth u."""
    def d1(h):
        return (u(theta + h) - u(theta - h)) / (2 * h)

    def d2(h):
        return (u(theta + h) - 2 * u(theta) + u(theta - h)) / h**2

    up = (4 * d1(eps / 2) - d1(eps)) / 3
    upp = (4 * d2(eps / 2) - d2(eps)) / 3
    lap = upp + math.cos(theta) / math.sin(theta) * up
    return math.exp(-2 * u(theta)) * (1 - lap)


def stationary_root(w=0.5):
    def s(a):
        u = corrected_bump(a, w)
        L = 2 * math.pi * math.exp(u(HALF_PI))
        return L**2 - 4 * math.pi * area(u) / 2

    return brentq(s, 0.0, 1.0, xtol=1e-14)


if __name__ == "__main__":
    print("raw bump area", repr(area(raw_bump(0.3, 0.5))))
    ub = corrected_bump(0.3, 0.5)
    print("bump area", repr(area(ub)))
    print("bump h_sum scan", scan(ub, h_sum))
    print("bump h_min scan", scan(ub, h_min))
    ud = dumbbell_u(0.5, 0.4)
    print("dumbbell area", repr(area(ud)))
    print("dumbbell h_sum scan", scan(ud, h_sum))
    print("dumbbell h_min scan", scan(ud, h_min))
    print("K(pi/2) bump a=-0.3", repr(curvature(corrected_bump(-0.3, 0.5), HALF_PI)))
    print("K(pi/2) dumbbell", repr(curvature(ud, HALF_PI)), "K(0.3)", repr(curvature(ud, 0.3)))
    print("stationary root", repr(stationary_root()))
