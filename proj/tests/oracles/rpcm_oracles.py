"""Independent reference values for the RPCM, variance and bound tests.

Run with python3; the printed numbers are frozen into tests/unit/*.cpp.
"""
import math
import mpmath as mp
from scipy import integrate

mp.mp.dps = 30


def ginibre_var_closed(s):
    s = mp.mpf(s)
    one = s * mp.erf(mp.sqrt(mp.pi) * s) - (1 - mp.exp(-mp.pi * s * s)) / mp.pi
    return s * s - one * one


def ginibre_var_numeric(s):
    # |A| - double integral of |K|^2 over the square, done per axis numerically
    f = lambda t: 2 * (s - t) * math.exp(-math.pi * t * t)
    one, _ = integrate.quad(f, 0, s, epsabs=1e-14, epsrel=1e-14, limit=200)
    return s * s - one * one


def cloaked_var(s, d):
    return s ** d - (s - 1.0 / 3.0) ** d


def ginibre_eps(t):
    # eps(t) = int min(1, t r) e^{-pi r^2} 2 pi r dr
    t = mp.mpf(t)
    g = lambda r: min(1, t * r) * mp.exp(-mp.pi * r * r) * 2 * mp.pi * r
    return mp.quad(g, [0, 1 / t, mp.inf]) if t > 0 else mp.mpf(0)


def cloaked_log_integral_2d():
    f = lambda y, x: math.log(math.hypot(x, y)) * (1 - x) * (1 - y) if x * x + y * y > 1 else 0.0
    # quadrant value times 4
    v, _ = integrate.dblquad(f, 0, 1, 0, 1, epsabs=1e-12, epsrel=1e-12)
    return 4 * v


def ginibre_log_integral():
    g = lambda r: mp.log(r) * mp.exp(-mp.pi * r * r) * 2 * mp.pi * r
    return mp.quad(g, [1, mp.inf])


def alpha2_hu_ginibre(n, c0=1.0):
    lo = mp.mpf(n) ** (-0.5)
    if lo >= c0:
        return mp.mpf(n) * (1 + 0)
    # d = 2: integrand eps(r) r^{-1}
    val = mp.quad(lambda r: ginibre_eps(r) / r, [lo, c0])
    return n * (1 + val)


def lattice_sum_2d(t0):
    s = 0.0
    m = int(math.floor(t0))
    for a in range(-m, m + 1):
        for b in range(-m, m + 1):
            r2 = a * a + b * b
            if 0 < r2 <= t0 * t0:
                s += 1.0 / r2
    return s


def a_q_loglog(gamma):
    # Head summed directly; the tail integral is taken in u = ln(ln 3 + k ln 2),
    # where it equals (1/ln 2) ∫_U^∞ u^{-γ}/(1 - c e^{-u}) du, c = ln 3 - ln 2.
    # Direct quadrature in k is unreliable for this slowly decaying tail.
    f = lambda k: 1 / ((k + 1) * mp.log(2) * mp.log(mp.log(3) + k * mp.log(2)) ** gamma)
    K = 200000
    head = mp.fsum(f(k) for k in range(0, K))
    U = mp.log(mp.log(3) + K * mp.log(2))
    c = mp.log(3) - mp.log(2)
    lead = U ** (1 - gamma) / (gamma - 1)
    rest = mp.quad(lambda u: c * mp.exp(-u) / (1 - c * mp.exp(-u)) * u ** (-gamma), [U, mp.inf])
    return head + (lead + rest) / mp.log(2) + f(K) / 2


def cloaked_structure_factor(k):
    # 1 + Fourier transform of -prod (1-|x_i|)_+, per-axis numeric transform
    prod = 1.0
    for ki in k:
        v, _ = integrate.quad(lambda x: (1 - abs(x)) * math.cos(ki * x), -1, 1, epsabs=1e-14, epsrel=1e-14)
        prod *= v
    return 1 - prod


if __name__ == "__main__":
    for n in (1, 4, 16):
        s = 2 * math.pi * math.sqrt(n)
        print(f"ginibre var n={n}: closed={mp.nstr(ginibre_var_closed(s), 17)} numeric={ginibre_var_numeric(s):.17g}")
    for d in (1, 2, 3):
        for s in (4, 8):
            print(f"cloaked var d={d} side={s}: {cloaked_var(s, d):.17g}")
    for t in (1e-4, 0.5, 1, 2, 1e4):
        print(f"ginibre eps({t}) = {mp.nstr(ginibre_eps(t), 17)}")
    print(f"cloaked log integral d=2: {cloaked_log_integral_2d():.17g}")
    print(f"ginibre log integral: {mp.nstr(ginibre_log_integral(), 17)}")
    for n in (64, 256, 1024, 4096, 16384):
        print(f"alpha2_hu ginibre n={n}: {mp.nstr(alpha2_hu_ginibre(n), 17)}")
    print(f"lattice sum d=2 t0=100: {lattice_sum_2d(100):.17g}")
    print(f"lattice sum d=2 t0=10: {lattice_sum_2d(10):.17g}")
    print(f"A_q log-loglog gamma=2: {mp.nstr(a_q_loglog(2), 17)}")
    print(f"A_q log-loglog gamma=3: {mp.nstr(a_q_loglog(3), 17)}")
    for k in ((1.0, 0.0), (0.5, 2.0), (3.0, 3.0)):
        print(f"cloaked S{k} = {cloaked_structure_factor(k):.17g}")
