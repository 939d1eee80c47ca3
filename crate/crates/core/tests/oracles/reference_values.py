"""Independent reference values frozen into the Rust tests.

Exact rationals via `fractions`, transcendental quantities via mpmath at 50
digits. Run with `python3 reference_values.py`.
"""
from fractions import Fraction as Fr
from math import comb
import mpmath as mp

mp.mp.dps = 50


def p_k(n, k):
    n = mp.mpf(n)
    return (1 - 1 / n) ** (n - k) * n ** (-mp.mpf(k))


def h_comma(n, lam, c):
    cp = 1 / mp.e + c
    return mp.exp(-((1 - 2 * cp) ** 2) / 2 * lam) + mp.mpf(2 * n - 1) / (n * n - n)


def comma_lower(n, k, mu, lam, c):
    if k > c * n:
        k = int(mp.floor(c * n))
    h = h_comma(n, lam, c)
    if h >= 1:
        return mp.mpf(0)
    return (1 - mp.exp(-0.16 * n)) * (mu + (1 - h) / p_k(n, k))


def plus_lower(n, k, mu):
    h = mp.sqrt(2 * n * mp.log(mu * n))
    kk = k if k <= n / 2 - h else n / 2 - h
    return (1 - mp.mpf(1) / n) * (mu + 1 / p_k(n, kk)), h


def tzero(n, delta, lam):
    g0l = int(mp.floor(lam / ((1 + delta) * mp.e)))
    d0 = min(int(mp.ceil(100 / mp.mpf(delta))), g0l)
    m = n + 1
    return (10**4 / mp.mpf(delta)) * (
        m + mp.e / (mp.e - 1) * n * mp.log(8 * mp.e * d0, 2) + 4 * mp.e * n * mp.log(n) / lam
    ), d0


def comma_upper(n, k, lam, delta):
    t0, _ = tzero(n, delta, lam)
    pl = p_k(n, k) * lam
    fl = int(mp.floor(mp.mpf(n) ** 1.5))
    return lam / (1 - mp.mpf(n) ** -0.5) * (8 * t0 + 1 + 9 * mp.sqrt(t0 / pl) + 8 * t0 / (pl * fl) + 1 / pl)


def z_sched(n, k):
    m = n + 1
    out = []
    for j in range(1, m - 1):
        if j <= k - 1:
            out.append(mp.mpf(n - j) / (4 * mp.e * n))
        else:
            out.append(mp.mpf(n - (j - k)) / (4 * mp.e * n))
    return out


def t0_ell(m, ell, z, delta, g0l, lam):
    g0 = mp.mpf(g0l) / lam
    d0 = min(int(mp.ceil(100 / mp.mpf(delta))), g0l)
    s1 = sum(max(0, mp.log(2 * g0 * lam / (1 + z[j] * lam / d0), 2)) for j in range(ell - 1))
    s2 = sum(1 / z[j] for j in range(ell - 1))
    return (10**4 / mp.mpf(delta)) * (m + s1 / (1 - g0) + s2 / lam)


# ---- exact (1+1) EA hitting times on OneMax-symmetric objectives ----
def kernel(n):
    r = Fr(1, n)
    K = [[Fr(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for a in range(n - i + 1):      # zero-bits flipped
            for b in range(i + 1):      # one-bits flipped
                pr = comb(n - i, a) * comb(i, b) * r ** (a + b) * (1 - r) ** (n - a - b)
                K[i][i + a - b] += pr
    return K


def solve(A, b):
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def exact_hit(n, fit):
    K = kernel(n)
    trans = list(range(n))  # OM levels 0..n-1 transient, n absorbing
    Q = [[Fr(0)] * n for _ in range(n)]
    for i in trans:
        stay = Fr(0)
        for j in range(n + 1):
            if fit(j) >= fit(i):
                if j < n:
                    Q[i][j] += K[i][j]
            else:
                stay += K[i][j]
        Q[i][i] += stay
    A = [[(1 if i == j else 0) - Q[i][j] for j in range(n)] for i in range(n)]
    t = solve(A, [Fr(1)] * n)
    init = [Fr(comb(n, i), 2**n) for i in range(n + 1)]
    return 1 + sum(init[i] * t[i] for i in range(n))


def jumpf(n, k):
    return lambda om: om + k if (om <= n - k or om == n) else n - om


if __name__ == "__main__":
    print("p_k(10,2)", mp.nstr(p_k(10, 2), 20))
    print("1/p_2 n=20", mp.nstr(1 / p_k(20, 2), 20))
    print("1/p_2 n=50", mp.nstr(1 / p_k(50, 2), 20))
    v, h = plus_lower(100, 2, 1)
    print("plus_lower(100,2,1)", mp.nstr(v, 20), "h", mp.nstr(h, 20))
    v, h = plus_lower(10, 5, 1)
    print("plus_lower(10,5,1)", mp.nstr(v, 20), "h", mp.nstr(h, 20), "k'", mp.nstr(5 - h, 20))
    C = 4 / mp.log(2.5)
    print("C_min(0.1)", mp.nstr(C, 20))
    v = comma_lower(200, 3, 50, 200, mp.mpf("0.1"))
    print("comma_lower(200,3,50,200)", mp.nstr(v, 20), "ratio", mp.nstr(v / (50 + 1 / p_k(200, 3)), 20))
    print("comma_lower(100,50,50,100)", mp.nstr(comma_lower(100, 50, 50, 100, mp.mpf("0.1")), 20),
          "T_10", mp.nstr(comma_lower(100, 10, 50, 100, mp.mpf("0.1")), 20))
    print("comma_lower(50,2,5,60)", mp.nstr(comma_lower(50, 2, 5, 60, mp.mpf("0.1")), 20))
    t0, d0 = tzero(50, 0.5, 100)
    print("tzero(50,.5,100)", mp.nstr(t0, 20), "D0", d0)
    print("comma_upper(100,5,100,.5)", mp.nstr(comma_upper(100, 5, 100, 0.5), 20),
          "1/p_5", mp.nstr(1 / p_k(100, 5), 20))
    z = z_sched(20, 3)
    g0l = int(mp.floor(200 / (1.5 * mp.e)))
    print("t0_ell(n=20,k=3,ell=m-1,delta=.5,lam=200)", mp.nstr(t0_ell(21, 20, z, 0.5, g0l, 200), 20), "g0l", g0l)
    print("t0_ell(n=20,k=3,ell=5)", mp.nstr(t0_ell(21, 5, z, 0.5, g0l, 200), 20))
    print("sum 1/z n=100 k=5", mp.nstr(sum(1 / x for x in z_sched(100, 5)), 20), "4en ln n", mp.nstr(4 * mp.e * 100 * mp.log(100), 20))
    print("uniform n=20 M=1 N=100", mp.nstr(1 - mp.mpf(100) / 2**20, 20))
    print("exact jump n=3 k=3", exact_hit(3, jumpf(3, 3)), float(exact_hit(3, jumpf(3, 3))))
    for n in (4, 6, 8):
        print("n", n, "onemax", repr(float(exact_hit(n, lambda o: o))),
              "jump2", repr(float(exact_hit(n, jumpf(n, 2)))), "jump3", repr(float(exact_hit(n, jumpf(n, 3)))))
    print("onemax n=1", exact_hit(1, lambda o: o))
