"""Exact evaluation of the first pISTA step on the 2x2 worked instance.

Uses rational arithmetic for every matrix quantity and mpmath for the
logarithms, so none of the package code is involved. The printed values are
the frozen expectations in tests/test_pista.py and tests/test_acceptance.py.

    python scripts/derive_2x2_instance.py
"""
from fractions import Fraction as Fr

import mpmath

mpmath.mp.dps = 30


def matmul(x, y):
    return [[sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def sign(v):
    return (v > 0) - (v < 0)


def st(x, tau):
    return sign(x) * max(abs(x) - tau, Fr(0))


def objective(a, s, alpha):
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    trace = sum(s[i][j] * a[i][j] for i in range(2) for j in range(2))
    l1 = sum(abs(a[i][j]) for i in range(2) for j in range(2))
    return -mpmath.log(mpmath.mpf(det.numerator) / det.denominator) + mpmath.mpf(
        (trace + alpha * l1).numerator
    ) / (trace + alpha * l1).denominator


def main():
    s = [[Fr(1), Fr(9, 10)], [Fr(9, 10), Fr(1)]]
    alpha = Fr(1, 2)
    a = [[1 / (s[0][0] + alpha), Fr(0)], [Fr(0), 1 / (s[1][1] + alpha)]]
    w = [[1 / a[0][0], Fr(0)], [Fr(0), 1 / a[1][1]]]
    g = [[s[i][j] - w[i][j] for j in range(2)] for i in range(2)]
    mask = [[a[i][j] != 0 or abs(g[i][j]) > alpha for j in range(2)] for i in range(2)]
    gs = [[sign(a[i][j]) if a[i][j] != 0 else -sign(g[i][j]) for j in range(2)] for i in range(2)]
    c = [
        [alpha * (a[i][i] * a[j][j] + (a[i][j] * a[j][i] if i != j else 0)) for j in range(2)]
        for i in range(2)
    ]
    gm = [[g[i][j] * mask[i][j] for j in range(2)] for i in range(2)]
    sm = [[gs[i][j] * mask[i][j] for j in range(2)] for i in range(2)]
    t1 = matmul(matmul(a, gm), a)
    t2 = matmul(matmul(a, sm), a)
    b = [[t1[i][j] + alpha * t2[i][j] - c[i][j] * sm[i][j] for j in range(2)] for i in range(2)]
    t = Fr(1)
    d = [[-a[i][j] + st(a[i][j] - t * b[i][j], t * c[i][j]) for j in range(2)] for i in range(2)]
    a1 = [[a[i][j] + mask[i][j] * d[i][j] for j in range(2)] for i in range(2)]

    print("A0 =", a)
    print("g  =", g)
    print("mask =", mask)
    print("Gsign =", gs)
    print("C  =", c)
    print("B  =", b)
    print("D(t=1) =", d)
    print("A1 =", a1)
    print("F(A0) =", mpmath.nstr(objective(a, s, alpha), 15))
    print("F(A1) =", mpmath.nstr(objective(a1, s, alpha), 15))
    f0 = -mpmath.log(mpmath.mpf(4) / 9) + mpmath.mpf(4) / 3
    print("f_smooth(A0) =", mpmath.nstr(f0, 15))


if __name__ == "__main__":
    main()
