"""Independent high-precision reference values frozen into the unit tests.

Run with: python3 tests/oracles/gen_oracles.py
"""
import numpy as np
from mpmath import mp, mpf, exp, sqrt, log, matrix

mp.dps = 40
EPS = mpf("1e-7")


def kernel(d, si, sj, alpha=2):
    return exp(-(d / si) ** alpha) / 2 + exp(-(d / sj) ** alpha) / 2


def hellinger(p, q):
    return sqrt(sum((sqrt(a) - sqrt(b)) ** 2 for a, b in zip(p, q))) / sqrt(2)


def sym_kl(p, q):
    return sum((a - b) * (log(a + EPS) - log(b + EPS)) for a, b in zip(p, q))


def potential(p, q):
    return sqrt(sum((log(a + EPS) - log(b + EPS)) ** 2 for a, b in zip(p, q)))


def chain_hellinger():
    a = mpf("0.5")
    w = matrix([[1, a, 0, 0], [a, 1, a, 0], [0, a, 1, a], [0, 0, a, 1]])
    p = matrix(4, 4)
    for i in range(4):
        s = sum(w[i, j] for j in range(4))
        for j in range(4):
            p[i, j] = w[i, j] / s
    p2 = p * p
    rows = [[p2[i, j] for j in range(4)] for i in range(4)]
    d = [[hellinger(rows[i], rows[j]) for j in range(4)] for i in range(4)]
    hi = max(max(r) for r in d)
    return [[x / hi for x in r] for r in d]


def circle_points():
    rng = np.random.default_rng(2024)
    theta = np.linspace(0, 2 * np.pi, 30, endpoint=False)
    pts = np.c_[np.cos(theta), np.sin(theta)] + rng.normal(scale=0.05, size=(30, 2))
    return pts


def knn_kernel(pts, k=5, alpha=2.0):
    n = len(pts)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    d = (d - d.min()) / (d.max() - d.min())
    nbrs = []
    for i in range(n):
        order = sorted((j for j in range(n) if j != i), key=lambda j: (d[i, j], j))
        nbrs.append(order[:k])
    sigma = np.array([d[i, nbrs[i][-1]] for i in range(n)])
    w = np.eye(n)
    for i in range(n):
        for j in nbrs[i]:
            v = 0.5 * np.exp(-((d[i, j] / sigma[i]) ** alpha)) + 0.5 * np.exp(-((d[i, j] / sigma[j]) ** alpha))
            w[i, j] = w[j, i] = v
    return w


def vne_curve(w, t_max=100):
    deg = w.sum(1)
    sym = w / np.sqrt(np.outer(deg, deg))
    lam = np.linalg.eigvalsh(sym)
    lam = np.minimum(lam[lam > 0], 1.0)
    out = []
    for t in range(1, t_max + 1):
        e = lam ** t
        e = e / e.sum()
        e = e[e > 0]
        out.append(float(-(e * np.log(e)).sum()))
    return np.array(out)


def knee_two_line(y):
    x = np.arange(1, len(y) + 1, dtype=float)
    best, best_t = np.inf, 1
    for b in range(1, len(y) - 1):
        ml, bl = np.polyfit(x[: b + 1], y[: b + 1], 1)
        mr, br = np.polyfit(x[b:], y[b:], 1)
        err = np.abs(ml * x[: b + 1] + bl - y[: b + 1]).sum() + np.abs(mr * x[b:] + br - y[b:]).sum()
        if err < best:
            best, best_t = err, b + 1
    return best_t


def knee_second_difference(y):
    sd = y[:-2] - 2 * y[1:-1] + y[2:]
    i = int(np.argmax(sd))
    return i + 2 if sd[i] > 1e-12 else 1


if __name__ == "__main__":
    print("kernel(2,1,2) =", kernel(mpf(2), mpf(1), mpf(2)))
    print("hellinger((.5,.5),(.9,.1)) =", hellinger([mpf("0.5")] * 2, [mpf("0.9"), mpf("0.1")]))
    print("sym_kl((.5,.5),(.75,.25)) =", sym_kl([mpf("0.5")] * 2, [mpf("0.75"), mpf("0.25")]))
    print("potential((.6,.4),(.4,.6)) =", potential([mpf("0.6"), mpf("0.4")], [mpf("0.4"), mpf("0.6")]))
    half = mpf("0.5")
    print("collinear k=2 off-diagonals:", kernel(half, 1, half), kernel(1, 1, 1))
    for row in chain_hellinger():
        print("chain:", [mp.nstr(v, 20) for v in row])
    pts = circle_points()
    for p in pts:
        print("{%.17g, %.17g}," % (p[0], p[1]))
    h = vne_curve(knn_kernel(pts))
    print("two_line knee:", knee_two_line(h), "second difference knee:", knee_second_difference(h))
