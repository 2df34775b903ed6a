"""Independent reference values for the statistical tests.

Shares no code with the package: roots come from companion-matrix
eigenvalues, fits from scikit-learn's LogisticRegression, areas from
quadrature. Run once; the printed numbers are frozen in oracle_values.py.

    python tests/oracles/brute_force.py
"""
import numpy as np
from scipy import integrate
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import log_loss, roc_auc_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import PolynomialFeatures, StandardScaler


def bistable_area_fraction():
    def width(b):
        return min(2.0, 4.0 * (b / 3.0) ** 1.5) if b > 0 else 0.0

    area, _ = integrate.quad(width, 0.0, 4.0, points=[3.0 * 0.5 ** (2 / 3)])
    return area, area / 12.0


def latent_minima(a, b, x0):
    """Basin minimum reached from x0, via eigenvalues of x^3 - b x - a."""
    n = a.size
    comp = np.zeros((n, 3, 3))
    comp[:, 0, 1] = b
    comp[:, 0, 2] = a
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    roots = np.linalg.eigvals(comp)
    real = np.abs(roots.imag) < 1e-7
    r = np.where(real, roots.real, np.nan)
    r.sort(axis=1)  # nans go last
    nreal = real.sum(axis=1)
    three = nreal == 3
    x = np.empty(n)
    single = ~three
    x[single] = np.nanmax(np.where(real[single], roots.real[single], np.nan), axis=1)
    lo, mid, hi = r[three, 0], r[three, 1], r[three, 2]
    x[three] = np.where(x0[three] < mid, lo, hi)
    return x, three


def simulate(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, n)
    b = rng.uniform(-2, 4, n)
    x0 = rng.uniform(-1, 1, n)
    x, three = latent_minima(a, b, x0)
    p = 1.0 / (1.0 + np.exp(-10.0 * x))
    y = (rng.uniform(size=n) < p).astype(int)
    return a, b, x0, x, p, y, three


def main():
    area, frac = bistable_area_fraction()
    print(f"bistable area {area:.6f}  fraction {frac:.6f}")

    a, b, x0, x, p, y, three = simulate(10**6, 12345)
    print(f"bistable fraction MC {three.mean():.4f}")
    meta = three & (np.sign(x) != np.sign(a))
    print(f"metastable fraction {meta.mean():.4f}")
    print(f"E[p | bistable] {p[three].mean():.4f}")
    print(f"E[p | mono, a>0.5] {p[~three & (a > 0.5)].mean():.4f}")
    print(f"E[p | mono, a<-0.5] {p[~three & (a < -0.5)].mean():.4f}")
    print(f"corr(a, y) {np.corrcoef(a, y)[0, 1]:.4f}")
    print(f"mean y {y.mean():.4f}")

    n = 10**5
    tr = simulate(n, 1)
    te = simulate(n, 2)
    for name, cols in (("a", [0]), ("b", [1]), ("joint", [0, 1])):
        model = make_pipeline(
            PolynomialFeatures(3), StandardScaler(),
            LogisticRegression(C=1.0, tol=1e-10, max_iter=10_000),
        )
        Xtr = np.column_stack([tr[c] for c in cols])
        Xte = np.column_stack([te[c] for c in cols])
        model.fit(Xtr, tr[5])
        q = model.predict_proba(Xte)[:, 1]
        print(f"{name}: auc {roc_auc_score(te[5], q):.4f}  log_loss {log_loss(te[5], q):.4f}")
        if name == "joint":
            for pt in ((0.5, 0.5), (-0.5, 0.5), (0.0, 3.0)):
                print(f"  joint P{pt} = {model.predict_proba(np.array([pt]))[0, 1]:.4f}")


if __name__ == "__main__":
    main()
