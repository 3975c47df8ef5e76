"""Independent reference implementations used only by the tests.

Nothing here shares code with the library paths it checks: projections are
re-derived by KKT subset enumeration and by Dykstra's alternating scheme,
gradients by central finite differences, assignments by permutation
enumeration, and subproblem optima by long plain projected-gradient runs
whose gradients and step sizes come straight from the definitions.
"""

import itertools

import numpy as np


def project_enum(x, eps, equality):
    """Exact eps-simplex projection by enumerating the clamped-coordinate set.

    KKT: the solution is y_i = max(x_i - tau, -eps) with sum(y) = 1 (or with
    tau = 0 when the sum constraint is slack in at-most mode).
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    if not equality:
        y = np.maximum(x, -eps)
        if y.sum() <= 1.0 + 1e-15:
            return y
    for clamped in itertools.chain.from_iterable(
        itertools.combinations(range(d), k) for k in range(d)
    ):
        s = set(clamped)
        free = [i for i in range(d) if i not in s]
        tau = (sum(x[i] for i in free) - 1.0 - len(s) * eps) / len(free)
        ok_free = all(x[i] - tau >= -eps - 1e-12 for i in free)
        ok_clamped = all(x[i] - tau <= -eps + 1e-12 for i in s)
        if ok_free and ok_clamped:
            return np.maximum(x - tau, -eps)
    raise AssertionError("enumeration oracle found no KKT-consistent face")


def project_dykstra(x, eps, equality, max_steps=10**5, tol=1e-15):
    """Dykstra's alternating projections between the box {y >= -eps} and the
    sum constraint; converges to the exact Euclidean projection."""
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    y = x.copy()
    p = np.zeros(d)
    q = np.zeros(d)
    for _ in range(max_steps):
        w = y + p
        yb = np.maximum(w, -eps)
        p_new = w - yb
        w = yb + q
        if equality:
            ys = w + (1.0 - w.sum()) / d
        else:
            ys = w - max(w.sum() - 1.0, 0.0) / d
        q_new = w - ys
        # the primal iterate can plateau while the corrections still move,
        # so convergence must look at all three sequences
        delta = max(
            np.max(np.abs(ys - y)),
            np.max(np.abs(p_new - p)),
            np.max(np.abs(q_new - q)),
        )
        y, p, q = ys, p_new, q_new
        if delta < tol:
            break
    return y


def central_diff_grad(f, x, h=1e-6):
    """Central finite differences of a scalar function of an array."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2.0 * h)
        it.iternext()
    return g


def brute_force_assignment(cost):
    """Minimum-cost permutation by full enumeration."""
    cost = np.asarray(cost, dtype=np.float64)
    r = cost.shape[0]
    best_perm = None
    best_val = np.inf
    for perm in itertools.permutations(range(r)):
        val = sum(cost[i, perm[i]] for i in range(r))
        if val < best_val:
            best_val = val
            best_perm = perm
    return np.array(best_perm), best_val


def _project_cols(V, eps, equality):
    out = np.empty_like(V)
    for j in range(V.shape[1]):
        out[:, j] = project_enum(V[:, j], eps, equality)
    return out


def pgd_longrun_update_A(X, Y, H, A0, eps, steps=10**5):
    """Plain projected gradient on A from first principles: full-form
    residual gradient, exact Lipschitz constant from SVD, enumerated
    projections."""
    L = 2.0 * np.linalg.svd(Y, compute_uv=False)[0] ** 2
    L *= np.linalg.svd(H, compute_uv=False)[0] ** 2
    step = 1.0 / max(L, 1e-12)
    A = _project_cols(np.array(A0, dtype=np.float64), eps, True)
    for _ in range(steps):
        G = 2.0 * Y.T @ (Y @ A @ H - X) @ H.T
        A = _project_cols(A - step * G, eps, True)
    return A, float(np.sum((X - Y @ A @ H) ** 2))


def pgd_longrun_update_H(X, W, H0, steps=10**5):
    L = 2.0 * np.linalg.svd(W, compute_uv=False)[0] ** 2
    step = 1.0 / max(L, 1e-12)
    H = _project_cols(np.array(H0, dtype=np.float64), 0.0, False)
    for _ in range(steps):
        G = 2.0 * W.T @ (W @ H - X)
        H = _project_cols(H - step * G, 0.0, False)
    return H, float(np.sum((X - W @ H) ** 2))
