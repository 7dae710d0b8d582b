"""Independent reference implementations used only to check the package.

Everything here is deliberately written with plain loops and textbook
formulas, sharing no code path with the implementations under test.
"""

import itertools

import numpy as np


def jacobi_eigh(sym, sweeps=100, tol_factor=1e-14):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns).
    """
    a = np.array(sym, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)

    def off(mat):
        return np.sqrt(sum(mat[i, j] ** 2 for i in range(n) for j in range(n) if i != j))

    threshold = tol_factor * max(off(a), 1e-300)
    for _ in range(sweeps):
        if off(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    order = np.argsort(np.diag(a))[::-1]
    return np.diag(a)[order], v[:, order]


def jacobi_svd_values(matrix, k):
    """Top-k singular values of a matrix via Jacobi on its Gram matrix."""
    y = np.asarray(matrix, dtype=np.float64)
    gram = y @ y.T if y.shape[0] <= y.shape[1] else y.T @ y
    eigvals, _ = jacobi_eigh(gram)
    return np.sqrt(np.clip(eigvals[:k], 0.0, None))


def exhaustive_kmeans(points, k):
    """Globally optimal k-means objective by enumerating all assignments
    with no empty cluster."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    best = np.inf
    for assign in itertools.product(range(k), repeat=n):
        counts = np.bincount(assign, minlength=k)
        if counts.min() == 0:
            continue
        a = np.asarray(assign)
        obj = 0.0
        for c in range(k):
            members = points[a == c]
            centroid = members.mean(axis=0)
            obj += ((members - centroid) ** 2).sum()
        if obj < best:
            best = obj
            best_assign = a.copy()
    return best, best_assign


def exhaustive_misclustering(truth, pred):
    """Permutation-minimized disagreement fraction by brute force."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    k = int(max(truth.max(), pred.max())) + 1
    best = truth.size
    for perm in itertools.permutations(range(k)):
        mapped = np.array([perm[v] for v in pred])
        best = min(best, int((truth != mapped).sum()))
    return best / truth.size


def exhaustive_groupwise(truth, pred):
    """Worst-group mislabeling under the best permutation, by brute force."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    k = int(truth.max()) + 1
    n = truth.size
    best = np.inf
    for perm in itertools.permutations(range(k)):
        worst = 0.0
        for a in range(k):
            g = perm[a]
            g_set = {i for i in range(n) if pred[i] == g}
            t_set = {i for i in range(n) if truth[i] == a}
            fp = len(g_set - t_set) / len(g_set)
            fn = len(t_set - g_set) / len(t_set)
            worst = max(worst, fp, fn)
        best = min(best, worst)
    return best


def two_pass_feature_stats(matrix, labels):
    """Naive per-column residual and total sums of squares."""
    y = np.asarray(matrix, dtype=np.float64)
    labels = np.asarray(labels)
    n, p = y.shape
    k = int(labels.max()) + 1
    residual = np.zeros(p)
    total = np.zeros(p)
    for j in range(p):
        col = y[:, j]
        mean = sum(col) / n
        total[j] = sum((v - mean) ** 2 for v in col)
        for a in range(k):
            members = col[labels == a]
            gmean = sum(members) / len(members)
            residual[j] += sum((v - gmean) ** 2 for v in members)
    return residual, total
