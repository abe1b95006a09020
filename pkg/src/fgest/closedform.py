"""Global closed-form foreground/background estimation.

Minimizes, independently for each color channel,

    sum_i (a_i F_i + (1 - a_i) B_i - I_i)^2
      + sum_i (|a_x| + eps) (F_x^2 + B_x^2) + (|a_y| + eps) (F_y^2 + B_y^2)

over all pixels jointly, with forward-difference gradients. The normal
equations form a sparse SPD system of size 2n which is solved by conjugate
gradients preconditioned with a thresholded incomplete Cholesky factor.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
import scipy.sparse as sp

from .imagecore import as_alpha, as_image, check_same_size


@dataclass(frozen=True)
class CfParams:
    eps_cf: float = 1e-4
    residual_tol: float = 1e-6
    max_iters: Optional[int] = None  # None means 10 * pixel count
    ic_drop_tol: float = 1e-4

    def __post_init__(self):
        for name in ("eps_cf", "residual_tol", "ic_drop_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SparseSymmetricSystem:
    """Normal equations of the closed-form cost.

    The unknown vector is ``[F_0 .. F_{n-1}, B_0 .. B_{n-1}]`` with pixels in
    row-major order; ``rhs`` has one column per color channel.
    """

    width: int
    height: int
    matrix: sp.csr_matrix
    rhs: np.ndarray

    @property
    def n(self):
        return self.width * self.height


@dataclass
class CfSolution:
    fg: np.ndarray
    bg: np.ndarray
    fg_raw: np.ndarray
    bg_raw: np.ndarray
    iterations: tuple
    residuals: tuple
    preconditioner: str


class ConvergenceError(RuntimeError):
    """PCG hit its iteration limit; carries the best iterate found."""

    def __init__(self, message, x, residual, iterations):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.iterations = iterations


def _gradient_weights(alpha, eps):
    wx = np.abs(np.diff(alpha, axis=1)) + eps
    wy = np.abs(np.diff(alpha, axis=0)) + eps
    return wx, wy


def assemble_system(image, alpha, params=CfParams()):
    image = as_image(image)
    alpha = as_alpha(alpha)
    check_same_size(image=image, alpha=alpha)
    h, w = alpha.shape
    n = h * w
    a = alpha.ravel()
    b = 1.0 - a
    idx = np.arange(n).reshape(h, w)
    wx, wy = _gradient_weights(alpha, params.eps_cf)

    # graph Laplacian of the weighted 4-neighbor grid (shared by F and B)
    i = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    j = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    wgt = np.concatenate([wx.ravel(), wy.ravel()])
    deg = np.bincount(i, wgt, minlength=n) + np.bincount(j, wgt, minlength=n)

    pix = np.arange(n)
    rows = [pix, pix + n, pix, pix + n]
    cols = [pix, pix + n, pix + n, pix]
    vals = [a * a + deg, b * b + deg, a * b, a * b]
    for off in (0, n):
        rows += [i + off, j + off]
        cols += [j + off, i + off]
        vals += [-wgt, -wgt]
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * n, 2 * n),
    )
    matrix.sort_indices()

    flat = image.reshape(n, -1)
    rhs = np.vstack([a[:, None] * flat, b[:, None] * flat])
    return SparseSymmetricSystem(w, h, matrix, rhs)


def cf_cost(image, alpha, fg, bg, eps_cf=CfParams.eps_cf):
    """Value of the closed-form cost (summed over channels) at ``(fg, bg)``."""
    image = as_image(image)
    alpha = as_alpha(alpha)
    fg = np.asarray(fg, dtype=np.float64)
    bg = np.asarray(bg, dtype=np.float64)
    a = alpha[:, :, None]
    data = np.sum((a * fg + (1.0 - a) * bg - image) ** 2)
    wx, wy = _gradient_weights(alpha, eps_cf)
    smooth = 0.0
    for x in (fg, bg):
        smooth += np.sum(wx[:, :, None] * np.diff(x, axis=1) ** 2)
        smooth += np.sum(wy[:, :, None] * np.diff(x, axis=0) ** 2)
    return float(data + smooth)


@numba.njit(cache=True)
def _ichol_threshold(n, Ap, Ai, Ax, tau):
    """Left-looking incomplete Cholesky with drop tolerance.

    Input is the lower triangle of an SPD matrix in CSC form with sorted row
    indices. Entries of the original pattern are always kept; fill-in is
    dropped when ``|l_ij| * l_jj < tau * sqrt(a_ii * a_jj)``. Returns
    ``(Lp, Li, Lx, ok)``; ``ok`` is False on a non-positive pivot.
    """
    diag = np.zeros(n)
    for j in range(n):
        for p in range(Ap[j], Ap[j + 1]):
            if Ai[p] == j:
                diag[j] = Ax[p]

    cap = 2 * Ap[n] + n
    Lp = np.zeros(n + 1, dtype=np.int64)
    Li = np.empty(cap, dtype=np.int64)
    Lx = np.empty(cap)
    work = np.zeros(n)
    marker = np.full(n, -1, dtype=np.int64)
    in_a = np.full(n, -1, dtype=np.int64)
    pattern = np.empty(n, dtype=np.int64)
    head = np.full(n, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    first = np.zeros(n, dtype=np.int64)
    nnz = 0

    for j in range(n):
        npat = 0
        marker[j] = j
        work[j] = 0.0
        for p in range(Ap[j], Ap[j + 1]):
            i = Ai[p]
            if i < j:
                continue
            in_a[i] = j
            work[i] = Ax[p]
            if i != j:
                marker[i] = j
                pattern[npat] = i
                npat += 1

        # columns k < j with L[j, k] != 0 are linked on head[j]
        k = head[j]
        head[j] = -1
        while k != -1:
            knext = nxt[k]
            p = first[k]
            ljk = Lx[p]
            for q in range(p, Lp[k + 1]):
                i = Li[q]
                if marker[i] != j:
                    marker[i] = j
                    work[i] = 0.0
                    pattern[npat] = i
                    npat += 1
                work[i] -= Lx[q] * ljk
            p += 1
            if p < Lp[k + 1]:
                first[k] = p
                r = Li[p]
                nxt[k] = head[r]
                head[r] = k
            k = knext

        d = work[j]
        if not (d > 0.0) or not np.isfinite(d):
            return Lp, Li[:nnz], Lx[:nnz], False
        ljj = math.sqrt(d)

        if nnz + npat + 1 > cap:
            cap = 2 * cap + npat + 1
            Li2 = np.empty(cap, dtype=np.int64)
            Lx2 = np.empty(cap)
            Li2[:nnz] = Li[:nnz]
            Lx2[:nnz] = Lx[:nnz]
            Li = Li2
            Lx = Lx2

        Li[nnz] = j
        Lx[nnz] = ljj
        nnz += 1
        start = nnz
        rows = np.sort(pattern[:npat])
        for t in range(npat):
            i = rows[t]
            v = work[i]
            if in_a[i] == j or abs(v) >= tau * math.sqrt(diag[i] * diag[j]):
                Li[nnz] = i
                Lx[nnz] = v / ljj
                nnz += 1
        Lp[j + 1] = nnz
        if nnz > start:
            first[j] = start
            r = Li[start]
            nxt[j] = head[r]
            head[r] = j

    return Lp, Li[:nnz], Lx[:nnz], True


@numba.njit(cache=True)
def _ichol_apply(Lp, Li, Lx, r):
    # solves L L^T z = r
    n = r.shape[0]
    y = r.copy()
    for j in range(n):
        p0 = Lp[j]
        y[j] /= Lx[p0]
        yj = y[j]
        for p in range(p0 + 1, Lp[j + 1]):
            y[Li[p]] -= Lx[p] * yj
    for j in range(n - 1, -1, -1):
        p0 = Lp[j]
        s = y[j]
        for p in range(p0 + 1, Lp[j + 1]):
            s -= Lx[p] * y[Li[p]]
        y[j] = s / Lx[p0]
    return y


class IncompleteCholesky:
    """Thresholded incomplete Cholesky preconditioner ``M = P^T L L^T P``.

    F and B unknowns of the same pixel are interleaved before factorizing,
    which keeps the coupled pairs adjacent and the fill-in local.
    """

    def __init__(self, matrix, drop_tol, perm=None):
        n = matrix.shape[0]
        self.perm = np.arange(n) if perm is None else np.asarray(perm)
        permuted = matrix[self.perm][:, self.perm]
        lower = sp.tril(permuted).tocsc()
        lower.sort_indices()
        Lp, Li, Lx, ok = _ichol_threshold(
            n,
            lower.indptr.astype(np.int64),
            lower.indices.astype(np.int64),
            lower.data.astype(np.float64),
            drop_tol,
        )
        if not ok:
            raise np.linalg.LinAlgError("incomplete Cholesky broke down (non-positive pivot)")
        self.Lp, self.Li, self.Lx = Lp, Li, Lx

    @property
    def nnz(self):
        return len(self.Lx)

    def __call__(self, r):
        z = np.empty_like(r)
        z[self.perm] = _ichol_apply(self.Lp, self.Li, self.Lx, r[self.perm])
        return z


def interleaved_order(n_pixels):
    """Permutation putting F_i and B_i next to each other."""
    return np.column_stack([np.arange(n_pixels), np.arange(n_pixels) + n_pixels]).ravel()


def pcg(A, b, precondition=None, rtol=1e-6, max_iter=1000, x0=None, callback=None):
    """Preconditioned conjugate gradients for a symmetric positive definite ``A``.

    Stops once ``||b - A x|| < rtol * ||b||`` (recursively updated residual).
    Returns ``(x, iterations, relative_residual)``; raises
    :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - A @ x
    res = np.linalg.norm(r) / norm_b
    if callback is not None:
        callback(x)
    if res < rtol:
        return x, 0, res
    z = r if precondition is None else precondition(r)
    p = z.copy()
    rz = r @ z
    best_x, best_res = x.copy(), res
    for it in range(1, max_iter + 1):
        Ap = A @ p
        step = rz / (p @ Ap)
        x += step * p
        r -= step * Ap
        res = np.linalg.norm(r) / norm_b
        if callback is not None:
            callback(x)
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res < rtol:
            return x, it, res
        z = r if precondition is None else precondition(r)
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise ConvergenceError(
        f"PCG did not reach relative residual {rtol:g} in {max_iter} iterations "
        f"(best {best_res:.3e})",
        best_x, best_res, max_iter,
    )


def make_preconditioner(system, params=CfParams(), kind="ichol"):
    """Return ``(callable or None, name)``; IC breakdown falls back to Jacobi."""
    if kind == "none":
        return None, "none"
    if kind == "ichol":
        try:
            return IncompleteCholesky(system.matrix, params.ic_drop_tol,
                                      interleaved_order(system.n)), "ichol"
        except np.linalg.LinAlgError:
            pass
    elif kind != "jacobi":
        raise ValueError(f"unknown preconditioner {kind!r}")
    inv_diag = 1.0 / system.matrix.diagonal()
    return (lambda r: inv_diag * r), "jacobi"


def solve_pcg(system, params=CfParams(), preconditioner="ichol", callback=None):
    """Solve the assembled system for every channel with a shared preconditioner."""
    n = system.n
    max_iter = params.max_iters if params.max_iters is not None else 10 * n
    precondition, name = make_preconditioner(system, params, preconditioner)
    nc = system.rhs.shape[1]
    sol = np.empty((2 * n, nc))
    iterations, residuals = [], []
    for c in range(nc):
        x, it, res = pcg(system.matrix, system.rhs[:, c], precondition,
                         params.residual_tol, max_iter, callback=callback)
        sol[:, c] = x
        iterations.append(it)
        residuals.append(res)
    shape = (system.height, system.width, nc)
    fg_raw = sol[:n].reshape(shape)
    bg_raw = sol[n:].reshape(shape)
    return CfSolution(
        fg=np.clip(fg_raw, 0.0, 1.0),
        bg=np.clip(bg_raw, 0.0, 1.0),
        fg_raw=fg_raw,
        bg_raw=bg_raw,
        iterations=tuple(iterations),
        residuals=tuple(residuals),
        preconditioner=name,
    )


def cf_foreground_background(image, alpha, params=CfParams(), return_solution=False):
    """Closed-form estimate of foreground and background colors.

    Returns ``(fg, bg)`` clamped to [0, 1], or the full :class:`CfSolution`
    when ``return_solution`` is set.
    """
    image = as_image(image)
    if image.shape[2] != 3:
        raise ValueError(f"image must have 3 channels, got {image.shape[2]}")
    solution = solve_pcg(assemble_system(image, alpha, params), params)
    if return_solution:
        return solution
    return solution.fg, solution.bg
