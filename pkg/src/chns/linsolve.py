"""Stage-system linear solvers: geometric multigrid and preconditioned CG.

Systems are represented by their stencils, stored as per-offset
coefficient arrays (the "stored by diagonals" layout).  Boundary
closures live in the coefficient arrays themselves: a coefficient is
zero wherever its neighbor would fall outside the grid, so shifted
reads can treat out-of-range values as zero.

The concentration stage matrix is

    A_c = D(rho) - 2 dt*a * Lap + dt*a*eps * Lap D(1/rho) Lap

(symmetric positive definite for rho > 0), and the velocity stage
matrix couples the two components through the mixed-derivative blocks

    [ D(rho) - dt*a ((2nu+lam) Ex + nu Ey)   -dt*a (nu+lam) Dx Dy      ]
    [ -dt*a (nu+lam) Dx Dy                    D(rho) - dt*a (nu Ex + (2nu+lam) Ey) ]

Smoothing is lexicographic Gauss-Seidel (pointwise for scalar systems,
collective 2x2 for the velocity block), compiled with numba.  V-cycles
use 4 pre- and 4 post-smoothings, full-weighting restriction, bilinear
cell-centered prolongation, and a dense direct solve on the coarsest
level.
"""

import numpy as np
from numba import njit
from scipy.fft import dctn, idctn
from scipy.linalg import lu_factor, lu_solve

from .errors import NotApplicable, SolverDivergence, ZeroDiagonal
from .fields import Grid, check_positive_density


# ---------------------------------------------------------------------------
# stencil representation

def _shift_read(arr, off):
    """g with g[k] = arr[k + off], zero where k + off leaves the grid."""
    g = np.zeros_like(arr)
    src = []
    dst = []
    for d, n in zip(off, arr.shape):
        dst.append(slice(max(0, -d), n - max(0, d)))
        src.append(slice(max(0, d), n + min(0, d)))
    g[tuple(dst)] = arr[tuple(src)]
    return g


class StencilOp:
    """Banded linear operator defined by offset -> coefficient arrays."""

    def __init__(self, shape, terms):
        self.shape = tuple(shape)
        self.ndim = len(self.shape)
        self.terms = {tuple(o): np.asarray(c, dtype=float) for o, c in terms.items()}
        center = (0,) * self.ndim
        if center not in self.terms:
            self.terms[center] = np.zeros(self.shape)
        self._packed = None

    @property
    def n(self):
        return int(np.prod(self.shape))

    def diag(self):
        return self.terms[(0,) * self.ndim]

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.shape)
        for off, coef in self.terms.items():
            if not any(off):
                out += coef * x
            else:
                out += coef * _shift_read(x, off)
        return out

    def scaled(self, a):
        return StencilOp(self.shape, {o: a * c for o, c in self.terms.items()})

    def plus(self, other):
        terms = {o: c.copy() for o, c in self.terms.items()}
        for o, c in other.terms.items():
            terms[o] = terms.get(o, 0.0) + c
        return StencilOp(self.shape, terms)

    def plus_diag(self, d):
        terms = {o: c.copy() for o, c in self.terms.items()}
        center = (0,) * self.ndim
        terms[center] = terms[center] + d
        return StencilOp(self.shape, terms)

    def to_dense(self):
        n = self.n
        A = np.zeros((n, n))
        strides = [int(np.prod(self.shape[k + 1:])) for k in range(self.ndim)]
        idx = np.arange(n)
        coords = [(idx // strides[k]) % self.shape[k] for k in range(self.ndim)]
        for off, coef in self.terms.items():
            tgt = idx.copy()
            ok = np.ones(n, dtype=bool)
            for k, d in enumerate(off):
                ck = coords[k] + d
                ok &= (ck >= 0) & (ck < self.shape[k])
                tgt = tgt + d * strides[k]
            rows = idx[ok]
            A[rows, tgt[ok]] += coef.ravel()[rows]
        return A

    def _pack(self, check_diag=True):
        """(coeffs, offsets) in the 2D layout consumed by the GS kernels."""
        if self._packed is None:
            offs = sorted(self.terms)
            if self.ndim == 1:
                coeffs = np.stack([self.terms[o].reshape(-1, 1) for o in offs])
                offarr = np.array([(o[0], 0) for o in offs], dtype=np.int64)
            else:
                coeffs = np.stack([self.terms[o] for o in offs])
                offarr = np.array(offs, dtype=np.int64)
            self._packed = (coeffs, offarr)
        if check_diag and np.any(self.diag() == 0.0):
            raise ZeroDiagonal("stencil has zero diagonal entries")
        return self._packed

    def gs_sweep(self, x, b, reverse=False):
        """One lexicographic Gauss-Seidel sweep, updating x in place."""
        coeffs, offs = self._pack()
        if self.ndim == 1:
            xv = x.reshape(-1, 1)
            bv = b.reshape(-1, 1)
        else:
            xv, bv = x, b
        _gs_scalar(coeffs, offs, xv, bv, reverse)
        return x


@njit(cache=True)
def _gs_scalar(coeffs, offs, x, b, reverse):
    M, N = x.shape
    K = coeffs.shape[0]
    n = M * N
    for step in range(n):
        idx = n - 1 - step if reverse else step
        i = idx // N
        j = idx % N
        s = b[i, j]
        d = 1.0
        for o in range(K):
            di = offs[o, 0]
            dj = offs[o, 1]
            if di == 0 and dj == 0:
                d = coeffs[o, i, j]
            else:
                ii = i + di
                jj = j + dj
                if 0 <= ii < M and 0 <= jj < N:
                    s -= coeffs[o, i, j] * x[ii, jj]
        x[i, j] = s / d


@njit(cache=True)
def _gs_block2(c11, o11, c12, o12, c21, o21, c22, o22, x1, x2, b1, b2, reverse):
    M, N = x1.shape
    n = M * N
    for step in range(n):
        idx = n - 1 - step if reverse else step
        i = idx // N
        j = idx % N
        r1 = b1[i, j]
        r2 = b2[i, j]
        d11 = d12 = d21 = d22 = 0.0
        for o in range(c11.shape[0]):
            di, dj = o11[o, 0], o11[o, 1]
            if di == 0 and dj == 0:
                d11 = c11[o, i, j]
            else:
                ii, jj = i + di, j + dj
                if 0 <= ii < M and 0 <= jj < N:
                    r1 -= c11[o, i, j] * x1[ii, jj]
        for o in range(c12.shape[0]):
            di, dj = o12[o, 0], o12[o, 1]
            if di == 0 and dj == 0:
                d12 = c12[o, i, j]
            else:
                ii, jj = i + di, j + dj
                if 0 <= ii < M and 0 <= jj < N:
                    r1 -= c12[o, i, j] * x2[ii, jj]
        for o in range(c21.shape[0]):
            di, dj = o21[o, 0], o21[o, 1]
            if di == 0 and dj == 0:
                d21 = c21[o, i, j]
            else:
                ii, jj = i + di, j + dj
                if 0 <= ii < M and 0 <= jj < N:
                    r2 -= c21[o, i, j] * x1[ii, jj]
        for o in range(c22.shape[0]):
            di, dj = o22[o, 0], o22[o, 1]
            if di == 0 and dj == 0:
                d22 = c22[o, i, j]
            else:
                ii, jj = i + di, j + dj
                if 0 <= ii < M and 0 <= jj < N:
                    r2 -= c22[o, i, j] * x2[ii, jj]
        det = d11 * d22 - d12 * d21
        x1[i, j] = (d22 * r1 - d12 * r2) / det
        x2[i, j] = (d11 * r2 - d21 * r1) / det


class BlockOp:
    """2x2 block operator acting on stacked fields (2, M, M)."""

    def __init__(self, a11, a12, a21, a22):
        self.blocks = (a11, a12, a21, a22)
        self.shape = a11.shape

    @property
    def n(self):
        return 2 * int(np.prod(self.shape))

    def apply(self, x):
        a11, a12, a21, a22 = self.blocks
        y1 = a11.apply(x[0]) + a12.apply(x[1])
        y2 = a21.apply(x[0]) + a22.apply(x[1])
        return np.stack([y1, y2])

    def gs_sweep(self, x, b, reverse=False):
        a11, a12, a21, a22 = self.blocks
        c11, o11 = a11._pack()
        c12, o12 = a12._pack(check_diag=False)
        c21, o21 = a21._pack(check_diag=False)
        c22, o22 = a22._pack()
        _gs_block2(c11, o11, c12, o12, c21, o21, c22, o22,
                   x[0], x[1], b[0], b[1], reverse)
        return x

    def to_dense(self):
        a11, a12, a21, a22 = self.blocks
        return np.block([[a11.to_dense(), a12.to_dense()],
                         [a21.to_dense(), a22.to_dense()]])


# ---------------------------------------------------------------------------
# stencil builders

def _axis_coeff(shape, axis, interior, first, last):
    """Coefficient array constant along rows, with special end rows."""
    M = shape[axis]
    line = np.full(M, interior)
    line[0] = first
    line[-1] = last
    if len(shape) == 1:
        return line.copy()
    return line[:, None] * np.ones(shape) if axis == 0 else np.ones(shape) * line[None, :]


def _unit(axis, ndim, sign):
    off = [0] * ndim
    off[axis] = sign
    return tuple(off)


def lap_stencil(grid):
    """Neumann Laplacian as a StencilOp."""
    h2 = grid.h**2
    ndim = grid.dim
    shape = grid.shape
    terms = {}
    center = np.zeros(shape)
    for ax in range(ndim):
        center += _axis_coeff(shape, ax, -2.0 / h2, -1.0 / h2, -1.0 / h2)
        terms[_unit(ax, ndim, +1)] = _axis_coeff(shape, ax, 1.0 / h2, 1.0 / h2, 0.0)
        terms[_unit(ax, ndim, -1)] = _axis_coeff(shape, ax, 1.0 / h2, 0.0, 1.0 / h2)
    terms[(0,) * ndim] = center
    return StencilOp(shape, terms)


def e_stencil(grid, axis):
    """No-slip second-derivative operator along one axis."""
    h2 = grid.h**2
    ndim = grid.dim
    shape = grid.shape
    terms = {
        (0,) * ndim: _axis_coeff(shape, axis, -2.0 / h2, -4.0 / h2, -4.0 / h2),
        _unit(axis, ndim, +1): _axis_coeff(shape, axis, 1.0 / h2, 4.0 / (3.0 * h2), 0.0),
        _unit(axis, ndim, -1): _axis_coeff(shape, axis, 1.0 / h2, 0.0, 4.0 / (3.0 * h2)),
    }
    return StencilOp(shape, terms)


def dc_stencil(grid, axis):
    """Centered first derivative with one-sided end rows."""
    h = grid.h
    ndim = grid.dim
    shape = grid.shape
    terms = {
        (0,) * ndim: _axis_coeff(shape, axis, 0.0, -1.0 / h, 1.0 / h),
        _unit(axis, ndim, +1): _axis_coeff(shape, axis, 0.5 / h, 1.0 / h, 0.0),
        _unit(axis, ndim, -1): _axis_coeff(shape, axis, -0.5 / h, 0.0, -1.0 / h),
    }
    return StencilOp(shape, terms)


def stencil_product(left, right, middle_diag=None):
    """Stencil of left * D(middle_diag) * right (middle defaults to I)."""
    shape = left.shape
    terms = {}
    for o1, c1 in left.terms.items():
        w = None
        if middle_diag is not None:
            w = _shift_read(np.asarray(middle_diag, dtype=float), o1)
        for o2, c2 in right.terms.items():
            o = tuple(a + b for a, b in zip(o1, o2))
            contrib = c1 * _shift_read(c2, o1)
            if w is not None:
                contrib = contrib * w
            terms[o] = terms.get(o, 0.0) + contrib
    return StencilOp(shape, terms)


def concentration_operator(rho, dt_alpha, eps, grid):
    """Stage matrix of the concentration system (SPD for rho > 0)."""
    check_positive_density(rho)
    lap = lap_stencil(grid)
    op = lap.scaled(-2.0 * dt_alpha)
    if dt_alpha != 0.0 and eps != 0.0:
        bih = stencil_product(lap, lap, middle_diag=1.0 / rho)
        op = op.plus(bih.scaled(dt_alpha * eps))
    return op.plus_diag(np.asarray(rho, dtype=float))


def velocity_operator(rho, dt_alpha, nu, lam, grid):
    """Stage matrix of the velocity system (BlockOp in 2D, StencilOp in 1D)."""
    check_positive_density(rho)
    rho = np.asarray(rho, dtype=float)
    if grid.dim == 1:
        ex = e_stencil(grid, 0)
        return ex.scaled(-dt_alpha * (2.0 * nu + lam)).plus_diag(rho)
    ex = e_stencil(grid, 0)
    ey = e_stencil(grid, 1)
    dxdy = stencil_product(dc_stencil(grid, 0), dc_stencil(grid, 1))
    a11 = (ex.scaled(-dt_alpha * (2.0 * nu + lam))
           .plus(ey.scaled(-dt_alpha * nu)).plus_diag(rho))
    a22 = (ex.scaled(-dt_alpha * nu)
           .plus(ey.scaled(-dt_alpha * (2.0 * nu + lam))).plus_diag(rho))
    a12 = dxdy.scaled(-dt_alpha * (nu + lam))
    return BlockOp(a11, a12, a12, a22)


# ---------------------------------------------------------------------------
# transfers

def restrict_cc(f):
    """Cell-centered full weighting (average of children)."""
    if f.ndim == 1:
        return 0.5 * (f[0::2] + f[1::2])
    return 0.25 * (f[0::2, 0::2] + f[1::2, 0::2] + f[0::2, 1::2] + f[1::2, 1::2])


def _prolong_axis0(f):
    mc = f.shape[0]
    out = np.empty((2 * mc,) + f.shape[1:])
    left = np.concatenate([f[:1], f[:-1]], axis=0)
    right = np.concatenate([f[1:], f[-1:]], axis=0)
    out[0::2] = (3.0 * f + left) / 4.0
    out[1::2] = (3.0 * f + right) / 4.0
    return out


def prolong_cc(f):
    """Bilinear cell-centered prolongation (mirrored at the walls)."""
    out = _prolong_axis0(f)
    if f.ndim == 2:
        out = _prolong_axis0(out.T).T
    return out


# ---------------------------------------------------------------------------
# multigrid

_MAX_DENSE = 20000


class MultigridSolver:
    """V-cycle solver with re-discretized coarse operators.

    builder(rho_level, grid_level) must return the stage operator; the
    coefficient field rho is restricted down the hierarchy by full
    weighting.  Grids halve while even, and the coarsest level (size
    <= 4 per axis, or the first odd size) is solved directly.
    """

    def __init__(self, rho, grid, builder, nu_pre=4, nu_post=4):
        self.nu_pre = nu_pre
        self.nu_post = nu_post
        self.levels = []
        m, r, g = grid.M, np.asarray(rho, dtype=float), grid
        while True:
            op = builder(r, g)
            self.levels.append(op)
            if m % 2 != 0 or m <= 4:
                break
            m //= 2
            r = restrict_cc(r)
            g = Grid(grid.dim, m)
        coarse = self.levels[-1]
        if coarse.n > _MAX_DENSE:
            raise ValueError(
                f"coarsest multigrid level has {coarse.n} unknowns; "
                "choose M with more factors of two")
        self._coarse_lu = lu_factor(coarse.to_dense())
        self._block = isinstance(coarse, BlockOp)

    def _zeros(self, op):
        if isinstance(op, BlockOp):
            return np.zeros((2,) + op.shape)
        return np.zeros(op.shape)

    def _restrict(self, r):
        if self._block:
            return np.stack([restrict_cc(r[0]), restrict_cc(r[1])])
        return restrict_cc(r)

    def _prolong(self, e):
        if self._block:
            return np.stack([prolong_cc(e[0]), prolong_cc(e[1])])
        return prolong_cc(e)

    def _coarse_solve(self, b):
        x = lu_solve(self._coarse_lu, b.ravel())
        return x.reshape(b.shape)

    def vcycle(self, x, b, level=0):
        op = self.levels[level]
        if level == len(self.levels) - 1:
            x[...] = self._coarse_solve(b)
            return x
        for _ in range(self.nu_pre):
            op.gs_sweep(x, b, reverse=False)
        r = b - op.apply(x)
        e = self._zeros(self.levels[level + 1])
        self.vcycle(e, self._restrict(r), level + 1)
        x += self._prolong(e)
        for _ in range(self.nu_post):
            op.gs_sweep(x, b, reverse=True)
        return x

    def solve(self, b, x0=None, rel_tol=1e-6, max_cycles=100, name="multigrid"):
        """Iterate V-cycles until ||b - Ax|| <= rel_tol * ||b - Ax0||.

        A rounding floor proportional to ||b|| also counts as converged,
        so warm starts with already-tiny residuals cannot stall.
        """
        op = self.levels[0]
        x = self._zeros(op) if x0 is None else np.array(x0, dtype=float)
        r0 = float(np.linalg.norm((b - op.apply(x)).ravel()))
        floor = 100.0 * np.finfo(float).eps * float(np.linalg.norm(b.ravel()))
        if r0 <= floor:
            return x, 0
        target = max(rel_tol * r0, floor)
        r = r0
        for cycles in range(1, max_cycles + 1):
            self.vcycle(x, b)
            r = float(np.linalg.norm((b - op.apply(x)).ravel()))
            if not np.isfinite(r):
                raise SolverDivergence(name, r, cycles)
            if r <= target:
                return x, cycles
        raise SolverDivergence(name, r / r0, max_cycles)


def gauss_seidel_sweep(op, x, b, order="forward"):
    """Public single-sweep entry point (order 'forward' or 'backward')."""
    return op.gs_sweep(x, b, reverse=(order == "backward"))


# ---------------------------------------------------------------------------
# preconditioned conjugate gradient

def neumann_laplacian_eigenvalues(grid):
    """Eigenvalues of the Neumann Laplacian in the cosine basis."""
    M, h = grid.M, grid.h
    lam1 = (2.0 * np.cos(np.arange(M) * np.pi / M) - 2.0) / h**2
    if grid.dim == 1:
        return lam1
    return lam1[:, None] + lam1[None, :]


class DCTPreconditioner:
    """Constant-coefficient approximation of the concentration matrix.

    B = mu1 I - 2 dt*a Lap + dt*a eps mu3 Lap^2 with mu1 = mean(rho),
    mu3 = mean(1/rho); diagonal in the cosine basis, applied with fast
    cosine transforms.
    """

    def __init__(self, rho, dt_alpha, eps, grid):
        check_positive_density(rho)
        self.mu1 = float(np.mean(rho))
        self.mu2 = 2.0
        self.mu3 = float(np.mean(1.0 / np.asarray(rho, dtype=float)))
        lam = neumann_laplacian_eigenvalues(grid)
        self.eig = (self.mu1 - dt_alpha * self.mu2 * lam
                    + dt_alpha * eps * self.mu3 * lam**2)

    def apply_inverse(self, r):
        rhat = dctn(r, type=2, norm="ortho")
        return idctn(rhat / self.eig, type=2, norm="ortho")

    def apply(self, x):
        xhat = dctn(x, type=2, norm="ortho")
        return idctn(xhat * self.eig, type=2, norm="ortho")


def pcg_solve(op, b, x0=None, precond=None, rel_tol=1e-6, max_iters=500,
              name="pcg"):
    """Preconditioned conjugate gradient for SPD stencil systems.

    Stops when the residual norm drops by rel_tol relative to the
    initial guess; returns (x, iterations).
    """
    if isinstance(op, BlockOp):
        raise NotApplicable("PCG applies to the concentration system only")
    x = np.zeros(op.shape) if x0 is None else np.array(x0, dtype=float)
    r = b - op.apply(x)
    r0 = float(np.linalg.norm(r.ravel()))
    floor = 100.0 * np.finfo(float).eps * float(np.linalg.norm(b.ravel()))
    if r0 <= floor:
        return x, 0
    target = max(rel_tol * r0, floor)
    z = precond.apply_inverse(r) if precond is not None else r.copy()
    p = z.copy()
    rz = float(np.sum(r * z))
    for it in range(1, max_iters + 1):
        Ap = op.apply(p)
        alpha = rz / float(np.sum(p * Ap))
        x += alpha * p
        r -= alpha * Ap
        rn = float(np.linalg.norm(r.ravel()))
        if not np.isfinite(rn):
            raise SolverDivergence(name, rn, it)
        if rn <= target:
            return x, it
        z = precond.apply_inverse(r) if precond is not None else r.copy()
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverDivergence(name, rn / r0, max_iters)


def condition_bound(rho):
    """Upper bound for the condition number of B^{-1} A_c.

    max(max(rho)/mu1, max(1/rho)/mu3) / min(min(rho)/mu1, min(1/rho)/mu3);
    equals 1 for constant rho.
    """
    check_positive_density(rho)
    rho = np.asarray(rho, dtype=float)
    mu1 = float(np.mean(rho))
    mu3 = float(np.mean(1.0 / rho))
    hi = max(float(np.max(rho)) / mu1, float(np.max(1.0 / rho)) / mu3)
    lo = min(float(np.min(rho)) / mu1, float(np.min(1.0 / rho)) / mu3)
    return hi / lo


class DirectSolver:
    """Dense LU solve of a stage operator; small grids and tests only."""

    def __init__(self, op):
        self.op = op
        self._lu = lu_factor(op.to_dense())

    def solve(self, b, x0=None, rel_tol=None, max_cycles=None, name="direct"):
        x = lu_solve(self._lu, b.ravel())
        return x.reshape(b.shape), 0
