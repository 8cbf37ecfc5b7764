"""Discretized invariant-density solve and its Fourier-side cross-check.

Densities live on one shared square grid with an odd number of cells per
axis and a cell centered at the origin.  With that layout the difference
of two cell centers is again a cell-center offset, so the discrete
convolution in the refinement step lands exactly on the grid and the
point reflection u -> -u is an exact array flip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.signal import fftconvolve

from .polygeom import GridSpec, area, centroid, linear_image, rasterize

FT_SMALL_K = 1e-6
_PRODUCT_TAIL = 1e-8


def make_centered_grid(half_extent, h):
    """Odd-sized symmetric grid with a cell centered at the origin."""
    if half_extent <= 0 or h <= 0:
        raise ValueError("half_extent and h must be positive")
    m = int(np.ceil(half_extent / h - 0.5))
    n = 2 * m + 1
    o = -(m + 0.5) * h
    return GridSpec(origin=(o, o), h=h, nx=n, ny=n)


def grid_for_windows(windows, h, pad=0.082):
    """Centered grid covering every window with a safety margin."""
    extent = 0.0
    for w in windows:
        if not w.is_empty:
            extent = max(extent, float(np.abs(w.vertices).max()))
    return make_centered_grid(extent + pad, h)


@dataclass
class DensityGrid:
    """Channelled non-negative sample grid; masses are cached integrals."""

    grid: GridSpec
    values: np.ndarray  # (r, ny, nx)
    masses: np.ndarray  # (r,)

    @classmethod
    def from_values(cls, grid, values):
        values = np.asarray(values, dtype=float)
        masses = values.sum(axis=(1, 2)) * grid.h**2
        return cls(grid=grid, values=values, masses=masses)

    @property
    def r(self):
        return self.values.shape[0]


@dataclass
class _Block:
    arr: np.ndarray
    iy0: int
    ix0: int


@dataclass
class RefinementKernel:
    """Rasters and geometry needed to apply the refinement operator once."""

    grid: GridSpec
    a_matrix: np.ndarray
    a_inv: np.ndarray
    detq_abs: float
    nu: np.ndarray
    blocks: list          # r x r, _Block or None where nu vanishes
    indicators: np.ndarray  # (r, ny, nx) normalized window rasters
    masks: np.ndarray       # (r, ny, nx) bool, cells meeting each window
    windows: list


def _bbox(P):
    v = P.vertices
    return v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max()


def _check_support(grid, j, i, trans, image):
    x0, y0, x1, y1 = grid.box()
    tx0, ty0, tx1, ty1 = _bbox(trans)
    ix0, iy0, ix1, iy1 = _bbox(image)
    if (tx0 + ix0 < x0 or ty0 + iy0 < y0 or tx1 + ix1 > x1 or ty1 + iy1 > y1):
        raise ValueError(f"grid underflow: convolution support of transition "
                         f"({j},{i}) exceeds the grid box")


def _crop(raster):
    rows = np.flatnonzero(raster.any(axis=1))
    cols = np.flatnonzero(raster.any(axis=0))
    return _Block(arr=raster[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1],
                  iy0=int(rows[0]), ix0=int(cols[0]))


def build_kernel(windows, windows_ji, nu, a_matrix, detq_abs, grid, supersample=4):
    """Rasterize window indicators and transition kernels on a shared grid.

    Kernels are normalized by their discrete integral, so each one sums to
    exactly one cell measure; entries with zero weight carry no raster.
    Raises when the grid cannot hold a window or a convolution support, or
    when a positive weight sits on a measure-zero window.
    """
    nu = np.asarray(nu, dtype=float)
    a_matrix = np.asarray(a_matrix, dtype=float)
    r = len(windows)
    if nu.shape != (r, r):
        raise ValueError("nu shape does not match the window count")
    det_a = abs(np.linalg.det(a_matrix))
    if abs(det_a * detq_abs - 1.0) > 1e-9:
        raise ValueError("determinant mismatch: |det A| * |det Q| must be 1")
    if grid.nx % 2 == 0 or grid.ny % 2 == 0 or \
            abs(grid.origin[0] + grid.nx * grid.h / 2) > 1e-9 or \
            abs(grid.origin[1] + grid.ny * grid.h / 2) > 1e-9:
        raise ValueError("kernel grid must be odd-sized and centered at the origin")
    h2 = grid.h**2
    indicators = np.zeros((r, grid.ny, grid.nx))
    masks = np.zeros((r, grid.ny, grid.nx), dtype=bool)
    for j, w in enumerate(windows):
        if not grid.covers(w):
            raise ValueError(f"grid underflow: window {j + 1} exceeds the grid box")
        cov = rasterize(w, grid, supersample)
        indicators[j] = cov / (cov.sum() * h2)
        masks[j] = cov > 0
    blocks = [[None] * r for _ in range(r)]
    for j in range(r):
        for i in range(r):
            if nu[j, i] == 0:
                continue
            trans = windows_ji[j][i]
            if not trans.is_polygon:
                raise ValueError(f"ghost transition ({j + 1},{i + 1}): positive "
                                 "weight on a measure-zero window")
            _check_support(grid, j + 1, i + 1, trans, linear_image(windows[i], a_matrix))
            cov = rasterize(trans, grid, supersample)
            blocks[j][i] = _crop(cov / (cov.sum() * h2))
    return RefinementKernel(grid=grid, a_matrix=a_matrix,
                            a_inv=np.linalg.inv(a_matrix), detq_abs=float(detq_abs),
                            nu=nu, blocks=blocks, indicators=indicators,
                            masks=masks, windows=list(windows))


def initial_density(kernel, w):
    """Masses w spread uniformly over the component windows."""
    w = np.asarray(w, dtype=float)
    values = w[:, None, None] * kernel.indicators
    return DensityGrid.from_values(kernel.grid, values)


def _resample_contracted(values, grid, a_inv):
    """Samples of f(A^-1 y) at the cell centers, zero outside the grid."""
    X, Y = np.meshgrid(grid.x_centers(), grid.y_centers())
    px = a_inv[0, 0] * X + a_inv[0, 1] * Y
    py = a_inv[1, 0] * X + a_inv[1, 1] * Y
    rows = (py - grid.origin[1]) / grid.h - 0.5
    cols = (px - grid.origin[0]) / grid.h - 0.5
    return map_coordinates(values, [rows, cols], order=1, mode="constant",
                           cval=0.0, prefilter=False)


def _convolve_block(block, g, grid):
    """h^2-weighted discrete convolution of a cropped kernel with a full grid.

    Exactness of the cell-center alignment relies on the centered odd grid;
    the result is placed back on the full grid with zero padding.
    """
    full = fftconvolve(g, block.arr, mode="full")
    my = (grid.ny - 1) // 2
    mx = (grid.nx - 1) // 2
    sy = my - block.iy0
    sx = mx - block.ix0
    out = np.zeros((grid.ny, grid.nx))
    y_lo = max(0, -sy)
    y_hi = min(grid.ny, full.shape[0] - sy)
    x_lo = max(0, -sx)
    x_hi = min(grid.nx, full.shape[1] - sx)
    if y_lo < y_hi and x_lo < x_hi:
        out[y_lo:y_hi, x_lo:x_hi] = full[y_lo + sy:y_hi + sy, x_lo + sx:x_hi + sx]
    return out * grid.h**2


def apply_refinement(f, kernel, nu=None, conserve_mass=True):
    """One application of the matrix refinement operator.

    Each input channel is resampled through the inverse contraction with
    bilinear interpolation, convolved with the weighted transition kernels,
    scaled by |det Q|, clamped at zero, and restricted to the cells meeting
    its component window.  By default every output channel is rescaled by a
    1 + O(h^2) factor so the discrete masses satisfy the exact transport
    identity m' = nu m; without that correction the discrete operator's
    spectral radius drifts off one by the quadrature error and the
    fixed-point residual cannot fall below it.
    """
    if nu is None:
        nu = kernel.nu
    nu = np.asarray(nu, dtype=float)
    r = f.r
    grid = kernel.grid
    h2 = grid.h**2
    resampled = [_resample_contracted(f.values[i], grid, kernel.a_inv)
                 for i in range(r)]
    target = nu @ f.masses
    values = np.zeros_like(f.values)
    for j in range(r):
        acc = np.zeros((grid.ny, grid.nx))
        for i in range(r):
            if nu[j, i] == 0:
                continue
            if kernel.blocks[j][i] is None:
                raise ValueError(f"no kernel raster for transition ({j + 1},{i + 1}); "
                                 "rebuild the kernel with this weight matrix")
            acc += nu[j, i] * _convolve_block(kernel.blocks[j][i], resampled[i], grid)
        acc *= kernel.detq_abs
        np.maximum(acc, 0.0, out=acc)
        acc[~kernel.masks[j]] = 0.0
        if conserve_mass:
            raw = acc.sum() * h2
            if raw > 0 and target[j] > 0:
                acc *= target[j] / raw
        values[j] = acc
    return DensityGrid.from_values(grid, values)


@dataclass
class FixedPointResult:
    density: DensityGrid
    residuals: np.ndarray
    mass_history: list

    @property
    def iterations(self):
        return len(self.residuals)


def solve_fixed_point(kernel, w, tol=1e-8, maxit=200):
    """Iterate the refinement operator to its invariant density.

    Starts from the window indicators carrying masses w and stops when the
    summed L1 change of all channels drops below tol.  Requires w to be
    fixed by the weight matrix (spectral radius one).
    """
    w = np.asarray(w, dtype=float)
    if np.max(np.abs(kernel.nu @ w - w)) > 1e-8:
        raise ValueError("the weight matrix does not fix w (its spectral "
                         "radius must be one)")
    f = initial_density(kernel, w)
    residuals = []
    mass_history = [f.masses.copy()]
    h2 = kernel.grid.h**2
    for _ in range(maxit):
        f_next = apply_refinement(f, kernel)
        resid = float(np.abs(f_next.values - f.values).sum() * h2)
        residuals.append(resid)
        mass_history.append(f_next.masses.copy())
        f = f_next
        if resid < tol:
            return FixedPointResult(density=f, residuals=np.array(residuals),
                                    mass_history=mass_history)
    raise RuntimeError(f"fixed point iteration did not reach tol={tol} within "
                       f"{maxit} iterations (last residual {residuals[-1]:.3e})")


def polygon_ft(P, k):
    """Fourier transform of the normalized polygon indicator at wavevector k.

    Uses the exact boundary (divergence-theorem) edge sum; wavevectors
    shorter than FT_SMALL_K fall back to the first-order expansion around
    the centroid, and nearly orthogonal edges are handled by the stable
    sinc evaluation.
    """
    if not P.is_polygon:
        raise ValueError("Fourier transform needs a polygon window")
    k = np.asarray(k, dtype=float).reshape(2)
    kn = np.hypot(k[0], k[1])
    if kn < FT_SMALL_K:
        c = centroid(P)
        return complex(np.exp(-1j * (k[0] * c[0] + k[1] * c[1])))
    v = P.vertices
    w = np.roll(v, -1, axis=0)
    edge = w - v
    lengths = np.hypot(edge[:, 0], edge[:, 1])
    tangents = edge / lengths[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    mid = 0.5 * (v + w)
    k_dot_n = normals @ k
    k_dot_t = tangents @ k
    phase = np.exp(-1j * (mid @ k))
    line = lengths * np.sinc(k_dot_t * lengths / (2 * np.pi)) * phase
    total = 1j * np.dot(k_dot_n, line) / (kn * kn)
    return complex(total / area(P))


def _product_depth(a_matrix, k, depth):
    if depth is not None:
        return depth
    at = a_matrix.T
    kappa = np.asarray(k, dtype=float).reshape(2)
    level = 0
    while np.hypot(*(at @ kappa)) >= _PRODUCT_TAIL and level < 10000:
        kappa = at @ kappa
        level += 1
    return level


def fourier_product(windows_ji, nu, w, a_matrix, k, depth=None):
    """Truncated infinite matrix product for the density transform at k.

    Applies the weighted window-transform matrices along the contracted
    wavevector orbit to the mass vector; the truncation depth follows the
    geometric decay of the orbit unless given explicitly.
    """
    nu = np.asarray(nu, dtype=float)
    w = np.asarray(w, dtype=float)
    a_matrix = np.asarray(a_matrix, dtype=float)
    r = len(w)
    depth = _product_depth(a_matrix, k, depth)
    kappas = [np.asarray(k, dtype=float).reshape(2)]
    for _ in range(depth):
        kappas.append(a_matrix.T @ kappas[-1])
    acc = w.astype(complex)
    for kappa in reversed(kappas):
        mat = np.zeros((r, r), dtype=complex)
        for j in range(r):
            for i in range(r):
                if nu[j, i] != 0:
                    mat[j, i] = nu[j, i] * polygon_ft(windows_ji[j][i], kappa)
        acc = mat @ acc
    return acc


def grid_ft(density, ks):
    """Midpoint-rule Fourier transform of every channel at the wavevectors."""
    ks = np.asarray(ks, dtype=float).reshape(-1, 2)
    xs = density.grid.x_centers()
    ys = density.grid.y_centers()
    out = np.zeros((density.r, len(ks)), dtype=complex)
    h2 = density.grid.h**2
    for n, k in enumerate(ks):
        px = np.exp(-1j * k[0] * xs)
        py = np.exp(-1j * k[1] * ys)
        for j in range(density.r):
            out[j, n] = h2 * (py @ (density.values[j] @ px))
    return out


def compare_solvers(density, windows_ji, nu, w, a_matrix, ks):
    """Largest deviation between the grid transform and the matrix product.

    Deviation is measured relative to the largest channel mass; returns the
    maximum over the sampled wavevectors and channels.
    """
    ks = np.asarray(ks, dtype=float).reshape(-1, 2)
    w = np.asarray(w, dtype=float)
    via_grid = grid_ft(density, ks)
    scale = np.abs(w).max()
    worst = 0.0
    for n, k in enumerate(ks):
        via_product = fourier_product(windows_ji, nu, w, a_matrix, k)
        worst = max(worst, float(np.abs(via_grid[:, n] - via_product).max() / scale))
    return worst


def _fmt(x):
    return f"{x:.12g}"


def write_density_grid(density, channel, fileobj):
    """One channel as headered rows of samples, y increasing row by row."""
    g = density.grid
    fileobj.write(f"# origin {_fmt(g.origin[0])} {_fmt(g.origin[1])}\n")
    fileobj.write(f"# h {_fmt(g.h)}\n")
    fileobj.write(f"# nx {g.nx} ny {g.ny}\n")
    for row in density.values[channel]:
        fileobj.write(" ".join(_fmt(v) for v in row) + "\n")


def write_density_csv(density, fileobj):
    """All channels as a flat x,y,f1,...,fr table for plotting."""
    g = density.grid
    xs = g.x_centers()
    ys = g.y_centers()
    fileobj.write("x,y," + ",".join(f"f{j + 1}" for j in range(density.r)) + "\n")
    for iy in range(g.ny):
        for ix in range(g.nx):
            vals = ",".join(_fmt(density.values[j, iy, ix]) for j in range(density.r))
            fileobj.write(f"{_fmt(xs[ix])},{_fmt(ys[iy])},{vals}\n")
