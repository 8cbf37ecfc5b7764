"""Multi-component model sets over the fifth cyclotomic module.

A scheme bundles r convex windows, r coset representatives with distinct
residues, and a similarity acting by ring multiplication whose internal
shadow is a contraction.  This module enumerates the point sets, computes
the transition windows between components by convex erosion, builds the
transition weight matrix, and checks the self-similarity closure relation
on finite patches.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .cyclotomic import TAU, CycInt, embedding_matrix
from .pfsolve import pf_eigen
from .polygeom import Region, area, contains, contains_many, erode, linear_image, translate

POLICY_AREA = "area-markov"
POLICY_EXPLICIT = "explicit"

POINTS_CSV_HEADER = "component,m0,m1,m2,m3,phys_re,phys_im,int_re,int_im"

_BOUNDARY_EPS = 1e-9


def _complex_matrix(c):
    """2x2 real matrix of multiplication by the complex number c."""
    return np.array([[c.real, -c.imag], [c.imag, c.real]])


@dataclass
class SchemeSpec:
    """Full problem statement of a multi-component cut-and-project scheme."""

    windows: list
    coset_reps: list
    q_mult: CycInt
    gamma: complex = 0j
    boundary_mode: str = "closed"

    def __post_init__(self):
        if len(self.windows) != len(self.coset_reps) or not self.windows:
            raise ValueError("need one coset representative per window")
        for w in self.windows:
            if not w.is_polygon:
                raise ValueError("component windows must be convex polygons")
        residues = [z.rho() for z in self.coset_reps]
        if len(set(residues)) != len(residues):
            raise ValueError("coset representatives must have distinct residues")
        if abs(self.q_mult.internal()) >= 1.0:
            raise ValueError("internal image of the similarity must be contractive")
        if self.boundary_mode not in ("closed", "open"):
            raise ValueError("boundary_mode must be 'closed' or 'open'")
        self.gamma = complex(self.gamma)

    @property
    def r(self):
        return len(self.windows)

    @property
    def q_phys(self):
        return self.q_mult.physical()

    @property
    def a_internal(self):
        return self.q_mult.internal()

    def a_matrix(self):
        return _complex_matrix(self.a_internal)

    def q_matrix(self):
        return _complex_matrix(self.q_phys)

    @property
    def detq_abs(self):
        return abs(self.q_phys) ** 2

    @property
    def eps(self):
        return _BOUNDARY_EPS if self.boundary_mode == "closed" else -_BOUNDARY_EPS

    def shifted_window(self, i):
        """Window of component i (1-based) translated by the displacement."""
        return translate(self.windows[i - 1], (self.gamma.real, self.gamma.imag))


@dataclass(frozen=True)
class LabeledPoint:
    """A point of one component, with both embeddings cached."""

    component: int
    coeffs: CycInt
    phys: complex
    internal: complex


@dataclass(frozen=True)
class ModulePoint:
    """A module element used as a self-similarity translation."""

    coeffs: CycInt
    phys: complex
    internal: complex


@dataclass
class TransitionData:
    """Transition structure of a scheme for a fixed similarity."""

    windows_ji: list
    nu: np.ndarray
    pf_value: float
    pf_vector: np.ndarray
    tsets: list = None


def build_transition_data(spec, policy=POLICY_AREA, matrix=None, tset_radius=None):
    """Assemble the full transition structure in one call.

    Computes the transition-window table, the weight matrix under the given
    policy, its dominant eigenpair, and optionally the translation sets out
    to tset_radius.
    """
    windows_ji = transition_windows(spec)
    nu = build_nu(spec, windows_ji, policy=policy, matrix=matrix)
    result = pf_eigen(nu)
    if np.max(np.abs(nu @ result.w - result.lambda_max * result.w)) > 1e-10:
        raise RuntimeError("eigenpair residual exceeds 1e-10")
    tsets = None
    if tset_radius is not None:
        tsets = translation_sets(spec, windows_ji, tset_radius)
    return TransitionData(windows_ji=windows_ji, nu=nu,
                          pf_value=result.lambda_max, pf_vector=result.w,
                          tsets=tsets)


def penrose_scheme(gamma=0j, boundary_mode="closed"):
    """The four-component vertex scheme of the rhombic Penrose tiling.

    Windows are the pentagon hull of the fifth roots of unity and its
    negated / golden-scaled copies; component i selects the coset with
    residue i and the similarity is multiplication by the golden ratio.
    """
    xi_powers = [(CycInt(0, 1) ** k).physical() for k in range(5)]
    P = Region.polygon([(z.real, z.imag) for z in xi_powers])
    tau = TAU.physical().real
    windows = [
        P,
        linear_image(P, -tau * np.eye(2)),
        linear_image(P, tau * np.eye(2)),
        linear_image(P, -np.eye(2)),
    ]
    reps = [CycInt(i) for i in range(1, 5)]
    return SchemeSpec(windows=windows, coset_reps=reps, q_mult=TAU,
                      gamma=gamma, boundary_mode=boundary_mode)


def transition_windows(spec):
    """r x r table of translation windows between components.

    Entry (j, i) collects the internal translations u with
    A * window_i + u inside window_j, computed by convex erosion.
    """
    A = spec.a_matrix()
    out = []
    for j in range(1, spec.r + 1):
        row = []
        wj = spec.shifted_window(j)
        for i in range(1, spec.r + 1):
            row.append(erode(wj, linear_image(spec.shifted_window(i), A)))
        out.append(row)
    return out


def build_nu(spec, windows_ji, policy=POLICY_AREA, matrix=None):
    """Transition weight matrix for the given transition-window table.

    The area policy weights each transition window by its linear scale
    (the square root of its area) and normalizes every source column to
    sum to one, which reproduces the Markov weighting of the worked
    four-component example.  Explicit matrices are validated: they must be
    non-negative and must not put weight on a measure-zero window (such a
    normalized indicator would degenerate to a point mass).
    """
    r = spec.r
    areas = np.array([[area(windows_ji[j][i]) for i in range(r)] for j in range(r)])
    if policy == POLICY_AREA:
        if matrix is not None:
            raise ValueError("matrix argument is only for the explicit policy")
        weights = np.sqrt(areas)
        colsums = weights.sum(axis=0)
        if np.any(colsums <= 0):
            bad = int(np.argmin(colsums)) + 1
            raise ValueError(f"column {bad} has no positive-area transition window")
        return weights / colsums
    if policy == POLICY_EXPLICIT:
        nu = np.asarray(matrix, dtype=float)
        if nu.shape != (r, r):
            raise ValueError(f"explicit matrix must be {r}x{r}")
        if np.any(nu < 0):
            raise ValueError("explicit matrix must be non-negative")
        ghost = (nu > 0) & (areas == 0)
        if np.any(ghost):
            j, i = [int(v) + 1 for v in np.argwhere(ghost)[0]]
            raise ValueError(f"ghost transition ({j},{i}): positive weight on a "
                             "measure-zero window")
        nu = nu.copy()
        nu[areas == 0] = 0.0
        return nu
    raise ValueError(f"unknown weighting policy {policy!r}")


def _coeff_bound(radius_phys, radius_internal):
    B = embedding_matrix()
    norm_inf = np.abs(np.linalg.inv(B)).sum(axis=1).max()
    return int(math.floor(norm_inf * math.sqrt(radius_phys**2 + radius_internal**2) + 1))


def _enumerate_module(bound, radius_phys, radius_internal):
    """Chunked sweep of the coefficient box, filtered by both embeddings.

    Yields (coeffs (k,4) int array, phys complex array, internal complex
    array) per chunk; exhaustive for all module points with physical
    modulus at most radius_phys and internal modulus at most
    radius_internal.
    """
    E = embedding_matrix()
    rng = np.arange(-bound, bound + 1)
    g1, g2, g3 = np.meshgrid(rng, rng, rng, indexing="ij")
    tail = np.column_stack([g1.ravel(), g2.ravel(), g3.ravel()])
    tail_f = tail.astype(float)
    base = [tail_f @ E[c, 1:] for c in range(4)]
    n = len(tail)
    coord = [np.empty(n) for _ in range(4)]
    sq = np.empty(n)
    tmp = np.empty(n)
    r2_phys = radius_phys * radius_phys + 1e-9
    r2_int = radius_internal * radius_internal + 1e-9
    for m0 in rng:
        for c in range(4):
            np.add(base[c], m0 * E[c, 0], out=coord[c])
        np.multiply(coord[0], coord[0], out=sq)
        np.multiply(coord[1], coord[1], out=tmp)
        sq += tmp
        mask = sq <= r2_phys
        np.multiply(coord[2], coord[2], out=sq)
        np.multiply(coord[3], coord[3], out=tmp)
        sq += tmp
        mask &= sq <= r2_int
        if not mask.any():
            continue
        coeffs = np.empty((int(mask.sum()), 4), dtype=np.int64)
        coeffs[:, 0] = m0
        coeffs[:, 1:] = tail[mask]
        yield (coeffs,
               coord[0][mask] + 1j * coord[1][mask],
               coord[2][mask] + 1j * coord[3][mask])


def _sorted_rows(coeffs):
    order = np.lexsort((coeffs[:, 3], coeffs[:, 2], coeffs[:, 1], coeffs[:, 0]))
    return order


def generate_all(spec, radius):
    """All component point lists out to the given physical radius.

    Enumeration sweeps a provably sufficient coefficient box once and
    splits the survivors by residue and window membership; each list is
    sorted by coefficient tuple.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    windows = [spec.shifted_window(i) for i in range(1, spec.r + 1)]
    r_int = max(w.circumradius() for w in windows) + 1e-6
    bound = _coeff_bound(radius, r_int)
    residues = {z.rho(): idx for idx, z in enumerate(spec.coset_reps)}
    buckets = [[] for _ in range(spec.r)]
    for coeffs, phys, internal in _enumerate_module(bound, radius, r_int):
        rho = coeffs.sum(axis=1) % 5
        pts = np.column_stack([internal.real, internal.imag])
        for res, idx in residues.items():
            sel = rho == res
            if not sel.any():
                continue
            inside = contains_many(windows[idx], pts[sel], spec.eps)
            if not inside.any():
                continue
            buckets[idx].append((coeffs[sel][inside], phys[sel][inside],
                                 internal[sel][inside]))
    out = []
    for idx in range(spec.r):
        if not buckets[idx]:
            out.append([])
            continue
        coeffs = np.concatenate([b[0] for b in buckets[idx]])
        phys = np.concatenate([b[1] for b in buckets[idx]])
        internal = np.concatenate([b[2] for b in buckets[idx]])
        order = _sorted_rows(coeffs)
        out.append([
            LabeledPoint(idx + 1, CycInt(*coeffs[k]), complex(phys[k]), complex(internal[k]))
            for k in order
        ])
    return out


def generate_points(spec, component, radius):
    """Point list of one component (1-based) out to the given radius."""
    if not 1 <= component <= spec.r:
        raise ValueError("component index out of range")
    return generate_all(spec, radius)[component - 1]


def translation_sets(spec, windows_ji, radius):
    """r x r lists of admissible self-similarity translations.

    Entry (j, i) holds the module points y with residue matching the coset
    z_j - Q z_i, physical modulus at most radius, and internal image inside
    the transition window (j, i); empty windows give empty lists.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    r = spec.r
    targets = {}
    nonempty = []
    r_int = 0.0
    for j in range(r):
        for i in range(r):
            w = windows_ji[j][i]
            if w.is_empty:
                continue
            zj = spec.coset_reps[j]
            zi = spec.coset_reps[i]
            targets[(j, i)] = (zj - spec.q_mult * zi).rho()
            nonempty.append((j, i))
            r_int = max(r_int, w.circumradius())
    r_int += 1e-6
    bound = _coeff_bound(radius, r_int)
    eps = abs(spec.eps)  # transition windows relax the interior-closure condition
    buckets = {key: [] for key in nonempty}
    for coeffs, phys, internal in _enumerate_module(bound, radius, r_int):
        rho = coeffs.sum(axis=1) % 5
        pts = np.column_stack([internal.real, internal.imag])
        for key in nonempty:
            sel = rho == targets[key]
            if not sel.any():
                continue
            inside = contains_many(windows_ji[key[0]][key[1]], pts[sel], eps)
            if not inside.any():
                continue
            buckets[key].append((coeffs[sel][inside], phys[sel][inside],
                                 internal[sel][inside]))
    out = [[[] for _ in range(r)] for _ in range(r)]
    for (j, i), chunks in buckets.items():
        if not chunks:
            continue
        coeffs = np.concatenate([b[0] for b in chunks])
        phys = np.concatenate([b[1] for b in chunks])
        internal = np.concatenate([b[2] for b in chunks])
        order = _sorted_rows(coeffs)
        out[j][i] = [ModulePoint(CycInt(*coeffs[k]), complex(phys[k]), complex(internal[k]))
                     for k in order]
    return out


@dataclass
class ClosureReport:
    """Outcome of checking Qx + v membership over a finite patch."""

    checked: int
    violations: list = field(default_factory=list)
    boundary_hits: int = 0


def check_selfsim_closure(spec, points, tsets, radius):
    """Verify that every admissible similarity maps the patch into the set.

    For each component i, point x with physical modulus at most radius and
    translation v in the (j, i) translation set, Q x + v must again belong
    to component j; membership is decided exactly on coefficients plus the
    window test.  Points landing within the boundary tolerance are counted
    separately rather than as violations.
    """
    report = ClosureReport(checked=0)
    eps = abs(spec.eps)
    for i in range(1, spec.r + 1):
        for x in points[i - 1]:
            if abs(x.phys) > radius:
                continue
            for j in range(1, spec.r + 1):
                window = spec.shifted_window(j)
                for v in tsets[j - 1][i - 1]:
                    y = spec.q_mult * x.coeffs + v.coeffs
                    report.checked += 1
                    if y.rho() != spec.coset_reps[j - 1].rho():
                        report.violations.append((i, j, x.coeffs, v.coeffs))
                        continue
                    u = y.internal()
                    if contains(window, (u.real, u.imag), -eps):
                        continue  # safely interior
                    if contains(window, (u.real, u.imag), eps):
                        report.boundary_hits += 1
                    else:
                        report.violations.append((i, j, x.coeffs, v.coeffs))
    return report


def _fmt(x):
    return f"{x:.12g}"


def write_points_csv(points, fileobj):
    """Write labeled points as CSV (flattened list or per-component lists)."""
    if points and isinstance(points[0], list):
        flat = [p for comp in points for p in comp]
    else:
        flat = list(points)
    flat.sort(key=lambda p: (p.component, p.coeffs.coeffs))
    fileobj.write(POINTS_CSV_HEADER + "\n")
    for p in flat:
        m0, m1, m2, m3 = p.coeffs.coeffs
        fileobj.write(",".join([
            str(p.component), str(m0), str(m1), str(m2), str(m3),
            _fmt(p.phys.real), _fmt(p.phys.imag),
            _fmt(p.internal.real), _fmt(p.internal.imag),
        ]) + "\n")


def points_csv_text(points):
    buf = io.StringIO()
    write_points_csv(points, buf)
    return buf.getvalue()
