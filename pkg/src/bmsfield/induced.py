"""Wave functions on momentum orbits and the induced group action.

The mass hyperboloid and the forward light cone are sampled on product grids:
a radial parameter (boost rapidity on the hyperboloid, log energy on the
cone) times sphere directions. Quadrature weights discretize the invariant
measure in those parameters with trapezoid rules; the radial and polar grids
include their endpoints so transported nodes can be interpolated all the way
to the window edge. A group element acts by a phase from the translation
pairing together with node transport of the Lorentz part, read back through
separable linear interpolation on the parameter grid. Transport past the
sampled window is an explicit error by default; a guarded zero fill is
available for fields that vanish at the window boundary.
"""

from __future__ import annotations

import math

import numpy as np

from .bmsgroup import SL2C, BMSElement
from .errors import ConstraintError, CoverageError, DomainError, ShapeError
from .sphere import SphereFunction
from .supermomenta import (
    momentum_act_matrix,
    pair,
    supermomentum_from_four_momentum,
)
from .whitenoise.basis import HermiteSeries
from .whitenoise.operators import gaussian_norm, project_Pi_V
from .whitenoise.sampling import hermite_values

__all__ = [
    "OrbitQuadrature",
    "InducedField",
    "ReducedWaveFunction",
    "build_orbit",
    "field_from_function",
    "smooth_bump_field",
    "induced_act",
    "orbit_norm",
    "boost_norm_drift",
    "reduce_covariant",
]

_ETA = np.array([1.0, -1.0, -1.0, -1.0])


def _trapezoid_weights(grid):
    if len(grid) == 1:
        return np.array([1.0])
    h = grid[1] - grid[0]
    w = np.full(len(grid), h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


class OrbitQuadrature:
    """Product-grid sampling of a momentum orbit with invariant-measure weights.

    Massive orbits carry nodes m (cosh chi, sinh chi nhat) with weights for
    sinh^2(chi) dchi dOmega; massless orbits carry E (1, nhat) with E log
    spaced around the scale and weights for E^2 du dOmega, u = log(E/scale).
    Components follow the slot order of the supermomentum extraction, so a
    node fed to supermomentum_from_four_momentum lands on the orbit it names.
    Boundary rows (chi = 0, the poles) get zero weight from the density but
    stay in the grid for interpolation coverage.
    """

    __slots__ = (
        "kind",
        "mass_scale",
        "chi_max",
        "n_chi",
        "n_sphere",
        "radial_values",
        "theta_values",
        "phi_values",
        "nodes",
        "weights",
    )

    def __init__(self, kind, mass_scale, chi_max, n_chi, n_sphere):
        if kind not in ("massive", "massless"):
            raise DomainError(f"kind must be 'massive' or 'massless', got {kind!r}")
        mass_scale = float(mass_scale)
        chi_max = float(chi_max)
        if mass_scale <= 0.0:
            raise DomainError(f"orbit needs a positive mass or energy scale, got {mass_scale}")
        degenerate = kind == "massive" and chi_max == 0.0
        if kind == "massless" and chi_max <= 0.0:
            raise DomainError("massless orbit needs a positive log-energy half width")
        if chi_max < 0.0:
            raise DomainError(f"rapidity window must be nonnegative, got {chi_max}")
        if not degenerate:
            if int(n_chi) != n_chi or int(n_sphere) != n_sphere:
                raise DomainError("grid counts must be integers")
            n_chi, n_sphere = int(n_chi), int(n_sphere)
            if n_chi < 2:
                raise DomainError(f"need at least 2 radial points, got {n_chi}")
            if n_sphere < 3:
                raise DomainError(f"need at least 3 polar points, got {n_sphere}")

        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "mass_scale", mass_scale)
        object.__setattr__(self, "chi_max", chi_max)
        object.__setattr__(self, "n_chi", int(n_chi))
        object.__setattr__(self, "n_sphere", int(n_sphere))

        if degenerate:
            radial = np.zeros(1)
            theta = np.zeros(1)
            phi = np.zeros(1)
            nodes = np.array([[mass_scale, 0.0, 0.0, 0.0]])
            weights = np.array([1.0])
        else:
            if kind == "massive":
                radial = np.linspace(0.0, chi_max, int(n_chi))
                density = np.sinh(radial) ** 2
                p0 = mass_scale * np.cosh(radial)
                pr = mass_scale * np.sinh(radial)
            else:
                radial = np.linspace(-chi_max, chi_max, int(n_chi))
                energy = mass_scale * np.exp(radial)
                density = energy**2
                p0 = energy
                pr = energy
            theta = np.linspace(0.0, math.pi, int(n_sphere))
            n_phi = 2 * int(n_sphere)
            phi = 2.0 * math.pi * np.arange(n_phi) / n_phi

            st, ct = np.sin(theta), np.cos(theta)
            direction = np.empty((len(theta), n_phi, 3))
            direction[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
            direction[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
            direction[:, :, 2] = ct[:, None]

            nodes = np.empty((len(radial), len(theta), n_phi, 4))
            nodes[..., 0] = p0[:, None, None]
            nodes[..., 1:] = pr[:, None, None, None] * direction[None, :, :, :]
            nodes = nodes.reshape(-1, 4)

            w_radial = _trapezoid_weights(radial) * density
            w_theta = _trapezoid_weights(theta) * st
            w_phi = np.full(n_phi, 2.0 * math.pi / n_phi)
            weights = (
                w_radial[:, None, None] * w_theta[None, :, None] * w_phi[None, None, :]
            ).reshape(-1)

        for name, arr in (
            ("radial_values", radial),
            ("theta_values", theta),
            ("phi_values", phi),
            ("nodes", nodes),
            ("weights", weights),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __setattr__(self, name, value):
        raise AttributeError("OrbitQuadrature is immutable")

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def grid_shape(self):
        return (len(self.radial_values), len(self.theta_values), len(self.phi_values))

    def mass_defect(self) -> float:
        """Largest deviation of eta(p, p) from m^2 (or 0) over the nodes."""
        form = np.einsum("ij,j,ij->i", self.nodes, _ETA, self.nodes)
        target = self.mass_scale**2 if self.kind == "massive" else 0.0
        return float(np.max(np.abs(form - target)))

    def __repr__(self):
        return (
            f"OrbitQuadrature(kind={self.kind!r}, scale={self.mass_scale}, "
            f"grid={self.grid_shape})"
        )


def build_orbit(kind, m, chi_max, n_chi, n_sphere) -> OrbitQuadrature:
    """Sample the orbit of mass (or energy scale) m out to rapidity chi_max.

    n_chi radial points, n_sphere polar points and 2 n_sphere azimuthal
    points; chi_max = 0 on the massive orbit collapses to the single rest
    node with unit weight.
    """
    return OrbitQuadrature(kind, m, chi_max, n_chi, n_sphere)


class InducedField:
    """Values over the nodes of an orbit quadrature."""

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.asarray(values)
        if values.ndim != 1:
            raise ShapeError(f"field values must be a flat vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        values = values.astype(complex if values.dtype.kind == "c" else float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("InducedField is immutable")

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"InducedField(n={len(self.values)}, dtype={self.values.dtype})"


def field_from_function(orbit: OrbitQuadrature, fn) -> InducedField:
    """Evaluate fn on the (n_nodes, 4) node array and wrap the result."""
    values = np.asarray(fn(orbit.nodes))
    if values.shape != (orbit.n_nodes,):
        raise ShapeError(
            f"function returned shape {values.shape}, expected ({orbit.n_nodes},)"
        )
    return InducedField(values)


def smooth_bump_field(orbit: OrbitQuadrature, center, width, tilt=0.3) -> InducedField:
    """Gaussian bump in the radial parameter with a smooth direction factor.

    The direction factor 1 + tilt p_2/p_0 is smooth on the whole orbit, so
    the field is as regular as the interpolation error analysis assumes;
    choose center and width so the bump dies out before the window edge.
    """
    shape = orbit.grid_shape
    r = np.repeat(orbit.radial_values, shape[1] * shape[2])
    radial = np.exp(-(((r - center) / width) ** 2))
    angular = 1.0 + tilt * orbit.nodes[:, 2] / orbit.nodes[:, 0]
    return InducedField(radial * angular)


def orbit_norm(phi: InducedField, orbit: OrbitQuadrature) -> float:
    """Quadrature sum of |values|^2 times the invariant-measure weights."""
    _check_field(phi, orbit)
    return float(np.sum(np.abs(phi.values) ** 2 * orbit.weights))


def _check_field(phi, orbit):
    if len(phi.values) != orbit.n_nodes:
        raise ShapeError(
            f"field has {len(phi.values)} values, orbit has {orbit.n_nodes} nodes"
        )


def _node_parameters(orbit, q):
    """Radial/polar/azimuthal parameters of transported nodes, plus escape masks."""
    spatial = np.linalg.norm(q[:, 1:], axis=1)
    if orbit.kind == "massive":
        r = np.arcsinh(spatial / orbit.mass_scale)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(q[:, 0] > 0.0, np.log(q[:, 0] / orbit.mass_scale), -np.inf)
    safe = np.where(spatial > 0.0, spatial, 1.0)
    cos_t = np.clip(np.where(spatial > 0.0, q[:, 3] / safe, 1.0), -1.0, 1.0)
    t = np.arccos(cos_t)
    p = np.where(spatial > 0.0, np.arctan2(q[:, 2], q[:, 1]), 0.0) % (2.0 * math.pi)

    grid = orbit.radial_values
    slack = 1e-10 * (1.0 + float(np.max(np.abs(grid))))
    low = r < grid[0] - slack
    high = r > grid[-1] + slack
    return r, t, p, low, high


def _axis_lookup(grid, x):
    if len(grid) == 1:
        zero = np.zeros(len(x), dtype=int)
        return zero, zero, np.zeros(len(x))
    i = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2)
    frac = np.clip((x - grid[i]) / (grid[i + 1] - grid[i]), 0.0, 1.0)
    return i, i + 1, frac


def _interpolate(orbit, values, r, t, p):
    v = values.reshape(orbit.grid_shape)
    ir0, ir1, fr = _axis_lookup(orbit.radial_values, np.clip(r, orbit.radial_values[0], orbit.radial_values[-1]))
    it0, it1, ft = _axis_lookup(orbit.theta_values, t)
    n_phi = len(orbit.phi_values)
    h_phi = 2.0 * math.pi / n_phi
    k = np.floor(p / h_phi).astype(int)
    fp = p / h_phi - k
    ip0 = k % n_phi
    ip1 = (k + 1) % n_phi

    def corner(ir, it):
        return v[ir, it, ip0] * (1.0 - fp) + v[ir, it, ip1] * fp

    low = corner(ir0, it0) * (1.0 - ft) + corner(ir0, it1) * ft
    high = corner(ir1, it0) * (1.0 - ft) + corner(ir1, it1) * ft
    return low * (1.0 - fr) + high * fr


def induced_act(g: BMSElement, phi: InducedField, orbit: OrbitQuadrature, escape="error") -> InducedField:
    """Phase times transported field: value at p is e^{i pair(p, f)} Phi(q).

    q is the node moved by the inverse Lorentz part through the exact
    momentum transport; the supertranslation enters only through its l <= 1
    coefficients, so proper supertranslations contribute no phase at all.
    escape="error" raises when any q leaves the sampled radial window;
    escape="zero" fills such nodes with 0, but only if the field vanishes on
    the boundary shells the transport crossed (no silent extrapolation).
    """
    _check_field(phi, orbit)
    if escape not in ("error", "zero"):
        raise DomainError(f"escape policy must be 'error' or 'zero', got {escape!r}")

    kappa = np.array(
        [
            pair(supermomentum_from_four_momentum(e, g.f.L_max), g.f)
            for e in np.eye(4)
        ]
    )
    phases = orbit.nodes @ kappa

    transport = momentum_act_matrix(g.lam.inv())
    if np.max(np.abs(transport - np.eye(4))) <= 1e-14:
        moved = phi.values
    else:
        q = orbit.nodes @ transport.T
        r, t, p, low, high = _node_parameters(orbit, q)
        escaped = low | high
        if np.any(escaped):
            indices = np.nonzero(escaped)[0]
            if escape == "error":
                raise CoverageError(
                    f"{len(indices)} of {orbit.n_nodes} transported nodes left the "
                    f"sampled radial window [{orbit.radial_values[0]:.6g}, "
                    f"{orbit.radial_values[-1]:.6g}]; first escapes: {indices[:8].tolist()}",
                    indices,
                )
            shells = phi.values.reshape(orbit.grid_shape)
            quiet = 1e-10 * (1.0 + float(np.max(np.abs(phi.values))))
            loud = []
            if np.any(low) and float(np.max(np.abs(shells[0]))) > quiet:
                loud.append("lower")
            if np.any(high) and float(np.max(np.abs(shells[-1]))) > quiet:
                loud.append("upper")
            if loud:
                raise CoverageError(
                    f"zero fill refused: field does not vanish on the "
                    f"{' and '.join(loud)} window boundary crossed by "
                    f"{len(indices)} nodes",
                    indices,
                )
        moved = _interpolate(orbit, phi.values, r, t, p)
        if np.any(escaped):
            moved = moved.copy()
            moved[escaped] = 0.0

    if np.any(phases):
        return InducedField(moved * np.exp(1j * phases))
    return InducedField(moved)


def boost_norm_drift(
    rapidity=0.2,
    chi_max=2.8,
    n_chi=96,
    n_sphere=13,
    refine=1,
    mass=1.0,
    center=1.2,
    width=0.28,
    tilt=0.3,
    L_max=2,
):
    """Relative orbit-norm drift of a boosted bump, per refinement level.

    Level j doubles both grid counts j times. The drift is dominated by the
    linear interpolation error, so one refinement should at least halve it.
    """
    g = BMSElement(SL2C.boost_z(rapidity), SphereFunction(L_max))
    drifts = []
    for level in range(refine + 1):
        orbit = build_orbit("massive", mass, chi_max, n_chi << level, n_sphere << level)
        field = smooth_bump_field(orbit, center, width, tilt)
        before = orbit_norm(field, orbit)
        after = orbit_norm(induced_act(g, field, orbit, escape="zero"), orbit)
        drifts.append(abs(after - before) / before)
    return drifts


class ReducedWaveFunction:
    """Hermite polynomial in the four momentum components, with Gaussian weight.

    polynomial(points) evaluates F(p) = sum c_n prod He_{n_i}(p_i); calling
    the object multiplies by exp(-weight_exponent * sum p_mu^2), the
    Euclidean square regardless of metric signature.
    """

    __slots__ = ("exponents", "coeffs", "weight_exponent")

    def __init__(self, exponents, coeffs, weight_exponent):
        exponents = np.asarray(exponents, dtype=int).reshape(-1, 4)
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (exponents.shape[0],):
            raise ShapeError(
                f"{exponents.shape[0]} exponent rows but {coeffs.shape} coefficients"
            )
        keep = coeffs != 0
        exponents = exponents[keep]
        coeffs = coeffs[keep]
        exponents.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "weight_exponent", float(weight_exponent))

    def __setattr__(self, name, value):
        raise AttributeError("ReducedWaveFunction is immutable")

    def polynomial(self, points):
        points = np.asarray(points, dtype=float)
        if points.shape[-1:] != (4,):
            raise ShapeError(f"points need a trailing axis of 4, got shape {points.shape}")
        flat = points.reshape(-1, 4)
        out_dtype = complex if np.iscomplexobj(self.coeffs) else float
        if len(self.coeffs) == 0:
            acc = np.zeros(flat.shape[0], dtype=out_dtype)
        else:
            table = hermite_values(int(self.exponents.max()), flat)
            factors = (
                table[self.exponents[:, 0], :, 0]
                * table[self.exponents[:, 1], :, 1]
                * table[self.exponents[:, 2], :, 2]
                * table[self.exponents[:, 3], :, 3]
            )
            acc = self.coeffs @ factors
        if points.ndim == 1:
            return acc.dtype.type(acc[0])
        return acc.reshape(points.shape[:-1])

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        weight = np.exp(-self.weight_exponent * np.sum(points**2, axis=-1))
        return self.polynomial(points) * weight

    def on_orbit(self, orbit: OrbitQuadrature) -> InducedField:
        return InducedField(self(orbit.nodes))


def reduce_covariant(psi: HermiteSeries, weight_exponent=0.25) -> ReducedWaveFunction:
    """Momentum-space reading of a translation-supported chaos series.

    Requires the series to have no weight on proper-supertranslation slots;
    the violation report carries the Gaussian norm of the offending part per
    direction. The returned handle evaluates the bare polynomial and its
    exp(-weight_exponent |p|^2)-damped version; weight_exponent 1 recovers
    the undivided Gaussian normalization.
    """
    dirs = psi.dirs
    t4 = dirs.t4_indices
    kept = project_Pi_V(psi, t4)
    residual = psi - kept
    total = gaussian_norm(residual)
    if total > 0.0:
        basis = psi.basis
        norms = {}
        for i in dirs.st_indices:
            mask = basis.exponents[:, i] > 0
            norms[dirs.directions[i]] = float(
                math.sqrt(np.sum(np.abs(psi.coeffs[mask]) ** 2 * basis.weights[mask]))
            )
        raise ConstraintError(
            f"series has Gaussian weight {total:.3e} outside the translation "
            f"slots; per-direction residual norms: {norms}",
            residual_norms=norms,
        )
    exponents = kept.basis.exponents[:, :4]
    return ReducedWaveFunction(exponents, kept.coeffs, weight_exponent)
