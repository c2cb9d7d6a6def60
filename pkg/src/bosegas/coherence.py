"""Real-space observables built on the occupation spectrum.

The one-body density matrix of the trapped ideal gas is diagonal in the
oscillator eigenbasis, so the normalized mirror-point correlation function
reduces to a parity-weighted mode sum along a principal axis:

    g1(-x, x) = sum_k W_k (-1)^k phi_k(xi)^2 / sum_k W_k phi_k(xi)^2,

with xi = x*sqrt(omega_axis) and W_k the occupation of axis quantum number k
marginalized over the transverse quanta (weighted by |phi(0)|^2, which kills
odd transverse modes automatically).  Coherence length and cloud width are
the FWHM of g1 and of the density cut respectively; T_ph is the temperature
where they cross.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .canonical import (
    OccupationSpectrum,
    ThermalState,
    occupation_spectrum,
)
from .errors import BracketError, GridExtentError, NumericalError
from .trap import TrapGeometry, characteristic_temperature

MAX_MODE_INDEX = 5000
_RESCALE_THRESHOLD = 1e130


@dataclass(frozen=True)
class AxisGrid:
    """Uniform symmetric grid along one principal axis, containing 0 exactly."""

    axis: int
    points: np.ndarray = field(repr=False)
    extent: float
    count: int

    @classmethod
    def symmetric(cls, extent: float, count: int = 2001, axis: int = 0) -> "AxisGrid":
        if not extent > 0:
            raise ValueError(f"extent must be positive, got {extent}")
        if count < 3 or count % 2 == 0:
            raise ValueError(f"count must be an odd integer >= 3, got {count}")
        half = np.linspace(0.0, float(extent), (count + 1) // 2)
        points = np.concatenate([-half[:0:-1], half])  # exact (-x, x) pairs
        return cls(axis=axis, points=points, extent=float(extent), count=count)

    @property
    def center(self) -> int:
        return self.count // 2


@dataclass(frozen=True)
class CorrelationProfile:
    """g1(-x, x) and density along one axis, with FWHM-derived lengths."""

    grid: AxisGrid
    g1: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    coherence_length: float
    cloud_width: float


def _mode_function_iter(k_max: int, x: np.ndarray):
    """Yield phi_0..phi_kmax at the points x via the normalized three-term
    recurrence, with a per-point log-scale carried separately so the Gaussian
    seed cannot underflow prematurely at large |x|."""
    x = np.asarray(x, dtype=float)
    scale = -0.5 * x * x  # log of the factored-out envelope
    escale = np.exp(scale)
    u = np.full_like(x, math.pi ** -0.25)
    u_prev = np.zeros_like(x)
    yield u * escale
    for k in range(k_max):
        u_next = x * math.sqrt(2.0 / (k + 1)) * u - math.sqrt(k / (k + 1)) * u_prev
        u_prev, u = u, u_next
        if np.max(np.abs(u)) > _RESCALE_THRESHOLD:
            big = np.abs(u) > _RESCALE_THRESHOLD
            shift = np.where(big, np.log(np.abs(np.where(big, u, 1.0))), 0.0)
            damp = np.exp(-shift)
            u = u * damp
            u_prev = u_prev * damp
            scale = scale + shift
            escale = np.exp(scale)
        yield u * escale


def mode_function(k: int, x):
    """Normalized 1D harmonic-oscillator eigenfunction phi_k(x).

    phi_0 = pi^(-1/4) exp(-x^2/2);
    phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1}.
    """
    if k < 0 or k > MAX_MODE_INDEX:
        raise ValueError(f"mode index must be in [0, {MAX_MODE_INDEX}], got {k}")
    scalar = np.isscalar(x)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    for i, phi in enumerate(_mode_function_iter(k, arr)):
        if i == k:
            return float(phi[0]) if scalar else phi
    raise AssertionError("unreachable")


def fwhm(values, grid: AxisGrid, curve: str = "curve") -> float:
    """Full width at half maximum of a curve peaked at the grid center.

    The two half-maximum crossings nearest the center are located by linear
    interpolation between bracketing grid points.
    """
    v = np.asarray(values, dtype=float)
    c = grid.center
    vmax = v[c]
    if vmax < np.max(v) * (1.0 - 1e-9):
        raise ValueError(f"{curve} is not peaked at the grid center")
    half = 0.5 * vmax
    x = grid.points

    def crossing(indices):
        prev = c
        for i in indices:
            if v[i] < half:
                frac = (v[prev] - half) / (v[prev] - v[i])
                return x[prev] + frac * (x[i] - x[prev])
            prev = i
        raise GridExtentError(
            f"{curve} never falls below half maximum within extent {grid.extent:g}",
            curve=curve,
        )

    right = crossing(range(c + 1, grid.count))
    left = crossing(range(c - 1, -1, -1))
    return float(right - left)


def _phi_sq_at_zero(k_max: int) -> np.ndarray:
    """phi_k(0)^2 for k = 0..k_max (zero for odd k)."""
    out = np.empty(k_max + 1)
    val = 1.0 / math.sqrt(math.pi)  # phi_0(0)^2
    for k in range(0, k_max + 1, 2):
        out[k] = val
        if k + 1 <= k_max:
            out[k + 1] = 0.0
        # phi_{k+2}(0) = -sqrt((k+1)/(k+2)) phi_k(0)
        val *= (k + 1) / (k + 2)
    return out


def g1_curve(
    spectrum: OccupationSpectrum,
    geometry: TrapGeometry,
    grid: AxisGrid,
    min_captured_fraction: float = 1.0 - 1e-6,
):
    """(g1, density) sampled on the grid, without the FWHM extraction."""
    axis = grid.axis
    if axis >= geometry.dimension:
        raise ValueError(
            f"axis {axis} not present in a {geometry.dimension}-dimensional trap"
        )
    if spectrum.captured_fraction < min_captured_fraction:
        raise ValueError(
            f"spectrum captures only {spectrum.captured_fraction:.9f} of the atoms; "
            f"rebuild with a larger cutoff"
        )
    omega_axis = geometry.omega[axis]
    k_max = int(spectrum.quanta[:, axis].max())

    # Marginal weight per axis quantum number: transverse modes enter through
    # |phi(0)|^2 of their own axis (odd ones vanish there).
    weight = spectrum.occupations.copy()
    for other in range(geometry.dimension):
        if other == axis:
            continue
        table = _phi_sq_at_zero(int(spectrum.quanta[:, other].max()))
        weight = weight * math.sqrt(geometry.omega[other]) * table[spectrum.quanta[:, other]]
    w = np.bincount(spectrum.quanta[:, axis], weights=weight, minlength=k_max + 1)

    xi = grid.points * math.sqrt(omega_axis)
    num = np.zeros_like(xi)
    den = np.zeros_like(xi)
    sign = 1.0
    for k, phi in enumerate(_mode_function_iter(k_max, xi)):
        contrib = w[k] * phi * phi
        den += contrib
        num += sign * contrib
        sign = -sign

    density = math.sqrt(omega_axis) * den
    with np.errstate(invalid="ignore", divide="ignore"):
        g1 = np.where(den > 0.0, num / den, 0.0)
    if np.max(np.abs(g1)) > 1.0 + 1e-12:
        raise NumericalError(f"|g1| exceeded 1 by {np.max(np.abs(g1)) - 1.0:.3e}")
    return g1, density


def g1_profile(
    spectrum: OccupationSpectrum,
    geometry: TrapGeometry,
    grid: AxisGrid,
    min_captured_fraction: float = 1.0 - 1e-6,
) -> CorrelationProfile:
    """Mirror-point g1 and density along the grid axis through the trap center."""
    g1, density = g1_curve(spectrum, geometry, grid, min_captured_fraction)
    coherence_length = fwhm(g1, grid, curve="g1")
    cloud_width = fwhm(density, grid, curve="density")
    return CorrelationProfile(
        grid=grid,
        g1=g1,
        density=density,
        coherence_length=coherence_length,
        cloud_width=cloud_width,
    )


def default_extent(geometry: TrapGeometry, temperature: float, axis: int) -> float:
    """1.5x the thermal cloud radius along the axis (floored near T = 0)."""
    omega_axis = geometry.omega[axis]
    radius = max(math.sqrt(2.0 * temperature / omega_axis), 3.0)
    return 1.5 * radius / math.sqrt(omega_axis)


def coherence_vs_width(
    geometry: TrapGeometry,
    state: ThermalState,
    axis: int | None = None,
    grid_count: int = 1201,
    capture_tol: float = 1e-8,
    max_widenings: int = 5,
):
    """(coherence_length, cloud_width, N_0) at one temperature.

    The grid is widened automatically when a curve has no half-maximum
    crossing; if g1 still has none after the last widening the gas is treated
    as fully coherent (infinite coherence length).
    """
    if axis is None:
        axis = int(np.argmin(geometry.omega))
    spectrum = occupation_spectrum(
        geometry,
        state,
        min_captured_fraction=1.0 - 100.0 * capture_tol,
        tol=capture_tol,
    )
    extent = default_extent(geometry, state.temperature, axis)
    for attempt in range(max_widenings + 1):
        grid = AxisGrid.symmetric(extent, grid_count, axis=axis)
        try:
            profile = g1_profile(spectrum, geometry, grid)
        except GridExtentError as err:
            if err.curve == "g1" and attempt == max_widenings:
                return math.inf, _cloud_width_only(spectrum, geometry, grid), spectrum
            extent *= 2.0
            continue
        return profile.coherence_length, profile.cloud_width, spectrum
    raise GridExtentError(
        f"no half-maximum crossing after {max_widenings} grid widenings "
        f"(final extent {extent:g})"
    )


def _cloud_width_only(spectrum, geometry, grid):
    axis = grid.axis
    weight = spectrum.occupations.copy()
    for other in range(geometry.dimension):
        if other == axis:
            continue
        table = _phi_sq_at_zero(int(spectrum.quanta[:, other].max()))
        weight = weight * table[spectrum.quanta[:, other]]
    k_max = int(spectrum.quanta[:, axis].max())
    w = np.bincount(spectrum.quanta[:, axis], weights=weight, minlength=k_max + 1)
    xi = grid.points * math.sqrt(geometry.omega[axis])
    den = np.zeros_like(xi)
    for k, phi in enumerate(_mode_function_iter(k_max, xi)):
        den += w[k] * phi * phi
    return fwhm(den, grid, curve="density")


def find_tph(
    geometry: TrapGeometry,
    n_atoms: int,
    axis: int | None = None,
    t_rel_tol: float = 5e-3,
    grid_count: int = 1201,
) -> tuple[float, float]:
    """Crossover temperature where coherence length equals cloud width.

    Below T_ph the coherence length exceeds the cloud size (true condensate);
    above it the order is reversed (quasicondensate).  Returns (T_ph, N_0 at
    T_ph).  Canonical statistics only.
    """
    if n_atoms < 2:
        raise ValueError(f"n_atoms must be at least 2, got {n_atoms}")
    tc = characteristic_temperature(geometry, n_atoms)

    def f(t):
        l_phi, width, spectrum = coherence_vs_width(
            geometry, ThermalState(n_atoms, t), axis=axis, grid_count=grid_count
        )
        return (l_phi - width if math.isfinite(l_phi) else math.inf), spectrum

    # start the bracket modestly above T_c (the crossing sits below it) and
    # expand upward if needed; very high endpoints are expensive in 3D
    t_lo, t_hi = 0.05 * tc, 1.2 * tc
    f_lo, _ = f(t_lo)
    f_hi, _ = f(t_hi)
    while f_hi > 0 and t_hi < 4.0 * tc:
        t_hi *= 1.4
        f_hi, _ = f(t_hi)
    if not (f_lo > 0 > f_hi):
        # scan for a sign change before giving up
        ts = np.geomspace(t_lo, t_hi, 12)
        fs = [f(t)[0] for t in ts]
        changes = [i for i in range(len(ts) - 1) if fs[i] > 0 > fs[i + 1]]
        if not changes:
            raise BracketError(
                f"coherence length never crosses the cloud width in "
                f"[{t_lo:g}, {t_hi:g}]",
                samples=list(zip(ts.tolist(), fs)),
            )
        if len(changes) > 1:
            warnings.warn(
                f"multiple coherence/width crossings detected at T = "
                f"{[ts[i] for i in changes]}; returning the smallest",
                stacklevel=2,
            )
        t_lo, t_hi = float(ts[changes[0]]), float(ts[changes[0] + 1])

    spectrum_mid = None
    while (t_hi - t_lo) > t_rel_tol * 0.5 * (t_lo + t_hi):
        t_mid = 0.5 * (t_lo + t_hi)
        f_mid, spectrum_mid = f(t_mid)
        if f_mid > 0:
            t_lo = t_mid
        else:
            t_hi = t_mid
    t_ph = 0.5 * (t_lo + t_hi)
    if spectrum_mid is None:
        _, _, spectrum_mid = coherence_vs_width(
            geometry, ThermalState(n_atoms, t_ph), axis=axis, grid_count=grid_count
        )
    return t_ph, spectrum_mid.condensate_occupation
