"""Harmonic trap geometry, single-particle spectrum and characteristic scales.

Oscillator units throughout: energies in units of hbar*omega0, temperatures in
hbar*omega0/kB, with omega0 the geometric mean of the present trap frequencies.
The zero-point energy is excluded, so the ground mode sits at energy 0 and the
single-particle energies are E = sum_i omega_i * lambda_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .errors import ResourceLimitError

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_MODE_LIMIT = 10_000_000


@dataclass(frozen=True)
class TrapGeometry:
    """Trap frequencies for a 1D, 2D or 3D harmonic trap.

    ``omega`` holds one strictly positive frequency per present axis; the
    dimension is simply the number of entries.
    """

    omega: tuple[float, ...]

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        object.__setattr__(self, "omega", omega)
        if len(omega) not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(omega)} frequencies")
        if any(not (w > 0) or not math.isfinite(w) for w in omega):
            raise ValueError(f"all trap frequencies must be positive and finite, got {omega}")

    @classmethod
    def isotropic(cls, dimension: int) -> "TrapGeometry":
        if dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
        return cls((1.0,) * dimension)

    @classmethod
    def from_aspect_ratio(cls, ratio: float) -> "TrapGeometry":
        """Cylindrical 3D trap with omega_x = omega_y = 1 and omega_z = ratio."""
        if not ratio > 0:
            raise ValueError(f"aspect ratio must be positive, got {ratio}")
        return cls((1.0, 1.0, float(ratio)))

    @property
    def dimension(self) -> int:
        return len(self.omega)

    @property
    def geometric_mean_frequency(self) -> float:
        return float(np.exp(np.mean(np.log(self.omega))))

    @property
    def min_frequency(self) -> float:
        return min(self.omega)

    @property
    def max_frequency(self) -> float:
        return max(self.omega)

    def log_z1(self, beta):
        """ln Z_1(beta) from the exact geometric sum per axis.

        Accepts a scalar or an array of inverse temperatures. With the ground
        energy at zero each axis contributes -ln(1 - exp(-beta*omega)).
        """
        b = np.asarray(beta, dtype=float)
        if np.any(b <= 0):
            raise ValueError("beta must be positive")
        # -expm1 keeps precision for beta*omega << 1
        terms = np.log(-np.expm1(-np.multiply.outer(b, np.array(self.omega))))
        out = -np.sum(terms, axis=-1)
        return float(out) if np.isscalar(beta) else out


@dataclass(frozen=True)
class SpectrumCutoff:
    """Truncation of the infinite mode sum.

    Every mode with energy <= max_energy is kept; tail_tolerance is the
    relative weight allowed in the discarded tail.
    """

    max_energy: float
    tail_tolerance: float = DEFAULT_TAIL_TOL
    mode_limit: int = DEFAULT_MODE_LIMIT

    def __post_init__(self):
        if not self.max_energy > 0:
            raise ValueError(f"max_energy must be positive, got {self.max_energy}")
        if not self.tail_tolerance > 0:
            raise ValueError(f"tail_tolerance must be positive, got {self.tail_tolerance}")


@dataclass(frozen=True)
class FiniteSpectrum:
    """Explicit finite list of single-particle energies.

    Stands in for a TrapGeometry wherever only Z_1 is needed; used by the
    exhaustive small-system oracle in the tests.
    """

    energies: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.energies)
        object.__setattr__(self, "energies", e)
        if len(e) == 0:
            raise ValueError("spectrum must contain at least one level")
        if any(x < 0 for x in e):
            raise ValueError("energies must be non-negative")

    def log_z1(self, beta):
        b = np.asarray(beta, dtype=float)
        if np.any(b <= 0):
            raise ValueError("beta must be positive")
        a = -np.multiply.outer(b, np.array(self.energies))
        m = np.max(a, axis=-1)
        out = m + np.log(np.sum(np.exp(a - m[..., None]), axis=-1))
        return float(out) if np.isscalar(beta) else out


def mode_energy(geometry: TrapGeometry, quanta) -> float:
    """Energy of the mode with the given quantum numbers (ground mode -> 0)."""
    q = tuple(int(n) for n in quanta)
    if len(q) != geometry.dimension:
        raise ValueError(
            f"mode index has {len(q)} quanta but the trap has dimension {geometry.dimension}"
        )
    if any(n < 0 for n in q):
        raise ValueError(f"quantum numbers must be non-negative, got {q}")
    return float(sum(w * n for w, n in zip(geometry.omega, q)))


def _ragged_arange(counts):
    """Concatenate arange(c) for each c in counts, vectorized."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    idx = np.arange(total, dtype=np.int64)
    starts = np.repeat(np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    return idx - starts


def enumerate_modes(geometry: TrapGeometry, cutoff: SpectrumCutoff):
    """All modes with energy <= cutoff.max_energy.

    Returns (quanta, energies): an (M, d) int array and a length-M float
    array, sorted by energy ascending with ties broken lexicographically on
    the quanta tuple.
    """
    e_max = cutoff.max_energy
    w = geometry.omega
    d = geometry.dimension
    # floor with a small slack so E = max_energy exactly is kept
    kmax = [int(math.floor(e_max / wi + 1e-9)) for wi in w]

    if d == 1:
        q = np.arange(kmax[0] + 1, dtype=np.int64)[:, None]
    elif d == 2:
        ly = np.arange(kmax[1] + 1, dtype=np.int64)
        counts = np.floor((e_max - w[1] * ly) / w[0] + 1e-9).astype(np.int64) + 1
        if counts.sum() > cutoff.mode_limit:
            raise ResourceLimitError(
                f"enumeration would produce {counts.sum()} modes "
                f"(limit {cutoff.mode_limit})"
            )
        q = np.column_stack([_ragged_arange(counts), np.repeat(ly, counts)])
    else:
        blocks = []
        total = 0
        for lz in range(kmax[2] + 1):
            rem = e_max - w[2] * lz
            ly = np.arange(int(math.floor(rem / w[1] + 1e-9)) + 1, dtype=np.int64)
            counts = np.floor((rem - w[1] * ly) / w[0] + 1e-9).astype(np.int64) + 1
            total += int(counts.sum())
            if total > cutoff.mode_limit:
                raise ResourceLimitError(
                    f"enumeration exceeds the mode-count limit {cutoff.mode_limit} "
                    f"at energy cutoff {e_max}"
                )
            lx = _ragged_arange(counts)
            block = np.column_stack(
                [lx, np.repeat(ly, counts), np.full(lx.shape[0], lz, dtype=np.int64)]
            )
            blocks.append(block)
        q = np.concatenate(blocks, axis=0)

    if q.shape[0] > cutoff.mode_limit:
        raise ResourceLimitError(
            f"enumeration produced {q.shape[0]} modes (limit {cutoff.mode_limit})"
        )
    energies = q.astype(float) @ np.array(w)
    # primary key: energy; then lexicographic on (lambda_x, lambda_y, lambda_z)
    keys = tuple(q[:, i] for i in range(d - 1, -1, -1)) + (energies,)
    order = np.lexsort(keys)
    return q[order].astype(np.int32), energies[order]


def single_particle_z(geometry: TrapGeometry, beta: float) -> float:
    """ln Z_1(beta); thin named wrapper around TrapGeometry.log_z1."""
    return geometry.log_z1(beta)


def characteristic_temperature(geometry: TrapGeometry, n_atoms: int) -> float:
    """Degeneracy temperature T_c in oscillator units.

    1D: N/ln(2N); 2D: (N/zeta(2))^(1/2); 3D: (N/zeta(3))^(1/3), scaled by the
    geometric-mean frequency.  The dimension-specific formulas are defined for
    isotropic traps; the geometric-mean extension to anisotropic traps is a
    convention of this package (it only sets the reported temperature scale).
    """
    if n_atoms < 2:
        raise ValueError(f"n_atoms must be at least 2, got {n_atoms}")
    n = float(n_atoms)
    d = geometry.dimension
    if d == 1:
        tc = n / math.log(2.0 * n)
    else:
        tc = (n / float(zeta(d))) ** (1.0 / d)
    return geometry.geometric_mean_frequency * tc
