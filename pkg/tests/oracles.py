"""Independent brute-force references for the small-system tests.

Everything here enumerates boson occupation configurations explicitly, so it
shares no code path with the recursion-based implementation it checks.
"""

import itertools
import math


def boson_states(n_levels, n_atoms):
    """All N-boson Fock states over the given levels, as occupation tuples."""
    for combo in itertools.combinations_with_replacement(range(n_levels), n_atoms):
        occ = [0] * n_levels
        for idx in combo:
            occ[idx] += 1
        yield tuple(occ)


def partition_function(energies, beta, n_atoms):
    return sum(
        math.exp(-beta * sum(n * e for n, e in zip(occ, energies)))
        for occ in boson_states(len(energies), n_atoms)
    )


def occupancy_distribution(energies, beta, n_atoms, level):
    """P(n|N) for the given level by direct state enumeration."""
    z = 0.0
    weights = [0.0] * (n_atoms + 1)
    for occ in boson_states(len(energies), n_atoms):
        w = math.exp(-beta * sum(n * e for n, e in zip(occ, energies)))
        z += w
        weights[occ[level]] += w
    return [w / z for w in weights]


def mean_occupation(energies, beta, n_atoms, level):
    p = occupancy_distribution(energies, beta, n_atoms, level)
    return sum(n * pn for n, pn in enumerate(p))
