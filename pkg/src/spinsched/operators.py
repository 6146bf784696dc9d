"""Dense operator machinery for small spin-1/2 systems.

Basis convention used throughout the package: the Zeeman product basis in
system spin order, built with Kronecker products so spin 0 owns the most
significant bit of the basis index.  Bit value 0 means "up" (I_z eigenvalue
+1/2), bit value 1 means "down" (-1/2).  Hamiltonians are Hermitian matrices
in angular frequency units (rad/s); propagators are exp(-i H t).
"""
from __future__ import annotations

import numpy as np

IX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
IY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
IZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
IE = np.eye(2, dtype=complex)

_SINGLE = {"x": IX, "y": IY, "z": IZ}


def single_spin_op(n_spins: int, site: int, axis: str) -> np.ndarray:
    """I_axis acting on one spin, embedded in the full product space."""
    op = np.array([[1.0 + 0j]])
    for k in range(n_spins):
        op = np.kron(op, _SINGLE[axis] if k == site else IE)
    return op


def collective_op(n_spins: int, sites, axis: str) -> np.ndarray:
    """Sum of I_axis over the given spin indices."""
    total = np.zeros((2**n_spins, 2**n_spins), dtype=complex)
    for s in sites:
        total += single_spin_op(n_spins, s, axis)
    return total


def state_bits(n_spins: int) -> np.ndarray:
    """(2^n, n) array of basis-state bits, spin 0 in column 0."""
    idx = np.arange(2**n_spins)
    return (idx[:, None] >> (n_spins - 1 - np.arange(n_spins))) & 1


def zeeman_m(n_spins: int) -> np.ndarray:
    """Per-basis-state I_z eigenvalues summed over spins (units of hbar)."""
    return 0.5 * n_spins - state_bits(n_spins).sum(axis=1)


def spin_m(n_spins: int) -> np.ndarray:
    """(2^n, n) array of per-spin m values (+1/2 or -1/2) per basis state."""
    return 0.5 - state_bits(n_spins)


def rotation(n_spins: int, sites, axis: str, angle: float) -> np.ndarray:
    """exp(-i * angle * sum_site I_axis), assembled spin by spin.

    Single-spin rotations factorize over the product space, so this is exact
    and cheap even for several target spins.
    """
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    if axis == "x":
        r = np.array([[c, -1j * s], [-1j * s, c]])
    elif axis == "y":
        r = np.array([[c, -s], [s, c]])
    else:
        r = np.array([[np.exp(-1j * angle / 2), 0], [0, np.exp(1j * angle / 2)]])
    op = np.array([[1.0 + 0j]])
    sites = set(sites)
    for k in range(n_spins):
        op = np.kron(op, r if k in sites else IE)
    return op


def apply_pi_left(u: np.ndarray, n_spins: int, sites, axis: str) -> np.ndarray:
    """Left-multiply u by exp(-i*pi*sum I_axis) over the target spins.

    A pi rotation about x or y is a signed basis permutation, so this costs
    O(4^n) instead of a dense matmul:
      exp(-i pi I_x) = [[0, -i], [-i, 0]]
      exp(-i pi I_y) = [[0, -1], [1,  0]]
    """
    d = u.shape[0]
    mask = 0
    for s in sites:
        mask |= 1 << (n_spins - 1 - s)
    rows = np.arange(d)
    src = rows ^ mask
    if axis == "x":
        phase = (-1j) ** len(set(sites))
        return phase * u[src]
    # y: destination rows with the target bit set pick up +1, cleared bit -1
    sign = np.ones(d)
    for s in set(sites):
        bit = (rows >> (n_spins - 1 - s)) & 1
        sign *= np.where(bit == 1, 1.0, -1.0)
    return sign[:, None] * u[src]


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i h t) for Hermitian h via spectral decomposition.

    Diagonal h (the weak-coupling case) short-circuits to an elementwise
    exponential, which is exact.
    """
    d = np.diagonal(h)
    if np.count_nonzero(h - np.diag(d)) == 0:
        return np.diag(np.exp(-1j * d.real * t))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dag U - 1|, elementwise."""
    d = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.max(np.abs(d)))


def global_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """max elementwise |v - e^{i phi} u| minimized over the global phase."""
    tr = np.trace(u.conj().T @ v)
    phi = np.angle(tr) if abs(tr) > 0 else 0.0
    return float(np.max(np.abs(v - np.exp(1j * phi) * u)))


def write_matrix(path, m: np.ndarray) -> None:
    """Export a complex matrix as text: one row per line, 're,im' per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(m):
            fh.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entries = [tuple(float(p) for p in tok.split(",")) for tok in line.split()]
            rows.append([complex(re, im) for re, im in entries])
    return np.array(rows, dtype=complex)
