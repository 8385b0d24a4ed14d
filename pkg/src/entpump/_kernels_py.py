"""Pure numpy implementations of the inner-loop kernels.

Used when the compiled extension is unavailable or ``ENTPUMP_BACKEND=python``.
Signatures match ``entpump._kernels`` exactly.
"""

from __future__ import annotations

import numpy as np


def apply_gate(rho, u, targets, n):
    """Return ``U rho U^dagger`` for a ``k``-qubit unitary ``u`` on ``targets``."""
    k = len(targets)
    t = np.asarray(rho, dtype=complex).reshape((2,) * (2 * n))
    ut = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    rows = list(targets)
    cols = [n + q for q in targets]
    # Row side: contract u's input axes with the target row axes.
    t = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), rows))
    t = np.moveaxis(t, list(range(k)), rows)
    t = np.tensordot(ut.conj(), t, axes=(list(range(k, 2 * k)), cols))
    t = np.moveaxis(t, list(range(k)), cols)
    d = 1 << n
    return np.ascontiguousarray(t.reshape(d, d))


def depolarize(rho, targets, lam, n):
    """``(1-lam) rho + lam * (I/2^k on targets) x Tr_targets(rho)``."""
    rho = np.asarray(rho, dtype=complex)
    if lam == 0.0:
        return rho.copy()
    k = len(targets)
    t = rho.reshape((2,) * (2 * n))
    rest = [q for q in range(n) if q not in targets]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEF"
    row = [letters[q] for q in range(n)]
    col = [letters[n + q] for q in range(n)]
    traced_col = list(col)
    for q in targets:
        traced_col[q] = row[q]
    red_sub = "".join(row[q] for q in rest) + "".join(col[q] for q in rest)
    red = np.einsum("".join(row) + "".join(traced_col) + "->" + red_sub, t)
    ident = np.eye(1 << k, dtype=complex).reshape((2,) * (2 * k)) / (1 << k)
    id_sub = "".join(row[q] for q in targets) + "".join(col[q] for q in targets)
    mixed = np.einsum(f"{id_sub},{red_sub}->{''.join(row)}{''.join(col)}", ident, red)
    d = 1 << n
    return (1.0 - lam) * rho + lam * mixed.reshape(d, d)


def lindblad_rhs(rho, h, jumps, rates):
    out = -1j * (h @ rho - rho @ h)
    for c, g in zip(jumps, rates):
        if g == 0.0:
            continue
        cd = c.conj().T
        cdc = cd @ c
        out += g * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return out


def lindblad_rk4(rho0, h, jumps, rates, dt, nsteps):
    """Fixed-step RK4 trajectory; returns an array of ``nsteps + 1`` density matrices.

    Each step is re-Hermitized. Raises FloatingPointError on non-finite values.
    """
    rho = np.array(rho0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    jumps = [np.asarray(c, dtype=complex) for c in jumps]
    rates = [float(g) for g in rates]
    d = rho.shape[0]
    traj = np.empty((nsteps + 1, d, d), dtype=complex)
    traj[0] = rho
    for s in range(nsteps):
        k1 = lindblad_rhs(rho, h, jumps, rates)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, jumps, rates)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, jumps, rates)
        k4 = lindblad_rhs(rho + dt * k3, h, jumps, rates)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if not np.all(np.isfinite(rho)):
            raise FloatingPointError(f"non-finite density matrix at step {s + 1}")
        traj[s + 1] = rho
    return traj
