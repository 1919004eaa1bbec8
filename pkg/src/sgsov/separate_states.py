"""Separate states, the scalar-product determinant, eigenstate pairings,
orthogonality and the resolution of the identity over transfer eigenstates.

A separate state is specified by one coefficient table per separate
variable; its dense materialization is the measure-weighted sum over the
SOV basis with squared-difference Vandermonde weights.  The pairing of a
left and a right separate state collapses to a single determinant whose
entries are weighted moment sums over each variable's grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ModelParams, SgSovError
from .sov_basis import SovBasis
from .spectrum import TransferEigenstate, polyval_ascending

__all__ = [
    "SeparateState", "IncompleteSpectrum", "materialize",
    "scalar_product_det", "phi_general", "phi_matrix", "eigen_action",
    "identity_resolution_T", "attach_q_data", "eigenstate_separate_states",
    "t_coeff_null_vector",
]


class IncompleteSpectrum(SgSovError):
    """Fewer eigenstates than the dimension of the state space."""


@dataclass
class SeparateState:
    """Coefficient tables alpha_a(eta_a^{(h)}) of a separate state.

    ``coeff`` has shape (n_separate, p); ``theta_m`` labels the charge sector
    and is used only on even chains."""
    side: str                     # "left" | "right"
    coeff: np.ndarray
    theta_m: int | None = None

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.coeff = np.asarray(self.coeff, dtype=complex)


def _vandermonde_weights(basis: SovBasis):
    """Squared-difference Vandermonde over the separate-variable grid values
    for every label tuple, divided by the gauge functions."""
    params = basis.params
    nsep = params.n_separate
    vals = basis.grid.grid[:nsep]  # (nsep, p)
    tup = basis.tuples[:, :nsep]   # (d, nsep)
    gathered = vals[np.arange(nsep)[None, :], tup]  # (d, nsep)
    vdm = np.ones(params.dim, dtype=complex)
    for b in range(nsep):
        for a in range(b + 1, nsep):
            vdm *= gathered[:, a] ** 2 - gathered[:, b] ** 2
    om = basis.omega
    wgt = np.prod(om[np.arange(nsep)[None, :], tup], axis=1)
    return vdm / wgt


def materialize(state: SeparateState, basis: SovBasis):
    """Dense covector (left) or vector (right) of a separate state."""
    params = basis.params
    nsep = params.n_separate
    tup = basis.tuples[:, :nsep]
    w = _vandermonde_weights(basis).copy()
    w *= np.prod(state.coeff[np.arange(nsep)[None, :], tup], axis=1)
    if params.even_chain:
        m = state.theta_m if state.theta_m is not None else 0
        sign = 1 if state.side == "left" else -1
        hN = basis.tuples[:, -1]
        w = w * params.q ** (sign * m * hN) / np.sqrt(params.p)
    if state.side == "left":
        return w @ basis.left
    return basis.right @ w


def scalar_product_det(alpha: SeparateState, beta: SeparateState,
                       basis: SovBasis):
    """Pairing of a left and a right separate state as a single determinant.

    The entries are grid-moment sums; the determinant carries the reference
    normalization constant of the basis, and on even chains the charge
    sectors must match for a nonzero result."""
    if alpha.side != "left" or beta.side != "right":
        raise ValueError("scalar_product_det expects (left, right) states")
    params = basis.params
    nsep = params.n_separate
    if params.even_chain and (alpha.theta_m - beta.theta_m) % params.p != 0:
        return 0.0 + 0.0j
    vals = basis.grid.grid[:nsep]
    om = basis.omega
    M = np.empty((nsep, nsep), dtype=complex)
    for a in range(nsep):
        w = alpha.coeff[a] * beta.coeff[a] / om[a]
        for b in range(nsep):
            M[a, b] = np.sum(w * vals[a] ** (2 * b))
    return basis.c_ref * np.linalg.det(M)


# ---------------------------------------------------------------------------
# Eigenstate pairings via the moment matrix
# ---------------------------------------------------------------------------

def attach_q_data(state: TransferEigenstate, basis: SovBasis):
    """Evaluate the fitted Baxter polynomial and its conjugate partner on the
    separate-variable grids and cache the tables on the eigenstate."""
    params = basis.params
    nsep = params.n_separate
    if state.q_poly is None:
        raise SgSovError("fit the Baxter polynomial before attaching Q data")
    grids = basis.grid.grid[:nsep]
    state.q_vals = polyval_ascending(state.q_poly, grids)
    state.qbar_vals = polyval_ascending(state.qbar_poly, grids)
    return state


def eigenstate_separate_states(state: TransferEigenstate, basis: SovBasis):
    """The left/right separate-state representations of an eigenstate."""
    if state.q_vals is None:
        attach_q_data(state, basis)
    left = SeparateState("left", state.qbar_vals, state.theta_m)
    right = SeparateState("right", state.q_vals, state.theta_m)
    return left, right


def phi_general(basis: SovBasis, bra: TransferEigenstate,
                ket: TransferEigenstate, a: int, exponent: int):
    """Weighted grid moment of the two Baxter functions on variable ``a``:
    sum_h Qbar_bra * Q_ket * eta^exponent / omega."""
    vals = basis.grid.grid[a]
    w = bra.qbar_vals[a] * ket.q_vals[a] / basis.omega[a]
    return complex(np.sum(w * vals ** exponent))


def phi_matrix(basis: SovBasis, bra: TransferEigenstate,
               ket: TransferEigenstate, half_shift: int = 0):
    """Moment matrix of the eigenstate pairing; ``half_shift`` moves every
    column exponent by that many half-steps (in units of eta)."""
    nsep = basis.params.n_separate
    M = np.empty((nsep, nsep), dtype=complex)
    for a in range(nsep):
        for b in range(nsep):
            M[a, b] = phi_general(basis, bra, ket, a, 2 * b + half_shift)
    return M


def eigen_action(basis: SovBasis, bra: TransferEigenstate,
                 ket: TransferEigenstate):
    """Pairing <bra|ket> of the separate-state representations, as the
    determinant of the moment matrix (with the sector rule on even chains)."""
    params = basis.params
    if params.even_chain and (bra.theta_m - ket.theta_m) % params.p != 0:
        return 0.0 + 0.0j
    return basis.c_ref * np.linalg.det(phi_matrix(basis, bra, ket))


def identity_resolution_T(states, basis: SovBasis):
    """Sum of |t><t| / <t|t> over the whole spectrum, built from the
    separate-state materializations and determinant pairings."""
    params = basis.params
    if len(states) < params.dim:
        raise IncompleteSpectrum(
            f"need {params.dim} eigenstates, got {len(states)}")
    out = np.zeros((params.dim, params.dim), dtype=complex)
    for st in states:
        lst, rst = eigenstate_separate_states(st, basis)
        cov = materialize(lst, basis)
        vec = materialize(rst, basis)
        norm = eigen_action(basis, st, st)
        out += np.outer(vec, cov) / norm
    return out


def t_coeff_null_vector(params: ModelParams, bra_t: dict, ket_t: dict):
    """Difference of interior eigenvalue coefficients; annihilates the moment
    matrix of two distinct eigenstates."""
    nsep = params.n_separate
    degs = [2 * b - nsep - 1 for b in range(1, nsep + 1)]
    return np.array([ket_t.get(dg, 0.0) - bra_t.get(dg, 0.0) for dg in degs])
