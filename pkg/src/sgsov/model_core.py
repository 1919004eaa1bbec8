"""Cyclic Weyl representation, Lax and monodromy matrices, transfer matrix,
grading charge, quantum determinant and average values.

Everything here is materialized as dense complex matrices on the p^N state
space, so that every algebraic identity downstream can be checked against
brute-force linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ModelParams, OddChain, SgSovError

__all__ = [
    "OperatorLaurent", "Monodromy", "NotCentral",
    "weyl_generators", "site_embed", "site_index_digits",
    "lax_matrix", "monodromy", "transfer_poly", "transfer",
    "theta_charge", "rmatrix", "yang_baxter_residual",
    "a_coeff", "d_coeff", "abar_coeff", "dbar_coeff",
    "quantum_determinant", "quantum_determinant_product",
    "average_lax", "average_monodromy", "average_value", "average_value_dense",
    "frob", "rel_err",
]


class NotCentral(SgSovError):
    """An operator that must be a scalar multiple of the identity is not."""


def frob(x) -> float:
    return float(np.linalg.norm(np.asarray(x)))


def rel_err(lhs, rhs, scale=None) -> float:
    """Frobenius error of lhs-rhs relative to an explicit or implied scale."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    if scale is None:
        scale = max(frob(lhs), frob(rhs), 1e-300)
    return frob(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# Laurent polynomials with dense operator coefficients
# ---------------------------------------------------------------------------

class OperatorLaurent:
    """Laurent polynomial in the spectral parameter whose coefficients are
    dense matrices.  Products are computed by coefficient convolution, so
    degree and parity structure is exact by construction."""

    def __init__(self, coeffs, dim):
        self.dim = dim
        self.coeffs = {int(d): np.asarray(c, dtype=complex) for d, c in coeffs.items()
                       if np.any(c)}

    @property
    def degrees(self):
        return sorted(self.coeffs)

    @property
    def min_deg(self):
        return min(self.coeffs) if self.coeffs else 0

    @property
    def max_deg(self):
        return max(self.coeffs) if self.coeffs else 0

    @property
    def parity(self):
        """0 if only even powers occur, 1 if only odd, None if mixed/empty."""
        pars = {d % 2 for d in self.coeffs}
        return pars.pop() if len(pars) == 1 else None

    def coeff(self, deg):
        c = self.coeffs.get(int(deg))
        if c is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return c

    def __add__(self, other):
        out = {d: c.copy() for d, c in self.coeffs.items()}
        for d, c in other.coeffs.items():
            out[d] = out[d] + c if d in out else c.copy()
        return OperatorLaurent(out, self.dim)

    def __matmul__(self, other):
        out = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                d = d1 + d2
                prod = c1 @ c2
                out[d] = out[d] + prod if d in out else prod
        return OperatorLaurent(out, self.dim)

    def __mul__(self, scalar):
        return OperatorLaurent({d: scalar * c for d, c in self.coeffs.items()}, self.dim)

    __rmul__ = __mul__

    def evaluate(self, lam):
        lam = complex(lam)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for d, c in self.coeffs.items():
            out += (lam ** d) * c
        return out

    def scale(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in self.coeffs.values())))


@dataclass
class Monodromy:
    """The 2x2 matrix of Yang-Baxter generators as operator Laurent polynomials."""
    A: OperatorLaurent
    B: OperatorLaurent
    C: OperatorLaurent
    D: OperatorLaurent

    def entry(self, name) -> OperatorLaurent:
        return getattr(self, name)

    def evaluate(self, lam):
        """2x2 array of dense matrices at the given spectral point."""
        return np.array([[self.A.evaluate(lam), self.B.evaluate(lam)],
                         [self.C.evaluate(lam), self.D.evaluate(lam)]])

    def transfer(self) -> OperatorLaurent:
        return self.A + self.D


# ---------------------------------------------------------------------------
# Local Weyl pairs and tensor embedding
# ---------------------------------------------------------------------------

def weyl_generators(p, u=1.0, v=1.0, p_prime=2):
    """Cyclic Weyl pair on C^p: V is the clock diag(v*q^k) and U the shift
    mapping basis state k to k-1 (mod p), scaled by u.  They obey
    U V = q V U with U^p = u^p and V^p = v^p."""
    q = np.exp(-1j * np.pi * p_prime / p)
    V = np.diag(v * q ** np.arange(p)).astype(complex)
    U = np.zeros((p, p), dtype=complex)
    for k in range(p):
        U[(k - 1) % p, k] = u
    return U, V


def site_index_digits(p, n_sites, n):
    """Digit of every computational-basis index at (1-based) site n.

    Site 1 is the fastest-running tensor factor."""
    if not 1 <= n <= n_sites:
        raise IndexError(f"site index {n} out of range 1..{n_sites}")
    idx = np.arange(p ** n_sites)
    return (idx // p ** (n - 1)) % p


def site_embed(params: ModelParams, n: int, X):
    """Embed a p x p matrix as an operator acting on tensor slot n only."""
    p, N = params.p, params.n_sites
    if not 1 <= n <= N:
        raise IndexError(f"site index {n} out of range 1..{N}")
    X = np.asarray(X, dtype=complex)
    left = np.eye(p ** (N - n), dtype=complex)
    right = np.eye(p ** (n - 1), dtype=complex)
    return np.kron(left, np.kron(X, right))


def _site_ops(params: ModelParams, n: int):
    U, V = weyl_generators(params.p, params.u[n - 1], params.v[n - 1], params.p_prime)
    return (site_embed(params, n, U), site_embed(params, n, V),
            site_embed(params, n, np.linalg.inv(U)), site_embed(params, n, np.linalg.inv(V)))


# ---------------------------------------------------------------------------
# Lax matrix, monodromy, transfer matrix, grading charge
# ---------------------------------------------------------------------------

def lax_matrix(params: ModelParams, n: int):
    """2x2 matrix of degree-1 operator Laurent polynomials for site n.

    Diagonal entries are independent of the spectral parameter; off-diagonal
    entries carry exactly the powers +1 and -1."""
    kap = params.kappa[n - 1]
    xi = params.xi[n - 1]
    sq = params.sqrt_q
    d = params.dim
    Uop, Vop, Uinv, Vinv = _site_ops(params, n)
    a11 = kap * (Uop @ (Vop * (kap / sq) + Vinv * (sq / kap)))
    a22 = kap * (Uinv @ (Vop * (sq / kap) + Vinv * (kap / sq)))
    # (lam_n * v - 1/(v*lam_n)) / i  with lam_n = lam/xi
    b_plus = kap * Vop / (1j * xi)
    b_minus = -kap * xi * Vinv / 1j
    c_plus = kap * Vinv / (1j * xi)
    c_minus = -kap * xi * Vop / 1j
    return [[OperatorLaurent({0: a11}, d), OperatorLaurent({1: b_plus, -1: b_minus}, d)],
            [OperatorLaurent({1: c_plus, -1: c_minus}, d), OperatorLaurent({0: a22}, d)]]


def lax_projector_factorization(params: ModelParams, n: int, sign: str):
    """Rank-one factorization of the Lax matrix at a quantum-determinant zero.

    Returns (P, Q, const) with P a column pair and Q a row pair of dense
    operators such that L_n(mu_{n,sign}) = const * P_i Q_j entrywise.  The
    half-shift is realized as the (p+1)/2 power of the cyclic shift, which
    conjugates the clock by (-1)^{p'/2} sqrt(q); the resulting parity
    constant is (-1)^{p'/2}."""
    if sign not in "+-":
        raise ValueError("sign must be '+' or '-'")
    p = params.p
    kap = params.kappa[n - 1]
    U, V = weyl_generators(p, params.u[n - 1], params.v[n - 1], params.p_prime)
    half = np.linalg.matrix_power(U, (p + 1) // 2)
    Ue = site_embed(params, n, half)
    Uei = np.linalg.inv(Ue)
    Ve = site_embed(params, n, V)
    Vei = np.linalg.inv(Ve)
    if sign == "+":
        P = [kap * Ue @ (Ve * kap + Vei / kap), kap * Uei @ (Ve / kap + Vei * kap)]
        Q = [Ue, Uei]
    else:
        P = [kap * Ue, kap * Uei]
        Q = [(Ve * kap + Vei / kap) @ Ue, (Ve / kap + Vei * kap) @ Uei]
    const = (-1.0) ** (params.p_prime // 2)
    return P, Q, const


def _mat2_product(X, Y):
    """Product of 2x2 matrices with OperatorLaurent entries (X to the left)."""
    return [[X[i][0] @ Y[0][j] + X[i][1] @ Y[1][j] for j in range(2)] for i in range(2)]


def monodromy(params: ModelParams, site_order=None) -> Monodromy:
    """Ordered product of Lax matrices, site N leftmost by default.

    ``site_order`` gives the left-to-right factor order and allows cyclic
    reorderings of the chain."""
    if site_order is None:
        site_order = list(range(params.n_sites, 0, -1))
    M = lax_matrix(params, site_order[0])
    for n in site_order[1:]:
        M = _mat2_product(M, lax_matrix(params, n))
    return Monodromy(A=M[0][0], B=M[0][1], C=M[1][0], D=M[1][1])


def transfer_poly(params: ModelParams, mono: Monodromy = None) -> OperatorLaurent:
    mono = mono if mono is not None else monodromy(params)
    return mono.transfer()


def transfer(params: ModelParams, lam, mono: Monodromy = None):
    mono = mono if mono is not None else monodromy(params)
    return mono.A.evaluate(lam) + mono.D.evaluate(lam)


def theta_charge(params: ModelParams):
    """Grading charge of the even chain: product of the clock generators with
    alternating exponents.  Diagonal in the computational basis."""
    if not params.even_chain:
        raise OddChain("the grading charge exists only for even chains")
    diag = np.ones(params.dim, dtype=complex)
    for n in range(1, params.n_sites + 1):
        digits = site_index_digits(params.p, params.n_sites, n)
        vals = params.v[n - 1] * params.q ** digits
        diag = diag * (vals if n % 2 == 0 else 1.0 / vals)
    return np.diag(diag)


# ---------------------------------------------------------------------------
# R-matrix and the quadratic exchange relation
# ---------------------------------------------------------------------------

def rmatrix(lam, q):
    """Six-vertex R-matrix in multiplicative form."""
    lam = complex(lam)
    b = lam - 1.0 / lam
    c = q - 1.0 / q
    a = q * lam - 1.0 / (q * lam)
    return np.array([[a, 0, 0, 0],
                     [0, b, c, 0],
                     [0, c, b, 0],
                     [0, 0, 0, a]], dtype=complex)


def _aux_kron(M2, slot, dim):
    """Lift a 2x2 array of dense blocks into the 4-dim doubled auxiliary space."""
    T = np.zeros((4, 4, dim, dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for e in range(2):
                    if slot == 0 and b == e:
                        T[a * 2 + b, c * 2 + e] = M2[a, c]
                    elif slot == 1 and a == c:
                        T[a * 2 + b, c * 2 + e] = M2[b, e]
    return T


def yang_baxter_residual(params: ModelParams, lam, mu, mono: Monodromy = None):
    """Relative residual of the quadratic exchange relation at (lam, mu)."""
    mono = mono if mono is not None else monodromy(params)
    d = params.dim
    M1 = _aux_kron(mono.evaluate(lam), 0, d)
    M2 = _aux_kron(mono.evaluate(mu), 1, d)
    R = rmatrix(lam / mu, params.q)
    prod12 = np.einsum("abij,bcjk->acik", M1, M2)
    prod21 = np.einsum("abij,bcjk->acik", M2, M1)
    lhs = np.einsum("ab,bcij->acij", R, prod12)
    rhs = np.einsum("abij,bc->acij", prod21, R)
    scale = frob(R) * np.sqrt(np.sum(np.abs(M1) ** 2)) * np.sqrt(np.sum(np.abs(M2) ** 2))
    return frob(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# Quantum determinant and the shift coefficients
# ---------------------------------------------------------------------------

def a_coeff(params: ModelParams, lam):
    """Coefficient function of the downward shift in the separated action."""
    lam = np.asarray(lam, dtype=complex)
    kap = np.asarray(params.kappa)
    xi = np.asarray(params.xi)
    sq = params.sqrt_q
    lam_n = lam[..., None] / xi
    fac = (kap * xi / lam[..., None]) * (1 + 1j * lam_n * kap / sq) * (1 + 1j * lam_n / (kap * sq))
    return (-1j) ** params.n_sites * np.prod(fac, axis=-1)


def d_coeff(params: ModelParams, lam):
    """Coefficient function of the upward shift; image of ``a_coeff`` under
    lam -> -q*lam up to the q^N phase."""
    lam = np.asarray(lam, dtype=complex)
    return params.q ** params.n_sites * a_coeff(params, -lam * params.q)


def abar_coeff(params: ModelParams, lam):
    """Right-representation gauge partner of ``a_coeff``."""
    return a_coeff(params, np.asarray(lam, dtype=complex) * params.q)


def dbar_coeff(params: ModelParams, lam):
    """Right-representation gauge partner of ``d_coeff``."""
    return d_coeff(params, np.asarray(lam, dtype=complex) / params.q)


def quantum_determinant(params: ModelParams, lam):
    """Central scalar a(lam) * d(lam/q); equals the operator combination
    A(lam) D(lam/q) - B(lam) C(lam/q)."""
    lam = np.asarray(lam, dtype=complex)
    return a_coeff(params, lam) * d_coeff(params, lam / params.q)


def quantum_determinant_product(params: ModelParams, lam):
    """Factorized form over the quantum-determinant zeros mu_{n,+-}.

    Equals ``quantum_determinant`` up to the overall sign (-1)^N; the
    operator identity fixes the sign carried by ``quantum_determinant``."""
    lam = np.asarray(lam, dtype=complex)
    kap = np.asarray(params.kappa)
    mp = params.mu_plus
    mm = params.mu_minus
    lamc = lam[..., None]
    fac = kap ** 2 * (lamc / mp - mp / lamc) * (lamc / mm - mm / lamc)
    return np.prod(fac, axis=-1)


# ---------------------------------------------------------------------------
# Average values
# ---------------------------------------------------------------------------

def average_lax(params: ModelParams, n: int, big_lam):
    """2x2 scalar matrix of p-fold averages of the Lax entries at site n."""
    big_lam = complex(big_lam)
    p = params.p
    kap = params.kappa[n - 1] ** p
    kap2 = params.kappa[n - 1] ** (2 * p)
    xi = params.xi[n - 1] ** p
    u = params.u[n - 1] ** p
    v = params.v[n - 1] ** p
    qp2 = params.sqrt_q ** p
    ip = 1j ** p
    return np.array([
        [qp2 * u * (kap2 * v + 1.0 / v), kap * (big_lam * v / xi - xi / (big_lam * v)) / ip],
        [kap * (big_lam / (v * xi) - xi * v / big_lam) / ip, qp2 / u * (kap2 / v + v)],
    ], dtype=complex)


def average_monodromy(params: ModelParams, big_lam):
    """2x2 scalar matrix of averages of the monodromy entries, built as the
    ordered product of per-site averaged Lax matrices."""
    M = average_lax(params, params.n_sites, big_lam)
    for n in range(params.n_sites - 1, 0, -1):
        M = M @ average_lax(params, n, big_lam)
    return M

_ENTRY_SLOT = {"A": (0, 0), "B": (0, 1), "C": (1, 0), "D": (1, 1)}


def average_value_dense(params: ModelParams, entry: str, lam, mono: Monodromy = None,
                        tol=1e-9):
    """Oracle route: multiply the p operators O(q^k lam) and reduce the
    (necessarily central) product to its scalar.  Raises NotCentral if the
    product is not proportional to the identity."""
    mono = mono if mono is not None else monodromy(params)
    op = mono.entry(entry)
    prod = np.eye(params.dim, dtype=complex)
    for k in range(1, params.p + 1):
        prod = prod @ op.evaluate(params.q ** k * lam)
    scalar = np.trace(prod) / params.dim
    dev = frob(prod - scalar * np.eye(params.dim))
    if dev > tol * max(frob(prod), 1e-300):
        raise NotCentral(f"average of {entry} deviates from scalar*Id by {dev:.3e}")
    return complex(scalar), dev


def average_value(params: ModelParams, entry: str, big_lam, mono: Monodromy = None,
                  verify=False, tol=1e-9):
    """Average value of a monodromy entry as a function of Lambda = lam^p.

    Computed from the 2x2 product of averaged Lax matrices; with ``verify``
    the dense p-fold operator product is cross-checked against it."""
    i, j = _ENTRY_SLOT[entry]
    val = complex(average_monodromy(params, big_lam)[i, j])
    if verify:
        lam = complex(big_lam) ** (1.0 / params.p)
        dense, _ = average_value_dense(params, entry, lam, mono=mono, tol=tol)
        scale = max(abs(val), abs(dense), 1e-300)
        if abs(dense - val) > 100 * tol * scale:
            raise NotCentral(
                f"average of {entry}: dense product {dense} vs Lax-average route {val}")
    return val
