"""Representation data for the lattice sine-Gordon chain at a root of unity.

A chain of N sites carries one p-dimensional cyclic Weyl pair per site.  The
deformation parameter q = exp(-i*pi*p'/p) is a primitive p-th root of unity
for odd p and even p', which makes the p-th powers of the generators central
and the whole state space p^N dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["ModelParams", "SgSovError", "DegenerateKappa", "OddChain"]


class SgSovError(Exception):
    """Base class for numerical / structural failures of the toolkit."""


class OddChain(SgSovError):
    """Raised when an even-chain-only quantity is requested on an odd chain."""


class DegenerateKappa(SgSovError):
    """Raised when kappa**4 == 1 makes a reconstruction denominator vanish."""


def _as_complex_tuple(values, n, name):
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if arr.size != n:
        raise ValueError(f"{name} must have length {n}, got {arr.size}")
    return tuple(arr.tolist())


@dataclass(frozen=True)
class ModelParams:
    """Immutable site parameters plus the derived constants of the model.

    ``kappa`` and ``xi`` are the per-site coupling and inhomogeneity
    parameters; ``u`` and ``v`` are the unit-modulus central parameters of the
    cyclic Weyl representation (both default to 1 at every site).
    """

    n_sites: int
    p: int
    p_prime: int = 2
    kappa: tuple = ()
    xi: tuple = ()
    u: tuple = field(default=None)
    v: tuple = field(default=None)

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError(f"p must be an odd integer >= 3, got {self.p}")
        if self.p_prime <= 0 or self.p_prime % 2 != 0:
            raise ValueError(f"p' must be a positive even integer, got {self.p_prime}")
        if self.n_sites < 1:
            raise ValueError(f"chain length must be >= 1, got {self.n_sites}")
        n = self.n_sites
        object.__setattr__(self, "kappa", _as_complex_tuple(self.kappa, n, "kappa"))
        object.__setattr__(self, "xi", _as_complex_tuple(self.xi, n, "xi"))
        u = self.u if self.u is not None else np.ones(n)
        v = self.v if self.v is not None else np.ones(n)
        object.__setattr__(self, "u", _as_complex_tuple(u, n, "u"))
        object.__setattr__(self, "v", _as_complex_tuple(v, n, "v"))
        for name in ("u", "v"):
            vals = np.asarray(getattr(self, name))
            if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-12:
                raise ValueError(f"{name} parameters must be unit modulus")
        if np.min(np.abs(np.asarray(self.kappa))) == 0 or np.min(np.abs(np.asarray(self.xi))) == 0:
            raise ValueError("kappa and xi must be nonzero")
        # q must be a primitive p-th root of unity.
        q = self.q
        powers = q ** np.arange(1, self.p)
        if abs(q ** self.p - 1.0) > 1e-12 or np.min(np.abs(powers - 1.0)) < 1e-12:
            raise ValueError("q = exp(-i*pi*p'/p) is not a primitive p-th root of unity "
                             f"for p={self.p}, p'={self.p_prime}")

    # -- derived constants -------------------------------------------------

    @cached_property
    def q(self) -> complex:
        return complex(np.exp(-1j * np.pi * self.p_prime / self.p))

    @cached_property
    def sqrt_q(self) -> complex:
        return complex(np.exp(-1j * np.pi * self.p_prime / (2 * self.p)))

    @property
    def dim(self) -> int:
        return self.p ** self.n_sites

    @property
    def even_chain(self) -> bool:
        return self.n_sites % 2 == 0

    @property
    def e_n(self) -> int:
        """1 for an even chain, 0 for an odd one."""
        return 1 if self.even_chain else 0

    @property
    def n_separate(self) -> int:
        """Number of separate variables: N for odd chains, N-1 for even ones."""
        return self.n_sites - self.e_n

    @property
    def n_bar(self) -> int:
        """Leading even power of the transfer matrix in the spectral parameter."""
        return self.n_sites + self.e_n - 1

    @cached_property
    def mu_plus(self) -> np.ndarray:
        return 1j * np.asarray(self.kappa) * self.sqrt_q * np.asarray(self.xi)

    @cached_property
    def mu_minus(self) -> np.ndarray:
        return 1j * self.sqrt_q * np.asarray(self.xi) / np.asarray(self.kappa)

    @cached_property
    def kprod(self) -> complex:
        """Product of kappa_n / i over the chain; leading scale of the B family."""
        return complex(np.prod(np.asarray(self.kappa) / 1j))

    @cached_property
    def xi_prod(self) -> complex:
        return complex(np.prod(np.asarray(self.xi)))

    # -- self-adjoint family ----------------------------------------------

    @cached_property
    def hermitian_eps(self):
        """Phase epsilon of the conjugation rule, or None outside the
        self-adjoint parameter family (kappa^2, xi^2 real, uniform epsilon)."""
        kap = np.asarray(self.kappa)
        xi = np.asarray(self.xi)
        if np.max(np.abs(np.imag(kap ** 2))) > 1e-12 * np.max(np.abs(kap) ** 2):
            return None
        if np.max(np.abs(np.imag(xi ** 2))) > 1e-12 * np.max(np.abs(xi) ** 2):
            return None
        eps = -(kap * xi) / (np.conj(kap) * np.conj(xi))
        if np.max(np.abs(eps - eps[0])) > 1e-12:
            return None
        return complex(eps[0])

    @property
    def self_adjoint(self) -> bool:
        return self.hermitian_eps is not None

    # -- sampling ----------------------------------------------------------

    def spectral_samples(self, rng, count, exclude=(), min_dist=1e-3,
                         mod_range=(0.5, 2.0)):
        """Draw generic spectral points: modulus in ``mod_range``, uniform
        argument, rejecting points within ``min_dist`` of any excluded value
        (quantum-determinant zeros are always excluded)."""
        excl = list(np.asarray(self.mu_plus)) + list(np.asarray(self.mu_minus))
        excl += [complex(z) for z in np.asarray(exclude).reshape(-1)] if len(np.atleast_1d(exclude)) else []
        excl = np.asarray(excl, dtype=complex)
        out = []
        attempts = 0
        while len(out) < count:
            attempts += 1
            if attempts > 1000 * max(count, 1):
                raise SgSovError("spectral sampling failed: exclusion set too dense")
            r = rng.uniform(*mod_range)
            phi = rng.uniform(0.0, 2.0 * np.pi)
            lam = r * np.exp(1j * phi)
            if excl.size and np.min(np.abs(excl - lam)) < min_dist:
                continue
            out.append(complex(lam))
        return out
