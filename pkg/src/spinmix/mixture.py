"""Multi-species mixture polynomials and their calculus.

A mixture is a finite nonnegative-coefficient polynomial

    xi(x) = sum_p  c_p * prod_s x(s)^p(s)

over multi-indices p indexed by a fixed ordered species tuple.  The
coefficients c_p are variances (squared amplitudes), never amplitudes, so
they are nonnegative by construction.  Besides plain evaluation and
derivatives this module implements the band recentering transform

    xi_r(x) = xi((1 - r^2) x + r^2) - xi(r^2)      (elementwise in r)

and its directional derivative at r = 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SpeciesSet", "Mixture"]

# coefficients produced by the recentering transform below this magnitude
# are pure underflow noise and are dropped
_COEFF_FLOOR = 1e-300


@dataclass(frozen=True)
class SpeciesSet:
    """Ordered species labels with their limiting proportions.

    ``lam[i]`` is the proportion of species ``names[i]``; proportions sum
    to 1 and are strictly interior to (0, 1) unless there is a single
    species, in which case the proportion is exactly 1.
    """

    names: tuple[str, ...]
    lam: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        lam = np.asarray(self.lam, dtype=float).copy()
        lam.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lam", lam)
        if len(names) == 0:
            raise ValueError("species set must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate species labels: {names}")
        if lam.shape != (len(names),):
            raise ValueError("one proportion per species required")
        if abs(float(lam.sum()) - 1.0) > 1e-12:
            raise ValueError(f"proportions sum to {lam.sum()!r}, expected 1")
        if len(names) == 1:
            if abs(float(lam[0]) - 1.0) > 1e-12:
                raise ValueError("single species must have proportion 1")
        elif not np.all((lam > 0.0) & (lam < 1.0)):
            raise ValueError("proportions must lie strictly inside (0, 1)")

    @property
    def n(self) -> int:
        return len(self.names)

    def lam_of(self, name: str) -> float:
        return float(self.lam[self.names.index(name)])


def _canonical_terms(species, terms):
    """Sort (exponent tuple, coeff) pairs lexicographically by exponents."""
    n = len(species)
    rows = []
    for degrees, coeff in terms.items():
        degrees = tuple(int(d) for d in degrees)
        if len(degrees) != n:
            raise ValueError(f"multi-index {degrees} has wrong length for species {species}")
        if any(d < 0 for d in degrees):
            raise ValueError(f"negative degree in multi-index {degrees}")
        coeff = float(coeff)
        if not math.isfinite(coeff) or coeff < 0.0:
            raise ValueError(f"coefficient for {degrees} must be finite and >= 0, got {coeff}")
        rows.append((degrees, coeff))
    rows.sort(key=lambda t: t[0])
    return rows


@dataclass(frozen=True, eq=False)
class Mixture:
    """Finite nonnegative-coefficient polynomial over an ordered species tuple.

    ``exponents`` has one row per term (canonically sorted), ``coeffs`` the
    matching variances.  ``min_degree`` is 2 for base models and 1 for
    recentred mixtures, which legitimately carry degree-1 terms.
    """

    species: tuple[str, ...]
    exponents: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    min_degree: int = 2

    def __post_init__(self):
        species = tuple(self.species)
        exps = np.asarray(self.exponents, dtype=np.int64).reshape(-1, len(species))
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        exps.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "species", species)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coeffs", coeffs)
        if exps.shape[0] != coeffs.shape[0]:
            raise ValueError("one coefficient per term required")
        if self.min_degree not in (1, 2):
            raise ValueError("min_degree must be 1 or 2")
        if np.any(coeffs < 0.0) or not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite and >= 0")
        totals = exps.sum(axis=1)
        if exps.shape[0] and totals.min() < self.min_degree:
            bad = exps[int(totals.argmin())]
            raise ValueError(f"term {tuple(bad)} has degree below min_degree={self.min_degree}")

    # ------------------------------------------------------------------
    # construction and plumbing

    @classmethod
    def from_terms(cls, species, terms, min_degree: int = 2) -> "Mixture":
        """Build from a map {exponent tuple -> coefficient}."""
        rows = _canonical_terms(tuple(species), terms)
        exps = np.array([r[0] for r in rows], dtype=np.int64).reshape(-1, len(tuple(species)))
        coeffs = np.array([r[1] for r in rows], dtype=float)
        return cls(tuple(species), exps, coeffs, min_degree)

    def terms(self) -> dict[tuple[int, ...], float]:
        """Coefficient map in canonical order (insertion order is sorted)."""
        return {tuple(int(d) for d in row): float(c) for row, c in zip(self.exponents, self.coeffs)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mixture):
            return NotImplemented
        return (
            self.species == other.species
            and self.min_degree == other.min_degree
            and self.exponents.shape == other.exponents.shape
            and bool(np.array_equal(self.exponents, other.exponents))
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_terms(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def max_degree(self) -> int:
        if self.n_terms == 0:
            return 0
        return int(self.exponents.sum(axis=1).max())

    def _coerce_point(self, x) -> np.ndarray:
        """Accept a scalar (constant vector) or a length-S array."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return np.full(self.n_species, float(x))
        if x.shape[-1] != self.n_species:
            raise ValueError(f"point has {x.shape[-1]} coordinates, expected {self.n_species}")
        return x

    # ------------------------------------------------------------------
    # evaluation and derivatives

    def eval(self, x) -> float | np.ndarray:
        """Evaluate xi at x; scalars broadcast to the constant vector.

        Supports batched input with species on the last axis.
        """
        x = self._coerce_point(x)
        if self.n_terms == 0:
            out = np.zeros(x.shape[:-1])
            return float(out) if out.ndim == 0 else out
        mono = np.prod(x[..., None, :] ** self.exponents, axis=-1)
        out = mono @ self.coeffs
        return float(out) if out.ndim == 0 else out

    def grad(self, x) -> np.ndarray:
        """Gradient of xi at a single point, with the 0**0 = 1 convention."""
        x = self._coerce_point(x)
        if x.ndim != 1:
            raise ValueError("grad expects a single point")
        out = np.zeros(self.n_species)
        if self.n_terms == 0:
            return out
        for s in range(self.n_species):
            p_s = self.exponents[:, s]
            exps = self.exponents.copy()
            exps[:, s] = np.maximum(p_s - 1, 0)
            mono = np.prod(x[None, :] ** exps, axis=-1)
            out[s] = np.sum(self.coeffs * p_s * mono)
        return out

    def hessian(self, x) -> np.ndarray:
        """Symmetric matrix of second partials of xi at a single point."""
        x = self._coerce_point(x)
        if x.ndim != 1:
            raise ValueError("hessian expects a single point")
        S = self.n_species
        out = np.zeros((S, S))
        if self.n_terms == 0:
            return out
        for s in range(S):
            for t in range(s, S):
                exps = self.exponents.copy()
                if s == t:
                    factor = self.exponents[:, s] * (self.exponents[:, s] - 1)
                    exps[:, s] = np.maximum(self.exponents[:, s] - 2, 0)
                else:
                    factor = self.exponents[:, s] * self.exponents[:, t]
                    exps[:, s] = np.maximum(self.exponents[:, s] - 1, 0)
                    exps[:, t] = np.maximum(self.exponents[:, t] - 1, 0)
                mono = np.prod(x[None, :] ** exps, axis=-1)
                val = float(np.sum(self.coeffs * factor * mono))
                out[s, t] = val
                out[t, s] = val
        return out

    def degree2_matrix(self) -> np.ndarray:
        """The matrix Q with Q[s,s] = 2*c_{2e_s}, Q[s,t] = c_{e_s+e_t}.

        Equals the Hessian of xi at the origin; only degree-2 terms
        contribute.
        """
        S = self.n_species
        Q = np.zeros((S, S))
        for row, c in zip(self.exponents, self.coeffs):
            if row.sum() != 2:
                continue
            nz = np.nonzero(row)[0]
            if len(nz) == 1:
                Q[nz[0], nz[0]] = 2.0 * c
            else:
                Q[nz[0], nz[1]] = c
                Q[nz[1], nz[0]] = c
        return Q

    # ------------------------------------------------------------------
    # band recentering

    def tilde_transform(self, r) -> "Mixture":
        """Recentred mixture xi_r(x) = xi((1-r^2)x + r^2) - xi(r^2).

        The result carries degree-1 terms, so its min_degree is 1.  Each
        coefficient is

            c_{p,r} = sum_{p' >= p} c_{p'} * prod_s C(p'(s), p(s))
                      * (1-r(s)^2)^p(s) * r(s)^{2(p'(s)-p(s))}.
        """
        r = self._coerce_point(r)
        if r.ndim != 1:
            raise ValueError("tilde_transform expects a single overlap vector")
        if np.any(r < 0.0) or np.any(r >= 1.0):
            raise ValueError(f"overlap vector must lie in [0, 1)^S, got {r}")
        one_minus = 1.0 - r * r
        r2 = r * r
        acc: dict[tuple[int, ...], float] = {}
        for row, c in zip(self.exponents, self.coeffs):
            per_species = []
            for s, d in enumerate(row):
                d = int(d)
                opts = [
                    (j, math.comb(d, j) * one_minus[s] ** j * r2[s] ** (d - j))
                    for j in range(d + 1)
                ]
                per_species.append(opts)
            for combo in itertools.product(*per_species):
                p = tuple(j for j, _ in combo)
                if sum(p) == 0:
                    continue  # cancelled exactly by the -xi(r^2) shift
                w = c
                for _, factor in combo:
                    w *= factor
                if w != 0.0:
                    acc[p] = acc.get(p, 0.0) + w
        acc = {p: w for p, w in acc.items() if w >= _COEFF_FLOOR}
        return Mixture.from_terms(self.species, acc, min_degree=1)

    def eta_direction(self, x, z) -> float:
        """Directional derivative of eps -> xi_sqrt(eps*x)(z) at eps = 0.

        Closed form: sum_s [ d_s xi(z) * x(s) * (1 - z(s)) - d_s xi(0) * x(s) ].
        """
        x = self._coerce_point(x)
        z = self._coerce_point(z)
        g_z = self.grad(z)
        g_0 = self.grad(np.zeros(self.n_species))
        return float(np.sum(g_z * x * (1.0 - z) - g_0 * x))

    # ------------------------------------------------------------------
    # positivity

    def positive_off_origin(self) -> bool:
        """True iff xi(x) > 0 for every nonzero x in [0, 1]^S.

        For nonnegative coefficients this holds exactly when every species
        carries a pure term (all other degrees zero) with positive
        coefficient: a vector supported on one species kills every mixed
        monomial.
        """
        if self.n_terms == 0:
            return False
        has_pure = [False] * self.n_species
        for row, c in zip(self.exponents, self.coeffs):
            if c <= 0.0:
                continue
            nz = np.nonzero(row)[0]
            if len(nz) == 1:
                has_pure[int(nz[0])] = True
        return all(has_pure)
