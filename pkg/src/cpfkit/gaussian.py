"""Gaussian-state toolbox for continuous-variable sensing calculations.

States are (mean, covariance) pairs in the convention q = a + a†,
p = i(a† − a), so the vacuum covariance matrix is the identity and a
coherent state of amplitude α has mean (2 Re α, 2 Im α).  Quadratures are
ordered (q₁, p₁, …, qₙ, pₙ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidStateError, NumericError

# A covariance matrix is accepted as physical when its smallest symplectic
# eigenvalue is at least 1 - PHYSICALITY_TOL.
PHYSICALITY_TOL = 1e-9

# fidelity kernel eigenvalue moduli this close to 1 are treated as exactly 1
SNAP_TOL = 1e-8

_SYMMETRY_RTOL = 1e-12


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the 2n x 2n symplectic form Omega, a direct sum of [[0,1],[-1,0]]."""
    if n_modes < 1:
        raise DomainError(f"n_modes must be at least 1, got {n_modes}")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    """An n-mode Gaussian state: quadrature mean vector and covariance matrix.

    ``mean`` has length 2n, ``cm`` is 2n x 2n and symmetric.  Construction
    checks shape, finiteness and symmetry only; physicality (positive
    definiteness and symplectic eigenvalues >= 1) is reported separately by
    :func:`check_physical` so that diagnostic states can still be built.
    """

    mean: np.ndarray
    cm: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cm = np.asarray(self.cm, dtype=float)
        if mean.ndim != 1 or mean.size == 0 or mean.size % 2:
            raise InvalidStateError(f"mean must have even length 2n, got shape {mean.shape}")
        if cm.shape != (mean.size, mean.size):
            raise InvalidStateError(
                f"cm must be {mean.size} x {mean.size} to match the mean, got {cm.shape}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cm))):
            raise InvalidStateError("state contains non-finite entries")
        scale = max(1.0, float(np.abs(cm).max()))
        if float(np.abs(cm - cm.T).max()) > _SYMMETRY_RTOL * scale:
            raise InvalidStateError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean.copy())
        # store the exactly symmetric part so downstream eigensolves are stable
        object.__setattr__(self, "cm", (cm + cm.T) / 2.0)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class PhysicalityReport:
    """Outcome of a physicality check; ``ok`` is the overall verdict."""

    min_symplectic_eigenvalue: float
    positive_definite: bool
    ok: bool


def vacuum_state(n_modes: int) -> GaussianState:
    """The n-mode vacuum: zero mean, identity covariance."""
    if n_modes < 1:
        raise DomainError(f"n_modes must be at least 1, got {n_modes}")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def coherent_state(alphas: Sequence[complex]) -> GaussianState:
    """Product coherent state with one complex amplitude per mode."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    mean = np.empty(2 * alphas.size)
    mean[0::2] = 2.0 * alphas.real
    mean[1::2] = 2.0 * alphas.imag
    return GaussianState(mean, np.eye(2 * alphas.size))


def thermal_state(n_bar: float) -> GaussianState:
    """Single-mode thermal state with mean photon number ``n_bar``."""
    if n_bar < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {n_bar}")
    return GaussianState(np.zeros(2), (2.0 * n_bar + 1.0) * np.eye(2))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Tensor product: means concatenate, covariances block-diagonal."""
    na, nb = a.mean.size, b.mean.size
    cm = np.zeros((na + nb, na + nb))
    cm[:na, :na] = a.cm
    cm[na:, na:] = b.cm
    return GaussianState(np.concatenate([a.mean, b.mean]), cm)


def keep_modes(state: GaussianState, modes: Sequence[int]) -> GaussianState:
    """Partial trace down to ``modes``, kept in the given order."""
    modes = list(modes)
    if len(set(modes)) != len(modes) or not modes:
        raise InvalidStateError(f"modes must be a non-empty set of distinct indices, got {modes}")
    if any(m < 0 or m >= state.n_modes for m in modes):
        raise InvalidStateError(f"mode index out of range for {state.n_modes}-mode state: {modes}")
    idx = np.array([[2 * m, 2 * m + 1] for m in modes]).ravel()
    return GaussianState(state.mean[idx], state.cm[np.ix_(idx, idx)])


def displace(state: GaussianState, offset: Sequence[float]) -> GaussianState:
    """Phase-space displacement: adds ``offset`` to the mean vector."""
    offset = np.asarray(offset, dtype=float)
    if offset.shape != state.mean.shape:
        raise InvalidStateError(
            f"offset must have shape {state.mean.shape}, got {offset.shape}"
        )
    return GaussianState(state.mean + offset, state.cm)


def pure_loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Send one mode through a pure-loss channel of transmissivity ``eta``.

    The mode's mean scales by sqrt(eta), its diagonal covariance block becomes
    eta*block + (1-eta)*I, and cross blocks scale by sqrt(eta).
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if not 0 <= mode < state.n_modes:
        raise InvalidStateError(f"mode {mode} out of range for {state.n_modes}-mode state")
    root = math.sqrt(eta)
    i, j = 2 * mode, 2 * mode + 1
    mean = state.mean.copy()
    mean[i : j + 1] *= root
    cm = state.cm.copy()
    cm[[i, j], :] *= root
    cm[:, [i, j]] *= root
    cm[i, i] += 1.0 - eta
    cm[j, j] += 1.0 - eta
    return GaussianState(mean, cm)


def photon_number(state: GaussianState, mode: int) -> float:
    """Mean photon number of one mode, thermal plus coherent contribution."""
    if not 0 <= mode < state.n_modes:
        raise InvalidStateError(f"mode {mode} out of range for {state.n_modes}-mode state")
    i, j = 2 * mode, 2 * mode + 1
    return (state.cm[i, i] + state.cm[j, j] - 2.0) / 4.0 + (
        state.mean[i] ** 2 + state.mean[j] ** 2
    ) / 4.0


def _symplectic_moduli(cm: np.ndarray) -> np.ndarray:
    """Moduli of the eigenvalues of Omega V, one per mode, ascending."""
    omega = symplectic_form(cm.shape[-1] // 2)
    mods = np.sort(np.abs(np.linalg.eigvals(omega @ cm)), axis=-1)
    # eigenvalues come in +/- i nu pairs; keep one of each
    return mods[..., ::2]


def symplectic_eigenvalues(cm: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a symmetric positive-definite covariance matrix.

    Returns the n moduli in ascending order.  A physical state has all of them
    >= 1 in this convention.
    """
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] % 2:
        raise InvalidStateError(f"cm must be square with even dimension, got {cm.shape}")
    scale = max(1.0, float(np.abs(cm).max()))
    if float(np.abs(cm - cm.T).max()) > _SYMMETRY_RTOL * scale:
        raise InvalidStateError("covariance matrix is not symmetric")
    if np.linalg.eigvalsh((cm + cm.T) / 2.0)[0] <= 0.0:
        raise InvalidStateError("covariance matrix is not positive definite")
    return _symplectic_moduli((cm + cm.T) / 2.0)


def check_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> PhysicalityReport:
    """Report whether ``state`` is a valid quantum state.  Never raises."""
    pd = bool(np.linalg.eigvalsh(state.cm)[0] > 0.0)
    min_nu = float(_symplectic_moduli(state.cm)[0])
    return PhysicalityReport(min_nu, pd, pd and min_nu >= 1.0 - tol)


def thermal_fidelity_oracle(n1: float, n2: float) -> float:
    """Closed-form fidelity between two thermal states, from the Fock-basis sum.

    Both states are diagonal in the number basis, so
    F = sum_k sqrt(p_k q_k) is a geometric series with ratio
    sqrt(n1 n2 / ((n1+1)(n2+1))).
    """
    if n1 < 0 or n2 < 0:
        raise DomainError(f"mean photon numbers must be nonnegative, got {n1}, {n2}")
    ratio = math.sqrt(n1 * n2 / ((n1 + 1.0) * (n2 + 1.0)))
    return 1.0 / (math.sqrt((n1 + 1.0) * (n2 + 1.0)) * (1.0 - ratio))


def fidelity_from_arrays(
    cov_a: np.ndarray, cov_b: np.ndarray, mean_a: np.ndarray, mean_b: np.ndarray
) -> np.ndarray:
    """Uhlmann fidelity F = Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)) for Gaussian states.

    Batched core: covariances have shape (..., 2n, 2n), means (..., 2n), and
    leading dimensions broadcast.  No physicality validation is performed here;
    use :func:`gaussian_fidelity` for the checked scalar interface.

    With G = (V_a+V_b)^-1 and V_aux = Omega^T G (Omega + V_b Omega V_a),

        F_tot^4 = det[(sqrt(I + (V_aux Omega)^-2) + I) V_aux] / det((V_a+V_b)/2)
        F = F_tot * exp(-1/4 du^T G du),  du = u_b - u_a.

    For physical inputs the eigenvalues of V_aux Omega are pairs +/- i nu_j
    with nu_j >= 1, and the numerator determinant equals
    prod_j (nu_j + sqrt(nu_j^2 - 1))^2, accumulated in log space as a sum of
    arccosh(nu_j) terms (determinants overflow doubles once entries grow like
    mu^2n).  Working with the moduli nu = |w| discards the spurious real
    parts round-off puts on the eigenvalues, and moduli within SNAP_TOL of 1
    are snapped to exactly 1: unit values indicate pure directions of the
    Uhlmann product operator, where a nearly defective eigenvalue cluster
    would otherwise turn an O(eps) eigensolver perturbation into an
    O(sqrt(eps)) error through the square-root kink of arccosh.
    """
    cov_a = np.asarray(cov_a, dtype=float)
    cov_b = np.asarray(cov_b, dtype=float)
    mean_a = np.asarray(mean_a, dtype=float)
    mean_b = np.asarray(mean_b, dtype=float)
    two_n = cov_a.shape[-1]
    omega = symplectic_form(two_n // 2)

    total = cov_a + cov_b
    total = (total + np.swapaxes(total, -1, -2)) / 2.0
    sign, logdet_total = np.linalg.slogdet(total)
    if np.any(sign <= 0.0) or not np.all(np.isfinite(logdet_total)):
        raise NumericError("covariance sum V_a + V_b is singular or indefinite")
    g = np.linalg.inv(total)

    v_aux = omega.T @ g @ (omega + cov_b @ omega @ cov_a)
    w = np.linalg.eigvals(v_aux @ omega)
    if not np.all(np.isfinite(w.real)):
        raise NumericError("eigenvalue computation for the fidelity kernel failed")
    nu = np.abs(w)
    nu = np.where(np.abs(nu - 1.0) <= SNAP_TOL, 1.0, np.maximum(nu, 1.0))
    # each +/- pair appears twice in nu, squaring the per-mode factor as required
    log_num = np.sum(np.arccosh(nu), axis=-1)

    delta = mean_b - mean_a
    exponent = -0.25 * np.einsum("...i,...ij,...j", delta, g, delta)
    log_f = 0.25 * (log_num - logdet_total + two_n * math.log(2.0)) + exponent
    return np.clip(np.exp(log_f), 0.0, 1.0)


def gaussian_fidelity(a: GaussianState, b: GaussianState, validate: bool = True) -> float:
    """Fidelity F(a, b) = Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)), in [0, 1].

    Raises :class:`InvalidStateError` when the states have different mode
    counts or (with ``validate``) fail the physicality check.
    """
    if a.n_modes != b.n_modes:
        raise InvalidStateError(
            f"states have different mode counts: {a.n_modes} vs {b.n_modes}"
        )
    if validate:
        for label, state in (("first", a), ("second", b)):
            report = check_physical(state)
            if not report.ok:
                raise InvalidStateError(
                    f"{label} state is unphysical "
                    f"(min symplectic eigenvalue {report.min_symplectic_eigenvalue:.9g}, "
                    f"positive definite: {report.positive_definite})"
                )
    return float(fidelity_from_arrays(a.cm, b.cm, a.mean, b.mean))
