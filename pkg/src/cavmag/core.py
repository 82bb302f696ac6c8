"""Coupled-mode model of stripline-driven magnon-photon hybrids.

The model is a set of N damped oscillators (magnon modes plus a photonic
resonator) that exchange energy coherently through real coupling
constants and dissipatively through their shared coupling to the
traveling stripline photons.  Four operations carry everything built on
top: the effective non-Hermitian coupling matrix, the complex
transmission s21, the sorted complex eigenvalue branches, and the
field-dependent ferromagnetic (Kittel) dispersion.

Units: mode frequencies, damping rates and couplings all share a single
model frequency unit, defined implicitly as whatever
``gamma * sqrt(h * (h + four_pi_m))`` yields with gamma in
(model unit)/Oe and h in Oe.  The unit is opaque but consistent across
the package; any display scaling is purely an output-formatting concern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EigenFailure,
    InvalidSystem,
    NegativeField,
    NegativeFrequency,
    SingularResponse,
)

# Estimated condition number beyond which a transmission solve is
# reported as singular instead of returned as roundoff noise.
SINGULAR_COND_LIMIT = 1e14


# ── Mode and system types ──────────────────────────────────────────────


@dataclass(frozen=True)
class ModeSpec:
    """One damped oscillator mode.

    omega is the resonance frequency, alpha the intrinsic damping rate
    and beta the extrinsic damping rate fed by the stripline, all in
    model frequency units.
    """

    label: str
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("omega", "alpha", "beta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidSystem(f"mode {self.label!r}: {name} must be a finite real, got {value!r}")
            if value < 0:
                raise InvalidSystem(f"mode {self.label!r}: {name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class KittelMaterial:
    """Material constants of a ferromagnetic film.

    gamma is the gyromagnetic ratio in model frequency units per Oe;
    four_pi_m the saturation magnetization in G.
    """

    gamma: float
    four_pi_m: float

    def __post_init__(self):
        for name in ("gamma", "four_pi_m"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidSystem(f"material constant {name} must be finite and > 0, got {value!r}")


# Film constants used by the shipped example configurations.
YIG = KittelMaterial(gamma=1.76e-2, four_pi_m=1750.0)
PERMALLOY = KittelMaterial(gamma=2.94e-3, four_pi_m=10900.0)


@dataclass(frozen=True)
class HybridSystem:
    """An ordered tuple of modes plus real coherent couplings.

    couplings maps index pairs to coupling constants; both orientations
    of a pair denote the same value and are normalized to (low, high)
    keys on construction.  Absent pairs couple only dissipatively.
    """

    modes: tuple[ModeSpec, ...]
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.modes, tuple):
            object.__setattr__(self, "modes", tuple(self.modes))
        n = len(self.modes)
        if n < 1:
            raise InvalidSystem("a hybrid system needs at least one mode")
        labels = [m.label for m in self.modes]
        if len(set(labels)) != n:
            raise InvalidSystem(f"mode labels must be unique, got {labels}")
        normalized: dict[tuple[int, int], float] = {}
        for key, g in self.couplings.items():
            i, j = key
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidSystem(f"coupling key {key} outside mode range 0..{n - 1}")
            if isinstance(g, complex) or not isinstance(g, (int, float)) or not math.isfinite(g):
                raise InvalidSystem(f"coupling {key} must be a finite real, got {g!r}")
            if i == j:
                if g != 0.0:
                    raise InvalidSystem(f"self-coupling at index {i} must be zero")
                continue
            pair = (min(i, j), max(i, j))
            if pair in normalized and normalized[pair] != float(g):
                raise InvalidSystem(f"coupling pair {pair} given twice with different values")
            normalized[pair] = float(g)
        object.__setattr__(self, "couplings", normalized)

    @property
    def n(self) -> int:
        return len(self.modes)

    def g(self, i: int, j: int) -> float:
        """Coherent coupling between modes i and j (0 if absent or i == j)."""
        if i == j:
            return 0.0
        return self.couplings.get((min(i, j), max(i, j)), 0.0)


def canonical_three_mode(
    magnon1: ModeSpec,
    resonator: ModeSpec,
    magnon2: ModeSpec,
    g1: float,
    g2: float,
) -> HybridSystem:
    """Three modes in the canonical order [magnon1, resonator, magnon2].

    The magnons talk to each other only through the resonator: the
    direct magnon-magnon coherent coupling is identically zero, while
    the dissipative stripline cross-term survives in the corner entries.
    """
    return HybridSystem((magnon1, resonator, magnon2), {(0, 1): g1, (1, 2): g2})


# ── Kittel dispersion ──────────────────────────────────────────────────


def kittel_frequency(material: KittelMaterial, h):
    """Ferromagnetic resonance frequency at applied field h (Oe).

    omega = gamma * sqrt(h * (h + four_pi_m)), strictly increasing in h
    with omega(0) = 0.  Accepts a scalar or an ndarray of fields.
    """
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0.0) or not np.all(np.isfinite(h_arr)):
        raise NegativeField(f"applied field must be finite and >= 0, got {h!r}")
    out = material.gamma * np.sqrt(h_arr * (h_arr + material.four_pi_m))
    return float(out) if h_arr.ndim == 0 else out


def field_for_frequency(material: KittelMaterial, omega):
    """Applied field (Oe) at which the Kittel branch hits omega.

    Inverts the dispersion through the rationalized positive root
    h = 2 (omega/gamma)^2 / (4piM + sqrt((4piM)^2 + 4 (omega/gamma)^2)),
    which avoids cancellation for small omega.
    """
    w_arr = np.asarray(omega, dtype=float)
    if np.any(w_arr < 0.0) or not np.all(np.isfinite(w_arr)):
        raise NegativeFrequency(f"target frequency must be finite and >= 0, got {omega!r}")
    m4 = material.four_pi_m
    x = (w_arr / material.gamma) ** 2
    out = 2.0 * x / (m4 + np.sqrt(m4 * m4 + 4.0 * x))
    return float(out) if w_arr.ndim == 0 else out


def kittel_slope(material: KittelMaterial, h):
    """Local derivative d omega / d h of the Kittel branch at field h."""
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr <= 0.0):
        raise NegativeField(f"slope needs a field > 0, got {h!r}")
    m4 = material.four_pi_m
    out = material.gamma * (2.0 * h_arr + m4) / (2.0 * np.sqrt(h_arr * (h_arr + m4)))
    return float(out) if h_arr.ndim == 0 else out


# ── Stripline coupling ─────────────────────────────────────────────────


def lambda_to_beta(lam: float) -> float:
    """Extrinsic damping rate from a dimensionless stripline coupling.

    beta = 2 pi lambda^2; any finite real lambda is accepted.
    """
    if not isinstance(lam, (int, float)) or not math.isfinite(lam):
        raise InvalidSystem(f"stripline coupling must be a finite real, got {lam!r}")
    return 2.0 * math.pi * float(lam) ** 2


def stripline_vector(system: HybridSystem) -> np.ndarray:
    """Drive-and-readout weight vector: sqrt(2) * sqrt(beta_j) per mode."""
    beta = np.array([m.beta for m in system.modes], dtype=float)
    return math.sqrt(2.0) * np.sqrt(beta)


# ── Coupling matrix, transmission, eigenbranches ───────────────────────


def _check_system(system: HybridSystem) -> None:
    """Revalidate numeric fields (guards against unchecked mutation)."""
    for m in system.modes:
        for name in ("omega", "alpha", "beta"):
            value = getattr(m, name)
            if not math.isfinite(value):
                raise InvalidSystem(f"mode {m.label!r}: {name} is not finite")
            if value < 0:
                raise InvalidSystem(f"mode {m.label!r}: {name} is negative")
    for pair, g in system.couplings.items():
        if not math.isfinite(g):
            raise InvalidSystem(f"coupling {pair} is not finite")


def _assemble_hamiltonian(system: HybridSystem) -> np.ndarray:
    # Raw assembly without validation; passivity diagnostics rely on this
    # to report on deliberately broken systems instead of raising.
    n = system.n
    omega = np.array([m.omega for m in system.modes], dtype=float)
    alpha = np.array([m.alpha for m in system.modes], dtype=float)
    beta = np.array([m.beta for m in system.modes], dtype=float)
    g = np.zeros((n, n), dtype=float)
    for (i, j), value in system.couplings.items():
        g[i, j] = value
        g[j, i] = value
    loss = np.sqrt(np.outer(beta, beta))
    # the diagonal must be exactly alpha + beta, not sqrt(beta**2) + alpha
    np.fill_diagonal(loss, alpha + beta)
    return np.diag(omega) + g - 1j * loss


def build_coupling_hamiltonian(system: HybridSystem) -> np.ndarray:
    """Effective non-Hermitian coupling matrix of the hybrid system.

    Diagonal entries are omega_j - i (alpha_j + beta_j); off-diagonal
    entries combine the coherent coupling with the dissipative stripline
    cross-term, g(j, k) - i sqrt(beta_j beta_k).  The result is complex
    symmetric (equal to its own transpose), not Hermitian.
    """
    _check_system(system)
    return _assemble_hamiltonian(system)


def _response_matrix(ham: np.ndarray, omega: float) -> np.ndarray:
    n = ham.shape[0]
    return 1j * (omega * np.eye(n) - ham)


def _s21_from_matrix(ham: np.ndarray, weights: np.ndarray, omega: float) -> complex:
    m = _response_matrix(ham, omega)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > SINGULAR_COND_LIMIT:
        raise SingularResponse(
            f"response matrix numerically singular at omega={omega!r} "
            f"(estimated condition number {cond:.3e})"
        )
    x = np.linalg.solve(m, weights)
    # summed exactly like the vectorized sweep kernel, so batched maps
    # reproduce scalar calls bit for bit
    return complex(np.sum(x * weights))


def s21(system: HybridSystem, omega: float) -> complex:
    """Complex transmission coefficient at probe frequency omega.

    Solves i (omega I - H) x = w with partial pivoting and returns
    w . x, where w is the stripline weight vector.  No explicit matrix
    inverse is ever formed.
    """
    if not isinstance(omega, (int, float)) or not math.isfinite(omega):
        raise InvalidSystem(f"probe frequency must be a finite real, got {omega!r}")
    _check_system(system)
    ham = _assemble_hamiltonian(system)
    return _s21_from_matrix(ham, stripline_vector(system), float(omega))


def sort_eigenvalues(values: np.ndarray) -> np.ndarray:
    """Deterministic branch order: ascending real part, then imaginary."""
    order = np.lexsort((values.imag, values.real))
    return values[order]


def eigenbranches(system: HybridSystem) -> np.ndarray:
    """Complex eigenvalues of the coupling matrix, in sorted branch order.

    For passive systems (all damping rates nonnegative) every eigenvalue
    sits on or below the real axis up to roundoff.
    """
    ham = build_coupling_hamiltonian(system)
    try:
        values = np.linalg.eigvals(ham)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration failed for matrix {ham!r}") from exc
    return sort_eigenvalues(values)
