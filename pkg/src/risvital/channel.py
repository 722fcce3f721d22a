"""Dual-path radar channel synthesis.

Builds the radar->RIS matrix, RIS->target and radar->target vectors from
exact element-to-element free-space propagation, draws Rician fading
around those line-of-sight components, and assembles the end-to-end
monostatic matrix with the two rank-1 target terms plus static clutter.

Propagation phase convention is exp(-j*2*pi*d/lambda) with one-way Friis
amplitude lambda/(4*pi*d) per link leg, so the far-field line-of-sight
vectors align with the +j steering vectors of :mod:`risvital.geometry`.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayConfig, GeometryError, Placement


class ChannelError(ValueError):
    """Raised for inconsistent channel inputs."""


@dataclass(frozen=True)
class RicianSpec:
    """Rician mixture: linear K factor and the line-of-sight component."""

    k_factor: float
    los_component: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "los_component",
                           np.asarray(self.los_component, dtype=complex))
        if self.k_factor < 0:
            raise ChannelError("k_factor must be >= 0")
        if not np.all(np.isfinite(self.los_component)):
            raise ChannelError("los_component must be finite")


@dataclass(frozen=True)
class RisConfig:
    """RIS panel: grid shape, element spacing [m], positions, phases [rad]."""

    rows: int
    cols: int
    element_spacing: float
    element_positions: np.ndarray  # (N, 3)
    phases: np.ndarray             # (N,), in [0, 2*pi)

    def __post_init__(self):
        object.__setattr__(self, "element_positions",
                           np.asarray(self.element_positions, dtype=float))
        object.__setattr__(self, "phases",
                           np.mod(np.asarray(self.phases, dtype=float), 2 * np.pi))
        if self.rows < 1 or self.cols < 1:
            raise ChannelError("RIS grid dimensions must be positive")
        n = self.rows * self.cols
        if self.element_positions.shape != (n, 3):
            raise ChannelError(
                f"expected {n} element positions, got {self.element_positions.shape}")
        if self.phases.shape != (n,):
            raise ChannelError(f"expected {n} phases, got {self.phases.shape}")

    @property
    def element_count(self) -> int:
        return self.rows * self.cols

    @property
    def reflection_matrix(self) -> np.ndarray:
        """Diagonal unit-modulus reflection matrix."""
        return np.diag(np.exp(1j * self.phases))

    def with_phases(self, phases: np.ndarray) -> "RisConfig":
        return RisConfig(self.rows, self.cols, self.element_spacing,
                         self.element_positions, phases)


def build_ris_grid(center, normal, rows: int, cols: int, spacing: float,
                   phases=None) -> RisConfig:
    """Lay out a rows x cols panel centred at `center` in the plane normal to `normal`.

    Columns run along the horizontal in-plane axis, rows along the in-plane
    axis closest to vertical.
    """
    center = np.asarray(center, dtype=float)
    normal = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(normal)
    if norm == 0:
        raise GeometryError("RIS normal must be nonzero")
    normal = normal / norm
    up = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(up, normal)) > 1.0 - 1e-9:
        up = np.array([1.0, 0.0, 0.0])
    col_axis = np.cross(up, normal)
    col_axis /= np.linalg.norm(col_axis)
    row_axis = np.cross(normal, col_axis)
    r_idx = np.arange(rows) - (rows - 1) / 2.0
    c_idx = np.arange(cols) - (cols - 1) / 2.0
    rr, cc = np.meshgrid(r_idx, c_idx, indexing="ij")
    positions = (center
                 + rr.reshape(-1, 1) * spacing * row_axis
                 + cc.reshape(-1, 1) * spacing * col_axis)
    if phases is None:
        phases = np.zeros(rows * cols)
    return RisConfig(rows, cols, spacing, positions, phases)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw of all channel components."""

    H_I: np.ndarray    # (M, N) radar <-> RIS
    h_T: np.ndarray    # (N,)   RIS <-> target
    h_D: np.ndarray    # (M,)   radar <-> target
    H_C: np.ndarray    # (M, M) static clutter
    Gamma: np.ndarray  # (N, N) diagonal, unit modulus

    def __post_init__(self):
        for name in ("H_I", "h_T", "h_D", "H_C", "Gamma"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=complex))
        m, n = self.H_I.shape
        if self.h_T.shape != (n,) or self.h_D.shape != (m,):
            raise ChannelError("channel component shapes are inconsistent")
        if self.H_C.shape != (m, m) or self.Gamma.shape != (n, n):
            raise ChannelError("channel component shapes are inconsistent")
        off = self.Gamma - np.diag(np.diag(self.Gamma))
        if np.any(off != 0):
            raise ChannelError("Gamma must be diagonal")
        if np.max(np.abs(np.abs(np.diag(self.Gamma)) - 1.0)) > 1e-12:
            raise ChannelError("Gamma entries must have unit modulus")
        for name in ("H_I", "h_T", "h_D", "H_C"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ChannelError(f"{name} contains non-finite entries")

    @property
    def ris_cascade(self) -> np.ndarray:
        """One-way radar->RIS->target channel vector H_I @ Gamma @ h_T."""
        return self.H_I @ (np.diag(self.Gamma) * self.h_T)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rician_draw(spec: RicianSpec, rng_seed) -> np.ndarray:
    """Draw sqrt(K/(K+1))*LoS + sqrt(1/(K+1))*nLoS, nLoS entries CN(0, 1)."""
    rng = np.random.default_rng(rng_seed)
    k = spec.k_factor
    nlos = _complex_normal(rng, spec.los_component.shape)
    if np.isinf(k):
        return spec.los_component.copy()
    return (np.sqrt(k / (k + 1.0)) * spec.los_component
            + np.sqrt(1.0 / (k + 1.0)) * nlos)


def _friis_entry(dist: np.ndarray, wavelength: float) -> np.ndarray:
    if np.any(dist == 0):
        raise ChannelError("zero propagation distance")
    return (wavelength / (4.0 * np.pi * dist)) * np.exp(-2j * np.pi * dist / wavelength)


def los_channel(p: Placement, cfg: ArrayConfig, ris: RisConfig):
    """Exact-distance free-space LoS components (H_I, h_T, h_D)."""
    lam = cfg.carrier_wavelength
    radar_el = cfg.element_positions(p.radar_position)          # (M, 3)
    d_ir = np.linalg.norm(radar_el[:, None, :] - ris.element_positions[None, :, :],
                          axis=2)                               # (M, N)
    d_t = np.linalg.norm(ris.element_positions - p.target_position, axis=1)  # (N,)
    d_d = np.linalg.norm(radar_el - p.target_position, axis=1)  # (M,)
    return (_friis_entry(d_ir, lam), _friis_entry(d_t, lam), _friis_entry(d_d, lam))


def ris_focus_profile(p: Placement, ris: RisConfig, wavelength: float) -> np.ndarray:
    """Phases that equalize the cascaded radar->element->target phase over elements."""
    d1 = np.linalg.norm(ris.element_positions - p.radar_position, axis=1)
    d2 = np.linalg.norm(ris.element_positions - p.target_position, axis=1)
    return np.mod(2.0 * np.pi * (d1 + d2) / wavelength, 2.0 * np.pi)


def assemble_end_to_end(ch: ChannelRealization, alpha: complex,
                        beta: complex) -> np.ndarray:
    """End-to-end M x M matrix: RIS cascade term + direct term + clutter.

    Both target terms are symmetric rank-1 outer products v * c * v^T of the
    one-way path vectors, scaled by the complex RCS of that path.
    """
    gamma_diag = np.diag(ch.Gamma)
    v_ris = ch.H_I @ (gamma_diag * ch.h_T)
    return (alpha * np.outer(v_ris, v_ris)
            + beta * np.outer(ch.h_D, ch.h_D)
            + ch.H_C)


def clutter_draw(strength: float, rng_seed, m: int) -> np.ndarray:
    """Static symmetric clutter matrix with per-entry variance `strength`."""
    if strength < 0:
        raise ChannelError("clutter strength must be >= 0")
    rng = np.random.default_rng(rng_seed)
    draw = np.sqrt(strength) * _complex_normal(rng, (m, m))
    upper = np.triu(draw)
    return upper + np.triu(draw, 1).T


def realize_channel(p: Placement, cfg: ArrayConfig, ris: RisConfig,
                    k_rice: float, clutter_strength: float,
                    rng_seed) -> ChannelRealization:
    """Draw one block-fading realization around the exact LoS geometry.

    The unit-variance nLoS draw of each component is scaled to the RMS
    magnitude of its LoS counterpart so fading perturbs the link without
    erasing its path loss.
    """
    rng = np.random.default_rng(rng_seed)
    h_i_los, h_t_los, h_d_los = los_channel(p, cfg, ris)
    parts = []
    for los in (h_i_los, h_t_los, h_d_los):
        scale = np.sqrt(np.mean(np.abs(los) ** 2))
        spec = RicianSpec(k_factor=k_rice, los_component=los / scale)
        parts.append(scale * rician_draw(spec, rng))
    h_i, h_t, h_d = parts
    h_c = clutter_draw(clutter_strength, rng, cfg.element_count)
    return ChannelRealization(H_I=h_i, h_T=h_t, h_D=h_d, H_C=h_c,
                              Gamma=np.diag(np.exp(1j * ris.phases)))
