"""Receive-side processing: waveform, matched filter, clutter removal,
path separation, phase demodulation, spectral estimation, and root-MUSIC.

The chain collapses each pulse to one complex sample per antenna, strips
the static environment in slow time, splits the record into the two path
branches, and converts unwrapped phase back to chest displacement.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayConfig
from .physio import DisplacementTrace

RESPIRATION_BAND = (0.05, 0.7)  # Hz


class SignalError(ValueError):
    """Raised for inconsistent signal-processing inputs."""


@dataclass(frozen=True)
class Waveform:
    """Pulsed sinusoid: tone frequency, sample rate, fast-time samples."""

    f0: float
    fs: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=complex))

    @property
    def k_fast(self) -> int:
        return self.samples.size

    @property
    def pulse_duration(self) -> float:
        return self.k_fast / self.fs

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class SlowTimeRecord:
    """Matched-filtered samples, one row per antenna, one column per pulse."""

    samples: np.ndarray  # (M, L) complex
    slow_rate: float

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=complex))
        if self.samples.ndim != 2:
            raise SignalError("slow-time record must be a matrix")
        if not np.all(np.isfinite(self.samples)):
            raise SignalError("slow-time record contains non-finite entries")


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum as (frequency [Hz], power) pairs."""

    freqs: np.ndarray
    power: np.ndarray

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


@dataclass(frozen=True)
class VitalSignEstimate:
    """Per-path extraction product: trace, spectrum, peak, and quality."""

    displacement: DisplacementTrace
    spectrum: Spectrum
    peak_freq: float
    peak_prominence_db: float
    path_label: str


def make_waveform(f0: float, fs: float, k_fast: int) -> Waveform:
    """Unit-power pulsed sinusoid sqrt(2)*cos(2*pi*f0*k/fs), k = 0..K-1."""
    if not 0 < f0 < fs / 2.0:
        raise SignalError(f"tone frequency {f0} Hz aliases at fs = {fs} Hz")
    k = np.arange(k_fast)
    return Waveform(f0=f0, fs=fs,
                    samples=np.sqrt(2.0) * np.cos(2.0 * np.pi * f0 * k / fs))


def matched_filter(y_fast: np.ndarray, waveform: Waveform) -> complex:
    """Correlate one fast-time row with the waveform, normalized by its energy.

    A channel that returns c * s yields exactly c, so the output scale is
    independent of the pulse length.
    """
    y_fast = np.asarray(y_fast, dtype=complex)
    if y_fast.shape != waveform.samples.shape:
        raise SignalError(
            f"fast-time length {y_fast.shape} != waveform {waveform.samples.shape}")
    return complex(np.vdot(waveform.samples, y_fast) / waveform.energy)


def clutter_filter(record: np.ndarray, window: int) -> np.ndarray:
    """Remove the centered length-`window` slow-time moving average per antenna.

    Edge positions use the window truncated to the record, so slow-time
    constant input maps to zero everywhere.
    """
    record = np.asarray(record, dtype=complex)
    if record.ndim == 1:
        return clutter_filter(record[None, :], window)[0]
    m, length = record.shape
    if window % 2 == 0 or not 3 <= window <= length:
        raise SignalError(
            f"window must be odd and within [3, {length}], got {window}")
    half = window // 2
    # Running mean with truncated edge windows via cumulative sums.
    csum = np.cumsum(record, axis=1)
    csum = np.concatenate([np.zeros((m, 1), dtype=complex), csum], axis=1)
    idx = np.arange(length)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, length - 1)
    means = (csum[:, hi + 1] - csum[:, lo]) / (hi - lo + 1)
    return record - means


def moving_average_response(window: int, freq: float, rate: float) -> float:
    """Frequency response of the centered length-`window` moving average."""
    x = np.pi * freq / rate
    if x == 0:
        return 1.0
    return float(np.sin(window * x) / (window * np.sin(x)))


def separate_paths(record: np.ndarray, w_direct: np.ndarray,
                   w_ris: np.ndarray):
    """Project the record onto the two receive beamformers."""
    record = np.asarray(record, dtype=complex)
    w_direct = np.asarray(w_direct, dtype=complex)
    w_ris = np.asarray(w_ris, dtype=complex)
    if record.shape[0] != w_direct.shape[0] or record.shape[0] != w_ris.shape[0]:
        raise SignalError("beamformer length does not match antenna count")
    return np.conj(w_direct) @ record, np.conj(w_ris) @ record


def phase_demodulate(r: np.ndarray, wavelength: float, slow_rate: float,
                     detrend: bool = True, label: str = "") -> DisplacementTrace:
    """Unwrapped slow-time phase converted to displacement d = (lambda/(4*pi)) * phi.

    The half compensates the round trip. `detrend` removes the least-squares
    line, absorbing unwrap offsets and any constant phase gauge.
    """
    r = np.asarray(r, dtype=complex)
    zero = np.flatnonzero(np.abs(r) == 0.0)
    if zero.size:
        raise SignalError(f"zero-magnitude sample at slow-time index {zero[0]}")
    phi = np.unwrap(np.angle(r))
    if detrend:
        l_idx = np.arange(phi.size)
        coeffs = np.polyfit(l_idx, phi, 1)
        phi = phi - np.polyval(coeffs, l_idx)
    return DisplacementTrace(samples=0.5 * wavelength / (2.0 * np.pi) * phi,
                             slow_rate=slow_rate, label=label)


def power_spectrum(trace: DisplacementTrace, zero_pad_factor: int = 4,
                   n_fft: int | None = None) -> Spectrum:
    """Mean-removed Hann-windowed periodogram, zero-padded by the given factor.

    Normalized so the bin powers sum to the energy of the windowed signal.
    `n_fft` overrides the transform length, letting short slot records be
    evaluated on the frequency grid of a longer acquisition.
    """
    x = trace.samples
    if x.size < 8:
        raise SignalError("need at least 8 samples for a spectrum")
    if zero_pad_factor < 1:
        raise SignalError("zero_pad_factor must be >= 1")
    windowed = (x - np.mean(x)) * np.hanning(x.size)
    if n_fft is None:
        n_fft = x.size * zero_pad_factor
    elif n_fft < x.size:
        raise SignalError(f"n_fft = {n_fft} shorter than the record ({x.size})")
    spec = np.fft.rfft(windowed, n=n_fft)
    power = np.abs(spec) ** 2 / n_fft
    power[1:] *= 2.0
    if n_fft % 2 == 0:
        power[-1] /= 2.0
    return Spectrum(freqs=np.fft.rfftfreq(n_fft, d=1.0 / trace.slow_rate),
                    power=power)


def peak_quality(spectrum: Spectrum, band=RESPIRATION_BAND):
    """Strongest in-band bin and its prominence over the in-band median [dB].

    The median excludes two bins either side of the peak so a sharp tone is
    judged against the surrounding floor rather than its own skirt.
    """
    f_lo, f_hi = band
    in_band = np.flatnonzero((spectrum.freqs >= f_lo) & (spectrum.freqs <= f_hi))
    if in_band.size == 0:
        raise SignalError(f"band [{f_lo}, {f_hi}] Hz contains no bins")
    band_power = spectrum.power[in_band]
    peak_pos = int(np.argmax(band_power))
    peak_freq = float(spectrum.freqs[in_band[peak_pos]])
    keep = np.abs(np.arange(in_band.size) - peak_pos) > 2
    floor = np.median(band_power[keep]) if np.any(keep) else 0.0
    if floor <= 0.0:
        prominence = np.inf if band_power[peak_pos] > 0 else 0.0
    else:
        prominence = 10.0 * np.log10(band_power[peak_pos] / floor)
    return peak_freq, float(max(prominence, 0.0))


def root_music_doa(snapshots: np.ndarray, n_sources: int,
                   cfg: ArrayConfig) -> np.ndarray:
    """Root-MUSIC azimuth estimates from an M x T snapshot matrix.

    Sample covariance -> noise subspace -> unit-circle roots of the
    subspace polynomial -> arcsin of the root phases.
    """
    snapshots = np.asarray(snapshots, dtype=complex)
    m = cfg.element_count
    if snapshots.shape[0] != m:
        raise SignalError("snapshot rows must equal the element count")
    t = snapshots.shape[1]
    if not 1 <= n_sources <= m - 1:
        raise SignalError(f"n_sources must be in [1, {m - 1}], got {n_sources}")
    if t < m:
        raise SignalError(f"need at least {m} snapshots, got {t}")
    cov = snapshots @ snapshots.conj().T / t
    eigvals, eigvecs = np.linalg.eigh(cov)
    noise = eigvecs[:, : m - n_sources]  # eigh sorts ascending
    c = noise @ noise.conj().T
    coeffs = np.array([np.trace(c, offset=k) for k in range(m - 1, -m, -1)])
    roots = np.roots(coeffs)
    inside = roots[np.abs(roots) < 1.0]
    order = np.argsort(np.abs(np.abs(inside) - 1.0))
    scale = cfg.carrier_wavelength / (2.0 * np.pi * cfg.spacing)
    angles = []
    for root in inside[order]:
        sin_theta = np.angle(root) * scale
        if abs(sin_theta) <= 1.0:
            angles.append(float(np.arcsin(sin_theta)))
        if len(angles) == n_sources:
            break
    if len(angles) < n_sources:
        raise SignalError(
            f"only {len(angles)} of {n_sources} roots map to physical angles")
    return np.sort(np.array(angles))
