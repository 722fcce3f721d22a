"""Scenario assembly: bind geometry, channel, physiology, and waveform
into a simulated slow-time acquisition.

A run draws one block-fading channel realization, modulates the two path
reflectivities with the respiration trace seen from each incidence angle,
transmits the scheduled precoder per pulse, and matched-filters the noisy
echo into an antennas x pulses record. Noise is redrawn per pulse; the
channel and clutter stay fixed for the run.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import sigproc
from .channel import (ChannelRealization, RisConfig, build_ris_grid,
                      realize_channel, ris_focus_profile)
from .geometry import (SPEED_OF_LIGHT, ArrayConfig, PathAngles, Placement,
                       angles_from_placement, ula_steering)
from .physio import DisplacementTrace, RcsModel, load_trace_csv, rcs_series, \
    synth_respiration
from .sigproc import (SlowTimeRecord, VitalSignEstimate, Waveform,
                      clutter_filter, make_waveform, peak_quality,
                      phase_demodulate, power_spectrum, separate_paths)

THERMAL_NOISE_DBM_PER_HZ = -174.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * np.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    return 10.0 * np.log10(watts * 1e3)


@dataclass(frozen=True)
class RadarConfig:
    """Radar front-end parameters (SI units)."""

    element_count: int = 5
    carrier_frequency: float = 7.15e9     # Hz
    bandwidth: float = 0.5e6              # Hz
    fast_time_samples: int = 64
    pulse_repetition_interval: float = 0.25   # s
    total_power: float = 10e-3            # W
    noise_figure_db: float = 10.0
    tone_frequency: float | None = None   # None -> fs / 4
    element_spacing: float | None = None  # None -> half wavelength

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def fast_rate(self) -> float:
        """Fast-time sample rate: K samples across the 1/B pulse."""
        return self.fast_time_samples * self.bandwidth

    @property
    def slow_rate(self) -> float:
        return 1.0 / self.pulse_repetition_interval

    @property
    def spacing(self) -> float:
        return (self.element_spacing if self.element_spacing is not None
                else self.wavelength / 2.0)

    @property
    def noise_floor_dbm(self) -> float:
        return (THERMAL_NOISE_DBM_PER_HZ
                + 10.0 * np.log10(self.bandwidth) + self.noise_figure_db)

    @property
    def noise_power(self) -> float:
        """Per-sample complex noise variance [W]."""
        return dbm_to_watts(self.noise_floor_dbm)

    @property
    def array_config(self) -> ArrayConfig:
        return ArrayConfig(self.element_count, self.spacing, self.wavelength)

    def waveform(self) -> Waveform:
        f0 = self.tone_frequency if self.tone_frequency is not None \
            else self.fast_rate / 4.0
        return make_waveform(f0, self.fast_rate, self.fast_time_samples)


@dataclass(frozen=True)
class RisPanel:
    rows: int = 10
    cols: int = 10
    element_spacing: float | None = None  # None -> half wavelength
    phase_bits: int | None = None         # None -> continuous phases


@dataclass(frozen=True)
class PhysioConfig:
    """Respiration source and chest reflectivity parameters."""

    breath_rate: float = 0.133        # Hz
    peak_to_peak: float = 0.02        # m
    duration: float = 60.0            # s
    harmonics: int = 0
    drift: float = 0.0                # m over the full duration
    reflectivity_ris: float = 40.0    # dimensionless amplitude RCS, q_alpha
    reflectivity_direct: float = 3.0  # q_beta: near-grazing view returns far less power
    gain_exponent: float | None = None  # None -> pinned cos^p default
    gain_table: tuple = ()            # non-empty -> measured-table mode
    distortion_strength: float = 0.35
    trace_file: str | None = None     # CSV overrides the synthetic source


@dataclass(frozen=True)
class ChannelConfig:
    k_rice_db: float = 10.0
    clutter_strength: float = 1e-10   # per-entry variance of H_C


@dataclass(frozen=True)
class ProcessingConfig:
    clutter_window: int | None = 21   # slow-time samples; None skips the filter
    zero_pad_factor: int = 4
    band: tuple = sigproc.RESPIRATION_BAND
    detrend: bool = True


def default_placement() -> Placement:
    """Radar 3 m from the chest, RIS panel facing the chest from the front."""
    target = np.array([3.0, 0.0, 1.0])
    ris = np.array([2.707, 1.4606, 1.0])
    chest_normal = ris - target
    chest_normal /= np.linalg.norm(chest_normal)
    return Placement(radar_position=np.array([0.0, 0.0, 1.0]),
                     ris_center=ris,
                     ris_normal=np.array([0.0, -1.0, 0.0]),
                     target_position=target,
                     chest_normal=chest_normal)


@dataclass(frozen=True)
class Scenario:
    radar: RadarConfig = field(default_factory=RadarConfig)
    ris: RisPanel = field(default_factory=RisPanel)
    placement: Placement = field(default_factory=default_placement)
    physio: PhysioConfig = field(default_factory=PhysioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)

    @property
    def slow_time_samples(self) -> int:
        return int(round(self.physio.duration * self.radar.slow_rate))

    @property
    def angles(self) -> PathAngles:
        return angles_from_placement(self.placement)

    def rcs_model(self, reflectivity: float) -> RcsModel:
        p = self.physio
        if p.gain_table:
            return RcsModel(reflectivity, angle_gain_model="measured",
                            table=p.gain_table,
                            distortion_strength=p.distortion_strength)
        kwargs = {}
        if p.gain_exponent is not None:
            kwargs["exponent"] = p.gain_exponent
        return RcsModel(reflectivity, distortion_strength=p.distortion_strength,
                        **kwargs)

    def ris_config(self) -> RisConfig:
        spacing = (self.ris.element_spacing if self.ris.element_spacing
                   is not None else self.radar.wavelength / 2.0)
        panel = build_ris_grid(self.placement.ris_center,
                               self.placement.ris_normal,
                               self.ris.rows, self.ris.cols, spacing)
        phases = ris_focus_profile(self.placement, panel, self.radar.wavelength)
        if self.ris.phase_bits is not None:
            step = 2.0 * np.pi / (2 ** self.ris.phase_bits)
            phases = np.round(phases / step) * step
        return panel.with_phases(phases)

    def steering_pair(self):
        """Receive-side steering vectors toward the target and the RIS."""
        angles = self.angles
        cfg = self.radar.array_config
        return (ula_steering(cfg, angles.theta_direct),
                ula_steering(cfg, angles.theta_ris))

    def base_trace(self) -> DisplacementTrace:
        p = self.physio
        if p.trace_file is not None:
            return load_trace_csv(p.trace_file, self.radar.slow_rate)[0]
        return synth_respiration(p.breath_rate, p.peak_to_peak, p.duration,
                                 self.radar.slow_rate, harmonics=p.harmonics,
                                 drift=p.drift, rng_seed=0)


@dataclass(frozen=True)
class RunResult:
    """One acquisition with its extraction products."""

    record: SlowTimeRecord
    estimates: dict          # path label -> VitalSignEstimate
    channel: ChannelRealization
    seed: int
    gamma_ris: float | None = None
    slots_ris: np.ndarray | None = None


def transmit_steering(scn: Scenario):
    """Conjugated steering pair used to build transmit precoders.

    With exp(-j*2*pi*d/lambda) propagation the physical field radiated
    toward an angle is a(theta)^T w, so holding |a^H w| on the conjugated
    vectors steers the actual emitted power.
    """
    a_d, a_r = scn.steering_pair()
    return np.conj(a_d.entries), np.conj(a_r.entries)


def simulate_acquisition(scn: Scenario, schedule: np.ndarray,
                         seed) -> tuple[SlowTimeRecord, ChannelRealization]:
    """Run one acquisition of L pulses under a per-pulse precoder schedule.

    `schedule` is (M, L). Per pulse, the end-to-end channel response is
    excited, white noise at the configured floor is added across fast time,
    and each antenna row is matched filtered to one complex sample.
    """
    schedule = np.asarray(schedule, dtype=complex)
    m = scn.radar.element_count
    length = scn.slow_time_samples
    if schedule.shape != (m, length):
        raise ValueError(f"schedule shape {schedule.shape} != ({m}, {length})")
    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    ch_seed, ris_obs_seed, dir_obs_seed, noise_seed = ss.spawn(4)

    ch = realize_channel(scn.placement, scn.radar.array_config,
                         scn.ris_config(),
                         k_rice=db_to_linear(scn.channel.k_rice_db),
                         clutter_strength=scn.channel.clutter_strength,
                         rng_seed=ch_seed)

    trace = scn.base_trace()
    angles = scn.angles
    lam = scn.radar.wavelength
    alpha = rcs_series(scn.rcs_model(scn.physio.reflectivity_ris), trace,
                       angles.chest_incidence_ris, lam, rng_seed=ris_obs_seed)
    beta = rcs_series(scn.rcs_model(scn.physio.reflectivity_direct), trace,
                      angles.chest_incidence_direct, lam, rng_seed=dir_obs_seed)

    v_ris = ch.ris_cascade
    signal = (v_ris[:, None] * (alpha * (v_ris @ schedule))
              + ch.h_D[:, None] * (beta * (ch.h_D @ schedule))
              + ch.H_C @ schedule)

    waveform = scn.radar.waveform()
    rng = np.random.default_rng(noise_seed)
    sigma = np.sqrt(scn.radar.noise_power / 2.0)
    shape = (m, length, waveform.k_fast)
    noise_fast = sigma * (rng.standard_normal(shape)
                          + 1j * rng.standard_normal(shape))
    noise_mf = noise_fast @ np.conj(waveform.samples) / waveform.energy
    record = SlowTimeRecord(samples=signal + noise_mf,
                            slow_rate=scn.radar.slow_rate)
    return record, ch


def extract_vital_signs(scn: Scenario, record: SlowTimeRecord,
                        w_direct: np.ndarray, w_ris: np.ndarray,
                        slots_direct=None, slots_ris=None) -> dict:
    """Clutter-filter, separate, demodulate, and grade both path branches.

    With temporal slot sets, each branch is demodulated over its own slots
    only; otherwise over the full record.
    """
    proc = scn.processing
    samples = record.samples
    if proc.clutter_window is not None:
        samples = clutter_filter(samples, proc.clutter_window)
    r_direct, r_ris = separate_paths(samples, w_direct, w_ris)
    # a branch must observe at least one full period of the slowest
    # analysed frequency before its spectrum means anything
    min_len = max(8, int(np.ceil(scn.radar.slow_rate / proc.band[0])))
    out = {}
    for label, series, slots in (("direct", r_direct, slots_direct),
                                 ("ris", r_ris, slots_ris)):
        if slots is not None:
            series = series[np.asarray(sorted(slots), dtype=int)]
        if series.size < min_len:
            out[label] = None
            continue
        displacement = phase_demodulate(series, scn.radar.wavelength,
                                        scn.radar.slow_rate,
                                        detrend=proc.detrend, label=label)
        # common frequency grid across branches: slot subsets are padded to
        # the full acquisition length so peak locations stay comparable
        spectrum = power_spectrum(displacement, proc.zero_pad_factor,
                                  n_fft=proc.zero_pad_factor * record.samples.shape[1])
        peak, prom = peak_quality(spectrum, proc.band)
        out[label] = VitalSignEstimate(displacement=displacement,
                                       spectrum=spectrum, peak_freq=peak,
                                       peak_prominence_db=prom,
                                       path_label=label)
    return out


def noiseless(scn: Scenario) -> Scenario:
    """Copy of the scenario with zero noise, clutter, and fading removed."""
    quiet_radar = replace(scn.radar, noise_figure_db=-np.inf)
    quiet_channel = replace(scn.channel, k_rice_db=np.inf, clutter_strength=0.0)
    return replace(scn, radar=quiet_radar, channel=quiet_channel)
