#include "pdmr/sequence_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdmr/noise.hpp"

namespace pdmr {

void PulseSequence::validate() const {
  int readouts = 0;
  std::vector<int> tones;
  for (const auto& s : segments) {
    if (!(s.duration_us > 0.0)) throw std::invalid_argument("PulseSequence: durations must be > 0");
    if (s.kind == SegmentKind::Readout) ++readouts;
    if (s.kind == SegmentKind::Mw) {
      if (!s.mw) throw std::invalid_argument("PulseSequence: MW segment without a pulse");
      if (s.mw->duration_us && !(*s.mw->duration_us >= 0.0)) {
        throw std::invalid_argument("PulseSequence: MW pulse duration must be >= 0");
      }
      tones.push_back(s.mw->tone);
    }
  }
  if (readouts != 1) {
    throw std::invalid_argument("PulseSequence: exactly one readout segment per repetition");
  }
  if (modulation) {
    if (std::find(tones.begin(), tones.end(), modulation->target_tone) == tones.end()) {
      throw std::invalid_argument("PulseSequence: modulated tone is not in the sequence");
    }
    if (modulation->period_reps < 2 || modulation->period_reps % 2 != 0) {
      throw std::invalid_argument("PulseSequence: modulation period must be an even number of reps");
    }
  }
}

PulseSequence PulseSequence::pulsed(double frequency_mhz, double mw_power) {
  PulseSequence seq;
  seq.segments.push_back({SegmentKind::Laser, 3.0, std::nullopt});
  seq.segments.push_back({SegmentKind::Wait, 1.0, std::nullopt});
  seq.segments.push_back({SegmentKind::Mw, 0.1, MwPulse{0, frequency_mhz, mw_power, std::nullopt}});
  seq.segments.push_back({SegmentKind::Readout, 1.0, std::nullopt});
  seq.modulation = Modulation{0, 2};
  return seq;
}

PulseSequence PulseSequence::two_frequency(double f1_mhz, double f2_mhz, double mw_power) {
  PulseSequence seq;
  seq.segments.push_back({SegmentKind::Laser, 3.0, std::nullopt});
  seq.segments.push_back({SegmentKind::Wait, 1.0, std::nullopt});
  seq.segments.push_back({SegmentKind::Mw, 0.1, MwPulse{0, f1_mhz, mw_power, std::nullopt}});
  seq.segments.push_back({SegmentKind::Mw, 0.1, MwPulse{1, f2_mhz, mw_power, std::nullopt}});
  seq.segments.push_back({SegmentKind::Readout, 1.0, std::nullopt});
  seq.modulation = Modulation{0, 2};
  return seq;
}

bool envelope_on(int repetition, int period_reps) {
  return (repetition % period_reps) < period_reps / 2;
}

double demodulate_square(const std::vector<double>& samples, int period_reps) {
  if (period_reps < 2 || period_reps % 2 != 0) {
    throw std::invalid_argument("demodulate_square: period must be even and >= 2");
  }
  if (samples.empty() || samples.size() % static_cast<std::size_t>(period_reps) != 0) {
    throw std::invalid_argument("demodulate_square: need an integer number of periods");
  }
  double on = 0.0;
  double off = 0.0;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    (envelope_on(static_cast<int>(r), period_reps) ? on : off) += samples[r];
  }
  const double half = static_cast<double>(samples.size()) / 2.0;
  return on / half - off / half;
}

MwField EngineSettings::field_at(double mw_power) const {
  if (!(mw_power >= 0.0)) throw std::invalid_argument("MW power must be >= 0");
  return nominal_field.scaled(std::sqrt(mw_power / nominal_mw_power));
}

void EngineSettings::validate() const {
  if (!(linewidth_fwhm_mhz > 0.0)) throw std::invalid_argument("linewidth must be > 0");
  if (!(address_window_fwhm > 0.0)) throw std::invalid_argument("address window must be > 0");
  if (!(nominal_mw_power > 0.0)) throw std::invalid_argument("nominal MW power must be > 0");
  if (modulation_period_reps < 2 || modulation_period_reps % 2 != 0) {
    throw std::invalid_argument("modulation period must be an even number of repetitions");
  }
  if (repetitions < modulation_period_reps || repetitions % modulation_period_reps != 0) {
    throw std::invalid_argument("repetitions must be a positive multiple of the modulation period");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
}

double addressed_lineshape(double detuning_mhz, const EngineSettings& settings) {
  const double fwhm = settings.linewidth_fwhm_mhz;
  if (std::abs(detuning_mhz) > settings.address_window_fwhm * fwhm) return 0.0;
  const double x = 2.0 * detuning_mhz / fwhm;
  return 1.0 / (1.0 + x * x);
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void apply_pulse(const MwPulse& pulse, const DefectSpecies& species,
                 const EngineSettings& settings, std::vector<Populations>& state) {
  const MwField field = settings.field_at(pulse.power);
  const MwField nominal = settings.field_at(settings.nominal_mw_power);
  for (Transition t : species.driven_transitions()) {
    const double detuning = pulse.frequency_mhz - transition_frequency(species.zfs, t);
    const double profile = addressed_lineshape(detuning, settings);
    if (profile == 0.0) continue;
    const auto couplings = transition_couplings(species, field, t);
    double duration = 0.0;
    if (pulse.duration_us) {
      duration = *pulse.duration_us;
    } else {
      const double w_med = median(transition_couplings(species, nominal, t));
      if (w_med == 0.0) continue;
      duration = 0.5 / w_med;
    }
    for (std::size_t k = 0; k < state.size(); ++k) {
      const double q = profile * (1.0 - rabi_rwa(couplings[k], 0.0, duration));
      auto& p = state[k];
      double& partner = (t == Transition::Plus) ? p.p_plus : p.p_minus;
      const double p0 = p.p0;
      p.p0 = p0 * (1.0 - q) + partner * q;
      partner = partner * (1.0 - q) + p0 * q;
    }
  }
}

std::vector<Populations> polarized_state(const DefectSpecies& species, std::size_t n,
                                         const EngineSettings& settings) {
  const auto rates =
      PhotoCycleRates::at_power(species.photophysics, settings.readout.laser_power);
  const double p = rates.k_pump > 0.0 ? polarized_ms0_fraction(rates) : 1.0 / 3.0;
  return std::vector<Populations>(n, Populations{p, 0.5 * (1.0 - p), 0.5 * (1.0 - p)});
}

}  // namespace

double execute_repetition(const PulseSequence& sequence, const DefectSpecies& species,
                          const EngineSettings& settings, bool modulated_tone_on) {
  const std::size_t n = species.orientation == OrientationClass::Axial ? 1 : 6;
  std::vector<Populations> state = polarized_state(species, n, settings);
  for (const auto& seg : sequence.segments) {
    switch (seg.kind) {
      case SegmentKind::Laser:
        state = polarized_state(species, n, settings);
        break;
      case SegmentKind::Mw: {
        const bool modulated = sequence.modulation && seg.mw->tone == sequence.modulation->target_tone;
        if (modulated && !modulated_tone_on) break;
        apply_pulse(*seg.mw, species, settings, state);
        break;
      }
      case SegmentKind::Wait:
        break;
      case SegmentKind::Readout: {
        double p0 = 0.0;
        for (const auto& p : state) p0 += p.p0;
        return p0 / static_cast<double>(n);
      }
    }
  }
  throw std::logic_error("execute_repetition: sequence has no readout");
}

double demodulated_signal(const PulseSequence& sequence, const Registry& registry,
                          Channel channel, const EngineSettings& settings, std::uint64_t stream) {
  const int reps = settings.repetitions;
  const int period = settings.modulation_period_reps;
  double total = 0.0;
  std::vector<double> samples(static_cast<std::size_t>(reps));
  for (const auto& species : registry) {
    const double on = readout_signal(species, execute_repetition(sequence, species, settings, true),
                                     channel, settings.readout);
    const double off = readout_signal(
        species, execute_repetition(sequence, species, settings, false), channel, settings.readout);
    for (int r = 0; r < reps; ++r) samples[r] = envelope_on(r, period) ? on : off;
    total += demodulate_square(samples, period);
  }
  if (settings.noise_sigma > 0.0) {
    // Per-repetition noise sized so the demodulated point has noise_sigma.
    const double rep_sigma = settings.noise_sigma * std::sqrt(static_cast<double>(reps)) / 2.0;
    NoiseSource noise(settings.seed, stream);
    for (int r = 0; r < reps; ++r) samples[r] = noise.normal(rep_sigma);
    total += demodulate_square(samples, period);
  }
  return total;
}

std::vector<double> frequency_grid(double f_start_mhz, double f_stop_mhz, double step_mhz) {
  if (!(f_start_mhz < f_stop_mhz)) throw std::invalid_argument("frequency sweep: need f_start < f_stop");
  if (!(step_mhz > 0.0)) throw std::invalid_argument("frequency sweep: step must be > 0");
  const auto n = static_cast<std::size_t>(std::floor((f_stop_mhz - f_start_mhz) / step_mhz + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = f_start_mhz + step_mhz * static_cast<double>(i);
  return g;
}

Spectrum run_pulsed_spectrum(const Registry& registry, Channel channel, double f_start_mhz,
                             double f_stop_mhz, double step_mhz, double mw_power,
                             const EngineSettings& settings) {
  settings.validate();
  Spectrum sp;
  sp.freq_mhz = frequency_grid(f_start_mhz, f_stop_mhz, step_mhz);
  sp.channel = channel;
  sp.laser_power = settings.readout.laser_power;
  sp.mw_power = mw_power;
  sp.seed = settings.seed;
  sp.signal.reserve(sp.freq_mhz.size());
  for (std::size_t i = 0; i < sp.freq_mhz.size(); ++i) {
    PulseSequence seq = PulseSequence::pulsed(sp.freq_mhz[i], mw_power);
    seq.modulation->period_reps = settings.modulation_period_reps;
    seq.validate();
    sp.signal.push_back(demodulated_signal(seq, registry, channel, settings, i));
  }
  return sp;
}

Spectrum run_two_frequency(const Registry& registry, double f1_mhz, double f2_start_mhz,
                           double f2_stop_mhz, double step_mhz, double mw_power,
                           Channel channel, const EngineSettings& settings) {
  settings.validate();
  Spectrum sp;
  sp.freq_mhz = frequency_grid(f2_start_mhz, f2_stop_mhz, step_mhz);
  sp.channel = channel;
  sp.laser_power = settings.readout.laser_power;
  sp.mw_power = mw_power;
  sp.seed = settings.seed;
  // Each output point is the difference of two lock-in measurements.
  EngineSettings half = settings;
  half.noise_sigma = settings.noise_sigma / std::sqrt(2.0);
  PulseSequence baseline = PulseSequence::pulsed(f1_mhz, mw_power);
  baseline.modulation->period_reps = settings.modulation_period_reps;
  baseline.validate();
  for (std::size_t i = 0; i < sp.freq_mhz.size(); ++i) {
    PulseSequence seq = PulseSequence::two_frequency(f1_mhz, sp.freq_mhz[i], mw_power);
    seq.modulation->period_reps = settings.modulation_period_reps;
    seq.validate();
    const double with_mw2 = demodulated_signal(seq, registry, channel, half, 2 * i);
    const double without_mw2 = demodulated_signal(baseline, registry, channel, half, 2 * i + 1);
    sp.signal.push_back(with_mw2 - without_mw2);
  }
  return sp;
}

double channel_full_scale(const Registry& registry, Channel channel,
                          const ReadoutConditions& readout) {
  double scale = 0.0;
  for (const auto& s : registry) {
    scale = std::max(scale, std::abs(full_inversion_signal(s, channel, readout)));
  }
  return scale;
}

RabiTrace run_rabi_sweep(const Registry& registry, double frequency_mhz,
                         const std::vector<double>& durations_us, double mw_power,
                         Channel channel, const EngineSettings& settings,
                         const RabiSweepOptions& options) {
  settings.validate();
  const MwField field = settings.field_at(mw_power);
  RabiTrace trace;
  trace.time_us = durations_us;
  trace.signal.assign(durations_us.size(), 0.0);
  trace.channel = channel;
  trace.drive_frequency_mhz = frequency_mhz;
  trace.mw_power = mw_power;

  double full_scale = 0.0;
  bool matched = false;
  for (const auto& species : registry) {
    for (Transition t : species.driven_transitions()) {
      const double detuning = frequency_mhz - transition_frequency(species.zfs, t);
      if (std::abs(detuning) > settings.linewidth_fwhm_mhz) continue;
      matched = true;
      EnsembleRabiOptions ens;
      ens.detuning_mhz = detuning;
      ens.decay_time_us = options.decay_time_us;
      const RabiTrace pops = simulate_ensemble_rabi(species, field, t, durations_us, ens);
      const auto rates =
          PhotoCycleRates::at_power(species.photophysics, settings.readout.laser_power);
      const double p_ref = rates.k_pump > 0.0 ? polarized_ms0_fraction(rates) : 1.0 / 3.0;
      for (std::size_t i = 0; i < durations_us.size(); ++i) {
        const double f = ms0_after_transfer(p_ref, 1.0 - pops.signal[i]);
        trace.signal[i] += readout_signal(species, f, channel, settings.readout);
      }
      full_scale += std::abs(full_inversion_signal(species, channel, settings.readout));
    }
  }
  if (!matched) {
    throw NoMatchingTransition("run_rabi_sweep: no registry transition within one linewidth of " +
                               std::to_string(frequency_mhz) + " MHz");
  }
  NoiseSource noise(options.seed, 0);
  for (std::size_t i = 0; i < durations_us.size(); ++i) {
    const double t = durations_us[i];
    trace.signal[i] += full_scale * (options.drift_intercept_rel + options.drift_slope_rel_per_us * t);
    trace.signal[i] += noise.normal(options.noise_rel * full_scale);
  }
  return trace;
}

}  // namespace pdmr
