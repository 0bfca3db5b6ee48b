#pragma once

// Frame-level analysis at a 10 ms hop: energy/intensity, spectral centroid,
// vowel sub-band energy, harmonicity and voice-activity detection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/fft.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

struct DspConfig {
  int window = 400;  // 25 ms
  int hop = 160;     // 10 ms
  int fft_size = 512;

  double db_guard = 1e-12;
  double silence_db = -60.0;  // harmonicity is 0 below this frame energy

  double harmonicity_min_hz = 60.0;
  double harmonicity_max_hz = 400.0;

  double band_low_hz = 300.0;  // vowel sub-band used for syllable nuclei
  double band_high_hz = 2500.0;

  double vad_floor_percentile = 0.10;
  double vad_margin_db = 6.0;
  double vad_absolute_db = -45.0;
  double vad_harmonicity = 0.45;
  double vad_harmonic_margin_db = 3.0;
  int vad_median = 5;
  int vad_hangover = 0;
  int vad_min_run = 3;

  double hop_seconds() const { return double(hop) / kSampleRate; }
  double window_seconds() const { return double(window) / kSampleRate; }
};

struct FrameRecord {
  double energy = 0.0;        // mean square of the raw frame
  double intensity_db = 0.0;  // 10 log10(energy + guard)
  double centroid_hz = 0.0;
  double harmonicity = 0.0;
  double band_energy = 0.0;  // spectral energy in the vowel band
  bool is_speech = false;
};

struct FrameTrack {
  double hop = 0.010;
  double window = 0.025;
  double noise_floor_db = 0.0;
  std::vector<FrameRecord> frames;

  std::size_t size() const { return frames.size(); }

  /// Start of the hop-wide cell centred in frame i's window.
  double cell_start(std::size_t i) const { return double(i) * hop + (window - hop) / 2.0; }
  double center(std::size_t i) const { return double(i) * hop + window / 2.0; }

  std::vector<bool> speech_flags() const {
    std::vector<bool> flags(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) flags[i] = frames[i].is_speech;
    return flags;
  }
  std::size_t speech_frame_count() const {
    return static_cast<std::size_t>(
        std::count_if(frames.begin(), frames.end(), [](const auto& f) { return f.is_speech; }));
  }
};

inline std::size_t frame_count(std::size_t samples, int window, int hop) {
  if (samples < static_cast<std::size_t>(window)) return 0;
  return (samples - window) / hop + 1;
}

inline const std::vector<double>& hamming_window(int n) {
  thread_local std::vector<double> w;
  if (static_cast<int>(w.size()) != n) {
    w.resize(n);
    for (int i = 0; i < n; ++i) w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

/// Hamming-weighted frames; the trailing partial frame is dropped.
inline std::vector<std::vector<double>> frame_signal(std::span<const double> samples,
                                                     int window = 400, int hop = 160) {
  if (samples.size() < static_cast<std::size_t>(window)) {
    throw Error(ErrorCode::TooShort, std::to_string(samples.size()) + " samples < window " +
                                         std::to_string(window));
  }
  const auto& w = hamming_window(window);
  const std::size_t n = frame_count(samples.size(), window, hop);
  std::vector<std::vector<double>> frames(n, std::vector<double>(window));
  for (std::size_t f = 0; f < n; ++f) {
    for (int i = 0; i < window; ++i) frames[f][i] = samples[f * hop + i] * w[i];
  }
  return frames;
}

struct SpectralSummary {
  double centroid_hz = 0.0;
  double band_energy = 0.0;
};

/// Magnitude-weighted centroid over bins in (0, Nyquist] plus the energy in
/// [band_low, band_high], from one zero-padded FFT of a windowed frame.
inline SpectralSummary spectral_summary(std::span<const double> windowed, int fft_size = 512,
                                        double band_low = 300.0, double band_high = 2500.0) {
  const auto& plan = fft_plan(fft_size);
  std::vector<std::complex<double>> x(fft_size);
  const std::size_t n = std::min<std::size_t>(windowed.size(), fft_size);
  for (std::size_t i = 0; i < n; ++i) x[i] = windowed[i];
  plan.forward(x);
  const double bin_hz = double(kSampleRate) / fft_size;
  double weighted = 0.0, total = 0.0, band = 0.0;
  for (int k = 1; k <= fft_size / 2; ++k) {
    const double power = std::norm(x[k]);
    const double mag = std::sqrt(power);
    const double f = k * bin_hz;
    weighted += f * mag;
    total += mag;
    if (f >= band_low && f <= band_high) band += power;
  }
  return {total > 0.0 ? weighted / total : 0.0, band};
}

inline double spectral_centroid(std::span<const double> windowed, int fft_size = 512) {
  return spectral_summary(windowed, fft_size).centroid_hz;
}

/// Peak normalized cross-correlation of the raw frame over pitch lags.
///
/// r(k) = sum x[n]x[n+k] / sqrt(sum_{n<N-k} x[n]^2 * sum_{n>=k} x[n]^2) for
/// lags between fs/max_hz and fs/min_hz, clamped to [0, 1]. Frames below
/// `silence_db` mean-square energy score 0.
inline double harmonicity(std::span<const double> frame, double min_hz = 60.0,
                          double max_hz = 400.0, double silence_db = -60.0) {
  const std::size_t n = frame.size();
  if (n == 0) return 0.0;
  double energy = 0.0;
  for (double v : frame) energy += v * v;
  if (energy / double(n) < std::pow(10.0, silence_db / 10.0)) return 0.0;

  const std::size_t min_lag = static_cast<std::size_t>(std::ceil(kSampleRate / max_hz));
  const std::size_t max_lag =
      std::min(n - 1, static_cast<std::size_t>(std::floor(kSampleRate / min_hz)));
  if (min_lag > max_lag) return 0.0;

  std::size_t fft_size = 1;
  while (fft_size < n + max_lag) fft_size <<= 1;
  const auto& plan = fft_plan(fft_size);
  std::vector<std::complex<double>> x(fft_size);
  for (std::size_t i = 0; i < n; ++i) x[i] = frame[i];
  plan.forward(x);
  for (auto& v : x) v = std::norm(v);
  plan.inverse(x);

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];

  double best = 0.0;
  for (std::size_t k = min_lag; k <= max_lag; ++k) {
    const double num = x[k].real() / double(fft_size);
    const double head = prefix[n - k];
    const double tail = prefix[n] - prefix[k];
    const double den = std::sqrt(head * tail);
    if (den > 0.0) best = std::max(best, num / den);
  }
  return std::clamp(best, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Voice activity

struct Run {
  bool value = false;
  std::size_t start = 0;
  std::size_t length = 0;
};

inline std::vector<Run> runs_of(const std::vector<bool>& flags) {
  std::vector<Run> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (out.empty() || out.back().value != flags[i]) {
      out.push_back({flags[i], i, 1});
    } else {
      ++out.back().length;
    }
  }
  return out;
}

/// Binary median filter with edge replication, repeated until the output no
/// longer changes (a median root).
inline std::vector<bool> median_smooth(std::vector<bool> flags, int width) {
  const int half = width / 2;
  const auto n = static_cast<std::ptrdiff_t>(flags.size());
  if (n == 0 || half == 0) return flags;
  for (std::ptrdiff_t pass = 0; pass <= n; ++pass) {
    std::vector<bool> next(flags.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      int ones = 0;
      for (std::ptrdiff_t j = i - half; j <= i + half; ++j) {
        ones += flags[std::clamp<std::ptrdiff_t>(j, 0, n - 1)] ? 1 : 0;
      }
      next[i] = ones > half;
    }
    if (next == flags) break;
    flags = std::move(next);
  }
  return flags;
}

inline std::vector<bool> apply_hangover(const std::vector<bool>& flags, int frames) {
  if (frames <= 0) return flags;
  std::vector<bool> out = flags;
  const auto n = static_cast<std::ptrdiff_t>(flags.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!flags[i]) continue;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - frames);
         j <= std::min(n - 1, i + frames); ++j) {
      out[j] = true;
    }
  }
  return out;
}

/// Flips runs shorter than `min_run`: short non-speech gaps first, then any
/// short speech run that survived (only possible at the track edges).
inline std::vector<bool> enforce_min_runs(std::vector<bool> flags, int min_run) {
  if (flags.size() < static_cast<std::size_t>(min_run)) return flags;
  for (bool target : {false, true}) {
    for (const auto& r : runs_of(flags)) {
      if (r.value == target && r.length < static_cast<std::size_t>(min_run)) {
        for (std::size_t i = r.start; i < r.start + r.length; ++i) flags[i] = !target;
      }
    }
  }
  return flags;
}

inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::floor(p * double(values.size() - 1)));
  return values[idx];
}

/// Energy/harmonicity speech decision followed by median smoothing, hangover
/// and a minimum run length. Writes is_speech and noise_floor_db into `track`.
inline std::vector<bool> vad(FrameTrack& track, const DspConfig& cfg = {}) {
  std::vector<double> levels;
  levels.reserve(track.size());
  for (const auto& f : track.frames) levels.push_back(f.intensity_db);
  const double floor_db = percentile(levels, cfg.vad_floor_percentile);
  const double threshold = std::max(floor_db + cfg.vad_margin_db, cfg.vad_absolute_db);

  std::vector<bool> raw(track.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& f = track.frames[i];
    raw[i] = f.intensity_db > threshold ||
             (f.harmonicity > cfg.vad_harmonicity &&
              f.intensity_db > floor_db + cfg.vad_harmonic_margin_db);
  }
  auto flags = median_smooth(std::move(raw), cfg.vad_median);
  flags = apply_hangover(flags, cfg.vad_hangover);
  flags = enforce_min_runs(std::move(flags), cfg.vad_min_run);

  track.noise_floor_db = floor_db;
  for (std::size_t i = 0; i < track.size(); ++i) track.frames[i].is_speech = flags[i];
  return flags;
}

/// Full per-frame analysis of a 16 kHz signal, VAD included.
inline FrameTrack analyze(std::span<const double> samples, const DspConfig& cfg = {}) {
  if (samples.size() < static_cast<std::size_t>(cfg.window)) {
    throw Error(ErrorCode::TooShort, "recording shorter than one analysis window");
  }
  FrameTrack track;
  track.hop = cfg.hop_seconds();
  track.window = cfg.window_seconds();
  const std::size_t n = frame_count(samples.size(), cfg.window, cfg.hop);
  track.frames.resize(n);
  const auto& w = hamming_window(cfg.window);
  std::vector<double> windowed(cfg.window);
  for (std::size_t f = 0; f < n; ++f) {
    const auto raw = samples.subspan(f * cfg.hop, cfg.window);
    double sum_sq = 0.0;
    for (int i = 0; i < cfg.window; ++i) {
      sum_sq += raw[i] * raw[i];
      windowed[i] = raw[i] * w[i];
    }
    auto& rec = track.frames[f];
    rec.energy = sum_sq / cfg.window;
    rec.intensity_db = 10.0 * std::log10(rec.energy + cfg.db_guard);
    const auto spec = spectral_summary(windowed, cfg.fft_size, cfg.band_low_hz, cfg.band_high_hz);
    rec.centroid_hz = spec.centroid_hz;
    rec.band_energy = spec.band_energy;
    rec.harmonicity =
        harmonicity(raw, cfg.harmonicity_min_hz, cfg.harmonicity_max_hz, cfg.silence_db);
  }
  vad(track, cfg);
  return track;
}

/// `time,energy,intensity_db,centroid_hz,harmonicity,is_speech`, one row per
/// frame; time is the frame centre in seconds.
inline std::string format_frames(const FrameTrack& track) {
  std::string out = "time,energy,intensity_db,centroid_hz,harmonicity,is_speech\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& f = track.frames[i];
    out += text::format_fixed(track.center(i), 4) + "," + text::format_exact(f.energy) + "," +
           text::format_exact(f.intensity_db) + "," + text::format_exact(f.centroid_hz) + "," +
           text::format_exact(f.harmonicity) + "," + (f.is_speech ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace lexiscreen
