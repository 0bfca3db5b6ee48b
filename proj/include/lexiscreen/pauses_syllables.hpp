#pragma once

// Pauses (long non-speech runs) and syllable nuclei (vowel-band energy peaks),
// with the pause and syllable-rate feature groups computed from them.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/dsp.hpp"
#include "lexiscreen/error.hpp"

namespace lexiscreen {

struct Pause {
  double start = 0.0;
  double duration = 0.0;

  double end() const { return start + duration; }
  double midpoint() const { return start + duration / 2.0; }
};

struct SyllablePeak {
  double time = 0.0;
  double value = 0.0;  // smoothed envelope at the peak
};

struct PauseFeatures {
  double mean_dur = 0.0;
  double std_dur = 0.0;
  double min_dur = 0.0;
  double max_dur = 0.0;
  double pause_freq = 0.0;           // pauses per second of recording
  double pauses_per_interval = 0.0;  // mean count per sentence interval
};

struct SyllableRateFeatures {
  double rel_syll_mean = 0.0;
  double rel_syll_std = 0.0;
  double rel_syll_cv = 0.0;
  double articulation_rate = 0.0;  // syllables per second of speech
};

struct PauseOptions {
  double min_duration = 0.200;
  double window = 0.025;        // analysis window, positions pause cells in time
  double total_duration = 0.0;  // when > 0, edge pauses extend to 0 and to this
};

/// Maximal non-speech runs longer than `min_duration`.
///
/// An interior run of N frames starting at frame a spans N hops from the
/// centre cell of frame a. Runs touching the first or last frame are extended
/// to the recording edges when the total duration is known.
inline std::vector<Pause> extract_pauses(const std::vector<bool>& speech, double hop = 0.010,
                                         const PauseOptions& opt = {}) {
  std::vector<Pause> pauses;
  const double offset = (opt.window - hop) / 2.0;
  const auto min_frames = static_cast<std::size_t>(std::llround(opt.min_duration / hop));
  for (const auto& r : runs_of(speech)) {
    if (r.value || r.length <= min_frames) continue;
    double start = double(r.start) * hop + offset;
    double end = start + double(r.length) * hop;
    if (opt.total_duration > 0.0) {
      if (r.start == 0) start = 0.0;
      if (r.start + r.length == speech.size()) end = opt.total_duration;
    }
    pauses.push_back({start, end - start});
  }
  return pauses;
}

inline std::size_t interval_index_of(double t, std::span<const VideoInterval> intervals) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const bool last = i + 1 == intervals.size();
    if (t >= intervals[i].start && (t < intervals[i].end || (last && t <= intervals[i].end))) {
      return i;
    }
  }
  return intervals.size();
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / double(v.size()))};
}

/// Zero pauses yield an all-zero group.
inline PauseFeatures pause_features(std::span<const Pause> pauses,
                                    std::span<const VideoInterval> intervals,
                                    double total_duration) {
  PauseFeatures pf;
  if (pauses.empty() || total_duration <= 0.0) return pf;
  std::vector<double> durations;
  for (const auto& p : pauses) durations.push_back(p.duration);
  const auto ms = mean_std(durations);
  pf.mean_dur = ms.mean;
  pf.std_dur = ms.std;
  pf.min_dur = *std::min_element(durations.begin(), durations.end());
  pf.max_dur = *std::max_element(durations.begin(), durations.end());
  pf.pause_freq = double(pauses.size()) / total_duration;
  if (!intervals.empty()) {
    std::vector<double> counts(intervals.size(), 0.0);
    for (const auto& p : pauses) {
      const auto idx = interval_index_of(p.midpoint(), intervals);
      if (idx < counts.size()) counts[idx] += 1.0;
    }
    pf.pauses_per_interval = mean_std(counts).mean;
  }
  return pf;
}

struct SyllableConfig {
  double smooth_seconds = 0.150;
  double min_level = 0.10;       // fraction of the global envelope maximum
  double min_prominence = 0.05;  // fraction of the global envelope maximum
  double min_gap_seconds = 0.100;
};

/// Centred moving average, window truncated (and renormalized) at the edges.
inline std::vector<double> moving_average(std::span<const double> x, int width) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = width / 2;
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min(n - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1);
  }
  return out;
}

/// Height of env[i] above the higher of the two minima reached before the
/// envelope climbs above env[i] on either side.
inline double peak_prominence(std::span<const double> env, std::size_t i) {
  const double v = env[i];
  double left_min = v;
  for (std::size_t j = i; j-- > 0;) {
    if (env[j] > v) break;
    left_min = std::min(left_min, env[j]);
  }
  double right_min = v;
  for (std::size_t j = i + 1; j < env.size(); ++j) {
    if (env[j] > v) break;
    right_min = std::min(right_min, env[j]);
  }
  return v - std::max(left_min, right_min);
}

/// Syllable nuclei from a vowel-band energy envelope sampled at the frame hop.
inline std::vector<SyllablePeak> detect_syllables(std::span<const double> band_energy,
                                                  const std::vector<bool>& speech,
                                                  double hop = 0.010, double window = 0.025,
                                                  const SyllableConfig& cfg = {}) {
  std::vector<SyllablePeak> peaks;
  const std::size_t n = band_energy.size();
  if (n < 3 || speech.size() != n) return peaks;
  const int width = std::max(1, static_cast<int>(std::lround(cfg.smooth_seconds / hop)) | 1);
  const auto env = moving_average(band_energy, width);
  const double global_max = *std::max_element(env.begin(), env.end());
  if (!(global_max > 0.0)) return peaks;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!speech[i]) continue;
    if (!(env[i] > env[i - 1] && env[i] >= env[i + 1])) continue;
    if (env[i] < cfg.min_level * global_max) continue;
    if (peak_prominence(env, i) < cfg.min_prominence * global_max) continue;
    candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return env[a] > env[b]; });
  const auto min_gap = static_cast<std::size_t>(std::llround(cfg.min_gap_seconds / hop));
  std::vector<std::size_t> kept;
  for (auto c : candidates) {
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (c > k ? c - k : k - c) < min_gap;
    });
    if (clear) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  for (auto k : kept) peaks.push_back({double(k) * hop + window / 2.0, env[k]});
  return peaks;
}

inline std::vector<SyllablePeak> detect_syllables(const FrameTrack& track,
                                                  const SyllableConfig& cfg = {}) {
  std::vector<double> band(track.size());
  for (std::size_t i = 0; i < track.size(); ++i) band[i] = track.frames[i].band_energy;
  return detect_syllables(band, track.speech_flags(), track.hop, track.window, cfg);
}

/// Raw-signal entry point: computes the vowel-band envelope, uses the given VAD.
inline std::vector<SyllablePeak> detect_syllables(std::span<const double> samples,
                                                  const std::vector<bool>& speech,
                                                  const DspConfig& dsp,
                                                  const SyllableConfig& cfg = {}) {
  const auto frames = frame_signal(samples, dsp.window, dsp.hop);
  std::vector<double> band(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    band[i] = spectral_summary(frames[i], dsp.fft_size, dsp.band_low_hz, dsp.band_high_hz)
                  .band_energy;
  }
  return detect_syllables(band, speech, dsp.hop_seconds(), dsp.window_seconds(), cfg);
}

/// Per-interval detected/expected ratios and the articulation rate.
inline SyllableRateFeatures syllable_rate_features(std::span<const SyllablePeak> peaks,
                                                   std::span<const VideoInterval> intervals,
                                                   std::span<const int> expected_counts,
                                                   double speech_duration) {
  if (intervals.size() != expected_counts.size()) {
    throw Error(ErrorCode::IntervalCountMismatch,
                std::to_string(intervals.size()) + " intervals vs " +
                    std::to_string(expected_counts.size()) + " sentences");
  }
  SyllableRateFeatures sr;
  if (intervals.empty()) return sr;
  std::vector<double> detected(intervals.size(), 0.0);
  for (const auto& p : peaks) {
    const auto idx = interval_index_of(p.time, intervals);
    if (idx < detected.size()) detected[idx] += 1.0;
  }
  std::vector<double> ratios(intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (expected_counts[i] < 1) {
      throw Error(ErrorCode::OutOfRange, "expected syllable count must be >= 1");
    }
    ratios[i] = detected[i] / double(expected_counts[i]);
  }
  const auto ms = mean_std(ratios);
  sr.rel_syll_mean = ms.mean;
  sr.rel_syll_std = ms.std;
  sr.rel_syll_cv = ms.mean > 0.0 ? ms.std / ms.mean : 0.0;
  sr.articulation_rate = speech_duration < 0.1 ? 0.0 : double(peaks.size()) / speech_duration;
  return sr;
}

/// `kind,start,duration` rows: one per pause, then one per syllable peak.
inline std::string format_events(std::span<const Pause> pauses,
                                 std::span<const SyllablePeak> peaks) {
  std::string out = "kind,start,duration\n";
  for (const auto& p : pauses) {
    out += "pause," + text::format_fixed(p.start, 4) + "," + text::format_fixed(p.duration, 4) + "\n";
  }
  for (const auto& p : peaks) out += "syllable," + text::format_fixed(p.time, 4) + ",0\n";
  return out;
}

}  // namespace lexiscreen
