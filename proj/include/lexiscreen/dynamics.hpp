#pragma once

// Spectral-centroid dynamics (sp-dyn) and intensity dynamics (int-dyn).

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/dsp.hpp"
#include "lexiscreen/pauses_syllables.hpp"

namespace lexiscreen {

enum class RatioScope { Interval, Audio };

inline std::string_view to_string(RatioScope s) {
  return s == RatioScope::Interval ? "interval" : "audio";
}

struct DynamicsConfig {
  double band_width_hz = 400.0;
  int band_count = 20;  // covers [0, 8000)
  RatioScope ratio_scope = RatioScope::Interval;
  int macro_window = 31;  // frames, ~300 ms
  int micro_window = 4;   // first differences per window, ~40 ms
};

struct SpectralDynamics {
  double freq_distribution_ratio = 0.0;
  double norm_mode_count = 0.0;
  double norm_mode_variation = 0.0;
  bool no_speech = false;
};

struct IntensityDynamics {
  double macro_mean = 0.0;
  double macro_std = 0.0;
  double micro_mean = 0.0;
  double micro_std = 0.0;
  bool no_speech = false;
};

struct TopTwo {
  int c1 = 0;
  int c2 = 0;
};

/// Largest and second-largest counts; ties resolve to the lower band.
inline TopTwo top_two(std::span<const int> hist) {
  int best = -1, second = -1;
  for (int b = 0; b < static_cast<int>(hist.size()); ++b) {
    if (best < 0 || hist[b] > hist[best]) {
      second = best;
      best = b;
    } else if (second < 0 || hist[b] > hist[second]) {
      second = b;
    }
  }
  return {best >= 0 ? hist[best] : 0, second >= 0 ? hist[second] : 0};
}

inline int centroid_band(double hz, const DynamicsConfig& cfg) {
  const int b = static_cast<int>(std::floor(hz / cfg.band_width_hz));
  return std::clamp(b, 0, cfg.band_count - 1);
}

/// Frames whose centre falls in each interval, speech frames only.
inline std::vector<std::vector<std::size_t>> speech_frames_by_interval(
    const FrameTrack& track, std::span<const VideoInterval> intervals) {
  std::vector<std::vector<std::size_t>> groups(intervals.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!track.frames[i].is_speech) continue;
    const auto idx = interval_index_of(track.center(i), intervals);
    if (idx < groups.size()) groups[idx].push_back(i);
  }
  return groups;
}

inline SpectralDynamics spectral_dynamics(const FrameTrack& track,
                                          std::span<const VideoInterval> intervals,
                                          const DynamicsConfig& cfg = {}) {
  SpectralDynamics sd;
  const auto groups = speech_frames_by_interval(track, intervals);
  std::vector<int> global(cfg.band_count, 0);
  std::size_t total = 0;
  std::vector<double> ratios, shares;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    std::vector<int> hist(cfg.band_count, 0);
    for (auto i : g) {
      const int b = centroid_band(track.frames[i].centroid_hz, cfg);
      ++hist[b];
      ++global[b];
    }
    total += g.size();
    const auto top = top_two(hist);
    ratios.push_back(double(top.c1) / double(std::max(top.c2, 1)));
    shares.push_back(double(top.c1) / double(g.size()));
  }
  if (total == 0) {
    sd.no_speech = true;
    return sd;
  }
  const auto global_top = top_two(global);
  sd.freq_distribution_ratio =
      cfg.ratio_scope == RatioScope::Interval
          ? mean_std(ratios).mean
          : double(global_top.c1) / double(std::max(global_top.c2, 1));
  sd.norm_mode_count = double(global_top.c1) / double(total);
  sd.norm_mode_variation = mean_std(shares).std;
  return sd;
}

inline IntensityDynamics intensity_dynamics(const FrameTrack& track,
                                            std::span<const VideoInterval> intervals,
                                            const DynamicsConfig& cfg = {}) {
  IntensityDynamics id;
  const auto groups = speech_frames_by_interval(track, intervals);
  std::vector<double> macro, micro;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    std::vector<double> contour;
    contour.reserve(g.size());
    for (auto i : g) contour.push_back(track.frames[i].intensity_db);
    const double offset = mean_std(contour).mean;
    for (auto& v : contour) v -= offset;

    macro.push_back(mean_std(moving_average(contour, cfg.macro_window)).std);

    const std::size_t w = static_cast<std::size_t>(cfg.micro_window);
    const std::size_t diffs = contour.size() - 1;
    for (std::size_t start = 0; start + w <= diffs; start += w) {
      double sum = 0.0;
      for (std::size_t j = start; j < start + w; ++j) sum += std::abs(contour[j + 1] - contour[j]);
      micro.push_back(sum / double(w));
    }
  }
  if (macro.empty()) {
    id.no_speech = true;
    return id;
  }
  const auto ma = mean_std(macro);
  const auto mi = mean_std(micro);
  id.macro_mean = ma.mean;
  id.macro_std = ma.std;
  id.micro_mean = mi.mean;
  id.micro_std = mi.std;
  return id;
}

}  // namespace lexiscreen
