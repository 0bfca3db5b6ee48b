#pragma once

// The 17-dimensional acoustic feature vector and the features.csv table.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/dsp.hpp"
#include "lexiscreen/dynamics.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/pauses_syllables.hpp"
#include "lexiscreen/skill_class.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

inline constexpr std::size_t kFeatureCount = 17;
inline constexpr int kFeatureFormatVersion = 1;

/// Index -> name map, version 1. Classifier stages resolve features through it.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "pause_mean",        "pause_std",          "pause_min",
    "pause_max",         "pause_freq",         "pauses_per_interval",
    "rel_syll_mean",     "rel_syll_std",       "rel_syll_cv",
    "articulation_rate", "spdyn_ratio",        "spdyn_norm_mode_count",
    "spdyn_norm_mode_variation", "intdyn_macro_mean", "intdyn_macro_std",
    "intdyn_micro_mean", "intdyn_micro_std",
};

enum class FeatureGroup { Pause, SyllableRate, SpectralDynamics, IntensityDynamics };

inline FeatureGroup group_of(std::size_t index) {
  if (index < 6) return FeatureGroup::Pause;
  if (index < 10) return FeatureGroup::SyllableRate;
  if (index < 13) return FeatureGroup::SpectralDynamics;
  return FeatureGroup::IntensityDynamics;
}

inline std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  throw Error(ErrorCode::SchemaMismatch, "unknown feature '" + std::string(name) + "'");
}

struct AcousticFeatureVector {
  std::string id;
  std::optional<SkillClass> label;
  std::array<double, kFeatureCount> values{};

  bool operator==(const AcousticFeatureVector&) const = default;
};

struct FeatureConfig {
  DspConfig dsp;
  SyllableConfig syllables;
  DynamicsConfig dynamics;
  double min_pause = 0.200;
};

/// Everything extract_features computed, kept for event/frame dumps.
struct FeatureExtraction {
  AcousticFeatureVector vector;
  FrameTrack track;
  std::vector<Pause> pauses;
  std::vector<SyllablePeak> peaks;
  std::vector<std::string> warnings;
};

inline FeatureExtraction extract_features(const AudioRecording& recording,
                                          std::span<const VideoInterval> intervals,
                                          const StoryText& story, const FeatureConfig& cfg = {}) {
  FeatureExtraction fx;
  fx.vector.id = recording.metadata.id;
  fx.track = analyze(recording.samples, cfg.dsp);
  const auto& track = fx.track;
  const double total = recording.duration();

  PauseOptions popt;
  popt.min_duration = cfg.min_pause;
  popt.window = track.window;
  popt.total_duration = total;
  fx.pauses = extract_pauses(track.speech_flags(), track.hop, popt);
  const auto pf = pause_features(fx.pauses, intervals, total);

  fx.peaks = detect_syllables(track, cfg.syllables);
  const auto expected = story.sentence_syllables();
  const double speech_seconds = double(track.speech_frame_count()) * track.hop;
  const auto sr = syllable_rate_features(fx.peaks, intervals, expected, speech_seconds);

  const auto sd = spectral_dynamics(track, intervals, cfg.dynamics);
  const auto id = intensity_dynamics(track, intervals, cfg.dynamics);
  if (sd.no_speech || id.no_speech) fx.warnings.emplace_back("NoSpeech");

  fx.vector.values = {pf.mean_dur,         pf.std_dur,          pf.min_dur,
                      pf.max_dur,          pf.pause_freq,       pf.pauses_per_interval,
                      sr.rel_syll_mean,    sr.rel_syll_std,     sr.rel_syll_cv,
                      sr.articulation_rate, sd.freq_distribution_ratio, sd.norm_mode_count,
                      sd.norm_mode_variation, id.macro_mean,    id.macro_std,
                      id.micro_mean,       id.micro_std};
  for (double v : fx.vector.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::OutOfRange, "non-finite feature for " + fx.vector.id);
  }
  return fx;
}

// ---------------------------------------------------------------------------
// features.csv
//
//   #lexiscreen-features,1
//   id,class,pause_mean,...,intdyn_micro_std
//   rec001,C_A,0.41,...
//
// `class` may be empty. Values use the shortest exact round-trip form.

inline std::string feature_header() {
  std::string h = "id,class";
  for (auto n : kFeatureNames) h += "," + std::string(n);
  return h;
}

inline std::string format_features(std::span<const AcousticFeatureVector> rows) {
  std::string out = "#lexiscreen-features," + std::to_string(kFeatureFormatVersion) + "\n";
  out += feature_header() + "\n";
  for (const auto& r : rows) {
    out += r.id + "," + (r.label ? std::string(to_string(*r.label)) : std::string());
    for (double v : r.values) out += "," + text::format_exact(v);
    out += "\n";
  }
  return out;
}

inline std::vector<AcousticFeatureVector> parse_features_text(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto next = content.find('\n', pos);
    auto line = text::trim(content.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (!line.empty()) lines.emplace_back(line);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  const std::string version_line = "#lexiscreen-features," + std::to_string(kFeatureFormatVersion);
  if (lines.size() < 2 || lines[0] != version_line) {
    throw Error(ErrorCode::SchemaMismatch, "missing or unknown format version line");
  }
  if (lines[1] != feature_header()) throw Error(ErrorCode::SchemaMismatch, "unexpected column set");
  std::vector<AcousticFeatureVector> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto f = text::split(lines[i]);
    if (f.size() != kFeatureCount + 2) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(i + 1) + " has " +
                                                 std::to_string(f.size()) + " columns");
    }
    AcousticFeatureVector r;
    r.id = f[0];
    if (!f[1].empty()) r.label = parse_skill_class(f[1]);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      r.values[k] = text::parse_double(f[k + 2], ErrorCode::SchemaMismatch, kFeatureNames[k]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_features(const std::filesystem::path& path,
                           std::span<const AcousticFeatureVector> rows) {
  text::write_file(path, format_features(rows));
}

inline std::vector<AcousticFeatureVector> read_features(const std::filesystem::path& path) {
  return parse_features_text(text::read_file(path));
}

}  // namespace lexiscreen
