#pragma once

// Run configuration: a flat `key = value` file, `--set key=value` overrides,
// and a dump of every key with its current value.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lexiscreen/classify.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/features.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

struct RunConfig {
  std::filesystem::path corpus = ".";
  std::filesystem::path out = "out";
  std::filesystem::path features;  // empty -> <out>/features.csv
  std::filesystem::path labels;    // empty -> <out>/clusters.csv, else <corpus>/labels.csv
  std::filesystem::path model;     // empty -> <out>/model.rf
  std::uint64_t seed = 1;
  std::vector<PlanId> plans = {PlanId::TwoStageP};
  int folds = 7;
  int n_trees = 50;
  std::string group_by;  // "" or "child_id"
  double tau = 0.5;
  int k_min = 2;
  int k_max = 6;
  int balanced_target = 0;  // 0 -> use every labeled recording
  FeatureConfig features_cfg;
};

namespace config_detail {

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

inline double to_double(std::string_view key, std::string_view v) {
  return text::parse_double(v, ErrorCode::Config, key);
}
inline int to_int(std::string_view key, std::string_view v) {
  return static_cast<int>(text::parse_int(v, ErrorCode::Config, key));
}

inline Entry real(std::string key, double RunConfig::*outer) {
  return {key, [outer](const RunConfig& c) { return text::format_exact(c.*outer); },
          [outer, key](RunConfig& c, std::string_view v) { c.*outer = to_double(key, v); }};
}
inline Entry integer(std::string key, int RunConfig::*outer) {
  return {key, [outer](const RunConfig& c) { return std::to_string(c.*outer); },
          [outer, key](RunConfig& c, std::string_view v) { c.*outer = to_int(key, v); }};
}
inline Entry path(std::string key, std::filesystem::path RunConfig::*outer) {
  return {key, [outer](const RunConfig& c) { return (c.*outer).generic_string(); },
          [outer](RunConfig& c, std::string_view v) { c.*outer = std::filesystem::path(v); }};
}
template <typename Inner, typename T>
Entry nested_real(std::string key, Inner FeatureConfig::*inner, T Inner::*field) {
  return {key,
          [inner, field](const RunConfig& c) { return text::format_exact(c.features_cfg.*inner.*field); },
          [inner, field, key](RunConfig& c, std::string_view v) {
            c.features_cfg.*inner.*field = static_cast<T>(to_double(key, v));
          }};
}
template <typename Inner>
Entry nested_int(std::string key, Inner FeatureConfig::*inner, int Inner::*field) {
  return {key, [inner, field](const RunConfig& c) { return std::to_string(c.features_cfg.*inner.*field); },
          [inner, field, key](RunConfig& c, std::string_view v) {
            c.features_cfg.*inner.*field = to_int(key, v);
          }};
}

inline const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(path("corpus", &RunConfig::corpus));
    t.push_back(path("out", &RunConfig::out));
    t.push_back(path("features", &RunConfig::features));
    t.push_back(path("labels", &RunConfig::labels));
    t.push_back(path("model", &RunConfig::model));
    t.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, std::string_view v) {
                   c.seed = static_cast<std::uint64_t>(text::parse_int(v, ErrorCode::Config, "seed"));
                 }});
    t.push_back({"plans",
                 [](const RunConfig& c) {
                   std::string s;
                   for (auto p : c.plans) s += (s.empty() ? "" : ",") + std::string(to_string(p));
                   return s;
                 },
                 [](RunConfig& c, std::string_view v) {
                   c.plans.clear();
                   for (const auto& name : text::split(v)) c.plans.push_back(parse_plan_id(text::trim(name)));
                   if (c.plans.empty()) throw Error(ErrorCode::Config, "plans is empty");
                 }});
    t.push_back(integer("folds", &RunConfig::folds));
    t.push_back(integer("n_trees", &RunConfig::n_trees));
    t.push_back({"group_by", [](const RunConfig& c) { return c.group_by; },
                 [](RunConfig& c, std::string_view v) {
                   if (!v.empty() && v != "child_id") {
                     throw Error(ErrorCode::Config, "group_by must be empty or child_id");
                   }
                   c.group_by = std::string(v);
                 }});
    t.push_back(real("tau", &RunConfig::tau));
    t.push_back(integer("k_min", &RunConfig::k_min));
    t.push_back(integer("k_max", &RunConfig::k_max));
    t.push_back(integer("balanced_target", &RunConfig::balanced_target));

    t.push_back(nested_int("dsp.window", &FeatureConfig::dsp, &DspConfig::window));
    t.push_back(nested_int("dsp.hop", &FeatureConfig::dsp, &DspConfig::hop));
    t.push_back(nested_int("dsp.fft_size", &FeatureConfig::dsp, &DspConfig::fft_size));
    t.push_back(nested_real("dsp.silence_db", &FeatureConfig::dsp, &DspConfig::silence_db));
    t.push_back(nested_real("dsp.harmonicity_min_hz", &FeatureConfig::dsp, &DspConfig::harmonicity_min_hz));
    t.push_back(nested_real("dsp.harmonicity_max_hz", &FeatureConfig::dsp, &DspConfig::harmonicity_max_hz));
    t.push_back(nested_real("dsp.band_low_hz", &FeatureConfig::dsp, &DspConfig::band_low_hz));
    t.push_back(nested_real("dsp.band_high_hz", &FeatureConfig::dsp, &DspConfig::band_high_hz));
    t.push_back(nested_real("vad.floor_percentile", &FeatureConfig::dsp, &DspConfig::vad_floor_percentile));
    t.push_back(nested_real("vad.margin_db", &FeatureConfig::dsp, &DspConfig::vad_margin_db));
    t.push_back(nested_real("vad.absolute_db", &FeatureConfig::dsp, &DspConfig::vad_absolute_db));
    t.push_back(nested_real("vad.harmonicity", &FeatureConfig::dsp, &DspConfig::vad_harmonicity));
    t.push_back(nested_real("vad.harmonic_margin_db", &FeatureConfig::dsp, &DspConfig::vad_harmonic_margin_db));
    t.push_back(nested_int("vad.median", &FeatureConfig::dsp, &DspConfig::vad_median));
    t.push_back(nested_int("vad.hangover", &FeatureConfig::dsp, &DspConfig::vad_hangover));
    t.push_back(nested_int("vad.min_run", &FeatureConfig::dsp, &DspConfig::vad_min_run));
    t.push_back({"pause.min_duration",
                 [](const RunConfig& c) { return text::format_exact(c.features_cfg.min_pause); },
                 [](RunConfig& c, std::string_view v) {
                   c.features_cfg.min_pause = to_double("pause.min_duration", v);
                 }});
    t.push_back(nested_real("syllable.smooth_seconds", &FeatureConfig::syllables, &SyllableConfig::smooth_seconds));
    t.push_back(nested_real("syllable.min_level", &FeatureConfig::syllables, &SyllableConfig::min_level));
    t.push_back(nested_real("syllable.min_prominence", &FeatureConfig::syllables, &SyllableConfig::min_prominence));
    t.push_back(nested_real("syllable.min_gap_seconds", &FeatureConfig::syllables, &SyllableConfig::min_gap_seconds));
    t.push_back(nested_real("spdyn.band_width_hz", &FeatureConfig::dynamics, &DynamicsConfig::band_width_hz));
    t.push_back(nested_int("spdyn.band_count", &FeatureConfig::dynamics, &DynamicsConfig::band_count));
    t.push_back({"spdyn.ratio_scope",
                 [](const RunConfig& c) { return std::string(to_string(c.features_cfg.dynamics.ratio_scope)); },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "interval") {
                     c.features_cfg.dynamics.ratio_scope = RatioScope::Interval;
                   } else if (v == "audio") {
                     c.features_cfg.dynamics.ratio_scope = RatioScope::Audio;
                   } else {
                     throw Error(ErrorCode::Config, "spdyn.ratio_scope must be interval or audio");
                   }
                 }});
    t.push_back(nested_int("intdyn.macro_window", &FeatureConfig::dynamics, &DynamicsConfig::macro_window));
    t.push_back(nested_int("intdyn.micro_window", &FeatureConfig::dynamics, &DynamicsConfig::micro_window));
    return t;
  }();
  return table;
}

}  // namespace config_detail

/// Applies `key=value`; unknown keys and malformed values throw Config.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  key = text::trim(key);
  for (const auto& e : config_detail::entries()) {
    if (e.key == key) {
      try {
        e.set(cfg, text::trim(value));
      } catch (const Error& err) {
        throw Error(ErrorCode::Config, std::string(key) + ": " + err.what());
      }
      return;
    }
  }
  throw Error(ErrorCode::Config, "unknown key '" + std::string(key) + "'");
}

inline void apply_assignment(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::Config, "expected key=value, got '" + std::string(assignment) + "'");
  }
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void validate(const RunConfig& cfg) {
  const auto& f = cfg.features_cfg;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::Config, what);
  };
  require(cfg.folds >= 2, "folds must be at least 2");
  require(cfg.n_trees >= 1, "n_trees must be positive");
  require(cfg.tau >= 0.0 && cfg.tau <= 1.0, "tau must lie in [0, 1]");
  require(cfg.k_min >= 2 && cfg.k_max >= cfg.k_min, "need 2 <= k_min <= k_max");
  require(cfg.balanced_target >= 0, "balanced_target must be non-negative");
  require(f.dsp.window > 0 && f.dsp.hop > 0 && f.dsp.hop <= f.dsp.window, "need 0 < hop <= window");
  require(f.dsp.fft_size >= f.dsp.window && (f.dsp.fft_size & (f.dsp.fft_size - 1)) == 0,
          "fft_size must be a power of two no smaller than the window");
  require(f.dsp.vad_median >= 1 && f.dsp.vad_median % 2 == 1, "vad.median must be odd");
  require(f.dsp.vad_hangover >= 0 && f.dsp.vad_min_run >= 1, "bad VAD run settings");
  require(f.dynamics.band_count >= 2 && f.dynamics.band_width_hz > 0.0, "bad spdyn bands");
  require(f.dynamics.macro_window >= 1 && f.dynamics.micro_window >= 1, "bad intdyn windows");
  require(f.min_pause > 0.0, "pause.min_duration must be positive");
}

/// `key = value` lines; `#` starts a comment line.
inline RunConfig parse_config_text(std::string_view content, RunConfig cfg = {}) {
  for (const auto& line : text::content_lines(content)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, "expected key = value, got '" + line + "'");
    apply_setting(cfg, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig cfg = {}) {
  try {
    return parse_config_text(text::read_file(path), std::move(cfg));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw Error(ErrorCode::Config, e.what());
    throw;
  }
}

inline std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : config_detail::entries()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

}  // namespace lexiscreen
