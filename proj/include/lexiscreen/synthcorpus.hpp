#pragma once

// Deterministic synthetic reading recordings with known pauses, syllables and
// dynamics for the three skill classes, plus matching story text, word
// labels, simulated ASR hypotheses and the generating schedule.
//
// Speech is a harmonic complex (f0 220-300 Hz) shaped per syllable by a
// formant-like spectral envelope and an amplitude envelope
// m + (1 - m) sin^2 that starts and ends each speech segment at a trough.
// Pauses hold white noise only and lie on a 10 ms grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexiscreen/asr_align.hpp"
#include "lexiscreen/corpus.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/pauses_syllables.hpp"
#include "lexiscreen/random.hpp"
#include "lexiscreen/skill_class.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen::synth {

inline constexpr double kGrid = 0.010;
inline constexpr double kMinDuration = 5.0;

struct PauseSchedule {
  std::vector<Pause> fixed;  // when nonempty, used verbatim
  double edge_min = 0.30;    // leading and trailing silence
  double edge_max = 0.40;
  double interior_per_10s = 3.0;
  double interior_min = 0.25;
  double interior_max = 0.40;
  double min_silence_fraction = 0.12;  // further interior pauses are added until reached
  double min_segment = 0.60;
};

/// Probabilities of C, M, D, S1, Sm, I per canonical word.
using LabelMix = std::array<double, 6>;

struct ProfileSpec {
  SkillClass cls = SkillClass::C_A;
  double syllable_rate = 4.0;   // syllables per second of recording
  double reference_rate = 4.0;  // text syllables per second of recording
  double am_depth_db = 20.0;
  int wander_bands = 5;  // 400 Hz bands the formant centre moves across
  double formant_low_hz = 600.0;
  double formant_width_hz = 250.0;
  double level_dbfs = -20.0;  // RMS at envelope peaks
  double noise_dbfs = -65.0;
  double declination_db = 8.0;  // level drop across each speech segment
  double gain_jitter_db = 3.0;  // per-syllable peak gain spread
  PauseSchedule pauses;
  LabelMix mix{0.86, 0.03, 0.02, 0.05, 0.02, 0.02};
  std::uint64_t seed = 0;
};

inline ProfileSpec make_profile(SkillClass cls, std::uint64_t seed = 0) {
  ProfileSpec p;
  p.cls = cls;
  p.seed = seed;
  switch (cls) {
    case SkillClass::C_A:
      break;
    case SkillClass::M_A:
      p.syllable_rate = 0.55 * p.reference_rate;
      p.pauses.interior_per_10s = 3.0;
      p.pauses.interior_min = 0.60;
      p.pauses.interior_max = 1.20;
      p.pauses.min_silence_fraction = 0.35;
      p.pauses.min_segment = 0.50;
      p.mix = {0.36, 0.48, 0.04, 0.05, 0.03, 0.04};
      break;
    case SkillClass::I_A:
      p.syllable_rate = 5.5;
      p.am_depth_db = 3.0;
      p.wander_bands = 1;
      p.formant_low_hz = 900.0;
      p.formant_width_hz = 150.0;
      p.level_dbfs = -26.0;
      p.declination_db = 0.0;
      p.gain_jitter_db = 0.3;
      p.pauses.edge_min = 0.45;
      p.pauses.edge_max = 0.55;
      p.pauses.interior_per_10s = 1.0;
      p.pauses.interior_min = 0.25;
      p.pauses.interior_max = 0.35;
      p.mix = {0.30, 0.05, 0.05, 0.05, 0.07, 0.48};
      break;
  }
  return p;
}

/// Ground truth of one generated recording.
struct Schedule {
  double duration = 0.0;
  double f0_hz = 0.0;
  std::vector<Pause> pauses;                  // every silence, edges included
  std::vector<std::pair<double, double>> segments;  // speech [start, end)
  std::vector<double> syllable_peaks;         // envelope maxima, seconds
  double articulation_rate = 0.0;             // syllables per second of speech
};

struct SynthRecording {
  AudioRecording recording;
  std::vector<VideoInterval> intervals;
  StoryText story;
  Transcription transcription;
  std::vector<HypWord> hypothesis;
  Schedule schedule;
  SkillClass cls = SkillClass::C_A;
};

namespace detail {

inline double grid(double t) { return std::round(t / kGrid) * kGrid; }

inline std::vector<Pause> plan_pauses(const PauseSchedule& s, double duration, Rng& rng) {
  if (!s.fixed.empty()) {
    double last = 0.0;
    for (const auto& p : s.fixed) {
      if (p.start < last - 1e-9 || p.end() > duration + 1e-9 || p.duration <= 0.0) {
        throw Error(ErrorCode::OutOfRange, "fixed pause schedule is unsorted or out of range");
      }
      last = p.end();
    }
    return s.fixed;
  }
  const double lead = grid(rng.uniform(s.edge_min, s.edge_max));
  const double trail = grid(rng.uniform(s.edge_min, s.edge_max));
  std::vector<double> interior;
  const int base = static_cast<int>(std::lround(s.interior_per_10s * duration / 10.0));
  double silence = lead + trail;
  auto speech_left = [&] { return duration - silence; };
  auto fits = [&](double d) {
    return speech_left() - d >= double(interior.size() + 2) * s.min_segment;
  };
  for (int k = 0; k < base; ++k) {
    const double d = grid(rng.uniform(s.interior_min, s.interior_max));
    if (!fits(d)) break;
    interior.push_back(d);
    silence += d;
  }
  while (silence < s.min_silence_fraction * duration) {
    const double d = grid(rng.uniform(s.interior_min, s.interior_max));
    if (!fits(d)) break;
    interior.push_back(d);
    silence += d;
  }

  // Speech segments get min_segment plus a random share of the remainder.
  const std::size_t segs = interior.size() + 1;
  const double spare = speech_left() - double(segs) * s.min_segment;
  std::vector<double> w(segs);
  for (auto& v : w) v = 1.0 + rng.uniform();
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

  std::vector<Pause> pauses;
  if (lead > 0.0) pauses.push_back({0.0, lead});
  double t = lead;
  for (std::size_t k = 0; k < interior.size(); ++k) {
    t = grid(t + s.min_segment + spare * w[k] / wsum);
    pauses.push_back({t, interior[k]});
    t = grid(t + interior[k]);
  }
  if (trail > 0.0) pauses.push_back({grid(duration - trail), duration - grid(duration - trail)});
  return pauses;
}

inline std::vector<std::pair<double, double>> speech_segments(std::span<const Pause> pauses,
                                                             double duration) {
  std::vector<std::pair<double, double>> segs;
  double t = 0.0;
  for (const auto& p : pauses) {
    if (p.start > t + 1e-9) segs.emplace_back(t, p.start);
    t = p.end();
  }
  if (duration > t + 1e-9) segs.emplace_back(t, duration);
  return segs;
}

/// Largest-remainder split of `total` proportional to `weights`, at least one each.
inline std::vector<int> apportion(int total, std::span<const double> weights) {
  const std::size_t n = weights.size();
  std::vector<int> out(n, 1);
  int left = total - static_cast<int>(n);
  if (left <= 0) return out;
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> rema;
  int given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = left * weights[i] / wsum;
    const int whole = static_cast<int>(std::floor(share));
    out[i] += whole;
    given += whole;
    rema.emplace_back(share - whole, i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (int k = 0; k < left - given; ++k) ++out[rema[k].second];
  return out;
}

inline double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }

// Fixed vocabulary with explicit syllable counts, written as the story lexicon.
inline const std::vector<std::pair<std::string, int>>& vocabulary() {
  static const std::vector<std::pair<std::string, int>> v = {
      {"cat", 1},    {"dog", 1},     {"sun", 1},      {"red", 1},       {"ran", 1},
      {"big", 1},    {"the", 1},     {"fox", 1},      {"hill", 1},      {"tree", 1},
      {"apple", 2},  {"river", 2},   {"window", 2},   {"garden", 2},    {"happy", 2},
      {"little", 2}, {"basket", 2},  {"yellow", 2},   {"banana", 3},    {"elephant", 3},
      {"family", 3}, {"butterfly", 3}, {"tomorrow", 3}, {"wonderful", 3},
  };
  return v;
}

}  // namespace detail

/// Story whose sentence i holds exactly `syllables[i]` syllables.
inline StoryText make_story(const std::string& story_id, std::span<const int> syllables,
                            std::uint64_t seed) {
  Rng rng(seed);
  const auto& vocab = detail::vocabulary();
  StoryText story;
  story.story_id = story_id;
  for (const auto& [w, n] : vocab) story.lexicon[w] = n;
  for (int target : syllables) {
    std::vector<std::string> words;
    int left = target;
    while (left > 0) {
      std::vector<std::size_t> fit;
      for (std::size_t k = 0; k < vocab.size(); ++k) {
        if (vocab[k].second <= left) fit.push_back(k);
      }
      const auto& pick = vocab[fit[rng.index(fit.size())]];
      words.push_back(pick.first);
      left -= pick.second;
    }
    story.sentences.push_back(std::move(words));
  }
  return story;
}

inline std::string format_story(const StoryText& story) {
  std::string out;
  for (const auto& s : story.sentences) {
    for (std::size_t k = 0; k < s.size(); ++k) out += (k ? " " : "") + s[k];
    out += ".\n";
  }
  return out;
}

inline std::string format_lexicon(const Lexicon& lex) {
  std::map<std::string, int> sorted(lex.begin(), lex.end());
  std::string out;
  for (const auto& [w, n] : sorted) out += w + " " + std::to_string(n) + "\n";
  return out;
}

/// Word labels drawn from `mix`; substitutions get a derived word.
inline Transcription make_transcription(const StoryText& story, const LabelMix& mix, Rng& rng) {
  static constexpr std::array<WordLabel, 6> kLabels = {WordLabel::C, WordLabel::M, WordLabel::D,
                                                       WordLabel::S1, WordLabel::Sm, WordLabel::I};
  const double total = std::accumulate(mix.begin(), mix.end(), 0.0);
  Transcription t;
  t.story_id = story.story_id;
  for (const auto& w : story.words()) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < kLabels.size() && u >= mix[k]) u -= mix[k++];
    LabeledWord lw{w, kLabels[k], std::nullopt};
    if (lw.label == WordLabel::S1) lw.substitution = w + "s";
    if (lw.label == WordLabel::Sm) lw.substitution = std::string(w.substr(0, 2)) + "ber";
    t.words.push_back(std::move(lw));
  }
  return t;
}

/// Simulated 1-best output: confident for read words, a low-confidence token
/// for gibberish and mispronunciations, nothing for missed words.
inline std::vector<HypWord> make_hypothesis(const Transcription& t, Rng& rng) {
  std::vector<HypWord> out;
  for (const auto& w : t.words) {
    switch (w.label) {
      case WordLabel::C:
        if (rng.uniform() < 0.05) {
          out.push_back({w.canonical + "e", rng.uniform(0.05, 0.45)});
        } else {
          out.push_back({w.canonical, rng.uniform(0.70, 1.00)});
        }
        break;
      case WordLabel::M:
        break;
      case WordLabel::D:
        out.push_back({w.canonical.substr(0, 2), rng.uniform(0.05, 0.45)});
        out.push_back({w.canonical, rng.uniform(0.60, 0.95)});
        break;
      case WordLabel::S1:
        out.push_back({*w.substitution, rng.uniform(0.55, 0.95)});
        break;
      case WordLabel::Sm:
        out.push_back({*w.substitution, rng.uniform(0.05, 0.45)});
        break;
      case WordLabel::I:
        out.push_back({"ba" + std::to_string(rng.index(100)), rng.uniform(0.00, 0.40)});
        break;
    }
  }
  return out;
}

/// Equal-length sentence intervals, one per 2.5 s of recording.
inline std::vector<VideoInterval> make_intervals(double duration) {
  const int n = std::max(1, static_cast<int>(std::lround(duration / 2.5)));
  std::vector<VideoInterval> out;
  for (int k = 0; k < n; ++k) {
    out.push_back({detail::grid(duration * k / n), k + 1 == n ? duration : detail::grid(duration * (k + 1) / n), k});
  }
  return out;
}

/// Text syllables per interval at the profile's reference rate.
inline std::vector<int> reference_syllables(std::span<const VideoInterval> intervals, double rate) {
  std::vector<int> out;
  for (const auto& iv : intervals) out.push_back(std::max(1, static_cast<int>(std::lround(rate * iv.length()))));
  return out;
}

inline std::string story_id_for(std::span<const int> syllables) {
  std::string id = "story";
  for (int n : syllables) id += "_" + std::to_string(n);
  return id;
}

/// Audio for a profile and its schedule. The profile seed drives every draw.
inline SynthRecording generate(const ProfileSpec& profile, double duration,
                               const std::string& id = "synth") {
  if (!(duration >= kMinDuration)) {
    throw Error(ErrorCode::TooShort, "synthetic recordings need at least 5 s");
  }
  duration = detail::grid(duration);
  Rng rng(profile.seed);
  SynthRecording out;
  out.cls = profile.cls;
  auto& sched = out.schedule;
  sched.duration = duration;
  sched.f0_hz = rng.uniform(220.0, 300.0);
  sched.pauses = detail::plan_pauses(profile.pauses, duration, rng);
  sched.segments = detail::speech_segments(sched.pauses, duration);

  const auto total_samples = static_cast<std::size_t>(std::llround(duration * kSampleRate));
  std::vector<double> x(total_samples, 0.0);

  // Syllables spread over segments in proportion to their length.
  std::vector<double> seg_len;
  double speech_time = 0.0;
  for (const auto& [a, b] : sched.segments) {
    seg_len.push_back(b - a);
    speech_time += b - a;
  }
  const int total_syllables =
      std::max(static_cast<int>(sched.segments.size()),
               static_cast<int>(std::lround(profile.syllable_rate * duration)));
  const auto per_segment = detail::apportion(total_syllables, seg_len);
  sched.articulation_rate = speech_time > 0.0 ? total_syllables / speech_time : 0.0;

  const int harmonics = static_cast<int>(std::floor(4000.0 / (sched.f0_hz * 1.04)));
  std::vector<double> phase(harmonics);
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double m = detail::db_to_amp(-profile.am_depth_db);
  const double level = detail::db_to_amp(profile.level_dbfs);
  const double fade = 0.005;

  for (std::size_t s = 0; s < sched.segments.size(); ++s) {
    const auto [seg_a, seg_b] = sched.segments[s];
    const int n = per_segment[s];
    std::vector<double> dur(n);
    for (auto& d : dur) d = rng.uniform(0.85, 1.15);
    const double dsum = std::accumulate(dur.begin(), dur.end(), 0.0);
    for (auto& d : dur) d *= (seg_b - seg_a) / dsum;

    double t0 = seg_a;
    for (int j = 0; j < n; ++j) {
      const double t1 = j + 1 == n ? seg_b : t0 + dur[j];
      const double gain = detail::db_to_amp(rng.uniform(-profile.gain_jitter_db, 0.0));
      const double f0 = sched.f0_hz * rng.uniform(0.97, 1.03);
      const int band = static_cast<int>(rng.index(static_cast<std::size_t>(profile.wander_bands)));
      const double fc = profile.formant_low_hz + 400.0 * band + rng.uniform(-60.0, 60.0);
      std::vector<double> amp(harmonics);
      double power = 0.0;
      for (int k = 0; k < harmonics; ++k) {
        const double f = (k + 1) * f0;
        const double z = (f - fc) / profile.formant_width_hz;
        amp[k] = std::exp(-0.5 * z * z) + 0.03 / (k + 1);
        power += amp[k] * amp[k] / 2.0;
      }
      const double norm = level / std::sqrt(power);
      sched.syllable_peaks.push_back((t0 + t1) / 2.0);

      const auto i0 = static_cast<std::size_t>(std::llround(t0 * kSampleRate));
      const auto i1 = std::min(total_samples, static_cast<std::size_t>(std::llround(t1 * kSampleRate)));
      for (std::size_t i = i0; i < i1; ++i) {
        const double t = double(i) / kSampleRate;
        const double u = (t - t0) / (t1 - t0);
        const double sn = std::sin(std::numbers::pi * u);
        const double decl =
            detail::db_to_amp(-profile.declination_db * (t - seg_a) / (seg_b - seg_a));
        double env = decl * (m + (1.0 - m) * gain * sn * sn);
        const double edge = std::min(t - seg_a, seg_b - t);
        if (edge < fade) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(edge, 0.0) / fade);
        double v = 0.0;
        for (int k = 0; k < harmonics; ++k) {
          phase[k] += 2.0 * std::numbers::pi * (k + 1) * f0 / kSampleRate;
          v += amp[k] * std::sin(phase[k]);
        }
        x[i] = env * norm * v;
      }
      for (auto& p : phase) p = std::fmod(p, 2.0 * std::numbers::pi);
      t0 = t1;
    }
  }

  const double noise = detail::db_to_amp(profile.noise_dbfs);
  for (auto& v : x) v = std::clamp(v + noise * rng.normal(), -1.0, 1.0);

  out.recording = make_recording(std::move(x), {id, "", "", ""});
  out.intervals = make_intervals(duration);
  const auto syll = reference_syllables(out.intervals, profile.reference_rate);
  out.story = make_story(story_id_for(syll), syll, 0x5107);
  out.recording.metadata.story_id = out.story.story_id;
  out.transcription = make_transcription(out.story, profile.mix, rng);
  out.hypothesis = make_hypothesis(out.transcription, rng);
  return out;
}

/// Amplitude-modulated harmonic tone: `rate_hz` syllables per second over
/// `speech_seconds`, framed by 0.5 s of noise on each side. Used to check
/// syllable counting against a known count of round(rate * speech_seconds).
inline SynthRecording am_construction(double rate_hz, double am_depth_db, double speech_seconds,
                                      std::uint64_t seed) {
  ProfileSpec p = make_profile(SkillClass::C_A, seed);
  const double duration = detail::grid(speech_seconds + 1.0);
  p.pauses.fixed = {{0.0, 0.5}, {detail::grid(duration - 0.5), 0.5}};
  p.am_depth_db = am_depth_db;
  p.gain_jitter_db = 0.0;
  p.declination_db = 0.0;
  p.syllable_rate = rate_hz * speech_seconds / duration;
  return generate(p, std::max(duration, kMinDuration));
}

inline nlohmann::json schedule_to_json(const SynthRecording& r) {
  nlohmann::json pauses = nlohmann::json::array();
  for (const auto& p : r.schedule.pauses) pauses.push_back({p.start, p.duration});
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& [a, b] : r.schedule.segments) segments.push_back({a, b});
  return {{"class", std::string(to_string(r.cls))},
          {"duration", r.schedule.duration},
          {"f0_hz", r.schedule.f0_hz},
          {"pauses", std::move(pauses)},
          {"segments", std::move(segments)},
          {"syllable_peaks", r.schedule.syllable_peaks},
          {"articulation_rate", r.schedule.articulation_rate}};
}

// ---------------------------------------------------------------------------
// Corpus generation

struct CorpusSpec {
  int per_class = 20;
  double duration = 10.0;
  std::uint64_t seed = 1;
  bool randomize_pauses = false;  // pause schedules drawn from a random class
  int children = 0;               // 0 -> one child per recording
};

/// Recording k has class k mod 3 and seed derive_seed(seed, k).
inline ProfileSpec corpus_profile(const CorpusSpec& spec, int k) {
  const auto cls = kSkillClasses[k % 3];
  const auto seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k));
  ProfileSpec p = make_profile(cls, seed);
  Rng rng(derive_seed(seed, 77));
  p.syllable_rate *= rng.uniform(0.95, 1.05);
  p.am_depth_db += rng.uniform(-1.0, 1.0);
  if (spec.randomize_pauses) p.pauses = make_profile(kSkillClasses[rng.index(3)]).pauses;
  return p;
}

inline std::string corpus_id(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rec%04d", k + 1);
  return buf;
}

inline SynthRecording generate_corpus_item(const CorpusSpec& spec, int k) {
  auto r = generate(corpus_profile(spec, k), spec.duration, corpus_id(k));
  const int children = spec.children > 0 ? spec.children : 3 * spec.per_class;
  char buf[32];
  std::snprintf(buf, sizeof buf, "child%03d", k % children + 1);
  r.recording.metadata.child_id = buf;
  r.recording.metadata.timestamp = "2024-01-01T00:00:00";
  return r;
}

inline void write_story(const CorpusLayout& layout, const StoryText& story) {
  const auto dir = layout.story_dir(story.story_id);
  text::write_file(dir / "story.txt", format_story(story));
  text::write_file(dir / "syllables.lex", format_lexicon(story.lexicon));
}

/// Writes one recording's files plus `<id>.schedule.json`; the story is
/// written separately since recordings share it.
inline void write_recording(const CorpusLayout& layout, const SynthRecording& r) {
  const auto& id = r.recording.metadata.id;
  write_wav(layout.wav(id), r.recording.samples);
  text::write_file(layout.intervals(id), format_intervals(r.intervals));
  text::write_file(layout.words(id), format_transcription(r.transcription));
  text::write_file(layout.hypothesis(id), format_hypothesis(r.hypothesis));
  text::write_file(layout.recording(id, ".schedule.json"), schedule_to_json(r).dump(1) + "\n");
}

/// Manifest and `labels.csv` (`id,class`) for generated recordings.
inline void write_index(const CorpusLayout& layout, std::span<const RecordingMetadata> rows,
                        std::span<const SkillClass> classes) {
  text::write_file(layout.manifest(), format_manifest(rows));
  std::string labels = "id,class\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    labels += rows[k].id + "," + std::string(to_string(classes[k])) + "\n";
  }
  text::write_file(layout.root / "labels.csv", labels);
}

}  // namespace lexiscreen::synth
