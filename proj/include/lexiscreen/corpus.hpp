#pragma once

// Recordings, sentence ("video") intervals, story text, word-level
// transcriptions and the syllable-count heuristic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/error.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

inline constexpr int kSampleRate = 16000;

struct RecordingMetadata {
  std::string id;
  std::string child_id;
  std::string story_id;
  std::string timestamp;

  bool operator==(const RecordingMetadata&) const = default;
};

/// Mono 16 kHz audio, samples normalized to [-1, 1].
struct AudioRecording {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  RecordingMetadata metadata;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline AudioRecording make_recording(std::vector<double> samples, RecordingMetadata metadata = {}) {
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error(ErrorCode::OutOfRange, "non-finite sample");
  }
  return AudioRecording{std::move(samples), kSampleRate, std::move(metadata)};
}

// ---------------------------------------------------------------------------
// WAV (RIFF PCM16 mono 16 kHz only)

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace detail

inline AudioRecording decode_wav(std::string_view bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::NotWav, "missing RIFF/WAVE header");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = detail::read_u32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    const std::size_t available = size - pos - 8;
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16 || available < 16) throw Error(ErrorCode::NotWav, "truncated fmt chunk");
      const auto format = detail::read_u16(body);
      const auto channels = detail::read_u16(body + 2);
      const auto rate = detail::read_u32(body + 4);
      const auto bits = detail::read_u16(body + 14);
      if (format != 1 || bits != 16) {
        throw Error(ErrorCode::UnsupportedEncoding,
                    "format " + std::to_string(format) + " with " + std::to_string(bits) +
                        " bits; only PCM16 is accepted");
      }
      if (channels != 1) {
        throw Error(ErrorCode::WrongChannelCount, std::to_string(channels) + " channels");
      }
      if (rate != kSampleRate) {
        throw Error(ErrorCode::WrongSampleRate, std::to_string(rate) + " Hz");
      }
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::NotWav, "data chunk before fmt chunk");
      const std::size_t n = std::min<std::size_t>(chunk_size, available) / 2;
      std::vector<double> samples(n);
      for (std::size_t i = 0; i < n; ++i) {
        samples[i] = static_cast<std::int16_t>(detail::read_u16(body + 2 * i)) / 32768.0;
      }
      return AudioRecording{std::move(samples), kSampleRate, {}};
    }
    pos += 8 + chunk_size + (chunk_size & 1u);
  }
  throw Error(ErrorCode::NotWav, have_fmt ? "no data chunk" : "no fmt chunk");
}

inline AudioRecording load_wav(const std::filesystem::path& path) {
  return decode_wav(text::read_file(path));
}

/// Samples are clipped to [-1, 32767/32768] and rounded to the nearest PCM16 code.
inline std::string encode_wav(std::span<const double> samples) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  detail::put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, kSampleRate);
  detail::put_u32(out, kSampleRate * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, data_bytes);
  for (double s : samples) {
    const double code = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, std::span<const double> samples) {
  text::write_file(path, encode_wav(samples));
}

// ---------------------------------------------------------------------------
// Sentence intervals

struct VideoInterval {
  double start = 0.0;
  double end = 0.0;
  int sentence_index = 0;

  double length() const { return end - start; }
  bool operator==(const VideoInterval&) const = default;
};

struct IntervalSet {
  std::vector<VideoInterval> intervals;
  bool end_clipped = false;  // last end was clipped to the recording duration
};

/// Interval boundaries must meet within this slack (seconds).
inline constexpr double kIntervalSlack = 1e-3;
/// A last interval ending up to this far past the audio is clipped; further is an error.
inline constexpr double kClipTolerance = 0.5;

inline IntervalSet parse_intervals_text(std::string_view content, double duration) {
  IntervalSet set;
  for (const auto& line : text::content_lines(content)) {
    auto fields = text::split(line);
    if (fields.size() != 2) throw Error(ErrorCode::OutOfRange, "expected 'start,end': " + line);
    VideoInterval iv;
    iv.start = text::parse_double(fields[0], ErrorCode::OutOfRange, "interval start");
    iv.end = text::parse_double(fields[1], ErrorCode::OutOfRange, "interval end");
    iv.sentence_index = static_cast<int>(set.intervals.size());
    set.intervals.push_back(iv);
  }
  auto& ivs = set.intervals;
  if (ivs.empty()) throw Error(ErrorCode::EmptyIntervals, "no intervals");
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    const auto& iv = ivs[i];
    if (iv.start < 0.0 || !(iv.end > iv.start) || iv.start >= duration) {
      throw Error(ErrorCode::OutOfRange, "interval " + std::to_string(i) + " outside [0, " +
                                             text::format_fixed(duration, 3) + ")");
    }
    if (i > 0) {
      const auto& prev = ivs[i - 1];
      if (iv.start < prev.start) throw Error(ErrorCode::Unsorted, "interval " + std::to_string(i));
      if (iv.start < prev.end - kIntervalSlack) {
        throw Error(ErrorCode::Overlap, "interval " + std::to_string(i));
      }
      if (iv.start > prev.end + kIntervalSlack) {
        throw Error(ErrorCode::Gap, "gap before interval " + std::to_string(i));
      }
    }
  }
  if (ivs.front().start > kIntervalSlack) throw Error(ErrorCode::Gap, "gap before first interval");
  if (ivs.back().end > duration + kClipTolerance) {
    throw Error(ErrorCode::OutOfRange, "last interval ends past the recording");
  }
  if (ivs.back().end > duration) {
    ivs.back().end = duration;
    set.end_clipped = true;
  } else if (ivs.back().end < duration - kIntervalSlack) {
    throw Error(ErrorCode::Gap, "gap after last interval");
  }
  return set;
}

inline IntervalSet parse_intervals(const std::filesystem::path& path, double duration) {
  return parse_intervals_text(text::read_file(path), duration);
}

inline std::string format_intervals(std::span<const VideoInterval> intervals) {
  std::string out;
  for (const auto& iv : intervals) {
    out += text::format_exact(iv.start) + "," + text::format_exact(iv.end) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Syllable counting

/// Lower-cased letters of `word`; every other character is stripped.
inline std::string normalize_word(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

/// Per-word overrides of the syllable heuristic, keyed by normalized word.
using Lexicon = std::map<std::string, int>;

inline Lexicon parse_lexicon_text(std::string_view content) {
  Lexicon lex;
  for (const auto& line : text::content_lines(content)) {
    std::istringstream ss(line);
    std::string word;
    int count = 0;
    if (!(ss >> word >> count) || count < 1) {
      throw Error(ErrorCode::OutOfRange, "bad lexicon line '" + line + "'");
    }
    lex[normalize_word(word)] = count;
  }
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon_text(text::read_file(path));
}

/// Vowel-group count with a silent-final-'e' correction.
///
/// Counts maximal runs of {a,e,i,o,u,y}. A final 'e' that forms its own vowel
/// group is treated as silent and subtracted, except after consonant+'l'
/// ("table", "people"). The result is floored at 1.
inline int expected_syllables(std::string_view word) {
  const std::string w = normalize_word(word);
  if (w.empty()) throw Error(ErrorCode::EmptyWord, "word has no letters");
  auto is_vowel = [](char c) { return std::strchr("aeiouy", c) != nullptr; };
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = w.size();
  if (n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2])) {
    const bool consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

inline int expected_syllables(std::string_view word, const Lexicon& lexicon) {
  const std::string w = normalize_word(word);
  if (auto it = lexicon.find(w); it != lexicon.end()) return it->second;
  return expected_syllables(w);
}

// ---------------------------------------------------------------------------
// Story text and transcriptions

struct StoryText {
  std::string story_id;
  std::vector<std::vector<std::string>> sentences;  // normalized words
  Lexicon lexicon;

  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
  std::vector<int> sentence_syllables() const {
    std::vector<int> counts;
    for (const auto& s : sentences) {
      int total = 0;
      for (const auto& w : s) total += expected_syllables(w, lexicon);
      counts.push_back(total);
    }
    return counts;
  }
};

/// One sentence per non-empty line; tokens with no letters are dropped.
inline StoryText parse_story_text(std::string story_id, std::string_view content,
                                  Lexicon lexicon = {}) {
  StoryText story{std::move(story_id), {}, std::move(lexicon)};
  for (const auto& line : text::content_lines(content)) {
    std::istringstream ss(line);
    std::vector<std::string> words;
    for (std::string tok; ss >> tok;) {
      if (auto w = normalize_word(tok); !w.empty()) words.push_back(std::move(w));
    }
    if (!words.empty()) story.sentences.push_back(std::move(words));
  }
  if (story.sentences.empty()) throw Error(ErrorCode::EmptyWord, "story has no words");
  return story;
}

/// Reads `<dir>/story.txt` and, when present, `<dir>/syllables.lex`.
inline StoryText load_story(const std::filesystem::path& dir) {
  const auto lex_path = dir / "syllables.lex";
  Lexicon lex = std::filesystem::exists(lex_path) ? load_lexicon(lex_path) : Lexicon{};
  return parse_story_text(dir.filename().string(), text::read_file(dir / "story.txt"),
                          std::move(lex));
}

enum class WordLabel { C, M, D, S1, Sm, I };

inline std::string_view to_string(WordLabel label) {
  switch (label) {
    case WordLabel::C: return "C";
    case WordLabel::M: return "M";
    case WordLabel::D: return "D";
    case WordLabel::S1: return "S1";
    case WordLabel::Sm: return "Sm";
    case WordLabel::I: return "I";
  }
  return "?";
}

inline WordLabel parse_word_label(std::string_view s) {
  for (auto l : {WordLabel::C, WordLabel::M, WordLabel::D, WordLabel::S1, WordLabel::Sm,
                 WordLabel::I}) {
    if (to_string(l) == s) return l;
  }
  throw Error(ErrorCode::UnknownLabel, "'" + std::string(s) + "'");
}

inline bool needs_substitution(WordLabel l) { return l == WordLabel::S1 || l == WordLabel::Sm; }

struct LabeledWord {
  std::string canonical;
  WordLabel label = WordLabel::C;
  std::optional<std::string> substitution;  // present iff label is S1 or Sm

  bool operator==(const LabeledWord&) const = default;
};

struct Transcription {
  std::string story_id;
  std::vector<LabeledWord> words;

  bool operator==(const Transcription&) const = default;
};

/// Rows of `word,label[,substitution]`, one per canonical word.
inline Transcription parse_transcription_text(std::string_view content,
                                              const StoryText* story = nullptr) {
  Transcription t;
  if (story) t.story_id = story->story_id;
  for (const auto& line : text::content_lines(content)) {
    auto fields = text::split(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(ErrorCode::UnknownLabel, "malformed row '" + line + "'");
    }
    LabeledWord w{fields[0], parse_word_label(fields[1]), std::nullopt};
    if (needs_substitution(w.label)) {
      if (fields.size() < 3 || fields[2].empty()) {
        throw Error(ErrorCode::MissingSubstitutionText, "row '" + line + "'");
      }
      w.substitution = fields[2];
    } else if (fields.size() == 3 && !fields[2].empty()) {
      throw Error(ErrorCode::UnknownLabel, "substitution text on non-substitution row '" + line + "'");
    }
    t.words.push_back(std::move(w));
  }
  if (t.words.empty()) throw Error(ErrorCode::WordCountMismatch, "empty transcription");
  if (story && t.words.size() != story->word_count()) {
    throw Error(ErrorCode::WordCountMismatch,
                std::to_string(t.words.size()) + " rows vs " +
                    std::to_string(story->word_count()) + " story words");
  }
  return t;
}

inline Transcription parse_transcription(const std::filesystem::path& path,
                                         const StoryText* story = nullptr) {
  return parse_transcription_text(text::read_file(path), story);
}

inline std::string format_transcription(const Transcription& t) {
  std::string out;
  for (const auto& w : t.words) {
    out += w.canonical + "," + std::string(to_string(w.label));
    if (w.substitution) out += "," + *w.substitution;
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus layout
//
//   <root>/manifest.csv                     id,child_id,story_id,timestamp
//   <root>/stories/<story_id>/story.txt
//   <root>/stories/<story_id>/syllables.lex   (optional)
//   <root>/recordings/<id>.wav
//   <root>/recordings/<id>.intervals.csv
//   <root>/recordings/<id>.words.csv
//   <root>/recordings/<id>.hyp.csv            (optional, ASR output)

struct CorpusLayout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.csv"; }
  std::filesystem::path story_dir(const std::string& story_id) const {
    return root / "stories" / story_id;
  }
  std::filesystem::path recording(const std::string& id, std::string_view suffix) const {
    return root / "recordings" / (id + std::string(suffix));
  }
  std::filesystem::path wav(const std::string& id) const { return recording(id, ".wav"); }
  std::filesystem::path intervals(const std::string& id) const {
    return recording(id, ".intervals.csv");
  }
  std::filesystem::path words(const std::string& id) const { return recording(id, ".words.csv"); }
  std::filesystem::path hypothesis(const std::string& id) const {
    return recording(id, ".hyp.csv");
  }
};

inline std::vector<RecordingMetadata> parse_manifest_text(std::string_view content) {
  auto lines = text::content_lines(content);
  if (lines.empty() || text::split(lines.front()) !=
                           std::vector<std::string>{"id", "child_id", "story_id", "timestamp"}) {
    throw Error(ErrorCode::SchemaMismatch, "manifest header must be id,child_id,story_id,timestamp");
  }
  std::vector<RecordingMetadata> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = text::split(lines[i]);
    if (f.size() != 4 || f[0].empty()) throw Error(ErrorCode::SchemaMismatch, "row '" + lines[i] + "'");
    rows.push_back({f[0], f[1], f[2], f[3]});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return rows;
}

inline std::string format_manifest(std::span<const RecordingMetadata> rows) {
  std::string out = "id,child_id,story_id,timestamp\n";
  for (const auto& r : rows) out += r.id + "," + r.child_id + "," + r.story_id + "," + r.timestamp + "\n";
  return out;
}

}  // namespace lexiscreen
