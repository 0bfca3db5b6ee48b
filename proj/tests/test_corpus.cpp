#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <random>

#include "lexiscreen/corpus.hpp"
#include "test_support.hpp"

using namespace lexiscreen;

namespace {

// Minimal RIFF writer with free header fields, for malformed-input cases.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& data) {
  std::string out = "RIFF";
  auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff)); };
  auto u16 = [&](std::uint16_t v) { for (int i = 0; i < 2; ++i) out.push_back(char((v >> (8 * i)) & 0xff)); };
  u32(36 + static_cast<std::uint32_t>(data.size()));
  out += "WAVEfmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  out += "data";
  u32(static_cast<std::uint32_t>(data.size()));
  return out + data;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(Wav, OneSecondMonoFile) {
  const auto dir = fixture::temp_dir("wav1");
  write_wav(dir / "a.wav", fixture::sine(440, 1.0));
  const auto rec = load_wav(dir / "a.wav");
  EXPECT_EQ(rec.samples.size(), 16000u);
  EXPECT_DOUBLE_EQ(rec.duration(), 1.0);
}

TEST(Wav, AllZeroPcm) {
  const auto rec = decode_wav(wav_bytes(1, 1, 16000, 16, std::string(3200, '\0')));
  ASSERT_EQ(rec.samples.size(), 1600u);
  for (double v : rec.samples) EXPECT_EQ(v, 0.0);
}

TEST(Wav, ScalesBy32768) {
  std::string data;
  for (std::int16_t v : {std::int16_t(-32768), std::int16_t(16384), std::int16_t(32767)}) {
    data.push_back(char(v & 0xff));
    data.push_back(char((v >> 8) & 0xff));
  }
  const auto rec = decode_wav(wav_bytes(1, 1, 16000, 16, data));
  EXPECT_EQ(rec.samples[0], -1.0);
  EXPECT_EQ(rec.samples[1], 0.5);
  EXPECT_EQ(rec.samples[2], 32767.0 / 32768.0);
}

TEST(Wav, DistinctErrors) {
  EXPECT_EQ(code_of([] { decode_wav("not a wav file at all, just text"); }), ErrorCode::NotWav);
  EXPECT_EQ(code_of([] { decode_wav(wav_bytes(3, 1, 16000, 32, std::string(8, '\0'))); }),
            ErrorCode::UnsupportedEncoding);
  EXPECT_EQ(code_of([] { decode_wav(wav_bytes(1, 1, 16000, 8, std::string(8, '\0'))); }),
            ErrorCode::UnsupportedEncoding);
  EXPECT_EQ(code_of([] { decode_wav(wav_bytes(1, 2, 16000, 16, std::string(8, '\0'))); }),
            ErrorCode::WrongChannelCount);
  EXPECT_EQ(code_of([] { decode_wav(wav_bytes(1, 1, 44100, 16, std::string(8, '\0'))); }),
            ErrorCode::WrongSampleRate);
}

TEST(Wav, SampleCountMatchesDurationForRandomLengths) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double d = std::uniform_real_distribution<double>(0.01, 3.0)(gen);
    const auto n = static_cast<std::size_t>(std::llround(d * 16000));
    const auto rec = decode_wav(encode_wav(std::vector<double>(n, 0.25)));
    EXPECT_EQ(rec.samples.size(), n);
  }
}

TEST(Intervals, TwoIntervals) {
  const auto set = parse_intervals_text("0.0,3.2\n3.2,7.5\n", 7.5);
  ASSERT_EQ(set.intervals.size(), 2u);
  EXPECT_EQ(set.intervals[1].sentence_index, 1);
  EXPECT_FALSE(set.end_clipped);
}

TEST(Intervals, Errors) {
  EXPECT_EQ(code_of([] { parse_intervals_text("0.0,3.2\n3.0,7.5\n", 7.5); }), ErrorCode::Overlap);
  EXPECT_EQ(code_of([] { parse_intervals_text("", 7.5); }), ErrorCode::EmptyIntervals);
  EXPECT_EQ(code_of([] { parse_intervals_text("3.2,7.5\n0.0,3.2\n", 7.5); }), ErrorCode::Unsorted);
  EXPECT_EQ(code_of([] { parse_intervals_text("0.0,3.2\n3.2,9.5\n", 7.5); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { parse_intervals_text("0.0,3.0\n3.2,7.5\n", 7.5); }), ErrorCode::Gap);
}

TEST(Intervals, LastEndClippedWithFlag) {
  const auto set = parse_intervals_text("0.0,3.2\n3.2,7.5004\n", 7.5);
  EXPECT_TRUE(set.end_clipped);
  EXPECT_DOUBLE_EQ(set.intervals.back().end, 7.5);
}

TEST(Transcription, Rows) {
  const auto t = parse_transcription_text("tree,C\nold,S1,oll\n");
  ASSERT_EQ(t.words.size(), 2u);
  EXPECT_EQ(t.words[0].canonical, "tree");
  EXPECT_EQ(t.words[0].label, WordLabel::C);
  EXPECT_EQ(t.words[1].label, WordLabel::S1);
  EXPECT_EQ(t.words[1].substitution, "oll");
}

TEST(Transcription, Errors) {
  EXPECT_EQ(code_of([] { parse_transcription_text("old,S1\n"); }), ErrorCode::MissingSubstitutionText);
  EXPECT_EQ(code_of([] { parse_transcription_text("old,X\n"); }), ErrorCode::UnknownLabel);
  const auto story = parse_story_text("s", "the old tree\n");
  EXPECT_EQ(code_of([&] { parse_transcription_text("the,C\nold,C\n", &story); }),
            ErrorCode::WordCountMismatch);
}

TEST(Transcription, RoundTrip) {
  const std::array<WordLabel, 6> labels = {WordLabel::C, WordLabel::M, WordLabel::D,
                                           WordLabel::S1, WordLabel::Sm, WordLabel::I};
  std::mt19937 gen(3);
  Transcription t;
  for (int i = 0; i < 200; ++i) {
    LabeledWord w{"w" + std::to_string(i), labels[gen() % 6], std::nullopt};
    if (needs_substitution(w.label)) w.substitution = "sub" + std::to_string(i);
    t.words.push_back(w);
  }
  EXPECT_EQ(parse_transcription_text(format_transcription(t)), t);
}

TEST(Syllables, Heuristic) {
  EXPECT_EQ(expected_syllables("tree"), 1);
  EXPECT_EQ(expected_syllables("pipal"), 2);
  EXPECT_EQ(expected_syllables("people"), 2);
  EXPECT_EQ(expected_syllables("table"), 2);
  EXPECT_EQ(expected_syllables("make"), 1);
  EXPECT_EQ(expected_syllables("the"), 1);
  EXPECT_EQ(expected_syllables("Banana!"), 3);
  EXPECT_EQ(code_of([] { expected_syllables("123"); }), ErrorCode::EmptyWord);
}

TEST(Syllables, LexiconOverrides) {
  const auto lex = parse_lexicon_text("fire 2\n");
  EXPECT_EQ(expected_syllables("fire"), 1);
  EXPECT_EQ(expected_syllables("Fire,", lex), 2);
}

TEST(Story, SentenceSumsEqualWordSums) {
  const auto story = parse_story_text("s", "Once upon a time, a little fox.\nHe ran to the river!\n");
  const auto per_sentence = story.sentence_syllables();
  int words_total = 0;
  for (const auto& w : story.words()) words_total += expected_syllables(w);
  EXPECT_EQ(std::accumulate(per_sentence.begin(), per_sentence.end(), 0), words_total);
  EXPECT_EQ(story.sentences.size(), 2u);
}

TEST(Manifest, SortedById) {
  const auto rows = parse_manifest_text("id,child_id,story_id,timestamp\nb,c1,s,t\na,c2,s,t\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].id, "a");
  EXPECT_EQ(parse_manifest_text(format_manifest(rows)), rows);
}
