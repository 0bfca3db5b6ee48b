#include <gtest/gtest.h>

#include <cmath>

#include "lexiscreen/dynamics.hpp"
#include "lexiscreen/lexical.hpp"
#include "lexiscreen/synthcorpus.hpp"
#include "test_support.hpp"

using namespace lexiscreen;

namespace {

FrameTrack track_of(const synth::SynthRecording& s) { return analyze(s.recording.samples); }

std::vector<Pause> detected_pauses(const synth::SynthRecording& s) {
  const auto track = track_of(s);
  PauseOptions opt;
  opt.total_duration = s.recording.duration();
  return extract_pauses(track.speech_flags(), track.hop, opt);
}

}  // namespace

TEST(Synth, ClearSpeechSyllableCount) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = synth::generate(synth::make_profile(SkillClass::C_A, seed), 10.0);
    EXPECT_EQ(s.schedule.syllable_peaks.size(), 40u);
    EXPECT_NEAR(double(detect_syllables(track_of(s)).size()), 40.0, 2.0) << "seed " << seed;
  }
}

TEST(Synth, ThreeOneSecondPauses) {
  auto p = synth::make_profile(SkillClass::M_A, 5);
  p.pauses.fixed = {{2.0, 1.0}, {4.5, 1.0}, {7.5, 1.0}};
  const auto s = synth::generate(p, 10.0);
  const auto pauses = detected_pauses(s);
  ASSERT_EQ(pauses.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(pauses[k].duration, 1.0, 0.03);
    EXPECT_NEAR(pauses[k].start, p.pauses.fixed[k].start, 0.03);
  }
}

TEST(Synth, ScheduledPauseBoundariesRecovered) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto s = synth::generate(synth::make_profile(SkillClass::M_A, seed), 10.0);
    std::vector<Pause> truth;
    for (const auto& p : s.schedule.pauses) {
      if (p.duration > 0.2 + 0.03) truth.push_back(p);
    }
    const auto pauses = detected_pauses(s);
    ASSERT_EQ(pauses.size(), truth.size()) << "seed " << seed;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      EXPECT_NEAR(pauses[k].start, truth[k].start, 0.03);
      EXPECT_NEAR(pauses[k].start + pauses[k].duration, truth[k].start + truth[k].duration, 0.03);
    }
  }
}

TEST(Synth, ProfileContracts) {
  const auto c = synth::make_profile(SkillClass::C_A);
  const auto i = synth::make_profile(SkillClass::I_A);
  EXPECT_DOUBLE_EQ(c.syllable_rate, 4.0);
  EXPECT_GE(c.am_depth_db, 12.0);
  EXPECT_LE(i.am_depth_db, 4.0);
  EXPECT_GE(i.syllable_rate, 5.0);
  EXPECT_LE(i.syllable_rate, 6.0);
  EXPECT_LT(i.wander_bands, c.wander_bands);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = synth::generate(synth::make_profile(SkillClass::M_A, seed), 10.0);
    double silence = 0.0;
    for (const auto& p : m.schedule.pauses) {
      silence += p.duration;
      if (p.start > 0.0 && p.start + p.duration < m.schedule.duration) { EXPECT_GE(p.duration, 0.5); }
    }
    EXPECT_GE(silence / m.schedule.duration, 0.30);
  }
}

TEST(Synth, TranscriptionsFollowClass) {
  auto frac = [](SkillClass cls) {
    const auto s = synth::generate(synth::make_profile(cls, 4), 20.0);
    return miscue_fractions(s.transcription, MiscueVariant::B);
  };
  const auto c = frac(SkillClass::C_A), m = frac(SkillClass::M_A), i = frac(SkillClass::I_A);
  EXPECT_GT(c[0], 0.7);
  EXPECT_GT(m[2], c[2]);
  EXPECT_GT(m[2], i[2]);
  EXPECT_GT(i[3], c[3]);
  EXPECT_GT(i[3], m[3]);
}

TEST(Synth, MumbleHasFlatterDynamics) {
  for (std::uint64_t seed : {1u, 7u}) {
    const auto c = synth::generate(synth::make_profile(SkillClass::C_A, seed), 10.0);
    const auto i = synth::generate(synth::make_profile(SkillClass::I_A, seed), 10.0);
    const auto tc = track_of(c), ti = track_of(i);
    EXPECT_LT(intensity_dynamics(ti, i.intervals).macro_mean, intensity_dynamics(tc, c.intervals).macro_mean);
    EXPECT_GT(spectral_dynamics(ti, i.intervals).norm_mode_count,
              spectral_dynamics(tc, c.intervals).norm_mode_count);
  }
}

TEST(Synth, SeedDeterministic) {
  const auto a = synth::generate(synth::make_profile(SkillClass::I_A, 9), 7.0);
  const auto b = synth::generate(synth::make_profile(SkillClass::I_A, 9), 7.0);
  EXPECT_EQ(a.recording.samples, b.recording.samples);
  EXPECT_EQ(a.transcription, b.transcription);
  EXPECT_EQ(synth::schedule_to_json(a).dump(), synth::schedule_to_json(b).dump());
  const auto c = synth::generate(synth::make_profile(SkillClass::I_A, 10), 7.0);
  EXPECT_NE(a.recording.samples, c.recording.samples);
}

TEST(Synth, TooShort) {
  try {
    synth::generate(synth::make_profile(SkillClass::C_A), 4.99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooShort);
  }
}

TEST(Synth, StoryMatchesIntervals) {
  const auto s = synth::generate(synth::make_profile(SkillClass::C_A, 2), 10.0);
  ASSERT_EQ(s.story.sentences.size(), s.intervals.size());
  EXPECT_EQ(s.story.sentence_syllables(), synth::reference_syllables(s.intervals, 4.0));
  EXPECT_EQ(s.transcription.words.size(), s.story.word_count());
  EXPECT_DOUBLE_EQ(s.intervals.back().end, s.recording.duration());
}

TEST(Synth, WrittenCorpusLoadsBack) {
  const auto dir = fixture::temp_dir("synth_layout");
  const synth::CorpusSpec spec{2, 6.0, 3, false, 0};
  const CorpusLayout layout{dir};
  std::vector<RecordingMetadata> rows;
  std::vector<SkillClass> classes;
  for (int k = 0; k < 6; ++k) {
    const auto r = synth::generate_corpus_item(spec, k);
    synth::write_story(layout, r.story);
    synth::write_recording(layout, r);
    rows.push_back(r.recording.metadata);
    classes.push_back(r.cls);
  }
  synth::write_index(layout, rows, classes);

  const auto manifest = parse_manifest_text(text::read_file(layout.manifest()));
  ASSERT_EQ(manifest.size(), 6u);
  for (const auto& m : manifest) {
    const auto rec = load_wav(layout.wav(m.id));
    const auto ivs = parse_intervals(layout.intervals(m.id), rec.duration());
    const auto story = load_story(layout.story_dir(m.story_id));
    const auto t = parse_transcription(layout.words(m.id), &story);
    EXPECT_EQ(ivs.intervals.size(), story.sentences.size());
    EXPECT_EQ(t.words.size(), story.word_count());
    EXPECT_FALSE(load_hypothesis(layout.hypothesis(m.id)).empty());
  }
  EXPECT_EQ(manifest[0].id, "rec0001");
  EXPECT_EQ(manifest[0].child_id, "child001");
}
