#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lexiscreen/dsp.hpp"
#include "lexiscreen/fft.hpp"
#include "test_support.hpp"

using namespace lexiscreen;

namespace {

// Direct DFT-summation centroid over bins 1..N/2 of the zero-padded frame.
double centroid_oracle(const std::vector<double>& frame, int nfft) {
  double weighted = 0.0, total = 0.0;
  for (int k = 1; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      acc += frame[n] * std::polar(1.0, -2.0 * std::numbers::pi * double(k) * double(n) / nfft);
    }
    const double f = k * 16000.0 / nfft;
    weighted += f * std::abs(acc);
    total += std::abs(acc);
  }
  return total > 0 ? weighted / total : 0.0;
}

// Direct-sum normalized lag correlation maximum over 40..266 samples.
double harmonicity_oracle(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double best = 0.0;
  for (std::size_t k = 40; k <= 266; ++k) {
    double num = 0.0, head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      num += x[i] * x[i + k];
      head += x[i] * x[i];
      tail += x[i + k] * x[i + k];
    }
    if (head > 0 && tail > 0) best = std::max(best, num / std::sqrt(head * tail));
  }
  return std::clamp(best, 0.0, 1.0);
}

std::vector<double> windowed(std::vector<double> frame) {
  const auto& w = hamming_window(static_cast<int>(frame.size()));
  for (std::size_t i = 0; i < frame.size(); ++i) frame[i] *= w[i];
  return frame;
}

}  // namespace

TEST(Fft, MatchesDirectDft) {
  const auto x = fixture::white_noise(64, 1.0, 11);
  std::vector<std::complex<double>> X(x.begin(), x.end());
  fft_plan(64).forward(X);
  for (int k = 0; k < 64; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < 64; ++n) acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / 64.0);
    EXPECT_NEAR(std::abs(X[k] - acc), 0.0, 1e-10);
  }
  fft_plan(64).inverse(X);
  for (int n = 0; n < 64; ++n) EXPECT_NEAR(X[n].real() / 64.0, x[n], 1e-12);
}

TEST(Framing, Counts) {
  EXPECT_EQ(frame_signal(std::vector<double>(16000), 400, 160).size(), 98u);
  EXPECT_EQ(frame_signal(std::vector<double>(400), 400, 160).size(), 1u);
  EXPECT_THROW(frame_signal(std::vector<double>(399), 400, 160), Error);
  try {
    frame_signal(std::vector<double>(399), 400, 160);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooShort);
  }
}

TEST(Framing, CountFormulaOnRandomLengths) {
  std::mt19937 gen(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 400 + gen() % 50000;
    EXPECT_EQ(frame_count(n, 400, 160), (n - 400) / 160 + 1);
    EXPECT_EQ(analyze(std::vector<double>(n, 0.0)).size(), (n - 400) / 160 + 1);
  }
}

// A bin-aligned tone filling the whole transform is a single spectral line.
// A 400-sample Hamming frame leaks enough magnitude across 0-8 kHz to move a
// magnitude-weighted centroid by 30-180 Hz depending on phase, so the leaked
// case is checked against the DFT oracle instead.
TEST(Centroid, OneKilohertzSingleLine) {
  const auto x = fixture::sine(1000.0, 0.032);
  ASSERT_EQ(x.size(), 512u);
  EXPECT_NEAR(spectral_centroid(x), 1000.0, 31.25);
}

TEST(Centroid, OneKilohertzHammingFrameMatchesOracle) {
  const auto w = windowed(fixture::sine(1000.0, 0.025));
  const double c = spectral_centroid(w);
  EXPECT_NEAR(c, centroid_oracle(w, 512), 1e-6 * c);
  EXPECT_GT(c, 1000.0);
}

TEST(Centroid, ZeroFrame) { EXPECT_EQ(spectral_centroid(std::vector<double>(400, 0.0)), 0.0); }

TEST(Centroid, NoiseMatchesDftOracle) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto w = windowed(fixture::white_noise(400, 0.3, seed));
    const double expect = centroid_oracle(w, 512);
    EXPECT_NEAR(spectral_centroid(w), expect, 1e-6 * expect);
  }
}

TEST(Harmonicity, TwoHundredHertzSine) {
  EXPECT_GE(harmonicity(fixture::sine(200.0, 0.025)), 0.95);
}

TEST(Harmonicity, DigitalSilence) { EXPECT_EQ(harmonicity(std::vector<double>(400, 0.0)), 0.0); }

TEST(Harmonicity, NoiseMatchesDirectOracle) {
  for (unsigned seed : {4u, 5u, 6u}) {
    const auto x = fixture::white_noise(400, 0.3, seed);
    const double h = harmonicity(x);
    EXPECT_LT(h, 0.5);
    EXPECT_NEAR(h, harmonicity_oracle(x), 1e-6);
  }
}

TEST(Harmonicity, PeriodicComplexMatchesOracle) {
  std::vector<double> x(400);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = double(i) / 16000.0;
    x[i] = 0.3 * std::sin(2 * std::numbers::pi * 230 * t) + 0.2 * std::sin(2 * std::numbers::pi * 460 * t + 1.0);
  }
  EXPECT_NEAR(harmonicity(x), harmonicity_oracle(x), 1e-9);
}

TEST(Dsp, ScaleInvarianceAboveFloor) {
  auto x = fixture::white_noise(400, 0.2, 9);
  const auto tone = fixture::sine(310.0, 0.025, 0.3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += tone[i];
  for (double gain : {0.05, 0.5, 3.0}) {
    std::vector<double> y(x);
    for (auto& v : y) v *= gain;
    const double c0 = spectral_centroid(windowed(x)), c1 = spectral_centroid(windowed(y));
    const double h0 = harmonicity(x), h1 = harmonicity(y);
    EXPECT_NEAR(c1, c0, 1e-9 * c0);
    EXPECT_NEAR(h1, h0, 1e-9 * h0);
  }
}

TEST(Vad, AllZeroIsNonSpeech) {
  const auto track = analyze(std::vector<double>(32000, 0.0));
  EXPECT_EQ(track.speech_frame_count(), 0u);
}

TEST(Vad, ToneBetweenSilencesBoundaries) {
  std::vector<double> x(16000, 0.0);
  const auto tone = fixture::sine(200.0, 1.0, 0.1 * std::sqrt(2.0));  // -20 dBFS RMS
  x.insert(x.end(), tone.begin(), tone.end());
  x.insert(x.end(), 16000, 0.0);
  const auto track = analyze(x);
  const auto runs = runs_of(track.speech_flags());
  std::vector<lexiscreen::Run> speech;
  for (const auto& r : runs) if (r.value) speech.push_back(r);
  ASSERT_EQ(speech.size(), 1u);
  const double start = track.cell_start(speech[0].start);
  const double end = track.cell_start(speech[0].start + speech[0].length);
  EXPECT_NEAR(start, 1.0, 0.030);
  EXPECT_NEAR(end, 2.0, 0.030);
}

TEST(Vad, IsolatedSpikeRemoved) {
  FrameTrack track;
  track.frames.resize(50);
  for (auto& f : track.frames) f.intensity_db = -120.0;
  track.frames[25].intensity_db = -10.0;
  track.frames[25].harmonicity = 0.9;
  const auto flags = vad(track);
  for (bool b : flags) EXPECT_FALSE(b);
}

TEST(Vad, MedianKillsSingletons) {
  std::vector<bool> f(11, false);
  f[5] = true;
  EXPECT_EQ(median_smooth(f, 5), std::vector<bool>(11, false));
  std::vector<bool> g(11, true);
  g[5] = false;
  EXPECT_EQ(median_smooth(g, 5), std::vector<bool>(11, true));
}

TEST(Vad, NoRunShorterThanThreeFrames) {
  std::mt19937 gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    FrameTrack track;
    track.frames.resize(20 + gen() % 300);
    for (auto& f : track.frames) {
      f.intensity_db = std::uniform_real_distribution<double>(-70, -10)(gen);
      f.harmonicity = std::uniform_real_distribution<double>(0, 1)(gen);
    }
    DspConfig cfg;
    cfg.vad_hangover = int(gen() % 3);
    const auto flags = vad(track, cfg);
    for (const auto& r : runs_of(flags)) EXPECT_GE(r.length, 3u);
  }
}

TEST(Vad, HangoverExtendsRuns) {
  std::vector<bool> f(10, false);
  f[5] = true;
  const auto out = apply_hangover(f, 2);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(out[i], i >= 3 && i <= 7);
}

TEST(Analyze, RecordRanges) {
  auto x = fixture::white_noise(16000, 0.5, 21);
  const auto track = analyze(x);
  for (const auto& f : track.frames) {
    EXPECT_GE(f.centroid_hz, 0.0);
    EXPECT_LE(f.centroid_hz, 8000.0);
    EXPECT_GE(f.harmonicity, 0.0);
    EXPECT_LE(f.harmonicity, 1.0);
    EXPECT_NEAR(f.intensity_db, 10 * std::log10(f.energy + 1e-12), 1e-12);
  }
}
