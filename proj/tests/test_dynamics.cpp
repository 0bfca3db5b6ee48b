#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "lexiscreen/dynamics.hpp"
#include "test_support.hpp"

using namespace lexiscreen;

namespace {

FrameTrack make_track(const std::vector<double>& centroids, const std::vector<double>& intensities,
                      const std::vector<bool>& speech) {
  FrameTrack t;
  t.frames.resize(centroids.size());
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    t.frames[i].centroid_hz = centroids[i];
    t.frames[i].intensity_db = intensities[i];
    t.frames[i].is_speech = speech[i];
  }
  return t;
}

std::vector<VideoInterval> split_intervals(std::size_t frames, int parts) {
  const double total = double(frames) * 0.010 + 0.015;
  std::vector<VideoInterval> out;
  for (int p = 0; p < parts; ++p) out.push_back({total * p / parts, total * (p + 1) / parts, p});
  return out;
}

double pop_std(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

double mean(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  return m / double(v.size());
}

// Straightforward window sum with explicit edge truncation.
double macro_oracle(const std::vector<double>& contour) {
  double mu = mean(contour);
  std::vector<double> c(contour);
  for (auto& v : c) v -= mu;
  std::vector<double> avg;
  const int n = int(c.size());
  for (int i = 0; i < n; ++i) {
    double s = 0;
    int cnt = 0;
    for (int j = i - 15; j <= i + 15; ++j) {
      if (j >= 0 && j < n) s += c[j], ++cnt;
    }
    avg.push_back(s / cnt);
  }
  return pop_std(avg);
}

}  // namespace

TEST(SpectralDynamics, SingleBand) {
  const std::size_t n = 100;
  const auto t = make_track(std::vector<double>(n, 1100.0), std::vector<double>(n, -20.0),
                            std::vector<bool>(n, true));
  const auto ivs = split_intervals(n, 1);
  const auto sd = spectral_dynamics(t, ivs);
  EXPECT_DOUBLE_EQ(sd.freq_distribution_ratio, 100.0);
  EXPECT_DOUBLE_EQ(sd.norm_mode_count, 1.0);
  EXPECT_DOUBLE_EQ(sd.norm_mode_variation, 0.0);
}

TEST(SpectralDynamics, EvenTwoBandSplit) {
  const std::size_t n = 200;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i % 2 ? 500.0 : 2100.0;
  const auto t = make_track(c, std::vector<double>(n, -20.0), std::vector<bool>(n, true));
  const auto sd = spectral_dynamics(t, split_intervals(n, 4));
  EXPECT_DOUBLE_EQ(sd.freq_distribution_ratio, 1.0);
}

TEST(SpectralDynamics, MatchesCountingOracle) {
  std::mt19937 gen(42);
  const std::size_t n = 600;
  std::vector<double> c(n);
  std::vector<bool> s(n);
  std::normal_distribution<double> hz(1800.0, 900.0);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::clamp(hz(gen), 0.0, 7999.0);
    s[i] = gen() % 5 != 0;
  }
  const auto t = make_track(c, std::vector<double>(n, -20.0), s);
  const auto ivs = split_intervals(n, 3);

  std::vector<double> ratios, shares;
  std::map<int, int> global;
  int total = 0;
  for (const auto& iv : ivs) {
    std::map<int, int> hist;
    int frames = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double centre = 0.010 * double(i) + 0.0125;
      const bool last = iv.sentence_index == 2;
      if (!s[i] || centre < iv.start || (centre >= iv.end && !(last && centre <= iv.end))) continue;
      const int band = int(c[i] / 400.0);
      ++hist[band];
      ++global[band];
      ++frames;
    }
    std::vector<std::pair<int, int>> counts;  // (-count, band) sorts by count then lower band
    for (auto [b, k] : hist) counts.push_back({-k, b});
    std::sort(counts.begin(), counts.end());
    const int c1 = -counts[0].first, c2 = counts.size() > 1 ? -counts[1].first : 0;
    ratios.push_back(double(c1) / std::max(c2, 1));
    shares.push_back(double(c1) / frames);
    total += frames;
  }
  int g1 = 0;
  for (auto [b, k] : global) g1 = std::max(g1, k);

  const auto sd = spectral_dynamics(t, ivs);
  EXPECT_NEAR(sd.freq_distribution_ratio, mean(ratios), 1e-9);
  EXPECT_NEAR(sd.norm_mode_count, double(g1) / total, 1e-9);
  EXPECT_NEAR(sd.norm_mode_variation, pop_std(shares), 1e-9);
  EXPECT_GE(sd.freq_distribution_ratio, 1.0);
  EXPECT_GT(sd.norm_mode_count, 0.0);
  EXPECT_LE(sd.norm_mode_count, 1.0);
}

TEST(SpectralDynamics, TopBandTieGoesLow) {
  const std::vector<int> hist{0, 3, 0, 3, 2};
  const auto top = top_two(hist);
  EXPECT_EQ(top.c1, 3);
  EXPECT_EQ(top.c2, 3);
}

TEST(SpectralDynamics, NoSpeechZeros) {
  const std::size_t n = 50;
  const auto t = make_track(std::vector<double>(n, 1000.0), std::vector<double>(n, -20.0),
                            std::vector<bool>(n, false));
  const auto sd = spectral_dynamics(t, split_intervals(n, 1));
  EXPECT_TRUE(sd.no_speech);
  EXPECT_EQ(sd.freq_distribution_ratio, 0.0);
  EXPECT_EQ(sd.norm_mode_count, 0.0);
}

TEST(IntensityDynamics, ConstantContour) {
  const std::size_t n = 300;
  const auto t = make_track(std::vector<double>(n, 1000.0), std::vector<double>(n, -23.0),
                            std::vector<bool>(n, true));
  const auto id = intensity_dynamics(t, split_intervals(n, 3));
  EXPECT_NEAR(id.macro_mean, 0.0, 1e-12);
  EXPECT_NEAR(id.macro_std, 0.0, 1e-12);
  EXPECT_NEAR(id.micro_mean, 0.0, 1e-12);
  EXPECT_NEAR(id.micro_std, 0.0, 1e-12);
}

TEST(IntensityDynamics, AlternatingContour) {
  const std::size_t n = 301;
  std::vector<double> db(n);
  for (std::size_t i = 0; i < n; ++i) db[i] = -30.0 + (i % 2 ? -3.0 : 3.0);
  const auto t = make_track(std::vector<double>(n, 1000.0), db, std::vector<bool>(n, true));
  const auto id = intensity_dynamics(t, split_intervals(n, 1));
  EXPECT_NEAR(id.micro_mean, 6.0, 1e-9);
  EXPECT_LT(id.macro_mean, 0.2);
  EXPECT_NEAR(id.macro_mean, macro_oracle(db), 1e-9);
}

TEST(IntensityDynamics, FourHertzContourMatchesOracle) {
  const std::size_t n = 400;
  std::vector<double> db(n);
  for (std::size_t i = 0; i < n; ++i) db[i] = -25.0 + 6.0 * std::sin(2 * std::numbers::pi * 4.0 * 0.010 * double(i));
  const auto t = make_track(std::vector<double>(n, 1000.0), db, std::vector<bool>(n, true));
  const auto id = intensity_dynamics(t, split_intervals(n, 1));
  EXPECT_NEAR(id.macro_mean, macro_oracle(db), 1e-6);
  EXPECT_GT(id.macro_mean, 0.5);
}

TEST(IntensityDynamics, NonSpeechFramesDropped) {
  const std::size_t n = 200;
  std::vector<double> db(n, -20.0);
  std::vector<bool> s(n, true);
  for (std::size_t i = 80; i < 120; ++i) db[i] = -90.0, s[i] = false;
  const auto t = make_track(std::vector<double>(n, 1000.0), db, s);
  const auto id = intensity_dynamics(t, split_intervals(n, 1));
  EXPECT_NEAR(id.macro_mean, 0.0, 1e-12);
  EXPECT_NEAR(id.micro_mean, 0.0, 1e-12);
}

TEST(Dynamics, DbOffsetInvariance) {
  std::mt19937 gen(8);
  const std::size_t n = 500;
  std::vector<double> c(n), db(n);
  std::vector<bool> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::uniform_real_distribution<double>(200, 5000)(gen);
    db[i] = std::uniform_real_distribution<double>(-40, -10)(gen);
    s[i] = gen() % 4 != 0;
  }
  const auto ivs = split_intervals(n, 4);
  const auto base_t = make_track(c, db, s);
  const auto sd0 = spectral_dynamics(base_t, ivs);
  const auto id0 = intensity_dynamics(base_t, ivs);
  for (double off : {-17.5, 3.0, 12.25}) {
    std::vector<double> shifted(db);
    for (auto& v : shifted) v += off;
    const auto t = make_track(c, shifted, s);
    const auto sd = spectral_dynamics(t, ivs);
    const auto id = intensity_dynamics(t, ivs);
    EXPECT_NEAR(sd.freq_distribution_ratio, sd0.freq_distribution_ratio, 1e-9);
    EXPECT_NEAR(sd.norm_mode_count, sd0.norm_mode_count, 1e-9);
    EXPECT_NEAR(sd.norm_mode_variation, sd0.norm_mode_variation, 1e-9);
    EXPECT_NEAR(id.macro_mean, id0.macro_mean, 1e-9);
    EXPECT_NEAR(id.macro_std, id0.macro_std, 1e-9);
    EXPECT_NEAR(id.micro_mean, id0.micro_mean, 1e-9);
    EXPECT_NEAR(id.micro_std, id0.micro_std, 1e-9);
  }
}

TEST(Dynamics, ClearSpeechVersusMumble) {
  std::mt19937 gen(12);
  const double seconds = 6.0;
  const std::size_t n = std::size_t(seconds * 16000);
  std::vector<double> clear(n), mumble(n);
  std::uniform_real_distribution<double> formant(400.0, 4000.0);
  double f = formant(gen);
  int last_syllable = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / 16000.0;
    const int syllable = int(t * 4.0);
    if (syllable != last_syllable) f = formant(gen), last_syllable = syllable;
    const double deep = std::pow(std::sin(std::numbers::pi * 4.0 * t), 2.0);  // 100% AM at 4 Hz
    clear[i] = 0.2 * deep * std::sin(2 * std::numbers::pi * f * t);
    const double shallow = 1.0 - 0.3 * std::pow(std::sin(std::numbers::pi * 4.0 * t), 2.0);
    mumble[i] = 0.05 * shallow * std::sin(2 * std::numbers::pi * 900.0 * t);
  }
  auto features = [](const std::vector<double>& x) {
    auto track = analyze(x);
    for (auto& fr : track.frames) fr.is_speech = true;
    const std::vector<VideoInterval> ivs{{0.0, 6.0, 0}};
    return std::pair{spectral_dynamics(track, ivs), intensity_dynamics(track, ivs)};
  };
  const auto [sd_a, id_a] = features(clear);
  const auto [sd_b, id_b] = features(mumble);
  EXPECT_GT(id_a.macro_mean, id_b.macro_mean);
  EXPECT_LT(sd_a.norm_mode_count, sd_b.norm_mode_count);
}
