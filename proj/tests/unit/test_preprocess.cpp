#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ssvep/error.hpp"
#include "ssvep/preprocess.hpp"
#include "ssvep/synth.hpp"

using namespace ssvep;

namespace {

std::vector<double> tone(double hz, std::size_t n, double fs = 250.0, double phase = 0.3) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs + phase);
  }
  return x;
}

Spectrogram filled(std::size_t r, std::size_t c, std::vector<double> v) {
  Spectrogram s(r, c);
  s.values = std::move(v);
  return s;
}

}  // namespace

TEST(Car, TwoByTwoExample) {
  RawTrial t;
  t.channels = {"A", "B"};
  t.samples = {1, 2, 3, 4};  // A = [1, 2], B = [3, 4]
  const auto out = car_filter(t);
  EXPECT_EQ(out.samples, (std::vector<float>{-1, -1, 1, 1}));
}

TEST(Car, ChannelsSumToZero) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  RawTrial t;
  for (int c = 0; c < 64; ++c) t.channels.push_back("C" + std::to_string(c));
  t.samples.resize(64 * 500);
  for (auto& v : t.samples) v = u(rng);
  const auto out = car_filter(t);
  for (std::size_t i = 0; i < 500; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 64; ++c) sum += out.channel(c)[i];
    EXPECT_LT(std::abs(sum), 1e-5);
  }
}

TEST(Car, NeedsTwoChannels) {
  RawTrial t;
  t.channels = {"Oz"};
  t.samples = {1, 2, 3};
  EXPECT_THROW(car_filter(t), DataError);
}

TEST(Windows, CountsForHalfSecondAndTenthSecond) {
  EXPECT_EQ(window_count(1250, WindowConfig{125, 125}), 10u);
  EXPECT_EQ(window_count(1250, WindowConfig{125, 25}), 46u);
}

TEST(Windows, CountMatchesBruteForce) {
  for (std::size_t len = 1; len <= 300; len += 7) {
    for (std::size_t w = 1; w <= len; w += 11) {
      for (std::size_t d = 1; d <= std::min<std::size_t>(w, 40); d += 3) {
        std::size_t brute = 0;
        for (std::size_t s = 0; s + w <= len; s += d) ++brute;
        ASSERT_EQ(window_count(len, WindowConfig{w, d}), brute) << len << " " << w << " " << d;
      }
    }
  }
}

TEST(Windows, SlicesCopyTheRightSamples) {
  std::vector<float> x(1250);
  std::iota(x.begin(), x.end(), 0.0f);
  const auto slices = slice_windows(x, WindowConfig{125, 25}, SliceSource{4, 12.0f, 2, 0});
  ASSERT_EQ(slices.size(), 46u);
  EXPECT_EQ(slices[3].source.start_sample, 75u);
  EXPECT_EQ(slices[3].source.subject_id, 4);
  EXPECT_EQ(slices[3].samples.size(), 125u);
  EXPECT_EQ(slices[3].samples.front(), 75.0);
  EXPECT_EQ(slices[45].samples.back(), 1249.0);
}

TEST(Windows, InvalidConfigs) {
  EXPECT_THROW(WindowConfig({0, 1}).validate(10), ConfigError);
  EXPECT_THROW(WindowConfig({5, 0}).validate(10), ConfigError);
  EXPECT_THROW(WindowConfig({5, 6}).validate(10), ConfigError);
  EXPECT_THROW(WindowConfig({11, 1}).validate(10), DataError);
}

TEST(Stft, ShapeAndPeakRow) {
  const auto x = tone(12.0, 125);
  const auto s = stft_magnitude(x, 250.0, StftConfig{});
  EXPECT_EQ(s.rows, 63u);
  EXPECT_EQ(s.cols, 3u);
  EXPECT_DOUBLE_EQ(s.row_freqs_hz[6], 12.0);
  EXPECT_DOUBLE_EQ(s.row_freqs_hz[62], 124.0);
  for (std::size_t c = 0; c < s.cols; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 0; r < s.rows; ++r) {
      if (s.at(r, c) > s.at(best, c)) best = r;
    }
    EXPECT_EQ(best, 6u) << "column " << c;
  }
}

TEST(Stft, FramesMatchDirectDftOfPaddedSignal) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::vector<double> x(125);
  for (auto& v : x) v = n01(rng);
  const auto s = stft_magnitude(x, 250.0, StftConfig{});
  std::vector<double> padded(62, 0.0);
  padded.insert(padded.end(), x.begin(), x.end());
  padded.resize(padded.size() + 62, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> frame(padded.begin() + static_cast<long>(c * 62),
                              padded.begin() + static_cast<long>(c * 62 + 125));
    const auto dft = oracle::direct_dft(frame);
    for (std::size_t r = 0; r < 63; ++r) {
      EXPECT_NEAR(s.at(r, c), std::abs(dft[r]), 1e-9) << r << "," << c;
    }
  }
}

TEST(Stft, HannWindowIsPeriodic) {
  const auto w = window_coefficients(WindowFn::hann, 8);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  const auto r = window_coefficients(WindowFn::rectangular, 5);
  EXPECT_EQ(r, std::vector<double>(5, 1.0));
}

TEST(BandSelect, DefaultBandsKeepEightRows) {
  const auto s = stft_magnitude(tone(12.0, 125), 250.0, StftConfig{});
  const auto b = band_select(s, BandSpec::ssvep_default());
  EXPECT_EQ(b.rows, 8u);
  EXPECT_EQ(b.cols, 3u);
  EXPECT_EQ(b.row_freqs_hz, (std::vector<double>{10, 12, 14, 16, 22, 24, 28, 30}));
  EXPECT_EQ(b.at(1, 0), s.at(6, 0));
  EXPECT_EQ(b.at(7, 2), s.at(15, 2));
}

TEST(BandSelect, SingleHalfOpenBand) {
  const auto s = stft_magnitude(tone(12.0, 125), 250.0, StftConfig{});
  const auto b = band_select(s, BandSpec{{{12.0, 14.0}}});
  EXPECT_EQ(b.rows, 1u);
  EXPECT_EQ(b.row_freqs_hz, std::vector<double>{12.0});
}

TEST(BandSelect, EmptySelectionAndBadBandsAreErrors) {
  const auto s = stft_magnitude(tone(12.0, 125), 250.0, StftConfig{});
  EXPECT_THROW(band_select(s, BandSpec{{{12.5, 13.5}}}), DataError);
  EXPECT_THROW(BandSpec({{{14.0, 12.0}}}).validate(), ConfigError);
}

TEST(DbNormalize, TwoValueExample) {
  const auto out = db_normalize(filled(1, 2, {1.0, 10.0}));
  EXPECT_NEAR(out.values[0], 0.0, 1e-12);
  EXPECT_NEAR(out.values[1], 1.0, 1e-12);
  EXPECT_TRUE(out.normalized);
}

TEST(DbNormalize, RangeIsUnitIntervalAndConstantMapsToZero) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 1e3);
  Spectrogram s(8, 3);
  for (auto& v : s.values) v = u(rng);
  const auto out = db_normalize(s);
  EXPECT_DOUBLE_EQ(*std::min_element(out.values.begin(), out.values.end()), 0.0);
  EXPECT_DOUBLE_EQ(*std::max_element(out.values.begin(), out.values.end()), 1.0);
  const auto flat = db_normalize(filled(2, 2, {5, 5, 5, 5}));
  EXPECT_EQ(flat.values, std::vector<double>(4, 0.0));
}

TEST(DbNormalize, InvariantToPositiveScale) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  Spectrogram s(8, 3);
  for (auto& v : s.values) v = u(rng);
  auto scaled = s;
  for (auto& v : scaled.values) v *= 37.5;
  const auto a = db_normalize(s);
  const auto b = db_normalize(scaled);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(Resize, IdentityAndUpscale) {
  const auto s = filled(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(resize_nearest(s, 2, 2).values, s.values);
  const auto up = resize_nearest(s, 4, 4);
  EXPECT_EQ(up.values, (std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4}));
}

TEST(Resize, EightByThreeToNetworkInput) {
  Spectrogram s(8, 3);
  std::iota(s.values.begin(), s.values.end(), 0.0);
  const auto out = resize_nearest(s, 96, 64);
  EXPECT_EQ(out.rows, 96u);
  EXPECT_EQ(out.cols, 64u);
  for (std::size_t r = 0; r < 96; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      ASSERT_EQ(out.at(r, c), s.at(r * 8 / 96, c * 3 / 64));
    }
  }
}

TEST(Flatten, RowMajor24) {
  Spectrogram s(8, 3);
  std::iota(s.values.begin(), s.values.end(), 0.0);
  const auto f = flatten_for_svm(s);
  ASSERT_EQ(f.size(), 24u);
  EXPECT_EQ(f[4], s.at(1, 1));
  EXPECT_THROW(flatten_for_svm(Spectrogram(4, 3)), DataError);
}

TEST(Pipeline, ImagesPerTrialAndDeterminism) {
  SynthStoreSpec spec;
  spec.n_subjects = 2;
  spec.base.seed = 11;
  const auto store = generate_store(spec);
  PreprocessConfig cfg;
  cfg.car = false;
  const LabelMap labels;
  const auto a = store_to_images(store, cfg, labels);
  const auto b = store_to_images(store, cfg, labels);
  ASSERT_EQ(a.size(), 24u * 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].image, b[i].image);
    ASSERT_EQ(a[i].image.rows, 8u);
    ASSERT_EQ(a[i].image.cols, 3u);
  }
  EXPECT_EQ(a[0].label, 0);
  EXPECT_EQ(a[60].label, 1);
  EXPECT_EQ(a[13].source.start_sample, 375u);

  cfg.window.displacement_samples = 25;
  EXPECT_EQ(store_to_images(store, cfg, labels).size(), 24u * 46u);
}

TEST(Pipeline, CarOnSingleChannelIsAnError) {
  SynthStoreSpec spec;
  spec.n_subjects = 1;
  const auto store = generate_store(spec);
  EXPECT_THROW(store_to_images(store, PreprocessConfig{}, LabelMap{}), DataError);
}

TEST(Pipeline, PgmHeaderAndPixels) {
  const auto s = filled(2, 3, {0.0, 0.5, 1.0, 0.25, 2.0, -1.0});
  const auto path = std::filesystem::temp_directory_path() /
                    ("ssvep_pgm_" + std::to_string(::getpid()) + ".pgm");
  write_pgm(s, path);
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(data.substr(0, header.size()), header);
  const std::string px = data.substr(header.size());
  ASSERT_EQ(px.size(), 6u);
  EXPECT_EQ(static_cast<unsigned char>(px[0]), 0);
  EXPECT_EQ(static_cast<unsigned char>(px[1]), 128);
  EXPECT_EQ(static_cast<unsigned char>(px[2]), 255);
  EXPECT_EQ(static_cast<unsigned char>(px[3]), 64);
  EXPECT_EQ(static_cast<unsigned char>(px[4]), 255);
  EXPECT_EQ(static_cast<unsigned char>(px[5]), 0);
}
