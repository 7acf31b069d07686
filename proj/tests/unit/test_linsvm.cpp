#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ssvep/error.hpp"
#include "ssvep/linsvm.hpp"
#include "ssvep/training.hpp"

using namespace ssvep;

namespace {

// Two Gaussian blobs in 24-D separated along a fixed direction by `gap`.
SvmDataset blobs(std::size_t n, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 0.3);
  SvmDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 ? 1 : -1;
    std::vector<double> x(24);
    for (auto& v : x) v = n01(rng);
    for (std::size_t k = 0; k < 24; k += 3) x[k] += y * gap;
    d.x.push_back(std::move(x));
    d.y.push_back(y);
  }
  return d;
}

double accuracy(const SvmModel& m, const SvmDataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += svm_predict(m, d.x[i]) == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

}  // namespace

TEST(SvmLoss, WorkedExamples) {
  SvmModel m{{1.0, 0.0}, 0.0};
  SvmDataset d{{{2.0, 0.0}}, {1}};
  // margin 2 -> hinge 0; reg 0.01/2 * 1 = 0.005
  EXPECT_DOUBLE_EQ(svm_loss(m, d, 0.01), 0.005);
  m = SvmModel{{0.2, 0.0}, 0.0};
  d = SvmDataset{{{1.0, 0.0}}, {-1}};
  // hinge 1 + 0.2 = 1.2; reg 0.5 * 0.04 = 0.02
  EXPECT_NEAR(svm_loss(m, d, 1.0), 1.22, 1e-15);
  EXPECT_NEAR(svm_loss(SvmModel{{0.2, 0.0}, 0.0}, d, 1.0) - 1.2, 0.02, 1e-15);
  // bias is not regularised
  EXPECT_DOUBLE_EQ(svm_loss(SvmModel{{0.0, 0.0}, 5.0}, SvmDataset{{{0.0, 0.0}}, {1}}, 1.0), 0.0);
}

TEST(SvmGradient, MatchesFiniteDifferencesAwayFromKinks) {
  const auto d = blobs(40, 0.5, 3);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01(0.0, 0.2);
  SvmModel m = SvmModel::zeros(24);
  for (auto& v : m.w) v = n01(rng);
  m.b = 0.1;
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto g = svm_gradient(m, d, rows, 0.05);
  const double h = 1e-6;
  for (std::size_t k = 0; k <= 24; ++k) {
    auto plus = m, minus = m;
    if (k < 24) {
      plus.w[k] += h;
      minus.w[k] -= h;
    } else {
      plus.b += h;
      minus.b -= h;
    }
    const double fd = (svm_loss(plus, d, 0.05) - svm_loss(minus, d, 0.05)) / (2 * h);
    const double an = k < 24 ? g.w[k] : g.b;
    EXPECT_NEAR(an, fd, 1e-6) << "coordinate " << k;
  }
}

TEST(SvmGradient, KinkContributesNothing) {
  SvmModel m{{1.0}, 0.0};
  SvmDataset d{{{1.0}}, {1}};  // margin exactly 1
  const std::vector<std::size_t> rows{0};
  const auto g = svm_gradient(m, d, rows, 0.0);
  EXPECT_EQ(g.w[0], 0.0);
  EXPECT_EQ(g.b, 0.0);
}

TEST(SvmTrain, SeparableDataReachesFullAccuracy) {
  const auto train = blobs(400, 1.0, 1);
  const auto val = blobs(100, 1.0, 2);
  SvmTrainConfig cfg;
  cfg.max_epochs = 300;
  cfg.patience = 50;
  const auto res = svm_train(train, val, cfg);
  EXPECT_EQ(accuracy(res.model, train), 1.0);
  EXPECT_EQ(accuracy(res.model, val), 1.0);
  EXPECT_FALSE(res.log.empty());
  EXPECT_EQ(res.log.front().epoch, 1);
}

TEST(SvmTrain, DeterministicForEqualSeeds) {
  const auto train = blobs(200, 0.2, 5);
  const auto val = blobs(60, 0.2, 6);
  SvmTrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.patience = 10;
  cfg.seed = 77;
  const auto a = svm_train(train, val, cfg);
  const auto b = svm_train(train, val, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.log, b.log);
}

TEST(SvmTrain, PatienceZeroRunsOneEpoch) {
  SvmTrainConfig cfg;
  cfg.patience = 0;
  const auto res = svm_train(blobs(50, 1.0, 1), blobs(20, 1.0, 2), cfg);
  EXPECT_EQ(res.log.size(), 1u);
  EXPECT_EQ(res.best_epoch, 1);
}

TEST(SvmTrain, Errors) {
  auto one_class = blobs(10, 1.0, 1);
  for (auto& y : one_class.y) y = 1;
  EXPECT_THROW(svm_train(one_class, blobs(10, 1.0, 2), SvmTrainConfig{}), DataError);
  SvmTrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(svm_train(blobs(10, 1.0, 1), blobs(10, 1.0, 2), bad), ConfigError);
  SvmTrainConfig wild;
  wild.lr = 1e200;
  wild.max_epochs = 50;
  wild.patience = 5;
  EXPECT_THROW(svm_train(blobs(50, 1.0, 1), blobs(20, 1.0, 2), wild), NumericError);
}

TEST(SvmPredict, SignRule) {
  const SvmModel m{{1.0, -1.0}, 0.0};
  EXPECT_EQ(svm_predict(m, std::vector<double>{2.0, 1.0}), 1);
  EXPECT_EQ(svm_predict(m, std::vector<double>{1.0, 2.0}), -1);
  EXPECT_EQ(svm_predict(m, std::vector<double>{1.0, 1.0}), -1);
  EXPECT_EQ(target_to_class(svm_predict(m, std::vector<double>{3.0, 0.0})), 1);
  EXPECT_EQ(class_to_target(0), -1);
}

TEST(SvmStep, RegularisationContractsWeights) {
  // With no active margins the gradient is c*w, so one plain step scales w by (1 - lr*c).
  SvmModel m{{0.5, -0.25}, 0.0};
  SvmDataset d{{{100.0, 0.0}}, {1}};
  const std::vector<std::size_t> rows{0};
  const auto g = svm_gradient(m, d, rows, 0.1);
  EXPECT_DOUBLE_EQ(g.w[0], 0.05);
  EXPECT_DOUBLE_EQ(g.w[1], -0.025);
  EXPECT_EQ(g.b, 0.0);
}

TEST(EarlyStopping, CountsEpochsSinceBest) {
  EarlyStopping es(2);
  EXPECT_TRUE(es.update(1, 1.0));
  EXPECT_FALSE(es.should_stop());
  EXPECT_FALSE(es.update(2, 1.0));
  EXPECT_FALSE(es.should_stop());
  EXPECT_TRUE(es.update(3, 0.5));
  EXPECT_FALSE(es.update(4, 0.6));
  EXPECT_FALSE(es.update(5, 0.7));
  EXPECT_TRUE(es.should_stop());
  EXPECT_EQ(es.best_epoch(), 3);
  EXPECT_EQ(es.best_loss(), 0.5);
}

TEST(TrainingLog, CsvLayout) {
  const std::vector<EpochLog> log{{1, 0.5, 0.25, 0.75}, {2, 0.125, 0.0625, 1.0}};
  const auto path = std::filesystem::temp_directory_path() /
                    ("ssvep_log_" + std::to_string(::getpid()) + ".csv");
  write_log_csv(log, path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  std::filesystem::remove(path);
  EXPECT_EQ(header, "epoch,train_loss,val_loss,val_acc");
  EXPECT_EQ(first.substr(0, 2), "1,");
}
