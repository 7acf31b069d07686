#include "ssvep/linsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ssvep/error.hpp"

namespace ssvep {
namespace {

void check_dataset(const SvmDataset& d, std::size_t dim, const char* name) {
  if (d.x.size() != d.y.size()) {
    throw DataError(std::string(name) + ": feature and target counts differ");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.x[i].size() != dim) throw DataError(std::string(name) + ": ragged feature rows");
    if (d.y[i] != 1 && d.y[i] != -1) {
      throw DataError(std::string(name) + ": targets must be -1 or +1");
    }
  }
}

double accuracy(const SvmModel& m, const SvmDataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += svm_predict(m, d.x[i]) == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

}  // namespace

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != w.size()) {
    throw DataError("feature length " + std::to_string(x.size()) + " does not match model " +
                    std::to_string(w.size()));
  }
  return std::inner_product(w.begin(), w.end(), x.begin(), b);
}

void SvmTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("SVM learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("SVM momentum must be in [0, 1)");
  if (!(reg_c >= 0.0)) throw ConfigError("SVM regularisation must be >= 0");
  if (batch_size == 0) throw ConfigError("SVM batch size must be positive");
  if (max_epochs < 1) throw ConfigError("SVM max_epochs must be >= 1");
  if (patience < 0 || patience > max_epochs) {
    throw ConfigError("SVM patience must be in [0, max_epochs]");
  }
}

double svm_loss(const SvmModel& model, const SvmDataset& batch, double reg_c) {
  if (batch.size() == 0) throw DataError("svm_loss on an empty batch");
  double hinge = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    hinge += std::max(0.0, 1.0 - batch.y[i] * model.decision(batch.x[i]));
  }
  const double norm2 = std::inner_product(model.w.begin(), model.w.end(), model.w.begin(), 0.0);
  return hinge / static_cast<double>(batch.size()) + 0.5 * reg_c * norm2;
}

SvmModel svm_gradient(const SvmModel& model, const SvmDataset& data,
                      std::span<const std::size_t> rows, double reg_c) {
  SvmModel g = SvmModel::zeros(model.w.size());
  if (rows.empty()) return g;
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto i : rows) {
    const double y = data.y[i];
    if (y * model.decision(data.x[i]) < 1.0) {
      for (std::size_t j = 0; j < g.w.size(); ++j) g.w[j] -= y * data.x[i][j] * inv;
      g.b -= y * inv;
    }
  }
  for (std::size_t j = 0; j < g.w.size(); ++j) g.w[j] += reg_c * model.w[j];
  return g;
}

SvmTrainResult svm_train(const SvmDataset& train, const SvmDataset& val,
                         const SvmTrainConfig& cfg) {
  cfg.validate();
  if (train.size() == 0 || val.size() == 0) {
    throw DataError("SVM training needs non-empty train and validation sets");
  }
  const std::size_t dim = train.x.front().size();
  check_dataset(train, dim, "train");
  check_dataset(val, dim, "validation");
  const bool has_pos = std::find(train.y.begin(), train.y.end(), 1) != train.y.end();
  const bool has_neg = std::find(train.y.begin(), train.y.end(), -1) != train.y.end();
  if (!has_pos || !has_neg) throw DataError("SVM training data contains a single class");

  SvmModel model = SvmModel::zeros(dim);
  SvmModel velocity = SvmModel::zeros(dim);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  SvmTrainResult result;
  result.model = model;
  EarlyStopping stopper(cfg.patience);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, order.size() - start);
      const auto g = svm_gradient(model, train,
                                  std::span<const std::size_t>(order).subspan(start, len),
                                  cfg.reg_c);
      for (std::size_t j = 0; j < dim; ++j) {
        velocity.w[j] = cfg.momentum * velocity.w[j] + g.w[j];
        model.w[j] -= cfg.lr * velocity.w[j];
      }
      velocity.b = cfg.momentum * velocity.b + g.b;
      model.b -= cfg.lr * velocity.b;
    }
    for (double v : model.w) {
      if (!std::isfinite(v)) throw NumericError("SVM weights diverged at epoch " +
                                                std::to_string(epoch));
    }

    EpochLog entry{epoch, svm_loss(model, train, cfg.reg_c), svm_loss(model, val, cfg.reg_c),
                   accuracy(model, val)};
    result.log.push_back(entry);
    if (stopper.update(epoch, entry.val_loss)) {
      result.model = model;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

int svm_predict(const SvmModel& model, std::span<const double> x) {
  return model.decision(x) > 0.0 ? 1 : -1;
}

}  // namespace ssvep
