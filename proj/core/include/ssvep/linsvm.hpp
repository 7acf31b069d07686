#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssvep/training.hpp"

namespace ssvep {

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;

  static SvmModel zeros(std::size_t dim) { return SvmModel{std::vector<double>(dim, 0.0), 0.0}; }
  double decision(std::span<const double> x) const;
  bool operator==(const SvmModel&) const = default;
};

// Feature rows with targets in {-1, +1}.
struct SvmDataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

struct SvmTrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double reg_c = 0.01;
  std::size_t batch_size = 128;
  int patience = 200;
  int max_epochs = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SvmTrainResult {
  SvmModel model;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

// Mean hinge loss over the batch plus (c/2)*||w||^2; the bias is not
// regularised.
double svm_loss(const SvmModel& model, const SvmDataset& batch, double reg_c);

// Subgradient of svm_loss over the listed rows. Margins of exactly 1 count as
// inactive.
SvmModel svm_gradient(const SvmModel& model, const SvmDataset& data,
                      std::span<const std::size_t> rows, double reg_c);

// Mini-batch SGD with momentum (v <- mu*v + g, theta <- theta - lr*v) and
// early stopping on validation loss; returns the best-validation parameters.
SvmTrainResult svm_train(const SvmDataset& train, const SvmDataset& val,
                         const SvmTrainConfig& cfg);

// +1 when w.x + b > 0, otherwise -1.
int svm_predict(const SvmModel& model, std::span<const double> x);

// {0, 1} class index <-> {-1, +1} target.
inline int class_to_target(int class_index) { return class_index == 1 ? 1 : -1; }
inline int target_to_class(int target) { return target > 0 ? 1 : 0; }

}  // namespace ssvep
