#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ssvep/tensor.hpp"
#include "ssvep/training.hpp"

namespace ssvep {

enum class LayerKind { conv3x3, maxpool2x2, relu, dropout, flatten, dense };

const char* to_string(LayerKind kind);

// conv3x3 is stride 1 with zero padding 1; maxpool2x2 is stride 2.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t units = 0;  // output channels (conv) or width (dense)
  double rate = 0.0;      // dropout probability

  static LayerSpec conv(std::size_t channels) { return {LayerKind::conv3x3, channels, 0.0}; }
  static LayerSpec pool() { return {LayerKind::maxpool2x2, 0, 0.0}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0.0}; }
  static LayerSpec dropout(double p) { return {LayerKind::dropout, 0, p}; }
  static LayerSpec flatten() { return {LayerKind::flatten, 0, 0.0}; }
  static LayerSpec dense(std::size_t width) { return {LayerKind::dense, width, 0.0}; }

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::size_t in_channels = 1;
  std::size_t in_rows = 96;
  std::size_t in_cols = 64;

  // The 2-class network: VGG-style conv block (64, 128, 256x2, 512x2 with
  // four pools) followed by dropout 0.5, dense 512 + ReLU, dropout 0.5,
  // dense 2 (linear).
  static NetworkSpec full();
  // Same conv block with the 4096-4096-128 dense head of the audio VGG
  // network; the usual source of a transferred prefix.
  static NetworkSpec vggish();
  // Channels 8/16/32/32 on a 24x16 input: the desk-scale variant.
  static NetworkSpec scaled();
  // conv8 -> relu -> pool -> flatten -> dense 2 on a rows x cols input.
  static NetworkSpec tiny(std::size_t rows, std::size_t cols);

  // Output shape (excluding batch) of every layer; throws naming the first
  // layer whose input shape is inconsistent.
  std::vector<Shape> output_shapes() const;
  std::size_t n_classes() const;
  // Number of leading layers forming the convolutional prefix (everything
  // before the first flatten/dropout/dense).
  std::size_t prefix_length() const;

  bool operator==(const NetworkSpec&) const = default;
};

// Tensor names per layer: conv layers are "conv1", "conv2", ... and dense
// layers "dense1", ... counted in order, each with ".weight" and ".bias".
// Returns nullopt for parameter-free layers.
std::optional<std::string> layer_param_prefix(const NetworkSpec& spec, std::size_t layer);

struct ParamEntry {
  Tensor value;
  Tensor velocity;  // momentum buffer, same shape as value
  bool frozen = false;
};

struct ModelParams {
  std::map<std::string, ParamEntry> tensors;

  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  bool contains(const std::string& name) const { return tensors.count(name) != 0; }
  std::size_t parameter_count() const;
};

// Kaiming-uniform (fan-in) weights, zero biases. Each tensor draws from a
// stream keyed by (seed, tensor name); values are rounded to f32 so they
// survive a save/load round trip exactly.
ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed);

struct ForwardCache {
  std::vector<Tensor> inputs;                     // input to each layer
  std::vector<std::vector<std::uint32_t>> argmax;  // maxpool routing
  std::vector<std::vector<double>> dropout_scale;  // 0 or 1/(1-p)
};

struct ForwardResult {
  Tensor logits;  // [N, classes]
  std::optional<ForwardCache> cache;
};

// `batch` is [N, C, H, W]. Dropout is active only when `training` is set, in
// which case `rng` must be non-null.
ForwardResult forward(const NetworkSpec& spec, const ModelParams& params, const Tensor& batch,
                      bool training, std::mt19937_64* rng = nullptr, bool keep_cache = false);

struct Gradients {
  std::map<std::string, Tensor> params;  // unfrozen tensors only
  Tensor input;
};

Gradients backward(const NetworkSpec& spec, const ModelParams& params,
                   const std::optional<ForwardCache>& cache, const Tensor& grad_logits);

// -log softmax(logits)[cls], max-subtracted.
double loss_xent(std::span<const double> logits, int cls);

struct XentBatch {
  double mean_loss = 0.0;
  Tensor grad;  // (softmax - one_hot) / N
};
XentBatch softmax_xent(const Tensor& logits, std::span<const int> labels);

struct TrainConfig {
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.01;
  std::size_t batch_size = 128;
  int patience = 500;
  int max_epochs = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Coupled weight decay: g' = g + wd*theta; v <- mu*v + g'; theta <- theta - lr*v.
void sgd_step(ModelParams& params, const Gradients& grads, const TrainConfig& cfg);

struct ImageDataset {
  Tensor images;  // [N, C, H, W]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

Tensor gather(const Tensor& images, std::span<const std::size_t> rows);

std::vector<int> predict(const NetworkSpec& spec, const ModelParams& params, const Tensor& images,
                         std::size_t batch_size = 256);

struct NetTrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

// Seeded per-epoch shuffling, early stopping on validation loss, best
// parameters restored. The train loss in the log is the mean mini-batch loss
// of the epoch in training mode.
NetTrainResult train(const NetworkSpec& spec, ModelParams params, const ImageDataset& train_set,
                     const ImageDataset& val_set, const TrainConfig& cfg);

struct TransferResult {
  NetworkSpec spec;
  ModelParams params;
};

// Copies the convolutional prefix of `target` from `source` verbatim and
// draws a fresh head from `seed`. Throws DataError listing any prefix tensor
// that is missing or has the wrong shape.
TransferResult replace_head(const ModelParams& source, std::uint64_t seed,
                            const NetworkSpec& target = NetworkSpec::full());

void set_prefix_frozen(ModelParams& params, const NetworkSpec& spec, bool frozen);

}  // namespace ssvep
