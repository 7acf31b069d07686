#include "ssvep/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssvep/error.hpp"

namespace ssvep {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

std::string layer_label(const NetworkSpec& spec, std::size_t i) {
  return "layer " + std::to_string(i) + " (" + to_string(spec.layers[i].kind) + ")";
}

void conv_forward(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out) {
  const auto n_batch = in.dim(0), c_in = in.dim(1), h = in.dim(2), wd = in.dim(3);
  const auto c_out = w.dim(0);
  const auto plane = h * wd;
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double* dst = out.data.data() + (n * c_out + o) * plane;
      std::fill(dst, dst + plane, b.data[o]);
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* src = in.data.data() + (n * c_in + c) * plane;
        const double* k = w.data.data() + (o * c_in + c) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const std::size_t y0 = dy < 0 ? 1 : 0;
          const std::size_t y1 = dy > 0 ? h - 1 : h;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const double kv = k[ky * 3 + kx];
            const std::size_t x0 = dx < 0 ? 1 : 0;
            const std::size_t x1 = dx > 0 ? wd - 1 : wd;
            for (std::size_t y = y0; y < y1; ++y) {
              double* orow = dst + y * wd;
              const double* irow = src + (y + dy) * wd + dx;
              for (std::size_t x = x0; x < x1; ++x) orow[x] += kv * irow[x];
            }
          }
        }
      }
    }
  }
}

void conv_backward(const Tensor& in, const Tensor& w, const Tensor& gout, Tensor* gw, Tensor* gb,
                   Tensor& gin) {
  const auto n_batch = in.dim(0), c_in = in.dim(1), h = in.dim(2), wd = in.dim(3);
  const auto c_out = w.dim(0);
  const auto plane = h * wd;
  for (std::size_t n = 0; n < n_batch; ++n) {
    for (std::size_t o = 0; o < c_out; ++o) {
      const double* g = gout.data.data() + (n * c_out + o) * plane;
      if (gb) gb->data[o] += std::accumulate(g, g + plane, 0.0);
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* src = in.data.data() + (n * c_in + c) * plane;
        double* gsrc = gin.data.data() + (n * c_in + c) * plane;
        const double* k = w.data.data() + (o * c_in + c) * 9;
        double* gk = gw ? gw->data.data() + (o * c_in + c) * 9 : nullptr;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const std::size_t y0 = dy < 0 ? 1 : 0;
          const std::size_t y1 = dy > 0 ? h - 1 : h;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const double kv = k[ky * 3 + kx];
            const std::size_t x0 = dx < 0 ? 1 : 0;
            const std::size_t x1 = dx > 0 ? wd - 1 : wd;
            double acc = 0.0;
            for (std::size_t y = y0; y < y1; ++y) {
              const double* grow = g + y * wd;
              const double* irow = src + (y + dy) * wd + dx;
              double* girow = gsrc + (y + dy) * wd + dx;
              for (std::size_t x = x0; x < x1; ++x) {
                acc += grow[x] * irow[x];
                girow[x] += kv * grow[x];
              }
            }
            if (gk) gk[ky * 3 + kx] += acc;
          }
        }
      }
    }
  }
}

void dense_forward(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out) {
  const auto n_batch = in.dim(0), n_in = in.dim(1), n_out = w.dim(0);
  for (std::size_t n = 0; n < n_batch; ++n) {
    const double* x = in.data.data() + n * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* row = w.data.data() + o * n_in;
      out.data[n * n_out + o] = std::inner_product(row, row + n_in, x, b.data[o]);
    }
  }
}

void dense_backward(const Tensor& in, const Tensor& w, const Tensor& gout, Tensor* gw, Tensor* gb,
                    Tensor& gin) {
  const auto n_batch = in.dim(0), n_in = in.dim(1), n_out = w.dim(0);
  for (std::size_t n = 0; n < n_batch; ++n) {
    const double* x = in.data.data() + n * n_in;
    double* gx = gin.data.data() + n * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double g = gout.data[n * n_out + o];
      if (g == 0.0) continue;
      const double* row = w.data.data() + o * n_in;
      if (gb) gb->data[o] += g;
      if (gw) {
        double* grow = gw->data.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) grow[i] += g * x[i];
      }
      for (std::size_t i = 0; i < n_in; ++i) gx[i] += g * row[i];
    }
  }
}

Shape batch_shape(std::size_t n, const Shape& per_item) {
  Shape s{n};
  s.insert(s.end(), per_item.begin(), per_item.end());
  return s;
}

}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv3x3: return "conv3x3";
    case LayerKind::maxpool2x2: return "maxpool2x2";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
  }
  return "unknown";
}

NetworkSpec NetworkSpec::full() {
  using L = LayerSpec;
  return NetworkSpec{{L::conv(64), L::relu(), L::pool(),
                      L::conv(128), L::relu(), L::pool(),
                      L::conv(256), L::relu(), L::conv(256), L::relu(), L::pool(),
                      L::conv(512), L::relu(), L::conv(512), L::relu(), L::pool(),
                      L::flatten(), L::dropout(0.5), L::dense(512), L::relu(),
                      L::dropout(0.5), L::dense(2)},
                     1, 96, 64};
}

NetworkSpec NetworkSpec::vggish() {
  using L = LayerSpec;
  return NetworkSpec{{L::conv(64), L::relu(), L::pool(),
                      L::conv(128), L::relu(), L::pool(),
                      L::conv(256), L::relu(), L::conv(256), L::relu(), L::pool(),
                      L::conv(512), L::relu(), L::conv(512), L::relu(), L::pool(),
                      L::flatten(), L::dense(4096), L::relu(), L::dense(4096), L::relu(),
                      L::dense(128), L::relu()},
                     1, 96, 64};
}

NetworkSpec NetworkSpec::scaled() {
  using L = LayerSpec;
  return NetworkSpec{{L::conv(8), L::relu(), L::pool(),
                      L::conv(16), L::relu(), L::pool(),
                      L::conv(32), L::relu(), L::conv(32), L::relu(), L::pool(),
                      L::flatten(), L::dropout(0.5), L::dense(32), L::relu(),
                      L::dropout(0.5), L::dense(2)},
                     1, 24, 16};
}

NetworkSpec NetworkSpec::tiny(std::size_t rows, std::size_t cols) {
  using L = LayerSpec;
  return NetworkSpec{{L::conv(8), L::relu(), L::pool(), L::flatten(), L::dense(2)}, 1, rows, cols};
}

std::vector<Shape> NetworkSpec::output_shapes() const {
  std::vector<Shape> out;
  Shape cur{in_channels, in_rows, in_cols};
  if (in_channels == 0 || in_rows == 0 || in_cols == 0) {
    throw ConfigError("network input shape must be non-empty");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    switch (l.kind) {
      case LayerKind::conv3x3:
        if (cur.size() != 3) throw ConfigError(layer_label(*this, i) + " needs a [C,H,W] input");
        if (l.units == 0) throw ConfigError(layer_label(*this, i) + " has zero channels");
        cur = {l.units, cur[1], cur[2]};
        break;
      case LayerKind::maxpool2x2:
        if (cur.size() != 3 || cur[1] < 2 || cur[2] < 2) {
          throw ConfigError(layer_label(*this, i) + " needs a [C,H,W] input with H,W >= 2, got " +
                            shape_string(cur));
        }
        cur = {cur[0], cur[1] / 2, cur[2] / 2};
        break;
      case LayerKind::relu: break;
      case LayerKind::dropout:
        if (!(l.rate >= 0.0 && l.rate < 1.0)) {
          throw ConfigError(layer_label(*this, i) + " rate must be in [0, 1)");
        }
        break;
      case LayerKind::flatten: cur = {shape_size(cur)}; break;
      case LayerKind::dense:
        if (cur.size() != 1) {
          throw ConfigError(layer_label(*this, i) + " needs a flattened input, got " +
                            shape_string(cur));
        }
        if (l.units == 0) throw ConfigError(layer_label(*this, i) + " has zero units");
        cur = {l.units};
        break;
    }
    out.push_back(cur);
  }
  return out;
}

std::size_t NetworkSpec::n_classes() const {
  const auto shapes = output_shapes();
  if (shapes.empty() || shapes.back().size() != 1) {
    throw ConfigError("network must end in a flat layer");
  }
  return shapes.back()[0];
}

std::size_t NetworkSpec::prefix_length() const {
  std::size_t i = 0;
  while (i < layers.size() && layers[i].kind != LayerKind::flatten &&
         layers[i].kind != LayerKind::dense && layers[i].kind != LayerKind::dropout) {
    ++i;
  }
  return i;
}

std::optional<std::string> layer_param_prefix(const NetworkSpec& spec, std::size_t layer) {
  const auto kind = spec.layers.at(layer).kind;
  if (kind != LayerKind::conv3x3 && kind != LayerKind::dense) return std::nullopt;
  std::size_t ordinal = 0;
  for (std::size_t i = 0; i <= layer; ++i) ordinal += spec.layers[i].kind == kind;
  return std::string(kind == LayerKind::conv3x3 ? "conv" : "dense") + std::to_string(ordinal);
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("missing parameter tensor " + name);
  return it->second.value;
}

Tensor& ModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("missing parameter tensor " + name);
  return it->second.value;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : tensors) n += e.value.size();
  return n;
}

ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
  const auto shapes = spec.output_shapes();
  ModelParams params;
  Shape in_shape{spec.in_channels, spec.in_rows, spec.in_cols};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto prefix = layer_param_prefix(spec, i);
    if (prefix) {
      const auto& l = spec.layers[i];
      Shape wshape;
      std::size_t fan_in = 0;
      if (l.kind == LayerKind::conv3x3) {
        wshape = {l.units, in_shape[0], 3, 3};
        fan_in = in_shape[0] * 9;
      } else {
        wshape = {l.units, in_shape[0]};
        fan_in = in_shape[0];
      }
      const std::string wname = *prefix + ".weight";
      Tensor w(wshape);
      std::mt19937_64 rng(stream_seed(seed, wname));
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : w.data) v = static_cast<float>(dist(rng));
      params.tensors[wname] = ParamEntry{std::move(w), Tensor{}, false};
      params.tensors[*prefix + ".bias"] = ParamEntry{Tensor({l.units}), Tensor{}, false};
    }
    in_shape = shapes[i];
  }
  return params;
}

ForwardResult forward(const NetworkSpec& spec, const ModelParams& params, const Tensor& batch,
                      bool training, std::mt19937_64* rng, bool keep_cache) {
  const auto shapes = spec.output_shapes();
  if (batch.shape.size() != 4 || batch.dim(1) != spec.in_channels ||
      batch.dim(2) != spec.in_rows || batch.dim(3) != spec.in_cols) {
    throw DataError("input " + shape_string(batch.shape) + " does not match network input [N," +
                    std::to_string(spec.in_channels) + "," + std::to_string(spec.in_rows) + "," +
                    std::to_string(spec.in_cols) + "]");
  }
  const auto n_batch = batch.dim(0);
  ForwardResult result;
  if (keep_cache) {
    result.cache.emplace();
    result.cache->argmax.resize(spec.layers.size());
    result.cache->dropout_scale.resize(spec.layers.size());
  }

  Tensor cur = batch;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    Tensor next(batch_shape(n_batch, shapes[i]));
    switch (l.kind) {
      case LayerKind::conv3x3: {
        const auto prefix = *layer_param_prefix(spec, i);
        const auto& w = params.at(prefix + ".weight");
        if (w.shape != Shape{l.units, cur.dim(1), 3, 3}) {
          throw DataError(layer_label(spec, i) + ": weight shape " + shape_string(w.shape) +
                          " does not match the spec");
        }
        conv_forward(cur, w, params.at(prefix + ".bias"), next);
        break;
      }
      case LayerKind::dense: {
        const auto prefix = *layer_param_prefix(spec, i);
        const auto& w = params.at(prefix + ".weight");
        if (w.shape != Shape{l.units, cur.dim(1)}) {
          throw DataError(layer_label(spec, i) + ": weight shape " + shape_string(w.shape) +
                          " does not match the spec");
        }
        dense_forward(cur, w, params.at(prefix + ".bias"), next);
        break;
      }
      case LayerKind::maxpool2x2: {
        const auto c = cur.dim(1), h = cur.dim(2), wd = cur.dim(3);
        const auto ho = h / 2, wo = wd / 2;
        std::vector<std::uint32_t> arg(next.size());
        for (std::size_t n = 0; n < n_batch; ++n) {
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (n * c + ch) * h * wd;
            for (std::size_t y = 0; y < ho; ++y) {
              for (std::size_t x = 0; x < wo; ++x) {
                std::size_t best = base + 2 * y * wd + 2 * x;
                const std::size_t cand[3] = {best + 1, best + wd, best + wd + 1};
                for (auto j : cand) {
                  if (cur.data[j] > cur.data[best]) best = j;
                }
                const auto o = ((n * c + ch) * ho + y) * wo + x;
                next.data[o] = cur.data[best];
                arg[o] = static_cast<std::uint32_t>(best);
              }
            }
          }
        }
        if (keep_cache) result.cache->argmax[i] = std::move(arg);
        break;
      }
      case LayerKind::relu:
        for (std::size_t j = 0; j < cur.size(); ++j) next.data[j] = std::max(0.0, cur.data[j]);
        break;
      case LayerKind::dropout: {
        if (!training || l.rate == 0.0) {
          next.data = cur.data;
          break;
        }
        if (!rng) throw ConfigError(layer_label(spec, i) + ": training mode needs an rng");
        std::bernoulli_distribution keep(1.0 - l.rate);
        const double scale = 1.0 / (1.0 - l.rate);
        std::vector<double> mask(cur.size());
        for (std::size_t j = 0; j < cur.size(); ++j) {
          mask[j] = keep(*rng) ? scale : 0.0;
          next.data[j] = cur.data[j] * mask[j];
        }
        if (keep_cache) result.cache->dropout_scale[i] = std::move(mask);
        break;
      }
      case LayerKind::flatten: next.data = cur.data; break;
    }
    if (keep_cache) result.cache->inputs.push_back(std::move(cur));
    cur = std::move(next);
  }
  result.logits = std::move(cur);
  return result;
}

Gradients backward(const NetworkSpec& spec, const ModelParams& params,
                   const std::optional<ForwardCache>& cache, const Tensor& grad_logits) {
  if (!cache || cache->inputs.size() != spec.layers.size()) {
    throw DataError("backward needs the cache of a matching forward(keep_cache = true) call");
  }
  Gradients grads;
  Tensor g = grad_logits;
  for (std::size_t ii = spec.layers.size(); ii-- > 0;) {
    const auto& l = spec.layers[ii];
    const Tensor& in = cache->inputs[ii];
    if (shape_size(g.shape) != shape_size(in.shape) && l.kind != LayerKind::conv3x3 &&
        l.kind != LayerKind::dense && l.kind != LayerKind::maxpool2x2) {
      throw DataError(layer_label(spec, ii) + ": upstream gradient has the wrong size");
    }
    Tensor gin(in.shape);
    switch (l.kind) {
      case LayerKind::conv3x3:
      case LayerKind::dense: {
        const auto prefix = *layer_param_prefix(spec, ii);
        const auto& wentry = params.tensors.at(prefix + ".weight");
        const auto& bentry = params.tensors.at(prefix + ".bias");
        Tensor gw(wentry.value.shape), gb(bentry.value.shape);
        Tensor* gwp = wentry.frozen ? nullptr : &gw;
        Tensor* gbp = bentry.frozen ? nullptr : &gb;
        if (l.kind == LayerKind::conv3x3) {
          conv_backward(in, wentry.value, g, gwp, gbp, gin);
        } else {
          dense_backward(in, wentry.value, g, gwp, gbp, gin);
        }
        if (gwp) grads.params[prefix + ".weight"] = std::move(gw);
        if (gbp) grads.params[prefix + ".bias"] = std::move(gb);
        break;
      }
      case LayerKind::maxpool2x2: {
        const auto& arg = cache->argmax[ii];
        for (std::size_t j = 0; j < arg.size(); ++j) gin.data[arg[j]] += g.data[j];
        break;
      }
      case LayerKind::relu:
        for (std::size_t j = 0; j < in.size(); ++j) gin.data[j] = in.data[j] > 0.0 ? g.data[j] : 0.0;
        break;
      case LayerKind::dropout: {
        const auto& mask = cache->dropout_scale[ii];
        if (mask.empty()) {
          gin.data = g.data;
        } else {
          for (std::size_t j = 0; j < in.size(); ++j) gin.data[j] = g.data[j] * mask[j];
        }
        break;
      }
      case LayerKind::flatten: gin.data = g.data; break;
    }
    g = std::move(gin);
  }
  grads.input = std::move(g);
  return grads;
}

double loss_xent(std::span<const double> logits, int cls) {
  if (logits.empty() || cls < 0 || static_cast<std::size_t>(cls) >= logits.size()) {
    throw DataError("class index out of range for logits");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - m);
  return m + std::log(sum) - logits[static_cast<std::size_t>(cls)];
}

XentBatch softmax_xent(const Tensor& logits, std::span<const int> labels) {
  if (logits.shape.size() != 2 || logits.dim(0) != labels.size()) {
    throw DataError("logits " + shape_string(logits.shape) + " do not match " +
                    std::to_string(labels.size()) + " labels");
  }
  const auto n = logits.dim(0), k = logits.dim(1);
  XentBatch out{0.0, Tensor(logits.shape)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> row(logits.data.data() + i * k, k);
    out.mean_loss += loss_xent(row, labels[i]);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - m) / sum;
      out.grad.data[i * k + j] =
          (p - (static_cast<int>(j) == labels[i] ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.mean_loss /= static_cast<double>(n);
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 0 || patience > max_epochs) {
    throw ConfigError("patience must be in [0, max_epochs]");
  }
}

void sgd_step(ModelParams& params, const Gradients& grads, const TrainConfig& cfg) {
  for (const auto& [name, g] : grads.params) {
    auto it = params.tensors.find(name);
    if (it == params.tensors.end()) throw DataError("gradient for unknown tensor " + name);
    auto& e = it->second;
    if (e.frozen) continue;
    if (g.shape != e.value.shape) throw DataError("gradient shape mismatch for " + name);
    if (e.velocity.shape != e.value.shape) e.velocity = Tensor(e.value.shape);
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double step = g.data[j] + cfg.weight_decay * e.value.data[j];
      e.velocity.data[j] = cfg.momentum * e.velocity.data[j] + step;
      e.value.data[j] -= cfg.lr * e.velocity.data[j];
    }
  }
}

Tensor gather(const Tensor& images, std::span<const std::size_t> rows) {
  Shape s = images.shape;
  const auto per = shape_size(Shape(s.begin() + 1, s.end()));
  s[0] = rows.size();
  Tensor out(s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(images.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * per), per,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return out;
}

namespace {

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const NetworkSpec& spec, const ModelParams& params, const ImageDataset& data,
                    std::size_t batch_size) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const auto len = std::min(batch_size, idx.size() - start);
    const auto rows = std::span<const std::size_t>(idx).subspan(start, len);
    const auto logits = forward(spec, params, gather(data.images, rows), false).logits;
    const std::span<const int> labels(data.labels.data() + start, len);
    loss += softmax_xent(logits, labels).mean_loss * static_cast<double>(len);
    const auto k = logits.dim(1);
    for (std::size_t i = 0; i < len; ++i) {
      const auto* row = logits.data.data() + i * k;
      const auto pred = std::max_element(row, row + k) - row;
      correct += pred == labels[i];
    }
  }
  return {loss / static_cast<double>(data.size()),
          static_cast<double>(correct) / static_cast<double>(data.size())};
}

void check_dataset(const NetworkSpec& spec, const ImageDataset& d, const char* name) {
  if (d.size() == 0) throw DataError(std::string(name) + " set is empty");
  if (d.images.shape.size() != 4 || d.images.dim(0) != d.size()) {
    throw DataError(std::string(name) + " images must be [N,C,H,W] with one label per image");
  }
  const auto k = static_cast<int>(spec.n_classes());
  for (int y : d.labels) {
    if (y < 0 || y >= k) throw DataError(std::string(name) + " label out of range");
  }
}

}  // namespace

std::vector<int> predict(const NetworkSpec& spec, const ModelParams& params, const Tensor& images,
                         std::size_t batch_size) {
  const auto n = images.dim(0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const auto len = std::min(batch_size, n - start);
    const auto logits =
        forward(spec, params, gather(images, std::span<const std::size_t>(idx).subspan(start, len)),
                false)
            .logits;
    const auto k = logits.dim(1);
    for (std::size_t i = 0; i < len; ++i) {
      const auto* row = logits.data.data() + i * k;
      out.push_back(static_cast<int>(std::max_element(row, row + k) - row));
    }
  }
  return out;
}

NetTrainResult train(const NetworkSpec& spec, ModelParams params, const ImageDataset& train_set,
                     const ImageDataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  check_dataset(spec, train_set, "training");
  check_dataset(spec, val_set, "validation");
  std::vector<bool> seen(spec.n_classes(), false);
  for (int y : train_set.labels) seen[static_cast<std::size_t>(y)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw DataError("training data contains a single class");
  }
  const bool trainable = std::any_of(params.tensors.begin(), params.tensors.end(),
                                     [](const auto& kv) { return !kv.second.frozen; });

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  EarlyStopping stopper(cfg.patience);
  NetTrainResult result;
  result.params = params;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, order.size() - start);
      const auto rows = std::span<const std::size_t>(order).subspan(start, len);
      std::vector<int> labels(len);
      for (std::size_t i = 0; i < len; ++i) labels[i] = train_set.labels[rows[i]];
      auto fwd = forward(spec, params, gather(train_set.images, rows), true, &rng, trainable);
      const auto xent = softmax_xent(fwd.logits, labels);
      epoch_loss += xent.mean_loss * static_cast<double>(len);
      if (trainable) sgd_step(params, backward(spec, params, fwd.cache, xent.grad), cfg);
    }
    epoch_loss /= static_cast<double>(order.size());
    const auto val = evaluate(spec, params, val_set, std::max<std::size_t>(cfg.batch_size, 256));
    if (!std::isfinite(epoch_loss) || !std::isfinite(val.loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    result.log.push_back(EpochLog{epoch, epoch_loss, val.loss, val.accuracy});
    if (stopper.update(epoch, val.loss)) {
      result.params = params;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

TransferResult replace_head(const ModelParams& source, std::uint64_t seed,
                            const NetworkSpec& target) {
  TransferResult out{target, init_params(target, seed)};
  const auto prefix_len = target.prefix_length();
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < prefix_len; ++i) {
    const auto prefix = layer_param_prefix(target, i);
    if (!prefix) continue;
    for (const char* suffix : {".weight", ".bias"}) {
      const std::string name = *prefix + suffix;
      auto it = source.tensors.find(name);
      auto& dst = out.params.tensors.at(name);
      if (it == source.tensors.end()) {
        problems.push_back(name + " (missing)");
      } else if (it->second.value.shape != dst.value.shape) {
        problems.push_back(name + " (shape " + shape_string(it->second.value.shape) +
                           ", expected " + shape_string(dst.value.shape) + ")");
      } else {
        dst.value = it->second.value;
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "source parameters do not cover the convolutional prefix:";
    for (const auto& p : problems) msg += " " + p;
    throw DataError(msg);
  }
  return out;
}

void set_prefix_frozen(ModelParams& params, const NetworkSpec& spec, bool frozen) {
  const auto prefix_len = spec.prefix_length();
  for (std::size_t i = 0; i < prefix_len; ++i) {
    const auto prefix = layer_param_prefix(spec, i);
    if (!prefix) continue;
    params.tensors.at(*prefix + ".weight").frozen = frozen;
    params.tensors.at(*prefix + ".bias").frozen = frozen;
  }
}

}  // namespace ssvep
