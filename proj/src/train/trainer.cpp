// Copyright 2026 The lvx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

#include "lvx/error.hpp"
#include "lvx/eval.hpp"
#include "lvx/rng.hpp"
#include "lvx/train.hpp"
#include "tensor/conv_loops.hpp"

namespace lvx {
namespace {

constexpr double kBnEpsilon = 1e-3;
constexpr double kBnMomentum = 0.9;

template <class T>
auto kernel_ops() {
  if constexpr (std::is_same_v<T, float>)
    return detail::FloatOps{&simd::active()};
  else
    return detail::DoubleOps{};
}

}  // namespace

template <class T>
struct TrainableFomo<T>::Impl {
  struct Unit {
    std::vector<T> w;
    std::vector<T> b;  // head only
    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    bool batch_norm = false;
  };

  struct Cache {
    std::vector<std::vector<T>> acts;
    std::vector<std::vector<T>> xhat;
    std::vector<std::vector<T>> inv_std;
    std::vector<std::vector<double>> batch_mean;
    std::vector<std::vector<double>> batch_var;
  };

  ModelConfig config;
  std::vector<Layer> topology;  // parameters stripped
  std::vector<Shape> shapes;    // per activation, batch 1
  std::vector<Unit> units;

  explicit Impl(const FomoModel& model) : config(model.config) {
    if (model.format != ModelFormat::f32) throw ConfigError("only f32 models can be trained");
    model.validate();
    shapes = model.activation_shapes();
    for (const Layer& l : model.layers) {
      Layer t = l;
      t.weights.clear();
      t.bias.clear();
      topology.push_back(std::move(t));
      Unit u;
      if (l.has_weights()) {
        u.w.assign(l.weights.begin(), l.weights.end());
        const auto c = static_cast<std::size_t>(l.cout);
        if (l.kind == LayerKind::head) {
          u.b.assign(l.bias.begin(), l.bias.end());
        } else {
          u.batch_norm = true;
          u.gamma.assign(c, T(1));
          u.beta.assign(c, T(0));
          u.running_mean.assign(c, 0.0);
          u.running_var.assign(c, 1.0);
        }
      }
      units.push_back(std::move(u));
    }
  }

  detail::ConvDims dims(std::size_t i, int batch) const {
    const Layer& l = topology[i];
    detail::ConvDims d;
    d.in = shapes[i];
    d.in.n = batch;
    d.kh = l.kh;
    d.kw = l.kw;
    d.cout = l.cout;
    d.stride = l.stride;
    d.geo = conv_geometry(d.in.h, d.in.w, l.kh, l.kw, l.stride, l.padding);
    return d;
  }

  std::size_t act_size(std::size_t i, int batch) const { return shapes[i].size() * batch; }

  T forward(std::span<const Tensor> images, std::span<const TargetGrid> targets,
            double background_weight, Cache& cache, std::vector<T>* dlogits) const {
    const int batch = static_cast<int>(images.size());
    if (batch == 0) throw ConfigError("batch must not be empty");
    if (targets.size() != images.size()) throw ShapeError("images and targets differ in count");
    const auto ops = kernel_ops<T>();
    const std::size_t L = topology.size();
    cache.acts.assign(L + 1, {});
    cache.xhat.assign(L, {});
    cache.inv_std.assign(L, {});
    cache.batch_mean.assign(L, {});
    cache.batch_var.assign(L, {});

    auto& x0 = cache.acts[0];
    x0.reserve(act_size(0, batch));
    for (const Tensor& img : images) {
      if (img.shape() != shapes[0])
        throw ShapeError("training image " + img.shape().str() + " does not match model input " +
                         shapes[0].str());
      x0.insert(x0.end(), img.values().begin(), img.values().end());
    }

    for (std::size_t i = 0; i < L; ++i) {
      const Layer& l = topology[i];
      const Unit& u = units[i];
      const auto& in = cache.acts[i];
      auto& out = cache.acts[i + 1];
      out.assign(act_size(i + 1, batch), T(0));
      switch (l.kind) {
        case LayerKind::relu6:
          for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::clamp(in[j], T(0), T(6));
          break;
        case LayerKind::residual_add: {
          const auto& skip = cache.acts[static_cast<std::size_t>(l.skip_source)];
          for (std::size_t j = 0; j < out.size(); ++j) out[j] = in[j] + skip[j];
          break;
        }
        default: {
          const auto d = dims(i, batch);
          const T* bias = l.kind == LayerKind::head ? u.b.data() : nullptr;
          if (l.kind == LayerKind::depthwise)
            detail::depthwise_forward(in.data(), u.w.data(), bias, out.data(), d, ops);
          else
            detail::conv_forward(in.data(), u.w.data(), bias, out.data(), d, ops);
          if (u.batch_norm) normalize(i, out, cache);
        }
      }
    }
    return loss(cache.acts[L], targets, background_weight, batch, dlogits);
  }

  void normalize(std::size_t i, std::vector<T>& z, Cache& cache) const {
    const Unit& u = units[i];
    const auto c = static_cast<std::size_t>(topology[i].cout);
    const std::size_t m = z.size() / c;
    std::vector<double> mean(c, 0.0), var(c, 0.0);
    for (std::size_t j = 0; j < z.size(); ++j) mean[j % c] += z[j];
    for (auto& v : mean) v /= static_cast<double>(m);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double dz = z[j] - mean[j % c];
      var[j % c] += dz * dz;
    }
    for (auto& v : var) v /= static_cast<double>(m);
    auto& inv = cache.inv_std[i];
    inv.resize(c);
    for (std::size_t k = 0; k < c; ++k) inv[k] = static_cast<T>(1.0 / std::sqrt(var[k] + kBnEpsilon));
    auto& xh = cache.xhat[i];
    xh.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      const std::size_t k = j % c;
      xh[j] = static_cast<T>((z[j] - mean[k]) * inv[k]);
      z[j] = u.gamma[k] * xh[j] + u.beta[k];
    }
    cache.batch_mean[i] = std::move(mean);
    cache.batch_var[i] = std::move(var);
  }

  T loss(const std::vector<T>& logits, std::span<const TargetGrid> targets, double bg_weight,
         int batch, std::vector<T>* dlogits) const {
    const Shape& s = shapes.back();
    const auto k = static_cast<std::size_t>(s.c);
    const std::size_t cells = static_cast<std::size_t>(s.h) * s.w;
    const double norm = 1.0 / static_cast<double>(cells * batch);
    if (dlogits) dlogits->assign(logits.size(), T(0));
    double total = 0.0;
    std::vector<double> p(k);
    for (int n = 0; n < batch; ++n) {
      const TargetGrid& tg = targets[static_cast<std::size_t>(n)];
      if (tg.cells.size() != cells) throw ShapeError("target grid does not match model grid");
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t off = (n * cells + cell) * k;
        const int t = tg.cells[cell];
        if (t < 0 || static_cast<std::size_t>(t) >= k) throw ShapeError("target label out of range");
        double zmax = logits[off];
        for (std::size_t j = 1; j < k; ++j) zmax = std::max<double>(zmax, logits[off + j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += (p[j] = std::exp(logits[off + j] - zmax));
        const double w = t == 0 ? bg_weight : 1.0;
        total += w * (std::log(sum) - (logits[off + t] - zmax));
        if (dlogits) {
          for (std::size_t j = 0; j < k; ++j) {
            const double g = p[j] / sum - (static_cast<int>(j) == t ? 1.0 : 0.0);
            (*dlogits)[off + j] = static_cast<T>(w * norm * g);
          }
        }
      }
    }
    return static_cast<T>(total * norm);
  }

  void backward(Cache& cache, std::vector<T> dlogits, std::vector<std::vector<T>>& grads,
                int batch) const {
    const auto ops = kernel_ops<T>();
    const std::size_t L = topology.size();
    std::vector<std::vector<T>> dacts(L + 1);
    dacts[L] = std::move(dlogits);
    for (std::size_t i = 1; i < L; ++i) dacts[i].assign(cache.acts[i].size(), T(0));

    std::vector<std::size_t> slot(L);
    std::size_t next = 0;
    for (std::size_t i = 0; i < L; ++i) {
      slot[i] = next;
      if (topology[i].has_weights()) next += 2;
    }

    for (std::size_t ii = L; ii-- > 0;) {
      const Layer& l = topology[ii];
      const Unit& u = units[ii];
      std::vector<T>& dy = dacts[ii + 1];
      T* dx = ii > 0 ? dacts[ii].data() : nullptr;
      switch (l.kind) {
        case LayerKind::relu6: {
          const auto& x = cache.acts[ii];
          if (dx)
            for (std::size_t j = 0; j < dy.size(); ++j)
              if (x[j] > T(0) && x[j] < T(6)) dx[j] += dy[j];
          break;
        }
        case LayerKind::residual_add: {
          if (dx)
            for (std::size_t j = 0; j < dy.size(); ++j) dx[j] += dy[j];
          const auto src = static_cast<std::size_t>(l.skip_source);
          if (src > 0) {
            auto& ds = dacts[src];
            for (std::size_t j = 0; j < dy.size(); ++j) ds[j] += dy[j];
          }
          break;
        }
        default: {
          auto& gw = grads[slot[ii]];
          auto& gb = grads[slot[ii] + 1];
          const auto c = static_cast<std::size_t>(l.cout);
          if (u.batch_norm) {
            const auto& xh = cache.xhat[ii];
            const auto& inv = cache.inv_std[ii];
            const std::size_t m = dy.size() / c;
            std::vector<double> sum_dy(c, 0.0), sum_dy_xh(c, 0.0);
            for (std::size_t j = 0; j < dy.size(); ++j) {
              sum_dy[j % c] += dy[j];
              sum_dy_xh[j % c] += static_cast<double>(dy[j]) * xh[j];
            }
            // gb holds [gamma, beta] for batch-normalized units.
            for (std::size_t k = 0; k < c; ++k) {
              gb[k] = static_cast<T>(sum_dy_xh[k]);
              gb[c + k] = static_cast<T>(sum_dy[k]);
            }
            for (std::size_t j = 0; j < dy.size(); ++j) {
              const std::size_t k = j % c;
              const double scale = static_cast<double>(u.gamma[k]) * inv[k] / static_cast<double>(m);
              dy[j] = static_cast<T>(scale * (static_cast<double>(m) * dy[j] - sum_dy[k] -
                                              xh[j] * sum_dy_xh[k]));
            }
          } else {
            for (std::size_t j = 0; j < dy.size(); ++j) gb[j % c] += dy[j];
          }
          const auto d = dims(ii, batch);
          if (l.kind == LayerKind::depthwise)
            detail::depthwise_backward(cache.acts[ii].data(), u.w.data(), dy.data(), dx, gw.data(), d,
                                       ops);
          else
            detail::conv_backward(cache.acts[ii].data(), u.w.data(), dy.data(), dx, gw.data(), d, ops);
        }
      }
    }
  }

  std::vector<std::vector<T>> zero_grads() const {
    std::vector<std::vector<T>> g;
    for (const Unit& u : units) {
      if (u.w.empty()) continue;
      g.emplace_back(u.w.size(), T(0));
      g.emplace_back(u.batch_norm ? u.gamma.size() * 2 : u.b.size(), T(0));
    }
    return g;
  }
};

template <class T>
TrainableFomo<T>::TrainableFomo(const FomoModel& model) : impl_(std::make_unique<Impl>(model)) {}

template <class T>
TrainableFomo<T>::~TrainableFomo() = default;

template <class T>
TrainableFomo<T>::TrainableFomo(TrainableFomo&&) noexcept = default;

template <class T>
TrainableFomo<T>& TrainableFomo<T>::operator=(TrainableFomo&&) noexcept = default;

template <class T>
std::vector<ParamView<T>> TrainableFomo<T>::parameters() {
  std::vector<ParamView<T>> out;
  for (std::size_t i = 0; i < impl_->units.size(); ++i) {
    auto& u = impl_->units[i];
    if (u.w.empty()) continue;
    const std::string& name = impl_->topology[i].name;
    out.push_back({name + ".weights", u.w});
    if (u.batch_norm) {
      out.push_back({name + ".gamma", u.gamma});
      out.push_back({name + ".beta", u.beta});
    } else {
      out.push_back({name + ".bias", u.b});
    }
  }
  return out;
}

template <class T>
T TrainableFomo<T>::loss(std::span<const Tensor> images, std::span<const TargetGrid> targets,
                         double background_weight) const {
  typename Impl::Cache cache;
  return impl_->forward(images, targets, background_weight, cache, nullptr);
}

template <class T>
T TrainableFomo<T>::loss_and_gradients(std::span<const Tensor> images,
                                       std::span<const TargetGrid> targets,
                                       double background_weight,
                                       std::vector<std::vector<T>>& grads,
                                       bool update_running_stats) {
  typename Impl::Cache cache;
  std::vector<T> dlogits;
  const T value = impl_->forward(images, targets, background_weight, cache, &dlogits);
  auto packed = impl_->zero_grads();
  impl_->backward(cache, std::move(dlogits), packed, static_cast<int>(images.size()));

  // Unpack [gamma | beta] slots to match parameters().
  grads.clear();
  std::size_t s = 0;
  for (const auto& u : impl_->units) {
    if (u.w.empty()) continue;
    grads.push_back(std::move(packed[s]));
    auto& second = packed[s + 1];
    if (u.batch_norm) {
      const std::size_t c = u.gamma.size();
      grads.emplace_back(second.begin(), second.begin() + static_cast<std::ptrdiff_t>(c));
      grads.emplace_back(second.begin() + static_cast<std::ptrdiff_t>(c), second.end());
    } else {
      grads.push_back(std::move(second));
    }
    s += 2;
  }

  if (update_running_stats) {
    for (std::size_t i = 0; i < impl_->units.size(); ++i) {
      auto& u = impl_->units[i];
      if (!u.batch_norm) continue;
      for (std::size_t k = 0; k < u.running_mean.size(); ++k) {
        u.running_mean[k] = kBnMomentum * u.running_mean[k] + (1 - kBnMomentum) * cache.batch_mean[i][k];
        u.running_var[k] = kBnMomentum * u.running_var[k] + (1 - kBnMomentum) * cache.batch_var[i][k];
      }
    }
  }
  return value;
}

template <class T>
FomoModel TrainableFomo<T>::export_model() const {
  FomoModel m;
  m.config = impl_->config;
  m.format = ModelFormat::f32;
  for (std::size_t i = 0; i < impl_->topology.size(); ++i) {
    Layer l = impl_->topology[i];
    const auto& u = impl_->units[i];
    if (l.has_weights()) {
      l.weights.assign(u.w.begin(), u.w.end());
      const auto c = static_cast<std::size_t>(l.cout);
      if (u.batch_norm) {
        l.bias.resize(c);
        std::vector<double> scale(c);
        for (std::size_t k = 0; k < c; ++k) {
          scale[k] = u.gamma[k] / std::sqrt(u.running_var[k] + kBnEpsilon);
          l.bias[k] = static_cast<float>(u.beta[k] - u.running_mean[k] * scale[k]);
        }
        // Output channel is the innermost weight axis for every layer kind.
        for (std::size_t j = 0; j < l.weights.size(); ++j)
          l.weights[j] = static_cast<float>(u.w[j] * scale[j % c]);
      } else {
        l.bias.assign(u.b.begin(), u.b.end());
      }
    }
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

template class TrainableFomo<float>;
template class TrainableFomo<double>;

std::vector<std::vector<float>> gradients(const FomoModel& model, std::span<const Tensor> images,
                                          std::span<const TargetGrid> targets,
                                          const TrainConfig& config) {
  TrainableFomo<float> net(model);
  std::vector<std::vector<float>> g;
  net.loss_and_gradients(images, targets, config.background_weight, g);
  return g;
}

namespace {

template <class V>
void shuffle(V& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
}

void flip_horizontal(Tensor& img, TargetGrid& target) {
  const Shape s = img.shape();
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w / 2; ++x)
      for (int c = 0; c < s.c; ++c) std::swap(img.at(0, y, x, c), img.at(0, y, s.w - 1 - x, c));
  for (int r = 0; r < target.grid_h; ++r) {
    auto row = target.cells.begin() + static_cast<std::ptrdiff_t>(r) * target.grid_w;
    std::reverse(row, row + target.grid_w);
  }
}

}  // namespace

TrainResult train(const FomoModel& model, const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  const int size = model.config.input_size;

  std::vector<TargetGrid> targets;
  for (const LabeledImage& item : dataset) {
    if (item.image.shape() != Shape{1, size, size, 3})
      throw ShapeError("image '" + item.id + "' is " + item.image.shape().str() + ", model expects " +
                       std::to_string(size) + "x" + std::to_string(size));
    targets.push_back(rasterize_targets(item.objects, size, model.config.cell_size));
  }

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  std::size_t n_val = 0;
  if (dataset.size() >= 2 && config.validation_fraction > 0.0)
    n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.validation_fraction * dataset.size())), 1,
        dataset.size() - 1);
  Dataset val;
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(dataset[order[i]]);
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  const Dataset& selection_set = val.empty() ? dataset : val;

  TrainableFomo<float> net(model);
  auto params = net.parameters();
  for (const Layer& l : model.layers) {
    if (!l.has_weights() || l.kind == LayerKind::head) continue;
    for (auto& p : params)
      if (p.name == l.name + ".weights")
        for (float& w : p.values) w *= static_cast<float>(config.bn_weight_scale);
  }
  std::vector<std::vector<double>> m1, m2;
  for (const auto& p : params) {
    m1.emplace_back(p.values.size(), 0.0);
    m2.emplace_back(p.values.size(), 0.0);
  }

  TrainResult result;
  double best_f1 = -1.0;
  long step = 0;
  std::vector<std::vector<float>> grads;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(train_idx, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<Tensor> images;
      std::vector<TargetGrid> batch_targets;
      for (std::size_t j = start; j < end; ++j) {
        images.push_back(dataset[train_idx[j]].image);
        batch_targets.push_back(targets[train_idx[j]]);
        if (config.horizontal_flip && rng.uniform() < 0.5)
          flip_horizontal(images.back(), batch_targets.back());
      }
      const float batch_loss =
          net.loss_and_gradients(images, batch_targets, config.background_weight, grads, true);
      epoch_loss += static_cast<double>(batch_loss) * static_cast<double>(end - start);

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto values = params[p].values;
        for (std::size_t j = 0; j < values.size(); ++j) {
          const double g = grads[p][j];
          m1[p][j] = config.beta1 * m1[p][j] + (1.0 - config.beta1) * g;
          m2[p][j] = config.beta2 * m2[p][j] + (1.0 - config.beta2) * g * g;
          const double update =
              config.learning_rate * (m1[p][j] / c1) / (std::sqrt(m2[p][j] / c2) + config.epsilon);
          values[j] = static_cast<float>(values[j] - update);
        }
      }
    }

    FomoModel snapshot = net.export_model();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_loss / static_cast<double>(train_idx.size());
    rec.val_f1 = evaluate(snapshot, selection_set, config.tau, config.tolerance_cells).macro_f1;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    // Ties go to the later epoch.
    if (rec.val_f1 >= best_f1) {
      best_f1 = rec.val_f1;
      result.best_epoch = epoch;
      result.model = std::move(snapshot);
    }
  }
  return result;
}

}  // namespace lvx
