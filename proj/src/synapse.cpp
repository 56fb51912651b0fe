#include "spikegrad/synapse.hpp"

#include <string>

#include "spikegrad/parallel.hpp"

namespace spikegrad {
namespace {

using idx = std::ptrdiff_t;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void check_dense(const Tensor& w, const SpikeTensor& x) {
  require(w.shape().size() == 2, "dense: weights must be 2-D, got " + to_string(w.shape()));
  require(w.shape()[1] == x.units(), "dense: weights " + to_string(w.shape()) + " vs " +
                                         std::to_string(x.units()) + " input units");
}

void check_conv(const Tensor& w, const SpikeTensor& x, const Shape3& in) {
  require(w.shape().size() == 4, "conv: weights must be 4-D, got " + to_string(w.shape()));
  require(w.shape()[1] == in.channels, "conv: weight channels do not match input");
  require(w.shape()[2] == w.shape()[3] && w.shape()[2] % 2 == 1, "conv: kernel must be square and odd");
  require(x.units() == in.count(), "conv: input has " + std::to_string(x.units()) +
                                       " units, expected " + std::to_string(in.count()));
}

}  // namespace

SpikeTensor dense_forward(const Tensor& weights, const SpikeTensor& x) {
  check_dense(weights, x);
  const idx outs = static_cast<idx>(weights.shape()[0]);
  const std::size_t ins = weights.shape()[1];
  const std::size_t steps = x.steps();
  SpikeTensor y({weights.shape()[0]}, steps);
  const double* w = weights.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(outs * static_cast<idx>(ins * steps)))
  for (idx o = 0; o < outs; ++o) {
    auto out = y.row(static_cast<std::size_t>(o));
    const double* wrow = w + static_cast<std::size_t>(o) * ins;
    for (std::size_t i = 0; i < ins; ++i) {
      const double wi = wrow[i];
      if (wi == 0.0) continue;
      const auto in = x.row(i);
      for (std::size_t t = 0; t < steps; ++t) out[t] += wi * in[t];
    }
  }
  return y;
}

Tensor dense_weight_grad(const SpikeTensor& e, const SpikeTensor& x) {
  require(e.steps() == x.steps(), "dense_weight_grad: time axis mismatch");
  const idx outs = static_cast<idx>(e.units());
  const std::size_t ins = x.units();
  const std::size_t steps = x.steps();
  Tensor g({e.units(), ins});
  double* gd = g.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(outs * static_cast<idx>(ins * steps)))
  for (idx o = 0; o < outs; ++o) {
    const auto er = e.row(static_cast<std::size_t>(o));
    double* grow = gd + static_cast<std::size_t>(o) * ins;
    for (std::size_t i = 0; i < ins; ++i) {
      const auto xr = x.row(i);
      double acc = 0.0;
      for (std::size_t t = 0; t < steps; ++t) acc += er[t] * xr[t];
      grow[i] = acc;
    }
  }
  return g;
}

SpikeTensor dense_transpose(const Tensor& weights, const SpikeTensor& e, const Shape& input_shape) {
  require(weights.shape().size() == 2 && weights.shape()[0] == e.units(),
          "dense_transpose: weights " + to_string(weights.shape()) + " vs " +
              std::to_string(e.units()) + " output units");
  require(element_count(input_shape) == weights.shape()[1], "dense_transpose: input shape mismatch");
  const std::size_t outs = weights.shape()[0];
  const idx ins = static_cast<idx>(weights.shape()[1]);
  const std::size_t steps = e.steps();
  SpikeTensor h(input_shape, steps);
  const double* w = weights.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(ins * static_cast<idx>(outs * steps)))
  for (idx i = 0; i < ins; ++i) {
    auto hr = h.row(static_cast<std::size_t>(i));
    for (std::size_t o = 0; o < outs; ++o) {
      const double wo = w[o * static_cast<std::size_t>(ins) + static_cast<std::size_t>(i)];
      if (wo == 0.0) continue;
      const auto er = e.row(o);
      for (std::size_t t = 0; t < steps; ++t) hr[t] += wo * er[t];
    }
  }
  return h;
}

SpikeTensor conv_forward(const Tensor& weights, const SpikeTensor& x, const Shape3& in) {
  check_conv(weights, x, in);
  const idx K = static_cast<idx>(weights.shape()[0]);
  const std::size_t C = in.channels, H = in.height, W = in.width;
  const std::size_t k = weights.shape()[2];
  const idx pad = static_cast<idx>(k / 2);
  const std::size_t steps = x.steps();
  SpikeTensor y({weights.shape()[0], H, W}, steps);
  const double* w = weights.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(K * static_cast<idx>(C * k * k * H * W * steps)))
  for (idx kk = 0; kk < K; ++kk) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t dy = 0; dy < k; ++dy) {
        for (std::size_t dx = 0; dx < k; ++dx) {
          const double wv = w[((static_cast<std::size_t>(kk) * C + c) * k + dy) * k + dx];
          if (wv == 0.0) continue;
          for (std::size_t oy = 0; oy < H; ++oy) {
            const idx iy = static_cast<idx>(oy + dy) - pad;
            if (iy < 0 || iy >= static_cast<idx>(H)) continue;
            for (std::size_t ox = 0; ox < W; ++ox) {
              const idx ix = static_cast<idx>(ox + dx) - pad;
              if (ix < 0 || ix >= static_cast<idx>(W)) continue;
              const auto src = x.row((c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix));
              auto dst = y.row((static_cast<std::size_t>(kk) * H + oy) * W + ox);
              for (std::size_t t = 0; t < steps; ++t) dst[t] += wv * src[t];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor conv_weight_grad(const SpikeTensor& e, const SpikeTensor& x, const Shape3& in,
                        std::size_t kernel) {
  require(x.units() == in.count(), "conv_weight_grad: input shape mismatch");
  require(e.steps() == x.steps(), "conv_weight_grad: time axis mismatch");
  require(e.units() % (in.height * in.width) == 0, "conv_weight_grad: output shape mismatch");
  const std::size_t C = in.channels, H = in.height, W = in.width, k = kernel;
  const idx K = static_cast<idx>(e.units() / (H * W));
  const idx pad = static_cast<idx>(k / 2);
  const std::size_t steps = x.steps();
  Tensor g({static_cast<std::size_t>(K), C, k, k});
  double* gd = g.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(K * static_cast<idx>(C * k * k * H * W * steps)))
  for (idx kk = 0; kk < K; ++kk) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t dy = 0; dy < k; ++dy) {
        for (std::size_t dx = 0; dx < k; ++dx) {
          double acc = 0.0;
          for (std::size_t oy = 0; oy < H; ++oy) {
            const idx iy = static_cast<idx>(oy + dy) - pad;
            if (iy < 0 || iy >= static_cast<idx>(H)) continue;
            for (std::size_t ox = 0; ox < W; ++ox) {
              const idx ix = static_cast<idx>(ox + dx) - pad;
              if (ix < 0 || ix >= static_cast<idx>(W)) continue;
              const auto er = e.row((static_cast<std::size_t>(kk) * H + oy) * W + ox);
              const auto xr = x.row((c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix));
              for (std::size_t t = 0; t < steps; ++t) acc += er[t] * xr[t];
            }
          }
          gd[((static_cast<std::size_t>(kk) * C + c) * k + dy) * k + dx] = acc;
        }
      }
    }
  }
  return g;
}

SpikeTensor conv_transpose(const Tensor& weights, const SpikeTensor& e, const Shape3& in) {
  require(weights.shape().size() == 4 && weights.shape()[1] == in.channels,
          "conv_transpose: weight shape mismatch");
  const std::size_t K = weights.shape()[0];
  require(e.units() == K * in.height * in.width, "conv_transpose: output shape mismatch");
  const idx C = static_cast<idx>(in.channels);
  const std::size_t H = in.height, W = in.width, k = weights.shape()[2];
  const idx pad = static_cast<idx>(k / 2);
  const std::size_t steps = e.steps();
  SpikeTensor h(in.as_shape(), steps);
  const double* w = weights.data().data();

#pragma omp parallel for schedule(static) if (parallel::worth_it(C * static_cast<idx>(K * k * k * H * W * steps)))
  for (idx c = 0; c < C; ++c) {
    for (std::size_t kk = 0; kk < K; ++kk) {
      for (std::size_t dy = 0; dy < k; ++dy) {
        for (std::size_t dx = 0; dx < k; ++dx) {
          const double wv = w[((kk * static_cast<std::size_t>(C) + static_cast<std::size_t>(c)) * k + dy) * k + dx];
          if (wv == 0.0) continue;
          for (std::size_t iy = 0; iy < H; ++iy) {
            const idx oy = static_cast<idx>(iy) - static_cast<idx>(dy) + pad;
            if (oy < 0 || oy >= static_cast<idx>(H)) continue;
            for (std::size_t ix = 0; ix < W; ++ix) {
              const idx ox = static_cast<idx>(ix) - static_cast<idx>(dx) + pad;
              if (ox < 0 || ox >= static_cast<idx>(W)) continue;
              const auto er = e.row((kk * H + static_cast<std::size_t>(oy)) * W + static_cast<std::size_t>(ox));
              auto dst = h.row((static_cast<std::size_t>(c) * H + iy) * W + ix);
              for (std::size_t t = 0; t < steps; ++t) dst[t] += wv * er[t];
            }
          }
        }
      }
    }
  }
  return h;
}

SpikeTensor pool_forward(std::size_t n, double weight, const SpikeTensor& x, const Shape3& in) {
  require(n >= 1, "pool: size must be at least 1");
  require(x.units() == in.count(), "pool: input shape mismatch");
  const std::size_t C = in.channels, H = in.height, W = in.width;
  const std::size_t OH = H / n, OW = W / n;
  require(OH >= 1 && OW >= 1, "pool: window larger than input");
  const std::size_t steps = x.steps();
  SpikeTensor y({C, OH, OW}, steps);
  const idx outs = static_cast<idx>(C * OH * OW);

#pragma omp parallel for schedule(static) if (parallel::worth_it(outs * static_cast<idx>(n * n * steps)))
  for (idx o = 0; o < outs; ++o) {
    const std::size_t c = static_cast<std::size_t>(o) / (OH * OW);
    const std::size_t oy = (static_cast<std::size_t>(o) / OW) % OH;
    const std::size_t ox = static_cast<std::size_t>(o) % OW;
    auto dst = y.row(static_cast<std::size_t>(o));
    for (std::size_t dy = 0; dy < n; ++dy) {
      for (std::size_t dx = 0; dx < n; ++dx) {
        const auto src = x.row((c * H + oy * n + dy) * W + ox * n + dx);
        for (std::size_t t = 0; t < steps; ++t) dst[t] += src[t];
      }
    }
    for (std::size_t t = 0; t < steps; ++t) dst[t] *= weight;
  }
  return y;
}

SpikeTensor pool_transpose(std::size_t n, double weight, const SpikeTensor& e, const Shape3& in) {
  const std::size_t C = in.channels, H = in.height, W = in.width;
  const std::size_t OH = H / n, OW = W / n;
  require(e.units() == C * OH * OW, "pool_transpose: output shape mismatch");
  const std::size_t steps = e.steps();
  SpikeTensor h(in.as_shape(), steps);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t iy = 0; iy < OH * n; ++iy) {
      for (std::size_t ix = 0; ix < OW * n; ++ix) {
        const auto er = e.row((c * OH + iy / n) * OW + ix / n);
        auto dst = h.row((c * H + iy) * W + ix);
        for (std::size_t t = 0; t < steps; ++t) dst[t] = weight * er[t];
      }
    }
  }
  return h;
}

namespace reference {

SpikeTensor dense_forward(const Tensor& weights, const SpikeTensor& x) {
  check_dense(weights, x);
  const std::size_t outs = weights.shape()[0], ins = weights.shape()[1];
  SpikeTensor y({outs}, x.steps());
  for (std::size_t o = 0; o < outs; ++o) {
    for (std::size_t t = 0; t < x.steps(); ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ins; ++i) acc += weights[o * ins + i] * x.at(i, t);
      y.at(o, t) = acc;
    }
  }
  return y;
}

Tensor dense_weight_grad(const SpikeTensor& e, const SpikeTensor& x) {
  Tensor g({e.units(), x.units()});
  for (std::size_t o = 0; o < e.units(); ++o) {
    for (std::size_t i = 0; i < x.units(); ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < x.steps(); ++t) acc += e.at(o, t) * x.at(i, t);
      g[o * x.units() + i] = acc;
    }
  }
  return g;
}

SpikeTensor dense_transpose(const Tensor& weights, const SpikeTensor& e, const Shape& input_shape) {
  const std::size_t outs = weights.shape()[0], ins = weights.shape()[1];
  SpikeTensor h(input_shape, e.steps());
  for (std::size_t i = 0; i < ins; ++i) {
    for (std::size_t t = 0; t < e.steps(); ++t) {
      double acc = 0.0;
      for (std::size_t o = 0; o < outs; ++o) acc += weights[o * ins + i] * e.at(o, t);
      h.at(i, t) = acc;
    }
  }
  return h;
}

SpikeTensor conv_forward(const Tensor& weights, const SpikeTensor& x, const Shape3& in) {
  check_conv(weights, x, in);
  const std::size_t K = weights.shape()[0], C = in.channels, H = in.height, W = in.width;
  const std::size_t k = weights.shape()[2];
  const idx pad = static_cast<idx>(k / 2);
  SpikeTensor y({K, H, W}, x.steps());
  for (std::size_t kk = 0; kk < K; ++kk)
    for (std::size_t oy = 0; oy < H; ++oy)
      for (std::size_t ox = 0; ox < W; ++ox)
        for (std::size_t t = 0; t < x.steps(); ++t) {
          double acc = 0.0;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t dy = 0; dy < k; ++dy)
              for (std::size_t dx = 0; dx < k; ++dx) {
                const idx iy = static_cast<idx>(oy + dy) - pad;
                const idx ix = static_cast<idx>(ox + dx) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<idx>(H) || ix >= static_cast<idx>(W)) continue;
                acc += weights[((kk * C + c) * k + dy) * k + dx] *
                       x.at((c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix), t);
              }
          y.at((kk * H + oy) * W + ox, t) = acc;
        }
  return y;
}

Tensor conv_weight_grad(const SpikeTensor& e, const SpikeTensor& x, const Shape3& in,
                        std::size_t kernel) {
  const std::size_t C = in.channels, H = in.height, W = in.width, k = kernel;
  const std::size_t K = e.units() / (H * W);
  const idx pad = static_cast<idx>(k / 2);
  Tensor g({K, C, k, k});
  for (std::size_t kk = 0; kk < K; ++kk)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t dy = 0; dy < k; ++dy)
        for (std::size_t dx = 0; dx < k; ++dx) {
          double acc = 0.0;
          for (std::size_t oy = 0; oy < H; ++oy)
            for (std::size_t ox = 0; ox < W; ++ox) {
              const idx iy = static_cast<idx>(oy + dy) - pad;
              const idx ix = static_cast<idx>(ox + dx) - pad;
              if (iy < 0 || ix < 0 || iy >= static_cast<idx>(H) || ix >= static_cast<idx>(W)) continue;
              for (std::size_t t = 0; t < x.steps(); ++t)
                acc += e.at((kk * H + oy) * W + ox, t) *
                       x.at((c * H + static_cast<std::size_t>(iy)) * W + static_cast<std::size_t>(ix), t);
            }
          g[((kk * C + c) * k + dy) * k + dx] = acc;
        }
  return g;
}

SpikeTensor conv_transpose(const Tensor& weights, const SpikeTensor& e, const Shape3& in) {
  const std::size_t K = weights.shape()[0], C = in.channels, H = in.height, W = in.width;
  const std::size_t k = weights.shape()[2];
  const idx pad = static_cast<idx>(k / 2);
  SpikeTensor h(in.as_shape(), e.steps());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t iy = 0; iy < H; ++iy)
      for (std::size_t ix = 0; ix < W; ++ix)
        for (std::size_t t = 0; t < e.steps(); ++t) {
          double acc = 0.0;
          for (std::size_t kk = 0; kk < K; ++kk)
            for (std::size_t dy = 0; dy < k; ++dy)
              for (std::size_t dx = 0; dx < k; ++dx) {
                const idx oy = static_cast<idx>(iy) - static_cast<idx>(dy) + pad;
                const idx ox = static_cast<idx>(ix) - static_cast<idx>(dx) + pad;
                if (oy < 0 || ox < 0 || oy >= static_cast<idx>(H) || ox >= static_cast<idx>(W)) continue;
                acc += weights[((kk * C + c) * k + dy) * k + dx] *
                       e.at((kk * H + static_cast<std::size_t>(oy)) * W + static_cast<std::size_t>(ox), t);
              }
          h.at((c * H + iy) * W + ix, t) = acc;
        }
  return h;
}

}  // namespace reference
}  // namespace spikegrad
