#include "lesionrl/nn/kernels_parallel.hpp"

#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "lesionrl/error.hpp"
#include "lesionrl/nn/activations.hpp"

namespace lesionrl::nn::kernels {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;
using Stride = Eigen::OuterStride<>;
using ConstPanel = Eigen::Map<const RowMatrix, 0, Stride>;
using Panel = Eigen::Map<RowMatrix, 0, Stride>;

// Column panel width for the parallel dense GEMMs. Fixed so each output
// element sees the same blocking regardless of thread count.
constexpr int kPanel = 64;

struct ConvGeometry {
  SpatialShape in;
  SpatialShape out;
  int kernel;
  int stride;
  int pad_y;
  int pad_x;

  ConvGeometry(const SpatialShape& i, const SpatialShape& o, int k, int s)
      : in(i),
        out(o),
        kernel(k),
        stride(s),
        pad_y(same_padding_before(i.height, k, s)),
        pad_x(same_padding_before(i.width, k, s)) {}

  int patch() const { return kernel * kernel * in.channels; }
  int positions() const { return out.height * out.width; }
};

// cols is positions x patch, row-major; patch index (ky * k + kx) * cin + ci
// matches the weight row layout. For a fixed (ky), the k*cin entries of a
// row are contiguous in the HWC input whenever the window is inside the
// image, so they are copied as one run.
void im2col(const float* in, const ConvGeometry& g, float* cols) {
  const int cin = g.in.channels;
  const int patch = g.patch();
  const int run = g.kernel * cin;
  for (int oy = 0; oy < g.out.height; ++oy) {
    for (int ox = 0; ox < g.out.width; ++ox) {
      float* row = cols + (static_cast<std::size_t>(oy) * g.out.width + ox) * patch;
      const int ix0 = ox * g.stride - g.pad_x;
      const bool x_inside = ix0 >= 0 && ix0 + g.kernel <= g.in.width;
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int iy = oy * g.stride + ky - g.pad_y;
        float* dst = row + ky * run;
        if (iy < 0 || iy >= g.in.height) {
          std::fill(dst, dst + run, 0.0f);
          continue;
        }
        const float* src_row = in + static_cast<std::size_t>(iy) * g.in.width * cin;
        if (x_inside) {
          std::copy(src_row + ix0 * cin, src_row + (ix0 + g.kernel) * cin, dst);
          continue;
        }
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int ix = ix0 + kx;
          if (ix < 0 || ix >= g.in.width) {
            std::fill(dst + kx * cin, dst + (kx + 1) * cin, 0.0f);
          } else {
            std::copy(src_row + ix * cin, src_row + (ix + 1) * cin, dst + kx * cin);
          }
        }
      }
    }
  }
}

void col2im_add(const float* cols, const ConvGeometry& g, float* din) {
  const int cin = g.in.channels;
  const int patch = g.patch();
  const int run = g.kernel * cin;
  for (int oy = 0; oy < g.out.height; ++oy) {
    for (int ox = 0; ox < g.out.width; ++ox) {
      const float* row = cols + (static_cast<std::size_t>(oy) * g.out.width + ox) * patch;
      const int ix0 = ox * g.stride - g.pad_x;
      const int kx_lo = std::max(0, -ix0);
      const int kx_hi = std::min(g.kernel, g.in.width - ix0);
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int iy = oy * g.stride + ky - g.pad_y;
        if (iy < 0 || iy >= g.in.height) continue;
        const float* src = row + ky * run + kx_lo * cin;
        float* dst = din + (static_cast<std::size_t>(iy) * g.in.width + ix0 + kx_lo) * cin;
        const int n = (kx_hi - kx_lo) * cin;
        for (int i = 0; i < n; ++i) dst[i] += src[i];
      }
    }
  }
}

// dpre = dout * elu'(pre), with elu' recovered from the output: 1 above zero,
// out + 1 otherwise.
void scale_by_elu_grad(const float* out, const float* dout, float* dpre, std::size_t n) {
  const auto len = static_cast<Eigen::Index>(n);
  Eigen::Map<const Eigen::ArrayXf> y(out, len), dy(dout, len);
  Eigen::Map<Eigen::ArrayXf>(dpre, len) = dy * (y.min(0.0f) + 1.0f);
}

}  // namespace

void elu_inplace(std::span<float> values) {
  // Eigen peels unaligned leading elements onto the scalar exp(), which
  // rounds differently from the vector one. Working through an aligned
  // scratch block keeps every value independent of the buffer address.
  constexpr std::size_t kBlock = 4096;
  thread_local Eigen::ArrayXf scratch(static_cast<Eigen::Index>(kBlock));
  for (std::size_t start = 0; start < values.size(); start += kBlock) {
    const auto n = static_cast<Eigen::Index>(std::min(kBlock, values.size() - start));
    auto a = scratch.head(n);
    a = Eigen::Map<const Eigen::ArrayXf>(values.data() + start, n);
    // Branch-free form; a select() with exp() does not vectorize.
    a = a.max(0.0f) + (a.min(0.0f).exp() - 1.0f);
    std::copy(a.data(), a.data() + n, values.data() + start);
  }
}

void conv_elu_forward(std::span<const float> in, const SpatialShape& in_shape,
                      const LayerParams<float>& layer, const SpatialShape& out_shape, int kernel,
                      int stride, int batch, std::span<float> out) {
  const ConvGeometry g(in_shape, out_shape, kernel, stride);
  if (static_cast<long long>(in.size()) != in_shape.size() * batch) {
    throw_dimension_mismatch("conv input size", in_shape.size() * batch, in.size());
  }
  if (static_cast<long long>(out.size()) != out_shape.size() * batch) {
    throw_dimension_mismatch("conv output size", out_shape.size() * batch, out.size());
  }
  const int patch = g.patch();
  const int positions = g.positions();
  const int cout = out_shape.channels;
  const ConstMapMatrix weight(layer.weight.data(), patch, cout);
  const Eigen::Map<const Eigen::RowVectorXf> bias(layer.bias.data(), cout);

#pragma omp parallel
  {
    std::vector<float> cols(static_cast<std::size_t>(positions) * patch);
#pragma omp for schedule(static)
    for (int b = 0; b < batch; ++b) {
      im2col(in.data() + static_cast<std::size_t>(b) * in_shape.size(), g, cols.data());
      float* dst = out.data() + static_cast<std::size_t>(b) * out_shape.size();
      MapMatrix result(dst, positions, cout);
      result.noalias() = ConstMapMatrix(cols.data(), positions, patch) * weight;
      result.rowwise() += bias;
      elu_inplace({dst, static_cast<std::size_t>(out_shape.size())});
    }
  }
}

void conv_elu_backward(std::span<const float> in, const SpatialShape& in_shape,
                       const LayerParams<float>& layer, std::span<const float> out,
                       std::span<const float> dout, const SpatialShape& out_shape, int kernel,
                       int stride, int batch, LayerParams<float>& grad, std::span<float> din) {
  const ConvGeometry g(in_shape, out_shape, kernel, stride);
  const int patch = g.patch();
  const int positions = g.positions();
  const int cout = out_shape.channels;
  const bool want_din = !din.empty();
  if (static_cast<long long>(dout.size()) != out_shape.size() * batch ||
      static_cast<long long>(out.size()) != out_shape.size() * batch) {
    throw_dimension_mismatch("conv output gradient size", out_shape.size() * batch, dout.size());
  }
  if (want_din && static_cast<long long>(din.size()) != in_shape.size() * batch) {
    throw_dimension_mismatch("conv input gradient size", in_shape.size() * batch, din.size());
  }
  const ConstMapMatrix weight(layer.weight.data(), patch, cout);
  const int chunks = (batch + kChunkSamples - 1) / kChunkSamples;
  std::vector<RowMatrix> chunk_gw(chunks, RowMatrix::Zero(patch, cout));
  std::vector<std::vector<double>> chunk_gb(chunks, std::vector<double>(cout, 0.0));

#pragma omp parallel
  {
    std::vector<float> cols(static_cast<std::size_t>(positions) * patch);
    std::vector<float> dpre(static_cast<std::size_t>(out_shape.size()));
#pragma omp for schedule(static)
    for (int c = 0; c < chunks; ++c) {
      const int end = std::min(batch, (c + 1) * kChunkSamples);
      for (int b = c * kChunkSamples; b < end; ++b) {
        const std::size_t out_off = static_cast<std::size_t>(b) * out_shape.size();
        scale_by_elu_grad(out.data() + out_off, dout.data() + out_off, dpre.data(), dpre.size());
        const ConstMapMatrix dpre_m(dpre.data(), positions, cout);
        for (int p = 0; p < positions; ++p) {
          const float* row = dpre.data() + static_cast<std::size_t>(p) * cout;
          for (int co = 0; co < cout; ++co) chunk_gb[c][co] += row[co];
        }
        im2col(in.data() + static_cast<std::size_t>(b) * in_shape.size(), g, cols.data());
        chunk_gw[c].noalias() += ConstMapMatrix(cols.data(), positions, patch).transpose() * dpre_m;
        if (want_din) {
          MapMatrix dcols(cols.data(), positions, patch);
          dcols.noalias() = dpre_m * weight.transpose();
          float* dst = din.data() + static_cast<std::size_t>(b) * in_shape.size();
          std::fill(dst, dst + in_shape.size(), 0.0f);
          col2im_add(cols.data(), g, dst);
        }
      }
    }
  }

  Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(patch, cout);
  std::vector<double> gb(cout, 0.0);
  for (int c = 0; c < chunks; ++c) {
    gw += chunk_gw[c].cast<double>();
    for (int co = 0; co < cout; ++co) gb[co] += chunk_gb[c][co];
  }
  grad.weight.resize(layer.weight.size());
  grad.bias.resize(layer.bias.size());
  MapMatrix(grad.weight.data(), patch, cout) = gw.cast<float>();
  for (int co = 0; co < cout; ++co) grad.bias[co] = static_cast<float>(gb[co]);
  grad.fan_in = layer.fan_in;
  grad.fan_out = layer.fan_out;
}

void dense_forward(std::span<const float> in, const LayerParams<float>& layer, int batch,
                   Activation act, std::span<float> out) {
  const int fan_in = static_cast<int>(layer.bias.empty() ? 0 : layer.weight.size() / layer.bias.size());
  const int fan_out = static_cast<int>(layer.bias.size());
  if (static_cast<long long>(in.size()) != static_cast<long long>(fan_in) * batch) {
    throw_dimension_mismatch("dense input size", static_cast<long long>(fan_in) * batch, in.size());
  }
  if (static_cast<long long>(out.size()) != static_cast<long long>(fan_out) * batch) {
    throw_dimension_mismatch("dense output size", static_cast<long long>(fan_out) * batch,
                             out.size());
  }
  const ConstMapMatrix x(in.data(), batch, fan_in);
  const int panels = (fan_out + kPanel - 1) / kPanel;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < panels; ++p) {
    const int c0 = p * kPanel;
    const int nc = std::min(kPanel, fan_out - c0);
    const ConstPanel w(layer.weight.data() + c0, fan_in, nc, Stride(fan_out));
    Panel y(out.data() + c0, batch, nc, Stride(fan_out));
    y.noalias() = x * w;
    y.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(layer.bias.data() + c0, nc);
  }
  switch (act) {
    case Activation::kLinear:
      break;
    case Activation::kElu:
      elu_inplace(out);
      break;
    case Activation::kSigmoid:
      for (auto& v : out) v = sigmoid(v);
      break;
  }
}

void dense_backward(std::span<const float> in, const LayerParams<float>& layer,
                    std::span<const float> out, std::span<const float> dout, int batch,
                    Activation act, LayerParams<float>& grad, std::span<float> din) {
  const int fan_out = static_cast<int>(layer.bias.size());
  const int fan_in = static_cast<int>(layer.weight.size() / fan_out);
  if (static_cast<long long>(dout.size()) != static_cast<long long>(fan_out) * batch) {
    throw_dimension_mismatch("dense output gradient size", static_cast<long long>(fan_out) * batch,
                             dout.size());
  }
  std::vector<float> dz(dout.begin(), dout.end());
  switch (act) {
    case Activation::kLinear:
      break;
    case Activation::kElu:
      scale_by_elu_grad(out.data(), dz.data(), dz.data(), dz.size());
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= out[i] * (1.0f - out[i]);
      break;
  }
  const ConstMapMatrix x(in.data(), batch, fan_in);
  const ConstMapMatrix dzm(dz.data(), batch, fan_out);
  grad.weight.resize(layer.weight.size());
  grad.bias.assign(fan_out, 0.0f);
  grad.fan_in = layer.fan_in;
  grad.fan_out = layer.fan_out;

  // dW = x^T dz, split by output column panels.
  const int out_panels = (fan_out + kPanel - 1) / kPanel;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < out_panels; ++p) {
    const int c0 = p * kPanel;
    const int nc = std::min(kPanel, fan_out - c0);
    const ConstPanel dzp(dz.data() + c0, batch, nc, Stride(fan_out));
    Panel gw(grad.weight.data() + c0, fan_in, nc, Stride(fan_out));
    gw.noalias() = x.transpose() * dzp;
  }
  for (int o = 0; o < fan_out; ++o) {
    double acc = 0.0;
    for (int b = 0; b < batch; ++b) acc += dz[static_cast<std::size_t>(b) * fan_out + o];
    grad.bias[o] = static_cast<float>(acc);
  }

  if (!din.empty()) {
    if (static_cast<long long>(din.size()) != static_cast<long long>(fan_in) * batch) {
      throw_dimension_mismatch("dense input gradient size", static_cast<long long>(fan_in) * batch,
                               din.size());
    }
    // din = dz W^T, split by input column panels.
    const int in_panels = (fan_in + kPanel - 1) / kPanel;
#pragma omp parallel for schedule(static)
    for (int p = 0; p < in_panels; ++p) {
      const int c0 = p * kPanel;
      const int nc = std::min(kPanel, fan_in - c0);
      const ConstPanel w(layer.weight.data() + static_cast<std::size_t>(c0) * fan_out, nc, fan_out,
                         Stride(fan_out));
      Panel dx(din.data() + c0, batch, nc, Stride(fan_in));
      dx.noalias() = dzm * w.transpose();
    }
  }
}

}  // namespace lesionrl::nn::kernels
