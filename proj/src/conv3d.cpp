#include <memory>
#include <string>

#include "graph.hpp"

namespace stcr {

namespace {

const char* const kAxisNames[3] = {"T", "H", "W"};

struct ConvGeometry {
  Index channels, in[3], kernel[3], stride[3], pad[3], out[3];

  Index patch() const { return channels * kernel[0] * kernel[1] * kernel[2]; }
  Index positions() const { return out[0] * out[1] * out[2]; }
};

// Unfold the padded input into a (C*kT*kH*kW) x (T''*H''*W'') matrix.
RowMatrixXd im2col(const double* input, const ConvGeometry& g) {
  RowMatrixXd cols = RowMatrixXd::Zero(g.patch(), g.positions());
  Index row = 0;
  for (Index c = 0; c < g.channels; ++c)
    for (Index kt = 0; kt < g.kernel[0]; ++kt)
      for (Index kh = 0; kh < g.kernel[1]; ++kh)
        for (Index kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          Index col = 0;
          for (Index ot = 0; ot < g.out[0]; ++ot) {
            const Index t = ot * g.stride[0] - g.pad[0] + kt;
            for (Index oh = 0; oh < g.out[1]; ++oh) {
              const Index h = oh * g.stride[1] - g.pad[1] + kh;
              for (Index ow = 0; ow < g.out[2]; ++ow, ++col) {
                const Index w = ow * g.stride[2] - g.pad[2] + kw;
                if (t < 0 || t >= g.in[0] || h < 0 || h >= g.in[1] || w < 0 || w >= g.in[2]) continue;
                cols(row, col) = input[((c * g.in[0] + t) * g.in[1] + h) * g.in[2] + w];
              }
            }
          }
        }
  return cols;
}

void col2im_add(const RowMatrixXd& cols, const ConvGeometry& g, double* input_grad) {
  Index row = 0;
  for (Index c = 0; c < g.channels; ++c)
    for (Index kt = 0; kt < g.kernel[0]; ++kt)
      for (Index kh = 0; kh < g.kernel[1]; ++kh)
        for (Index kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          Index col = 0;
          for (Index ot = 0; ot < g.out[0]; ++ot) {
            const Index t = ot * g.stride[0] - g.pad[0] + kt;
            for (Index oh = 0; oh < g.out[1]; ++oh) {
              const Index h = oh * g.stride[1] - g.pad[1] + kh;
              for (Index ow = 0; ow < g.out[2]; ++ow, ++col) {
                const Index w = ow * g.stride[2] - g.pad[2] + kw;
                if (t < 0 || t >= g.in[0] || h < 0 || h >= g.in[1] || w < 0 || w >= g.in[2]) continue;
                input_grad[((c * g.in[0] + t) * g.in[1] + h) * g.in[2] + w] += cols(row, col);
              }
            }
          }
        }
}

}  // namespace

Index conv_out_dim(Index in, Index kernel, Index stride, Index pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

Var conv3d(const Var& input, const Var& kernel, const Var& bias, Triple stride, Triple padding) {
  const Tensor& x = input->value;
  const Tensor& k = kernel->value;
  if (x.rank() != 4) throw DimensionError("conv3d: input must be C x T x H x W, got " + to_string(x.shape()));
  if (k.rank() != 5) {
    throw DimensionError("conv3d: kernel must be Cout x Cin x kT x kH x kW, got " + to_string(k.shape()));
  }
  if (k.dim(1) != x.dim(0)) {
    throw DimensionError("conv3d: channel axis mismatch, input has " + std::to_string(x.dim(0)) +
                         " channels but kernel expects " + std::to_string(k.dim(1)));
  }
  const Index out_channels = k.dim(0);
  if (bias->value.rank() != 1 || bias->value.dim(0) != out_channels) {
    throw DimensionError("conv3d: bias shape " + to_string(bias->value.shape()) + " must be [" +
                         std::to_string(out_channels) + "]");
  }

  ConvGeometry g{};
  g.channels = x.dim(0);
  for (int a = 0; a < 3; ++a) {
    g.in[a] = x.dim(a + 1);
    g.kernel[a] = k.dim(a + 2);
    g.stride[a] = stride[static_cast<std::size_t>(a)];
    g.pad[a] = padding[static_cast<std::size_t>(a)];
    if (g.stride[a] < 1) {
      throw ArgumentError(std::string("conv3d: stride on axis ") + kAxisNames[a] + " must be >= 1");
    }
    if (g.pad[a] < 0) {
      throw ArgumentError(std::string("conv3d: padding on axis ") + kAxisNames[a] + " must be >= 0");
    }
    if (g.kernel[a] > g.in[a] + 2 * g.pad[a]) {
      throw DimensionError(std::string("conv3d: kernel extent on axis ") + kAxisNames[a] + " (" +
                           std::to_string(g.kernel[a]) + ") exceeds padded input (" +
                           std::to_string(g.in[a] + 2 * g.pad[a]) + ")");
    }
    g.out[a] = conv_out_dim(g.in[a], g.kernel[a], g.stride[a], g.pad[a]);
  }

  auto cols = std::make_shared<RowMatrixXd>(im2col(x.data().data(), g));
  Eigen::Map<const RowMatrixXd> K(k.data().data(), out_channels, g.patch());

  Tensor out(Shape{out_channels, g.out[0], g.out[1], g.out[2]});
  Eigen::Map<RowMatrixXd> Y(out.data().data(), out_channels, g.positions());
  Y.noalias() = K * (*cols);
  Y.colwise() += bias->value.data();

  return detail::make_node(
      std::move(out), "conv3d", {input, kernel, bias},
      [g, cols, out_channels](const Node& self, const Tensor& grad, auto grads) {
        Eigen::Map<const RowMatrixXd> dY(grad.data().data(), out_channels, g.positions());
        if (grads[0]) {
          Eigen::Map<const RowMatrixXd> K(self.parents[1]->value.data().data(), out_channels, g.patch());
          const RowMatrixXd dcols = K.transpose() * dY;
          col2im_add(dcols, g, grads[0]->data().data());
        }
        if (grads[1]) {
          Eigen::Map<RowMatrixXd> dK(grads[1]->data().data(), out_channels, g.patch());
          dK.noalias() += dY * cols->transpose();
        }
        if (grads[2]) grads[2]->data() += dY.rowwise().sum();
      });
}

}  // namespace stcr
