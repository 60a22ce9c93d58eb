#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stcr/autodiff.hpp"
#include "stcr/clip.hpp"
#include "stcr/random.hpp"

namespace stcr::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

/// Distinct integer entries 0, 1, 2, ... in row-major order.
inline Tensor iota_tensor(Shape shape) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return t;
}

inline VideoClip random_clip(Index c, Index t, Index h, Index w, Rng& rng) {
  return VideoClip(random_tensor(Shape{c, t, h, w}, rng));
}

/// Direct seven-loop 3D cross-correlation.
inline Tensor reference_conv3d(const Tensor& x, const Tensor& k, const Tensor& b, Triple stride, Triple pad) {
  const Index C = x.dim(0), T = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Index O = k.dim(0), kT = k.dim(2), kH = k.dim(3), kW = k.dim(4);
  const Index oT = (T + 2 * pad[0] - kT) / stride[0] + 1;
  const Index oH = (H + 2 * pad[1] - kH) / stride[1] + 1;
  const Index oW = (W + 2 * pad[2] - kW) / stride[2] + 1;
  Tensor y(Shape{O, oT, oH, oW});
  for (Index o = 0; o < O; ++o)
    for (Index t = 0; t < oT; ++t)
      for (Index h = 0; h < oH; ++h)
        for (Index w = 0; w < oW; ++w) {
          double acc = b[o];
          for (Index c = 0; c < C; ++c)
            for (Index a = 0; a < kT; ++a)
              for (Index p = 0; p < kH; ++p)
                for (Index q = 0; q < kW; ++q) {
                  const Index it = t * stride[0] - pad[0] + a;
                  const Index ih = h * stride[1] - pad[1] + p;
                  const Index iw = w * stride[2] - pad[2] + q;
                  if (it < 0 || it >= T || ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                  acc += x.at(c, it, ih, iw) * k[(((o * C + c) * kT + a) * kH + p) * kW + q];
                }
          y.at(o, t, h, w) = acc;
        }
  return y;
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic;
  double p_value;
};

inline double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double n = static_cast<double>(a.size() * b.size()) / static_cast<double>(a.size() + b.size());
  const double sqn = std::sqrt(n);
  return {d, kolmogorov_survival((sqn + 0.12 + 0.11 / sqn) * d)};
}

/// Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stcr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace stcr::testing
