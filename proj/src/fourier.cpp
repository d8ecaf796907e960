#include "fourier.hpp"

#include <cmath>
#include <numbers>

namespace fput::detail {

PeriodicFft::PeriodicFft(int n, double h) : n_(n), h_(h), k_(static_cast<std::size_t>(n)) {
  const double dk = 2.0 * std::numbers::pi / (n * h);
  for (int j = 0; j < n; ++j) {
    const int jj = j <= n / 2 ? j : j - n;
    k_[static_cast<std::size_t>(j)] = dk * jj;
  }
}

std::vector<cplx> PeriodicFft::forward(std::span<const double> f) const {
  std::vector<double> in(f.begin(), f.end());
  std::vector<cplx> out;
  fft_.fwd(out, in);
  return out;
}

std::vector<cplx> PeriodicFft::forward(std::span<const cplx> f) const {
  std::vector<cplx> in(f.begin(), f.end());
  std::vector<cplx> out;
  fft_.fwd(out, in);
  return out;
}

std::vector<double> PeriodicFft::inverse_real(std::vector<cplx> spec) const {
  std::vector<double> out;
  fft_.inv(out, spec);
  return out;
}

std::vector<cplx> PeriodicFft::inverse(std::span<const cplx> spec) const {
  std::vector<cplx> in(spec.begin(), spec.end());
  std::vector<cplx> out;
  fft_.inv(out, in);
  return out;
}

std::vector<double> PeriodicFft::apply(std::span<const double> f, std::span<const double> multiplier) const {
  auto spec = forward(f);
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= multiplier[j];
  return inverse_real(std::move(spec));
}

std::vector<cplx> PeriodicFft::apply(std::span<const cplx> f, std::span<const cplx> multiplier) const {
  auto spec = forward(f);
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= multiplier[j];
  return inverse(spec);
}

std::vector<double> PeriodicFft::sample(const std::function<double(double)>& symbol) const {
  std::vector<double> out(k_.size());
  for (std::size_t j = 0; j < k_.size(); ++j) out[j] = symbol(k_[j]);
  return out;
}

std::vector<double> PeriodicFft::derivative(std::span<const double> f) const {
  auto spec = forward(f);
  for (int j = 0; j < n_; ++j) {
    auto& s = spec[static_cast<std::size_t>(j)];
    s = is_nyquist(j) ? cplx(0.0) : s * cplx(0.0, k_[static_cast<std::size_t>(j)]);
  }
  return inverse_real(std::move(spec));
}

double lagrange8(std::span<const double> f, double pos) {
  const int n = static_cast<int>(f.size());
  const int i0 = static_cast<int>(std::floor(pos)) - 3;
  if (i0 < 0 || i0 + 7 >= n) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    double w = 1.0;
    for (int j = 0; j < 8; ++j)
      if (j != i) w *= (pos - (i0 + j)) / static_cast<double>(i - j);
    sum += w * f[static_cast<std::size_t>(i0 + i)];
  }
  return sum;
}

int fft_friendly_size(int n) {
  if (n < 2) n = 2;
  for (int c = n + (n % 2);; c += 2) {
    int r = c;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

double box_symbol(double k, double w) {
  const double z = k * w;
  if (std::abs(z) < 1e-6) return 2.0 * w * (1.0 - z * z / 6.0);
  return 2.0 * std::sin(z) / k;
}

double tent_symbol(double k, double w) {
  const double b = box_symbol(k, w);
  return b * b;
}

}  // namespace fput::detail
