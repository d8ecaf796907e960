#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace fput::detail {

using cplx = std::complex<double>;

// Discrete Fourier transforms on a uniform periodic grid with n points and
// spacing h. Not safe for concurrent use of one instance.
class PeriodicFft {
 public:
  PeriodicFft(int n, double h);

  int size() const { return n_; }
  double spacing() const { return h_; }
  // Angular wavenumber of mode j; the Nyquist mode gets +pi/h.
  double wavenumber(int j) const { return k_[static_cast<std::size_t>(j)]; }
  bool is_nyquist(int j) const { return n_ % 2 == 0 && j == n_ / 2; }

  std::vector<cplx> forward(std::span<const double> f) const;
  std::vector<cplx> forward(std::span<const cplx> f) const;
  std::vector<double> inverse_real(std::vector<cplx> spec) const;
  std::vector<cplx> inverse(std::span<const cplx> spec) const;

  // Applies the multiplier sampled at every mode. Multipliers of real, even
  // kernels keep real data real.
  std::vector<double> apply(std::span<const double> f, std::span<const double> multiplier) const;
  std::vector<cplx> apply(std::span<const cplx> f, std::span<const cplx> multiplier) const;

  // Samples symbol(k) on the wavenumbers.
  std::vector<double> sample(const std::function<double(double)>& symbol) const;

  // Spectral first derivative; the Nyquist mode is dropped.
  std::vector<double> derivative(std::span<const double> f) const;

 private:
  int n_;
  double h_;
  std::vector<double> k_;
  mutable Eigen::FFT<double> fft_;
};

// Smallest even integer >= n whose prime factors are 2, 3 and 5.
int fft_friendly_size(int n);

// Eight-point Lagrange interpolation of samples f_i at fractional index pos.
// Zero when the stencil leaves the array.
double lagrange8(std::span<const double> f, double pos);

// Fourier symbols of the convolution with the indicator of [-w, w] and with
// the tent max(2w - |x|, 0).
double box_symbol(double k, double w);
double tent_symbol(double k, double w);

}  // namespace fput::detail
