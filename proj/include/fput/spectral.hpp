#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fput/potentials.hpp"
#include "fput/wave_solver.hpp"

namespace fput {

using complex = std::complex<double>;

struct SpectralConfig {
  double a = 1.0;                   // exponential weight, 0 < a < tail rate
  double spacing = 0.05;            // background grid spacing; must divide 1/2
  double half_length = 6.0;         // periodic domain [-X, X)
  // Node clusters sit at k/2 for |k| <= cluster_reach. Their width and finest
  // spacing are measured in units of the tip width delta * beta.
  int cluster_reach = 3;
  double cluster_width = 3.0;
  double cluster_spacing = 0.15;
  double margin = 0.1;              // scan region is Re λ > -a (1 - margin)
  double residual_tol = 1e-6;
  double mass_fraction = 0.9;
  double mass_radius = 3.0;
  double zero_radius = 0.05;        // eigenvalues with |λ| below this join the zero cluster
  double jordan_ratio = 1e-2;       // singular value ratio marking "small"
  int curve_samples = 801;

  // Halved background spacing, finer clusters and a domain 50% longer.
  SpectralConfig refined() const;
  void validate() const;
};

// Conjugated operator E_{+a} L E_{-a} on a periodic grid, acting on stacked
// weighted samples (S, W). Rows and columns 0..N-1 belong to S.
struct DiscreteOperator {
  double omega = 0.0;
  double a = 0.0;
  double curvature = 0.0;             // Φ''(0)
  std::vector<double> x;              // nodes in lattice units
  std::vector<double> weight;         // quadrature weights
  std::vector<double> coefficient;    // Φ''(R(x))
  Eigen::MatrixXd matrix;

  std::size_t points() const { return x.size(); }
  // Stacks e^{a x} S and e^{a x} W.
  Eigen::VectorXd weighted(std::span<const double> S, std::span<const double> W) const;
  // Discrete L2 norm of a stacked vector (already weighted).
  double norm(const Eigen::VectorXcd& u) const;
};

// Full operator with coefficient Φ''(R(x)) on a grid clustered near the
// points k/2 where the profiles have their fine structure.
DiscreteOperator assemble_operator(const WaveProfile& wave, const SpectralConfig& cfg);

// Constant-coefficient operator (Φ'' ≡ Φ''(0)) on the uniform grid with the
// configured spacing.
DiscreteOperator assemble_constant_operator(double omega, const Potential& p, const SpectralConfig& cfg);

struct EssentialBranch {
  int sign = 1;
  std::vector<double> kappa;
  std::vector<complex> lambda;
};

// λ(κ) = -iκ - a ± 2 ω^{-1} sqrt(c) sinh(iκ/2 + a/2).
complex essential_point(double kappa, int sign, double omega, double a, double c);
// Both branches sampled on κ ∈ [-2π, 2π].
std::vector<EssentialBranch> essential_spectrum(double omega, const SpectralConfig& cfg, const Potential& p);
// Distance from λ to the nearest point on either branch (κ over all of R).
double distance_to_essential(complex lambda, double omega, double a, double c);

struct JordanModes {
  std::vector<double> x;  // wave grid in lattice units
  std::vector<double> S_star, W_star, S_sharp, W_sharp;
  double residual_star = 0.0;     // |L U*|
  double residual_sharp = 0.0;    // |L U# - (m/(2δ)) U*|
  double reference_sharp = 0.0;   // |(m/(2δ)) U*|
  double sigma = 0.0;             // σ(U*, U#)
  double sigma_star_star = 0.0;   // σ(U*, U*)
  double normalized_sigma = 0.0;  // δ^{m/2+1} σ(U*, U#)
};

// Neutral modes on the wave grid: U* by spectral differentiation, U# from
// the parameter derivative stored on the wave. Norms use the weight e^{a x}.
// Throws LadderRequired when the parameter derivative is missing.
JordanModes jordan_modes(const WaveProfile& wave, const SpectralConfig& cfg);

// Solves ∇G = f for G in L2 with weight e^{-b x} (G vanishes as x → -∞) via
// the weighted Fourier symbol on the wave grid.
std::vector<double> inverse_difference(const WaveProfile& wave, std::span<const double> f, double b);

enum class Verdict { NoUnstableModes, SuspectModes };
std::string to_string(Verdict v);

struct ComputedEigenvalue {
  complex lambda;
  double residual = 0.0;          // |(L - λ) u| / |u|
  double mass_fraction = 0.0;     // share of |u|^2 inside |x| <= mass_radius
  double overlap_star = 0.0;      // |<u, U*>| / (|u| |U*|)
  double overlap_sharp = 0.0;
  bool accepted = false;
  bool zero_cluster = false;
  std::vector<double> profile;    // |u| per node, both components combined
};

struct JordanDiagnostics {
  int cluster_size = 0;
  std::vector<double> singular_L;   // three smallest, ascending
  std::vector<double> singular_L2;
  bool consistent = false;          // one small singular value of L, two of L^2
};

struct ScanResult {
  std::size_t total_eigenvalues = 0;
  std::vector<ComputedEigenvalue> eigenvalues;  // accepted, in the scan region
  std::vector<ComputedEigenvalue> rejected;     // failed residual or mass tests
  JordanDiagnostics zero;
  Verdict verdict = Verdict::SuspectModes;
  std::vector<complex> suspects;
};

// Dense eigen-solve and classification of the eigenvalues with
// Re λ > -a (1 - margin) and |Im λ| <= π. Modes, if given, feed the overlaps.
ScanResult point_spectrum_scan(const DiscreteOperator& op, const SpectralConfig& cfg,
                               const JordanModes* modes = nullptr);

// All eigenvalues of the operator matrix.
std::vector<complex> operator_eigenvalues(const DiscreteOperator& op);

struct SpectralReport {
  std::vector<EssentialBranch> essential_curves;
  JordanModes jordan;
  ScanResult scan;
  Verdict verdict = Verdict::SuspectModes;
};

// Jordan modes plus point-spectrum scan. The wave must carry the parameter
// derivative.
SpectralReport analyze_spectrum(const WaveProfile& wave, const SpectralConfig& cfg);

}  // namespace fput
