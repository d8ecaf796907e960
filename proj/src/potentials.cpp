#include "fput/potentials.hpp"

#include <cmath>
#include <sstream>

#include "fput/errors.hpp"

namespace fput {

namespace {

// Exponent pairs closer than this are treated as equal and use the
// logarithmic form of the potential.
constexpr double kEqualExponents = 1e-12;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

Potential::Potential(PotentialKind kind, double m, double k) : kind_(kind), m_(m), k_(k) {
  if (!(m > 0.0) || !(k > 0.0) || !std::isfinite(m) || !std::isfinite(k)) {
    throw InvalidParameter("potential exponents must be positive and finite (m=" + fmt(m) +
                           ", k=" + fmt(k) + ")");
  }
  curvature_ = k_ / (m_ + 1.0);
}

Potential Potential::inverse_monomial(double m) {
  return Potential(PotentialKind::InverseMonomial, m, m + 1.0);
}

Potential Potential::lennard_jones(double n) {
  return Potential(PotentialKind::LennardJones, 2.0 * n, n);
}

Potential Potential::two_term(double m, double k) { return Potential(PotentialKind::TwoTerm, m, k); }

std::string Potential::name() const {
  switch (kind_) {
    case PotentialKind::InverseMonomial:
      return "inverse_monomial(m=" + fmt(m_) + ")";
    case PotentialKind::LennardJones:
      return "lennard_jones(n=" + fmt(m_ / 2.0) + ")";
    case PotentialKind::TwoTerm:
      return "two_term(m=" + fmt(m_) + ",k=" + fmt(k_) + ")";
  }
  return "unknown";
}

double Potential::eval(double r, int order) const {
  if (order < 0 || order > 3) throw UnsupportedOrder("derivative order " + std::to_string(order));
  if (!(r > -1.0) || std::isnan(r)) throw DomainError("potential evaluated at r=" + fmt(r) + " <= -1");
  if (r > 0.0) {
    switch (order) {
      case 0:
        return 0.5 * curvature_ * r * r;
      case 1:
        return curvature_ * r;
      case 2:
        return curvature_;
      default:
        return 0.0;
    }
  }
  return singular_branch(r, order);
}

// All three families share the form
//   Φ'(r) = (u^{k-m-1} - u^{-m-1}) / (m+1),  u = 1 + r,
// which fixes Φ(0) = Φ'(0) = 0 and Φ''(0) = k/(m+1).
double Potential::singular_branch(double r, int order) const {
  const double m = m_;
  const double k = k_;
  const double u = 1.0 + r;
  const double lu = std::log(u);
  auto upow = [lu](double e) { return std::exp(e * lu); };
  switch (order) {
    case 0: {
      const double head = (upow(-m) - 1.0) / (m * (m + 1.0));
      if (std::abs(m - k) < kEqualExponents) return head + lu / (m + 1.0);
      return head - (upow(k - m) - 1.0) / ((m - k) * (m + 1.0));
    }
    case 1:
      return (upow(k - m - 1.0) - upow(-m - 1.0)) / (m + 1.0);
    case 2:
      return upow(-m - 2.0) - (m + 1.0 - k) / (m + 1.0) * upow(k - m - 2.0);
    default:
      return -(m + 2.0) * upow(-m - 3.0) +
             (m + 1.0 - k) * (m + 2.0 - k) / (m + 1.0) * upow(k - m - 3.0);
  }
}

bool ValidationReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!out.empty()) out += "; ";
    out += c.name;
    if (!c.detail.empty()) out += " (" + c.detail + ")";
  }
  return out;
}

ValidationReport validate(const Potential& p) {
  ValidationReport rep;
  const double m = p.m();
  const double k = p.k();
  auto add = [&rep](std::string name, bool ok, double measured, std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, measured, std::move(detail)});
  };

  add("m > 1", m > 1.0, m, "m=" + fmt(m));
  add("k > 1", k > 1.0, k, "k=" + fmt(k));
  add("m != k", std::abs(m - k) >= kEqualExponents, std::abs(m - k), "m=" + fmt(m) + ", k=" + fmt(k));

  const double phi0 = p.value(0.0);
  const double dphi0 = p.d1(0.0);
  const double c0 = p.d2(0.0);
  add("phi(0) = 0", std::abs(phi0) <= 1e-14, phi0);
  add("phi'(0) = 0", std::abs(dphi0) <= 1e-14, dphi0);
  add("phi''(0) > 0", c0 > 0.0, c0);

  // 512 log-spaced points in (-1+1e-8, 0] and 128 uniform points in (0, 2].
  std::vector<double> grid;
  grid.reserve(640);
  for (int i = 0; i < 512; ++i) {
    const double e = -8.0 + 8.0 * i / 511.0;
    grid.push_back(std::pow(10.0, e) - 1.0);
  }
  for (int i = 1; i <= 128; ++i) grid.push_back(2.0 * i / 128.0);

  double min_d2 = INFINITY;
  double sing_c = 0.0;
  for (double r : grid) {
    min_d2 = std::min(min_d2, p.d2(r));
    const double u = 1.0 + r;
    // Below this the residual is pure rounding of u^{m+1}·u^{-m-1}.
    if (r < 0.0 && std::pow(u, k) >= 1e-6) {
      const double resid = std::abs(std::pow(u, m + 1.0) * (m + 1.0) * p.d1(r) + 1.0);
      sing_c = std::max(sing_c, resid / std::pow(u, k));
    }
  }
  rep.singularity_constant = sing_c;
  add("strict convexity", min_d2 > 0.0, min_d2, "min phi''=" + fmt(min_d2));
  add("singular expansion bound", std::isfinite(sing_c), sing_c, "C=" + fmt(sing_c));

  const double u = 1e-4;
  const double norm = std::pow(u, m + 2.0) * p.d2(u - 1.0);
  add("singularity normalization", std::abs(norm - 1.0) <= 1e-3, norm,
      "(1+r)^{m+2} phi''=" + fmt(norm) + " at r=-1+1e-4");
  return rep;
}

void require_valid(const Potential& p) {
  const auto rep = validate(p);
  if (!rep.pass()) throw InvalidParameter(p.name() + " is not admissible: " + rep.failures());
}

}  // namespace fput
