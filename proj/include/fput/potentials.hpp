#pragma once

#include <string>
#include <vector>

namespace fput {

enum class PotentialKind { InverseMonomial, LennardJones, TwoTerm };

// Singular interaction potential on (-1, inf). For r > 0 the potential is
// continued quadratically so that it stays C^2 and strictly convex.
//
// The named constructors accept any positive exponents; validate() reports
// rule violations and require_valid() turns them into an exception.
class Potential {
 public:
  static Potential inverse_monomial(double m);
  static Potential lennard_jones(double n);
  static Potential two_term(double m, double k);

  PotentialKind kind() const noexcept { return kind_; }
  // Singularity order.
  double m() const noexcept { return m_; }
  // Correction exponent of the singular expansion.
  double k() const noexcept { return k_; }
  std::string name() const;

  // Derivative of the given order (0..3) at r.
  double eval(double r, int order) const;
  double value(double r) const { return eval(r, 0); }
  double d1(double r) const { return eval(r, 1); }
  double d2(double r) const { return eval(r, 2); }
  double d3(double r) const { return eval(r, 3); }

  // Second derivative at the minimum, i.e. the squared sound speed.
  double curvature() const noexcept { return curvature_; }

 private:
  Potential(PotentialKind kind, double m, double k);
  double singular_branch(double r, int order) const;

  PotentialKind kind_;
  double m_;
  double k_;
  double curvature_;
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  // Largest |(1+r)^{m+1}(m+1)Φ'(r) + 1| / (1+r)^k seen on the validation grid.
  double singularity_constant = 0.0;
  bool pass() const;
  std::string failures() const;
};

ValidationReport validate(const Potential& p);

// Throws InvalidParameter listing the failed checks.
void require_valid(const Potential& p);

}  // namespace fput
