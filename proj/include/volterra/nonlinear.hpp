#pragma once

#include <functional>
#include <optional>
#include <string>

namespace volterra {

enum class Family { power, logtype, custom };

/// Which structural hypotheses the nonlinearity satisfies. For the built-in
/// families these are known analytically; for custom ones they come from
/// sampled checks at construction.
struct HypothesisFlags {
  bool positivity = false;          // f > 0 on (0, inf)
  bool asymptotic_oddness = false;  // |f(x)| / phi(|x|) -> 1 as |x| -> inf
  bool sublinear_a3 = false;        // phi' > 0, phi' -> 0
  bool sublinear_a4 = false;        // phi' decreasing to 0
  bool local_lipschitz = false;
  bool global_linear = false;       // |f(x)| <= K + eta |x|
};

/// State dependence f together with its monotone majorant phi.
class Nonlinearity {
 public:
  /// f(x) = sgn(x) |x|^beta, beta in (0, 1). phi(x) = x^beta on x > 0.
  static Nonlinearity power(double beta);
  /// f(x) = (x + e) / log(x + e) for x > 1 - e; phi = f.
  static Nonlinearity logtype();
  /// Expressions in x. phi' is taken by central differences with step x * 1e-6.
  static Nonlinearity custom(const std::string& f_expr, const std::string& phi_expr);

  double f(double x) const { return f_(x); }
  double phi(double x) const { return phi_(x); }
  double phi_prime(double x) const;

  Family family() const noexcept { return family_; }
  /// Exponent of the power family; NaN otherwise.
  double beta() const noexcept { return beta_; }
  const HypothesisFlags& flags() const noexcept { return flags_; }
  double linear_bound_K() const noexcept { return K_; }
  double linear_bound_eta() const noexcept { return eta_; }
  bool has_closed_F() const noexcept { return static_cast<bool>(F_closed_); }

  const std::string& f_source() const noexcept { return f_source_; }
  const std::string& phi_source() const noexcept { return phi_source_; }

  std::string describe() const;

 private:
  friend double eval_F(const Nonlinearity&, double);
  friend double invert_F(const Nonlinearity&, double);

  Family family_ = Family::custom;
  double beta_ = 0.0;
  std::function<double(double)> f_;
  std::function<double(double)> phi_;
  std::function<double(double)> phi_prime_;
  std::function<double(double)> F_closed_;
  std::function<double(double)> F_inv_closed_;
  double F_infimum_ = 0.0;  // inf of F over (0, inf) when known
  HypothesisFlags flags_;
  double K_ = 0.0;
  double eta_ = 0.0;
  std::string f_source_;
  std::string phi_source_;
};

/// F(x) = int_1^x du / f(u), x > 0. Negative for x < 1.
double eval_F(const Nonlinearity& n, double x);
/// x > 0 with F(x) = y. Throws DomainError when y <= inf F.
double invert_F(const Nonlinearity& n, double y);
/// Phi(x) = int_1^x du / phi(u), always by adaptive quadrature.
double eval_Phi(const Nonlinearity& n, double x);

struct PhiPropsReport {
  double horizon = 0.0;
  double lambda = 1.0;
  double slack = 0.05;
  double max_elasticity = 0.0;  // max of x phi'(x) / phi(x) on the tail
  double max_scaling = 0.0;     // max of phi(lambda x) / (lambda phi(x)) on the tail
  bool phi_increasing = false;
  bool phi_prime_decays = false;
  bool pass = false;
};

/// Samples phi on a log grid up to `horizon` and tests the tail bounds that
/// hold for a majorant with monotonically vanishing derivative.
PhiPropsReport check_phi_props(const Nonlinearity& n, double horizon, double lambda,
                               double slack = 0.05);

}  // namespace volterra
