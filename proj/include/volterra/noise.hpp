#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"

namespace volterra {

enum class NoiseKind { none, brownian, stable };

const char* to_string(NoiseKind kind);

/// One sampled realization of Z on a uniform grid, Z(0) = 0.
struct NoisePath {
  UniformGrid grid;
  std::vector<double> values;
  NoiseKind kind = NoiseKind::none;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

NoisePath zero_noise(const UniformGrid& grid);

/// Z_{k+1} = Z_k + sigma(t_k + dt/2) sqrt(dt) xi_k.
NoisePath sample_brownian(const std::function<double(double)>& sigma, const UniformGrid& grid,
                          std::uint64_t seed, std::uint64_t stream);

/// Cumulative sum of Chambers-Mallows-Stuck increments with scale dt^{1/alpha} * scale.
NoisePath sample_stable(double alpha, double scale, double skew, const UniformGrid& grid,
                        std::uint64_t seed, std::uint64_t stream);

/// Keeps every `factor`-th value: the same path seen on a grid with step factor * dt.
NoisePath coarsen(const NoisePath& fine, std::size_t factor);

/// Iterated-logarithm envelope sqrt(2 qv loglog qv) of int sigma dB.
class SigmaEnvelope {
 public:
  /// qv is integrated numerically from sigma.
  explicit SigmaEnvelope(std::function<double(double)> sigma, std::string description = "sigma");
  static SigmaEnvelope constant(double sigma0);
  /// sigma(t) = t^alpha, qv(t) = t^{2 alpha + 1} / (2 alpha + 1).
  static SigmaEnvelope power(double alpha);
  static SigmaEnvelope expression(const std::string& text);

  double sigma(double t) const { return sigma_(t); }
  /// int_0^t sigma^2.
  double qv(double t) const;
  bool defined_at(double t) const { return qv(t) > std::exp(1.0); }
  /// Throws DomainError where qv(t) <= e.
  double operator()(double t) const;
  const std::string& description() const noexcept { return description_; }

 private:
  std::function<double(double)> sigma_;
  std::function<double(double)> qv_closed_;
  std::string description_;
};

enum class Integrability { finite, infinite };

const char* to_string(Integrability v);

/// Whether int_0^inf gamma(s)^{-alpha} ds converges. Power envelopes are
/// decided by the p-integral test (boundary counts as divergent); others by
/// quadrature up to `horizon` and the log-log tail slope of the integrand.
Integrability envelope_integrability(const Envelope& gamma, double alpha, double horizon);

}  // namespace volterra
