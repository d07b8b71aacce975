#pragma once

#include "msw/ratio.hpp"

#include <cstdint>
#include <string_view>

namespace msw::bounds {

/// Inputs to the rate and concentration bounds. Unspecified absolute constants default to 1.
struct BoundParams {
  double p = 2.0;
  /// Moment order, s > 2p.
  double s = 5.0;
  /// Dimension for the finite-dimensional bounds.
  double d = 1.0;
  /// Eigenvalue decay exponent.
  double gamma = 1.0;
  double c_user = 1.0;
  double C_user = 1.0;
  /// Moment M_s; carried for callers composing Markov terms.
  double moment = 1.0;

  /// Throws DomainError unless p >= 1, s > 2p, gamma > 0, d >= 1 and c, C > 0.
  void validate() const;
};

/// C log(2n+1)^{p/s + 1/2} sqrt(d / n), a bound on E[MSW_p^p].
double expectation_bound_finite(const BoundParams& params, std::uint64_t n);
/// C log(2n+1)^{p/s + 1/2 + 1/gamma} / sqrt(n).
double expectation_bound_exp_decay(const BoundParams& params, std::uint64_t n);
/// C log(2n+1)^{p/s} / n^{1/2 - 1/(2 p gamma)}. Throws DomainError unless gamma > 1 and p gamma > 1.
double expectation_bound_poly_decay(const BoundParams& params, std::uint64_t n);

/// Natural log of expectation_bound_finite as a function of log n, valid far beyond 2^64.
double log_expectation_bound_finite(const BoundParams& params, double log_n);

enum class BoundKind { Finite, ExpDecay, PolyDecay, RatioFinite, RatioExp, RatioPoly };

/// Parses "finite", "exp_decay", "poly_decay", "ratio_finite", "ratio_exp", "ratio_poly".
/// Throws DomainError for anything else.
BoundKind parse_kind(std::string_view name);
const char* to_string(BoundKind kind);

/// Tail probability bounds P(statistic >= eps), raw and clipped at 1:
///   finite        e^{-n eps^2/2} + 8 e^{log(2n+1)[2(d+1) - n eps^2/64]}
///   exp_decay     C e^{c log(2n+1)^{1+1/gamma} - n eps^2/64} + C / (n eps^2)^{s/(2p)}
///   poly_decay    C e^{4 n^{1/(1+p gamma)} log(2n+1) - n eps^2/64} + C eps^{-s/p} n^{-s gamma/(2(1+p gamma))}
///   ratio_finite  8 e^{(d+1) log(2n+1) - n eps^2/4}
///   ratio_exp     C e^{C log(2n+1)^{1+1/gamma} - c n eps^2}
///   ratio_poly    e^{C log(2n+1) n^{1/gamma} - c n eps^2/64}
/// Throws DomainError for eps <= 0 or invalid params.
BoundValue concentration_bound(BoundKind kind, const BoundParams& params, std::uint64_t n, double eps);

}  // namespace msw::bounds
