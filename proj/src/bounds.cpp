#include "msw/bounds.hpp"

#include "msw/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msw::bounds {

void BoundParams::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("bounds: p must be >= 1");
  if (!(s > 2.0 * p)) throw DomainError("bounds: s must exceed 2p");
  if (!(gamma > 0.0)) throw DomainError("bounds: gamma must be positive");
  if (!(d >= 1.0)) throw DomainError("bounds: d must be >= 1");
  if (!(c_user > 0.0) || !(C_user > 0.0)) throw DomainError("bounds: constants must be positive");
}

namespace {

double log2n1(std::uint64_t n) {
  if (n < 1) throw DomainError("bounds: n must be >= 1");
  return std::log(2.0 * static_cast<double>(n) + 1.0);
}

BoundValue clip(double raw) { return BoundValue{raw, std::min(1.0, raw)}; }

}  // namespace

double expectation_bound_finite(const BoundParams& params, std::uint64_t n) {
  params.validate();
  const double l = log2n1(n);
  return params.C_user * std::pow(l, params.p / params.s + 0.5) * std::sqrt(params.d / static_cast<double>(n));
}

double expectation_bound_exp_decay(const BoundParams& params, std::uint64_t n) {
  params.validate();
  const double l = log2n1(n);
  return params.C_user * std::pow(l, params.p / params.s + 0.5 + 1.0 / params.gamma) /
         std::sqrt(static_cast<double>(n));
}

double expectation_bound_poly_decay(const BoundParams& params, std::uint64_t n) {
  params.validate();
  if (!(params.gamma > 1.0) || !(params.p * params.gamma > 1.0)) {
    throw DomainError("expectation_bound_poly_decay: requires gamma > 1 and p * gamma > 1");
  }
  const double l = log2n1(n);
  const double rate = 0.5 - 1.0 / (2.0 * params.p * params.gamma);
  return params.C_user * std::pow(l, params.p / params.s) / std::pow(static_cast<double>(n), rate);
}

double log_expectation_bound_finite(const BoundParams& params, double log_n) {
  params.validate();
  if (!(log_n >= 0.0)) throw DomainError("log_expectation_bound_finite: log n must be >= 0");
  // log(2n + 1) = log n + log(2 + 1/n)
  const double l = log_n + std::log(2.0 + std::exp(-log_n));
  return std::log(params.C_user) + (params.p / params.s + 0.5) * std::log(l) + 0.5 * std::log(params.d) -
         0.5 * log_n;
}

BoundKind parse_kind(std::string_view name) {
  if (name == "finite") return BoundKind::Finite;
  if (name == "exp_decay") return BoundKind::ExpDecay;
  if (name == "poly_decay") return BoundKind::PolyDecay;
  if (name == "ratio_finite") return BoundKind::RatioFinite;
  if (name == "ratio_exp") return BoundKind::RatioExp;
  if (name == "ratio_poly") return BoundKind::RatioPoly;
  throw DomainError("unknown bound kind '" + std::string(name) + "'");
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Finite:
      return "finite";
    case BoundKind::ExpDecay:
      return "exp_decay";
    case BoundKind::PolyDecay:
      return "poly_decay";
    case BoundKind::RatioFinite:
      return "ratio_finite";
    case BoundKind::RatioExp:
      return "ratio_exp";
    case BoundKind::RatioPoly:
      return "ratio_poly";
  }
  return "unknown";
}

BoundValue concentration_bound(BoundKind kind, const BoundParams& params, std::uint64_t n, double eps) {
  params.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("concentration_bound: eps must be positive");
  const double nn = static_cast<double>(n);
  const double l = log2n1(n);
  const double ne2 = nn * eps * eps;
  const double p = params.p;
  const double s = params.s;
  const double g = params.gamma;
  const double c = params.c_user;
  const double C = params.C_user;
  switch (kind) {
    case BoundKind::Finite:
      return clip(std::exp(-ne2 / 2.0) + 8.0 * std::exp(l * (2.0 * (params.d + 1.0) - ne2 / 64.0)));
    case BoundKind::ExpDecay:
      return clip(C * std::exp(c * std::pow(l, 1.0 + 1.0 / g) - ne2 / 64.0) + C / std::pow(ne2, s / (2.0 * p)));
    case BoundKind::PolyDecay: {
      const double e = 1.0 + p * g;
      return clip(C * std::exp(4.0 * std::pow(nn, 1.0 / e) * l - ne2 / 64.0) +
                  C * std::pow(eps, -s / p) * std::pow(nn, -s * g / (2.0 * e)));
    }
    case BoundKind::RatioFinite:
      return ratio_tail_bound(n, static_cast<std::uint64_t>(params.d), eps);
    case BoundKind::RatioExp:
      return clip(C * std::exp(C * std::pow(l, 1.0 + 1.0 / g) - c * ne2));
    case BoundKind::RatioPoly:
      return clip(std::exp(C * l * std::pow(nn, 1.0 / g) - c * ne2 / 64.0));
  }
  throw DomainError("concentration_bound: unknown kind");
}

}  // namespace msw::bounds
