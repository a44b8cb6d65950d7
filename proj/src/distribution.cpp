#include "eml/distribution.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace eml {

namespace {

// Continued fraction for I_x(a, b); converges quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double incomplete_beta_with_norm(double a, double b, double x, double log_norm) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(log_norm + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double parse_number(std::string_view s, std::string_view what) {
  std::string buf(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(buf, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("distribution: bad " + std::string(what) + " '" + buf + "'");
  }
  if (used != buf.size()) throw std::invalid_argument("distribution: bad " + std::string(what) + " '" + buf + "'");
  return v;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: shapes must be positive");
  return incomplete_beta_with_norm(a, b, x, -log_beta_fn(a, b));
}

Distribution Distribution::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta distribution: shapes must be positive and finite");
  }
  Distribution d(Beta{alpha, beta});
  d.log_norm_ = -log_beta_fn(alpha, beta);
  return d;
}

Distribution Distribution::degenerate(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("degenerate distribution: value must lie in [0,1]");
  return Distribution(Degenerate{value});
}

Distribution Distribution::parse(std::string_view text) {
  if (text == "uniform" || text == "uniform01") return uniform();
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "beta") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("distribution: expected beta:<alpha>,<beta>");
    return beta(parse_number(args.substr(0, comma), "alpha"), parse_number(args.substr(comma + 1), "beta"));
  }
  if (head == "degenerate" && !args.empty()) return degenerate(parse_number(args, "value"));
  throw std::invalid_argument("distribution: unknown spec '" + std::string(text) + "'");
}

std::string Distribution::to_string() const {
  struct Visitor {
    std::string operator()(const Uniform01&) const { return "uniform"; }
    std::string operator()(const Beta& b) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "beta:%g,%g", b.alpha, b.beta);
      return buf;
    }
    std::string operator()(const Degenerate& d) const {
      char buf[48];
      std::snprintf(buf, sizeof buf, "degenerate:%g", d.value);
      return buf;
    }
  };
  return std::visit(Visitor{}, kind_);
}

double Distribution::cdf(double x) const {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* dg = std::get_if<Degenerate>(&kind_)) return x >= dg->value ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (const auto* b = std::get_if<Beta>(&kind_)) return incomplete_beta_with_norm(b->alpha, b->beta, x, log_norm_);
  return x;
}

double Distribution::mean() const {
  if (const auto* b = std::get_if<Beta>(&kind_)) return b->alpha / (b->alpha + b->beta);
  if (const auto* dg = std::get_if<Degenerate>(&kind_)) return dg->value;
  return 0.5;
}

double Distribution::sample(Rng& rng) const {
  if (const auto* b = std::get_if<Beta>(&kind_)) {
    std::gamma_distribution<double> ga(b->alpha, 1.0);
    std::gamma_distribution<double> gb(b->beta, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
  }
  if (const auto* dg = std::get_if<Degenerate>(&kind_)) return dg->value;
  return rng.uniform01();
}

bool operator==(const Distribution& a, const Distribution& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  if (const auto* x = std::get_if<Distribution::Beta>(&a.kind_)) {
    const auto& y = std::get<Distribution::Beta>(b.kind_);
    return x->alpha == y.alpha && x->beta == y.beta;
  }
  if (const auto* x = std::get_if<Distribution::Degenerate>(&a.kind_)) {
    return x->value == std::get<Distribution::Degenerate>(b.kind_).value;
  }
  return true;
}

}  // namespace eml
