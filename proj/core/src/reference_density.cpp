#include "divkit/reference_density.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "divkit/errors.hpp"

namespace divkit {

ReferenceDensity ReferenceDensity::gaussian(Eigen::VectorXd mean, double temperature) {
  if (mean.size() == 0) throw InvalidArgument("Gaussian needs a nonempty mean vector");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("Gaussian temperature must be positive");
  }
  ReferenceDensity d;
  d.kind_ = Kind::Gaussian;
  d.dim_ = static_cast<std::size_t>(mean.size());
  d.mean_ = std::move(mean);
  d.temperature_ = temperature;
  return d;
}

ReferenceDensity ReferenceDensity::maxwellian(std::size_t dim, double temperature) {
  return gaussian(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), temperature);
}

ReferenceDensity ReferenceDensity::inverse_gamma(double mu) {
  if (!(mu > 1.0) || !std::isfinite(mu)) throw InvalidArgument("inverse-Gamma index must exceed 1");
  ReferenceDensity d;
  d.kind_ = Kind::InverseGamma;
  d.dim_ = 1;
  d.mean_ = Eigen::VectorXd::Ones(1);
  d.mu_ = mu;
  d.temperature_ = mu > 2.0 ? 1.0 / (mu - 2.0) : std::numeric_limits<double>::infinity();
  return d;
}

double ReferenceDensity::log_pdf(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionMismatch("density evaluated at a point of wrong dimension");
  if (kind_ == Kind::Gaussian) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = x[k] - mean_(static_cast<Eigen::Index>(k));
      r2 += d * d;
    }
    return -0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * temperature_) -
           r2 / (2.0 * temperature_);
  }
  const double w = x[0];
  if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
  const double beta = mu_ - 1.0;
  return mu_ * std::log(beta) - std::lgamma(mu_) - (1.0 + mu_) * std::log(w) - beta / w;
}

double ReferenceDensity::pdf(std::span<const double> x) const { return std::exp(log_pdf(x)); }

void ReferenceDensity::score(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_ || out.size() != dim_) throw DimensionMismatch("score evaluated with wrong dimension");
  if (kind_ == Kind::Gaussian) {
    for (std::size_t k = 0; k < dim_; ++k) out[k] = -(x[k] - mean_(static_cast<Eigen::Index>(k))) / temperature_;
    return;
  }
  const double w = x[0];
  out[0] = -(1.0 + mu_) / w + (mu_ - 1.0) / (w * w);
}

double ReferenceDensity::entropy() const {
  if (kind_ == Kind::Gaussian) {
    return 0.5 * static_cast<double>(dim_) * (1.0 + std::log(2.0 * std::numbers::pi * temperature_));
  }
  const double beta = mu_ - 1.0;
  return mu_ + std::log(beta) + std::lgamma(mu_) - (1.0 + mu_) * boost::math::digamma(mu_);
}

double ReferenceDensity::fisher() const {
  if (kind_ == Kind::Gaussian) return static_cast<double>(dim_) / temperature_;
  const double beta = mu_ - 1.0;
  return mu_ * (mu_ + 1.0) * (mu_ + 3.0) / (beta * beta);
}

double ReferenceDensity::cdf(double x) const {
  if (dim_ != 1) throw InvalidArgument("cdf is defined for one-dimensional densities only");
  if (kind_ == Kind::Gaussian) {
    return 0.5 * boost::math::erfc(-(x - mean_(0)) / std::sqrt(2.0 * temperature_));
  }
  if (x <= 0.0) return 0.0;
  // 1/W ~ Gamma(mu, rate mu - 1), so P(W <= x) = Q(mu, (mu - 1)/x).
  return boost::math::gamma_q(mu_, (mu_ - 1.0) / x);
}

double ReferenceDensity::survival(double x) const {
  if (dim_ != 1) throw InvalidArgument("survival is defined for one-dimensional densities only");
  if (kind_ == Kind::Gaussian) {
    return 0.5 * boost::math::erfc((x - mean_(0)) / std::sqrt(2.0 * temperature_));
  }
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_p(mu_, (mu_ - 1.0) / x);
}

double ReferenceDensity::quantile(double q) const {
  if (dim_ != 1) throw InvalidArgument("quantile is defined for one-dimensional densities only");
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
  if (kind_ == Kind::Gaussian) {
    return mean_(0) - std::sqrt(2.0 * temperature_) * boost::math::erfc_inv(2.0 * q);
  }
  return (mu_ - 1.0) / boost::math::gamma_q_inv(mu_, q);
}

}  // namespace divkit
