#include "vbrl/fourier.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vbrl {

FourierBasis::FourierBasis(int order, FourierCoupling coupling) : order_(order), coupling_(coupling) {
  if (order < 1) throw std::invalid_argument("Fourier order must be positive");
  for (int ca = 0; ca <= order; ++ca) {
    for (int cv = 0; cv <= order; ++cv) {
      if (coupling == FourierCoupling::axis_aligned && ca != 0 && cv != 0) continue;
      coeffs_.push_back({ca, cv});
    }
  }
}

Eigen::VectorXd FourierBasis::featurize(const pendulum::State& s) const {
  Eigen::VectorXd out(size());
  featurize(s, out);
  return out;
}

void FourierBasis::featurize(const pendulum::State& s, Eigen::Ref<Eigen::VectorXd> out) const {
  if (!(std::abs(s.angle) <= pendulum::kMaxAngle) ||
      !(std::abs(s.velocity) <= pendulum::kMaxVelocity)) {
    throw pendulum::ContractViolation("state (" + std::to_string(s.angle) + ", " +
                                      std::to_string(s.velocity) +
                                      ") outside the Fourier normalization box");
  }
  const double a = (s.angle + pendulum::kMaxAngle) / (2.0 * pendulum::kMaxAngle);
  const double v = (s.velocity + pendulum::kMaxVelocity) / (2.0 * pendulum::kMaxVelocity);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        std::cos(std::numbers::pi * (coeffs_[i][0] * a + coeffs_[i][1] * v));
  }
}

}  // namespace vbrl
