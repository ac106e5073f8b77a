#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "vbrl/pendulum.hpp"

namespace vbrl {

enum class FourierCoupling {
  full,          // every c in {0..order}^2
  axis_aligned,  // c = 0 plus (k,0) and (0,k) for k = 1..order
};

/// Cosine basis cos(pi c^T s) over the pendulum state normalized to [0,1]^2
/// (angle from [-pi/2, pi/2], velocity from [-5, 5]).
///
/// Coefficients are enumerated lexicographically with the angle coefficient
/// varying slowest, so feature 0 is always the constant c = (0,0).
class FourierBasis {
 public:
  explicit FourierBasis(int order, FourierCoupling coupling = FourierCoupling::full);

  int order() const noexcept { return order_; }
  FourierCoupling coupling() const noexcept { return coupling_; }
  int size() const noexcept { return static_cast<int>(coeffs_.size()); }
  const std::vector<std::array<int, 2>>& coefficients() const noexcept { return coeffs_; }

  /// Throws pendulum::ContractViolation when the state is outside the
  /// normalization box.
  Eigen::VectorXd featurize(const pendulum::State& s) const;
  void featurize(const pendulum::State& s, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  int order_;
  FourierCoupling coupling_;
  std::vector<std::array<int, 2>> coeffs_;
};

}  // namespace vbrl
