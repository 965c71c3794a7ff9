#include "qiup/reference_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qiup::reference {

namespace {

void check_domain(double beta1) {
  if (!(beta1 >= 0.0 && beta1 <= 1.0)) {
    throw std::domain_error("beta1 must lie in [0, 1], got " + std::to_string(beta1));
  }
}

}  // namespace

double nh_closed(double beta1, double gamma, double phi) {
  check_domain(beta1);
  const double d = gamma - phi;
  return (8.0 - 3.0 * beta1 * beta1 + beta1 * (std::sin(d) - std::cos(d)) - 2.0 * beta1 * std::cos(phi)) / 16.0;
}

double nv_closed(double beta1, double gamma, double phi) {
  check_domain(beta1);
  return (5.0 + 2.0 * beta1 * (std::cos(gamma - phi) + std::cos(phi))) / 16.0;
}

double visibility_closed(double beta1) {
  check_domain(beta1);
  return 4.0 * beta1 / 5.0;
}

}  // namespace qiup::reference
