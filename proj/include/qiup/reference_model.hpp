#pragma once

// Closed-form detector counts for the two-crystal circuit in the regime
// beta2 = 1, theta = 45 deg, alpha1 = sqrt(1 - beta1^2).
// Kept free of any dependency on the evolution engine.

namespace qiup::reference {

/// (8 - 3 b^2 + b (sin(g - p) - cos(g - p)) - 2 b cos p) / 16
double nh_closed(double beta1, double gamma, double phi);

/// (5 + 2 b (cos(g - p) + cos p)) / 16
double nv_closed(double beta1, double gamma, double phi);

/// Vertical-channel fringe visibility at gamma = 0: 4 b / 5.
double visibility_closed(double beta1);

}  // namespace qiup::reference
