#pragma once

namespace spherefield {

// Standard normal CDF via erfc (accurate in both tails).
double normal_cdf(double z);

double normal_pdf(double z);

// Inverse of normal_cdf for p in (0, 1): rational initial guess (Acklam)
// polished with one Halley step, |normal_cdf(z) - p| < 1e-9 throughout.
// Throws OutOfDomain outside (0, 1).
double std_normal_quantile(double p);

}  // namespace spherefield
