#pragma once

namespace prsclt {

// Standard normal CDF via erfc; relative accuracy near machine precision.
double normal_cdf(double x);

// Standard normal quantile. Rational starting value refined by one Halley step.
double normal_quantile(double prob);

}  // namespace prsclt
