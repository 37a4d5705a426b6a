// normal.hpp
//
// Standard normal CDF and quantile. Self-contained double-precision
// routines; no external dependencies.
#pragma once

namespace mdstop {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, evaluated through the complementary error
/// function. Absolute error below 1e-15 over the working range; saturates
/// to 0/1 in the far tails instead of erroring.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0,1).
/// Wichura's AS 241 (PPND16) rational approximation followed by one
/// Newton step against normal_cdf. Throws std::domain_error outside (0,1).
double normal_quantile(double p);

} // namespace mdstop
