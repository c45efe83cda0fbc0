#pragma once

namespace linflow {

// Standard normal density. Underflow (|t| > ~38.6) is clamped to the
// smallest positive double so the result is strictly positive for any
// finite input.
double phi_pdf(double t);

// Standard normal cumulative distribution, evaluated through erfc so the
// lower tail keeps full relative precision (never 1 - phi_cdf(-t)).
double phi_cdf(double t);

// Inverse of phi_cdf on (0, 1). Throws std::domain_error outside the open
// interval. |phi_cdf(phi_inv(p)) - p| <= 1e-10 over the full domain.
double phi_inv(double p);

// v(t) = phi_pdf(t) / phi_cdf(t), the truncated-Gaussian mean correction.
// Stable for arbitrarily negative t: below the cdf's representable range
// it switches to the Laplace continued fraction for the inverse Mills
// ratio. Satisfies v(t) > 0 and v(t) + t > 0 for all finite t.
double v_correction(double t);

// w(t) = v(t) * (v(t) + t), the truncated-Gaussian variance correction.
// Lies strictly inside (0, 1) for all finite t.
double w_correction(double t);

}  // namespace linflow
