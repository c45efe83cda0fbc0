#include "linflow/probit.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace linflow {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kTinyPositive = std::numeric_limits<double>::denorm_min();
// Largest double below 1.
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

// Acklam's rational approximation to the normal quantile, good to ~1.2e-9
// before refinement.
double quantile_estimate(double p) {
    static constexpr std::array<double, 6> a = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 6> b = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01,  -1.328068155288572e+01, 1.0};
    static constexpr std::array<double, 6> c = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 5> d = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00, 1.0};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double phi_pdf(double t) {
    double p = kInvSqrt2Pi * std::exp(-0.5 * t * t);
    return p > 0.0 ? p : kTinyPositive;
}

double phi_cdf(double t) {
    return 0.5 * std::erfc(-t * kInvSqrt2);
}

double phi_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("phi_inv: p must lie in (0, 1)");
    }
    double x = quantile_estimate(p);
    // Two Halley refinements against the stable cdf; skipped where the pdf
    // underflows (|x| > ~38.6, i.e. p outside the refinable range).
    for (int i = 0; i < 2; ++i) {
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        if (pdf <= 0.0) break;
        double err = phi_cdf(x) - p;
        double u = err / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double v_correction(double t) {
    if (t < -37.0) {
        // Phi(t) is at or below the edge of the subnormal range; use the
        // Laplace continued fraction for the inverse Mills ratio,
        // v(-s) = s + K(s) with K(s) = 1/(s + 2/(s + 3/(s + ...))).
        double s = -t;
        double frac = 0.0;
        for (int k = 100; k >= 1; --k) {
            frac = static_cast<double>(k) / (s + frac);
        }
        return s + frac;
    }
    return phi_pdf(t) / phi_cdf(t);
}

double w_correction(double t) {
    double w;
    if (t < -37.0) {
        double s = -t;
        double frac = 0.0;
        for (int k = 100; k >= 1; --k) {
            frac = static_cast<double>(k) / (s + frac);
        }
        // v = s + frac, v + t = frac: avoids the cancellation in v + t.
        w = (s + frac) * frac;
    } else {
        double v = v_correction(t);
        w = v * (v + t);
    }
    if (w < kTinyPositive) return kTinyPositive;
    if (w > kBelowOne) return kBelowOne;
    return w;
}

}  // namespace linflow
