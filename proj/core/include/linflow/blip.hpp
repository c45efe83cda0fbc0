#pragma once

#include <span>
#include <vector>

#include "linflow/features.hpp"
#include "linflow/rng.hpp"

namespace linflow {

// One labelled impression: the encoded feature vector and whether the
// binary success reward fired.
struct Observation {
    FeatureVector features;
    bool label = false;
};

// Factorized Gaussian posterior over linear probit weights: an independent
// Normal(mean[j], variance[j]) per feature, with the probit scale beta.
// Updates are closed-form moment matching of the exact tilted posterior
// back onto this family.
class GaussianPosterior {
  public:
    GaussianPosterior(int dim, double prior_mean, double prior_variance, double beta);
    // From an explicit snapshot (mean[], variance[], beta).
    GaussianPosterior(std::vector<double> mean, std::vector<double> variance, double beta);

    int dim() const { return static_cast<int>(mean_.size()); }
    double beta() const { return beta_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& variance() const { return variance_; }

    // Independent draw W_j ~ Normal(mean[j], variance[j]).
    std::vector<double> sample_weights(Rng& rng) const;
    void sample_weights_into(Rng& rng, std::span<double> out) const;

    // Phi(b.w / beta): the success probability under sampled weights w.
    double predict_success(std::span<const double> weights, std::span<const double> features) const;

    // Moment-matched posterior after observing (features, label). Variances
    // strictly shrink on every coordinate with a nonzero feature.
    void update(const Observation& obs);
    // Sequential fold of update over the batch, in the given order.
    void update_batch(std::span<const Observation> batch);

  private:
    std::vector<double> mean_;
    std::vector<double> variance_;
    double beta_;
};

}  // namespace linflow
