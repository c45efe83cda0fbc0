#include "linflow/blip.hpp"

#include <cmath>
#include <stdexcept>

#include "linflow/probit.hpp"

namespace linflow {

GaussianPosterior::GaussianPosterior(int dim, double prior_mean, double prior_variance, double beta)
    : mean_(static_cast<std::size_t>(dim > 0 ? dim : 0), prior_mean),
      variance_(static_cast<std::size_t>(dim > 0 ? dim : 0), prior_variance),
      beta_(beta) {
    if (dim < 1) throw std::invalid_argument("GaussianPosterior: dim must be >= 1");
    if (!(prior_variance > 0.0)) throw std::invalid_argument("GaussianPosterior: prior variance must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("GaussianPosterior: beta must be > 0");
}

GaussianPosterior::GaussianPosterior(std::vector<double> mean, std::vector<double> variance,
                                     double beta)
    : mean_(std::move(mean)), variance_(std::move(variance)), beta_(beta) {
    if (mean_.empty()) throw std::invalid_argument("GaussianPosterior: dim must be >= 1");
    if (variance_.size() != mean_.size()) {
        throw std::invalid_argument("GaussianPosterior: mean/variance length mismatch");
    }
    for (double v : variance_) {
        if (!(v > 0.0)) throw std::invalid_argument("GaussianPosterior: variances must be > 0");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("GaussianPosterior: beta must be > 0");
}

std::vector<double> GaussianPosterior::sample_weights(Rng& rng) const {
    std::vector<double> w(mean_.size());
    sample_weights_into(rng, w);
    return w;
}

void GaussianPosterior::sample_weights_into(Rng& rng, std::span<double> out) const {
    if (out.size() != mean_.size()) {
        throw std::invalid_argument("sample_weights: output span has wrong length");
    }
    for (std::size_t j = 0; j < mean_.size(); ++j) {
        out[j] = mean_[j] + std::sqrt(variance_[j]) * rng.gaussian();
    }
}

double GaussianPosterior::predict_success(std::span<const double> weights,
                                          std::span<const double> features) const {
    if (weights.size() != features.size()) {
        throw std::invalid_argument("predict_success: dimension mismatch");
    }
    double dot = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) dot += weights[j] * features[j];
    return phi_cdf(dot / beta_);
}

void GaussianPosterior::update(const Observation& obs) {
    const auto& b = obs.features;
    if (b.size() != mean_.size()) throw std::invalid_argument("update: dimension mismatch");
    const double y = obs.label ? 1.0 : -1.0;

    double dot = 0.0;
    double total_var = beta_ * beta_;
    for (std::size_t j = 0; j < b.size(); ++j) {
        dot += b[j] * mean_[j];
        total_var += b[j] * b[j] * variance_[j];
    }
    const double sigma = std::sqrt(total_var);
    const double t = y * dot / sigma;
    const double v = v_correction(t);
    const double w = w_correction(t);

    for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] == 0.0) continue;
        mean_[j] += y * b[j] * (variance_[j] / sigma) * v;
        variance_[j] *= 1.0 - (b[j] * b[j] * variance_[j] / total_var) * w;
    }
}

void GaussianPosterior::update_batch(std::span<const Observation> batch) {
    for (const Observation& obs : batch) update(obs);
}

}  // namespace linflow
