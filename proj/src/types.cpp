#include "dwh/types.hpp"

namespace dwh {

bool operator==(const ModelDims& a, const ModelDims& b) {
    return a.vocab_size == b.vocab_size && a.bin_count == b.bin_count &&
           a.latent_dim == b.latent_dim;
}

HarmoniumParams zero_params(const ModelDims& dims) {
    HarmoniumParams p;
    p.dims = dims;
    p.alpha = Vector::Zero(dims.vocab_size);
    p.beta = Vector::Zero(dims.bin_count);
    p.sigma = Vector::Ones(dims.bin_count);
    p.W = Matrix::Zero(dims.vocab_size, dims.latent_dim);
    p.U = Matrix::Zero(dims.bin_count, dims.latent_dim);
    return p;
}

Observation make_observation(const Vector& word_counts, const Vector& histogram) {
    Observation obs;
    obs.word_counts = word_counts.sparseView();
    obs.histogram = histogram;
    return obs;
}

Vector dense_counts(const Observation& obs) {
    return Vector(obs.word_counts);
}

double count_sum(const Observation& obs) {
    return obs.word_counts.sum();
}

Gradients Gradients::zero(const ModelDims& dims) {
    Gradients g;
    g.d_alpha = Vector::Zero(dims.vocab_size);
    g.d_beta = Vector::Zero(dims.bin_count);
    g.d_inv_sigma = Vector::Zero(dims.bin_count);
    g.d_W = Matrix::Zero(dims.vocab_size, dims.latent_dim);
    g.d_U = Matrix::Zero(dims.bin_count, dims.latent_dim);
    return g;
}

Vector Gradients::flatten() const {
    const Index n = d_alpha.size() + d_beta.size() + d_inv_sigma.size() + d_W.size() + d_U.size();
    Vector flat(n);
    Index at = 0;
    flat.segment(at, d_alpha.size()) = d_alpha;
    at += d_alpha.size();
    flat.segment(at, d_beta.size()) = d_beta;
    at += d_beta.size();
    flat.segment(at, d_inv_sigma.size()) = d_inv_sigma;
    at += d_inv_sigma.size();
    flat.segment(at, d_W.size()) = Eigen::Map<const Vector>(d_W.data(), d_W.size());
    at += d_W.size();
    flat.segment(at, d_U.size()) = Eigen::Map<const Vector>(d_U.data(), d_U.size());
    return flat;
}

double Gradients::norm() const {
    return flatten().norm();
}

bool Gradients::all_finite() const {
    return d_alpha.allFinite() && d_beta.allFinite() && d_inv_sigma.allFinite() &&
           d_W.allFinite() && d_U.allFinite();
}

}  // namespace dwh
