#pragma once

#include <array>
#include <span>
#include <vector>

#include "omix/matrix.hpp"

namespace omix::losses {

// valid (anchor, positive, negative) index triples inside one batch
struct TripletBatch {
    std::vector<std::array<int, 3>> triples;

    bool empty() const { return triples.empty(); }
    std::size_t size() const { return triples.size(); }
};

// All possible triples of a batch: anchor/positive share a label, negative
// has the opposite one. Deterministic (a, p, n) lexicographic order. A batch
// with a single class yields an empty set.
TripletBatch mine_all_triplets(std::span<const int> labels);

// Mean negative log-likelihood with predictions clamped to
// [1e-7, 1 - 1e-7]. grad (optional) receives dL/dprediction; entries whose
// clamp is active get 0, the subgradient of the clamped loss.
double bce_loss(std::span<const double> predictions, std::span<const int> targets,
                std::span<double> grad);

// Elementwise BCE between two same-shaped matrices (VAE reconstruction term),
// mean over all entries. grad accumulates d/d(recon) scaled by `scale`.
double bce_matrix_loss(const Matrix& target, const Matrix& recon, Matrix* grad,
                       double scale);

// sum over triples of [ d2(a,p) - d2(a,n) + margin ]+ with squared euclidean
// distances; grad (same shape as embeddings) receives the exact subgradient
// (zero where the hinge is inactive). Fast path: per-pair coefficients folded
// into one B x B weight matrix, then a single matmul.
double triplet_loss(const Matrix& embeddings, const TripletBatch& triplets,
                    double margin, Matrix* grad);

// plain per-triple reference, kept as the independent oracle for the fast path
double triplet_loss_reference(const Matrix& embeddings, const TripletBatch& triplets,
                              double margin, Matrix* grad);

// classification + gamma * triplet
double combined_loss(double classification, double triplet, double gamma);

// sum_d 0.5 * (sigma^2 + mu^2 - 1 - ln sigma^2) with sigma parameterized as
// log-variance. Optional grads accumulate d/dmu and d/dlogvar scaled by
// `scale`.
double kl_divergence(std::span<const double> mu, std::span<const double> logvar,
                     std::span<double> grad_mu, std::span<double> grad_logvar,
                     double scale);

// (1/M) sum_i BCE(x_i, x_i') + mean-over-samples KL(N(mu,sigma) || N(0,1)).
// Row r of mu/logvar is sample r's latent distribution. Gradients land in the
// optional per-block recon grads and mu/logvar grads, scaled by `scale`.
double vae_embed_loss(const std::vector<const Matrix*>& inputs,
                      const std::vector<Matrix*>& recons, const Matrix& mu,
                      const Matrix& logvar, std::vector<Matrix*>* recon_grads,
                      Matrix* grad_mu, Matrix* grad_logvar, double scale);

// lambda * embed + cross-entropy
double vae_total_loss(double embed, double cross_entropy, double lambda);

// Mean cross-entropy of integer class labels against row-softmaxed logits;
// dlogits (optional) receives (softmax(z) - onehot) / n.
double softmax_ce_loss(const Matrix& logits, std::span<const int> labels,
                       Matrix* dlogits);

}  // namespace omix::losses
