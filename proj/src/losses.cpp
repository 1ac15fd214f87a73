#include "omix/losses.hpp"

#include <cmath>

#include "omix/error.hpp"
#include "omix/kernels.hpp"
#include "omix/nn.hpp"

namespace omix::losses {

namespace {
constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) {
    if (p < kProbClamp) return kProbClamp;
    if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
    return p;
}
}  // namespace

TripletBatch mine_all_triplets(std::span<const int> labels) {
    TripletBatch out;
    const int n = static_cast<int>(labels.size());
    int positives = 0;
    for (int l : labels) positives += (l != 0);
    if (positives == 0 || positives == n) return out;

    for (int a = 0; a < n; ++a)
        for (int p = 0; p < n; ++p) {
            if (p == a || labels[p] != labels[a]) continue;
            for (int neg = 0; neg < n; ++neg)
                if (labels[neg] != labels[a]) out.triples.push_back({a, p, neg});
        }
    return out;
}

double bce_loss(std::span<const double> predictions, std::span<const int> targets,
                std::span<double> grad) {
    require(predictions.size() == targets.size(),
            "bce_loss: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(targets.size()) + " targets");
    require(predictions.size() > 0, "bce_loss: empty input");
    const double n = static_cast<double>(predictions.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = clamp_prob(predictions[i]);
        const double t = targets[i] ? 1.0 : 0.0;
        loss += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        if (!grad.empty()) {
            const bool clamped = predictions[i] < kProbClamp ||
                                 predictions[i] > 1.0 - kProbClamp;
            grad[i] = clamped ? 0.0 : (p - t) / (p * (1.0 - p)) / n;
        }
    }
    return loss / n;
}

double bce_matrix_loss(const Matrix& target, const Matrix& recon, Matrix* grad,
                       double scale) {
    require(target.same_shape(recon), "bce_matrix_loss: target " + target.shape_str() +
                                          " vs reconstruction " + recon.shape_str());
    require(!target.data.empty(), "bce_matrix_loss: empty matrices");
    const double n = static_cast<double>(target.data.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
        const double p = clamp_prob(recon.data[i]);
        const double t = target.data[i];
        loss += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        if (grad) {
            const bool clamped =
                recon.data[i] < kProbClamp || recon.data[i] > 1.0 - kProbClamp;
            if (!clamped)
                grad->data[i] += scale * ((p - t) / (p * (1.0 - p))) / n;
        }
    }
    return loss / n;
}

double triplet_loss_reference(const Matrix& embeddings, const TripletBatch& triplets,
                              double margin, Matrix* grad) {
    if (grad) grad->resize(embeddings.rows, embeddings.cols);
    double loss = 0.0;
    const std::size_t d = embeddings.cols;
    for (const auto& t : triplets.triples) {
        const double* ea = embeddings.row_ptr(t[0]);
        const double* ep = embeddings.row_ptr(t[1]);
        const double* en = embeddings.row_ptr(t[2]);
        double dp = 0.0, dn = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double vp = ea[k] - ep[k];
            const double vn = ea[k] - en[k];
            dp += vp * vp;
            dn += vn * vn;
        }
        const double v = dp - dn + margin;
        if (v > 0.0) {
            loss += v;
            if (grad) {
                double* ga = grad->row_ptr(t[0]);
                double* gp = grad->row_ptr(t[1]);
                double* gn = grad->row_ptr(t[2]);
                for (std::size_t k = 0; k < d; ++k) {
                    ga[k] += 2.0 * (en[k] - ep[k]);
                    gp[k] += -2.0 * (ea[k] - ep[k]);
                    gn[k] += 2.0 * (ea[k] - en[k]);
                }
            }
        }
    }
    return loss;
}

double triplet_loss(const Matrix& embeddings, const TripletBatch& triplets,
                    double margin, Matrix* grad) {
    if (grad) grad->resize(embeddings.rows, embeddings.cols);
    if (triplets.empty()) return 0.0;

    const std::size_t b = embeddings.rows;
    Matrix d2;
    kernels::pairwise_sqdist(embeddings, d2);

    // net coefficient of d2(i,j) over all active hinges
    Matrix coef(b, b);
    double loss = 0.0;
    for (const auto& t : triplets.triples) {
        const double v = d2.at(t[0], t[1]) - d2.at(t[0], t[2]) + margin;
        if (v > 0.0) {
            loss += v;
            coef.at(t[0], t[1]) += 1.0;
            coef.at(t[0], t[2]) -= 1.0;
        }
    }
    if (!grad) return loss;

    // dL/de_i = 2 * sum_j w_ij (e_i - e_j) with w_ij = coef_ij + coef_ji
    Matrix w(b, b);
    std::vector<double> row_sum(b, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            const double v = coef.at(i, j) + coef.at(j, i);
            w.at(i, j) = v;
            row_sum[i] += v;
        }
    Matrix we;
    kernels::matmul_nn(w, embeddings, we);
    for (std::size_t i = 0; i < b; ++i) {
        const double* ei = embeddings.row_ptr(i);
        const double* wei = we.row_ptr(i);
        double* gi = grad->row_ptr(i);
        for (std::size_t k = 0; k < embeddings.cols; ++k)
            gi[k] = 2.0 * (row_sum[i] * ei[k] - wei[k]);
    }
    return loss;
}

double combined_loss(double classification, double triplet, double gamma) {
    return classification + gamma * triplet;
}

double kl_divergence(std::span<const double> mu, std::span<const double> logvar,
                     std::span<double> grad_mu, std::span<double> grad_logvar,
                     double scale) {
    require(mu.size() == logvar.size(), "kl_divergence: mu and logvar sizes differ");
    double loss = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        require(std::isfinite(mu[i]) && std::isfinite(logvar[i]),
                "kl_divergence: non-finite input at dim " + std::to_string(i));
        const double var = std::exp(logvar[i]);
        loss += 0.5 * (var + mu[i] * mu[i] - 1.0 - logvar[i]);
        if (!grad_mu.empty()) grad_mu[i] += scale * mu[i];
        if (!grad_logvar.empty()) grad_logvar[i] += scale * 0.5 * (var - 1.0);
    }
    return loss;
}

double vae_embed_loss(const std::vector<const Matrix*>& inputs,
                      const std::vector<Matrix*>& recons, const Matrix& mu,
                      const Matrix& logvar, std::vector<Matrix*>* recon_grads,
                      Matrix* grad_mu, Matrix* grad_logvar, double scale) {
    require(!inputs.empty(), "vae_embed_loss: no omics blocks");
    require(inputs.size() == recons.size(),
            "vae_embed_loss: input/reconstruction block counts differ");
    const double m = static_cast<double>(inputs.size());

    double recon_loss = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        require(inputs[i]->same_shape(*recons[i]),
                "vae_embed_loss: block " + std::to_string(i) + " input " +
                    inputs[i]->shape_str() + " vs reconstruction " +
                    recons[i]->shape_str());
        Matrix* g = recon_grads ? (*recon_grads)[i] : nullptr;
        recon_loss += bce_matrix_loss(*inputs[i], *recons[i], g, scale / m);
    }
    recon_loss /= m;

    // KL averaged over the batch, summed over latent dims
    const double batch = static_cast<double>(mu.rows);
    double kl = 0.0;
    for (std::size_t r = 0; r < mu.rows; ++r) {
        std::span<double> gm =
            grad_mu ? std::span<double>(grad_mu->row(r)) : std::span<double>{};
        std::span<double> gl =
            grad_logvar ? std::span<double>(grad_logvar->row(r)) : std::span<double>{};
        kl += kl_divergence(mu.row(r), logvar.row(r), gm, gl, scale / batch);
    }
    kl /= batch;

    return recon_loss + kl;
}

double vae_total_loss(double embed, double cross_entropy, double lambda) {
    return lambda * embed + cross_entropy;
}

double softmax_ce_loss(const Matrix& logits, std::span<const int> labels,
                       Matrix* dlogits) {
    require(logits.rows == labels.size(),
            "softmax_ce_loss: " + std::to_string(logits.rows) + " rows vs " +
                std::to_string(labels.size()) + " labels");
    require(logits.rows > 0, "softmax_ce_loss: empty batch");
    const double n = static_cast<double>(logits.rows);
    Matrix p;
    nn::softmax_rows(logits, p);
    if (dlogits) dlogits->resize(logits.rows, logits.cols);
    double loss = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const int y = labels[r];
        require(y >= 0 && static_cast<std::size_t>(y) < logits.cols,
                "softmax_ce_loss: label " + std::to_string(y) + " out of range");
        loss += -std::log(std::max(p.at(r, static_cast<std::size_t>(y)), 1e-300));
        if (dlogits) {
            double* dr = dlogits->row_ptr(r);
            const double* pr = p.row_ptr(r);
            for (std::size_t c = 0; c < logits.cols; ++c)
                dr[c] = (pr[c] - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) / n;
        }
    }
    return loss / n;
}

}  // namespace omix::losses
