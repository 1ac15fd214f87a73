#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omix/data.hpp"
#include "omix/hyperparams.hpp"
#include "omix/matrix.hpp"
#include "omix/nn.hpp"
#include "omix/rng.hpp"

namespace omix::arch {

enum class MethodKind {
    early_integration,
    moli,
    super_felt,
    omics_stacking,
    moma,
    omi_embed,
};

enum class StackingVariant { standard, complete, no_integration, no_triplet };

struct ModelSpec {
    MethodKind kind = MethodKind::early_integration;
    StackingVariant variant = StackingVariant::standard;  // stacking only
    std::vector<std::string> omics_names;
    HyperParams hp;
};

// method-name strings used by configs and the results table
std::string method_name(MethodKind kind, StackingVariant variant);
ModelSpec parse_method(const std::string& name);
std::vector<std::string> valid_method_names();

// Trained model: frozen preprocessing plus the architecture's weights.
// Training happens phase by phase; single-phase methods have one phase.
class Model {
public:
    virtual ~Model() = default;

    ModelSpec spec;
    data::PreprocessState preprocess;

    // one probability per selected row; deterministic (no dropout, zero
    // latent noise)
    std::vector<double> predict(const data::OmicsDataset& ds,
                                std::span<const int> rows) const;
    std::vector<double> predict_all(const data::OmicsDataset& ds) const;

    // probability from already-preprocessed blocks
    virtual std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const = 0;

    virtual int num_phases() const { return 1; }
    virtual std::vector<nn::ParamBlock> phase_params(int phase) = 0;

    // loss over one batch; accumulates layer gradients when with_grads.
    // train_mode turns on dropout and latent sampling (rng required then).
    virtual double phase_loss(int phase, const std::vector<Matrix>& blocks,
                              std::span<const int> labels, Rng* rng, bool train_mode,
                              bool with_grads) = 0;

    void zero_phase_grads(int phase);
};

struct EarlyIntegrationModel : Model {
    nn::DenseStack net;  // encoder layer + sigmoid classifier on concatenated omics

    EarlyIntegrationModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
                          Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;
};

struct MoliModel : Model {
    std::vector<nn::DenseStack> encoders;  // one per omics
    nn::DenseStack classifier;             // sigmoid on concatenated latents

    MoliModel(const ModelSpec& s, const std::vector<std::size_t>& dims, Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;
};

// phases 0..M-1 train one encoder each with triplet loss on its own latent
// space; phase M trains the classifier on frozen, eval-mode latents
struct SuperFeltModel : Model {
    std::vector<nn::DenseStack> encoders;
    nn::DenseStack classifier;

    SuperFeltModel(const ModelSpec& s, const std::vector<std::size_t>& dims, Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    int num_phases() const override { return static_cast<int>(encoders.size()) + 1; }
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;
};

struct StackingModel : Model {
    std::vector<nn::DenseStack> encoders;
    std::vector<std::vector<int>> head_subsets;  // omics indices feeding each head
    std::vector<nn::DenseStack> heads;           // sigmoid per subset
    nn::DenseStack meta;                         // sigmoid over head outputs

    StackingModel(const ModelSpec& s, const std::vector<std::size_t>& dims, Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;

    static std::vector<std::vector<int>> subsets_for(StackingVariant variant,
                                                     int num_omics);
};

struct MomaModel : Model {
    std::vector<nn::DenseStack> module_encoders;  // two dense layers per omics
    std::vector<nn::DenseStack> heads;            // per omics, 2-class logits
    std::vector<double> meta_weights;             // logistic regression over head probs
    double meta_bias = 0.0;

    MomaModel(const ModelSpec& s, const std::vector<std::size_t>& dims, Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;

    // per-omics responder probabilities (network only, before the meta model)
    Matrix omics_probabilities(const std::vector<Matrix>& blocks) const;
    void fit_meta(const std::vector<Matrix>& blocks, std::span<const int> labels);

    // normalized per-sample module matrix (module_count x 2 rows flattened)
    static void normalize_modules(std::span<const double> raw, std::span<double> out);

    // everything the backward pass needs from a training forward
    struct ForwardState {
        std::vector<std::vector<nn::LayerCache>> encoder_caches;
        std::vector<std::vector<nn::LayerCache>> head_caches;
        std::vector<Matrix> raw;                   // per omics, N x 2K
        std::vector<std::vector<Matrix>> modules;  // [omics][sample], K x 2 normalized
        std::vector<Matrix> features;              // per omics, N x 2K(M-1)
    };
    void forward_heads(const std::vector<Matrix>& blocks, bool train_mode, Rng* rng,
                       Matrix* probs, ForwardState* state,
                       std::vector<Matrix>* logits_out);
};

// phase 0: full VAE on the embed loss; phase 1: classifier head on frozen
// VAE; phase 2: everything on lambda * embed + cross-entropy
struct OmiEmbedModel : Model {
    std::vector<nn::DenseStack> encoders;
    nn::DenseStack mu_layer;
    nn::DenseStack logvar_layer;
    std::vector<nn::DenseStack> decoders;  // per omics, sigmoid outputs
    nn::DenseStack head;                   // 2-class logits on z

    OmiEmbedModel(const ModelSpec& s, const std::vector<std::size_t>& dims, Rng& rng);
    std::vector<double> predict_blocks(const std::vector<Matrix>& blocks) const override;
    int num_phases() const override { return 3; }
    std::vector<nn::ParamBlock> phase_params(int phase) override;
    double phase_loss(int phase, const std::vector<Matrix>& blocks,
                      std::span<const int> labels, Rng* rng, bool train_mode,
                      bool with_grads) override;
};

// Fits preprocessing on the training rows, builds the architecture, runs its
// phase loop (epochs per phase, Adagrad, shuffled mini-batches), and returns
// the frozen model.
std::unique_ptr<Model> train_model(const ModelSpec& spec, const data::OmicsDataset& ds,
                                   std::span<const int> train_rows, std::uint64_t seed);

// shared phase loop, exposed for tests
void train_phases(Model& model, const std::vector<Matrix>& blocks,
                  std::span<const int> labels, Rng& rng);

// eval-mode loss of the model's final phase over the whole given set
double final_phase_loss(Model& model, const std::vector<Matrix>& blocks,
                        std::span<const int> labels);

}  // namespace omix::arch
