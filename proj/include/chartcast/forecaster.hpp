#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "chartcast/embedding.hpp"
#include "chartcast/nn.hpp"

namespace chartcast {

struct LstmHeadConfig {
    int input_dim = 4;
    int hidden_dim = 64;
    int num_layers = 1;  // 1 = plain, >= 2 = stacked
    int mlp_hidden = 32;

    void validate() const;
};

// Learning-rate multipliers for the three normalization stages.
struct DainConfig {
    double shift_lr = 1.0;
    double scale_lr = 0.1;
    double gate_lr = 0.01;
    int feature_dim = 4;

    void validate() const;
};

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 1e-3;
    double dropout = 0.0;
    double short_weight_param = 0.0;  // the grid's w; weight_short = 1 + w * n_train
    int max_epochs = 100;
    int patience = 15;
    std::uint64_t seed = 0;

    void validate() const;
};

// Short-class loss weight; throws ConfigError when it is not positive.
double short_class_weight(double w, std::size_t n_train);

// LSTM stack with an optional adaptive-normalization front end and a two
// layer MLP head emitting class scores (short, long).
class SequenceClassifier {
public:
    SequenceClassifier(const LstmHeadConfig& head, const std::optional<DainConfig>& dain,
                       std::uint64_t init_seed);

    // Class probabilities, 2 x B, columns summing to 1. Inference mode.
    nn::Mat forward(const nn::SeqBatch& batch) const;

    // One optimization-ready pass: forward in training mode, weighted loss,
    // full backward. Gradients are accumulated into the parameters.
    double loss_and_grad(const nn::SeqBatch& batch, const std::vector<int>& labels,
                         const std::vector<double>& sample_weights, double dropout_rate,
                         Rng& dropout_rng);

    std::vector<nn::Param*> parameters();
    std::vector<const nn::Param*> parameters() const;

    const LstmHeadConfig& head_config() const { return head_; }
    const std::optional<DainConfig>& dain_config() const { return dain_cfg_; }
    std::int64_t dain_clamp_count() const { return dain_clamps_; }

private:
    nn::Mat run_forward(const nn::SeqBatch& batch, bool training, double dropout_rate,
                        Rng* dropout_rng, struct ForwardTrace* trace) const;

    LstmHeadConfig head_;
    std::optional<DainConfig> dain_cfg_;
    std::optional<nn::DainLayer> dain_;
    std::vector<nn::LstmLayer> lstm_;
    nn::Linear fc1_;
    nn::Linear fc2_;
    std::int64_t dain_clamps_ = 0;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_f1 = 0.0;
    double val_balanced_acc = 0.0;
    double val_accuracy = 0.0;
};

struct TrainedModel {
    LstmHeadConfig head;
    std::optional<DainConfig> dain;
    TrainConfig train_cfg;
    nn::Vec best_params;
    double validation_f1 = 0.0;
    int best_epoch = -1;
    std::vector<EpochStats> history;

    // Rebuilds the classifier with the selected epoch's weights.
    SequenceClassifier instantiate() const;
};

// Deterministic for a fixed seed/config; keeps the epoch checkpoint with the
// best validation F1 and stops after `patience` epochs without improvement.
// Aborts with an error when the loss diverges to NaN.
TrainedModel train(const LstmHeadConfig& head, const std::optional<DainConfig>& dain,
                   const std::vector<EmbeddingSequence>& train_set,
                   const std::vector<EmbeddingSequence>& validation_set, const TrainConfig& cfg);

// Hard predictions (argmax of the class probabilities) for each sequence.
std::vector<int> predict(const SequenceClassifier& model,
                         const std::vector<EmbeddingSequence>& sequences);

// Long-class probability per sequence.
std::vector<double> predict_proba(const SequenceClassifier& model,
                                  const std::vector<EmbeddingSequence>& sequences);

// Step matrices (D x B, double) for a slice of sequences.
nn::SeqBatch make_batch(const std::vector<EmbeddingSequence>& sequences,
                        std::span<const std::size_t> indices);

// Checkpoint: binary weight blob plus a JSON sidecar holding the full config,
// seed, loss-weight formula and per-epoch history.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& weights_path,
                     const std::filesystem::path& sidecar_path);
TrainedModel load_checkpoint(const std::filesystem::path& weights_path,
                             const std::filesystem::path& sidecar_path);

}  // namespace chartcast
