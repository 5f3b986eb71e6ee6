#include "chartcast/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "chartcast/errors.hpp"
#include "chartcast/evaluation.hpp"

namespace chartcast {

using nn::Mat;
using nn::SeqBatch;
using nn::Vec;

void LstmHeadConfig::validate() const {
    if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
    if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
}

void DainConfig::validate() const {
    if (shift_lr <= 0 || scale_lr <= 0 || gate_lr <= 0) {
        throw ConfigError("DAIN learning-rate multipliers must be > 0");
    }
    if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
}

double short_class_weight(double w, std::size_t n_train) {
    const double weight = 1.0 + w * static_cast<double>(n_train);
    if (weight <= 0.0) {
        throw ConfigError("short-class weight 1 + w*n_train = " + std::to_string(weight) +
                          " must be > 0");
    }
    return weight;
}

// ---------------------------------------------------------------------------
// SequenceClassifier
// ---------------------------------------------------------------------------

struct ForwardTrace {
    nn::DainCache dain_cache;
    std::vector<nn::LstmCache> lstm_caches;
    std::vector<std::vector<nn::DropoutMask>> boundary_dropouts;  // between lstm layers
    nn::DropoutMask head_dropout;
    bool head_dropout_used = false;
    Mat h_last;   // after dropout, input to fc1
    Mat fc1_pre;  // before relu
    Mat relu;
    Mat logits;
};

SequenceClassifier::SequenceClassifier(const LstmHeadConfig& head,
                                       const std::optional<DainConfig>& dain,
                                       std::uint64_t init_seed)
    : head_(head), dain_cfg_(dain) {
    head_.validate();
    Rng rng(init_seed);
    if (dain_cfg_.has_value()) {
        dain_cfg_->validate();
        if (dain_cfg_->feature_dim != head_.input_dim) {
            throw ConfigError("DAIN feature_dim must equal the head input_dim");
        }
        dain_.emplace(dain_cfg_->feature_dim, dain_cfg_->shift_lr, dain_cfg_->scale_lr,
                      dain_cfg_->gate_lr);
    }
    lstm_.reserve(static_cast<std::size_t>(head_.num_layers));
    for (int l = 0; l < head_.num_layers; ++l) {
        lstm_.emplace_back(l == 0 ? head_.input_dim : head_.hidden_dim, head_.hidden_dim, rng);
    }
    fc1_ = nn::Linear(head_.hidden_dim, head_.mlp_hidden, rng);
    fc2_ = nn::Linear(head_.mlp_hidden, 2, rng);
}

Mat SequenceClassifier::run_forward(const SeqBatch& batch, bool training, double dropout_rate,
                                    Rng* dropout_rng, ForwardTrace* trace) const {
    if (batch.empty()) throw ValidationError("empty sequence batch");
    if (batch[0].rows() != head_.input_dim) {
        throw ConfigError("sequence feature dim " + std::to_string(batch[0].rows()) +
                          " does not match model input_dim " + std::to_string(head_.input_dim));
    }
    SeqBatch seq = batch;
    if (dain_.has_value()) {
        seq = dain_->forward(seq, trace != nullptr ? &trace->dain_cache : nullptr);
    }
    const bool use_dropout = training && dropout_rate > 0.0 && dropout_rng != nullptr;
    for (std::size_t l = 0; l < lstm_.size(); ++l) {
        nn::LstmCache* cache = nullptr;
        if (trace != nullptr) {
            trace->lstm_caches.emplace_back();
            cache = &trace->lstm_caches.back();
        }
        seq = lstm_[l].forward(seq, cache);
        if (l + 1 < lstm_.size() && use_dropout) {
            std::vector<nn::DropoutMask> masks(seq.size());
            for (std::size_t t = 0; t < seq.size(); ++t) {
                seq[t] = masks[t].apply(seq[t], dropout_rate, *dropout_rng);
            }
            if (trace != nullptr) trace->boundary_dropouts.push_back(std::move(masks));
        } else if (trace != nullptr && l + 1 < lstm_.size()) {
            trace->boundary_dropouts.emplace_back();
        }
    }
    Mat h_last = seq.back();
    if (use_dropout) {
        nn::DropoutMask mask;
        h_last = mask.apply(h_last, dropout_rate, *dropout_rng);
        if (trace != nullptr) {
            trace->head_dropout = std::move(mask);
            trace->head_dropout_used = true;
        }
    }
    const Mat fc1_pre = fc1_.forward(h_last);
    const Mat relu = fc1_pre.cwiseMax(0.0);
    const Mat logits = fc2_.forward(relu);
    if (trace != nullptr) {
        trace->h_last = h_last;
        trace->fc1_pre = fc1_pre;
        trace->relu = relu;
        trace->logits = logits;
    }
    return logits;
}

Mat SequenceClassifier::forward(const SeqBatch& batch) const {
    return nn::softmax_columns(run_forward(batch, false, 0.0, nullptr, nullptr));
}

double SequenceClassifier::loss_and_grad(const SeqBatch& batch, const std::vector<int>& labels,
                                         const std::vector<double>& sample_weights,
                                         double dropout_rate, Rng& dropout_rng) {
    ForwardTrace trace;
    run_forward(batch, true, dropout_rate, &dropout_rng, &trace);
    if (dain_.has_value()) dain_clamps_ += trace.dain_cache.clamp_count;

    Mat dlogits;
    const double loss = nn::weighted_softmax_ce(trace.logits, labels, sample_weights, &dlogits);

    const Mat drelu = fc2_.backward(trace.relu, dlogits);
    const Mat dfc1_pre =
        drelu.cwiseProduct((trace.fc1_pre.array() > 0.0).cast<double>().matrix());
    Mat dh_last = fc1_.backward(trace.h_last, dfc1_pre);
    if (trace.head_dropout_used) dh_last = trace.head_dropout.backward(dh_last);

    const std::size_t steps = trace.lstm_caches.back().x.size();
    SeqBatch dh_seq(steps, Mat::Zero(head_.hidden_dim, dh_last.cols()));
    dh_seq.back() = dh_last;
    for (std::size_t li = lstm_.size(); li-- > 0;) {
        SeqBatch dx = lstm_[li].backward(dh_seq, trace.lstm_caches[li]);
        if (li > 0) {
            if (li - 1 < trace.boundary_dropouts.size() &&
                !trace.boundary_dropouts[li - 1].empty()) {
                for (std::size_t t = 0; t < dx.size(); ++t) {
                    dx[t] = trace.boundary_dropouts[li - 1][t].backward(dx[t]);
                }
            }
            dh_seq = std::move(dx);
        } else if (dain_.has_value()) {
            dain_->backward(dx, trace.dain_cache);
        }
    }
    return loss;
}

std::vector<nn::Param*> SequenceClassifier::parameters() {
    std::vector<nn::Param*> out;
    if (dain_.has_value()) dain_->params(out);
    for (auto& layer : lstm_) layer.params(out);
    fc1_.params(out);
    fc2_.params(out);
    return out;
}

std::vector<const nn::Param*> SequenceClassifier::parameters() const {
    auto mutable_params = const_cast<SequenceClassifier*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

// ---------------------------------------------------------------------------
// Batching and prediction
// ---------------------------------------------------------------------------

SeqBatch make_batch(const std::vector<EmbeddingSequence>& sequences,
                    std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("empty batch");
    const std::size_t steps = sequences[indices[0]].length();
    const std::size_t dim = sequences[indices[0]].dim();
    SeqBatch batch(steps, Mat::Zero(static_cast<Eigen::Index>(dim),
                                    static_cast<Eigen::Index>(indices.size())));
    for (std::size_t col = 0; col < indices.size(); ++col) {
        const auto& seq = sequences[indices[col]];
        if (seq.length() != steps || seq.dim() != dim) {
            throw ValidationError("inhomogeneous embedding sequences in one batch");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t i = 0; i < dim; ++i) {
                batch[t](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
                    static_cast<double>(seq.items[t].values[i]);
            }
        }
    }
    return batch;
}

namespace {

std::vector<int> predict_batched(const SequenceClassifier& model,
                                 const std::vector<EmbeddingSequence>& sequences,
                                 std::vector<double>* proba_out) {
    std::vector<int> predictions;
    predictions.reserve(sequences.size());
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < sequences.size(); start += chunk) {
        const std::size_t stop = std::min(start + chunk, sequences.size());
        std::vector<std::size_t> idx(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        const Mat probs = model.forward(make_batch(sequences, idx));
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            predictions.push_back(probs(1, j) > probs(0, j) ? 1 : 0);
            if (proba_out != nullptr) proba_out->push_back(probs(1, j));
        }
    }
    return predictions;
}

}  // namespace

std::vector<int> predict(const SequenceClassifier& model,
                         const std::vector<EmbeddingSequence>& sequences) {
    return predict_batched(model, sequences, nullptr);
}

std::vector<double> predict_proba(const SequenceClassifier& model,
                                  const std::vector<EmbeddingSequence>& sequences) {
    std::vector<double> proba;
    proba.reserve(sequences.size());
    predict_batched(model, sequences, &proba);
    return proba;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

SequenceClassifier TrainedModel::instantiate() const {
    SequenceClassifier model(head, dain, Rng::derive(train_cfg.seed, 1));
    nn::assign_values(model.parameters(), best_params);
    return model;
}

TrainedModel train(const LstmHeadConfig& head, const std::optional<DainConfig>& dain,
                   const std::vector<EmbeddingSequence>& train_set,
                   const std::vector<EmbeddingSequence>& validation_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty() || validation_set.empty()) {
        throw ValidationError("train and validation sets must be non-empty");
    }
    const double weight_short = short_class_weight(cfg.short_weight_param, train_set.size());

    SequenceClassifier model(head, dain, Rng::derive(cfg.seed, 1));
    Rng shuffle_rng(Rng::derive(cfg.seed, 2));
    Rng dropout_rng(Rng::derive(cfg.seed, 3));
    const auto params = model.parameters();
    nn::Adam optimizer(cfg.learning_rate);

    std::vector<int> val_labels;
    val_labels.reserve(validation_set.size());
    for (const auto& s : validation_set) val_labels.push_back(s.label);

    TrainedModel result;
    result.head = head;
    result.dain = dain;
    result.train_cfg = cfg;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0u);

    int stale_epochs = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(start + static_cast<std::size_t>(cfg.batch_size), order.size());
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const SeqBatch batch = make_batch(train_set, idx);
            std::vector<int> labels;
            std::vector<double> weights;
            labels.reserve(idx.size());
            weights.reserve(idx.size());
            for (const auto i : idx) {
                labels.push_back(train_set[i].label);
                weights.push_back(train_set[i].label == 0 ? weight_short : 1.0);
            }
            for (auto* p : params) p->zero_grad();
            const double loss =
                model.loss_and_grad(batch, labels, weights, cfg.dropout, dropout_rng);
            if (!std::isfinite(loss)) {
                throw Error("training diverged: loss is not finite at epoch " +
                            std::to_string(epoch));
            }
            optimizer.step(params);
            epoch_loss += loss;
            ++batches;
        }

        const auto val_pred = predict(model, validation_set);
        const auto counts = confusion_from_pairs(val_pred, val_labels);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1));
        stats.val_f1 = f1_score(counts);
        stats.val_balanced_acc = balanced_accuracy(counts);
        stats.val_accuracy = static_cast<double>(counts.tp + counts.tn) /
                             static_cast<double>(std::max<std::int64_t>(counts.total(), 1));
        result.history.push_back(stats);

        if (result.best_epoch < 0 || stats.val_f1 > result.validation_f1) {
            result.validation_f1 = stats.val_f1;
            result.best_epoch = epoch;
            result.best_params = nn::flatten_values(params);
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= cfg.patience) break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kWeightsMagic[8] = {'C', 'C', 'W', 'T', '0', '0', '0', '1'};

nlohmann::ordered_json head_to_json(const LstmHeadConfig& head) {
    return {{"input_dim", head.input_dim},
            {"hidden_dim", head.hidden_dim},
            {"num_layers", head.num_layers},
            {"mlp_hidden", head.mlp_hidden}};
}

LstmHeadConfig head_from_json(const nlohmann::json& j) {
    LstmHeadConfig head;
    head.input_dim = j.at("input_dim").get<int>();
    head.hidden_dim = j.at("hidden_dim").get<int>();
    head.num_layers = j.at("num_layers").get<int>();
    head.mlp_hidden = j.at("mlp_hidden").get<int>();
    return head;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& weights_path,
                     const std::filesystem::path& sidecar_path) {
    {
        std::ofstream out(weights_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + weights_path.string());
        out.write(kWeightsMagic, sizeof(kWeightsMagic));
        const std::uint64_t n = static_cast<std::uint64_t>(model.best_params.size());
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(model.best_params.data()),
                  static_cast<std::streamsize>(n * sizeof(double)));
    }
    nlohmann::ordered_json j;
    j["head"] = head_to_json(model.head);
    if (model.dain.has_value()) {
        j["dain"] = {{"shift_lr", model.dain->shift_lr},
                     {"scale_lr", model.dain->scale_lr},
                     {"gate_lr", model.dain->gate_lr},
                     {"feature_dim", model.dain->feature_dim}};
    } else {
        j["dain"] = nullptr;
    }
    j["train"] = {{"batch_size", model.train_cfg.batch_size},
                  {"learning_rate", model.train_cfg.learning_rate},
                  {"dropout", model.train_cfg.dropout},
                  {"short_weight_param", model.train_cfg.short_weight_param},
                  {"max_epochs", model.train_cfg.max_epochs},
                  {"patience", model.train_cfg.patience},
                  {"seed", model.train_cfg.seed}};
    j["short_weight_formula"] = "weight_short = 1 + w * n_train";
    j["validation_f1"] = model.validation_f1;
    j["best_epoch"] = model.best_epoch;
    auto history = nlohmann::ordered_json::array();
    for (const auto& e : model.history) {
        history.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_f1", e.val_f1},
                           {"val_balanced_acc", e.val_balanced_acc},
                           {"val_accuracy", e.val_accuracy}});
    }
    j["history"] = std::move(history);
    std::ofstream side(sidecar_path);
    if (!side) throw IoError("cannot write " + sidecar_path.string());
    side << j.dump(2) << "\n";
}

TrainedModel load_checkpoint(const std::filesystem::path& weights_path,
                             const std::filesystem::path& sidecar_path) {
    TrainedModel model;
    {
        std::ifstream side(sidecar_path);
        if (!side) throw IoError("cannot open " + sidecar_path.string());
        nlohmann::json j;
        side >> j;
        model.head = head_from_json(j.at("head"));
        if (!j.at("dain").is_null()) {
            DainConfig dain;
            dain.shift_lr = j["dain"].at("shift_lr").get<double>();
            dain.scale_lr = j["dain"].at("scale_lr").get<double>();
            dain.gate_lr = j["dain"].at("gate_lr").get<double>();
            dain.feature_dim = j["dain"].at("feature_dim").get<int>();
            model.dain = dain;
        }
        model.train_cfg.batch_size = j["train"].at("batch_size").get<int>();
        model.train_cfg.learning_rate = j["train"].at("learning_rate").get<double>();
        model.train_cfg.dropout = j["train"].at("dropout").get<double>();
        model.train_cfg.short_weight_param = j["train"].at("short_weight_param").get<double>();
        model.train_cfg.max_epochs = j["train"].at("max_epochs").get<int>();
        model.train_cfg.patience = j["train"].at("patience").get<int>();
        model.train_cfg.seed = j["train"].at("seed").get<std::uint64_t>();
        model.validation_f1 = j.at("validation_f1").get<double>();
        model.best_epoch = j.at("best_epoch").get<int>();
        for (const auto& e : j.at("history")) {
            EpochStats stats;
            stats.epoch = e.at("epoch").get<int>();
            stats.train_loss = e.at("train_loss").get<double>();
            stats.val_f1 = e.at("val_f1").get<double>();
            stats.val_balanced_acc = e.at("val_balanced_acc").get<double>();
            stats.val_accuracy = e.at("val_accuracy").get<double>();
            model.history.push_back(stats);
        }
    }
    std::ifstream in(weights_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + weights_path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kWeightsMagic, sizeof(magic)) != 0) {
        throw ParseError(weights_path.string() + ": bad weights file magic");
    }
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    model.best_params.resize(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(model.best_params.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ParseError(weights_path.string() + ": truncated weights file");
    return model;
}

}  // namespace chartcast
