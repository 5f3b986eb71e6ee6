#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chartcast/chart_render.hpp"
#include "chartcast/tokenizer.hpp"

namespace chartcast::clip {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ModelConfig {
    std::string kind;  // "text" | "image"
    int width = 0;
    int layers = 0;
    int heads = 0;
    int context = 0;     // text: maximum token count
    int vocab_size = 0;  // text
    int image_size = 0;  // image: square input side
    int patch_size = 0;  // image
    int projection_dim = 0;
    std::string activation = "quick_gelu";
    std::array<double, 3> image_mean = {0.48145466, 0.4578275, 0.40821073};
    std::array<double, 3> image_std = {0.26862954, 0.26130258, 0.27577711};
};

// On-disk container: magic + JSON header + raw float32 tensor blob. The
// header carries the architecture, the tokenizer tables (text) and the
// preprocessing constants (image).
struct Checkpoint {
    ModelConfig config;
    TokenizerData tokenizer;
    std::map<std::string, Mat> tensors;
};

Checkpoint load_checkpoint_file(const std::filesystem::path& path);
void save_checkpoint_file(const Checkpoint& ckpt, const std::filesystem::path& path);

// Deterministic random-weight checkpoints with the byte-level fallback vocab
// (no merges). Used for offline runs and the test suites; real exported
// weights use the same container.
Checkpoint make_synthetic_checkpoint(const std::string& kind, std::uint64_t seed, int width,
                                     int layers, int heads, int projection_dim,
                                     int context = 77, int image_size = 224, int patch_size = 32);

struct LayerNormWeights {
    Vec gamma;
    Vec beta;
};

struct BlockWeights {
    LayerNormWeights ln1, ln2;
    Mat in_proj_w;   // 3W x W
    Vec in_proj_b;   // 3W
    Mat out_proj_w;  // W x W
    Vec out_proj_b;  // W
    Mat mlp_fc_w;    // 4W x W
    Vec mlp_fc_b;
    Mat mlp_proj_w;  // W x 4W
    Vec mlp_proj_b;
};

// Per-block attention state captured during a recorded forward/backward,
// one N x N matrix per head.
struct AttentionRecord {
    std::vector<Mat> probs;
    std::vector<Mat> grads;
};

struct BlockTrace;

// Residual pre-norm transformer stack shared by both encoders. Token states
// are rows of an N x W matrix.
class TransformerStack {
public:
    TransformerStack() = default;

    Mat forward(const Mat& tokens, bool causal, std::vector<BlockTrace>* traces) const;
    // Backward through the whole stack for activation gradients; fills one
    // AttentionRecord per block when `records` is given.
    Mat backward(const Mat& d_out, std::vector<BlockTrace>& traces,
                 std::vector<AttentionRecord>* records) const;

    std::vector<BlockWeights> blocks;
    int heads = 0;
    std::string activation = "quick_gelu";
};

class TextModel {
public:
    explicit TextModel(const Checkpoint& ckpt);

    // Final-layernorm hidden state at the end marker (pooled) or its
    // projection into the joint space.
    Vec encode(const std::string& text, bool projected, std::int64_t* truncated) const;

    const ModelConfig& config() const { return config_; }
    const BpeTokenizer& tokenizer() const { return tokenizer_; }
    std::string parameter_hash() const;

private:
    ModelConfig config_;
    BpeTokenizer tokenizer_;
    Mat token_embedding_;  // V x W
    Mat pos_embedding_;    // context x W
    TransformerStack stack_;
    LayerNormWeights ln_final_;
    Mat projection_;  // W x P (empty when absent)
};

struct VisionAttribution {
    std::vector<AttentionRecord> records;  // one per block
    double score = 0.0;                    // target . output
};

class VisionModel {
public:
    explicit VisionModel(const Checkpoint& ckpt);

    Vec encode(const ChartImage& image, bool projected) const;

    // Records per-block attention probabilities and their gradients with
    // respect to target . output — the raw material for relevance maps.
    VisionAttribution attribution(const ChartImage& image, const Vec& target,
                                  bool projected) const;

    int patch_grid() const { return config_.image_size / config_.patch_size; }
    const ModelConfig& config() const { return config_; }
    std::string parameter_hash() const;

private:
    Mat embed_image(const ChartImage& image) const;  // tokens (1+P^2) x W

    ModelConfig config_;
    Mat patch_embedding_;  // W x (3*ps*ps)
    Vec class_embedding_;  // W
    Mat pos_embedding_;    // (1+P^2) x W
    LayerNormWeights ln_pre_, ln_post_;
    TransformerStack stack_;
    Mat projection_;  // W x P
};

}  // namespace chartcast::clip
