#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "chartcast/rng.hpp"

namespace chartcast::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// A sequence batch: T step matrices, each features x batch.
using SeqBatch = std::vector<Mat>;

struct Param {
    Mat value;
    Mat grad;
    double lr_scale = 1.0;

    Param() = default;
    Param(Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
        : value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)), lr_scale(scale) {}

    void zero_grad() { grad.setZero(); }
    Eigen::Index size() const { return value.size(); }
};

// Flat views over a parameter list, used by the optimizer snapshots and the
// finite-difference tests.
Vec flatten_values(const std::vector<Param*>& params);
Vec flatten_grads(const std::vector<Param*>& params);
void assign_values(const std::vector<Param*>& params, const Vec& flat);

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

struct Linear {
    Param weight;  // out x in
    Param bias;    // out x 1

    Linear() = default;
    Linear(int in_dim, int out_dim, Rng& rng);

    Mat forward(const Mat& x) const;                    // x: in x B
    Mat backward(const Mat& x, const Mat& dy);          // returns dx, accumulates grads
    void params(std::vector<Param*>& out) { out.push_back(&weight); out.push_back(&bias); }
};

struct LstmCache {
    SeqBatch x, h_prev, c_prev, gate_i, gate_f, gate_g, gate_o, cell, tanh_cell;
};

// Single LSTM layer over a full sequence; gates packed [i; f; g; o].
struct LstmLayer {
    Param w_ih;  // 4H x D
    Param w_hh;  // 4H x H
    Param bias;  // 4H x 1
    int hidden = 0;

    LstmLayer() = default;
    LstmLayer(int input_dim, int hidden_dim, Rng& rng);

    SeqBatch forward(const SeqBatch& inputs, LstmCache* cache) const;
    // dh_seq holds one gradient matrix per step (zero where unused).
    SeqBatch backward(const SeqBatch& dh_seq, const LstmCache& cache);
    void params(std::vector<Param*>& out) {
        out.push_back(&w_ih);
        out.push_back(&w_hh);
        out.push_back(&bias);
    }
};

struct DainCache {
    SeqBatch x, centered, scaled;
    Mat seq_mean, shifted_mean, rms, rms_lin, scale, scale_summary, gate;
    Mat clamp_mask;
    std::int64_t clamp_count = 0;
};

// Three-stage adaptive normalization: shift by a learned map of the
// per-sequence mean, divide by a learned map of the centered RMS, gate by a
// sigmoid of a learned map of the scaled-value mean. Identity-initialized
// shift/scale reduce stage one and two to per-sequence standardization.
struct DainLayer {
    Param shift_w;  // D x D
    Param scale_w;  // D x D
    Param gate_w;   // D x D
    Param gate_b;   // D x 1
    double epsilon = 1e-8;

    DainLayer() = default;
    DainLayer(int feature_dim, double shift_lr, double scale_lr, double gate_lr);

    SeqBatch forward(const SeqBatch& inputs, DainCache* cache) const;
    SeqBatch backward(const SeqBatch& dy_seq, const DainCache& cache);
    void params(std::vector<Param*>& out) {
        out.push_back(&shift_w);
        out.push_back(&scale_w);
        out.push_back(&gate_w);
        out.push_back(&gate_b);
    }
};

// Inverted dropout; masks are drawn deterministically from the given rng.
struct DropoutMask {
    Mat mask;
    Mat apply(const Mat& x, double rate, Rng& rng);
    Mat backward(const Mat& dy) const { return dy.cwiseProduct(mask); }
};

// Weighted two-class softmax cross entropy, mean over the batch.
// sample_weights[i] multiplies sample i's term. dlogits may be null.
double weighted_softmax_ce(const Mat& logits, const std::vector<int>& labels,
                           const std::vector<double>& sample_weights, Mat* dlogits);

// Row-stable softmax over the class axis for a 2 x B logits matrix.
Mat softmax_columns(const Mat& logits);

class Adam {
public:
    Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Param*>& params);
    void reset() { m_.clear(); v_.clear(); t_ = 0; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<Mat> m_, v_;
    long t_ = 0;
};

}  // namespace chartcast::nn
