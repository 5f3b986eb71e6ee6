#include "chartcast/nn.hpp"

#include <cmath>

#include "chartcast/errors.hpp"

namespace chartcast::nn {

namespace {

Mat sigmoid(const Mat& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

void uniform_init(Mat& m, double bound, Rng& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    }
}

}  // namespace

Vec flatten_values(const std::vector<Param*>& params) {
    Eigen::Index total = 0;
    for (const auto* p : params) total += p->size();
    Vec flat(total);
    Eigen::Index at = 0;
    for (const auto* p : params) {
        flat.segment(at, p->size()) = Eigen::Map<const Vec>(p->value.data(), p->size());
        at += p->size();
    }
    return flat;
}

Vec flatten_grads(const std::vector<Param*>& params) {
    Eigen::Index total = 0;
    for (const auto* p : params) total += p->size();
    Vec flat(total);
    Eigen::Index at = 0;
    for (const auto* p : params) {
        flat.segment(at, p->size()) = Eigen::Map<const Vec>(p->grad.data(), p->size());
        at += p->size();
    }
    return flat;
}

void assign_values(const std::vector<Param*>& params, const Vec& flat) {
    Eigen::Index at = 0;
    for (auto* p : params) {
        Eigen::Map<Vec>(p->value.data(), p->size()) = flat.segment(at, p->size());
        at += p->size();
    }
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

Linear::Linear(int in_dim, int out_dim, Rng& rng)
    : weight(out_dim, in_dim), bias(out_dim, 1) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    uniform_init(weight.value, bound, rng);
    uniform_init(bias.value, bound, rng);
}

Mat Linear::forward(const Mat& x) const {
    return (weight.value * x).colwise() + bias.value.col(0);
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
    weight.grad += dy * x.transpose();
    bias.grad.col(0) += dy.rowwise().sum();
    return weight.value.transpose() * dy;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(int input_dim, int hidden_dim, Rng& rng)
    : w_ih(4 * hidden_dim, input_dim),
      w_hh(4 * hidden_dim, hidden_dim),
      bias(4 * hidden_dim, 1),
      hidden(hidden_dim) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    uniform_init(w_ih.value, bound, rng);
    uniform_init(w_hh.value, bound, rng);
    uniform_init(bias.value, bound, rng);
}

SeqBatch LstmLayer::forward(const SeqBatch& inputs, LstmCache* cache) const {
    if (inputs.empty()) throw ValidationError("empty sequence batch");
    const Eigen::Index batch = inputs[0].cols();
    const int h = hidden;
    Mat h_t = Mat::Zero(h, batch);
    Mat c_t = Mat::Zero(h, batch);
    SeqBatch outputs;
    outputs.reserve(inputs.size());
    for (const Mat& x_t : inputs) {
        Mat z = ((w_ih.value * x_t + w_hh.value * h_t).colwise() + bias.value.col(0)).eval();
        const Mat i = sigmoid(z.topRows(h));
        const Mat f = sigmoid(z.middleRows(h, h));
        const Mat g = z.middleRows(2 * h, h).array().tanh().matrix();
        const Mat o = sigmoid(z.bottomRows(h));
        const Mat c_next = f.cwiseProduct(c_t) + i.cwiseProduct(g);
        const Mat tanh_c = c_next.array().tanh().matrix();
        const Mat h_next = o.cwiseProduct(tanh_c);
        if (cache != nullptr) {
            cache->x.push_back(x_t);
            cache->h_prev.push_back(h_t);
            cache->c_prev.push_back(c_t);
            cache->gate_i.push_back(i);
            cache->gate_f.push_back(f);
            cache->gate_g.push_back(g);
            cache->gate_o.push_back(o);
            cache->cell.push_back(c_next);
            cache->tanh_cell.push_back(tanh_c);
        }
        h_t = h_next;
        c_t = c_next;
        outputs.push_back(h_t);
    }
    return outputs;
}

SeqBatch LstmLayer::backward(const SeqBatch& dh_seq, const LstmCache& cache) {
    const auto steps = static_cast<std::ptrdiff_t>(cache.x.size());
    const Eigen::Index batch = cache.x[0].cols();
    const int h = hidden;
    Mat dh_next = Mat::Zero(h, batch);
    Mat dc_next = Mat::Zero(h, batch);
    SeqBatch dx_seq(static_cast<std::size_t>(steps));
    for (std::ptrdiff_t t = steps - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        Mat dh = dh_next + dh_seq[ti];
        const Mat& i = cache.gate_i[ti];
        const Mat& f = cache.gate_f[ti];
        const Mat& g = cache.gate_g[ti];
        const Mat& o = cache.gate_o[ti];
        const Mat& tanh_c = cache.tanh_cell[ti];

        const Mat do_ = dh.cwiseProduct(tanh_c);
        Mat dc = dc_next +
                 dh.cwiseProduct(o).cwiseProduct((1.0 - tanh_c.array().square()).matrix());
        const Mat di = dc.cwiseProduct(g);
        const Mat df = dc.cwiseProduct(cache.c_prev[ti]);
        const Mat dg = dc.cwiseProduct(i);
        dc_next = dc.cwiseProduct(f);

        Mat dz(4 * h, batch);
        dz.topRows(h) = di.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
        dz.middleRows(h, h) = df.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
        dz.middleRows(2 * h, h) = dg.cwiseProduct((1.0 - g.array().square()).matrix());
        dz.bottomRows(h) = do_.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());

        w_ih.grad += dz * cache.x[ti].transpose();
        w_hh.grad += dz * cache.h_prev[ti].transpose();
        bias.grad.col(0) += dz.rowwise().sum();
        dx_seq[ti] = w_ih.value.transpose() * dz;
        dh_next = w_hh.value.transpose() * dz;
    }
    return dx_seq;
}

// ---------------------------------------------------------------------------
// DAIN
// ---------------------------------------------------------------------------

DainLayer::DainLayer(int feature_dim, double shift_lr, double scale_lr, double gate_lr)
    : shift_w(feature_dim, feature_dim, shift_lr),
      scale_w(feature_dim, feature_dim, scale_lr),
      gate_w(feature_dim, feature_dim, gate_lr),
      gate_b(feature_dim, 1, gate_lr) {
    shift_w.value.setIdentity();
    scale_w.value.setIdentity();
    gate_w.value.setZero();
    gate_b.value.setZero();
}

SeqBatch DainLayer::forward(const SeqBatch& inputs, DainCache* cache) const {
    if (inputs.empty()) throw ValidationError("empty sequence batch");
    const double steps = static_cast<double>(inputs.size());
    const Eigen::Index d = inputs[0].rows();
    const Eigen::Index batch = inputs[0].cols();

    Mat seq_mean = Mat::Zero(d, batch);
    for (const Mat& x : inputs) seq_mean += x;
    seq_mean /= steps;
    const Mat shifted_mean = shift_w.value * seq_mean;

    SeqBatch centered;
    centered.reserve(inputs.size());
    Mat mean_sq = Mat::Zero(d, batch);
    for (const Mat& x : inputs) {
        centered.push_back(x - shifted_mean);
        mean_sq += centered.back().cwiseProduct(centered.back());
    }
    mean_sq /= steps;
    const Mat rms = mean_sq.cwiseSqrt();
    const Mat rms_lin = scale_w.value * rms;
    const Mat clamp_mask = (rms_lin.array() > epsilon).cast<double>().matrix();
    const Mat scale = rms_lin.cwiseMax(epsilon);

    SeqBatch scaled;
    scaled.reserve(inputs.size());
    Mat scale_summary = Mat::Zero(d, batch);
    for (const Mat& u : centered) {
        scaled.push_back(u.cwiseQuotient(scale));
        scale_summary += scaled.back();
    }
    scale_summary /= steps;
    const Mat gate =
        sigmoid(((gate_w.value * scale_summary).colwise() + gate_b.value.col(0)).eval());

    SeqBatch outputs;
    outputs.reserve(inputs.size());
    for (const Mat& v : scaled) outputs.push_back(v.cwiseProduct(gate));

    if (cache != nullptr) {
        cache->x = inputs;
        cache->centered = centered;
        cache->scaled = scaled;
        cache->seq_mean = seq_mean;
        cache->shifted_mean = shifted_mean;
        cache->rms = rms;
        cache->rms_lin = rms_lin;
        cache->scale = scale;
        cache->scale_summary = scale_summary;
        cache->gate = gate;
        cache->clamp_mask = clamp_mask;
        cache->clamp_count =
            static_cast<std::int64_t>((clamp_mask.array() == 0.0).count());
    }
    return outputs;
}

SeqBatch DainLayer::backward(const SeqBatch& dy_seq, const DainCache& cache) {
    const double steps = static_cast<double>(dy_seq.size());
    const Eigen::Index d = cache.x[0].rows();
    const Eigen::Index batch = cache.x[0].cols();

    // Gate stage.
    Mat dgate = Mat::Zero(d, batch);
    for (std::size_t t = 0; t < dy_seq.size(); ++t) {
        dgate += dy_seq[t].cwiseProduct(cache.scaled[t]);
    }
    const Mat dgate_pre =
        dgate.cwiseProduct(cache.gate)
            .cwiseProduct((1.0 - cache.gate.array()).matrix());
    gate_w.grad += dgate_pre * cache.scale_summary.transpose();
    gate_b.grad.col(0) += dgate_pre.rowwise().sum();
    const Mat dsummary = gate_w.value.transpose() * dgate_pre;

    // Scale stage.
    SeqBatch dv(dy_seq.size());
    Mat dscale = Mat::Zero(d, batch);
    for (std::size_t t = 0; t < dy_seq.size(); ++t) {
        dv[t] = dy_seq[t].cwiseProduct(cache.gate) + dsummary / steps;
        dscale -= dv[t].cwiseProduct(cache.centered[t]);
    }
    dscale = dscale.cwiseQuotient(cache.scale.cwiseProduct(cache.scale));
    const Mat drms_lin = dscale.cwiseProduct(cache.clamp_mask);
    scale_w.grad += drms_lin * cache.rms.transpose();
    Mat drms = scale_w.value.transpose() * drms_lin;
    // sqrt'(m) = 1/(2 sqrt(m)); zero-RMS features get a zero subgradient.
    Mat dmean_sq(d, batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const double r = cache.rms(i, j);
            dmean_sq(i, j) = r > 1e-12 ? drms(i, j) / (2.0 * r) : 0.0;
        }
    }

    // Shift stage.
    SeqBatch du(dy_seq.size());
    Mat dshifted = Mat::Zero(d, batch);
    for (std::size_t t = 0; t < dy_seq.size(); ++t) {
        du[t] = dv[t].cwiseQuotient(cache.scale) +
                (2.0 / steps) * cache.centered[t].cwiseProduct(dmean_sq);
        dshifted -= du[t];
    }
    shift_w.grad += dshifted * cache.seq_mean.transpose();
    const Mat dseq_mean = shift_w.value.transpose() * dshifted;

    SeqBatch dx(dy_seq.size());
    for (std::size_t t = 0; t < dy_seq.size(); ++t) dx[t] = du[t] + dseq_mean / steps;
    return dx;
}

// ---------------------------------------------------------------------------
// Dropout / loss / optimizer
// ---------------------------------------------------------------------------

Mat DropoutMask::apply(const Mat& x, double rate, Rng& rng) {
    mask = Mat::Zero(x.rows(), x.cols());
    const double keep = 1.0 - rate;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
    }
    return x.cwiseProduct(mask);
}

Mat softmax_columns(const Mat& logits) {
    Mat probs(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double m = logits.col(j).maxCoeff();
        Vec e = (logits.col(j).array() - m).exp();
        probs.col(j) = e / e.sum();
    }
    return probs;
}

double weighted_softmax_ce(const Mat& logits, const std::vector<int>& labels,
                           const std::vector<double>& sample_weights, Mat* dlogits) {
    const Eigen::Index batch = logits.cols();
    if (static_cast<Eigen::Index>(labels.size()) != batch ||
        static_cast<Eigen::Index>(sample_weights.size()) != batch) {
        throw ValidationError("loss: labels/weights must match the batch size");
    }
    const Mat probs = softmax_columns(logits);
    if (dlogits != nullptr) *dlogits = Mat::Zero(logits.rows(), batch);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < batch; ++j) {
        const int y = labels[static_cast<std::size_t>(j)];
        const double w = sample_weights[static_cast<std::size_t>(j)];
        const double p = std::max(probs(y, j), 1e-300);
        loss -= w * std::log(p);
        if (dlogits != nullptr) {
            dlogits->col(j) = w * probs.col(j);
            (*dlogits)(y, j) -= w;
        }
    }
    loss /= static_cast<double>(batch);
    if (dlogits != nullptr) *dlogits /= static_cast<double>(batch);
    return loss;
}

void Adam::step(const std::vector<Param*>& params) {
    if (m_.empty()) {
        for (const auto* p : params) {
            m_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
            v_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param& p = *params[k];
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * p.grad;
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
        const Mat m_hat = m_[k] / bc1;
        const Mat v_hat = v_[k] / bc2;
        p.value -=
            (lr_ * p.lr_scale) * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + eps_).matrix());
    }
}

}  // namespace chartcast::nn
