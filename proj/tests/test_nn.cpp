#include <doctest.h>

#include <cmath>

#include "chartcast/errors.hpp"
#include "chartcast/forecaster.hpp"
#include "chartcast/nn.hpp"
#include "chartcast/rng.hpp"

using namespace chartcast;
using nn::Mat;
using nn::SeqBatch;
using nn::Vec;

namespace {

double rel_err(double analytic, double numeric) {
    const double denom = std::max({1e-6, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / denom;
}

SeqBatch random_seq(int steps, int dim, int batch, Rng& rng, double scale = 1.0) {
    SeqBatch seq;
    for (int t = 0; t < steps; ++t) {
        Mat x(dim, batch);
        for (int j = 0; j < batch; ++j) {
            for (int i = 0; i < dim; ++i) x(i, j) = rng.normal() * scale;
        }
        seq.push_back(x);
    }
    return seq;
}

// Scalar probe J = sum_t <R_t, y_t> with a fixed random direction R.
double dain_probe(nn::DainLayer& layer, const SeqBatch& inputs, const SeqBatch& direction,
                  nn::DainCache* cache) {
    const auto out = layer.forward(inputs, cache);
    double j = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        j += out[t].cwiseProduct(direction[t]).sum();
    }
    return j;
}

}  // namespace

TEST_CASE("dain forward reduces to per-sequence standardization") {
    // Identity shift/scale maps are the layer defaults; drive the gate to one.
    nn::DainLayer layer(4, 1.0, 0.1, 0.01);
    layer.gate_b.value.setConstant(100.0);

    Rng rng(5);
    const auto seq = random_seq(6, 4, 3, rng, 2.0);
    const auto out = layer.forward(seq, nullptr);

    const double steps = 6.0;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 4; ++i) {
            double mean = 0.0;
            for (const auto& x : seq) mean += x(i, j);
            mean /= steps;
            double rms = 0.0;
            for (const auto& x : seq) rms += (x(i, j) - mean) * (x(i, j) - mean);
            rms = std::sqrt(rms / steps);
            for (std::size_t t = 0; t < out.size(); ++t) {
                const double want = (seq[t](i, j) - mean) / rms;
                CHECK(out[t](i, j) == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("dain clamps degenerate scale and stays finite") {
    nn::DainLayer layer(4, 1.0, 1.0, 1.0);
    layer.shift_w.value.setZero();
    layer.scale_w.value.setZero();

    SeqBatch zeros(3, Mat::Zero(4, 2));
    nn::DainCache cache;
    const auto out = layer.forward(zeros, &cache);
    for (const auto& y : out) {
        CHECK(y.array().isFinite().all());
        CHECK(y.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(cache.clamp_count == 8);  // every feature of both sequences
}

TEST_CASE("dain gradients match central finite differences") {
    // 2 sequences x 3 steps x 4 features, the acceptance-grade instance.
    const int steps = 3, dim = 4, batch = 2;
    Rng rng(17);
    nn::DainLayer layer(dim, 1.0, 1.0, 1.0);
    // Perturb the maps away from the identity so every path is exercised.
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            layer.shift_w.value(i, j) += 0.05 * rng.normal();
            layer.scale_w.value(i, j) += 0.05 * rng.normal();
            layer.gate_w.value(i, j) = 0.3 * rng.normal();
        }
        layer.gate_b.value(i, 0) = 0.2 * rng.normal();
    }
    SeqBatch inputs = random_seq(steps, dim, batch, rng);
    const SeqBatch direction = random_seq(steps, dim, batch, rng);

    nn::DainCache cache;
    dain_probe(layer, inputs, direction, &cache);
    std::vector<nn::Param*> params;
    layer.params(params);
    for (auto* p : params) p->zero_grad();
    const SeqBatch dx = layer.backward(direction, cache);

    const double h = 1e-5;
    double max_err = 0.0;

    // Parameter gradients.
    for (auto* p : params) {
        for (Eigen::Index k = 0; k < p->size(); ++k) {
            double* value = p->value.data() + k;
            const double saved = *value;
            *value = saved + h;
            const double plus = dain_probe(layer, inputs, direction, nullptr);
            *value = saved - h;
            const double minus = dain_probe(layer, inputs, direction, nullptr);
            *value = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            max_err = std::max(max_err, rel_err(p->grad.data()[k], numeric));
        }
    }

    // Input gradients.
    for (int t = 0; t < steps; ++t) {
        for (int j = 0; j < batch; ++j) {
            for (int i = 0; i < dim; ++i) {
                const double saved = inputs[t](i, j);
                inputs[t](i, j) = saved + h;
                const double plus = dain_probe(layer, inputs, direction, nullptr);
                inputs[t](i, j) = saved - h;
                const double minus = dain_probe(layer, inputs, direction, nullptr);
                inputs[t](i, j) = saved;
                const double numeric = (plus - minus) / (2.0 * h);
                max_err = std::max(max_err, rel_err(dx[t](i, j), numeric));
            }
        }
    }
    CHECK(max_err < 1e-4);
}

TEST_CASE("dain output ignores constant shifts under an identity shift map") {
    nn::DainLayer layer(4, 1.0, 1.0, 1.0);
    Rng rng(23);
    const auto seq = random_seq(5, 4, 2, rng);
    SeqBatch shifted = seq;
    const Mat offset = Mat::Constant(4, 2, 3.25);
    for (auto& x : shifted) x += offset;

    const auto base = layer.forward(seq, nullptr);
    const auto moved = layer.forward(shifted, nullptr);
    for (std::size_t t = 0; t < base.size(); ++t) {
        CHECK((base[t] - moved[t]).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("weighted cross entropy") {
    SUBCASE("w = 0 reduces to plain cross entropy") {
        Mat logits(2, 2);
        logits << 0.2, -1.0, 1.1, 0.4;
        const std::vector<int> labels = {1, 0};
        const double weight_short = short_class_weight(0.0, 4000);
        CHECK(weight_short == 1.0);
        const std::vector<double> weights = {1.0, weight_short};
        const double loss = nn::weighted_softmax_ce(logits, labels, weights, nullptr);
        // Independent arithmetic for the same batch.
        const double p1 = std::exp(1.1) / (std::exp(0.2) + std::exp(1.1));
        const double p0 = std::exp(-1.0) / (std::exp(-1.0) + std::exp(0.4));
        CHECK(loss == doctest::Approx(-(std::log(p1) + std::log(p0)) / 2.0).epsilon(1e-12));
    }
    SUBCASE("perfect predictions drive the loss to zero regardless of w") {
        Mat logits(2, 2);
        logits << 30.0, -30.0, -30.0, 30.0;
        const std::vector<int> labels = {0, 1};
        for (double w : {0.0, -0.00005, -0.00015}) {
            const std::vector<double> weights = {short_class_weight(w, 4000), 1.0};
            CHECK(nn::weighted_softmax_ce(logits, labels, weights, nullptr) ==
                  doctest::Approx(0.0).epsilon(1e-9));
        }
    }
    SUBCASE("hand-computed weighted batch") {
        // w = -0.00005, n_train = 4000 -> short weight 0.8.
        const double weight_short = short_class_weight(-0.00005, 4000);
        CHECK(weight_short == doctest::Approx(0.8).epsilon(1e-12));
        Mat logits(2, 2);
        logits << 0.7, 0.1, -0.3, 0.9;
        const std::vector<int> labels = {0, 1};
        const std::vector<double> weights = {weight_short, 1.0};
        const double loss = nn::weighted_softmax_ce(logits, labels, weights, nullptr);
        const double p_short = std::exp(0.7) / (std::exp(0.7) + std::exp(-0.3));
        const double p_long = std::exp(0.9) / (std::exp(0.1) + std::exp(0.9));
        const double want = (0.8 * -std::log(p_short) + -std::log(p_long)) / 2.0;
        CHECK(loss == doctest::Approx(want).epsilon(1e-9));
    }
    SUBCASE("non-positive short weight is a config error") {
        CHECK_THROWS_AS(short_class_weight(-0.00015, 10000), ConfigError);
    }
}

TEST_CASE("classifier forward properties") {
    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 8;
    head.mlp_hidden = 6;
    SequenceClassifier model(head, std::nullopt, 99);

    Rng rng(31);
    const auto batch = random_seq(6, 4, 5, rng);
    const Mat probs = model.forward(batch);
    REQUIRE(probs.rows() == 2);
    REQUIRE(probs.cols() == 5);
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        CHECK(probs.col(j).sum() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(probs(0, j) > 0.0);
        CHECK(probs(1, j) < 1.0);
    }

    SUBCASE("zero weights give the symmetric prediction") {
        auto params = model.parameters();
        nn::assign_values(params, Vec::Zero(nn::flatten_values(params).size()));
        const Mat p = model.forward(batch);
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            CHECK(p(0, j) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }

    SUBCASE("repeating the batch repeats the predictions exactly") {
        SeqBatch doubled;
        for (const auto& x : batch) {
            Mat both(x.rows(), 2 * x.cols());
            both << x, x;
            doubled.push_back(both);
        }
        const Mat p2 = model.forward(doubled);
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            CHECK(p2(1, j) == probs(1, j));
            CHECK(p2(1, j + probs.cols()) == probs(1, j));
        }
    }

    SUBCASE("softmax monotonicity in the long logit") {
        Mat logits(2, 1);
        logits << 0.3, -0.2;
        double prev = nn::softmax_columns(logits)(1, 0);
        for (int k = 0; k < 10; ++k) {
            logits(1, 0) += 0.5;
            const double next = nn::softmax_columns(logits)(1, 0);
            CHECK(next > prev);
            prev = next;
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        const auto bad = random_seq(6, 7, 2, rng);
        CHECK_THROWS_AS(model.forward(bad), ConfigError);
    }
}

TEST_CASE("full model gradient matches finite differences") {
    // Tiny instance: D=4, hidden=3, length=5, with a stacked layer and DAIN
    // so every backward path is covered.
    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 3;
    head.num_layers = 2;
    head.mlp_hidden = 3;
    DainConfig dain;
    SequenceClassifier model(head, dain, 7);

    Rng rng(41);
    const auto batch = random_seq(5, 4, 3, rng);
    const std::vector<int> labels = {1, 0, 1};
    const std::vector<double> weights = {1.0, 0.8, 1.0};
    Rng dropout_rng(0);

    auto params = model.parameters();
    for (auto* p : params) p->zero_grad();
    model.loss_and_grad(batch, labels, weights, 0.0, dropout_rng);
    const Vec analytic = nn::flatten_grads(params);
    const Vec theta = nn::flatten_values(params);

    const double h = 1e-5;
    double max_err = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Vec probe = theta;
        probe[k] = theta[k] + h;
        nn::assign_values(params, probe);
        for (auto* p : params) p->zero_grad();
        const double plus = model.loss_and_grad(batch, labels, weights, 0.0, dropout_rng);
        probe[k] = theta[k] - h;
        nn::assign_values(params, probe);
        for (auto* p : params) p->zero_grad();
        const double minus = model.loss_and_grad(batch, labels, weights, 0.0, dropout_rng);
        const double numeric = (plus - minus) / (2.0 * h);
        max_err = std::max(max_err, rel_err(analytic[k], numeric));
    }
    nn::assign_values(params, theta);
    CHECK(max_err < 1e-3);
}
