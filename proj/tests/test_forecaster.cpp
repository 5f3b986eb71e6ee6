#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "chartcast/errors.hpp"
#include "chartcast/evaluation.hpp"
#include "chartcast/forecaster.hpp"
#include "chartcast/rng.hpp"

using namespace chartcast;

namespace {

// Separable toy task: the label is the sign of the last step's feature sum.
std::vector<EmbeddingSequence> separable_task(std::size_t count, int steps, int dim,
                                              std::uint64_t seed, bool shuffle_labels = false) {
    Rng rng(seed);
    std::vector<EmbeddingSequence> sequences;
    sequences.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        EmbeddingSequence seq;
        seq.anchor = HourStamp::from_civil(2020, 1, 6, 0) + static_cast<std::int64_t>(n);
        double last_sum = 0.0;
        for (int t = 0; t < steps; ++t) {
            Embedding e;
            e.kind = SourceKind::RawNumeric;
            for (int i = 0; i < dim; ++i) {
                const auto v = static_cast<float>(rng.normal());
                e.values.push_back(v);
                if (t == steps - 1) last_sum += v;
            }
            seq.items.push_back(std::move(e));
        }
        seq.label = last_sum > 0.0 ? 1 : 0;
        sequences.push_back(std::move(seq));
    }
    if (shuffle_labels) {
        Rng label_rng(seed ^ 0xF00Dull);
        for (auto& seq : sequences) seq.label = label_rng.next_u64() & 1u ? 1 : 0;
    }
    return sequences;
}

double validation_accuracy(const TrainedModel& trained,
                           const std::vector<EmbeddingSequence>& validation) {
    const auto model = trained.instantiate();
    const auto preds = predict(model, validation);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == validation[i].label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace

TEST_CASE("training solves a linearly separable sequence task") {
    const auto train_set = separable_task(400, 8, 4, 11);
    const auto val_set = separable_task(150, 8, 4, 12);

    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 16;
    head.mlp_hidden = 8;
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.seed = 3;

    const auto trained = train(head, std::nullopt, train_set, val_set, cfg);
    CHECK(validation_accuracy(trained, val_set) > 0.95);
    CHECK(trained.validation_f1 > 0.9);
    CHECK(!trained.history.empty());
    CHECK(trained.best_epoch >= 0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto train_set = separable_task(120, 6, 4, 21);
    const auto val_set = separable_task(60, 6, 4, 22);
    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 8;
    head.mlp_hidden = 4;
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.005;
    cfg.dropout = 0.2;
    cfg.max_epochs = 8;
    cfg.seed = 77;

    const auto a = train(head, std::nullopt, train_set, val_set, cfg);
    const auto b = train(head, std::nullopt, train_set, val_set, cfg);
    CHECK(a.validation_f1 == b.validation_f1);
    CHECK(a.best_epoch == b.best_epoch);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_f1 == b.history[i].val_f1);
    }
    CHECK((a.best_params - b.best_params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("label-shuffled data trains to chance level") {
    const auto train_set = separable_task(400, 8, 4, 31, /*shuffle_labels=*/true);
    const auto val_set = separable_task(200, 8, 4, 32, /*shuffle_labels=*/true);
    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 16;
    head.mlp_hidden = 8;
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 20;
    cfg.patience = 20;
    cfg.seed = 5;

    const auto trained = train(head, std::nullopt, train_set, val_set, cfg);
    const auto model = trained.instantiate();
    const auto preds = predict(model, val_set);
    std::vector<int> labels;
    for (const auto& s : val_set) labels.push_back(s.label);
    const double bacc = balanced_accuracy(confusion_from_pairs(preds, labels));
    CHECK(bacc > 0.45);
    CHECK(bacc < 0.55);
}

TEST_CASE("stacked and dain variants train end to end") {
    const auto train_set = separable_task(150, 6, 4, 41);
    const auto val_set = separable_task(60, 6, 4, 42);

    SUBCASE("stacked lstm") {
        LstmHeadConfig head;
        head.input_dim = 4;
        head.hidden_dim = 8;
        head.num_layers = 2;
        head.mlp_hidden = 4;
        TrainConfig cfg;
        cfg.batch_size = 16;
        cfg.learning_rate = 0.01;
        cfg.dropout = 0.2;
        cfg.max_epochs = 6;
        cfg.seed = 1;
        const auto trained = train(head, std::nullopt, train_set, val_set, cfg);
        CHECK(trained.history.size() <= 6);
        CHECK(std::isfinite(trained.validation_f1));
    }
    SUBCASE("dain front end") {
        LstmHeadConfig head;
        head.input_dim = 4;
        head.hidden_dim = 8;
        head.mlp_hidden = 4;
        DainConfig dain;
        TrainConfig cfg;
        cfg.batch_size = 16;
        cfg.learning_rate = 0.005;
        cfg.max_epochs = 6;
        cfg.seed = 2;
        const auto trained = train(head, dain, train_set, val_set, cfg);
        CHECK(std::isfinite(trained.validation_f1));
        CHECK(trained.dain.has_value());
    }
}

TEST_CASE("checkpoint round trip preserves weights and metadata") {
    const auto train_set = separable_task(80, 6, 4, 51);
    const auto val_set = separable_task(40, 6, 4, 52);
    LstmHeadConfig head;
    head.input_dim = 4;
    head.hidden_dim = 6;
    head.mlp_hidden = 4;
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 3;
    cfg.seed = 9;
    const auto trained = train(head, std::nullopt, train_set, val_set, cfg);

    const auto dir = std::filesystem::temp_directory_path() / "chartcast_tests";
    std::filesystem::create_directories(dir);
    save_checkpoint(trained, dir / "model.bin", dir / "model.json");
    const auto loaded = load_checkpoint(dir / "model.bin", dir / "model.json");

    CHECK(loaded.validation_f1 == trained.validation_f1);
    CHECK(loaded.best_epoch == trained.best_epoch);
    CHECK(loaded.head.hidden_dim == head.hidden_dim);
    CHECK(loaded.history.size() == trained.history.size());
    REQUIRE(loaded.best_params.size() == trained.best_params.size());
    CHECK((loaded.best_params - trained.best_params).cwiseAbs().maxCoeff() == 0.0);

    const auto a = predict(trained.instantiate(), val_set);
    const auto b = predict(loaded.instantiate(), val_set);
    CHECK(a == b);
}
