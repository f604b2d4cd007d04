#include <cmath>
#include <vector>

#include "doctest.h"

#include "sia/classifier.hpp"
#include "sia/rng.hpp"

using namespace sia;

namespace {

TextEmbeddingBank axes_bank() {
    // Two orthonormal prototypes along the coordinate axes.
    TextEmbeddingBank tb;
    tb.dim = 2;
    tb.embeddings = {{1.0, 0.0}, {0.0, 1.0}};
    tb.class_names = {"first", "second"};
    tb.class_splits = {Split::base, Split::novel};
    tb.validate();
    return tb;
}

TextEmbeddingBank random_bank(std::size_t dim, std::size_t classes, Rng& rng) {
    TextEmbeddingBank tb;
    tb.dim = dim;
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> e(dim);
        for (double& v : e) v = rng.normal();
        tb.embeddings.push_back(e);
        tb.class_names.push_back("c" + std::to_string(c));
        tb.class_splits.push_back(Split::base);
    }
    tb.validate();
    return tb;
}

} // namespace

TEST_CASE("unit-logit softmax hits the closed form") {
    const TextEmbeddingBank tb = axes_bank();
    ClassifierConfig cfg;
    cfg.tau = 1.0;

    // beta on the first axis: cosines (1, 0), logit gap exactly 1.
    const std::vector<double> p = classify({1.0, 0.0}, tb, cfg);
    const double e = std::exp(1.0);
    CHECK(p[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-15));
}

TEST_CASE("temperature sharpens the posterior") {
    const TextEmbeddingBank tb = axes_bank();
    ClassifierConfig mild;
    mild.tau = 1.0;
    ClassifierConfig sharp;
    sharp.tau = 0.01;
    const std::vector<double> beta{1.0, 0.2};
    CHECK(classify(beta, tb, sharp)[0] > classify(beta, tb, mild)[0]);
    CHECK(classify(beta, tb, sharp)[0] > 0.999);
}

TEST_CASE("posteriors sum to one") {
    Rng rng(81);
    const TextEmbeddingBank tb = random_bank(16, 7, rng);
    const ClassifierConfig cfg;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> beta(16);
        for (double& v : beta) v = rng.normal();
        const std::vector<double> p = classify(beta, tb, cfg);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("normalization makes the posterior scale invariant") {
    Rng rng(91);
    const TextEmbeddingBank tb = random_bank(8, 4, rng);
    const ClassifierConfig cfg; // normalize = true
    for (int i = 0; i < 200; ++i) {
        std::vector<double> beta(8);
        for (double& v : beta) v = rng.normal();
        const std::vector<double> base = classify(beta, tb, cfg);
        for (const double s : {4.0, 0.125, 1024.0}) {
            std::vector<double> scaled = beta;
            for (double& v : scaled) v *= s;
            CHECK(classify(scaled, tb, cfg) == base); // power-of-two scale: bit-exact
        }
    }
}

TEST_CASE("skipping normalization exposes the magnitude") {
    const TextEmbeddingBank tb = axes_bank();
    ClassifierConfig cfg;
    cfg.tau = 1.0;
    cfg.normalize = false;
    const std::vector<double> small = classify({0.5, 0.0}, tb, cfg);
    const std::vector<double> large = classify({5.0, 0.0}, tb, cfg);
    CHECK(large[0] > small[0]);
}

TEST_CASE("zero region embedding cannot be normalized") {
    const TextEmbeddingBank tb = axes_bank();
    CHECK_THROWS_AS(classify({0.0, 0.0}, tb, ClassifierConfig{}), ValidationError);
    ClassifierConfig raw;
    raw.normalize = false;
    CHECK_NOTHROW(classify({0.0, 0.0}, tb, raw));
}

TEST_CASE("argmax ties resolve to the lowest class") {
    const TextEmbeddingBank tb = axes_bank();
    ClassifierConfig cfg;
    cfg.tau = 1.0;
    const std::vector<double> p = classify({1.0, 1.0}, tb, cfg);
    CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-15));
    CHECK(classification_score(p).second == 0);
    CHECK(classification_score({0.2, 0.6, 0.2}).second == 1);
    CHECK(classification_score({0.2, 0.6, 0.2}).first == 0.6);
}

TEST_CASE("config validation") {
    ClassifierConfig cfg;
    CHECK(cfg.tau == 0.01);
    CHECK(cfg.normalize);
    CHECK_NOTHROW(cfg.validate());
    cfg.tau = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.tau = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("score fusion is a validated product") {
    CHECK(fuse_scores(0.5, 0.5) == 0.25);
    CHECK(fuse_scores(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(fuse_scores(1.5, 0.5), ValidationError);
    CHECK_THROWS_AS(fuse_scores(0.5, -0.1), ValidationError);
}

TEST_CASE("proposal scoring assembles a consistent detection") {
    Rng rng(101);
    const TextEmbeddingBank tb = random_bank(8, 3, rng);
    AdapterBank bank = AdapterBank::initialized(2, 8, 2, 0.2, BinPartition::geometric(2), rng);

    RegionProposal proposal{{1.0, 1.0, 2.0, 1.0}, 0.7};
    std::vector<double> f(8);
    for (double& v : f) v = rng.normal();

    const ScoredDetection det = score_proposal(proposal, f, bank, tb, ClassifierConfig{});
    CHECK_NOTHROW(det.validate());
    CHECK(det.score_l == 0.7);
    CHECK(det.score_box == det.score_c * det.score_l);
    CHECK(det.predicted_class == classification_score(det.probs).second);
    CHECK(det.box.x == 1.0);
    CHECK(det.probs.size() == 3);
}

TEST_CASE("text bank validation") {
    TextEmbeddingBank tb = axes_bank();
    CHECK_NOTHROW(tb.validate());

    TextEmbeddingBank one = tb;
    one.embeddings.pop_back();
    one.class_names.pop_back();
    one.class_splits.pop_back();
    CHECK_THROWS_AS(one.validate(), ValidationError); // needs at least two classes

    TextEmbeddingBank zero_col = tb;
    zero_col.embeddings[1] = {0.0, 0.0};
    CHECK_THROWS_AS(zero_col.validate(), ValidationError);

    TextEmbeddingBank bad_len = tb;
    bad_len.embeddings[0] = {1.0};
    CHECK_THROWS_AS(bad_len.validate(), ValidationError);

    TextEmbeddingBank unnamed = tb;
    unnamed.class_names[0] = "";
    CHECK_THROWS_AS(unnamed.validate(), ValidationError);
}

TEST_CASE("split names round trip") {
    CHECK(split_name(Split::base) == std::string("base"));
    CHECK(split_name(Split::novel) == std::string("novel"));
    CHECK(split_from_name("base") == Split::base);
    CHECK(split_from_name("novel") == Split::novel);
    CHECK_THROWS_AS(split_from_name("other"), ValidationError);
}
