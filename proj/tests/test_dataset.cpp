#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "sia/containers.hpp"
#include "sia/dataset.hpp"
#include "sia/matrix.hpp"

using namespace sia;

namespace {

SynthConfig small_cfg() {
    SynthConfig cfg;
    cfg.dim = 8;
    cfg.num_classes = 3;
    cfg.bins = 2;
    cfg.samples_per_class_per_bin = 5;
    cfg.seed = 3;
    return cfg;
}

} // namespace

TEST_CASE("generator produces the advertised layout") {
    const SynthConfig cfg = small_cfg();
    const SynthResult res = generate_synthetic(cfg);
    CHECK_NOTHROW(res.dataset.validate());
    CHECK(res.dataset.dim == 8);
    CHECK(res.dataset.samples.size() == 3 * 2 * 5);
    CHECK(res.dataset.num_classes() == 3);
    CHECK(res.partition.bins() == 2);
    CHECK(res.deformations.size() == 2);

    // Sequential identifiers, one synthetic region per image.
    for (std::size_t i = 0; i < res.dataset.samples.size(); ++i) {
        CHECK(res.dataset.samples[i].id == static_cast<std::int64_t>(i));
        CHECK(res.dataset.samples[i].image_id == res.dataset.samples[i].id);
    }

    // Unit-norm features, unit-area boxes, full (class, bin) coverage.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    for (const RegionSample& s : res.dataset.samples) {
        CHECK(std::fabs(norm2(s.feature) - 1.0) < 1e-12);
        CHECK(std::fabs(s.box.area() - 1.0) < 1e-12);
        counts[{s.label, res.partition.bin_index(aspect_ratio(s.box))}] += 1;
    }
    CHECK(counts.size() == 3 * 2);
    for (const auto& [key, n] : counts) CHECK(n == 5);

    // The text bank shares names and prototypes with the planted classes.
    CHECK_NOTHROW(res.text_bank.validate());
    CHECK(res.text_bank.num_classes() == 3);
    CHECK(res.text_bank.dim == 8);
    for (const auto& e : res.text_bank.embeddings) CHECK(std::fabs(norm2(e) - 1.0) < 1e-12);
    CHECK(res.text_bank.class_names == res.dataset.class_names);
}

TEST_CASE("rotation deformations are orthogonal with unit determinant") {
    SynthConfig cfg = small_cfg();
    cfg.kind = SynthConfig::Deformation::rotation;
    const SynthResult res = generate_synthetic(cfg);
    for (const Matrix& m : res.deformations) {
        CHECK(m.rows() == 8);
        CHECK(m.cols() == 8);
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < 8; ++k) v += m(k, i) * m(k, j);
                CHECK(std::fabs(v - (i == j ? 1.0 : 0.0)) < 1e-9);
            }
        }
        CHECK(determinant(m) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("general linear deformations stay invertible") {
    SynthConfig cfg = small_cfg();
    cfg.kind = SynthConfig::Deformation::general_linear;
    const SynthResult res = generate_synthetic(cfg);
    for (const Matrix& m : res.deformations) {
        CHECK(std::fabs(determinant(m)) > 1e-9);
        CHECK_NOTHROW(inverse(m));
    }
}

TEST_CASE("zero noise collapses each class-bin cluster to a point") {
    SynthConfig cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    const SynthResult res = generate_synthetic(cfg);
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> first;
    for (const RegionSample& s : res.dataset.samples) {
        const auto key = std::make_pair(s.label, res.partition.bin_index(aspect_ratio(s.box)));
        const auto it = first.find(key);
        if (it == first.end()) {
            first[key] = s.feature;
        } else {
            for (std::size_t d = 0; d < s.feature.size(); ++d)
                CHECK(std::fabs(s.feature[d] - it->second[d]) < 1e-12);
        }
    }
}

TEST_CASE("trailing classes carry the novel tag") {
    SynthConfig cfg = small_cfg();
    cfg.num_novel_classes = 1;
    const SynthResult res = generate_synthetic(cfg);
    CHECK(res.dataset.class_splits ==
          std::vector<Split>{Split::base, Split::base, Split::novel});
    CHECK(res.text_bank.class_splits == res.dataset.class_splits);
    for (const RegionSample& s : res.dataset.samples)
        CHECK(s.split == res.dataset.class_splits[s.label]);
}

TEST_CASE("generation is deterministic in the seed") {
    const SynthConfig cfg = small_cfg();
    const std::string a = dataset_to_bytes(generate_synthetic(cfg).dataset);
    const std::string b = dataset_to_bytes(generate_synthetic(cfg).dataset);
    CHECK(a == b);

    SynthConfig other = cfg;
    other.seed = 4;
    CHECK(dataset_to_bytes(generate_synthetic(other).dataset) != a);
}

TEST_CASE("generator config validation") {
    SynthConfig cfg = small_cfg();
    cfg.num_classes = 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
    cfg = small_cfg();
    cfg.noise_sigma = -0.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
    cfg = small_cfg();
    cfg.num_novel_classes = 3;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
    cfg = small_cfg();
    cfg.bins = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
}

TEST_CASE("stratified split hits exact per-group counts") {
    SynthConfig cfg = small_cfg();
    cfg.samples_per_class_per_bin = 10;
    const SynthResult res = generate_synthetic(cfg);

    const SplitResult sp = split_train_eval(res.dataset, 0.8, 7, &res.partition);
    CHECK(sp.warnings.empty());
    CHECK(sp.train.samples.size() == 3 * 2 * 8);
    CHECK(sp.eval.samples.size() == 3 * 2 * 2);

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> train_counts;
    for (const RegionSample& s : sp.train.samples)
        train_counts[{s.label, res.partition.bin_index(aspect_ratio(s.box))}] += 1;
    for (const auto& [key, n] : train_counts) CHECK(n == 8);

    CHECK_NOTHROW(sp.train.validate());
    CHECK_NOTHROW(sp.eval.validate());
    CHECK(sp.train.class_names == res.dataset.class_names);
}

TEST_CASE("novel samples all land on the eval side") {
    SynthConfig cfg = small_cfg();
    cfg.num_novel_classes = 1;
    cfg.samples_per_class_per_bin = 10;
    const SynthResult res = generate_synthetic(cfg);
    const SplitResult sp = split_train_eval(res.dataset, 0.8, 7);
    for (const RegionSample& s : sp.train.samples) CHECK(s.split == Split::base);
    std::size_t novel_eval = 0;
    for (const RegionSample& s : sp.eval.samples)
        if (s.split == Split::novel) ++novel_eval;
    CHECK(novel_eval == 2 * 10); // every novel sample
}

TEST_CASE("groups too small to split are sent to eval with a warning") {
    Dataset ds;
    ds.dim = 2;
    ds.class_names = {"a", "b"};
    ds.class_splits = {Split::base, Split::base};
    for (int i = 0; i < 6; ++i) {
        RegionSample s;
        s.id = i;
        s.image_id = i;
        s.box = {0.0, 0.0, 1.0, 1.0};
        s.label = 0;
        s.feature = {1.0, 0.0};
        ds.samples.push_back(s);
    }
    RegionSample lone;
    lone.id = 6;
    lone.image_id = 6;
    lone.box = {0.0, 0.0, 1.0, 1.0};
    lone.label = 1;
    lone.feature = {0.0, 1.0};
    ds.samples.push_back(lone);
    ds.validate();

    const SplitResult sp = split_train_eval(ds, 0.5, 1);
    CHECK(sp.warnings.size() == 1);
    bool lone_in_eval = false;
    for (const RegionSample& s : sp.eval.samples)
        if (s.id == 6) lone_in_eval = true;
    CHECK(lone_in_eval);
    CHECK(sp.train.samples.size() == 3);
    CHECK(sp.eval.samples.size() == 4);
}

TEST_CASE("split rejects degenerate fractions") {
    const SynthResult res = generate_synthetic(small_cfg());
    CHECK_THROWS_AS(split_train_eval(res.dataset, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(split_train_eval(res.dataset, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(split_train_eval(res.dataset, -0.2, 1), ValidationError);
}

TEST_CASE("splitting is deterministic in the seed") {
    SynthConfig cfg = small_cfg();
    cfg.samples_per_class_per_bin = 20;
    const SynthResult res = generate_synthetic(cfg);
    const SplitResult a = split_train_eval(res.dataset, 0.7, 9);
    const SplitResult b = split_train_eval(res.dataset, 0.7, 9);
    CHECK(dataset_to_bytes(a.train) == dataset_to_bytes(b.train));
    CHECK(dataset_to_bytes(a.eval) == dataset_to_bytes(b.eval));
    const SplitResult c = split_train_eval(res.dataset, 0.7, 10);
    CHECK(dataset_to_bytes(c.train) != dataset_to_bytes(a.train));
}

TEST_CASE("dataset validation catches inconsistencies") {
    const SynthResult res = generate_synthetic(small_cfg());
    Dataset bad = res.dataset;
    bad.samples[0].label = 99;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = res.dataset;
    bad.samples[0].split = Split::novel; // class 0 is base
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = res.dataset;
    bad.samples[0].feature.pop_back();
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = res.dataset;
    bad.samples[0].feature[0] = std::nan("");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
