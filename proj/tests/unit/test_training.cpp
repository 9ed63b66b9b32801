#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "nodelab/errors.hpp"
#include "nodelab/training.hpp"

using namespace nodelab;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.hyper.d = 8;
    cfg.hyper.d_in = 8;
    cfg.epochs = 2;
    cfg.batch_size = 3;
    cfg.node_counts = {8, 10};
    cfg.dataset_size = 12;
    cfg.challenge_size = 8;
    cfg.learning_rate = 1e-3;
    cfg.seed = 5;
    return cfg;
}

// Zero-mean values with sample standard deviation exactly 1 (up to rounding).
std::vector<double> unit_noise(int n) {
    std::vector<double> z;
    for (int i = 0; i < n; ++i) z.push_back(i % 2 ? 1.0 : -1.0);
    double ss = 0;
    for (double v : z) ss += v * v;
    const double s = std::sqrt(ss / (n - 1));
    for (double& v : z) v /= s;
    return z;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("student t cdf matches an independent implementation") {
    for (double dof : {1.0, 2.0, 5.0, 9.0, 30.0, 255.0}) {
        boost::math::students_t dist(dof);
        for (double t = -8.0; t <= 8.0; t += 0.37) CHECK(std::abs(student_t_cdf(t, dof) - cdf(dist, t)) < 1e-10);
    }
    for (double a : {0.5, 2.0, 7.5})
        for (double b : {0.5, 1.0, 4.0})
            for (double x : {0.01, 0.3, 0.5, 0.77, 0.99})
                CHECK(std::abs(regularized_incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
    CHECK(student_t_cdf(0.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), DomainError);
}

TEST_CASE("paired t-test at the 5 percent quantile with 9 degrees of freedom") {
    const int n = 10;
    const double t = -1.833;
    std::vector<double> base(n, 7.0), cand(n);
    auto z = unit_noise(n);
    for (int i = 0; i < n; ++i) cand[i] = base[i] + z[i] + t / std::sqrt(double(n));
    const double p = paired_t_test(cand, base);
    CHECK(std::abs(p - 0.05) <= 0.001);
    CHECK(std::abs(p - cdf(boost::math::students_t(9), t)) < 1e-9);
}

TEST_CASE("paired t-test edge cases") {
    std::vector<double> base{3, 4, 5, 6, 7, 8};
    std::vector<double> noisy{3.001, 3.999, 5.001, 5.999, 7.001, 7.999};
    CHECK(std::abs(paired_t_test(noisy, base) - 0.5) <= 0.1);
    std::vector<double> worse{4, 5, 6.5, 7, 8, 9.2};
    CHECK(paired_t_test(worse, base) > 0.5);
    std::vector<double> better{2, 3, 4.5, 5, 6, 6.8};
    CHECK(paired_t_test(better, base) < 0.01);
    CHECK(paired_t_test(base, base) == 0.5);
    std::vector<double> shifted{2, 3, 4, 5, 6, 7};
    CHECK(paired_t_test(shifted, base) == 0.0);
    CHECK_THROWS_AS(paired_t_test(std::vector<double>{1, 2}, std::vector<double>{1}), UsageError);
    CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{1}), UsageError);
}

TEST_CASE("gradient clipping") {
    std::vector<Tensor> g{Tensor::row({3.0}), Tensor::row({0.0, 4.0})};
    CHECK(clip_gradients(g, 1.0) == 5.0);
    CHECK(global_norm(g) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[0][0] == doctest::Approx(0.6));
    std::vector<Tensor> small{Tensor::row({0.3, 0.4})};
    CHECK(clip_gradients(small, 1.0) == doctest::Approx(0.5));
    CHECK(small[0] == Tensor::row({0.3, 0.4}));
}

TEST_CASE("adam step against a hand computation") {
    Tensor p = Tensor::row({1.0, -2.0});
    std::vector<Tensor*> params{&p};
    OptimizerState opt;
    opt.first.emplace_back(1, 2);
    opt.second.emplace_back(1, 2);
    const std::vector<Tensor> g1{Tensor::row({0.5, -0.1})}, g2{Tensor::row({0.2, 0.3})};
    adam_step(params, g1, opt, 0.01);
    adam_step(params, g2, opt, 0.01);
    for (int i = 0; i < 2; ++i) {
        double m = 0, v = 0, x = i == 0 ? 1.0 : -2.0;
        for (int s = 1; s <= 2; ++s) {
            const double gi = (s == 1 ? g1 : g2)[0][i];
            m = 0.9 * m + 0.1 * gi;
            v = 0.999 * v + 0.001 * gi * gi;
            x -= 0.01 * (m / (1 - std::pow(0.9, s))) / (std::sqrt(v / (1 - std::pow(0.999, s))) + 1e-8);
        }
        CHECK(p[i] == doctest::Approx(x).epsilon(1e-14));
    }
    CHECK(opt.step == 2);
    const std::vector<Tensor> wrong{Tensor::row({1.0})};
    CHECK_THROWS_AS(adam_step(params, wrong, opt, 0.01), ShapeError);
}

TEST_CASE("zero advantage leaves the parameters unchanged") {
    // Any coloring order of a complete graph costs n colors, so the sampled
    // and baseline costs agree.
    TrainConfig cfg = tiny_config();
    auto params = ModelParameters::initialize(cfg.hyper, 1);
    auto baseline = ModelParameters::initialize(cfg.hyper, 2);
    auto before = params;
    OptimizerState opt = OptimizerState::for_parameters(params);
    std::vector<std::vector<Graph>> groups{{fixtures::complete(5), fixtures::complete(5)}, {fixtures::complete(7)}};
    Rng rng(3);
    BatchReport r = reinforce_batch_update(params, baseline, graph_coloring(), groups, opt, cfg, rng);
    CHECK(r.graphs == 3);
    CHECK(r.grad_norm == 0.0);
    CHECK(r.mean_cost == doctest::Approx(17.0 / 3));
    CHECK(r.mean_cost == r.mean_baseline_cost);
    for (std::size_t k = 0; k < params.trainable().size(); ++k) CHECK(*params.trainable()[k] == *before.trainable()[k]);
    // Running statistics still track the batch.
    CHECK_FALSE(params.layers[0].running_mean == before.layers[0].running_mean);
}

TEST_CASE("a batch update moves the parameters") {
    TrainConfig cfg = tiny_config();
    auto params = ModelParameters::initialize(cfg.hyper, 4);
    auto before = params;
    OptimizerState opt = OptimizerState::for_parameters(params);
    std::vector<std::vector<Graph>> groups{sample_graphs(cfg, 12, 6, 9)};
    Rng rng(1);
    BatchReport r = reinforce_batch_update(params, before, graph_coloring(), groups, opt, cfg, rng);
    CHECK(r.grad_norm > 0.0);
    CHECK_FALSE(params.theta1 == before.theta1);
    CHECK(opt.step == 1);
    std::vector<std::vector<Graph>> empty{{}};
    CHECK_THROWS_AS(reinforce_batch_update(params, before, graph_coloring(), empty, opt, cfg, rng), UsageError);
}

TEST_CASE("training with no epochs returns the initial model") {
    TrainConfig cfg = tiny_config();
    cfg.epochs = 0;
    std::ostringstream log;
    TrainResult r = train(cfg, &log);
    CHECK(r.log.empty());
    CHECK(log.str().empty());
    CHECK(r.params == ModelParameters::initialize(cfg.hyper, derive_seed(cfg.seed, 0)));
    CHECK(r.baseline == r.params);
}

TEST_CASE("training is deterministic and logs one json line per epoch") {
    TrainConfig cfg = tiny_config();
    std::ostringstream a, b;
    TrainResult ra = train(cfg, &a);
    TrainResult rb = train(cfg, &b);
    CHECK(a.str() == b.str());
    CHECK(ra.params == rb.params);
    CHECK(ra.log == rb.log);
    REQUIRE(ra.log.size() == 2);
    std::istringstream lines(a.str());
    std::string line;
    int epoch = 0;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.at("epoch") == ++epoch);
        for (const char* key : {"train_cost", "challenge_cost", "baseline_cost", "p_value"}) CHECK(j.at(key).is_number());
        CHECK(j.at("swapped").is_boolean());
    }
    CHECK(epoch == 2);
    for (const auto& rec : ra.log)
        if (rec.swapped) CHECK((rec.p_value < cfg.t_test_alpha && rec.challenge_cost < rec.baseline_cost));
    cfg.seed = 6;
    CHECK_FALSE(train(cfg).params == ra.params);
}

TEST_CASE("train config json and validation") {
    TrainConfig cfg = tiny_config();
    cfg.families = family_preset("mvc-er-ba");
    nlohmann::json j = cfg;
    TrainConfig back = j.get<TrainConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(cfg.effective_batch() == 6);
    CHECK(TrainConfig{}.effective_batch() == 320);

    auto preset = nlohmann::json::parse(R"({"families": "gc", "problem": "mvc"})").get<TrainConfig>();
    CHECK(preset.families.size() == 3);
    CHECK(preset.problem == "mvc");
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"families": "nope"})").get<TrainConfig>(), ParameterError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"problem": "tsp"})").get<TrainConfig>(), ParameterError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"learning_rate": 0})").get<TrainConfig>(), ParameterError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"challenge_size": 1})").get<TrainConfig>(), ParameterError);
}

}  // TEST_SUITE
