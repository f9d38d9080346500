#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "gdm/gamma_gwr.hpp"
#include "gdm/rng.hpp"

using gdm::GammaGwrNet;
using gdm::GwrHyperParams;
using gdm::LabelLevel;

namespace {

GwrHyperParams params_k(int k) {
    GwrHyperParams p;
    p.context_count = k;
    if (k == 0)
        p.context_weights = {1.0};
    else if (k == 1)
        p.context_weights = {0.63, 0.37};
    else
        p.context_weights = {0.63, 0.234, 0.086};
    return p;
}

bool close(double a, double b, double rel = 1e-12) {
    return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("constructor seeds two neurons verbatim") {
    GammaGwrNet net(2, params_k(0), {{0.0, 0.0}, {1.0, 1.0}});
    REQUIRE(net.size() == 2);
    CHECK(net.weight(0)[0] == 0.0);
    CHECK(net.weight(1)[0] == 1.0);
    CHECK(net.weight(1)[1] == 1.0);
    CHECK(net.neurons[0].habituation == 1.0);
    CHECK(net.neurons[1].habituation == 1.0);
    CHECK(net.edge_count() == 0);
    const std::vector<double> x{0.0, 0.0};
    const auto r = net.find_bmu(x.data());
    CHECK(r.best == 0);
    CHECK(r.d_best == 0.0);
    CHECK(r.second == 1);
    CHECK_THROWS(GammaGwrNet(2, params_k(0), {{0.0, 0.0}, {1.0}}));
    CHECK_THROWS(GammaGwrNet(2, params_k(0), {{0.0, 0.0}}));
}

TEST_CASE("context shift collapses to the previous weight at depth 1") {
    GammaGwrNet net(1, params_k(1), {{2.0}, {5.0}});
    net.params.context_blend = 0.5;
    net.prev_bmu = 0;
    net.update_global_context();
    CHECK(close(net.global_context[0], 2.0));
}

TEST_CASE("context shift blends weight and stored context at depth 2") {
    GammaGwrNet net(1, params_k(2), {{2.0}, {5.0}});
    net.params.context_blend = 0.5;
    // neuron 0: w=[2], c_1=[0] (constructor zeroes contexts)
    net.prev_bmu = 0;
    net.update_global_context();
    CHECK(close(net.global_context[0], 2.0));  // C_1 = 0.5*2 + 0.5*2
    CHECK(close(net.global_context[1], 1.0));  // C_2 = 0.5*2 + 0.5*0
}

TEST_CASE("context starts at zero on a fresh stream") {
    GammaGwrNet net(3, params_k(2), {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    net.update_global_context();  // no previous BMU
    for (double v : net.global_context) CHECK(v == 0.0);
    net.prev_bmu = 1;
    net.update_global_context();
    bool any = false;
    for (double v : net.global_context) any = any || v != 0.0;
    CHECK(any);
    net.reset_context();
    CHECK(net.prev_bmu == -1);
    for (double v : net.global_context) CHECK(v == 0.0);
}

TEST_CASE("activation values") {
    CHECK(GammaGwrNet::activation(0.0) == 1.0);
    CHECK(close(GammaGwrNet::activation(std::log(2.0)), 0.5));
    const double tiny = GammaGwrNet::activation(1e9);
    CHECK(tiny >= 0.0);
    CHECK(tiny < 1e-300);
}

TEST_CASE("habituation update values") {
    CHECK(close(GammaGwrNet::habituate_value(1.0, 0.3, 1.05), 0.7));
    CHECK(close(GammaGwrNet::habituate_value(0.5, 0.1, 1.05), 0.4525));
    const double fp = 1.0 - 1.0 / 1.05;
    CHECK(close(GammaGwrNet::habituate_value(fp, 0.3, 1.05), fp));
    CHECK(close(GammaGwrNet::habituate_value(fp, 0.77, 1.05), fp));
    // clamping
    CHECK(GammaGwrNet::habituate_value(0.0, 5.0, 1.05) >= 0.0);
    CHECK(GammaGwrNet::habituate_value(1.0, 5.0, 3.0) <= 1.0);
}

TEST_CASE("bmu weight update") {
    auto p = params_k(0);
    p.lr_bmu = 0.5;
    GammaGwrNet net(2, p, {{0.0, 0.0}, {9.0, 9.0}});
    const std::vector<double> x{1.0, 0.0};
    net.adapt(0, x.data());
    CHECK(close(net.weight(0)[0], 0.5));
    CHECK(net.weight(0)[1] == 0.0);
    CHECK(close(net.neurons[0].habituation, 0.7));  // tau_b = 0.3
}

TEST_CASE("fully habituated neuron is frozen") {
    auto p = params_k(0);
    p.lr_bmu = 0.9;
    GammaGwrNet net(1, p, {{2.0}, {8.0}});
    net.neurons[0].habituation = 0.0;
    const double x = 7.0;
    net.adapt(0, &x);
    CHECK(net.weight(0)[0] == 2.0);
}

TEST_CASE("context adaptation uses the context rate") {
    auto p = params_k(1);
    p.lr_context = 0.001;
    GammaGwrNet net(1, p, {{3.0}, {8.0}});
    net.global_context[0] = 1.0;  // C_1
    const double x = 3.0;         // equals w, so the weight stays put
    net.adapt(0, &x);
    CHECK(net.weight(0)[0] == 3.0);
    CHECK(close(net.context(0, 1)[0], 0.001));
}

TEST_CASE("neighbors adapt with the neighbor rate") {
    auto p = params_k(0);
    p.lr_bmu = 0.5;
    p.lr_neighbor = 0.1;
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    net.update_edges(0, 1);
    const double x = 2.0;
    net.adapt(0, &x);
    CHECK(close(net.weight(0)[0], 1.0));  // 0 + 0.5*1*(2-0)
    CHECK(close(net.weight(1)[0], 1.1));  // 1 + 0.1*1*(2-1)
    CHECK(close(net.neurons[0].habituation, 0.7));  // tau_b
    CHECK(close(net.neurons[1].habituation, 0.9));  // tau_i = 0.1, from h=1 the slope is -tau
}

TEST_CASE("insertion gate and midpoint") {
    auto p = params_k(0);
    p.insertion_threshold = 0.7;
    p.habituation_threshold = 0.1;
    GammaGwrNet net(2, p, {{0.0, 0.0}, {5.0, 5.0}});

    const std::vector<double> x{2.0, 2.0};
    // activation too high
    CHECK_FALSE(net.maybe_insert(0, 1, 0.99, x.data()).has_value());
    // BMU not trained enough
    CHECK_FALSE(net.maybe_insert(0, 1, 0.1, x.data()).has_value());
    // all gates pass
    net.neurons[0].habituation = 0.05;
    net.update_edges(0, 1);  // give the pair an edge so rewiring is observable
    const auto id = net.maybe_insert(0, 1, 0.1, x.data());
    REQUIRE(id.has_value());
    CHECK(*id == 2);
    CHECK(close(net.weight(2)[0], 1.0));
    CHECK(close(net.weight(2)[1], 1.0));
    CHECK(net.neurons[2].habituation == 1.0);
    CHECK(net.neurons[2].instance_counts.empty());
    CHECK(net.neurons[2].category_counts.empty());
    // rewired: 0-1 gone, 0-2 and 2-1 fresh
    CHECK(net.edges[0].count(1) == 0);
    CHECK(net.edges[0].at(2) == 0);
    CHECK(net.edges[1].at(2) == 0);
}

TEST_CASE("insertion averages contexts with the global context") {
    auto p = params_k(1);
    GammaGwrNet net(1, p, {{0.0}, {10.0}});
    net.neurons[0].habituation = 0.05;
    net.global_context[0] = 4.0;
    const double x = 2.0;
    const auto id = net.maybe_insert(0, 1, 0.1, &x);
    REQUIRE(id.has_value());
    CHECK(close(net.weight(2)[0], 1.0));      // (0 + 2)/2
    CHECK(close(net.context(2, 1)[0], 2.0));  // (0 + 4)/2
}

TEST_CASE("edge bookkeeping") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {1.0}});
    net.update_edges(0, 1);
    CHECK(net.edges[0].at(1) == 0);
    net.edges[0][1] = 7;
    net.edges[1][0] = 7;
    net.update_edges(0, 1);
    CHECK(net.edges[0].at(1) == 0);  // reset, not aged

    // a third neuron to observe aging of the other incident edge
    net.neurons[0].habituation = 0.05;
    const double x = 9.0;
    const auto id = net.maybe_insert(0, 1, 0.01, &x);
    REQUIRE(id.has_value());
    net.edges[0][2] = 3;
    net.edges[2][0] = 3;
    net.update_edges(0, 1);
    CHECK(net.edges[0].at(2) == 4);
    CHECK(net.edges[2].at(0) == 4);
    CHECK(net.edges[0].at(1) == 0);

    CHECK_THROWS(net.update_edges(0, 0));
}

TEST_CASE("temporal links accumulate") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {1.0}});
    net.update_temporal_link(0, 1);
    CHECK(net.temporal[0].at(1) == 1.0);
    net.update_temporal_link(0, 1);
    net.update_temporal_link(0, 1);
    CHECK(net.temporal[0].at(1) == 3.0);
    CHECK(net.temporal[1].empty());
}

TEST_CASE("label counters follow the reinforcement rule") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {1.0}});
    net.update_labels(0, std::nullopt, 0);
    CHECK(net.neurons[0].category_counts.at(0) == 1.0);
    // seed the worked example {mug: 1, can: 0.5}, observe mug again
    net.neurons[0].category_counts = {{0, 1.0}, {1, 0.5}};
    net.update_labels(0, std::nullopt, 0);
    CHECK(close(net.neurons[0].category_counts.at(0), 2.0));
    CHECK(close(net.neurons[0].category_counts.at(1), 0.4));
    // floor at zero
    net.neurons[0].category_counts = {{0, 1.0}, {1, 0.05}};
    net.update_labels(0, std::nullopt, 0);
    CHECK(net.neurons[0].category_counts.at(1) == 0.0);
    // absent labels leave tables alone
    const auto before = net.neurons[0].category_counts;
    net.update_labels(0, std::nullopt, std::nullopt);
    CHECK(net.neurons[0].category_counts == before);
    CHECK(net.neurons[0].instance_counts.empty());
}

TEST_CASE("label prediction argmax and ties") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {1.0}});
    CHECK_FALSE(net.predict_label(0, LabelLevel::category).has_value());
    net.neurons[0].category_counts = {{0, 2.0}, {1, 0.4}};
    CHECK(net.predict_label(0, LabelLevel::category) == 0);
    net.neurons[0].category_counts = {{3, 1.0}, {5, 1.0}};
    CHECK(net.predict_label(0, LabelLevel::category) == 3);
    net.neurons[0].instance_counts = {{9, 0.2}};
    CHECK(net.predict_label(0, LabelLevel::instance) == 9);
}

TEST_CASE("bmu ties break to the lowest id") {
    GammaGwrNet net(2, params_k(0), {{0.0, 0.0}, {1.0, 1.0}});
    const std::vector<double> x{1.0, 0.0};  // manhattan distance 1 to both
    const auto r = net.find_bmu(x.data());
    CHECK(r.best == 0);
    CHECK(r.second == 1);
    CHECK(close(r.d_best, 1.0));
    CHECK(close(r.d_second, 1.0));
}

TEST_CASE("context term dominates identical weights") {
    auto p = params_k(1);
    GammaGwrNet net(2, p, {{1.0, 1.0}, {1.0, 1.0}});
    // c_1 of neuron 0 stays [0,0]; neuron 1 gets [5,5]
    net.context(1, 1)[0] = 5.0;
    net.context(1, 1)[1] = 5.0;
    const std::vector<double> x{1.0, 1.0};
    const auto r = net.find_bmu(x.data());  // global context is zero
    CHECK(r.best == 0);
    CHECK(r.d_best == 0.0);
    CHECK(close(r.d_second, 0.37 * 10.0));
}

TEST_CASE("prune keeps over-age edges of well-trained neurons") {
    auto p = params_k(0);
    p.max_edge_age = 50;
    p.removal_threshold = 0.2;
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    net.neurons[0].habituation = 0.05;
    net.neurons[1].habituation = 0.05;
    net.update_edges(0, 1);
    net.edges[0][1] = 100;
    net.edges[1][0] = 100;
    net.prune();
    REQUIRE(net.size() == 2);
    CHECK(net.edges[0].at(1) == 0);  // retained, age reset
}

TEST_CASE("prune removes over-age edges and isolated poorly-trained neurons") {
    auto p = params_k(0);
    p.max_edge_age = 50;
    p.removal_threshold = 0.2;
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    const double x = 9.0;
    net.neurons[0].habituation = 0.05;
    auto id = net.maybe_insert(0, 1, 0.001, &x);  // neuron 2, edges 0-2, 2-1
    REQUIRE(id.has_value());
    net.neurons[0].habituation = 0.5;  // poorly trained now
    net.neurons[2].habituation = 0.5;
    net.edges[0][2] = 100;
    net.edges[2][0] = 100;
    net.prune();
    // 0-2 deleted (both ends poorly trained); 2 keeps 2-1, so 2 survives;
    // 0 is isolated with h=0.5 >= N_T -> deleted, ids compact
    REQUIRE(net.size() == 2);
    CHECK(net.weight(0)[0] == 1.0);  // old neuron 1
    CHECK(net.weight(1)[0] == 4.5);  // old neuron 2, midpoint of 0 and {9}
    CHECK(net.edges[0].at(1) == 0);
}

TEST_CASE("classic pruning removes everything over-age") {
    auto p = params_k(0);
    p.max_edge_age = 10;
    p.removal_threshold = 1.0;  // classic regime
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    const double x = 9.0;
    net.neurons[0].habituation = 0.05;
    auto id = net.maybe_insert(0, 1, 0.001, &x);
    REQUIRE(id.has_value());
    net.neurons[0].habituation = 0.01;  // would be protected in the gated regime
    net.edges[0][2] = 11;
    net.edges[2][0] = 11;
    net.edges[1][2] = 11;
    net.edges[2][1] = 11;
    net.prune();
    // every edge over-age -> all deleted; all three isolated, floor keeps two
    REQUIRE(net.size() == 2);
    CHECK(net.edge_count() == 0);
}

TEST_CASE("prune never drops below two neurons") {
    auto p = params_k(0);
    p.removal_threshold = 1.0;
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    net.prune();  // both isolated from the start
    CHECK(net.size() == 2);
}

TEST_CASE("prune remaps temporal rows and prev_bmu") {
    auto p = params_k(0);
    p.removal_threshold = 1.0;
    GammaGwrNet net(1, p, {{0.0}, {1.0}});
    const double x = 9.0;
    net.neurons[0].habituation = 0.05;
    auto id = net.maybe_insert(0, 1, 0.001, &x);
    REQUIRE(id.has_value());
    // edges now 0-2, 2-1; neuron 0 will lose its only edge and vanish
    net.edges[0][2] = 99;
    net.edges[2][0] = 99;
    net.temporal[0][2] = 3.0;
    net.temporal[2][1] = 2.0;
    net.temporal[2][0] = 7.0;
    net.prev_bmu = 2;
    net.prune();
    REQUIRE(net.size() == 2);
    // old ids 1,2 -> new ids 0,1
    CHECK(net.prev_bmu == 1);
    CHECK(net.temporal[1].at(0) == 2.0);
    CHECK(net.temporal[1].count(1) == 0);  // link to deleted neuron dropped
    CHECK(net.edges[1].at(0) == 0);
}

TEST_CASE("step on an unlabeled frame moves geometry but not counters") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {1.0}});
    const double x = 0.4;
    const auto out = net.step(&x, std::nullopt, std::nullopt);
    CHECK(out.bmu == 0);  // |0.4-0| < |0.4-1|
    CHECK(net.neurons[0].instance_counts.empty());
    CHECK(net.neurons[0].category_counts.empty());
    CHECK(net.weight(0)[0] != 0.0);
}

TEST_CASE("step records predictions made before the label update") {
    GammaGwrNet net(1, params_k(0), {{0.0}, {5.0}});
    const double x = 0.1;
    const auto first = net.step(&x, 7, 3);
    CHECK_FALSE(first.predicted_instance.has_value());
    CHECK_FALSE(first.predicted_category.has_value());
    const auto second = net.step(&x, 7, 3);
    CHECK(second.predicted_instance == 7);
    CHECK(second.predicted_category == 3);
}

TEST_CASE("insertion gate soundness over a random stream") {
    auto p = params_k(0);
    p.insertion_threshold = 0.7;
    gdm::Rng rng(42);
    GammaGwrNet net(2, p, {{rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}});
    for (int t = 0; t < 500; ++t) {
        const std::vector<double> x{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
        const double h_bmu_before = [&] {
            const auto r = net.find_bmu(x.data());
            return net.neurons[static_cast<std::size_t>(r.best)].habituation;
        }();
        const auto out = net.step(x.data(), std::nullopt, std::nullopt);
        if (out.inserted) {
            CHECK(out.act < p.insertion_threshold);
            CHECK(h_bmu_before < p.habituation_threshold);
        }
        for (const auto& n : net.neurons) {
            CHECK(n.habituation >= 1.0 - 1.0 / p.hab_kappa - 1e-12);
            CHECK(n.habituation <= 1.0);
        }
    }
    // temporal entries never decrease during an epoch
    std::vector<std::map<int, double>> before = net.temporal;
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> x{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
        net.step(x.data(), std::nullopt, std::nullopt);
    }
    for (std::size_t i = 0; i < before.size(); ++i)
        for (const auto& [j, v] : before[i]) CHECK(net.temporal[i].at(j) >= v);
}

TEST_CASE("edge ages never exceed the cap after pruning") {
    auto p = params_k(0);
    p.max_edge_age = 20;
    p.removal_threshold = 0.2;
    gdm::Rng rng(7);
    GammaGwrNet net(2, p, {{0.0, 0.0}, {1.0, 1.0}});
    for (int epoch = 0; epoch < 5; ++epoch) {
        for (int t = 0; t < 200; ++t) {
            const std::vector<double> x{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)};
            net.step(x.data(), std::nullopt, std::nullopt);
        }
        net.prune();
        CHECK(net.size() >= 2);
        for (const auto& adj : net.edges)
            for (const auto& [nb, age] : adj) {
                (void)nb;
                CHECK(age <= p.max_edge_age);
            }
    }
}

TEST_CASE("mahalanobis metric streams maintain a positive scale") {
    auto p = params_k(0);
    p.metric = gdm::MetricKind::mahalanobis_diagonal;
    gdm::Rng rng(11);
    GammaGwrNet net(3, p, {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
    for (int t = 0; t < 300; ++t) {
        const std::vector<double> x{rng.gaussian(), 2.0 * rng.gaussian(), rng.uniform()};
        CHECK_NOTHROW(net.step(x.data(), std::nullopt, std::nullopt));
    }
    CHECK(net.metric_scale().size() == 3);
    for (double v : net.metric_scale()) CHECK(v > 0.0);
}
