#include "edgeperturb/graph.hpp"

#include "edgeperturb/errors.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace ep;

namespace {

Graph triangle(std::vector<int> labels = {}) {
    return Graph::make(3, {{0, 1}, {1, 2}, {0, 2}}, Matrix{}, std::move(labels));
}

} // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("construction canonicalizes and validates") {
    Graph g = Graph::make(4, {{2, 1}, {0, 3}, {1, 0}});
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 3);
    // canonical order: sorted pairs with u < v
    CHECK(g.edges()[0] == Edge(0, 1));
    CHECK(g.edges()[1] == Edge(0, 3));
    CHECK(g.edges()[2] == Edge(1, 2));
    CHECK(g.has_edge(1, 2));
    CHECK(g.has_edge(2, 1));
    CHECK_FALSE(g.has_edge(2, 3));
    CHECK(g.degree(0) == 2);
    CHECK(g.degree(2) == 1);

    CHECK_THROWS_AS(Graph::make(3, {{1, 1}}), ValidationError);
    CHECK_THROWS_AS(Graph::make(3, {{0, 1}, {1, 0}}), ValidationError);
    CHECK_THROWS_AS(Graph::make(3, {{0, 5}}), ValidationError);
}

TEST_CASE("split nodes must carry labels") {
    std::vector<int> labels = {0, kUnlabeled, 1};
    std::vector<SplitTag> split = {SplitTag::Train, SplitTag::None, SplitTag::Test};
    CHECK_NOTHROW(Graph::make(3, {{0, 1}}, Matrix{}, labels, split));

    split[1] = SplitTag::Val;
    CHECK_THROWS_AS(Graph::make(3, {{0, 1}}, Matrix{}, labels, split), ValidationError);
}

TEST_CASE("feature row count must match nodes") {
    Matrix x = Matrix::Zero(2, 5);
    CHECK_THROWS_AS(Graph::make(3, {{0, 1}}, x), ValidationError);
    x = Matrix::Zero(3, 5);
    CHECK_NOTHROW(Graph::make(3, {{0, 1}}, x));
}

TEST_CASE("feature matrix picks dense or sparse by size") {
    std::vector<Eigen::Triplet<double>> entries{{0, 0, 1.0}, {1, 3, 2.5}};
    FeatureMatrix small = FeatureMatrix::from_triplets(2, 4, entries);
    CHECK_FALSE(small.is_sparse());
    CHECK(small.row(1)(3) == doctest::Approx(2.5));

    // 9000 * 9000 = 81M entries > 64M cap
    FeatureMatrix big = FeatureMatrix::from_triplets(9000, 9000, entries);
    CHECK(big.is_sparse());
    CHECK(big.row(1)(3) == doctest::Approx(2.5));
    CHECK(big.row(2).norm() == 0.0);
}

TEST_CASE("apply_plan set arithmetic") {
    Graph tri = triangle();

    SUBCASE("empty plan leaves the graph unchanged") {
        Graph same = apply_plan(tri, {});
        CHECK(same.edges() == tri.edges());
    }
    SUBCASE("remove one triangle edge yields a path") {
        PerturbationPlan plan;
        plan.removes = {Edge(0, 2)};
        Graph path = apply_plan(tri, plan);
        CHECK(path.num_edges() == 2);
        CHECK(path.has_edge(0, 1));
        CHECK(path.has_edge(1, 2));
        CHECK_FALSE(path.has_edge(0, 2));
    }
    SUBCASE("invalid plans are rejected") {
        PerturbationPlan add_existing;
        add_existing.adds = {Edge(0, 1)};
        CHECK_THROWS_AS(apply_plan(tri, add_existing), ValidationError);

        PerturbationPlan remove_missing;
        remove_missing.removes = {Edge(0, 1)};
        Graph pair = Graph::make(3, {{1, 2}});
        CHECK_THROWS_AS(apply_plan(pair, remove_missing), ValidationError);

        PerturbationPlan out_of_range;
        out_of_range.adds = {Edge(0, 9)};
        CHECK_THROWS_AS(apply_plan(tri, out_of_range), ValidationError);
    }
}

TEST_CASE("apply_plan inverse restores the original graph" * doctest::description("200-case property")) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        Graph g = testgen::gnp_graph(20, 0.15, 3, rng);
        PerturbationPlan plan = testgen::random_plan(g, 12, rng);
        Graph forward = apply_plan(g, plan);
        Graph back = apply_plan(forward, plan.inverse());
        REQUIRE(back.edges() == g.edges());
    }
}

TEST_CASE("flip count equals adjacency L0 and L1 difference" * doctest::description("200-case property")) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        Graph g = testgen::gnp_graph(12, 0.2, 2, rng);
        PerturbationPlan plan = testgen::random_plan(g, 8, rng);
        Graph h = apply_plan(g, plan);
        Matrix diff = h.dense_adjacency() - g.dense_adjacency();
        double l1 = diff.cwiseAbs().sum();
        double l0 = (diff.array() != 0.0).count();
        REQUIRE(l0 == doctest::Approx(l1));          // binary diff: L0 = L1
        REQUIRE(l0 == doctest::Approx(2.0 * plan.size()));  // each pair flips two entries
    }
}

TEST_CASE("epr scales the plan size by the original edge count") {
    Graph tri = triangle();
    PerturbationPlan plan;
    plan.removes = {Edge(0, 2)};
    CHECK(Epr::of(plan, tri).value == doctest::Approx(1.0 / 3.0));
    CHECK(Epr::of({}, tri).value == 0.0);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Graph g = testgen::gnp_graph(15, 0.3, 2, rng);
        if (g.num_edges() == 0) continue;
        PerturbationPlan plan2 = testgen::random_plan(g, 10, rng);
        double lhs = Epr::of(plan2, g).value * double(g.num_edges());
        REQUIRE(lhs == doctest::Approx(double(plan2.size())));
    }
}

TEST_CASE("edge homophily") {
    CHECK(edge_homophily(triangle({0, 0, 0})) == doctest::Approx(1.0));
    CHECK(edge_homophily(triangle({0, 0, 1})) == doctest::Approx(1.0 / 3.0));

    // star: center class 0, three leaves class 1
    Graph star = Graph::make(4, {{0, 1}, {0, 2}, {0, 3}}, Matrix{}, {0, 1, 1, 1});
    CHECK(edge_homophily(star) == doctest::Approx(0.0));

    SUBCASE("labeled_only drops edges with unlabeled endpoints") {
        Graph partial = triangle({0, 0, kUnlabeled});
        CHECK(edge_homophily(partial, true) == doctest::Approx(1.0));
        CHECK(edge_homophily(partial, false) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("no qualifying edges is an error") {
        Graph unlabeled = triangle();
        CHECK_THROWS_AS(edge_homophily(unlabeled, true), ValidationError);
    }
}

TEST_CASE("connected components") {
    CHECK(connected_components(Graph::make(4, {{0, 1}, {1, 2}, {2, 3}})).count == 1);

    Graph two_triangles = Graph::make(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    ComponentSplit cs = connected_components(two_triangles);
    CHECK(cs.count == 2);
    CHECK(cs.component[0] == cs.component[2]);
    CHECK(cs.component[3] == cs.component[5]);
    CHECK(cs.component[0] != cs.component[3]);
    // ids ordered by smallest member
    CHECK(cs.component[0] == 0);
    CHECK(cs.component[3] == 1);

    SUBCASE("matches an independent DFS oracle on random graphs") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            auto edges = testgen::gnp_edges(20, 0.05, rng);
            Graph g = Graph::make(20, edges);
            REQUIRE(connected_components(g).count == oracle::component_count(20, edges));
        }
    }
}

TEST_CASE("planted partition generator") {
    SUBCASE("p_out = 0 forces perfect homophily") {
        Graph g = generate_planted_partition(3, 30, 0.3, 0.0, 8, 42);
        CHECK(edge_homophily(g, false) == doctest::Approx(1.0));
    }
    SUBCASE("same seed reproduces the edge set; different seed does not") {
        Graph a = generate_planted_partition(3, 30, 0.2, 0.02, 8, 9);
        Graph b = generate_planted_partition(3, 30, 0.2, 0.02, 8, 9);
        Graph c = generate_planted_partition(3, 30, 0.2, 0.02, 8, 10);
        CHECK(a.edges() == b.edges());
        CHECK(a.edges() != c.edges());
    }
    SUBCASE("pinned fixture homophily") {
        Graph g = generate_planted_partition(4, 50, 0.2, 0.01, 8, 7);
        CHECK(edge_homophily(g, false) > 0.8);
    }
    SUBCASE("split covers every class at roughly 60/20/20") {
        Graph g = generate_planted_partition(4, 50, 0.2, 0.01, 8, 3);
        CHECK(g.nodes_with_tag(SplitTag::Train).size() == 120);
        CHECK(g.nodes_with_tag(SplitTag::Val).size() == 40);
        CHECK(g.nodes_with_tag(SplitTag::Test).size() == 40);
        std::set<int> train_classes;
        for (NodeId u : g.nodes_with_tag(SplitTag::Train)) train_classes.insert(g.label(u));
        CHECK(train_classes.size() == 4);
    }
    SUBCASE("bad parameters are rejected") {
        CHECK_THROWS_AS(generate_planted_partition(0, 10, 0.2, 0.0, 8, 1), ValidationError);
        CHECK_THROWS_AS(generate_planted_partition(2, 10, 0.1, 0.2, 8, 1), ValidationError);
    }
}

TEST_SUITE_END();
