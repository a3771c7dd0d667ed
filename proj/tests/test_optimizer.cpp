#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support/scenes.hpp"
#include "xpatch/boundary.hpp"
#include "xpatch/config.hpp"
#include "xpatch/geometry.hpp"

using namespace xpatch;
using namespace xpatch::optimizer;
using xpatch::testing::make_scene;
using xpatch::testing::salience;
using xpatch::testing::synthetic_pair;

namespace {

const Box kBox{8, 8, 56, 88};  // 48 x 80; patches at (32, 36) and (32, 56), r = 12.8

ScenePair scene() { return make_scene(96, 64, kBox); }

// Mass near both patch centers: reachable by the initial circles.
oracle::SalienceMap near_centers() {
    return salience(96, 64, kBox, [](double x, double y) {
        return std::hypot(x - 32, y - 36) < 4 || std::hypot(x - 32, y - 56) < 4 ? 1.0 : 0.0;
    });
}

// Mass only in the top-left corner of the box: nothing a patch can reach.
oracle::SalienceMap corner() {
    return salience(96, 64, kBox, [](double x, double y) { return x < 12 && y < 12 ? 1.0 : 0.0; });
}

// Blobs just outside the initial circles plus a floor everywhere else.
oracle::SalienceMap ring(double angle) {
    return salience(96, 64, kBox, [angle](double x, double y) {
        double v = 0.02;
        for (Point2 c : {Point2{32, 36}, Point2{32, 56}}) {
            Point2 b{c.x + 15 * std::cos(angle), c.y + 15 * std::sin(angle)};
            v += std::exp(-(std::pow(x - b.x, 2) + std::pow(y - b.y, 2)) / 8);
        }
        return v;
    });
}

RunConfig small_config(int gens = 30) {
    RunConfig c;
    c.max_generations = gens;
    c.population_size = 12;
    return c;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("substreams are deterministic and distinct") {
    auto a = substream(1, 2, 3), b = substream(1, 2, 3), c = substream(1, 2, 4), d = substream(1, 3, 3);
    auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("regions follow the configured layout") {
    RunConfig c;
    auto regions = build_regions(c, kBox);
    REQUIRE(regions.size() == 2);
    CHECK(regions[0]->center == Point2{32, 36});
    CHECK(regions[1]->center == Point2{32, 56});
    CHECK(regions[0]->radius == doctest::Approx(12.8));
    CHECK(regions[0]->n == 8);
}

TEST_CASE("initial population") {
    RunConfig c;
    auto regions = build_regions(c, kBox);
    auto pop = init_population(c, regions, 42);
    REQUIRE(pop.members.size() == 30);
    for (std::size_t p = 0; p < regions.size(); ++p)
        CHECK(pop.members[0].patches[p].anchors ==
              geometry::initial_anchors(regions[p]->center, regions[p]->radius, regions[p]->n));
    for (const auto& m : pop.members) CHECK(m.all_feasible());
    CHECK_FALSE(pop.members[1] == pop.members[0]);
    auto again = init_population(c, regions, 42);
    for (std::size_t i = 0; i < 30; ++i) CHECK(again.members[i] == pop.members[i]);
    RunConfig tiny = c;
    tiny.population_size = 3;
    CHECK_THROWS_AS(init_population(tiny, regions, 1), ConfigError);
}

TEST_CASE("flat view") {
    RunConfig c;
    auto pop = init_population(c, build_regions(c, kBox), 1);
    auto g = pop.members[3];
    auto f = g.flat();
    CHECK(f.size() == 2 * 8 * 2);
    CHECK(f[0] == g.patches[0].anchors[0].x);
    CHECK(f[17] == g.patches[1].anchors[0].y);
    auto h = pop.members[0];
    h.assign_flat(f);
    CHECK(h == g);
    std::vector<double> short_vec(5);
    CHECK_THROWS(h.assign_flat(short_vec));
}

TEST_CASE("propose child") {
    RunConfig c;
    auto pop = init_population(c, build_regions(c, kBox), 7);
    pop.fitness.assign(pop.members.size(), {});
    // F = 0, CR = 1: child is x_r1 for some r1 != i
    for (std::size_t i = 0; i < pop.members.size(); ++i) {
        auto rng = substream(7, 1, i);
        auto child = propose_child(pop, i, 0.0, 1.0, rng);
        bool is_member = false;
        for (std::size_t r = 0; r < pop.members.size(); ++r)
            if (r != i && child == pop.members[r]) is_member = true;
        CHECK(is_member);
    }
    // identical members: child is that member
    Population same = pop;
    for (auto& m : same.members) m = pop.members[4];
    for (std::size_t i = 0; i < same.members.size(); ++i) {
        auto rng = substream(8, 1, i);
        CHECK(propose_child(same, i, 0.5, 0.7, rng) == pop.members[4]);
    }
    // always feasible
    for (int t = 0; t < 1000; ++t) {
        auto rng = substream(9, t, t % 30);
        CHECK(propose_child(pop, t % 30, 1.5, 0.9, rng).all_feasible());
    }
}

TEST_CASE("evaluate") {
    auto s = scene();
    RunConfig c;
    auto pop = init_population(c, build_regions(c, kBox), 1);

    auto full = synthetic_pair(s, near_centers(), near_centers());
    auto clean = clean_scores(s, full);
    CHECK(clean.visible == doctest::Approx(0.9));
    auto v = evaluate(pop.members[0], s, full, c, clean);
    CHECK(v.dis_vis == doctest::Approx(4.5));
    CHECK(v.dis_inf == doctest::Approx(4.5));
    CHECK(v.joint == doctest::Approx(std::exp(9.0)));
    CHECK(full.total_queries() == 4);

    auto none = synthetic_pair(s, corner(), corner());
    auto clean2 = clean_scores(s, none);
    auto w = evaluate(pop.members[0], s, none, c, clean2);
    CHECK(w.dis_vis == 0.0);
    CHECK(w.dis_inf == 0.0);
    CHECK(w.joint == 1.0);
    CHECK(none.total_queries() == 4);
}

TEST_CASE("degenerate genomes cost no queries") {
    auto s = scene();
    RunConfig c;
    auto pop = init_population(c, build_regions(c, kBox), 1);
    auto g = pop.members[0];
    g.patches[0].anchors[1] = g.patches[0].anchors[0];  // coincident anchors
    auto o = synthetic_pair(s, ring(0.3), ring(1.9));
    auto clean = clean_scores(s, o);
    auto v = evaluate(g, s, o, c, clean);
    CHECK(v.degenerate);
    CHECK(o.total_queries() == 2);
}

TEST_CASE("easy scene succeeds at once") {
    auto s = scene();
    auto o = synthetic_pair(s, near_centers(), near_centers());
    auto r = run_attack(s, o, RunConfig{}, 3);
    CHECK(r.success);
    CHECK(r.stop_generation == 0);
    CHECK(r.queries_used == 2 + 2 * 30);
    CHECK(r.queries_used == o.total_queries());
    CHECK(r.masks.size() == 2);
    CHECK(fitness::attack_success(r.f_vis_adv, r.f_inf_adv, 0.7));
}

TEST_CASE("T = 0 returns the best initial member") {
    auto s = scene();
    auto o = synthetic_pair(s, ring(0.4), ring(2.2));
    RunConfig c = small_config(0);
    auto r = run_attack(s, o, c, 5);
    CHECK(r.stop_generation == 0);
    CHECK(r.queries_used == 2 + 2 * 12);
    auto pop = init_population(c, build_regions(c, kBox), 5);
    auto clean = clean_scores(s, o);
    double best = -1;
    for (const auto& m : pop.members) best = std::max(best, evaluate(m, s, o, c, clean).objective);
    CHECK(r.best_fitness.objective == best);
    CHECK(r.history.size() == 1);
}

TEST_CASE("attack run invariants") {
    auto s = scene();
    for (std::uint64_t seed : {1u, 2u}) {
        auto o = synthetic_pair(s, ring(0.5), ring(2.5));
        RunConfig c = small_config(40);
        auto r = run_attack(s, o, c, seed);
        // queries: clean + initial population + one child per member per generation
        CHECK(r.queries_used == o.total_queries());
        CHECK(r.queries_used <= static_cast<std::uint64_t>(2 * c.population_size * (r.stop_generation + 2)));
        CHECK(r.best.all_feasible());
        for (std::size_t k = 1; k < r.history.size(); ++k)
            CHECK(r.history[k].best_objective >= r.history[k - 1].best_objective);
        // re-evaluation reproduces the reported scores
        auto o2 = synthetic_pair(s, ring(0.5), ring(2.5));
        auto clean = clean_scores(s, o2);
        auto again = evaluate(r.best, s, o2, c, clean);
        CHECK(again.f_vis_adv == r.f_vis_adv);
        CHECK(again.f_inf_adv == r.f_inf_adv);
        CHECK(r.success == fitness::attack_success(r.f_vis_adv, r.f_inf_adv, c.thre));
        if (r.success) CHECK(std::max(again.f_vis_adv, again.f_inf_adv) < c.thre);
    }
}

TEST_CASE("same seed is bit-identical, serial or parallel") {
    auto s = scene();
    RunConfig c = small_config(25);
    auto run = [&](int jobs) {
        auto o = synthetic_pair(s, ring(0.5), ring(2.5));
        RunOptions opt;
        opt.jobs = jobs;
        return run_attack(s, o, c, 11, opt);
    };
    auto a = run(1), b = run(1), p = run(4);
    CHECK(testing::same_result(a, b));
    CHECK(testing::same_result(a, p));
}

TEST_CASE("progress records") {
    auto s = scene();
    auto o = synthetic_pair(s, corner(), corner());
    RunConfig c = small_config(5);
    std::vector<ProgressRecord> seen;
    RunOptions opt;
    opt.on_progress = [&](const ProgressRecord& r) { seen.push_back(r); };
    auto r = run_attack(s, o, c, 1, opt);
    CHECK_FALSE(r.success);
    CHECK(r.stop_generation == 5);
    REQUIRE(seen.size() == 6);
    for (int k = 0; k <= 5; ++k) CHECK(seen[k].generation == k);
    CHECK(seen.back().queries == r.queries_used);
    CHECK(seen[0].to_line().find("\"generation\":0") != std::string::npos);
}

TEST_CASE("undetectable scenes are rejected") {
    auto s = scene();
    auto o = synthetic_pair(s, ring(0.1), ring(0.2), 0.9, 0.65);
    CHECK_THROWS_AS(run_attack(s, o, RunConfig{}, 1), SceneRejected);
    auto eq = synthetic_pair(s, ring(0.1), ring(0.2), 0.7, 0.9);
    CHECK_THROWS_AS(run_attack(s, eq, RunConfig{}, 1), SceneRejected);
}

}
