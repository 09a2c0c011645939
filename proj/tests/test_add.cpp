#include <catch2/catch_amalgamated.hpp>

#include <nmrdpp/add.hpp>

#include <random>

using namespace nmrdpp;

namespace {

// Random diagrams built from apply-compositions over a few variables.
Add random_add(AddManager& mgr, std::mt19937& rng, size_t vars, int depth) {
    if (depth == 0) {
        switch (rng() % 3) {
            case 0: return mgr.constant(double(rng() % 4));
            case 1: return mgr.constant(0.5 * double(rng() % 3));
            default: return mgr.indicator(rng() % vars);
        }
    }
    Add a = random_add(mgr, rng, vars, depth - 1);
    Add b = random_add(mgr, rng, vars, depth - 1);
    switch (rng() % 4) {
        case 0: return mgr.apply(AddOp::plus, a, b);
        case 1: return mgr.apply(AddOp::times, a, b);
        case 2: return mgr.apply(AddOp::max_of, a, b);
        default: return mgr.apply(AddOp::min_of, a, b);
    }
}

std::vector<bool> bits_of(size_t v, size_t n) {
    std::vector<bool> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = (v >> i) & 1;
    return out;
}

}  // namespace

TEST_CASE("add: apply identities") {
    AddManager mgr;
    mgr.new_var("x");
    mgr.new_var("y");
    Add a = mgr.apply(AddOp::plus, mgr.indicator(0),
                      mgr.apply(AddOp::times, mgr.constant(2.0), mgr.indicator(1)));
    REQUIRE(mgr.apply(AddOp::plus, mgr.constant(0.0), a) == a);
    REQUIRE(mgr.apply(AddOp::times, mgr.constant(1.0), a) != Add{});  // well-formed

    // x ? 0.9 : 0.1 restricted at x
    Add t = mgr.node(0, mgr.constant(0.9), mgr.constant(0.1));
    REQUIRE(mgr.restrict_var(t, 0, true) == mgr.constant(0.9));
    REQUIRE(mgr.restrict_var(t, 0, false) == mgr.constant(0.1));
}

TEST_CASE("add: reduction removes redundant tests") {
    AddManager mgr;
    mgr.new_var("x");
    REQUIRE(mgr.node(0, mgr.constant(0.5), mgr.constant(0.5)) == mgr.constant(0.5));
}

TEST_CASE("add: canonicity equals semantic equality on full enumeration") {
    AddManager mgr;
    const size_t vars = 5;
    for (size_t v = 0; v < vars; ++v) mgr.new_var("v" + std::to_string(v));
    std::mt19937 rng(2024);
    std::vector<Add> pool;
    for (int i = 0; i < 60; ++i) pool.push_back(random_add(mgr, rng, vars, 2 + rng() % 3));
    for (size_t i = 0; i < pool.size(); ++i)
        for (size_t j = i + 1; j < pool.size(); ++j) {
            bool sem_equal = true;
            for (size_t v = 0; v < (size_t(1) << vars) && sem_equal; ++v) {
                auto bits = bits_of(v, vars);
                if (mgr.eval(pool[i], bits) != mgr.eval(pool[j], bits)) sem_equal = false;
            }
            REQUIRE(sem_equal == (pool[i] == pool[j]));
        }
}

TEST_CASE("add: ordered invariant holds on random builds") {
    AddManager mgr;
    for (int v = 0; v < 4; ++v) mgr.new_var("v" + std::to_string(v));
    std::mt19937 rng(7);
    for (int i = 0; i < 100; ++i) {
        Add a = random_add(mgr, rng, 4, 3);
        // walk: variable indices strictly increase root to leaf
        std::function<void(Add, int32_t)> walk = [&](Add x, int32_t bound) {
            if (mgr.is_terminal(x)) return;
            REQUIRE(mgr.top_var(x) > bound);
            int32_t v = mgr.top_var(x);
            walk(mgr.restrict_var(x, static_cast<uint32_t>(v), true), v);
            walk(mgr.restrict_var(x, static_cast<uint32_t>(v), false), v);
        };
        walk(a, -1);
    }
    REQUIRE_THROWS_AS(mgr.node(2, mgr.node(1, mgr.constant(1.0), mgr.constant(0.0)),
                               mgr.constant(0.0)),
                      std::logic_error);
}

TEST_CASE("add: expectation by multiply and sum-out matches brute force") {
    AddManager mgr;
    const size_t vars = 3;
    for (size_t v = 0; v < vars; ++v) mgr.new_var("v" + std::to_string(v));
    std::mt19937 rng(99);
    for (int iter = 0; iter < 50; ++iter) {
        Add value = random_add(mgr, rng, vars, 3);
        size_t target = rng() % vars;
        Add weight = mgr.node(static_cast<uint32_t>(target),
                              mgr.constant(0.25 * double(rng() % 5)),
                              mgr.constant(0.25 * double(rng() % 5)));
        Add combined = mgr.sum_out(mgr.apply(AddOp::times, value, weight), static_cast<uint32_t>(target));
        for (size_t v = 0; v < (size_t(1) << vars); ++v) {
            auto bits = bits_of(v, vars);
            double expect = 0.0;
            for (bool b : {true, false}) {
                auto probe = bits;
                probe[target] = b;
                expect += mgr.eval(value, probe) * mgr.eval(weight, probe);
            }
            REQUIRE(mgr.eval(combined, bits) == Catch::Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("add: threshold and rename") {
    AddManager mgr;
    mgr.new_var("a");
    mgr.new_var("b");
    Add x = mgr.node(0, mgr.constant(0.3), mgr.constant(0.0));
    Add t = mgr.threshold_pos(x);
    REQUIRE(mgr.eval(t, {true, false}) == 1.0);
    REQUIRE(mgr.eval(t, {false, false}) == 0.0);

    Add r = mgr.rename(x, [](uint32_t v) { return v + 1; });
    REQUIRE(mgr.eval(r, {false, true}) == 0.3);
    REQUIRE(mgr.eval(r, {true, false}) == 0.0);
}

TEST_CASE("add: node limit raises a resource error") {
    AddManager mgr(8);
    mgr.new_var("x");
    mgr.new_var("y");
    REQUIRE_THROWS_AS(
        [&] {
            Add acc = mgr.constant(0.0);
            for (int i = 0; i < 64; ++i)
                acc = mgr.apply(AddOp::plus, acc, mgr.constant(double(i)));
            return acc;
        }(),
        ResourceLimitError);
}

TEST_CASE("add: dot rendering mentions variables and boxes terminals") {
    AddManager mgr;
    mgr.new_var("heads");
    Add t = mgr.node(0, mgr.constant(0.9), mgr.constant(0.1));
    std::string dot = mgr.to_dot(t);
    REQUIRE(dot.find("heads") != std::string::npos);
    REQUIRE(dot.find("shape=box") != std::string::npos);
    REQUIRE(dot.find("style=dashed") != std::string::npos);
}
