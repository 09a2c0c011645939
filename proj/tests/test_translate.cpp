#include <catch2/catch_amalgamated.hpp>

#include <nmrdpp/domains.hpp>
#include <nmrdpp/translate.hpp>

#include "common.hpp"

#include <thread>

using namespace nmrdpp;

namespace {

const char* kCoin = R"(
action flip
  heads (0.5)
endaction
action tilt
  heads (heads (0.9) (0.1))
endaction
heads = ff
[first, 5.0]? heads and ~prv (pdi heads)
[seq, 1.0]? (prv^2 heads) and (prv heads) and ~heads
)";

const char* kFig3 = R"(
action a
  p (p (1.0) (0.8))
  q (p (q (1.0) (0.0)) (q (1.0) (0.8)))
endaction
action b
  q (p (q (1.0) (0.0)) (q (1.0) (0.8)))
endaction
p = ff
q = ff
[r, 1.0]? q and prv^2 p
)";

const char* kFig3Fltl = R"(
action a
  p (p (1.0) (0.8))
  q (p (q (1.0) (0.0)) (q (1.0) (0.8)))
endaction
action b
  q (p (q (1.0) (0.0)) (q (1.0) (0.8)))
endaction
p = ff
q = ff
dialect fltl
[r, 1.0]? alw(~p or nxt^2 ~q or nxt^2 $)
)";

State find_state(const Nmrdp& d, std::initializer_list<const char*> trues) {
    State s(d.vocab.size());
    for (const char* name : trues) s.set(static_cast<uint32_t>(d.vocab.find(name)), true);
    return s;
}

}  // namespace

TEST_CASE("regress: worked example") {
    Vocabulary v;
    uint32_t p = v.intern("p");
    v.intern("q");
    // f = (prv ~q) and (p snc q)
    Formula f = parse_formula("prv ~q and (p snc q)", Dialect::pltl, v);

    State sp(2);
    sp.set(p, true);
    REQUIRE(regress(f, sp) == simplify(parse_formula("~q and (p snc q)", Dialect::pltl, v)));

    State none(2);
    REQUIRE(regress(f, none) == Formula::ff());

    REQUIRE(regress(Formula::atom(p), sp) == Formula::tt());
}

TEST_CASE("regress soundness on random formulas and sequences") {
    Vocabulary v;
    v.intern("a"); v.intern("b"); v.intern("c");
    std::mt19937 rng(1234);
    auto random_pltl = [&](int depth) {
        std::function<Formula(int)> rec = [&](int d) -> Formula {
            if (d == 0) {
                switch (rng() % 4) {
                    case 0: return Formula::tt();
                    case 1: return Formula::ff();
                    default: return Formula::atom(rng() % 3);
                }
            }
            Formula x = rec(d - 1), y = rec(d - 1);
            switch (rng() % 5) {
                case 0: return Formula::conj(x, y);
                case 1: return Formula::disj(x, y);
                case 2: return Formula::neg(x);
                case 3: return Formula::prv(x);
                default: return Formula::snc(x, y);
            }
        };
        return rec(depth);
    };
    for (int iter = 0; iter < 400; ++iter) {
        Formula f = random_pltl(1 + rng() % 4);
        StateSequence seq = testutil::random_sequence(rng, 3, 6);
        for (size_t i = 1; i < seq.size(); ++i) {
            bool direct = eval_pltl(seq, i, f);
            bool reg = eval_pltl(seq, i - 1, regress(f, seq[i]));
            REQUIRE(direct == reg);
        }
    }
}

TEST_CASE("successors: coin actions") {
    Nmrdp d = parse_world(kCoin);
    State tails(1);
    auto flip = successors(d, tails, d.actions[0]);
    REQUIRE(flip.size() == 2);
    REQUIRE(flip[0].second == Catch::Approx(0.5));

    State heads = find_state(d, {"heads"});
    auto tilt = successors(d, heads, d.actions[1]);
    // stays heads with 0.9
    bool found = false;
    for (const auto& [t, pr] : tilt)
        if (t == heads) {
            REQUIRE(pr == Catch::Approx(0.9));
            found = true;
        }
    REQUIRE(found);

    ActionSpec noop{"noop", {}};
    auto pt = successors(d, heads, noop);
    REQUIRE(pt.size() == 1);
    REQUIRE(pt[0].first == heads);
    REQUIRE(pt[0].second == 1.0);
}

TEST_CASE("pltlmin_preprocess: label function of the two-proposition example") {
    Nmrdp d = parse_world(kFig3);
    LabelFunction l = pltlmin_preprocess(d, d.pltl_rewards());
    Vocabulary& v = d.vocab;
    Formula reward = simplify(parse_formula("q and prv^2 p", Dialect::pltl, v));
    Formula prv_p = simplify(parse_formula("prv p", Dialect::pltl, v));
    Formula just_p = Formula::atom(static_cast<uint32_t>(v.find("p")));

    auto members = [&](std::initializer_list<const char*> names) {
        State s = find_state(d, names);
        return l.map.at(s);
    };

    auto expect = [&](std::vector<Formula> fs, std::vector<Formula> got) {
        std::sort(fs.begin(), fs.end());
        REQUIRE(got == fs);
    };
    expect({reward}, members({"p"}));
    expect({reward, prv_p, just_p}, members({}));
    expect({reward, prv_p, just_p}, members({"q"}));
    expect({reward, prv_p, just_p}, members({"p", "q"}));
}

TEST_CASE("pltlmin_preprocess: atemporal rewards leave only the reward formula") {
    Nmrdp d = parse_world(kFig3);
    PltlRewardSpec spec;
    spec.entries.push_back(
        {"flat", Formula::atom(static_cast<uint32_t>(d.vocab.find("p"))), 1.0});
    LabelFunction l = pltlmin_preprocess(d, spec);
    for (const auto& [s, fs] : l.map) REQUIRE(fs == std::vector<Formula>{spec.entries[0].formula});
}

TEST_CASE("coin: the preprocessed translation has exactly 6 e-states") {
    Nmrdp d = parse_world(kCoin);
    LabelFunction l = pltlmin_preprocess(d, d.pltl_rewards());
    ExpandedMdp m = pltlmin_translate(d, d.pltl_rewards(), l);
    REQUIRE(m.size() == 6);

    ExpandedMdp sim = pltlsim_translate(d, d.pltl_rewards());
    REQUIRE(sim.size() >= 6);
    REQUIRE(m.size() <= sim.size());

    // annotations drawn from the closure; every e-state label decides both rewards
    REQUIRE(check_equivalence(d, m, 6).pass());
    REQUIRE(check_equivalence(d, sim, 6).pass());
}

TEST_CASE("empty reward spec: translation reproduces the reachable fragment") {
    Nmrdp d = parse_world(kFig3);
    PltlRewardSpec empty;
    ExpandedMdp m = pltlsim_translate(d, empty);
    REQUIRE(m.size() == reachable_states(d).size());
    for (const auto& e : m.estates) REQUIRE(e.reward == 0.0);

    LabelFunction l = pltlmin_preprocess(d, empty);
    REQUIRE(pltlmin_translate(d, empty, l).size() == m.size());

    Nmrdp df = parse_world(kFig3Fltl);
    ExpandedMdp mf = fltl_translate(df, FltlRewardSpec{});
    REQUIRE(mf.size() == reachable_states(df).size());
}

TEST_CASE("figure-3 domain: preprocessed translation beats the closure route") {
    Nmrdp d = parse_world(kFig3);
    LabelFunction l = pltlmin_preprocess(d, d.pltl_rewards());
    ExpandedMdp mmin = pltlmin_translate(d, d.pltl_rewards(), l);
    ExpandedMdp msim = pltlsim_translate(d, d.pltl_rewards());
    REQUIRE(mmin.size() < msim.size());
    REQUIRE(check_equivalence(d, mmin, 6).pass());
    REQUIRE(check_equivalence(d, msim, 6).pass());
}

TEST_CASE("fltl_translate: figure-3 labels come from the three progressed formulas") {
    Nmrdp d = parse_world(kFig3Fltl);
    ExpandedMdp m = fltl_translate(d, d.fltl_rewards());
    Vocabulary& v = d.vocab;
    Formula f1 = simplify(parse_formula("alw(~p or nxt^2 ~q or nxt^2 $)", Dialect::fltl, v));
    Formula f2 = simplify(parse_formula("nxt ~q or nxt $", Dialect::fltl, v));
    Formula f3 = simplify(parse_formula("~q or $", Dialect::fltl, v));

    REQUIRE(m.size() == 7);  // including the extra left-hand e-state
    for (const auto& e : m.estates) {
        REQUIRE(e.ann.formulas.size() == 1);
        Formula label = e.ann.formulas[0];
        // the label is a conjunction over {f1, f2, f3}
        std::vector<Formula> parts;
        std::function<void(Formula)> split = [&](Formula g) {
            if (g.op() == Op::And) {
                split(g.lhs());
                split(g.rhs());
            } else {
                parts.push_back(g);
            }
        };
        split(label);
        for (Formula part : parts) {
            bool known = part == f1 || part == f2 || part == f3;
            INFO(print_formula(label, v));
            REQUIRE(known);
        }
    }

    REQUIRE(check_equivalence(d, m, 6).pass());
}

TEST_CASE("fltl_translate: literal labelling splits the left-hand state three ways") {
    Nmrdp d = parse_world(kFig3Fltl);
    TranslateOptions literal;
    literal.one_step_ahead = false;
    ExpandedMdp m = fltl_translate(d, d.fltl_rewards(), {}, literal);

    State p_only = find_state(d, {"p"});
    size_t over_p = 0;
    for (const auto& e : m.estates)
        if (e.state == p_only) ++over_p;
    REQUIRE(over_p == 3);

    ExpandedMdp ahead = fltl_translate(d, d.fltl_rewards());
    size_t ahead_over_p = 0;
    for (const auto& e : ahead.estates)
        if (e.state == p_only) ++ahead_over_p;
    REQUIRE(ahead_over_p < over_p);
    REQUIRE(check_equivalence(d, m, 6).pass());
}

TEST_CASE("control knowledge prunes actions whose progression fails") {
    Nmrdp d = parse_world(kFig3Fltl);
    // after p, q must hold next
    Formula c0 = parse_formula("alw(~p or nxt q)", Dialect::fltl, d.vocab, false);
    ExpandedMdp m = fltl_translate(d, d.fltl_rewards(), ControlKnowledge::make(c0));

    size_t dead = 0;
    for (uint32_t e = 0; e < m.size(); ++e)
        if (m.estates[e].ann.control && m.estates[e].ann.control->is_false()) {
            ++dead;
            REQUIRE(m.dead(e));
        }
    REQUIRE(dead > 0);
}

TEST_CASE("progression failure during translation carries a feasible witness") {
    Nmrdp d = parse_world(kFig3Fltl);
    std::vector<FltlRewardSpec::Entry> entries;
    entries.push_back({parse_formula("nxt ~p or $", Dialect::fltl, d.vocab, false), 1.0});
    FltlRewardSpec bad = FltlRewardSpec::make(std::move(entries));
    try {
        fltl_translate(d, bad);
        FAIL("expected ProgressionFailure");
    } catch (const ProgressionFailure& e) {
        REQUIRE(e.witness.size() >= 2);
        REQUIRE(e.witness.back().get(static_cast<uint32_t>(d.vocab.find("p"))));
    }
}

TEST_CASE("check_equivalence flags an injected probability fault") {
    Nmrdp d = parse_world(kCoin);
    LabelFunction l = pltlmin_preprocess(d, d.pltl_rewards());
    ExpandedMdp m = pltlmin_translate(d, d.pltl_rewards(), l);
    REQUIRE(check_equivalence(d, m, 5).pass());

    ExpandedMdp broken = m;
    broken.trans[0][0][0].second += 0.01;
    EquivalenceReport rep = check_equivalence(d, broken, 5);
    REQUIRE_FALSE(rep.pass());
    bool item3 = false;
    for (const auto& v : rep.violations)
        if (v.find("item 3") != std::string::npos) item3 = true;
    REQUIRE(item3);
}

TEST_CASE("check_equivalence flags an injected reward fault") {
    Nmrdp d = parse_world(kCoin);
    ExpandedMdp m = pltlsim_translate(d, d.pltl_rewards());
    ExpandedMdp broken = m;
    broken.estates[broken.initial].reward += 1.0;
    EquivalenceReport rep = check_equivalence(d, broken, 5);
    REQUIRE_FALSE(rep.pass());
}

TEST_CASE("audit_minimality: no merges required on progression output") {
    Nmrdp d = parse_world(kFig3Fltl);
    ExpandedMdp m = fltl_translate(d, d.fltl_rewards());
    MinimalityReport blind = audit_minimality(m, 6, MinimalityKind::blind);
    REQUIRE(blind.merge_required.empty());

    // the left-hand extra e-state is indistinguishable on feasible futures
    MinimalityReport truemin = audit_minimality(m, 6, MinimalityKind::true_minimality);
    REQUIRE(truemin.merge_required.empty());
    State p_only = find_state(d, {"p"});
    bool left_suspect = false;
    for (auto [e1, e2] : truemin.suspect)
        if (m.tau(e1) == p_only && m.tau(e2) == p_only) left_suspect = true;
    REQUIRE(left_suspect);
    // and distinguishable when arbitrary continuations are allowed
    bool left_blind_suspect = false;
    for (auto [e1, e2] : blind.suspect)
        if (m.tau(e1) == p_only && m.tau(e2) == p_only) left_blind_suspect = true;
    REQUIRE_FALSE(left_blind_suspect);
}

TEST_CASE("audit_minimality: injected duplicate is reported as merge-required") {
    Nmrdp d = parse_world(kFig3Fltl);
    ExpandedMdp m = fltl_translate(d, d.fltl_rewards());
    ExpandedMdp broken = m;
    uint32_t dup = static_cast<uint32_t>(broken.size());
    broken.estates.push_back(broken.estates[broken.initial]);
    broken.trans.push_back(broken.trans[broken.initial]);
    // make it reachable
    broken.trans[broken.initial][0].push_back({dup, 0.0});
    MinimalityReport rep = audit_minimality(broken, 4, MinimalityKind::blind);
    REQUIRE_FALSE(rep.merge_required.empty());
}

TEST_CASE("tau-fibre uniqueness: one e-state per feasible prefix") {
    Nmrdp d = parse_world(kFig3);
    ExpandedMdp m = pltlsim_translate(d, d.pltl_rewards());
    // follow random feasible prefixes and check the tracked e-state is unique
    std::mt19937 rng(5);
    for (int iter = 0; iter < 100; ++iter) {
        uint32_t e = m.initial;
        for (int step = 0; step < 6; ++step) {
            size_t a = rng() % d.actions.size();
            const Distribution& dist = m.trans[e][a];
            const auto& pick = dist[rng() % dist.size()];
            // all e-successors with this target state must coincide
            for (size_t a2 = 0; a2 < d.actions.size(); ++a2)
                for (const auto& [t2, pr2] : m.trans[e][a2])
                    if (m.tau(t2) == m.tau(pick.first)) REQUIRE(t2 == pick.first);
            e = pick.first;
        }
    }
}

TEST_CASE("on-demand generator matches the full expansion") {
    Nmrdp d = parse_world(kFig3Fltl);
    FltlOnDemandGenerator gen(d, d.fltl_rewards());
    ExpandedMdp full = fltl_translate(d, d.fltl_rewards());

    uint32_t root = gen.initial();
    REQUIRE(gen.reward(root) == full.estates[full.initial].reward);
    // expand everything through the generator and compare sizes
    std::vector<uint32_t> frontier = {root};
    std::unordered_set<uint32_t> seen = {root};
    while (!frontier.empty()) {
        uint32_t n = frontier.back();
        frontier.pop_back();
        if (gen.dead(n)) continue;
        for (uint32_t a = 0; a < gen.action_count(); ++a)
            for (const auto& [t, pr] : gen.successors_of(n, a))
                if (seen.insert(t).second) frontier.push_back(t);
    }
    REQUIRE(seen.size() == full.size());
    REQUIRE(gen.expanded_count() == full.size());
}

TEST_CASE("e-state cap raises a resource error") {
    Nmrdp d = parse_world(kCoin);
    TranslateOptions opts;
    opts.max_estates = 2;
    REQUIRE_THROWS_AS(pltlsim_translate(d, d.pltl_rewards(), opts), ResourceLimitError);
}

TEST_CASE("check_equivalence: the hand-built four-e-state MDP for the first-p process") {
    Nmrdp d = parse_world(R"(
action a
  p (p (1.0) (0.1))
endaction
action b
  p (p (1.0) (0.5))
endaction
action c
  p (p (1.0) (0.0))
endaction
action d
  p (0.0)
endaction
p = ff
[firstp, 1.0]? p and ~prv (pdi p)
)");
    State s0(1), s1(1);
    s1.set(0, true);

    // four e-states: fresh/tails, first heads (rewarded), spent tails, spent heads
    ExpandedMdp m;
    m.source = &d;
    auto ann = [&](uint32_t tag) {
        Annotation a;
        a.formulas.push_back(Formula::prv(Formula::atom(tag)));  // distinct markers
        return a;
    };
    m.estates.push_back({s0, ann(0), 0.0});
    m.estates.push_back({s1, ann(1), 1.0});
    m.estates.push_back({s0, ann(2), 0.0});
    m.estates.push_back({s1, ann(3), 0.0});
    m.initial = 0;
    auto dist = [](std::initializer_list<std::pair<uint32_t, double>> xs) {
        return Distribution(xs);
    };
    m.trans = {
        {dist({{1, 0.1}, {0, 0.9}}), dist({{1, 0.5}, {0, 0.5}}), dist({{0, 1.0}}),
         dist({{0, 1.0}})},
        {dist({{3, 1.0}}), dist({{3, 1.0}}), dist({{3, 1.0}}), dist({{2, 1.0}})},
        {dist({{3, 0.1}, {2, 0.9}}), dist({{3, 0.5}, {2, 0.5}}), dist({{2, 1.0}}),
         dist({{2, 1.0}})},
        {dist({{3, 1.0}}), dist({{3, 1.0}}), dist({{3, 1.0}}), dist({{2, 1.0}})},
    };
    EquivalenceReport rep = check_equivalence(d, m, 5);
    std::string first_violation = rep.violations.empty() ? std::string() : rep.violations[0];
    INFO(first_violation);
    REQUIRE(rep.pass());

    // rewarding any other e-state breaks condition 4
    ExpandedMdp broken = m;
    broken.estates[3].reward = 1.0;
    REQUIRE_FALSE(check_equivalence(d, broken, 5).pass());
}

TEST_CASE("to_dot: a single-e-state process renders one node") {
    Nmrdp d = parse_world("action wait\nendaction\np = tt\n");
    PltlRewardSpec empty;
    ExpandedMdp m = pltlsim_translate(d, empty);
    REQUIRE(m.size() == 1);
    std::string dot = to_dot(m);
    REQUIRE(dot.find("e0 [label=") != std::string::npos);
    REQUIRE(dot.find("e1 [label=") == std::string::npos);
}

TEST_CASE("on-demand generator: concurrent expansion is consistent") {
    Nmrdp d = parse_world(kFig3Fltl);
    ExpandedMdp full = fltl_translate(d, d.fltl_rewards());
    FltlOnDemandGenerator gen(d, d.fltl_rewards());
    uint32_t root = gen.initial();

    std::vector<std::thread> workers;
    std::atomic<size_t> edges{0};
    for (int w = 0; w < 4; ++w)
        workers.emplace_back([&, w] {
            std::mt19937 rng(w);
            for (int iter = 0; iter < 200; ++iter) {
                uint32_t n = root;
                for (int step = 0; step < 6; ++step) {
                    if (gen.dead(n)) break;
                    uint32_t a = rng() % gen.action_count();
                    Distribution dist = gen.successors_of(n, a);
                    if (dist.empty()) break;
                    edges += dist.size();
                    n = dist[rng() % dist.size()].first;
                }
            }
        });
    for (auto& t : workers) t.join();
    REQUIRE(edges > 0);
    REQUIRE(gen.expanded_count() == full.size());
}
