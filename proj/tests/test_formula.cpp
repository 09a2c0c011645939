#include <catch2/catch_amalgamated.hpp>

#include <nmrdpp/formula.hpp>

#include <random>

using namespace nmrdpp;

namespace {

State mk_state(size_t width, std::initializer_list<uint32_t> trues) {
    State s(width);
    for (uint32_t p : trues) s.set(p, true);
    return s;
}

// Random AST generator used by the round-trip and simplify properties.
// Construction goes through the public constructors only, so every produced
// formula respects the dialect invariants.
Formula random_formula(std::mt19937& rng, Dialect d, int depth, uint32_t nprops) {
    std::uniform_int_distribution<int> leaf(0, 3);
    if (depth == 0) {
        switch (leaf(rng)) {
            case 0: return Formula::tt();
            case 1: return Formula::ff();
            case 2: return Formula::atom(rng() % nprops);
            default:
                return d == Dialect::fltl && rng() % 4 == 0
                           ? Formula::dollar()
                           : Formula::natom(rng() % nprops);
        }
    }
    int pick = static_cast<int>(rng() % 6);
    Formula a = random_formula(rng, d, depth - 1, nprops);
    Formula b = random_formula(rng, d, depth - 1, nprops);
    if (d == Dialect::pltl) {
        switch (pick) {
            case 0: return Formula::conj(a, b);
            case 1: return Formula::disj(a, b);
            case 2: return Formula::neg(a);
            case 3: return Formula::prv(a);
            case 4: return Formula::snc(a, b);
            default: return a;
        }
    }
    switch (pick) {
        case 0: return Formula::conj(a, b);
        case 1: return Formula::disj(a, b);
        case 2: return Formula::nxt(a);
        case 3: return Formula::until(a, b);
        default: return a;
    }
}

}  // namespace

TEST_CASE("hash consing gives one node per structure") {
    Vocabulary v;
    uint32_t p = v.intern("p"), q = v.intern("q");
    Formula a = Formula::conj(Formula::atom(p), Formula::prv(Formula::atom(q)));
    Formula b = Formula::conj(Formula::atom(p), Formula::prv(Formula::atom(q)));
    REQUIRE(a == b);
    REQUIRE(a.id() == b.id());
    REQUIRE(Formula::conj(Formula::atom(q), Formula::atom(p)) !=
            Formula::conj(Formula::atom(p), Formula::atom(q)));
}

TEST_CASE("negation normalises at construction") {
    Vocabulary v;
    uint32_t p = v.intern("p");
    Formula a = Formula::atom(p);
    REQUIRE(Formula::neg(a) == Formula::natom(p));
    REQUIRE(Formula::neg(Formula::neg(a)) == a);
    REQUIRE(Formula::neg(Formula::tt()) == Formula::ff());
    Formula s = Formula::snc(Formula::tt(), a);
    REQUIRE(Formula::neg(Formula::neg(s)) == s);
}

TEST_CASE("parse: coin reward formula from the sample input") {
    Vocabulary v;
    v.intern("heads");
    Formula f = parse_formula("heads and ~prv (pdi heads)", Dialect::pltl, v, false);
    Formula expect = Formula::conj(
        Formula::atom(0),
        Formula::neg(Formula::prv(Formula::snc(Formula::tt(), Formula::atom(0)))));
    REQUIRE(f == expect);
}

TEST_CASE("parse: constants and weak until") {
    Vocabulary v;
    REQUIRE(parse_formula("tt", Dialect::pltl, v) == Formula::tt());

    uint32_t p = v.intern("p");
    Formula f = parse_formula("(~p until (p and $))", Dialect::fltl, v);
    Formula expect = Formula::until(Formula::natom(p),
                                    Formula::conj(Formula::atom(p), Formula::dollar()));
    REQUIRE(f == expect);
}

TEST_CASE("parse: sugar expansion") {
    Vocabulary v;
    uint32_t p = v.intern("p");
    REQUIRE(parse_formula("prv^3 p", Dialect::pltl, v) ==
            Formula::prv(Formula::prv(Formula::prv(Formula::atom(p)))));
    REQUIRE(parse_formula("pbx p", Dialect::pltl, v) ==
            Formula::neg(Formula::snc(Formula::tt(), Formula::natom(p))));
    REQUIRE(parse_formula("alw p", Dialect::fltl, v) ==
            Formula::until(Formula::atom(p), Formula::ff()));
    REQUIRE(parse_formula("nxt^2 $", Dialect::fltl, v) ==
            Formula::nxt(Formula::nxt(Formula::dollar())));
}

TEST_CASE("parse: precedence not/prv > and > or > snc") {
    Vocabulary v;
    uint32_t p = v.intern("p"), q = v.intern("q"), r = v.intern("r");
    Formula f = parse_formula("~p and q or r", Dialect::pltl, v);
    REQUIRE(f == Formula::disj(Formula::conj(Formula::natom(p), Formula::atom(q)),
                               Formula::atom(r)));
    Formula g = parse_formula("(p and q snc r or p)", Dialect::pltl, v);
    REQUIRE(g == Formula::snc(Formula::conj(Formula::atom(p), Formula::atom(q)),
                              Formula::disj(Formula::atom(r), Formula::atom(p))));
}

TEST_CASE("parse errors carry position and dialect checks") {
    Vocabulary v;
    v.intern("p");
    REQUIRE_THROWS_AS(parse_formula("p and", Dialect::pltl, v), ParseError);
    REQUIRE_THROWS_AS(parse_formula("p and $", Dialect::pltl, v), ParseError);
    REQUIRE_THROWS_AS(parse_formula("prv p", Dialect::fltl, v), ParseError);
    REQUIRE_THROWS_AS(parse_formula("~(p until q)", Dialect::fltl, v), ParseError);
    REQUIRE_THROWS_AS(parse_formula("~$", Dialect::fltl, v), ParseError);
    REQUIRE_THROWS_AS(parse_formula("p q", Dialect::pltl, v), ParseError);
    try {
        parse_formula("p and\n  and", Dialect::pltl, v);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.line == 2);
    }
}

TEST_CASE("print: examples") {
    Vocabulary v;
    uint32_t p = v.intern("p");
    REQUIRE(print_formula(Formula::tt(), v) == "tt");
    REQUIRE(print_formula(Formula::prv(Formula::prv(Formula::atom(p))), v) == "prv^2 p");
    Formula f = Formula::until(Formula::natom(p),
                               Formula::conj(Formula::atom(p), Formula::dollar()));
    REQUIRE(print_formula(f, v) == "(~p until p and $)");
    REQUIRE(parse_formula(print_formula(f, v), Dialect::fltl, v) == f);
}

TEST_CASE("round trip: parse(print(f)) == f on random ASTs") {
    Vocabulary v;
    v.intern("p"); v.intern("q"); v.intern("r");
    std::mt19937 rng(20240811);
    for (int iter = 0; iter < 500; ++iter) {
        Dialect d = iter % 2 == 0 ? Dialect::pltl : Dialect::fltl;
        Formula f = random_formula(rng, d, 1 + static_cast<int>(rng() % 6), 3);
        std::string text = print_formula(f, v);
        INFO(text);
        REQUIRE(parse_formula(text, d, v, false) == f);
    }
}

TEST_CASE("eval_pltl: base clauses") {
    Vocabulary v;
    uint32_t p = v.intern("p"), q = v.intern("q");

    // prv tt is false at the origin
    StateSequence empty = {mk_state(2, {})};
    REQUIRE_FALSE(eval_pltl(empty, 0, Formula::prv(Formula::tt())));

    // <{q},{p},{p}>, i=2: p snc q
    StateSequence seq = {mk_state(2, {q}), mk_state(2, {p}), mk_state(2, {p})};
    REQUIRE(eval_pltl(seq, 2, Formula::snc(Formula::atom(p), Formula::atom(q))));

    // <{},{p}>, i=1: p and ~prv (pdi p)  (first occurrence of p)
    StateSequence seq2 = {mk_state(2, {}), mk_state(2, {p})};
    Formula first = parse_formula("p and ~prv (pdi p)", Dialect::pltl, v);
    REQUIRE(eval_pltl(seq2, 1, first));
    StateSequence seq3 = {mk_state(2, {p}), mk_state(2, {p})};
    REQUIRE_FALSE(eval_pltl(seq3, 1, first));
}

TEST_CASE("eval_pltl: pdi f equals exists j <= i with f true at j") {
    Vocabulary v;
    v.intern("a"); v.intern("b"); v.intern("c");
    std::mt19937 rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        Formula f = random_formula(rng, Dialect::pltl, 2, 3);
        Formula pdi = Formula::snc(Formula::tt(), f);
        size_t len = 1 + rng() % 6;
        StateSequence seq;
        for (size_t i = 0; i < len; ++i) {
            State s(3);
            for (uint32_t p = 0; p < 3; ++p) s.set(p, rng() & 1);
            seq.push_back(s);
        }
        for (size_t i = 0; i < len; ++i) {
            bool expect = false;
            for (size_t j = 0; j <= i; ++j) expect = expect || eval_pltl(seq, j, f);
            REQUIRE(eval_pltl(seq, i, pdi) == expect);
        }
    }
}

TEST_CASE("simplify: folding rules") {
    Vocabulary v;
    uint32_t p = v.intern("p"), q = v.intern("q");
    Formula wu = Formula::until(Formula::atom(p), Formula::atom(q));
    REQUIRE(simplify(Formula::conj(Formula::ff(), wu)) == Formula::ff());
    Formula f = Formula::snc(Formula::atom(p), Formula::atom(q));
    REQUIRE(simplify(Formula::disj(Formula::tt(), f)) == Formula::tt());
    REQUIRE(simplify(Formula::disj(f, f)) == f);
    REQUIRE(simplify(Formula::conj(f, Formula::tt())) == f);
    // commutative operands get id order
    REQUIRE(simplify(Formula::conj(f, Formula::atom(p))) ==
            simplify(Formula::conj(Formula::atom(p), f)));
}

TEST_CASE("simplify preserves eval_pltl on random pairs") {
    Vocabulary v;
    v.intern("a"); v.intern("b"); v.intern("c");
    std::mt19937 rng(99);
    for (int iter = 0; iter < 1000; ++iter) {
        Formula f = random_formula(rng, Dialect::pltl, 1 + static_cast<int>(rng() % 4), 3);
        Formula g = simplify(f);
        size_t len = 1 + rng() % 6;
        StateSequence seq;
        for (size_t i = 0; i < len; ++i) {
            State s(3);
            for (uint32_t p = 0; p < 3; ++p) s.set(p, rng() & 1);
            seq.push_back(s);
        }
        size_t i = rng() % len;
        REQUIRE(eval_pltl(seq, i, f) == eval_pltl(seq, i, g));
    }
}

TEST_CASE("sub_closure: counts and contents") {
    Vocabulary v;
    uint32_t p = v.intern("p"), q = v.intern("q");
    Formula f = Formula::conj(Formula::atom(q), Formula::prv(Formula::prv(Formula::atom(p))));
    auto closure = sub_closure({f});
    REQUIRE(closure.size() == 10);
    auto contains = [&](Formula g) {
        for (Formula h : closure)
            if (h == g) return true;
        return false;
    };
    REQUIRE(contains(Formula::atom(p)));
    REQUIRE(contains(Formula::natom(q)));
    REQUIRE(contains(Formula::neg(f)));
    REQUIRE(contains(Formula::prv(Formula::atom(p))));

    REQUIRE(sub_closure({}).empty());
    auto single = sub_closure({Formula::atom(p)});
    REQUIRE(single.size() == 2);
}

TEST_CASE("dialect inspection") {
    Vocabulary v;
    uint32_t p = v.intern("p");
    REQUIRE(is_pltl(Formula::prv(Formula::atom(p))));
    REQUIRE_FALSE(is_fltl(Formula::prv(Formula::atom(p))));
    REQUIRE(is_fltl(Formula::until(Formula::atom(p), Formula::dollar())));
    REQUIRE(is_material(parse_formula("p and ~p or tt", Dialect::pltl, v)));
    REQUIRE_FALSE(is_material(Formula::nxt(Formula::atom(p))));
}

TEST_CASE("parser rejects garbage without crashing") {
    Vocabulary v;
    v.intern("p");
    std::mt19937 rng(616);
    const std::string alphabet = "p q ( ) ~ ^ $ and or prv nxt snc until tt ff 0 9 _x #";
    std::vector<std::string> tokens;
    {
        std::istringstream in(alphabet);
        std::string t;
        while (in >> t) tokens.push_back(t);
    }
    for (int iter = 0; iter < 2000; ++iter) {
        std::string text;
        size_t len = 1 + rng() % 12;
        for (size_t i = 0; i < len; ++i) text += tokens[rng() % tokens.size()] + " ";
        Dialect d = rng() & 1 ? Dialect::pltl : Dialect::fltl;
        try {
            Formula f = parse_formula(text, d, v);
            REQUIRE(print_formula(f, v).size() > 0);  // parsed: must print
        } catch (const ParseError&) {
            // rejected cleanly
        }
    }
}
