// Shared fixtures for the test suites: behaviour pairs relating past-dialect
// reward formulas to their future-dialect twins, plus small sequence helpers.
#pragma once

#include <nmrdpp/formula.hpp>
#include <nmrdpp/progression.hpp>

#include <random>
#include <string>
#include <vector>

namespace testutil {

using namespace nmrdpp;

inline State mk_state(size_t width, std::initializer_list<uint32_t> trues) {
    State s(width);
    for (uint32_t p : trues) s.set(p, true);
    return s;
}

// A pair of reward formulas describing the same behaviour in both dialects.
struct BehaviourPair {
    std::string name;
    Formula pltl;
    Formula fltl;
    size_t prop_count;
};

// The matched behaviours used by the progression-versus-evaluation oracle:
// each future-dialect formula rewards exactly the prefixes its past twin
// models.  Propositions: p = 0, c = 1 (q doubles as the trigger c).
inline std::vector<BehaviourPair> behaviour_pairs(Vocabulary& v) {
    v.intern("p");
    v.intern("c");
    auto P = [&](const std::string& t) { return parse_formula(t, Dialect::pltl, v, false); };
    auto F = [&](const std::string& t) { return parse_formula(t, Dialect::fltl, v, false); };
    return {
        {"every-p", P("p"), F("alw(~p or $)"), 1},
        {"first-p", P("p and ~prv (pdi p)"), F("(~p until (p and $))"), 1},
        {"from-first-p-on", P("pdi p"), F("alw(~p or alw $)"), 1},
        {"response-every", P("p and pdi c"), F("alw(~c or alw(~p or $))"), 2},
        {"response-first", P("p and prv (~p snc c)"),
         F("alw(~c or nxt(~p until (p and $)))"), 2},
        {"p-until-c", P("c and ~prv (pdi c) and ~prv (pdi ~p)"),
         F("(~c until ((~p and ~c) or (c and $)))"), 2},
    };
}

// All sequences of the given length over prop_count propositions, visited in
// binary counting order.
template <class Fn>
void for_each_sequence(size_t prop_count, size_t length, Fn&& fn) {
    size_t states = size_t(1) << prop_count;
    StateSequence seq(length, State(prop_count));
    std::vector<size_t> digits(length, 0);
    for (;;) {
        for (size_t i = 0; i < length; ++i) {
            State s(prop_count);
            for (size_t p = 0; p < prop_count; ++p) s.set(static_cast<uint32_t>(p), (digits[i] >> p) & 1);
            seq[i] = s;
        }
        fn(const_cast<const StateSequence&>(seq));
        size_t i = 0;
        while (i < length && ++digits[i] == states) digits[i++] = 0;
        if (i == length) break;
    }
}

inline State random_state(std::mt19937& rng, size_t prop_count) {
    State s(prop_count);
    for (size_t p = 0; p < prop_count; ++p) s.set(static_cast<uint32_t>(p), rng() & 1);
    return s;
}

inline StateSequence random_sequence(std::mt19937& rng, size_t prop_count, size_t max_len) {
    size_t len = 1 + rng() % max_len;
    StateSequence seq;
    for (size_t i = 0; i < len; ++i) seq.push_back(random_state(rng, prop_count));
    return seq;
}

// Random reward-normal formula built from the four combinators over `$`.
inline Formula random_material(std::mt19937& rng, uint32_t nprops, int depth) {
    if (depth == 0) {
        switch (rng() % 4) {
            case 0: return Formula::tt();
            case 1: return Formula::ff();
            case 2: return Formula::atom(rng() % nprops);
            default: return Formula::natom(rng() % nprops);
        }
    }
    Formula a = random_material(rng, nprops, depth - 1);
    Formula b = random_material(rng, nprops, depth - 1);
    return rng() & 1 ? Formula::conj(a, b) : Formula::disj(a, b);
}

inline Formula random_combinator_formula(std::mt19937& rng, uint32_t nprops, int depth) {
    using namespace combinators;
    if (depth == 0) return Formula::dollar();
    Formula f = random_combinator_formula(rng, nprops, depth - 1);
    switch (rng() % 4) {
        case 0: return delay(f);
        case 1: return cond(random_material(rng, nprops, 1 + rng() % 2), f);
        case 2: return loop(random_material(rng, nprops, 1 + rng() % 2), f);
        default:
            return unite(f, random_combinator_formula(rng, nprops, depth > 1 ? depth - 2 : 0));
    }
}

}  // namespace testutil
