// ============================================================================
// nmrdpp/progression.hpp — $FLTL formula and reward-specification progression
// ============================================================================
//
// Progression pushes a future-dialect reward formula through a state, one
// state at a time.  Rew(s, f) detects that the prefix just completed must be
// rewarded (progressing with "no reward" collapses the formula to ff), and
// $Prog re-progresses with the reward granted.  A specification is a multiset
// of (formula : reward) pairs progressed in lockstep; any entry reaching ff
// signals a reward-abnormal specification and raises ProgressionFailure.
//
// The behaviour oracle at the bottom is a desk-scale brute-force evaluation
// of the behaviour a formula represents (the intersection of all reward
// assignments satisfying it).  It exists for cross-checking progression in
// tests and is exponential in every direction.
//
// ============================================================================

#pragma once

#include "formula.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>

namespace nmrdpp {

// ── reward specifications ───────────────────────────────────────────────────

struct FltlRewardSpec {
    struct Entry {
        Formula formula;
        double reward = 0.0;
        bool operator==(const Entry& o) const {
            return formula == o.formula && reward == o.reward;
        }
    };

    std::vector<Entry> entries;  // sorted by formula id, duplicates merged

    static FltlRewardSpec make(std::vector<Entry> raw) {
        FltlRewardSpec spec;
        std::sort(raw.begin(), raw.end(),
                  [](const Entry& a, const Entry& b) { return a.formula < b.formula; });
        for (const Entry& e : raw) {
            if (e.formula.is_true()) continue;  // tt entries are inert
            if (!spec.entries.empty() && spec.entries.back().formula == e.formula)
                spec.entries.back().reward += e.reward;
            else
                spec.entries.push_back(e);
        }
        return spec;
    }

    bool operator==(const FltlRewardSpec& o) const { return entries == o.entries; }
    bool empty() const { return entries.empty(); }

    size_t hash() const {
        size_t h = 0x9e3779b97f4a7c15ull;
        for (const Entry& e : entries) {
            h = h * 1099511628211ull + e.formula.id();
            uint64_t bits;
            static_assert(sizeof(bits) == sizeof(e.reward));
            std::memcpy(&bits, &e.reward, sizeof(bits));
            h = h * 1099511628211ull + bits;
        }
        return h;
    }
};

// Search control knowledge: a $-free future-dialect formula.
struct ControlKnowledge {
    Formula formula;

    static ControlKnowledge make(Formula f) {
        if (contains_op(f, Op::Dollar))
            throw DialectError("control knowledge must be $-free");
        if (!is_fltl(f))
            throw DialectError("control knowledge must be future dialect");
        return ControlKnowledge{f};
    }
};

struct ProgressionFailure : std::runtime_error {
    Formula offending;
    StateSequence witness;  // replaying this prefix progresses the formula to ff

    explicit ProgressionFailure(Formula f)
        : std::runtime_error("reward formula progressed to ff"), offending(f) {}
};

// ── progression ─────────────────────────────────────────────────────────────

// The raw progression clauses, without simplification; linear in the DAG size
// of f because residual until-formulae are shared, not copied.
inline Formula prog_raw(bool b, const State& s, Formula f) {
    switch (f.op()) {
        case Op::Dollar: return b ? Formula::tt() : Formula::ff();
        case Op::True:   return f;
        case Op::False:  return f;
        case Op::Atom:   return s.get(f.prop()) ? Formula::tt() : Formula::ff();
        case Op::NAtom:  return s.get(f.prop()) ? Formula::ff() : Formula::tt();
        case Op::And:    return Formula::conj(prog_raw(b, s, f.lhs()), prog_raw(b, s, f.rhs()));
        case Op::Or:     return Formula::disj(prog_raw(b, s, f.lhs()), prog_raw(b, s, f.rhs()));
        case Op::Nxt:    return f.lhs();
        case Op::Until:  // Prog(f1) U-unfolds through the state
            return Formula::disj(prog_raw(b, s, f.rhs()),
                                 Formula::conj(prog_raw(b, s, f.lhs()), f));
        default:
            throw DialectError("past operator in progression");
    }
}

inline Formula prog(bool b, const State& s, Formula f) {
    return simplify(prog_raw(b, s, f));
}

// Rew(s, f): the prefix ending in s must be rewarded for f to stay satisfiable.
inline bool rew(const State& s, Formula f) {
    return prog(false, s, f).is_false();
}

// $Prog(s, f) = Prog(Rew(s, f), s, f)
inline Formula dollar_prog(const State& s, Formula f) {
    return prog(rew(s, f), s, f);
}

struct RProgResult {
    FltlRewardSpec next;
    double reward = 0.0;
};

// Progress a whole specification through s, emitting the reward earned at s.
inline RProgResult rprog(const State& s, const FltlRewardSpec& spec) {
    RProgResult out;
    std::vector<FltlRewardSpec::Entry> next;
    next.reserve(spec.entries.size());
    for (const auto& e : spec.entries) {
        bool r = rew(s, e.formula);
        if (r) out.reward += e.reward;
        Formula g = prog(r, s, e.formula);
        if (g.is_false()) {
            ProgressionFailure failure(e.formula);
            failure.witness.push_back(s);
            throw failure;
        }
        next.push_back({g, e.reward});
    }
    out.next = FltlRewardSpec::make(std::move(next));
    return out;
}

// Rewards emitted by progressing spec through every state of a sequence.
// The witness prefix of a failure is filled in here.
inline std::vector<double> progression_rewards(const FltlRewardSpec& spec,
                                               const StateSequence& seq) {
    std::vector<double> rewards;
    FltlRewardSpec cur = spec;
    for (size_t i = 0; i < seq.size(); ++i) {
        try {
            RProgResult step = rprog(seq[i], cur);
            rewards.push_back(step.reward);
            cur = std::move(step.next);
        } catch (ProgressionFailure& failure) {
            failure.witness.assign(seq.begin(), seq.begin() + i + 1);
            throw;
        }
    }
    return rewards;
}

// ── reward-normal combinators ───────────────────────────────────────────────
// Formulas built from $ by these four operations are reward-normal, so they
// never progress to ff on any sequence.

namespace combinators {

inline void require_material(Formula m) {
    if (!is_material(m) || contains_op(m, Op::Not))
        throw DialectError("combinator condition must be a material future-dialect formula");
}

inline Formula delay(Formula f) { return Formula::nxt(f); }

inline Formula cond(Formula m, Formula f) {
    require_material(m);
    return Formula::disj(nnf_neg(m), f);
}

inline Formula loop(Formula m, Formula f) {
    require_material(m);
    return Formula::until(f, m);
}

inline Formula unite(Formula f1, Formula f2) { return Formula::conj(f1, f2); }

}  // namespace combinators

// ── finite-trace evaluation and the behaviour oracle ───────────────────────

// Candidate behaviours are sets of prefixes; a prefix is identified by its
// index in the oracle's enumeration.
struct PrefixUniverse {
    std::vector<StateSequence> prefixes;  // length 1..maxLen, lexicographic

    int index_of(const StateSequence& seq, size_t i) const {
        if (i + 1 > max_len) return -1;
        // positions are computed arithmetically: lengths are enumerated in
        // order, states in binary order
        size_t offset = 0;
        size_t count = state_count;
        for (size_t len = 1; len <= i; ++len) {
            offset += count;
            count *= state_count;
        }
        size_t pos = 0;
        for (size_t j = 0; j <= i; ++j) pos = pos * state_count + state_index(seq[j]);
        return static_cast<int>(offset + pos);
    }

    size_t state_index(const State& s) const {
        size_t v = 0;
        for (size_t p = prop_count; p-- > 0;) v = (v << 1) | (s.get(static_cast<uint32_t>(p)) ? 1 : 0);
        return v;
    }

    size_t prop_count = 0;
    size_t state_count = 0;
    size_t max_len = 0;
};

inline PrefixUniverse enumerate_prefixes(size_t prop_count, size_t max_len) {
    PrefixUniverse u;
    u.prop_count = prop_count;
    u.state_count = size_t(1) << prop_count;
    u.max_len = max_len;
    std::vector<State> states;
    for (size_t v = 0; v < u.state_count; ++v) {
        State s(prop_count);
        for (size_t p = 0; p < prop_count; ++p) s.set(static_cast<uint32_t>(p), (v >> p) & 1);
        states.push_back(s);
    }
    StateSequence cur;
    struct Rec {
        void operator()(StateSequence& cur, size_t len, const std::vector<State>& states,
                        std::vector<StateSequence>& out) const {
            if (cur.size() == len) {
                out.push_back(cur);
                return;
            }
            for (const State& s : states) {
                cur.push_back(s);
                (*this)(cur, len, states, out);
                cur.pop_back();
            }
        }
    } rec;
    for (size_t len = 1; len <= max_len; ++len) rec(cur, len, states, u.prefixes);
    return u;
}

// Finite-trace semantics: obligations falling past the end of the trace count
// as satisfied (weak reading), so results are only meaningful for prefixes
// shorter than the trace horizon minus the formula's nxt depth.  The callback
// answers whether the prefix seq[0..=k] belongs to the candidate behaviour.
template <class RewardAt>
bool eval_fltl_finite(const StateSequence& seq, size_t i, Formula f, RewardAt&& rewarded_at) {
    switch (f.op()) {
        case Op::True:  return true;
        case Op::False: return false;
        case Op::Dollar: return rewarded_at(i);
        case Op::Atom:  return seq[i].get(f.prop());
        case Op::NAtom: return !seq[i].get(f.prop());
        case Op::And:
            return eval_fltl_finite(seq, i, f.lhs(), rewarded_at) &&
                   eval_fltl_finite(seq, i, f.rhs(), rewarded_at);
        case Op::Or:
            return eval_fltl_finite(seq, i, f.lhs(), rewarded_at) ||
                   eval_fltl_finite(seq, i, f.rhs(), rewarded_at);
        case Op::Nxt:
            return i + 1 >= seq.size() ||
                   eval_fltl_finite(seq, i + 1, f.lhs(), rewarded_at);
        case Op::Until:
            for (size_t k = i; k < seq.size(); ++k) {
                if (eval_fltl_finite(seq, k, f.rhs(), rewarded_at)) return true;
                if (!eval_fltl_finite(seq, k, f.lhs(), rewarded_at)) return false;
            }
            return true;  // weak until survives the horizon
        default:
            throw DialectError("past operator in future-dialect evaluation");
    }
}

struct BehaviourOracleResult {
    std::vector<StateSequence> rewarded;  // sorted: by length, then state order
    bool vacuous = false;                 // no behaviour satisfies f
};

// Brute-force B_f: enumerate candidate behaviours over all prefixes of length
// <= H - nxt_depth(f), keep those under which f holds of every length-H
// sequence, and intersect them.
inline BehaviourOracleResult behaviour_oracle(Formula f, size_t horizon, size_t prop_count) {
    size_t d = nxt_depth(f);
    size_t max_len = horizon > d ? horizon - d : 0;
    PrefixUniverse u = enumerate_prefixes(prop_count, max_len);
    size_t n = u.prefixes.size();
    if (n > 16) throw ResourceLimitError("behaviour oracle: prefix space too large");
    size_t seq_total = 1;
    for (size_t i = 0; i < horizon; ++i) {
        seq_total *= u.state_count;
        if (seq_total > 4096) throw ResourceLimitError("behaviour oracle: sequence space too large");
    }

    std::vector<StateSequence> full;
    {
        PrefixUniverse uh = enumerate_prefixes(prop_count, horizon);
        for (const auto& seq : uh.prefixes)
            if (seq.size() == horizon) full.push_back(seq);
    }

    std::vector<bool> intersection(n, true);
    bool any = false;
    std::vector<bool> behaviour(n);
    for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) {
        for (size_t i = 0; i < n; ++i) behaviour[i] = (mask >> i) & 1;
        bool sat = true;
        for (const auto& seq : full) {
            auto rewarded = [&](size_t k) {
                int idx = u.index_of(seq, k);
                return idx >= 0 && behaviour[static_cast<size_t>(idx)];
            };
            if (!eval_fltl_finite(seq, 0, f, rewarded)) {
                sat = false;
                break;
            }
        }
        if (!sat) continue;
        any = true;
        for (size_t i = 0; i < n; ++i)
            if (!behaviour[i]) intersection[i] = false;
    }

    BehaviourOracleResult out;
    if (!any) {
        // intersection of the empty family: every prefix
        out.vacuous = true;
        out.rewarded = u.prefixes;
        return out;
    }
    for (size_t i = 0; i < n; ++i)
        if (intersection[i]) out.rewarded.push_back(u.prefixes[i]);
    return out;
}

// The reward set computed by progression over the same universe: every prefix
// of length <= maxLen whose final step earns a reward.
inline std::vector<StateSequence> progression_reward_set(Formula f, size_t max_len,
                                                         size_t prop_count) {
    PrefixUniverse u = enumerate_prefixes(prop_count, max_len);
    std::vector<StateSequence> out;
    for (const auto& seq : u.prefixes) {
        if (seq.size() != max_len) continue;
        FltlRewardSpec spec = FltlRewardSpec::make({{f, 1.0}});
        std::vector<double> rewards = progression_rewards(spec, seq);
        for (size_t i = 0; i < rewards.size(); ++i)
            if (rewards[i] > 0)
                out.push_back(StateSequence(seq.begin(), seq.begin() + i + 1));
    }
    std::sort(out.begin(), out.end(), [&](const StateSequence& a, const StateSequence& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return u.index_of(a, a.size() - 1) < u.index_of(b, b.size() - 1);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace nmrdpp
