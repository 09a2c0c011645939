// ============================================================================
// nmrdpp/expanded_mdp.hpp — expanded processes, equivalence, minimality audits
// ============================================================================
//
// An expanded state couples a process state with a history annotation: the
// set of tracked past-dialect formulae true of the prefix, or the progressed
// future-dialect reward specification (plus an optional control formula).
// Annotation identity is canonical, so structurally equal annotations are
// component-wise equal.
//
// check_equivalence verifies the four equivalence conditions against the
// source process, the reward condition bounded by a horizon.  The reward
// oracle here deliberately avoids the translation machinery: past-dialect
// rewards are evaluated by an incremental semantic evaluator over the
// subformula closure, future-dialect rewards by specification progression.
//
// ============================================================================

#pragma once

#include "nmrdp.hpp"

#include <deque>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace nmrdpp {

// ── annotations and e-states ────────────────────────────────────────────────

struct Annotation {
    std::vector<Formula> formulas;      // pltl: true tracked members; fltl: spec formulas
    std::vector<double> weights;        // fltl only, parallel to formulas
    std::optional<Formula> control;

    bool operator==(const Annotation& o) const {
        return formulas == o.formulas && weights == o.weights && control == o.control;
    }

    size_t hash() const {
        size_t h = 0x735a2d97f4a7c159ull;
        for (Formula f : formulas) h = h * 1099511628211ull + f.id();
        for (double w : weights) {
            uint64_t bits;
            std::memcpy(&bits, &w, sizeof(bits));
            h = h * 1099511628211ull + bits;
        }
        if (control) h = h * 1099511628211ull + (control->id() + 7);
        return h;
    }

    static Annotation from_spec(const FltlRewardSpec& spec, std::optional<Formula> control) {
        Annotation a;
        for (const auto& e : spec.entries) {
            a.formulas.push_back(e.formula);
            a.weights.push_back(e.reward);
        }
        a.control = control;
        return a;
    }

    FltlRewardSpec to_spec() const {
        std::vector<FltlRewardSpec::Entry> entries;
        for (size_t i = 0; i < formulas.size(); ++i)
            entries.push_back({formulas[i], i < weights.size() ? weights[i] : 0.0});
        return FltlRewardSpec::make(std::move(entries));
    }

    std::string to_string(const Vocabulary& vocab) const {
        std::string out = "{";
        for (size_t i = 0; i < formulas.size(); ++i) {
            if (i) out += ", ";
            out += print_formula(formulas[i], vocab);
            if (i < weights.size()) out += " : " + std::to_string(weights[i]);
        }
        out += "}";
        if (control) out += " / " + print_formula(*control, vocab);
        return out;
    }
};

struct EState {
    State state;
    Annotation ann;
    double reward = 0.0;
};

// Transition table entry: distribution over e-state indices.
using Distribution = std::vector<std::pair<uint32_t, double>>;

struct ExpandedMdp {
    const Nmrdp* source = nullptr;
    std::vector<EState> estates;
    std::vector<std::vector<Distribution>> trans;  // [estate][action]; empty action = inapplicable
    uint32_t initial = 0;
    bool transitions_kept = true;

    size_t size() const { return estates.size(); }
    const State& tau(uint32_t e) const { return estates[e].state; }
    bool dead(uint32_t e) const {
        for (const Distribution& d : trans[e])
            if (!d.empty()) return false;
        return true;
    }
};

// ── DOT rendering ───────────────────────────────────────────────────────────

inline std::string to_dot(const ExpandedMdp& m) {
    const Vocabulary& vocab = m.source->vocab;
    std::ostringstream out;
    out << "digraph mdp {\n  node [shape=record];\n";
    for (uint32_t e = 0; e < m.size(); ++e) {
        const EState& es = m.estates[e];
        std::string ann = es.ann.to_string(vocab);
        for (char& c : ann)
            if (c == '{' || c == '}' || c == '|' || c == '<' || c == '>') c = ' ';
        out << "  e" << e << " [label=\"" << es.state.to_string(vocab) << " | " << ann
            << " | " << es.reward << "\"";
        if (e == m.initial) out << ", style=bold";
        out << "];\n";
    }
    if (m.transitions_kept)
        for (uint32_t e = 0; e < m.size(); ++e)
            for (size_t a = 0; a < m.trans[e].size(); ++a)
                for (const auto& [t, pr] : m.trans[e][a])
                    out << "  e" << e << " -> e" << t << " [label=\""
                        << m.source->actions[a].name << " : " << pr << "\"];\n";
    out << "}\n";
    return out.str();
}

// ── independent reward evaluation along prefixes ────────────────────────────

// Incremental semantic evaluation of every closure member over a growing
// prefix.  prv looks up the previous step's truth; snc unfolds through
//   f1 snc f2 = f2 or (f1 and prv (f1 snc f2)).
class PltlPrefixEvaluator {
public:
    explicit PltlPrefixEvaluator(const PltlRewardSpec& spec) : spec_(&spec) {
        closure_ = sub_closure(spec.formulas());
        for (size_t i = 0; i < closure_.size(); ++i) index_.emplace(closure_[i].id(), i);
        truth_.resize(closure_.size());
    }

    void init(const State& s0) { advance(s0, /*first=*/true); }
    void step(const State& s) { advance(s, /*first=*/false); }

    bool truth_of(Formula f) const {
        auto it = index_.find(f.id());
        if (it != index_.end()) return truth_[it->second];
        Formula n = Formula::neg(f);
        auto in = index_.find(n.id());
        if (in != index_.end()) return !truth_[in->second];
        throw std::logic_error("formula outside tracked closure");
    }

    double reward() const {
        double r = 0.0;
        for (const auto& e : spec_->entries)
            if (truth_of(e.formula)) r += e.reward;
        return r;
    }

    std::string key() const {
        std::string k(truth_.size(), '0');
        for (size_t i = 0; i < truth_.size(); ++i)
            if (truth_[i]) k[i] = '1';
        return k;
    }

private:
    void advance(const State& s, bool first) {
        std::vector<char> next(closure_.size(), -1);
        std::vector<bool> prev = truth_;
        std::function<bool(Formula)> val = [&](Formula f) -> bool {
            auto it = index_.find(f.id());
            if (it != index_.end() && next[it->second] >= 0) return next[it->second] != 0;
            bool v;
            switch (f.op()) {
                case Op::True:  v = true; break;
                case Op::False: v = false; break;
                case Op::Atom:  v = s.get(f.prop()); break;
                case Op::NAtom: v = !s.get(f.prop()); break;
                case Op::Not:   v = !val(f.lhs()); break;
                case Op::And:   v = val(f.lhs()) && val(f.rhs()); break;
                case Op::Or:    v = val(f.lhs()) || val(f.rhs()); break;
                case Op::Prv:
                    v = !first && prev_truth(prev, f.lhs());
                    break;
                case Op::Snc:
                    v = val(f.rhs()) || (val(f.lhs()) && !first && prev_truth(prev, f));
                    break;
                default:
                    throw DialectError("future operator in past-dialect evaluation");
            }
            if (it != index_.end()) next[it->second] = v ? 1 : 0;
            return v;
        };
        for (size_t i = 0; i < closure_.size(); ++i) truth_[i] = val(closure_[i]);
    }

    bool prev_truth(const std::vector<bool>& prev, Formula f) const {
        auto it = index_.find(f.id());
        if (it != index_.end()) return prev[it->second];
        Formula n = Formula::neg(f);
        auto in = index_.find(n.id());
        if (in != index_.end()) return !prev[in->second];
        throw std::logic_error("formula outside tracked closure");
    }

    const PltlRewardSpec* spec_;
    std::vector<Formula> closure_;
    std::unordered_map<uint32_t, size_t> index_;
    std::vector<bool> truth_;
};

// Replays the source reward semantics along a prefix, one state at a time.
class RewardTrace {
public:
    explicit RewardTrace(const Nmrdp& d) : dialect_(d.reward_dialect()) {
        if (dialect_ == Dialect::pltl)
            pltl_.emplace(d.pltl_rewards());
        else
            fltl_spec_ = d.fltl_rewards();
    }

    void init(const State& s0) {
        if (dialect_ == Dialect::pltl) {
            pltl_->init(s0);
            last_reward_ = pltl_->reward();
        } else {
            RProgResult r = rprog(s0, fltl_spec_);
            fltl_spec_ = std::move(r.next);
            last_reward_ = r.reward;
        }
    }

    void step(const State& s) {
        if (dialect_ == Dialect::pltl) {
            pltl_->step(s);
            last_reward_ = pltl_->reward();
        } else {
            RProgResult r = rprog(s, fltl_spec_);
            fltl_spec_ = std::move(r.next);
            last_reward_ = r.reward;
        }
    }

    double last_reward() const { return last_reward_; }

    std::string key() const {
        if (dialect_ == Dialect::pltl) return pltl_->key();
        std::string k;
        for (const auto& e : fltl_spec_.entries) {
            k += std::to_string(e.formula.id());
            k += ':';
            k += std::to_string(e.reward);
            k += ';';
        }
        return k;
    }

private:
    Dialect dialect_;
    std::optional<PltlPrefixEvaluator> pltl_;
    FltlRewardSpec fltl_spec_;
    double last_reward_ = 0.0;
};

// ── equivalence checking ────────────────────────────────────────────────────

struct EquivalenceReport {
    std::vector<std::string> violations;
    size_t pairs_checked = 0;
    bool pass() const { return violations.empty(); }
};

namespace detail {

inline bool prob_eq(double a, double b) { return std::abs(a - b) <= 1e-9; }

}  // namespace detail

// Verifies, against the source process d:
//   1. the initial e-state projects to the initial state,
//   2. action availability matches,
//   3. per (e-state, successor state) there is a unique successor e-state,
//      with matching probabilities for every action,
//   4. along every feasible sequence of length <= horizon, e-state rewards
//      equal the reward of the corresponding prefix (evaluated directly).
inline EquivalenceReport check_equivalence(const Nmrdp& d, const ExpandedMdp& m,
                                           size_t horizon) {
    EquivalenceReport rep;
    auto violation = [&](const std::string& msg) {
        if (rep.violations.size() < 50) rep.violations.push_back(msg);
    };

    if (!(m.tau(m.initial) == d.initial)) violation("item 1: initial e-state maps elsewhere");

    // items 2 and 3, per reachable e-state
    for (uint32_t e = 0; e < m.size(); ++e) {
        if (m.trans[e].size() != d.actions.size()) {
            violation("item 2: action table size mismatch at e" + std::to_string(e));
            continue;
        }
        // target state -> e-state chosen, per action probability
        std::unordered_map<State, uint32_t, StateHash> chosen;
        for (size_t a = 0; a < d.actions.size(); ++a) {
            auto nm_dist = successors(d, m.tau(e), d.actions[a]);
            if (m.trans[e][a].empty()) {
                violation("item 2: action " + d.actions[a].name + " unavailable at e" +
                          std::to_string(e));
                continue;
            }
            std::unordered_map<State, double, StateHash> seen;
            for (const auto& [t, pr] : m.trans[e][a]) {
                const State& ts = m.tau(t);
                auto [it, fresh] = chosen.emplace(ts, t);
                if (!fresh && it->second != t)
                    violation("item 3: two successor e-states over one state from e" +
                              std::to_string(e));
                seen[ts] += pr;
            }
            if (seen.size() != nm_dist.size())
                violation("item 3: successor support mismatch at e" + std::to_string(e) +
                          " action " + d.actions[a].name);
            for (const auto& [ts, pr] : nm_dist) {
                auto it = seen.find(ts);
                if (it == seen.end() || !detail::prob_eq(it->second, pr))
                    violation("item 3: probability mismatch at e" + std::to_string(e) +
                              " action " + d.actions[a].name);
            }
        }
    }

    // item 4: breadth-first over (e-state, reward-trace) pairs up to horizon
    struct PairNode {
        uint32_t estate;
        RewardTrace trace;
        size_t depth;
    };
    std::deque<PairNode> queue;
    std::unordered_set<std::string> visited;
    RewardTrace t0(d);
    try {
        t0.init(d.initial);
    } catch (const ProgressionFailure&) {
        violation("item 4: reward specification fails at the initial state");
        return rep;
    }
    queue.push_back({m.initial, t0, 0});
    visited.insert(std::to_string(m.initial) + "#" + t0.key());

    while (!queue.empty()) {
        PairNode cur = std::move(queue.front());
        queue.pop_front();
        ++rep.pairs_checked;
        if (!detail::prob_eq(m.estates[cur.estate].reward, cur.trace.last_reward()))
            violation("item 4: reward mismatch at e" + std::to_string(cur.estate) +
                      " (expected " + std::to_string(cur.trace.last_reward()) + ", has " +
                      std::to_string(m.estates[cur.estate].reward) + ")");
        if (cur.depth + 1 >= horizon) continue;
        for (size_t a = 0; a < m.trans[cur.estate].size(); ++a)
            for (const auto& [t, pr] : m.trans[cur.estate][a]) {
                RewardTrace next = cur.trace;
                try {
                    next.step(m.tau(t));
                } catch (const ProgressionFailure&) {
                    violation("item 4: reward specification fails along a feasible sequence");
                    continue;
                }
                std::string k = std::to_string(t) + "#" + next.key();
                if (visited.insert(k).second) queue.push_back({t, std::move(next), cur.depth + 1});
            }
    }
    return rep;
}

// ── minimality audits ───────────────────────────────────────────────────────

enum class MinimalityKind { blind, true_minimality };

struct MinimalityReport {
    // distinct e-states over one state whose annotations and rewards coincide
    std::vector<std::pair<uint32_t, uint32_t>> merge_required;
    // pairs indistinguishable by any continuation up to the audit horizon;
    // evidence of a necessary condition, not a proof of non-minimality
    std::vector<std::pair<uint32_t, uint32_t>> suspect;
};

namespace detail {

struct ContinuationComparer {
    const Nmrdp* d;
    MinimalityKind kind;
    std::vector<State> all_states;
    std::unordered_map<std::string, bool> memo;

    bool equal(const RewardTrace& t1, const State& s1, const RewardTrace& t2, const State& s2,
               size_t depth) {
        if (!prob_eq(t1.last_reward(), t2.last_reward())) return false;
        if (depth == 0) return true;
        std::string k = t1.key() + "|" + t2.key() + "|" + std::to_string(depth) + "|" +
                        std::to_string(s1.hash()) + "|" + std::to_string(s2.hash());
        auto it = memo.find(k);
        if (it != memo.end()) return it->second;
        memo.emplace(k, true);  // provisional, cuts cycles at equal keys
        bool eq = true;
        const std::vector<State>& nexts =
            kind == MinimalityKind::blind ? all_states : feasible(s1);
        // under true minimality both sides share tau, so feasible sets agree
        for (const State& s : nexts) {
            RewardTrace a = t1;
            RewardTrace b = t2;
            try {
                a.step(s);
                b.step(s);
            } catch (const ProgressionFailure&) {
                continue;  // infeasible continuation for the reward language
            }
            if (!equal(a, s, b, s, depth - 1)) {
                eq = false;
                break;
            }
        }
        memo[k] = eq;
        return eq;
    }

    const std::vector<State>& feasible(const State& s) {
        auto it = succ_cache.find(s);
        if (it != succ_cache.end()) return it->second;
        return succ_cache.emplace(s, successor_states(*d, s)).first->second;
    }

    std::unordered_map<State, std::vector<State>, StateHash> succ_cache;
};

}  // namespace detail

// Bounded audit over every pair of e-states sharing a source state.  Blind
// audits range continuations over all states; true-minimality audits restrict
// them to feasible successors.
inline MinimalityReport audit_minimality(const ExpandedMdp& m, size_t horizon,
                                         MinimalityKind kind) {
    const Nmrdp& d = *m.source;
    MinimalityReport rep;

    // representative prefixes via breadth-first parents
    std::vector<int64_t> parent(m.size(), -1);
    std::vector<uint32_t> order;
    order.push_back(m.initial);
    std::vector<bool> seen(m.size(), false);
    seen[m.initial] = true;
    for (size_t i = 0; i < order.size(); ++i) {
        uint32_t e = order[i];
        for (const Distribution& dist : m.trans[e])
            for (const auto& [t, pr] : dist)
                if (!seen[t]) {
                    seen[t] = true;
                    parent[t] = e;
                    order.push_back(t);
                }
    }

    auto prefix_of = [&](uint32_t e) {
        StateSequence rev;
        int64_t at = e;
        while (at >= 0) {
            rev.push_back(m.tau(static_cast<uint32_t>(at)));
            at = parent[at];
        }
        return StateSequence(rev.rbegin(), rev.rend());
    };

    auto trace_of = [&](uint32_t e) {
        RewardTrace t(d);
        StateSequence pre = prefix_of(e);
        t.init(pre[0]);
        for (size_t i = 1; i < pre.size(); ++i) t.step(pre[i]);
        return t;
    };

    detail::ContinuationComparer cmp;
    cmp.d = &d;
    cmp.kind = kind;
    if (kind == MinimalityKind::blind) {
        size_t n = d.vocab.size();
        if (n > 16) throw ResourceLimitError("blind audit: state space too large");
        for (size_t v = 0; v < (size_t(1) << n); ++v) {
            State s(n);
            for (size_t p = 0; p < n; ++p) s.set(static_cast<uint32_t>(p), (v >> p) & 1);
            cmp.all_states.push_back(s);
        }
    }

    // group e-states by source state
    std::unordered_map<State, std::vector<uint32_t>, StateHash> groups;
    for (uint32_t e = 0; e < m.size(); ++e)
        if (seen[e]) groups[m.tau(e)].push_back(e);

    for (auto& [s, group] : groups)
        for (size_t i = 0; i < group.size(); ++i)
            for (size_t j = i + 1; j < group.size(); ++j) {
                uint32_t e1 = group[i], e2 = group[j];
                if (m.estates[e1].ann == m.estates[e2].ann &&
                    detail::prob_eq(m.estates[e1].reward, m.estates[e2].reward)) {
                    rep.merge_required.emplace_back(e1, e2);
                    continue;
                }
                RewardTrace t1 = trace_of(e1);
                RewardTrace t2 = trace_of(e2);
                if (cmp.equal(t1, s, t2, s, horizon > 0 ? horizon - 1 : 0))
                    rep.suspect.emplace_back(e1, e2);
            }
    return rep;
}

}  // namespace nmrdpp
