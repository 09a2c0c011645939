// ============================================================================
// nmrdpp/nmrdp.hpp — decision processes with history-dependent rewards
// ============================================================================
//
// Action effects follow the SPUDD convention: per affected proposition, a
// decision tree over the current state gives the probability that the
// proposition is true afterwards.  Propositions an action does not mention
// keep their value.  Effects are independent across propositions, so a
// correlated effect must be encoded through auxiliary propositions.
//
// ============================================================================

#pragma once

#include "formula.hpp"
#include "progression.hpp"
#include "regression.hpp"

#include <optional>
#include <variant>

namespace nmrdpp {

// ── decision trees ──────────────────────────────────────────────────────────

class DecisionTree {
public:
    struct Node {
        int32_t prop = -1;  // -1 marks a leaf
        double prob = 0.0;
        int32_t hi = -1, lo = -1;
    };

    static DecisionTree leaf(double p) {
        DecisionTree t;
        t.root_ = t.add({-1, p, -1, -1});
        return t;
    }

    static DecisionTree test(uint32_t prop, const DecisionTree& hi, const DecisionTree& lo) {
        DecisionTree t;
        int32_t h = t.graft(hi, hi.root_);
        int32_t l = t.graft(lo, lo.root_);
        t.root_ = t.add({static_cast<int32_t>(prop), 0.0, h, l});
        return t;
    }

    double eval(const State& s) const {
        int32_t at = root_;
        while (nodes_[at].prop >= 0)
            at = s.get(static_cast<uint32_t>(nodes_[at].prop)) ? nodes_[at].hi : nodes_[at].lo;
        return nodes_[at].prob;
    }

    // Every leaf must be a probability.
    bool leaves_valid() const {
        for (const Node& n : nodes_)
            if (n.prop < 0 && (n.prob < 0.0 || n.prob > 1.0)) return false;
        return true;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    int32_t root() const { return root_; }

    template <class Fn>
    void visit(Fn&& fn) const { visit_rec(root_, fn); }

private:
    int32_t add(Node n) {
        nodes_.push_back(n);
        return static_cast<int32_t>(nodes_.size() - 1);
    }
    int32_t graft(const DecisionTree& other, int32_t at) {
        const Node& n = other.nodes_[at];
        if (n.prop < 0) return add(n);
        int32_t h = graft(other, n.hi);
        int32_t l = graft(other, n.lo);
        return add({n.prop, 0.0, h, l});
    }
    template <class Fn>
    void visit_rec(int32_t at, Fn& fn) const {
        const Node& n = nodes_[at];
        fn(n);
        if (n.prop >= 0) {
            visit_rec(n.hi, fn);
            visit_rec(n.lo, fn);
        }
    }

    std::vector<Node> nodes_;
    int32_t root_ = -1;
};

// ── actions and processes ───────────────────────────────────────────────────

struct ActionSpec {
    std::string name;
    std::vector<std::pair<uint32_t, DecisionTree>> effects;  // sorted by proposition

    void set_effect(uint32_t prop, DecisionTree tree) {
        for (auto& [p, t] : effects)
            if (p == prop) {
                t = std::move(tree);
                return;
            }
        effects.emplace_back(prop, std::move(tree));
        std::sort(effects.begin(), effects.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
};

using RewardSpec = std::variant<PltlRewardSpec, FltlRewardSpec>;

struct Nmrdp {
    Vocabulary vocab;
    std::vector<ActionSpec> actions;
    State initial;
    RewardSpec rewards;
    std::optional<ControlKnowledge> control;

    Dialect reward_dialect() const {
        return std::holds_alternative<PltlRewardSpec>(rewards) ? Dialect::pltl : Dialect::fltl;
    }
    const PltlRewardSpec& pltl_rewards() const { return std::get<PltlRewardSpec>(rewards); }
    const FltlRewardSpec& fltl_rewards() const { return std::get<FltlRewardSpec>(rewards); }

    void validate() const {
        if (actions.empty()) throw std::invalid_argument("process needs at least one action");
        if (initial.width() != vocab.size())
            throw std::invalid_argument("initial state width does not cover the vocabulary");
        for (const ActionSpec& a : actions)
            for (const auto& [p, t] : a.effects) {
                if (p >= vocab.size()) throw std::invalid_argument("effect on unknown proposition");
                if (!t.leaves_valid())
                    throw std::invalid_argument("decision tree leaf outside [0,1] in action " + a.name);
            }
    }
};

// ── successor distributions ─────────────────────────────────────────────────
// Product over the affected propositions: each is independently true with the
// probability its tree assigns under s; everything else persists.  Outcomes
// with probability zero are omitted; the result is sorted by state for
// deterministic iteration.

inline std::vector<std::pair<State, double>> successors(const Nmrdp&, const State& s,
                                                        const ActionSpec& a) {
    std::vector<std::pair<uint32_t, double>> probs;
    probs.reserve(a.effects.size());
    for (const auto& [p, tree] : a.effects) probs.emplace_back(p, tree.eval(s));

    std::vector<std::pair<State, double>> out;
    State cur = s;
    struct Rec {
        void operator()(size_t i, double weight, State& cur,
                        const std::vector<std::pair<uint32_t, double>>& probs,
                        std::vector<std::pair<State, double>>& out) const {
            if (i == probs.size()) {
                out.emplace_back(cur, weight);
                return;
            }
            auto [p, pr] = probs[i];
            bool old = cur.get(p);
            if (pr > 0.0) {
                cur.set(p, true);
                (*this)(i + 1, weight * pr, cur, probs, out);
            }
            if (pr < 1.0) {
                cur.set(p, false);
                (*this)(i + 1, weight * (1.0 - pr), cur, probs, out);
            }
            cur.set(p, old);
        }
    } rec;
    rec(0, 1.0, cur, probs, out);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

// Union of successor states over all actions.
inline std::vector<State> successor_states(const Nmrdp& d, const State& s) {
    std::vector<State> out;
    for (const ActionSpec& a : d.actions)
        for (const auto& [t, pr] : successors(d, s, a)) {
            bool seen = false;
            for (const State& u : out)
                if (u == t) { seen = true; break; }
            if (!seen) out.push_back(t);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Breadth-first enumeration of the reachable state space.
inline std::vector<State> reachable_states(const Nmrdp& d, size_t cap = 1u << 20) {
    std::vector<State> order;
    std::unordered_map<State, uint32_t, StateHash> seen;
    order.push_back(d.initial);
    seen.emplace(d.initial, 0);
    for (size_t i = 0; i < order.size(); ++i) {
        State s = order[i];
        for (const ActionSpec& a : d.actions)
            for (const auto& [t, pr] : successors(d, s, a))
                if (seen.emplace(t, static_cast<uint32_t>(order.size())).second) {
                    order.push_back(t);
                    if (order.size() > cap)
                        throw ResourceLimitError("reachable state space exceeds cap");
                }
    }
    return order;
}

}  // namespace nmrdpp
