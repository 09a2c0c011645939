// ============================================================================
// nmrdpp/translate.hpp — reward-annotation translations into expanded MDPs
// ============================================================================
//
// Three routes from a decision process with history-dependent rewards to an
// equivalent expanded process:
//
//   pltlsim_translate   labels e-states with the truth of every member of the
//                       subformula closure of the reward formulae,
//   pltlmin_translate   restricts candidate labels per state to the fixpoint
//                       label function computed by pltlmin_preprocess,
//   fltl_translate      labels e-states with the progressed reward
//                       specification (default: progressed one step ahead,
//                       which merges histories that only differ in how the
//                       current reward was earned).
//
// Successor labels on the past-dialect routes are decided propositionally:
// the regressed formula is a boolean combination whose leaves are tracked
// members of the predecessor label, so entailment is constant folding plus
// label lookups.  All tracked formulas are kept in simplified canonical form
// so those lookups hit.
//
// ============================================================================

#pragma once

#include "expanded_mdp.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>

namespace nmrdpp {

struct TranslateOptions {
    size_t max_estates = 1'000'000;
    bool keep_transitions = true;
    bool one_step_ahead = true;  // future-dialect labelling convention
};

// ── tracked formula sets and label entailment ───────────────────────────────

namespace detail {

// Positive representatives of a set of tracked formulas.  A member and its
// negation share one slot; the polarity is recovered at lookup time.
struct PltlTracked {
    std::vector<Formula> reps;                       // sorted by id
    std::unordered_map<uint32_t, size_t> index;      // rep id -> slot

    static std::pair<Formula, bool> strip(Formula f) {
        if (f.op() == Op::Not) return {f.lhs(), false};
        if (f.op() == Op::NAtom) return {Formula::atom(f.prop()), false};
        return {f, true};
    }

    static PltlTracked build(const std::vector<Formula>& members) {
        PltlTracked t;
        for (Formula m : members) {
            if (m.is_constant()) continue;
            Formula rep = strip(m).first;
            if (!t.index.count(rep.id())) {
                t.index.emplace(rep.id(), 0);
                t.reps.push_back(rep);
            }
        }
        std::sort(t.reps.begin(), t.reps.end());
        t.index.clear();
        for (size_t i = 0; i < t.reps.size(); ++i) t.index.emplace(t.reps[i].id(), i);
        return t;
    }
};

// Truth of g under a label assignment, given the e-state's own state for
// atoms.  g must be a boolean combination over tracked members, state atoms
// and constants; residual temporal leaves outside the tracked set indicate a
// construction bug.
inline bool eval_under_label(Formula g, const PltlTracked& tracked,
                             const std::vector<bool>& bits, const State& s) {
    if (g.is_true()) return true;
    if (g.is_false()) return false;
    auto [rep, pol] = PltlTracked::strip(g);
    auto it = tracked.index.find(rep.id());
    if (it != tracked.index.end()) return bits[it->second] == pol;
    switch (g.op()) {
        case Op::Atom:  return s.get(g.prop());
        case Op::NAtom: return !s.get(g.prop());
        case Op::Not:   return !eval_under_label(g.lhs(), tracked, bits, s);
        case Op::And:
            return eval_under_label(g.lhs(), tracked, bits, s) &&
                   eval_under_label(g.rhs(), tracked, bits, s);
        case Op::Or:
            return eval_under_label(g.lhs(), tracked, bits, s) ||
                   eval_under_label(g.rhs(), tracked, bits, s);
        default:
            throw std::logic_error("temporal leaf escaped the tracked set");
    }
}

struct RegressKey {
    uint32_t formula;
    State state;
    bool operator==(const RegressKey& o) const {
        return formula == o.formula && state == o.state;
    }
};
struct RegressKeyHash {
    size_t operator()(const RegressKey& k) const {
        return k.state.hash() * 1099511628211ull + k.formula;
    }
};

class RegressCache {
public:
    Formula get(Formula f, const State& s) {
        RegressKey key{f.id(), s};
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Formula r = regress(f, s);
        cache_.emplace(std::move(key), r);
        return r;
    }

private:
    std::unordered_map<RegressKey, Formula, RegressKeyHash> cache_;
};

struct EStateKey {
    State state;
    Annotation ann;
    uint64_t reward_bits;
    bool operator==(const EStateKey& o) const {
        return reward_bits == o.reward_bits && state == o.state && ann == o.ann;
    }
};
struct EStateKeyHash {
    size_t operator()(const EStateKey& k) const {
        return (k.state.hash() * 31 + k.ann.hash()) * 1099511628211ull + k.reward_bits;
    }
};

inline uint64_t double_bits(double d) {
    uint64_t b;
    std::memcpy(&b, &d, sizeof(b));
    return b;
}

// Shared forward-expansion driver for the past-dialect routes.  tracked_for
// yields the tracked set for a given process state (one global set for the
// closure route, the label-function entry for the preprocessed route).
inline ExpandedMdp pltl_expand(const Nmrdp& d, const PltlRewardSpec& spec,
                               const std::function<const PltlTracked&(const State&)>& tracked_for,
                               const TranslateOptions& opts) {
    std::vector<PltlRewardSpec::Entry> entries;
    for (const auto& e : spec.entries) entries.push_back({e.name, simplify(e.formula), e.reward});

    RegressCache reg;
    ExpandedMdp m;
    m.source = &d;
    m.transitions_kept = opts.keep_transitions;

    std::unordered_map<EStateKey, uint32_t, EStateKeyHash> ids;
    std::vector<std::vector<bool>> labels;

    auto reward_of = [&](const PltlTracked& t, const std::vector<bool>& bits, const State& s) {
        double r = 0.0;
        for (const auto& e : entries)
            if (eval_under_label(e.formula, t, bits, s)) r += e.reward;
        return r;
    };

    auto intern = [&](const State& s, std::vector<bool> bits) {
        const PltlTracked& t = tracked_for(s);
        Annotation ann;
        for (size_t i = 0; i < t.reps.size(); ++i)
            if (bits[i]) ann.formulas.push_back(t.reps[i]);
        double r = reward_of(t, bits, s);
        EStateKey key{s, ann, double_bits(r)};
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(m.estates.size());
        if (id >= opts.max_estates) throw ResourceLimitError("e-state cap exceeded");
        m.estates.push_back({s, std::move(ann), r});
        m.trans.emplace_back();
        labels.push_back(std::move(bits));
        ids.emplace(std::move(key), id);
        return id;
    };

    {
        const PltlTracked& t0 = tracked_for(d.initial);
        std::vector<bool> bits(t0.reps.size());
        StateSequence origin = {d.initial};
        for (size_t i = 0; i < t0.reps.size(); ++i) bits[i] = eval_pltl(origin, 0, t0.reps[i]);
        m.initial = intern(d.initial, std::move(bits));
    }

    for (uint32_t e = 0; e < m.estates.size(); ++e) {
        const State s = m.estates[e].state;
        const PltlTracked& t = tracked_for(s);
        const std::vector<bool> bits = labels[e];
        m.trans[e].resize(d.actions.size());
        for (size_t a = 0; a < d.actions.size(); ++a) {
            for (const auto& [s2, pr] : successors(d, s, d.actions[a])) {
                const PltlTracked& t2 = tracked_for(s2);
                std::vector<bool> bits2(t2.reps.size());
                for (size_t i = 0; i < t2.reps.size(); ++i)
                    bits2[i] = eval_under_label(reg.get(t2.reps[i], s2), t, bits, s);
                uint32_t to = intern(s2, std::move(bits2));
                if (opts.keep_transitions) m.trans[e][a].emplace_back(to, pr);
            }
            if (!opts.keep_transitions) m.trans[e][a].clear();
        }
    }
    return m;
}

}  // namespace detail

// ── the simple subformula-closure route ─────────────────────────────────────

inline ExpandedMdp pltlsim_translate(const Nmrdp& d, const PltlRewardSpec& spec,
                                     const TranslateOptions& opts = {}) {
    std::vector<Formula> fs;
    for (const auto& e : spec.entries) fs.push_back(simplify(e.formula));
    detail::PltlTracked tracked = detail::PltlTracked::build(sub_closure(fs));
    return detail::pltl_expand(
        d, spec, [&tracked](const State&) -> const detail::PltlTracked& { return tracked; },
        opts);
}

// ── the preprocessed route ──────────────────────────────────────────────────

struct LabelFunction {
    std::unordered_map<State, std::vector<Formula>, StateHash> map;  // sorted members
};

// Least fixpoint of  l(s) = F ∪ { Reg(ψ', s') | ψ' ∈ l(s'), s' successor of s },
// computed by repeated sweeps over the reachable states in discovery order.
// Constant regressands are dropped; members are kept in simplified form.
inline LabelFunction pltlmin_preprocess(const Nmrdp& d, const PltlRewardSpec& spec,
                                        size_t state_cap = 1u << 20) {
    std::vector<State> states = reachable_states(d, state_cap);
    std::vector<std::vector<size_t>> succ(states.size());
    std::unordered_map<State, size_t, StateHash> pos;
    for (size_t i = 0; i < states.size(); ++i) pos.emplace(states[i], i);
    for (size_t i = 0; i < states.size(); ++i)
        for (const State& t : successor_states(d, states[i])) succ[i].push_back(pos.at(t));

    std::vector<std::vector<Formula>> l(states.size());
    for (auto& set : l)
        for (const auto& e : spec.entries) {
            Formula f = simplify(e.formula);
            if (!f.is_constant()) set.push_back(f);
        }
    for (auto& set : l) {
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }

    detail::RegressCache reg;
    bool grew = true;
    while (grew) {
        grew = false;
        for (size_t i = 0; i < states.size(); ++i) {
            for (size_t j : succ[i]) {
                // snapshot: i may be its own successor
                std::vector<Formula> source = l[j];
                for (Formula psi : source) {
                    Formula g = reg.get(psi, states[j]);
                    if (g.is_constant()) continue;
                    auto it = std::lower_bound(l[i].begin(), l[i].end(), g);
                    if (it == l[i].end() || *it != g) {
                        l[i].insert(it, g);
                        grew = true;
                    }
                }
            }
        }
    }

    LabelFunction out;
    for (size_t i = 0; i < states.size(); ++i) out.map.emplace(states[i], std::move(l[i]));
    return out;
}

inline ExpandedMdp pltlmin_translate(const Nmrdp& d, const PltlRewardSpec& spec,
                                     const LabelFunction& l, const TranslateOptions& opts = {}) {
    std::unordered_map<State, detail::PltlTracked, StateHash> tracked;
    for (const auto& [s, members] : l.map) tracked.emplace(s, detail::PltlTracked::build(members));
    return detail::pltl_expand(
        d, spec,
        [&tracked](const State& s) -> const detail::PltlTracked& { return tracked.at(s); },
        opts);
}

// ── on-demand generation interface ──────────────────────────────────────────

class SuccessorGenerator {
public:
    virtual ~SuccessorGenerator() = default;
    virtual uint32_t initial() = 0;
    virtual size_t action_count() const = 0;
    virtual double reward(uint32_t node) = 0;
    virtual const State& state_of(uint32_t node) = 0;
    virtual bool dead(uint32_t node) = 0;  // no applicable actions
    virtual Distribution successors_of(uint32_t node, uint32_t action) = 0;
    virtual size_t expanded_count() const = 0;
};

// Adapter exposing a fully expanded process through the generator interface.
class ExpandedMdpGenerator final : public SuccessorGenerator {
public:
    explicit ExpandedMdpGenerator(const ExpandedMdp& m) : m_(&m) {}
    uint32_t initial() override { return m_->initial; }
    size_t action_count() const override { return m_->source->actions.size(); }
    double reward(uint32_t n) override { return m_->estates[n].reward; }
    const State& state_of(uint32_t n) override { return m_->estates[n].state; }
    bool dead(uint32_t n) override { return m_->dead(n); }
    Distribution successors_of(uint32_t n, uint32_t a) override { return m_->trans[n][a]; }
    size_t expanded_count() const override { return m_->size(); }

private:
    const ExpandedMdp* m_;
};

// ── the progression route ───────────────────────────────────────────────────

namespace detail {

class FltlExpander {
public:
    struct Node {
        State state;
        FltlRewardSpec spec;       // progressed specification labelling this e-state
        std::optional<Formula> control;
        double reward = 0.0;
        int64_t parent = -1;       // discovery parent, for failure witnesses
    };

    FltlExpander(const Nmrdp& d, const FltlRewardSpec& spec,
                 const std::optional<ControlKnowledge>& control, const TranslateOptions& opts)
        : d_(&d), opts_(opts) {
        std::vector<FltlRewardSpec::Entry> entries;
        for (const auto& e : spec.entries) entries.push_back({simplify(e.formula), e.reward});
        phi0_ = FltlRewardSpec::make(std::move(entries));
        if (control) c0_ = simplify(control->formula);
    }

    uint32_t initial() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!nodes_.empty()) return 0;
        Node n;
        n.state = d_->initial;
        if (opts_.one_step_ahead) {
            RProgResult r = progress_or_throw(d_->initial, phi0_, -1);
            n.spec = std::move(r.next);
            n.reward = r.reward;
            if (c0_) n.control = prog(false, d_->initial, *c0_);
        } else {
            n.spec = phi0_;
            n.reward = reward_only(d_->initial, phi0_);
            n.control = c0_;
        }
        return intern(std::move(n));
    }

    const Node& node(uint32_t id) {
        std::lock_guard<std::mutex> lock(mutex_);
        return nodes_[id];
    }

    bool dead(uint32_t id) {
        std::lock_guard<std::mutex> lock(mutex_);
        return nodes_[id].control && nodes_[id].control->is_false();
    }

    // Successor distribution under one action; creates successor nodes.
    Distribution expand(uint32_t id, uint32_t action) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(id, action);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;

        Node cur = nodes_[id];
        Distribution dist;
        if (!(cur.control && cur.control->is_false())) {
            // literal labelling progresses through the current state once
            std::optional<RProgResult> literal_step;
            std::optional<Formula> literal_control;
            if (!opts_.one_step_ahead) {
                literal_step = progress_or_throw(cur.state, cur.spec, id);
                if (cur.control) literal_control = prog(false, cur.state, *cur.control);
            }
            for (const auto& [s2, pr] : successors(*d_, cur.state, d_->actions[action])) {
                Node nxt;
                nxt.state = s2;
                nxt.parent = id;
                if (opts_.one_step_ahead) {
                    RProgResult r = progress_or_throw(s2, cur.spec, id);
                    nxt.spec = std::move(r.next);
                    nxt.reward = r.reward;
                    if (cur.control) nxt.control = prog(false, s2, *cur.control);
                } else {
                    nxt.spec = literal_step->next;
                    nxt.reward = reward_only(s2, nxt.spec);
                    nxt.control = literal_control;
                }
                dist.emplace_back(intern(std::move(nxt)), pr);
            }
        }
        memo_.emplace(key, dist);
        return dist;
    }

    size_t node_count() {
        std::lock_guard<std::mutex> lock(mutex_);
        return nodes_.size();
    }

    const Nmrdp& domain() const { return *d_; }
    size_t action_count() const { return d_->actions.size(); }

private:
    static double reward_only(const State& s, const FltlRewardSpec& spec) {
        double r = 0.0;
        for (const auto& e : spec.entries)
            if (rew(s, e.formula)) r += e.reward;
        return r;
    }

    RProgResult progress_or_throw(const State& s, const FltlRewardSpec& spec, int64_t parent) {
        try {
            return rprog(s, spec);
        } catch (ProgressionFailure& failure) {
            StateSequence prefix;
            for (int64_t at = parent; at >= 0; at = nodes_[at].parent)
                prefix.push_back(nodes_[at].state);
            std::reverse(prefix.begin(), prefix.end());
            prefix.push_back(s);
            failure.witness = std::move(prefix);
            throw;
        }
    }

    uint32_t intern(Node n) {
        EStateKey key{n.state, Annotation::from_spec(n.spec, n.control), double_bits(n.reward)};
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(nodes_.size());
        if (id >= opts_.max_estates) throw ResourceLimitError("e-state cap exceeded");
        nodes_.push_back(std::move(n));
        ids_.emplace(std::move(key), id);
        return id;
    }

    const Nmrdp* d_;
    TranslateOptions opts_;
    FltlRewardSpec phi0_;
    std::optional<Formula> c0_;
    std::deque<Node> nodes_;
    std::unordered_map<EStateKey, uint32_t, EStateKeyHash> ids_;
    std::map<std::pair<uint32_t, uint32_t>, Distribution> memo_;
    std::mutex mutex_;
};

}  // namespace detail

// Lazily expanded progression translation, for solvers that drive their own
// envelope.  Safe to call from multiple workers.
class FltlOnDemandGenerator final : public SuccessorGenerator {
public:
    FltlOnDemandGenerator(const Nmrdp& d, const FltlRewardSpec& spec,
                          const std::optional<ControlKnowledge>& control = {},
                          const TranslateOptions& opts = {})
        : exp_(std::make_unique<detail::FltlExpander>(d, spec, control, opts)) {}

    uint32_t initial() override { return exp_->initial(); }
    size_t action_count() const override { return exp_->action_count(); }
    double reward(uint32_t n) override { return exp_->node(n).reward; }
    const State& state_of(uint32_t n) override { return exp_->node(n).state; }
    bool dead(uint32_t n) override { return exp_->dead(n); }
    Distribution successors_of(uint32_t n, uint32_t a) override { return exp_->expand(n, a); }
    size_t expanded_count() const override { return exp_->node_count(); }

    // Materialise everything reached so far plus its closure.
    ExpandedMdp to_expanded();

private:
    std::unique_ptr<detail::FltlExpander> exp_;
};

inline ExpandedMdp fltl_translate(const Nmrdp& d, const FltlRewardSpec& spec,
                                  const std::optional<ControlKnowledge>& control = {},
                                  const TranslateOptions& opts = {}) {
    detail::FltlExpander exp(d, spec, control, opts);
    ExpandedMdp m;
    m.source = &d;
    m.transitions_kept = opts.keep_transitions;
    uint32_t root = exp.initial();
    m.initial = root;
    for (uint32_t e = 0; e < exp.node_count(); ++e) {
        m.trans.emplace_back();
        m.trans[e].resize(d.actions.size());
        if (!exp.dead(e))
            for (size_t a = 0; a < d.actions.size(); ++a) {
                Distribution dist = exp.expand(e, static_cast<uint32_t>(a));
                if (opts.keep_transitions) m.trans[e][a] = std::move(dist);
            }
    }
    for (uint32_t e = 0; e < exp.node_count(); ++e) {
        const auto& n = exp.node(e);
        m.estates.push_back({n.state, Annotation::from_spec(n.spec, n.control), n.reward});
    }
    return m;
}

inline ExpandedMdp FltlOnDemandGenerator::to_expanded() {
    ExpandedMdp m;
    m.source = &exp_->domain();
    uint32_t root = exp_->initial();
    m.initial = root;
    for (uint32_t e = 0; e < exp_->node_count(); ++e) {
        m.trans.emplace_back();
        m.trans[e].resize(exp_->action_count());
        if (!exp_->dead(e))
            for (size_t a = 0; a < exp_->action_count(); ++a)
                m.trans[e][a] = exp_->expand(e, static_cast<uint32_t>(a));
    }
    for (uint32_t e = 0; e < exp_->node_count(); ++e) {
        const auto& n = exp_->node(e);
        m.estates.push_back({n.state, Annotation::from_spec(n.spec, n.control), n.reward});
    }
    return m;
}

}  // namespace nmrdpp
