// ============================================================================
// nmrdpp/structured.hpp — symbolic translation and structured value iteration
// ============================================================================
//
// The symbolic route adds one temporal variable per purely temporal
// subformula of the reward formulae: the previous-step truth of that
// subformula.  Unfolding  f1 snc f2 = f2 or (f1 and prv (f1 snc f2))  turns
// the current truth of any tracked formula into a boolean function of current
// state variables and temporal variables, which compiles to a 0/1 diagram.
// Dynamics of a temporal variable are action-independent; state variables
// take their diagrams from the action decision trees.
//
// Variable order interleaves each current variable with its primed twin:
// state variables in domain order first, temporal variables in creation
// order after them.  No dynamic reordering.
//
// spudd_solve mirrors the conventions of the state-based solver (start at
// the reward, synchronous sweeps, the same stopping threshold), with the
// value function held as a diagram.  reachability_restrict computes the
// symbolic fixpoint image of the initial assignment, temporal variables
// included, and its result can mask the backups.
//
// ============================================================================

#pragma once

#include "add.hpp"
#include "nmrdp.hpp"
#include "solvers.hpp"

#include <memory>

namespace nmrdpp {

struct StructuredMdp {
    std::shared_ptr<AddManager> mgr;
    const Nmrdp* source = nullptr;

    // variable k of the flat layout lives at manager index 2k (current) and
    // 2k+1 (primed); state variables come first, then temporal variables
    size_t state_vars = 0;
    std::vector<Formula> temporal_defs;  // the tracked prv-formulas, creation order

    std::vector<std::vector<Add>> prob;  // [action][flat var] -> P(var'=1 | current)
    Add reward;
    std::vector<bool> initial;           // over flat vars

    size_t flat_count() const { return state_vars + temporal_defs.size(); }
    uint32_t cur(size_t k) const { return static_cast<uint32_t>(2 * k); }
    uint32_t primed(size_t k) const { return static_cast<uint32_t>(2 * k + 1); }

    std::vector<bool> manager_assignment(const std::vector<bool>& flat) const {
        std::vector<bool> a(2 * flat_count(), false);
        for (size_t k = 0; k < flat_count(); ++k) a[cur(k)] = flat[k];
        return a;
    }
};

namespace detail {

// Purely temporal subformulae: members of Sub(F) whose top operator is a
// past modality, in discovery order.
inline std::vector<Formula> purely_temporal_subformulae(const std::vector<Formula>& fs) {
    std::vector<Formula> subs;
    for (Formula f : fs) collect_subformulae(f, subs);
    std::vector<Formula> out;
    for (Formula f : subs)
        if (f.op() == Op::Prv || f.op() == Op::Snc) out.push_back(f);
    return out;
}

}  // namespace detail

// Compile an action decision tree into a diagram over the variables named by
// var_of.  Trees may test propositions in any order, so the conversion goes
// through indicator arithmetic rather than direct node construction.
inline Add add_from_dtree(AddManager& mgr, const DecisionTree& tree,
                          const std::function<uint32_t(uint32_t)>& var_of) {
    std::function<Add(int32_t)> rec = [&](int32_t at) -> Add {
        const auto& n = tree.nodes()[at];
        if (n.prop < 0) return mgr.constant(n.prob);
        Add ind = mgr.indicator(var_of(static_cast<uint32_t>(n.prop)));
        Add not_ind = mgr.apply(AddOp::minus, mgr.constant(1.0), ind);
        return mgr.apply(AddOp::plus, mgr.apply(AddOp::times, ind, rec(n.hi)),
                         mgr.apply(AddOp::times, not_ind, rec(n.lo)));
    };
    return rec(tree.root());
}

inline StructuredMdp pltlstr_translate(const Nmrdp& d, const PltlRewardSpec& spec) {
    StructuredMdp m;
    m.mgr = std::make_shared<AddManager>();
    m.source = &d;
    m.state_vars = d.vocab.size();

    std::vector<Formula> fs;
    for (const auto& e : spec.entries) fs.push_back(simplify(e.formula));

    // T = { prv ψ | ψ in PTSub(F), ψ not itself a prv-formula }
    //   ∪ { ψ | ψ in PTSub(F), ψ a prv-formula }
    std::vector<Formula> ptsub = detail::purely_temporal_subformulae(fs);
    for (Formula psi : ptsub) {
        Formula def = psi.op() == Op::Prv ? psi : Formula::prv(psi);
        bool seen = false;
        for (Formula t : m.temporal_defs)
            if (t == def) seen = true;
        if (!seen) m.temporal_defs.push_back(def);
    }

    AddManager& mgr = *m.mgr;
    for (size_t p = 0; p < m.state_vars; ++p) {
        mgr.new_var(d.vocab.name(static_cast<uint32_t>(p)));
        mgr.new_var(d.vocab.name(static_cast<uint32_t>(p)) + "'");
    }
    for (size_t t = 0; t < m.temporal_defs.size(); ++t) {
        std::string name = "t" + std::to_string(t + 1);
        mgr.new_var(name);
        mgr.new_var(name + "'");
    }

    auto temporal_index = [&](Formula def) -> int {
        for (size_t t = 0; t < m.temporal_defs.size(); ++t)
            if (m.temporal_defs[t] == def) return static_cast<int>(t);
        return -1;
    };

    // current truth of a tracked formula over current state + temporal vars
    std::function<Add(Formula)> expand = [&](Formula f) -> Add {
        switch (f.op()) {
            case Op::True:  return mgr.constant(1.0);
            case Op::False: return mgr.constant(0.0);
            case Op::Atom:  return mgr.indicator(m.cur(f.prop()));
            case Op::NAtom:
                return mgr.apply(AddOp::minus, mgr.constant(1.0), mgr.indicator(m.cur(f.prop())));
            case Op::Not:
                return mgr.apply(AddOp::minus, mgr.constant(1.0), expand(f.lhs()));
            case Op::And:   return mgr.apply(AddOp::min_of, expand(f.lhs()), expand(f.rhs()));
            case Op::Or:    return mgr.apply(AddOp::max_of, expand(f.lhs()), expand(f.rhs()));
            case Op::Prv: {
                int t = temporal_index(f);
                if (t < 0) throw std::logic_error("untracked prv-subformula");
                return mgr.indicator(m.cur(m.state_vars + static_cast<size_t>(t)));
            }
            case Op::Snc: {
                // f2 or (f1 and prv (f1 snc f2))
                int t = temporal_index(Formula::prv(f));
                if (t < 0) throw std::logic_error("untracked snc-subformula");
                Add prev = mgr.indicator(m.cur(m.state_vars + static_cast<size_t>(t)));
                return mgr.apply(AddOp::max_of, expand(f.rhs()),
                                 mgr.apply(AddOp::min_of, expand(f.lhs()), prev));
            }
            default:
                throw DialectError("future operator in symbolic translation");
        }
    };

    auto var_of = [&m](uint32_t p) { return m.cur(p); };
    m.prob.resize(d.actions.size());
    for (size_t a = 0; a < d.actions.size(); ++a) {
        m.prob[a].resize(m.flat_count());
        for (size_t p = 0; p < m.state_vars; ++p)
            m.prob[a][p] = mgr.indicator(m.cur(p));  // persist by default
        for (const auto& [p, tree] : d.actions[a].effects)
            m.prob[a][p] = add_from_dtree(mgr, tree, var_of);
        for (size_t t = 0; t < m.temporal_defs.size(); ++t)
            m.prob[a][m.state_vars + t] = expand(m.temporal_defs[t].lhs());
    }

    m.reward = mgr.constant(0.0);
    for (const auto& e : spec.entries) {
        Add ind = expand(simplify(e.formula));
        m.reward = mgr.apply(AddOp::plus, m.reward,
                             mgr.apply(AddOp::times, mgr.constant(e.reward), ind));
    }

    m.initial.assign(m.flat_count(), false);
    for (size_t p = 0; p < m.state_vars; ++p)
        m.initial[p] = d.initial.get(static_cast<uint32_t>(p));
    // temporal variables are false at the origin: prv ψ fails at step 0
    return m;
}

// ── structured value iteration ──────────────────────────────────────────────

struct StructuredSolveResult {
    Add value;
    std::vector<Add> qvalues;  // per action
    size_t iterations = 0;
    bool converged = true;
    double value_at_initial = 0.0;
    double wall_time_ms = 0.0;

    int32_t policy_at(const AddManager& mgr, const std::vector<bool>& assignment) const {
        int32_t best = -1;
        double best_q = -std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < qvalues.size(); ++a) {
            double q = mgr.eval(qvalues[a], assignment);
            if (q > best_q + 1e-12) {
                best_q = q;
                best = static_cast<int32_t>(a);
            }
        }
        return best;
    }
};

inline StructuredSolveResult spudd_solve(const StructuredMdp& m, const SolverConfig& cfg,
                                         std::optional<Add> reach_mask = {}) {
    cfg.validate();
    detail::Stopwatch watch;
    AddManager& mgr = *m.mgr;
    const double threshold = cfg.sup_threshold();
    size_t n = m.flat_count();

    // transition relations per action and variable: primed indicator woven
    // with the probability diagram
    std::vector<std::vector<Add>> rel(m.prob.size());
    for (size_t a = 0; a < m.prob.size(); ++a) {
        rel[a].resize(n);
        for (size_t k = 0; k < n; ++k) {
            Add p = m.prob[a][k];
            Add ind = mgr.indicator(m.primed(k));
            Add not_ind = mgr.apply(AddOp::minus, mgr.constant(1.0), ind);
            Add one_minus = mgr.apply(AddOp::minus, mgr.constant(1.0), p);
            rel[a][k] = mgr.apply(AddOp::plus, mgr.apply(AddOp::times, ind, p),
                                  mgr.apply(AddOp::times, not_ind, one_minus));
        }
    }

    auto prime_all = [&](Add v) {
        return mgr.rename(v, [](uint32_t var) { return var + 1; });  // 2k -> 2k+1
    };

    StructuredSolveResult res;
    res.value = m.reward;
    if (reach_mask) res.value = mgr.apply(AddOp::times, *reach_mask, res.value);
    res.qvalues.assign(m.prob.size(), mgr.constant(0.0));

    for (;;) {
        Add primed_v = prime_all(res.value);
        Add best = mgr.constant(-std::numeric_limits<double>::infinity());
        for (size_t a = 0; a < m.prob.size(); ++a) {
            Add w = primed_v;
            for (size_t k = n; k-- > 0;) {
                w = mgr.apply(AddOp::times, w, rel[a][k]);
                w = mgr.sum_out(w, m.primed(k));
            }
            Add q = mgr.apply(AddOp::plus, m.reward,
                              mgr.apply(AddOp::times, mgr.constant(cfg.beta), w));
            if (reach_mask) q = mgr.apply(AddOp::times, *reach_mask, q);
            res.qvalues[a] = q;
            best = mgr.apply(AddOp::max_of, best, q);
        }
        Add diff = mgr.apply(AddOp::minus, best, res.value);
        double sup = mgr.max_abs_terminal(diff);
        res.value = best;
        ++res.iterations;
        if (sup < threshold) break;
        if (res.iterations >= cfg.max_iterations) {
            res.converged = false;
            break;
        }
    }

    res.value_at_initial = mgr.eval(res.value, m.manager_assignment(m.initial));
    res.wall_time_ms = watch.ms();
    return res;
}

// ── symbolic reachability ───────────────────────────────────────────────────

// 0/1 indicator over current variables (temporal variables included) of the
// assignments reachable from the initial one; nonzero transition
// probabilities count as possible.
inline Add reachability_restrict(const StructuredMdp& m) {
    AddManager& mgr = *m.mgr;
    size_t n = m.flat_count();

    std::vector<std::vector<Add>> poss(m.prob.size());
    for (size_t a = 0; a < m.prob.size(); ++a) {
        poss[a].resize(n);
        for (size_t k = 0; k < n; ++k) {
            Add p = m.prob[a][k];
            Add can_true = mgr.threshold_pos(p);
            Add can_false =
                mgr.threshold_pos(mgr.apply(AddOp::minus, mgr.constant(1.0), p));
            Add ind = mgr.indicator(m.primed(k));
            Add not_ind = mgr.apply(AddOp::minus, mgr.constant(1.0), ind);
            poss[a][k] = mgr.apply(AddOp::max_of, mgr.apply(AddOp::min_of, ind, can_true),
                                   mgr.apply(AddOp::min_of, not_ind, can_false));
        }
    }

    Add reach = mgr.constant(1.0);
    for (size_t k = 0; k < n; ++k) {
        Add ind = mgr.indicator(m.cur(k));
        Add lit = m.initial[k]
                      ? ind
                      : mgr.apply(AddOp::minus, mgr.constant(1.0), ind);
        reach = mgr.apply(AddOp::min_of, reach, lit);
    }

    for (;;) {
        Add grown = reach;
        for (size_t a = 0; a < m.prob.size(); ++a) {
            Add image = reach;
            for (size_t k = 0; k < n; ++k) image = mgr.apply(AddOp::min_of, image, poss[a][k]);
            for (size_t k = 0; k < n; ++k) image = mgr.max_out(image, m.cur(k));
            image = mgr.rename(image, [](uint32_t var) { return var - 1; });  // 2k+1 -> 2k
            grown = mgr.apply(AddOp::max_of, grown, image);
        }
        if (grown == reach) break;
        reach = grown;
    }
    return reach;
}

}  // namespace nmrdpp
