// ============================================================================
// nmrdpp/regression.hpp — past-dialect regression and reward specifications
// ============================================================================
//
// Reg(f, s) rewrites a past-dialect formula into what must have held of the
// prefix one step earlier, given that the current state is s.  Since-formulae
// unfold through the equivalence  f1 snc f2 = f2 or (f1 and prv (f1 snc f2)),
// so the regressed formula is a boolean combination of residual temporal
// subformulae; current-state atoms fold to constants on the way.
//
// ============================================================================

#pragma once

#include "formula.hpp"

#include <string>
#include <vector>

namespace nmrdpp {

struct PltlRewardSpec {
    struct Entry {
        std::string name;
        Formula formula;
        double reward = 0.0;
    };
    std::vector<Entry> entries;

    std::vector<Formula> formulas() const {
        std::vector<Formula> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.formula);
        return out;
    }
};

namespace detail {

inline Formula regress_raw(Formula f, const State& s) {
    switch (f.op()) {
        case Op::True: case Op::False:
            return f;
        case Op::Atom:
            return s.get(f.prop()) ? Formula::tt() : Formula::ff();
        case Op::NAtom:
            return s.get(f.prop()) ? Formula::ff() : Formula::tt();
        case Op::Not:
            return Formula::neg(regress_raw(f.lhs(), s));
        case Op::And:
            return Formula::conj(regress_raw(f.lhs(), s), regress_raw(f.rhs(), s));
        case Op::Or:
            return Formula::disj(regress_raw(f.lhs(), s), regress_raw(f.rhs(), s));
        case Op::Prv:
            return f.lhs();
        case Op::Snc:
            return Formula::disj(regress_raw(f.rhs(), s),
                                 Formula::conj(regress_raw(f.lhs(), s), f));
        default:
            throw DialectError("future operator in regression");
    }
}

}  // namespace detail

// Regression of f through state s, simplified.  For i > 0, f holds of a
// prefix ending in s exactly when the result holds of the prefix one shorter.
inline Formula regress(Formula f, const State& s) {
    return simplify(detail::regress_raw(f, s));
}

}  // namespace nmrdpp
