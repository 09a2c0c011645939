// ============================================================================
// nmrdpp/domains.hpp — world-file input and benchmark domain generators
// ============================================================================
//
// World files describe actions as decision trees, SPUDD-style:
//
//     action flip
//       heads (0.5)
//     endaction
//     action tilt
//       heads (heads (0.9) (0.1))
//     endaction
//     heads = ff
//     [first, 5.0]? heads and ~prv (pdi heads)
//     [seq, 1.0]? (prv^2 heads) and (prv heads) and ~heads
//
// A `dialect pltl|fltl` line (default pltl) selects the reward language and
// must precede the reward lines; `control? <formula>` attaches $-free search
// control.  Reward and control formulas run to the end of their line; `#`
// comments to end of line; everything else is whitespace-insensitive.
// Propositions are declared by appearing in an action effect or an
// assignment; reward formulas may only use declared propositions.
//
// ============================================================================

#pragma once

#include "nmrdp.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

namespace nmrdpp {

// ── world files ─────────────────────────────────────────────────────────────

namespace detail {

class WorldScanner {
public:
    explicit WorldScanner(std::string text) : text_(std::move(text)) {}

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_space();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    char get() {
        char c = text_[pos_++];
        ++col_;
        return c;
    }

    std::string word() {
        skip_space();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            get();
        if (start == pos_) fail("expected an identifier");
        return text_.substr(start, pos_ - start);
    }

    double real() {
        skip_space();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == '-' || text_[pos_] == '+' || text_[pos_] == 'e' ||
                text_[pos_] == 'E'))
            get();
        if (start == pos_) fail("expected a number");
        try {
            return std::stod(text_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            fail("malformed number");
        }
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        get();
    }

    std::string rest_of_line() {
        size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '#') get();
        std::string out = text_.substr(start, pos_ - start);
        while (pos_ < text_.size() && text_[pos_] != '\n') get();
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
    int line() const { return line_; }

private:
    std::string text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

struct RawDTree {
    bool leaf = false;
    double prob = 0.0;
    std::string prop;
    std::unique_ptr<RawDTree> hi, lo;
};

inline RawDTree parse_dtree(WorldScanner& sc) {
    sc.expect('(');
    RawDTree t;
    char c = sc.peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.prop = sc.word();
        t.hi = std::make_unique<RawDTree>(parse_dtree(sc));
        t.lo = std::make_unique<RawDTree>(parse_dtree(sc));
    } else {
        t.leaf = true;
        t.prob = sc.real();
        if (t.prob < 0.0 || t.prob > 1.0) sc.fail("decision tree leaf outside [0,1]");
    }
    sc.expect(')');
    return t;
}

inline void collect_tree_props(const RawDTree& t, Vocabulary& vocab) {
    if (t.leaf) return;
    vocab.intern(t.prop);
    collect_tree_props(*t.hi, vocab);
    collect_tree_props(*t.lo, vocab);
}

inline DecisionTree lower_dtree(const RawDTree& t, const Vocabulary& vocab) {
    if (t.leaf) return DecisionTree::leaf(t.prob);
    return DecisionTree::test(static_cast<uint32_t>(vocab.find(t.prop)),
                              lower_dtree(*t.hi, vocab), lower_dtree(*t.lo, vocab));
}

}  // namespace detail

inline Nmrdp parse_world(const std::string& text) {
    detail::WorldScanner sc(text);

    struct RawAction {
        std::string name;
        std::vector<std::pair<std::string, detail::RawDTree>> effects;
    };
    struct RawReward {
        std::string name;
        double value;
        std::string formula;
        int line;
    };
    std::vector<RawAction> actions;
    std::vector<std::pair<std::string, bool>> assigns;
    std::vector<RawReward> rewards;
    std::optional<std::string> control_text;
    int control_line = 0;
    Dialect dialect = Dialect::pltl;
    bool rewards_seen = false;

    while (!sc.eof()) {
        char c = sc.peek();
        if (c == '[') {
            sc.get();
            RawReward r;
            r.name = sc.word();
            sc.expect(',');
            r.value = sc.real();
            sc.expect(']');
            sc.expect('?');
            r.line = sc.line();
            r.formula = sc.rest_of_line();
            rewards.push_back(std::move(r));
            rewards_seen = true;
            continue;
        }
        std::string w = sc.word();
        if (w == "action") {
            RawAction a;
            a.name = sc.word();
            for (;;) {
                std::string p = sc.word();
                if (p == "endaction") break;
                a.effects.emplace_back(p, detail::parse_dtree(sc));
            }
            actions.push_back(std::move(a));
        } else if (w == "dialect") {
            if (rewards_seen) sc.fail("dialect directive must precede reward lines");
            std::string d = sc.word();
            if (d == "pltl") dialect = Dialect::pltl;
            else if (d == "fltl") dialect = Dialect::fltl;
            else sc.fail("dialect must be pltl or fltl");
        } else if (w == "control") {
            sc.expect('?');
            control_line = sc.line();
            control_text = sc.rest_of_line();
        } else {
            sc.expect('=');
            std::string v = sc.word();
            if (v != "tt" && v != "ff") sc.fail("assignment must be tt or ff");
            assigns.emplace_back(w, v == "tt");
        }
    }

    Nmrdp d;
    for (const RawAction& a : actions)
        for (const auto& [p, t] : a.effects) {
            d.vocab.intern(p);
            detail::collect_tree_props(t, d.vocab);
        }
    for (const auto& [p, v] : assigns) d.vocab.intern(p);

    for (const RawAction& ra : actions) {
        ActionSpec a;
        a.name = ra.name;
        for (const auto& [p, t] : ra.effects)
            a.set_effect(static_cast<uint32_t>(d.vocab.find(p)), detail::lower_dtree(t, d.vocab));
        d.actions.push_back(std::move(a));
    }

    d.initial = State(d.vocab.size());
    for (const auto& [p, v] : assigns) d.initial.set(static_cast<uint32_t>(d.vocab.find(p)), v);

    if (dialect == Dialect::pltl) {
        PltlRewardSpec spec;
        for (const auto& r : rewards) {
            for (const auto& e : spec.entries)
                if (e.name == r.name) throw ParseError("duplicate reward name " + r.name, r.line, 1);
            if (!std::isfinite(r.value)) throw ParseError("reward value not finite", r.line, 1);
            spec.entries.push_back({r.name, parse_formula(r.formula, dialect, d.vocab, false), r.value});
        }
        d.rewards = std::move(spec);
    } else {
        std::vector<FltlRewardSpec::Entry> entries;
        for (const auto& r : rewards) {
            if (!std::isfinite(r.value)) throw ParseError("reward value not finite", r.line, 1);
            entries.push_back({parse_formula(r.formula, dialect, d.vocab, false), r.value});
        }
        d.rewards = FltlRewardSpec::make(std::move(entries));
    }

    if (control_text) {
        Formula cf;
        try {
            cf = parse_formula(*control_text, Dialect::fltl, d.vocab, false);
        } catch (const ParseError&) {
            throw ParseError("control knowledge must be a $-free future-dialect formula",
                             control_line, 1);
        }
        d.control = ControlKnowledge::make(cf);
    }

    d.validate();
    return d;
}

inline Nmrdp load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open world file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_world(buf.str());
}

// ── textual rendering ───────────────────────────────────────────────────────

namespace detail {

inline std::string fmt_double(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream os;
        os.precision(prec);
        os << v;
        if (std::stod(os.str()) == v) return os.str();
    }
    return std::to_string(v);
}

inline void render_dtree(const DecisionTree& t, int32_t at, const Vocabulary& vocab,
                         std::string& out) {
    const auto& n = t.nodes()[at];
    out += "(";
    if (n.prop < 0) {
        out += fmt_double(n.prob);
    } else {
        out += vocab.name(static_cast<uint32_t>(n.prop));
        out += " ";
        render_dtree(t, n.hi, vocab, out);
        out += " ";
        render_dtree(t, n.lo, vocab, out);
    }
    out += ")";
}

}  // namespace detail

inline std::string to_world_text(const Nmrdp& d) {
    std::string out;
    for (const ActionSpec& a : d.actions) {
        out += "action " + a.name + "\n";
        for (const auto& [p, t] : a.effects) {
            out += "  " + d.vocab.name(p) + " ";
            detail::render_dtree(t, t.root(), d.vocab, out);
            out += "\n";
        }
        out += "endaction\n";
    }
    out += "\n";
    for (uint32_t p = 0; p < d.vocab.size(); ++p)
        out += d.vocab.name(p) + " = " + (d.initial.get(p) ? "tt" : "ff") + "\n";
    if (d.reward_dialect() == Dialect::fltl) out += "dialect fltl\n";
    if (d.reward_dialect() == Dialect::pltl) {
        for (const auto& e : d.pltl_rewards().entries)
            out += "[" + e.name + ", " + detail::fmt_double(e.reward) + "]? " +
                   print_formula(e.formula, d.vocab) + "\n";
    } else {
        size_t k = 0;
        for (const auto& e : d.fltl_rewards().entries)
            out += "[r" + std::to_string(k++) + ", " + detail::fmt_double(e.reward) + "]? " +
                   print_formula(e.formula, d.vocab) + "\n";
    }
    if (d.control) out += "control? " + print_formula(d.control->formula, d.vocab) + "\n";
    return out;
}

// ── hand-coded benchmark domains ────────────────────────────────────────────
// All four have n propositions, start all-false, and make every state
// reachable from the initial state.

inline Nmrdp gen_spudd_linear(size_t n) {
    Nmrdp d;
    for (size_t i = 1; i <= n; ++i) d.vocab.intern("p" + std::to_string(i));
    for (size_t i = 1; i <= n; ++i) {
        ActionSpec a;
        a.name = "a" + std::to_string(i);
        a.set_effect(static_cast<uint32_t>(i - 1), DecisionTree::leaf(1.0));
        for (size_t j = 1; j < i; ++j)
            a.set_effect(static_cast<uint32_t>(j - 1), DecisionTree::leaf(0.0));
        d.actions.push_back(std::move(a));
    }
    d.initial = State(n);
    d.rewards = PltlRewardSpec{};
    return d;
}

inline Nmrdp gen_spudd_expon(size_t n) {
    Nmrdp d;
    for (size_t i = 1; i <= n; ++i) d.vocab.intern("p" + std::to_string(i));
    for (size_t i = 1; i <= n; ++i) {
        ActionSpec a;
        a.name = "a" + std::to_string(i);
        // p_i becomes true only when p_1..p_{i-1} all held
        DecisionTree cond = DecisionTree::leaf(1.0);
        for (size_t j = i - 1; j >= 1; --j)
            cond = DecisionTree::test(static_cast<uint32_t>(j - 1), cond, DecisionTree::leaf(0.0));
        a.set_effect(static_cast<uint32_t>(i - 1), std::move(cond));
        for (size_t j = 1; j < i; ++j)
            a.set_effect(static_cast<uint32_t>(j - 1), DecisionTree::leaf(0.0));
        d.actions.push_back(std::move(a));
    }
    d.initial = State(n);
    d.rewards = PltlRewardSpec{};
    return d;
}

inline Nmrdp gen_onoff(size_t n, double p_success = 0.8) {
    Nmrdp d;
    for (size_t i = 1; i <= n; ++i) d.vocab.intern("p" + std::to_string(i));
    for (size_t i = 1; i <= n; ++i) {
        ActionSpec on;
        on.name = "on" + std::to_string(i);
        on.set_effect(static_cast<uint32_t>(i - 1),
                      DecisionTree::test(static_cast<uint32_t>(i - 1), DecisionTree::leaf(1.0),
                                         DecisionTree::leaf(p_success)));
        d.actions.push_back(std::move(on));
        ActionSpec off;
        off.name = "off" + std::to_string(i);
        off.set_effect(static_cast<uint32_t>(i - 1),
                       DecisionTree::test(static_cast<uint32_t>(i - 1),
                                          DecisionTree::leaf(1.0 - p_success),
                                          DecisionTree::leaf(0.0)));
        d.actions.push_back(std::move(off));
    }
    d.initial = State(n);
    d.rewards = PltlRewardSpec{};
    return d;
}

inline Nmrdp gen_complete(size_t n) {
    Nmrdp d;
    for (size_t i = 1; i <= n; ++i) d.vocab.intern("p" + std::to_string(i));
    for (size_t i = 1; i <= n; ++i) {
        ActionSpec a;
        a.name = "a" + std::to_string(i);
        for (size_t j = 1; j <= n; ++j)
            a.set_effect(static_cast<uint32_t>(j - 1),
                         DecisionTree::leaf(j == i ? double(i) / double(n + 1) : 0.5));
        d.actions.push_back(std::move(a));
    }
    d.initial = State(n);
    d.rewards = PltlRewardSpec{};
    return d;
}

// ── random domains ──────────────────────────────────────────────────────────

struct RandomDomainParams {
    size_t n = 4;
    size_t action_count = 2;
    double uncertainty = 0.5;          // probability of a non-0/1 leaf
    double structure = 0.5;            // probability a proposition joins a diagram
    double proportion_reachable = 1.0; // lower bound on reachable fraction
    uint64_t seed = 0;
};

namespace detail {

inline DecisionTree random_dtree(std::mt19937_64& rng, const RandomDomainParams& p) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<uint32_t> included;
    for (size_t i = 0; i < p.n; ++i)
        if (unit(rng) < p.structure) included.push_back(static_cast<uint32_t>(i));
    std::shuffle(included.begin(), included.end(), rng);

    std::function<DecisionTree(size_t)> build = [&](size_t idx) -> DecisionTree {
        if (idx == included.size()) {
            if (unit(rng) < p.uncertainty) return DecisionTree::leaf(unit(rng));
            return DecisionTree::leaf(unit(rng) < 0.5 ? 0.0 : 1.0);
        }
        DecisionTree hi = build(idx + 1);
        DecisionTree lo = build(idx + 1);
        return DecisionTree::test(included[idx], hi, lo);
    };
    return build(0);
}

}  // namespace detail

// Random dynamics, Appendix-C style: seed effects give every proposition
// exactly one affecting action, then random decision diagrams are added (each
// replacing that action's effect on that proposition) until the reachable
// fraction meets the bound.
inline Nmrdp gen_random(const RandomDomainParams& p) {
    if (p.n > 12) throw ResourceLimitError("random domains limited to 12 propositions");
    std::mt19937_64 rng(p.seed);
    Nmrdp d;
    for (size_t i = 1; i <= p.n; ++i) d.vocab.intern("p" + std::to_string(i));
    for (size_t i = 1; i <= p.action_count; ++i)
        d.actions.push_back({"a" + std::to_string(i), {}});
    d.initial = State(p.n);
    d.rewards = PltlRewardSpec{};

    for (size_t i = 0; i < p.n; ++i)
        d.actions[i % p.action_count].set_effect(static_cast<uint32_t>(i),
                                                 detail::random_dtree(rng, p));

    auto fraction = [&] {
        return double(reachable_states(d).size()) / double(size_t(1) << p.n);
    };
    size_t budget = 400 * p.n;
    double reached = fraction();
    while (reached < p.proportion_reachable) {
        if (budget-- == 0)
            throw ResourceLimitError(
                "random domain generation stalled; lower proportionReachable");
        size_t a = rng() % p.action_count;
        uint32_t prop = static_cast<uint32_t>(rng() % p.n);
        ActionSpec backup = d.actions[a];
        d.actions[a].set_effect(prop, detail::random_dtree(rng, p));
        double now = fraction();
        if (now < reached) {
            d.actions[a] = std::move(backup);  // behaviour only ever accumulates
        } else {
            reached = now;
        }
    }
    return d;
}

// Reward conjunctions read off random paths of the reachability indicator:
// literals are fixed one by one until every completion of the partial
// assignment is reachable (or unreachable, for the unreachable rewards).
inline PltlRewardSpec gen_random_rewards(const Nmrdp& d, size_t reachable_count,
                                         size_t unreachable_count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    size_t n = d.vocab.size();
    std::vector<State> reach = reachable_states(d);
    std::vector<bool> reachable(size_t(1) << n, false);
    for (const State& s : reach) {
        size_t v = 0;
        for (size_t p = 0; p < n; ++p)
            if (s.get(static_cast<uint32_t>(p))) v |= size_t(1) << p;
        reachable[v] = true;
    }

    auto all_completions = [&](const std::vector<int>& partial, bool want) {
        size_t free_count = 0;
        for (size_t p = 0; p < n; ++p)
            if (partial[p] < 0) ++free_count;
        for (size_t m = 0; m < (size_t(1) << free_count); ++m) {
            size_t v = 0, bit = 0;
            for (size_t p = 0; p < n; ++p) {
                bool val = partial[p] < 0 ? ((m >> bit++) & 1) : partial[p] == 1;
                if (val) v |= size_t(1) << p;
            }
            if (reachable[v] != want) return false;
        }
        return true;
    };

    auto draw = [&](bool want) -> std::optional<std::vector<std::pair<uint32_t, bool>>> {
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::vector<uint32_t> order(n);
            for (size_t p = 0; p < n; ++p) order[p] = static_cast<uint32_t>(p);
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<int> partial(n, -1);
            std::vector<std::pair<uint32_t, bool>> path;
            bool ok = false;
            for (uint32_t prop : order) {
                if (all_completions(partial, want)) { ok = true; break; }
                bool val = rng() & 1;
                partial[prop] = val ? 1 : 0;
                if (![&] {
                        // some completion must still have the wanted status
                        std::vector<int> probe = partial;
                        size_t free_count = 0;
                        for (size_t p = 0; p < n; ++p)
                            if (probe[p] < 0) ++free_count;
                        for (size_t m = 0; m < (size_t(1) << free_count); ++m) {
                            size_t v = 0, bit = 0;
                            for (size_t p = 0; p < n; ++p) {
                                bool b = probe[p] < 0 ? ((m >> bit++) & 1) : probe[p] == 1;
                                if (b) v |= size_t(1) << p;
                            }
                            if (reachable[v] == want) return true;
                        }
                        return false;
                    }()) {
                    partial[prop] = val ? 0 : 1;
                }
                path.emplace_back(prop, partial[prop] == 1);
            }
            if (ok || all_completions(partial, want)) return path;
        }
        return std::nullopt;
    };

    PltlRewardSpec spec;
    auto emit = [&](bool want, size_t count, const std::string& prefix) {
        for (size_t k = 0; k < count; ++k) {
            auto path = draw(want);
            if (!path)
                throw ResourceLimitError("no " + prefix + " conjunction exists for this domain");
            Formula f = Formula::tt();
            bool first = true;
            for (const auto& [prop, val] : *path) {
                Formula lit = val ? Formula::atom(prop) : Formula::natom(prop);
                f = first ? lit : Formula::conj(f, lit);
                first = false;
            }
            spec.entries.push_back({prefix + std::to_string(k + 1), f, 1.0});
        }
    };
    emit(true, reachable_count, "r");
    emit(false, unreachable_count, "u");
    return spec;
}

// ── the elevator domain ─────────────────────────────────────────────────────

enum class MiconicVariant { simple, hard };

// One service action per floor: unserved passengers originating there board,
// boarded passengers destined there become served.  Categories follow the
// hard-variant mix: one non-stop traveller, a third of the passengers
// supervised (rounded up), half caring about direct travel (rounded up).
inline Nmrdp gen_miconic(size_t floors, size_t passengers, MiconicVariant variant,
                         Dialect dialect) {
    if (floors < 2 || passengers < 1)
        throw std::invalid_argument("miconic needs at least 2 floors and 1 passenger");
    Nmrdp d;
    auto floor_prop = [&](size_t k) { return "AtFloor" + std::to_string(k); };
    auto boarded_prop = [&](size_t i) { return "BoardedP" + std::to_string(i + 1); };
    auto served_prop = [&](size_t i) { return "ServedP" + std::to_string(i + 1); };

    std::vector<size_t> origin(passengers), dest(passengers);
    for (size_t i = 0; i < passengers; ++i) {
        origin[i] = (i % floors) + 1;
        dest[i] = (i + std::max<size_t>(1, floors / 2)) % floors + 1;
        if (dest[i] == origin[i]) dest[i] = dest[i] % floors + 1;
    }

    std::vector<bool> nonstop(passengers, false), supervised(passengers, false),
        direct(passengers, false);
    std::vector<size_t> supervisor(passengers, 0);
    if (variant == MiconicVariant::hard) {
        nonstop[0] = true;
        if (passengers >= 2) {
            size_t sup_count = (passengers + 2) / 3;
            for (size_t k = 0; k < sup_count; ++k) {
                size_t i = 1 + (k % (passengers - 1));
                supervised[i] = true;
                supervisor[i] = (i + 1) % passengers;
            }
        }
        size_t dir_count = (passengers + 1) / 2;
        for (size_t k = 0; k < dir_count; ++k) direct[passengers - 1 - k] = true;
    }

    for (size_t k = 1; k <= floors; ++k) d.vocab.intern(floor_prop(k));
    for (size_t i = 0; i < passengers; ++i) d.vocab.intern(boarded_prop(i));
    for (size_t i = 0; i < passengers; ++i) d.vocab.intern(served_prop(i));
    std::vector<uint32_t> origin_prop(passengers), dest_prop(passengers);
    for (size_t i = 0; i < passengers; ++i) {
        origin_prop[i] = d.vocab.intern("OriginP" + std::to_string(i + 1) + "F" +
                                        std::to_string(origin[i]));
        dest_prop[i] =
            d.vocab.intern("DestP" + std::to_string(i + 1) + "F" + std::to_string(dest[i]));
    }
    std::vector<uint32_t> nonstop_prop(passengers), supervised_prop(passengers),
        direct_prop(passengers), supervisor_prop(passengers);
    if (variant == MiconicVariant::hard)
        for (size_t i = 0; i < passengers; ++i) {
            if (nonstop[i]) nonstop_prop[i] = d.vocab.intern("NonStopP" + std::to_string(i + 1));
            if (supervised[i]) {
                supervised_prop[i] = d.vocab.intern("SupervisedP" + std::to_string(i + 1));
                supervisor_prop[i] =
                    d.vocab.intern("SupervisorP" + std::to_string(supervisor[i] + 1) + "P" +
                                   std::to_string(i + 1));
            }
            if (direct[i]) direct_prop[i] = d.vocab.intern("DirectP" + std::to_string(i + 1));
        }

    auto P = [&](const std::string& name) { return static_cast<uint32_t>(d.vocab.find(name)); };

    for (size_t k = 1; k <= floors; ++k) {
        ActionSpec a;
        a.name = "service" + std::to_string(k);
        for (size_t j = 1; j <= floors; ++j)
            a.set_effect(P(floor_prop(j)), DecisionTree::leaf(j == k ? 1.0 : 0.0));
        for (size_t i = 0; i < passengers; ++i) {
            uint32_t b = P(boarded_prop(i)), sv = P(served_prop(i));
            bool boards_here = origin[i] == k;
            bool serves_here = dest[i] == k;
            // boarded': served stay out; boarded leave iff served here;
            // waiting passengers board iff this is their origin floor
            DecisionTree boarded_next = DecisionTree::test(
                sv, DecisionTree::leaf(0.0),
                DecisionTree::test(b, DecisionTree::leaf(serves_here ? 0.0 : 1.0),
                                   DecisionTree::leaf(boards_here ? 1.0 : 0.0)));
            a.set_effect(b, std::move(boarded_next));
            DecisionTree served_next = DecisionTree::test(
                sv, DecisionTree::leaf(1.0),
                DecisionTree::test(b, DecisionTree::leaf(serves_here ? 1.0 : 0.0),
                                   DecisionTree::leaf(0.0)));
            a.set_effect(sv, std::move(served_next));
        }
        d.actions.push_back(std::move(a));
    }

    d.initial = State(d.vocab.size());
    d.initial.set(P(floor_prop(1)), true);
    for (size_t i = 0; i < passengers; ++i) {
        d.initial.set(origin_prop[i], true);
        d.initial.set(dest_prop[i], true);
    }
    if (variant == MiconicVariant::hard)
        for (size_t i = 0; i < passengers; ++i) {
            if (nonstop[i]) d.initial.set(nonstop_prop[i], true);
            if (supervised[i]) {
                d.initial.set(supervised_prop[i], true);
                d.initial.set(supervisor_prop[i], true);
            }
            if (direct[i]) d.initial.set(direct_prop[i], true);
        }

    // reward formulas, rendered in the chosen dialect
    auto served = [&](size_t i) { return served_prop(i); };
    auto boarded = [&](size_t i) { return boarded_prop(i); };
    std::vector<std::pair<std::string, double>> lines;

    for (size_t i = 0; i < passengers; ++i) {
        if (dialect == Dialect::pltl)
            lines.push_back({served(i) + " and prv pbx ~" + served(i), 50.0});
        else
            lines.push_back({"(~" + served(i) + " until (" + served(i) + " and $))", 50.0});
    }
    if (variant == MiconicVariant::hard) {
        for (size_t i = 0; i < passengers; ++i) {
            std::string ns = "NonStopP" + std::to_string(i + 1);
            if (nonstop[i]) {
                if (dialect == Dialect::pltl)
                    lines.push_back({ns + " and prv^2 ~" + boarded(i) + " and prv^2 ~" + served(i) +
                                         " and " + served(i),
                                     2.0});
                else
                    lines.push_back({"alw(~" + ns + " or " + boarded(i) + " or " + served(i) +
                                         " or nxt^2 ~" + served(i) + " or nxt^2 $)",
                                     2.0});
            }
            if (supervised[i]) {
                std::string sp = "SupervisedP" + std::to_string(i + 1);
                std::string sj = "SupervisorP" + std::to_string(supervisor[i] + 1) + "P" +
                                 std::to_string(i + 1);
                std::string bj = boarded_prop(supervisor[i]);
                if (dialect == Dialect::pltl)
                    lines.push_back({sp + " and " + sj + " and " + served(i) + " and prv pbx ~" +
                                         served(i) + " and pbx (~" + boarded(i) + " or " + bj + ")",
                                     5.0});
                else
                    lines.push_back({"(~" + served(i) + " until ((" + boarded(i) + " and " + sp +
                                         " and (~" + bj + " or ~" + sj + ") and ~" + served(i) +
                                         ") or (" + served(i) + " and $)))",
                                     5.0});
            }
            if (direct[i]) {
                std::string dp = "DirectP" + std::to_string(i + 1);
                for (bool up : {true, false}) {
                    // moves in the wrong direction break the reward
                    std::string move_pltl, not_move_fltl;
                    bool first = true;
                    for (size_t j = 1; j <= floors; ++j)
                        for (size_t k2 = 1; k2 <= floors; ++k2) {
                            if (up ? k2 <= j : k2 >= j) continue;
                            if (!first) {
                                move_pltl += " or ";
                                not_move_fltl += " and ";
                            }
                            move_pltl += "(" + floor_prop(k2) + " and prv " + floor_prop(j) + ")";
                            not_move_fltl +=
                                "(~" + floor_prop(j) + " or nxt ~" + floor_prop(k2) + ")";
                            first = false;
                        }
                    if (dialect == Dialect::pltl)
                        lines.push_back({dp + " and " + served(i) + " and prv ~" + served(i) +
                                             " and ((" + move_pltl + ") snc (" + boarded(i) +
                                             " and prv ~" + boarded(i) + "))",
                                         10.0});
                    else
                        lines.push_back({"alw(~" + dp + " or ~" + boarded(i) + " or (~" +
                                             served(i) + " until ((" + not_move_fltl + " and ~" +
                                             served(i) + ") or (" + served(i) + " and $))))",
                                         10.0});
                }
            }
        }
    }

    if (dialect == Dialect::pltl) {
        PltlRewardSpec spec;
        size_t k = 0;
        for (const auto& [text, value] : lines)
            spec.entries.push_back({"m" + std::to_string(++k),
                                    parse_formula(text, Dialect::pltl, d.vocab, false), value});
        d.rewards = std::move(spec);
    } else {
        std::vector<FltlRewardSpec::Entry> entries;
        for (const auto& [text, value] : lines)
            entries.push_back({parse_formula(text, Dialect::fltl, d.vocab, false), value});
        d.rewards = FltlRewardSpec::make(std::move(entries));
    }
    d.validate();
    return d;
}

}  // namespace nmrdpp
