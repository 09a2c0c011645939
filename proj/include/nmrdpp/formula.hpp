// ============================================================================
// nmrdpp/formula.hpp — temporal formulas over propositional state vocabularies
// ============================================================================
//
// Design notes:
//
//   Every formula is a node in an interned DAG.  Two structurally identical
//   formulas share the same FormulaId, so equality is O(1) and the id doubles
//   as a canonical sort key.  Nodes are immutable; the intern table is the
//   only shared mutable structure and is guarded by a mutex.
//
//   Two dialects share one node type:
//     past dialect   (PLTL)  : atoms, ~, and, or, prv (previously),
//                              snc (since)
//     future dialect ($FLTL) : literals in negation normal form, and, or,
//                              nxt (next), until (weak), and the reward
//                              constant `$`
//
//   Negation is normalised at construction: ~~f collapses, ~ of an atom is a
//   negated-atom node, ~tt is ff.  Future-dialect formulas never carry a
//   general negation node; pushing ~ through `until` or `$` is rejected.
//
//   Surface syntax (shared by reward files and the command language):
//
//     formula := orExpr
//     orExpr  := andExpr { "or" andExpr }
//     andExpr := unary { "and" unary }
//     unary   := "~" unary | "prv" ["^" int] unary | "nxt" ["^" int] unary
//              | "pdi" unary | "pbx" unary | "alw" unary | atomic
//     atomic  := ident | "tt" | "ff" | "$" | "(" binExpr ")"
//     binExpr := orExpr [ ("snc" | "until") orExpr ]
//
//   Derived operators expand at parse time:
//     pdi f    -> tt snc f
//     pbx f    -> ~(tt snc ~f)
//     alw f    -> f until ff
//     prv^k f, nxt^k f -> k-fold nesting
//
// ============================================================================

#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nmrdpp {

// ── errors ──────────────────────────────────────────────────────────────────

struct ParseError : std::runtime_error {
    int line = 0, column = 0;
    ParseError(const std::string& msg, int ln, int col)
        : std::runtime_error(msg + " (line " + std::to_string(ln) + ", column " +
                             std::to_string(col) + ")"),
          line(ln), column(col) {}
};

struct DialectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── vocabulary ──────────────────────────────────────────────────────────────
// Propositions are interned per domain; the index is stable from first sight.

class Vocabulary {
public:
    uint32_t intern(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(names_.size());
        names_.push_back(name);
        index_.emplace(name, id);
        return id;
    }
    // Returns the index of a known proposition, or -1.
    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : static_cast<int>(it->second);
    }
    const std::string& name(uint32_t id) const { return names_.at(id); }
    size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, uint32_t> index_;
};

// ── states ──────────────────────────────────────────────────────────────────
// A state is a truth assignment over the domain's propositions, held as a
// fixed-width bit vector.

class State {
public:
    State() = default;
    explicit State(size_t width) : width_(width), bits_((width + 63) / 64, 0) {}

    size_t width() const { return width_; }
    bool get(uint32_t p) const { return (bits_[p >> 6] >> (p & 63)) & 1; }
    void set(uint32_t p, bool v) {
        uint64_t mask = uint64_t(1) << (p & 63);
        if (v) bits_[p >> 6] |= mask; else bits_[p >> 6] &= ~mask;
    }

    bool operator==(const State& o) const { return width_ == o.width_ && bits_ == o.bits_; }
    bool operator!=(const State& o) const { return !(*this == o); }
    bool operator<(const State& o) const {
        if (width_ != o.width_) return width_ < o.width_;
        return bits_ < o.bits_;
    }

    size_t hash() const {
        size_t h = width_;
        for (uint64_t w : bits_) h = h * 1099511628211ull + w;
        return h;
    }

    std::string to_string(const Vocabulary& vocab) const {
        std::string out = "{";
        bool first = true;
        for (uint32_t p = 0; p < width_; ++p)
            if (get(p)) {
                if (!first) out += ",";
                out += vocab.name(p);
                first = false;
            }
        return out + "}";
    }

private:
    size_t width_ = 0;
    std::vector<uint64_t> bits_;
};

struct StateHash {
    size_t operator()(const State& s) const { return s.hash(); }
};

// A finite state sequence; index i addresses the prefix ending at position i.
using StateSequence = std::vector<State>;

// ── formula nodes ───────────────────────────────────────────────────────────

enum class Op : uint8_t {
    True, False, Dollar,
    Atom, NAtom,          // p, ~p
    Not, And, Or,
    Prv, Snc,             // past dialect
    Nxt, Until            // future dialect (weak until)
};

using FormulaId = uint32_t;

enum class Dialect { pltl, fltl };

class Formula;

namespace detail {

struct FNode {
    Op op;
    uint32_t a;  // proposition index, or left child id
    uint32_t b;  // right child id
};

class FormulaStore {
public:
    static FormulaStore& instance() {
        static FormulaStore store;
        return store;
    }

    FormulaId intern(Op op, uint32_t a, uint32_t b) {
        uint64_t key = (uint64_t(op) << 60) ^ (uint64_t(a) << 30) ^ uint64_t(b);
        std::lock_guard<std::mutex> lock(mutex_);
        auto range = table_.equal_range(key);
        for (auto it = range.first; it != range.second; ++it) {
            const FNode& n = nodes_[it->second];
            if (n.op == op && n.a == a && n.b == b) return it->second;
        }
        FormulaId id = static_cast<FormulaId>(nodes_.size());
        nodes_.push_back({op, a, b});
        table_.emplace(key, id);
        return id;
    }

    const FNode& node(FormulaId id) const { return nodes_[id]; }

private:
    FormulaStore() {
        nodes_.push_back({Op::True, 0, 0});
        nodes_.push_back({Op::False, 0, 0});
        nodes_.push_back({Op::Dollar, 0, 0});
    }
    std::deque<FNode> nodes_;  // deque: references stay valid while growing
    std::unordered_multimap<uint64_t, FormulaId> table_;
    std::mutex mutex_;
};

}  // namespace detail

// ── Formula handle ──────────────────────────────────────────────────────────

class Formula {
public:
    Formula() : id_(1) {}  // default-constructed formula is ff

    static Formula tt() { return Formula(0); }
    static Formula ff() { return Formula(1); }
    static Formula dollar() { return Formula(2); }
    static Formula atom(uint32_t p) { return make(Op::Atom, p, 0); }
    static Formula natom(uint32_t p) { return make(Op::NAtom, p, 0); }
    static Formula conj(Formula l, Formula r) { return make(Op::And, l.id_, r.id_); }
    static Formula disj(Formula l, Formula r) { return make(Op::Or, l.id_, r.id_); }
    static Formula prv(Formula f) { return make(Op::Prv, f.id_, 0); }
    static Formula snc(Formula l, Formula r) { return make(Op::Snc, l.id_, r.id_); }
    static Formula nxt(Formula f) { return make(Op::Nxt, f.id_, 0); }
    static Formula until(Formula l, Formula r) { return make(Op::Until, l.id_, r.id_); }

    // Negation with normalisation: double negations collapse, literals and
    // constants flip in place.  Anything else gets a Not node (past dialect).
    static Formula neg(Formula f) {
        switch (f.op()) {
            case Op::True:  return ff();
            case Op::False: return tt();
            case Op::Atom:  return natom(f.prop());
            case Op::NAtom: return atom(f.prop());
            case Op::Not:   return f.lhs();
            default:        return make(Op::Not, f.id_, 0);
        }
    }

    Op op() const { return node().op; }
    uint32_t prop() const { return node().a; }
    Formula lhs() const { return Formula(node().a); }
    Formula rhs() const { return Formula(node().b); }
    FormulaId id() const { return id_; }

    bool operator==(const Formula& o) const { return id_ == o.id_; }
    bool operator!=(const Formula& o) const { return id_ != o.id_; }
    bool operator<(const Formula& o) const { return id_ < o.id_; }

    bool is_true() const { return id_ == 0; }
    bool is_false() const { return id_ == 1; }
    bool is_dollar() const { return id_ == 2; }
    bool is_constant() const { return id_ <= 1; }

private:
    explicit Formula(FormulaId id) : id_(id) {}
    static Formula make(Op op, uint32_t a, uint32_t b) {
        return Formula(detail::FormulaStore::instance().intern(op, a, b));
    }
    const detail::FNode& node() const { return detail::FormulaStore::instance().node(id_); }

    FormulaId id_;
    friend struct FormulaHash;
};

struct FormulaHash {
    size_t operator()(const Formula& f) const { return f.id_; }
};

// Negation of a future-dialect formula, pushed to negation normal form.
// `until` has no dual in the language and `$` has no negation; both reject.
inline Formula nnf_neg(Formula f) {
    switch (f.op()) {
        case Op::True:   return Formula::ff();
        case Op::False:  return Formula::tt();
        case Op::Atom:   return Formula::natom(f.prop());
        case Op::NAtom:  return Formula::atom(f.prop());
        case Op::And:    return Formula::disj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
        case Op::Or:     return Formula::conj(nnf_neg(f.lhs()), nnf_neg(f.rhs()));
        case Op::Nxt:    return Formula::nxt(nnf_neg(f.lhs()));
        case Op::Dollar: throw DialectError("cannot negate $");
        case Op::Until:  throw DialectError("cannot negate a weak-until formula");
        default:         throw DialectError("past operator in future-dialect negation");
    }
}

// ── dialect inspection ──────────────────────────────────────────────────────

inline bool contains_op(Formula f, Op o) {
    if (f.op() == o) return true;
    switch (f.op()) {
        case Op::And: case Op::Or: case Op::Snc: case Op::Until:
            return contains_op(f.lhs(), o) || contains_op(f.rhs(), o);
        case Op::Not: case Op::Prv: case Op::Nxt:
            return contains_op(f.lhs(), o);
        default:
            return false;
    }
}

inline bool is_pltl(Formula f) {
    return !contains_op(f, Op::Dollar) && !contains_op(f, Op::Nxt) &&
           !contains_op(f, Op::Until);
}

inline bool is_fltl(Formula f) {
    return !contains_op(f, Op::Not) && !contains_op(f, Op::Prv) &&
           !contains_op(f, Op::Snc);
}

// A material formula: boolean structure over literals only.
inline bool is_material(Formula f) {
    switch (f.op()) {
        case Op::True: case Op::False: case Op::Atom: case Op::NAtom:
            return true;
        case Op::And: case Op::Or:
            return is_material(f.lhs()) && is_material(f.rhs());
        case Op::Not:
            return is_material(f.lhs());
        default:
            return false;
    }
}

// Formula length: node count of the syntax tree.
inline size_t formula_length(Formula f) {
    switch (f.op()) {
        case Op::And: case Op::Or: case Op::Snc: case Op::Until:
            return 1 + formula_length(f.lhs()) + formula_length(f.rhs());
        case Op::Not: case Op::Prv: case Op::Nxt:
            return 1 + formula_length(f.lhs());
        default:
            return 1;
    }
}

// Distinct interned nodes reachable from f.
inline void collect_dag(Formula f, std::vector<Formula>& out);
inline size_t dag_size(Formula f) {
    std::vector<Formula> nodes;
    collect_dag(f, nodes);
    return nodes.size();
}

// Nesting depth of nxt operators, used by the finite-trace oracle.
inline size_t nxt_depth(Formula f) {
    switch (f.op()) {
        case Op::Nxt: return 1 + nxt_depth(f.lhs());
        case Op::And: case Op::Or: case Op::Until:
            return std::max(nxt_depth(f.lhs()), nxt_depth(f.rhs()));
        default: return 0;
    }
}

// ── simplification ──────────────────────────────────────────────────────────
// Syntactic, run to fixpoint bottom-up:
//   * constant folding through every connective,
//   * idempotence of and/or/snc/until,
//   * commutative operands of and/or ordered by canonical id.
// The result is logically equivalent to the input in both dialects.

inline Formula simplify(Formula f);

namespace detail {

inline Formula simp_and(Formula a, Formula b) {
    if (a.is_false() || b.is_false()) return Formula::ff();
    if (a.is_true()) return b;
    if (b.is_true()) return a;
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    return Formula::conj(a, b);
}

inline Formula simp_or(Formula a, Formula b) {
    if (a.is_true() || b.is_true()) return Formula::tt();
    if (a.is_false()) return b;
    if (b.is_false()) return a;
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    return Formula::disj(a, b);
}

}  // namespace detail

inline Formula simplify(Formula f) {
    switch (f.op()) {
        case Op::And: return detail::simp_and(simplify(f.lhs()), simplify(f.rhs()));
        case Op::Or:  return detail::simp_or(simplify(f.lhs()), simplify(f.rhs()));
        case Op::Not: return Formula::neg(simplify(f.lhs()));
        case Op::Prv: {
            Formula a = simplify(f.lhs());
            if (a.is_false()) return a;  // prv ff never holds
            return Formula::prv(a);
        }
        case Op::Nxt: {
            Formula a = simplify(f.lhs());
            if (a.is_constant()) return a;
            return Formula::nxt(a);
        }
        case Op::Snc: {
            Formula a = simplify(f.lhs());
            Formula b = simplify(f.rhs());
            if (b.is_constant()) return b;   // f snc tt = tt, f snc ff = ff
            if (a.is_false()) return b;      // ff snc f = f
            if (a == b) return a;
            return Formula::snc(a, b);
        }
        case Op::Until: {
            Formula a = simplify(f.lhs());
            Formula b = simplify(f.rhs());
            if (b.is_true()) return b;       // f until tt = tt
            if (a.is_true()) return a;       // tt until f = tt (weak)
            if (a.is_false()) return b;      // ff until f = f
            if (a == b) return a;
            return Formula::until(a, b);
        }
        default:
            return f;
    }
}

inline void collect_dag(Formula f, std::vector<Formula>& out) {
    for (Formula g : out)
        if (g == f) return;
    out.push_back(f);
    switch (f.op()) {
        case Op::And: case Op::Or: case Op::Snc: case Op::Until:
            collect_dag(f.lhs(), out);
            collect_dag(f.rhs(), out);
            break;
        case Op::Not: case Op::Prv: case Op::Nxt:
            collect_dag(f.lhs(), out);
            break;
        default:
            break;
    }
}

// ── past-dialect evaluation ─────────────────────────────────────────────────
// Direct structural recursion over the modelling clauses; the prefix under
// evaluation is states[0..=i].

inline bool eval_pltl(const StateSequence& prefix, size_t i, Formula f) {
    switch (f.op()) {
        case Op::True:  return true;
        case Op::False: return false;
        case Op::Atom:  return prefix[i].get(f.prop());
        case Op::NAtom: return !prefix[i].get(f.prop());
        case Op::Not:   return !eval_pltl(prefix, i, f.lhs());
        case Op::And:   return eval_pltl(prefix, i, f.lhs()) && eval_pltl(prefix, i, f.rhs());
        case Op::Or:    return eval_pltl(prefix, i, f.lhs()) || eval_pltl(prefix, i, f.rhs());
        case Op::Prv:   return i > 0 && eval_pltl(prefix, i - 1, f.lhs());
        case Op::Snc: {
            // exists j <= i with rhs at j and lhs throughout (j, i]
            for (size_t j = i + 1; j-- > 0;) {
                if (eval_pltl(prefix, j, f.rhs())) return true;
                if (!eval_pltl(prefix, j, f.lhs())) return false;
                if (j == 0) break;
            }
            return false;
        }
        default:
            throw DialectError("future operator in past-dialect evaluation");
    }
}

// ── subformula closure ──────────────────────────────────────────────────────
// All syntactic subformulae of every member of F, closed under one application
// of normalised negation.  Sorted by canonical id.

inline void collect_subformulae(Formula f, std::vector<Formula>& out) {
    for (Formula g : out)
        if (g == f) return;
    out.push_back(f);
    switch (f.op()) {
        case Op::And: case Op::Or: case Op::Snc: case Op::Until:
            collect_subformulae(f.lhs(), out);
            collect_subformulae(f.rhs(), out);
            break;
        case Op::Not: case Op::Prv: case Op::Nxt:
            collect_subformulae(f.lhs(), out);
            break;
        default:
            break;
    }
}

inline std::vector<Formula> sub_closure(const std::vector<Formula>& fs) {
    std::vector<Formula> subs;
    for (Formula f : fs) collect_subformulae(f, subs);
    std::vector<Formula> out = subs;
    for (Formula f : subs) {
        Formula n = Formula::neg(f);
        bool seen = false;
        for (Formula g : out)
            if (g == n) { seen = true; break; }
        if (!seen) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ── parsing ─────────────────────────────────────────────────────────────────

namespace detail {

class Lexer {
public:
    struct Token {
        enum Kind { Ident, Keyword, LParen, RParen, Tilde, Caret, Int, DollarTok, End };
        Kind kind;
        std::string text;
        long value = 0;
        int line = 1, column = 1;
    };

    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    static bool is_keyword(const std::string& s) {
        static const char* kws[] = {"and", "or",  "tt",  "ff",  "prv", "nxt",
                                    "pdi", "pbx", "alw", "snc", "until"};
        for (const char* k : kws)
            if (s == k) return true;
        return false;
    }

    void advance() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') { ++line_; col_ = 1; ++pos_; }
            else if (c == ' ' || c == '\t' || c == '\r') { ++col_; ++pos_; }
            else if (c == '#') { while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_; }
            else break;
        }
        tok_.line = line_;
        tok_.column = col_;
        if (pos_ >= text_.size()) { tok_.kind = Token::End; tok_.text = "<end>"; return; }
        char c = text_[pos_];
        if (c == '(') { tok_ = {Token::LParen, "(", 0, line_, col_}; ++pos_; ++col_; return; }
        if (c == ')') { tok_ = {Token::RParen, ")", 0, line_, col_}; ++pos_; ++col_; return; }
        if (c == '~') { tok_ = {Token::Tilde, "~", 0, line_, col_}; ++pos_; ++col_; return; }
        if (c == '^') { tok_ = {Token::Caret, "^", 0, line_, col_}; ++pos_; ++col_; return; }
        if (c == '$') { tok_ = {Token::DollarTok, "$", 0, line_, col_}; ++pos_; ++col_; return; }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) { ++pos_; ++col_; }
            std::string s = text_.substr(start, pos_ - start);
            tok_ = {Token::Int, s, std::stol(s), line_, tok_.column};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) { ++pos_; ++col_; }
            std::string s = text_.substr(start, pos_ - start);
            tok_ = {is_keyword(s) ? Token::Keyword : Token::Ident, s, 0, line_, tok_.column};
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    std::string text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class FormulaParser {
public:
    FormulaParser(const std::string& text, Dialect dialect, Vocabulary& vocab, bool allow_new)
        : lex_(text), dialect_(dialect), vocab_(vocab), allow_new_(allow_new) {}

    Formula parse() {
        Formula f = or_expr();
        expect_end();
        return f;
    }

private:
    using Token = Lexer::Token;

    [[noreturn]] void fail(const std::string& msg, const Token& t) {
        throw ParseError(msg + ", got '" + t.text + "'", t.line, t.column);
    }

    void expect_end() {
        if (lex_.peek().kind != Token::End) fail("trailing input after formula", lex_.peek());
    }

    bool at_keyword(const char* kw) {
        return lex_.peek().kind == Token::Keyword && lex_.peek().text == kw;
    }

    Formula or_expr() {
        Formula f = and_expr();
        while (at_keyword("or")) {
            lex_.next();
            f = Formula::disj(f, and_expr());
        }
        return f;
    }

    Formula and_expr() {
        Formula f = unary();
        while (at_keyword("and")) {
            lex_.next();
            f = Formula::conj(f, unary());
        }
        return f;
    }

    long repeat_count() {
        if (lex_.peek().kind != Token::Caret) return 1;
        lex_.next();
        Token t = lex_.next();
        if (t.kind != Token::Int) fail("expected integer after '^'", t);
        if (t.value < 0) fail("negative repetition", t);
        return t.value;
    }

    Formula unary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Tilde) {
            Token tok = lex_.next();
            Formula f = unary();
            if (dialect_ == Dialect::pltl) return Formula::neg(f);
            try {
                return nnf_neg(f);
            } catch (const DialectError& e) {
                throw ParseError(e.what(), tok.line, tok.column);
            }
        }
        if (t.kind == Token::Keyword) {
            if (t.text == "prv") {
                Token tok = lex_.next();
                require_past(tok);
                long k = repeat_count();
                Formula f = unary();
                for (long i = 0; i < k; ++i) f = Formula::prv(f);
                return f;
            }
            if (t.text == "nxt") {
                Token tok = lex_.next();
                require_future(tok);
                long k = repeat_count();
                Formula f = unary();
                for (long i = 0; i < k; ++i) f = Formula::nxt(f);
                return f;
            }
            if (t.text == "pdi") {
                Token tok = lex_.next();
                require_past(tok);
                return Formula::snc(Formula::tt(), unary());
            }
            if (t.text == "pbx") {
                Token tok = lex_.next();
                require_past(tok);
                return Formula::neg(Formula::snc(Formula::tt(), Formula::neg(unary())));
            }
            if (t.text == "alw") {
                Token tok = lex_.next();
                require_future(tok);
                return Formula::until(unary(), Formula::ff());
            }
        }
        return atomic();
    }

    Formula atomic() {
        Token t = lex_.next();
        switch (t.kind) {
            case Token::Keyword:
                if (t.text == "tt") return Formula::tt();
                if (t.text == "ff") return Formula::ff();
                fail("unexpected keyword", t);
            case Token::DollarTok:
                require_future(t);
                return Formula::dollar();
            case Token::Ident: {
                int idx = vocab_.find(t.text);
                if (idx < 0) {
                    if (!allow_new_)
                        throw ParseError("undeclared proposition '" + t.text + "'", t.line, t.column);
                    idx = static_cast<int>(vocab_.intern(t.text));
                }
                return Formula::atom(static_cast<uint32_t>(idx));
            }
            case Token::LParen: {
                Formula f = or_expr();
                if (at_keyword("snc") || at_keyword("until")) {
                    Token op = lex_.next();
                    if (op.text == "snc") require_past(op); else require_future(op);
                    Formula r = or_expr();
                    f = op.text == "snc" ? Formula::snc(f, r) : Formula::until(f, r);
                }
                Token close = lex_.next();
                if (close.kind != Token::RParen) fail("expected ')'", close);
                return f;
            }
            default:
                fail("expected a formula", t);
        }
    }

    void require_past(const Token& t) {
        if (dialect_ != Dialect::pltl)
            throw ParseError("past operator '" + t.text + "' in future-dialect formula", t.line, t.column);
    }
    void require_future(const Token& t) {
        if (dialect_ != Dialect::fltl)
            throw ParseError("future token '" + t.text + "' in past-dialect formula", t.line, t.column);
    }

    Lexer lex_;
    Dialect dialect_;
    Vocabulary& vocab_;
    bool allow_new_;
};

}  // namespace detail

// Parse a formula; unknown identifiers are interned into `vocab` when
// `allow_new` is set, otherwise they raise ParseError.
inline Formula parse_formula(const std::string& text, Dialect dialect, Vocabulary& vocab,
                             bool allow_new = true) {
    return detail::FormulaParser(text, dialect, vocab, allow_new).parse();
}

// ── printing ────────────────────────────────────────────────────────────────
// Emits the surface syntax above; parse(print(f)) yields f again.  Runs of
// prv/nxt print with the ^k shorthand, and the pdi/pbx/alw expansions print
// back in sugared form.

namespace detail {

// precedence levels: 0 = or, 1 = and, 2 = unary, 3 = atomic
inline void print_rec(Formula f, const Vocabulary& vocab, int min_level, std::string& out) {
    auto paren = [&](int level, auto&& body) {
        bool need = level < min_level;
        if (need) out += "(";
        body();
        if (need) out += ")";
    };
    switch (f.op()) {
        case Op::True:  out += "tt"; return;
        case Op::False: out += "ff"; return;
        case Op::Dollar: out += "$"; return;
        case Op::Atom:  out += vocab.name(f.prop()); return;
        case Op::NAtom:
            paren(2, [&] { out += "~"; print_rec(Formula::atom(f.prop()), vocab, 3, out); });
            return;
        case Op::Not: {
            // pbx f prints from its expansion ~(tt snc ~f)
            Formula inner = f.lhs();
            if (inner.op() == Op::Snc && inner.lhs().is_true()) {
                paren(2, [&] {
                    out += "pbx ";
                    print_rec(Formula::neg(inner.rhs()), vocab, 2, out);
                });
                return;
            }
            paren(2, [&] { out += "~"; print_rec(inner, vocab, 3, out); });
            return;
        }
        case Op::And:
            paren(1, [&] {
                print_rec(f.lhs(), vocab, 1, out);
                out += " and ";
                print_rec(f.rhs(), vocab, 2, out);
            });
            return;
        case Op::Or:
            paren(0, [&] {
                print_rec(f.lhs(), vocab, 0, out);
                out += " or ";
                print_rec(f.rhs(), vocab, 1, out);
            });
            return;
        case Op::Prv: case Op::Nxt: {
            Op o = f.op();
            int k = 0;
            Formula body = f;
            while (body.op() == o) { ++k; body = body.lhs(); }
            paren(2, [&] {
                out += o == Op::Prv ? "prv" : "nxt";
                if (k > 1) out += "^" + std::to_string(k);
                out += " ";
                print_rec(body, vocab, 2, out);
            });
            return;
        }
        case Op::Snc:
            if (f.lhs().is_true()) {
                paren(2, [&] { out += "pdi "; print_rec(f.rhs(), vocab, 2, out); });
                return;
            }
            out += "(";
            print_rec(f.lhs(), vocab, 0, out);
            out += " snc ";
            print_rec(f.rhs(), vocab, 0, out);
            out += ")";
            return;
        case Op::Until:
            if (f.rhs().is_false()) {
                paren(2, [&] { out += "alw "; print_rec(f.lhs(), vocab, 2, out); });
                return;
            }
            out += "(";
            print_rec(f.lhs(), vocab, 0, out);
            out += " until ";
            print_rec(f.rhs(), vocab, 0, out);
            out += ")";
            return;
    }
}

}  // namespace detail

inline std::string print_formula(Formula f, const Vocabulary& vocab) {
    std::string out;
    detail::print_rec(f, vocab, 0, out);
    return out;
}

}  // namespace nmrdpp
