// ============================================================================
// nmrdpp/add.hpp — reduced ordered algebraic decision diagrams
// ============================================================================
//
// A minimal ADD engine: internal nodes test a boolean variable, terminals
// hold reals, and the variable order is fixed at creation.  A unique table
// enforces canonicity, so semantically equal diagrams built from the same
// manager share one node id and equality is id comparison.  Operation results
// are memoised per manager.
//
// One manager per worker: nodes are immutable, but the unique table and the
// caches are not synchronised.
//
// ============================================================================

#pragma once

#include "formula.hpp"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace nmrdpp {

struct Add {
    uint32_t id = 0;
    bool operator==(const Add& o) const { return id == o.id; }
    bool operator!=(const Add& o) const { return id != o.id; }
};

enum class AddOp : uint8_t { plus, minus, times, max_of, min_of };

class AddManager {
public:
    explicit AddManager(size_t node_limit = env_node_limit()) : node_limit_(node_limit) {}

    AddManager(const AddManager&) = delete;
    AddManager& operator=(const AddManager&) = delete;

    static size_t env_node_limit() {
        if (const char* s = std::getenv("NMRDPP_NODE_LIMIT")) {
            size_t v = std::strtoull(s, nullptr, 10);
            if (v > 0) return v;
        }
        return size_t(1) << 22;
    }

    uint32_t new_var(const std::string& name) {
        var_names_.push_back(name);
        return static_cast<uint32_t>(var_names_.size() - 1);
    }
    size_t var_count() const { return var_names_.size(); }
    const std::string& var_name(uint32_t v) const { return var_names_.at(v); }

    Add constant(double value) {
        uint64_t bits;
        std::memcpy(&bits, &value, sizeof(bits));
        auto it = terminals_.find(bits);
        if (it != terminals_.end()) return {it->second};
        uint32_t id = alloc({-1, value, 0, 0});
        terminals_.emplace(bits, id);
        return {id};
    }

    // var ? 1 : 0
    Add indicator(uint32_t var) { return node(var, constant(1.0), constant(0.0)); }

    bool is_terminal(Add a) const { return nodes_[a.id].var < 0; }
    double terminal_value(Add a) const { return nodes_[a.id].value; }
    int32_t top_var(Add a) const { return nodes_[a.id].var; }

    Add node(uint32_t var, Add hi, Add lo) {
        if (hi == lo) return hi;
        int32_t th = nodes_[hi.id].var, tl = nodes_[lo.id].var;
        if ((th >= 0 && th <= static_cast<int32_t>(var)) ||
            (tl >= 0 && tl <= static_cast<int32_t>(var)))
            throw std::logic_error("ADD variable order violated");
        uint64_t key = (uint64_t(var) << 40) ^ (uint64_t(hi.id) << 20) ^ uint64_t(lo.id);
        auto range = unique_.equal_range(key);
        for (auto it = range.first; it != range.second; ++it) {
            const Node& n = nodes_[it->second];
            if (n.var == static_cast<int32_t>(var) && n.hi == hi.id && n.lo == lo.id)
                return {it->second};
        }
        uint32_t id = alloc({static_cast<int32_t>(var), 0.0, hi.id, lo.id});
        unique_.emplace(key, id);
        return {id};
    }

    Add apply(AddOp op, Add a, Add b) {
        if (op == AddOp::plus || op == AddOp::times || op == AddOp::max_of ||
            op == AddOp::min_of)
            if (b.id < a.id) std::swap(a, b);  // commutative
        uint64_t key = (uint64_t(op) << 60) ^ (uint64_t(a.id) << 30) ^ uint64_t(b.id);
        auto it = apply_cache_.find(key);
        if (it != apply_cache_.end()) return {it->second};

        Add res;
        // copies: recursion below may grow the node store
        const Node na = nodes_[a.id];
        const Node nb = nodes_[b.id];
        if (na.var < 0 && nb.var < 0) {
            res = constant(combine(op, na.value, nb.value));
        } else {
            uint32_t split;
            if (na.var < 0) split = static_cast<uint32_t>(nb.var);
            else if (nb.var < 0) split = static_cast<uint32_t>(na.var);
            else split = static_cast<uint32_t>(std::min(na.var, nb.var));
            Add ahi = branch(a, split, true), alo = branch(a, split, false);
            Add bhi = branch(b, split, true), blo = branch(b, split, false);
            res = node(split, apply(op, ahi, bhi), apply(op, alo, blo));
        }
        apply_cache_.emplace(key, res.id);
        return res;
    }

    Add restrict_var(Add a, uint32_t var, bool val) {
        const Node n = nodes_[a.id];
        if (n.var < 0 || static_cast<uint32_t>(n.var) > var) return a;
        uint64_t key = (uint64_t(a.id) << 22) ^ (uint64_t(var) << 1) ^ uint64_t(val);
        auto it = restrict_cache_.find(key);
        if (it != restrict_cache_.end()) return {it->second};
        Add res;
        if (static_cast<uint32_t>(n.var) == var) {
            res = val ? Add{n.hi} : Add{n.lo};
        } else {
            res = node(static_cast<uint32_t>(n.var), restrict_var({n.hi}, var, val),
                       restrict_var({n.lo}, var, val));
        }
        restrict_cache_.emplace(key, res.id);
        return res;
    }

    Add sum_out(Add a, uint32_t var) {
        return apply(AddOp::plus, restrict_var(a, var, true), restrict_var(a, var, false));
    }

    Add max_out(Add a, uint32_t var) {
        return apply(AddOp::max_of, restrict_var(a, var, true), restrict_var(a, var, false));
    }

    // terminals mapped through fn
    Add map_terminals(Add a, const std::function<double(double)>& fn) {
        std::unordered_map<uint32_t, uint32_t> memo;
        return map_rec(a, fn, memo);
    }

    // 1 where the value is strictly positive, else 0
    Add threshold_pos(Add a) {
        return map_terminals(a, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
    }

    // Rename variables through a strictly increasing map (old -> new).
    Add rename(Add a, const std::function<uint32_t(uint32_t)>& var_map) {
        std::unordered_map<uint32_t, uint32_t> memo;
        std::function<Add(Add)> rec = [&](Add x) -> Add {
            const Node n = nodes_[x.id];
            if (n.var < 0) return x;
            auto it = memo.find(x.id);
            if (it != memo.end()) return {it->second};
            Add res = node(var_map(static_cast<uint32_t>(n.var)), rec({n.hi}), rec({n.lo}));
            memo.emplace(x.id, res.id);
            return res;
        };
        return rec(a);
    }

    double eval(Add a, const std::vector<bool>& assignment) const {
        const Node* n = &nodes_[a.id];
        while (n->var >= 0)
            n = &nodes_[assignment[static_cast<size_t>(n->var)] ? n->hi : n->lo];
        return n->value;
    }

    void collect_terminals(Add a, std::vector<double>& out) const {
        std::vector<uint32_t> stack = {a.id};
        std::unordered_set<uint32_t> seen;
        while (!stack.empty()) {
            uint32_t id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            const Node& n = nodes_[id];
            if (n.var < 0)
                out.push_back(n.value);
            else {
                stack.push_back(n.hi);
                stack.push_back(n.lo);
            }
        }
    }

    double max_abs_terminal(Add a) const {
        std::vector<double> ts;
        collect_terminals(a, ts);
        double m = 0.0;
        for (double t : ts) m = std::max(m, std::abs(t));
        return m;
    }

    size_t dag_size(Add a) const {
        std::vector<uint32_t> stack = {a.id};
        std::unordered_set<uint32_t> seen;
        while (!stack.empty()) {
            uint32_t id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            const Node& n = nodes_[id];
            if (n.var >= 0) {
                stack.push_back(n.hi);
                stack.push_back(n.lo);
            }
        }
        return seen.size();
    }

    size_t node_count() const { return nodes_.size(); }

    // Fig-6 style rendering: variable-labelled internal nodes, dashed
    // false-edges, boxed terminals.
    std::string to_dot(Add a) const {
        std::ostringstream out;
        out << "digraph add {\n";
        std::vector<uint32_t> stack = {a.id};
        std::unordered_set<uint32_t> seen;
        while (!stack.empty()) {
            uint32_t id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            const Node& n = nodes_[id];
            if (n.var < 0) {
                out << "  n" << id << " [shape=box, label=\"" << n.value << "\"];\n";
            } else {
                out << "  n" << id << " [shape=ellipse, label=\""
                    << var_names_[static_cast<size_t>(n.var)] << "\"];\n";
                out << "  n" << id << " -> n" << n.hi << ";\n";
                out << "  n" << id << " -> n" << n.lo << " [style=dashed];\n";
                stack.push_back(n.hi);
                stack.push_back(n.lo);
            }
        }
        out << "}\n";
        return out.str();
    }

private:
    struct Node {
        int32_t var;  // -1 terminal
        double value;
        uint32_t hi, lo;
    };

    static double combine(AddOp op, double x, double y) {
        switch (op) {
            case AddOp::plus: return x + y;
            case AddOp::minus: return x - y;
            case AddOp::times: return x * y;
            case AddOp::max_of: return std::max(x, y);
            case AddOp::min_of: return std::min(x, y);
        }
        return 0.0;
    }

    Add branch(Add a, uint32_t var, bool hi) {
        const Node& n = nodes_[a.id];
        if (n.var < 0 || static_cast<uint32_t>(n.var) != var) return a;
        return hi ? Add{n.hi} : Add{n.lo};
    }

    Add map_rec(Add a, const std::function<double(double)>& fn,
                std::unordered_map<uint32_t, uint32_t>& memo) {
        auto it = memo.find(a.id);
        if (it != memo.end()) return {it->second};
        const Node n = nodes_[a.id];
        Add res = n.var < 0 ? constant(fn(n.value))
                            : node(static_cast<uint32_t>(n.var), map_rec({n.hi}, fn, memo),
                                   map_rec({n.lo}, fn, memo));
        memo.emplace(a.id, res.id);
        return res;
    }

    uint32_t alloc(Node n) {
        if (nodes_.size() >= node_limit_)
            throw ResourceLimitError("ADD node limit exceeded");
        nodes_.push_back(n);
        return static_cast<uint32_t>(nodes_.size() - 1);
    }

    size_t node_limit_;
    std::vector<std::string> var_names_;
    std::vector<Node> nodes_;
    std::unordered_map<uint64_t, uint32_t> terminals_;
    std::unordered_multimap<uint64_t, uint32_t> unique_;
    std::unordered_map<uint64_t, uint32_t> apply_cache_;
    std::unordered_map<uint64_t, uint32_t> restrict_cache_;
};

}  // namespace nmrdpp
