// ============================================================================
// nmrdpp/solvers.hpp — dynamic programming and heuristic search
// ============================================================================
//
// value_iteration / policy_iteration work on a fully expanded process.
// lao_star drives a successor generator, so the envelope is built on demand;
// fringe nodes are absorbing at their heuristic value, and dynamic
// programming runs over the expanded set between envelope extensions.  With
// an admissible heuristic the value at the initial node converges to the
// optimum without necessarily expanding everything.
//
// Conventions shared by all solvers: iteration starts from the immediate
// rewards, sweeps are synchronous, greedy policies break ties toward the
// lowest action index.  The default stopping rule halts when the sup-norm
// sweep difference falls below eps*(1-beta)/(2*beta), which makes the greedy
// policy eps-optimal; a raw sup-norm mode is available for experiments.
//
// ============================================================================

#pragma once

#include "translate.hpp"

#include <atomic>
#include <chrono>
#include <random>

namespace nmrdpp {

enum class StoppingRule {
    epsilon_optimal,  // sup-norm below eps*(1-beta)/(2*beta)
    sup_norm          // sup-norm below eps
};

struct SolverConfig {
    double beta = 0.99;       // discount, in [0,1)
    double epsilon = 1e-4;    // convergence parameter (see StoppingRule)
    size_t max_iterations = 1'000'000;
    StoppingRule stopping = StoppingRule::epsilon_optimal;
    bool direct_evaluation = false;  // dense linear solve for small systems

    double sup_threshold() const {
        if (stopping == StoppingRule::sup_norm || beta == 0.0) return epsilon;
        return epsilon * (1.0 - beta) / (2.0 * beta);
    }

    void validate() const {
        if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("discount must be in [0,1)");
        if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    }
};

struct SolveResult {
    std::vector<double> value;     // per e-state / node
    std::vector<int32_t> policy;   // -1 where undefined
    size_t iterations = 0;         // dynamic-programming sweeps
    size_t expanded_count = 0;
    double wall_time_ms = 0.0;
    bool converged = true;
    double value_at_initial = 0.0;
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline double q_value(const ExpandedMdp& m, const std::vector<double>& v, uint32_t e, size_t a,
                      double beta) {
    double q = 0.0;
    for (const auto& [t, pr] : m.trans[e][a]) q += pr * v[t];
    return m.estates[e].reward + beta * q;
}

inline void greedy_policy(const ExpandedMdp& m, const std::vector<double>& v, double beta,
                          std::vector<int32_t>& policy) {
    policy.assign(m.size(), -1);
    for (uint32_t e = 0; e < m.size(); ++e) {
        double best = -std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < m.trans[e].size(); ++a) {
            if (m.trans[e][a].empty()) continue;
            double q = q_value(m, v, e, a, beta);
            if (q > best) {
                best = q;
                policy[e] = static_cast<int32_t>(a);
            }
        }
    }
}

}  // namespace detail

// ── value iteration ─────────────────────────────────────────────────────────

inline SolveResult value_iteration(const ExpandedMdp& m, const SolverConfig& cfg) {
    cfg.validate();
    detail::Stopwatch watch;
    const double threshold = cfg.sup_threshold();
    SolveResult res;
    res.value.resize(m.size());
    for (uint32_t e = 0; e < m.size(); ++e) res.value[e] = m.estates[e].reward;
    std::vector<double> next(m.size(), 0.0);

    for (;;) {
        double diff = 0.0;
        for (uint32_t e = 0; e < m.size(); ++e) {
            double best = -std::numeric_limits<double>::infinity();
            bool any = false;
            for (size_t a = 0; a < m.trans[e].size(); ++a) {
                if (m.trans[e][a].empty()) continue;
                any = true;
                double q = 0.0;
                for (const auto& [t, pr] : m.trans[e][a]) q += pr * res.value[t];
                best = std::max(best, q);
            }
            next[e] = m.estates[e].reward + (any ? cfg.beta * best : 0.0);
            diff = std::max(diff, std::abs(next[e] - res.value[e]));
        }
        res.value.swap(next);
        ++res.iterations;
        if (diff < threshold) break;
        if (res.iterations >= cfg.max_iterations) {
            res.converged = false;
            break;
        }
    }

    detail::greedy_policy(m, res.value, cfg.beta, res.policy);
    res.expanded_count = m.size();
    res.value_at_initial = res.value[m.initial];
    res.wall_time_ms = watch.ms();
    return res;
}

// ── policy evaluation ───────────────────────────────────────────────────────

namespace detail {

inline std::vector<double> evaluate_iterative(const ExpandedMdp& m,
                                              const std::vector<int32_t>& policy, double beta,
                                              double eps, size_t max_iterations) {
    std::vector<double> v(m.size(), 0.0), next(m.size(), 0.0);
    for (size_t k = 0; k < max_iterations; ++k) {
        double diff = 0.0;
        for (uint32_t e = 0; e < m.size(); ++e) {
            double q = 0.0;
            if (policy[e] >= 0)
                for (const auto& [t, pr] : m.trans[e][policy[e]]) q += pr * v[t];
            next[e] = m.estates[e].reward + beta * q;
            diff = std::max(diff, std::abs(next[e] - v[e]));
        }
        v.swap(next);
        if (diff < eps) break;
    }
    return v;
}

// Dense Gaussian elimination on (I - beta P) v = r; reserved for small
// systems.
inline std::vector<double> evaluate_direct(const ExpandedMdp& m,
                                           const std::vector<int32_t>& policy, double beta) {
    size_t n = m.size();
    if (n > 2000) throw ResourceLimitError("direct policy evaluation limited to 2000 e-states");
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (size_t e = 0; e < n; ++e) {
        a[e][e] = 1.0;
        if (policy[e] >= 0)
            for (const auto& [t, pr] : m.trans[e][policy[e]]) a[e][t] -= beta * pr;
        a[e][n] = m.estates[e].reward;
    }
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        for (size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0.0) continue;
            double factor = a[row][col] / a[col][col];
            for (size_t k = col; k <= n; ++k) a[row][k] -= factor * a[col][k];
        }
    }
    std::vector<double> v(n);
    for (size_t e = 0; e < n; ++e) v[e] = a[e][n] / a[e][e];
    return v;
}

}  // namespace detail

inline std::vector<double> evaluate_policy(const ExpandedMdp& m,
                                           const std::vector<int32_t>& policy,
                                           const SolverConfig& cfg) {
    cfg.validate();
    if (cfg.direct_evaluation) return detail::evaluate_direct(m, policy, cfg.beta);
    return detail::evaluate_iterative(m, policy, cfg.beta, cfg.sup_threshold(),
                                      cfg.max_iterations);
}

// ── policy iteration ────────────────────────────────────────────────────────

inline SolveResult policy_iteration(const ExpandedMdp& m, const SolverConfig& cfg) {
    cfg.validate();
    detail::Stopwatch watch;
    SolveResult res;
    res.policy.assign(m.size(), -1);
    for (uint32_t e = 0; e < m.size(); ++e)
        for (size_t a = 0; a < m.trans[e].size(); ++a)
            if (!m.trans[e][a].empty()) {
                res.policy[e] = static_cast<int32_t>(a);
                break;
            }

    res.converged = false;
    for (size_t round = 0; round < cfg.max_iterations; ++round) {
        if (cfg.direct_evaluation)
            res.value = detail::evaluate_direct(m, res.policy, cfg.beta);
        else
            res.value = detail::evaluate_iterative(m, res.policy, cfg.beta,
                                                   cfg.sup_threshold() / 10.0,
                                                   cfg.max_iterations);
        ++res.iterations;
        bool stable = true;
        for (uint32_t e = 0; e < m.size(); ++e) {
            if (res.policy[e] < 0) continue;
            int32_t best = -1;
            double best_q = -std::numeric_limits<double>::infinity();
            for (size_t a = 0; a < m.trans[e].size(); ++a) {
                if (m.trans[e][a].empty()) continue;
                double q = detail::q_value(m, res.value, e, a, cfg.beta);
                if (q > best_q + 1e-12) {
                    best = static_cast<int32_t>(a);
                    best_q = q;
                }
            }
            if (best != res.policy[e]) {
                res.policy[e] = best;
                stable = false;
            }
        }
        if (stable) {
            res.converged = true;
            break;
        }
    }

    res.expanded_count = m.size();
    res.value_at_initial = res.value.empty() ? 0.0 : res.value[m.initial];
    res.wall_time_ms = watch.ms();
    return res;
}

// ── LAO* over a successor generator ─────────────────────────────────────────

// Heuristic: an optimistic estimate of the discounted reward beyond a fringe
// node, judged from its state.  The node's own immediate reward is known
// exactly and added by the solver.
using Heuristic = std::function<double(const State&)>;

// An admissible default for nonnegative rewards: the sum of all reward
// magnitudes, scaled to an infinite discounted horizon.
inline double uninformed_fringe_value(const Nmrdp& d, double beta) {
    double sum = 0.0;
    if (d.reward_dialect() == Dialect::pltl)
        for (const auto& e : d.pltl_rewards().entries) sum += std::abs(e.reward);
    else
        for (const auto& e : d.fltl_rewards().entries) sum += std::abs(e.reward);
    return sum / (1.0 - beta);
}

inline SolveResult lao_star(SuccessorGenerator& gen, const SolverConfig& cfg,
                            const Heuristic& heuristic,
                            const std::atomic<bool>* interrupt = nullptr) {
    cfg.validate();
    detail::Stopwatch watch;
    const double threshold = cfg.sup_threshold();
    SolveResult res;

    std::vector<double> value;
    std::vector<char> expanded;
    std::vector<char> dead;
    auto ensure = [&](uint32_t n) {
        if (n >= value.size()) {
            size_t old = value.size();
            value.resize(n + 1);
            expanded.resize(n + 1, 0);
            dead.resize(n + 1, 0);
            for (size_t i = old; i <= n; ++i) {
                dead[i] = gen.dead(static_cast<uint32_t>(i)) ? 1 : 0;
                value[i] = gen.reward(static_cast<uint32_t>(i)) +
                           (dead[i] ? 0.0 : heuristic(gen.state_of(static_cast<uint32_t>(i))));
            }
        }
    };

    uint32_t root = gen.initial();
    ensure(root);
    size_t actions = gen.action_count();

    auto greedy_action = [&](uint32_t n) -> int32_t {
        int32_t best = -1;
        double best_q = -std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < actions; ++a) {
            double q = 0.0;
            for (const auto& [t, pr] : gen.successors_of(n, static_cast<uint32_t>(a)))
                q += pr * value[t];
            q = gen.reward(n) + cfg.beta * q;
            if (q > best_q) {
                best_q = q;
                best = static_cast<int32_t>(a);
            }
        }
        return best;
    };

    bool converged = false;
    std::vector<uint32_t> expanded_list;
    while (res.iterations < cfg.max_iterations) {
        if (interrupt && interrupt->load()) break;

        // walk the greedy envelope from the root, collecting fringe hits
        std::vector<uint32_t> stack = {root};
        std::unordered_set<uint32_t> visited = {root};
        std::vector<uint32_t> fringe_hits;
        while (!stack.empty()) {
            uint32_t n = stack.back();
            stack.pop_back();
            if (dead[n]) continue;
            if (!expanded[n]) {
                fringe_hits.push_back(n);
                continue;
            }
            int32_t a = greedy_action(n);
            if (a < 0) continue;
            for (const auto& [t, pr] : gen.successors_of(n, static_cast<uint32_t>(a))) {
                ensure(t);
                if (visited.insert(t).second) stack.push_back(t);
            }
        }

        if (fringe_hits.empty() && converged) break;

        for (uint32_t n : fringe_hits) {
            expanded[n] = 1;
            expanded_list.push_back(n);
            for (size_t a = 0; a < actions; ++a)
                for (const auto& [t, pr] : gen.successors_of(n, static_cast<uint32_t>(a)))
                    ensure(t);
        }

        // dynamic programming over the expanded set; fringe values stay put
        double diff;
        do {
            diff = 0.0;
            for (uint32_t n : expanded_list) {
                double best = -std::numeric_limits<double>::infinity();
                bool any = false;
                for (size_t a = 0; a < actions; ++a) {
                    double q = 0.0;
                    bool has = false;
                    for (const auto& [t, pr] : gen.successors_of(n, static_cast<uint32_t>(a))) {
                        q += pr * value[t];
                        has = true;
                    }
                    if (!has) continue;
                    any = true;
                    best = std::max(best, q);
                }
                double nv = gen.reward(n) + (any ? cfg.beta * best : 0.0);
                diff = std::max(diff, std::abs(nv - value[n]));
                value[n] = nv;
            }
            ++res.iterations;
            if (interrupt && interrupt->load()) break;
        } while (diff >= threshold && res.iterations < cfg.max_iterations);
        converged = diff < threshold;
    }

    res.value = value;
    res.policy.assign(value.size(), -1);
    for (uint32_t n = 0; n < value.size(); ++n)
        if (expanded[n] && !dead[n]) res.policy[n] = greedy_action(n);
    res.converged = converged;
    res.expanded_count = expanded_list.size();
    res.value_at_initial = value[root];
    res.wall_time_ms = watch.ms();
    return res;
}

// ── trial simulation ────────────────────────────────────────────────────────

struct SimulationStats {
    std::vector<double> per_trial;  // discounted return of each trial
    double mean = 0.0;
    double variance = 0.0;  // sample variance
};

inline SimulationStats simulate(const ExpandedMdp& m, const std::vector<int32_t>& policy,
                                size_t trials, size_t horizon, uint64_t seed,
                                const SolverConfig& cfg,
                                std::optional<uint32_t> default_action = {}) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    SimulationStats stats;
    for (size_t trial = 0; trial < trials; ++trial) {
        uint32_t e = m.initial;
        double ret = 0.0, discount = 1.0;
        for (size_t step = 0; step < horizon; ++step) {
            ret += discount * m.estates[e].reward;
            discount *= cfg.beta;
            int32_t a = policy.size() > e ? policy[e] : -1;
            if (a < 0 || m.trans[e][a].empty()) {
                if (!default_action) {
                    if (m.dead(e)) break;  // absorbing dead end
                    throw std::invalid_argument("policy undefined at a reachable e-state");
                }
                a = static_cast<int32_t>(*default_action);
                if (m.trans[e][a].empty()) break;
            }
            double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            double acc = 0.0;
            uint32_t next = m.trans[e][a].back().first;
            for (const auto& [t, pr] : m.trans[e][a]) {
                acc += pr;
                if (roll <= acc) {
                    next = t;
                    break;
                }
            }
            e = next;
        }
        stats.per_trial.push_back(ret);
    }
    for (double r : stats.per_trial) stats.mean += r;
    if (!stats.per_trial.empty()) stats.mean /= double(stats.per_trial.size());
    if (stats.per_trial.size() > 1) {
        for (double r : stats.per_trial)
            stats.variance += (r - stats.mean) * (r - stats.mean);
        stats.variance /= double(stats.per_trial.size() - 1);
    }
    return stats;
}

}  // namespace nmrdpp
