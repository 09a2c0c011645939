// ============================================================================
// nmrdpp/session.hpp — the scriptable command interpreter
// ============================================================================
//
// A session moves through the phases load -> preprocess -> expand -> solve ->
// inspect.  Commands that need a missing artifact fail with a phase-order
// error and a nonzero exit code.  Command syntax is `name` or `name(args)`,
// string arguments quoted with ' or ", one command per line, `#` comments.
//
//     > loadWorld('coin')
//     > preprocess('mPltl')
//     > expand
//     > domainStateSize
//     6
//     > valIt(0.99, 0.0001)
//     > iterationCount
//     1277
//
// The method tokens are sPltl (subformula-closure route), mPltl
// (preprocessed route), strPltl (symbolic route), fltl (progression route);
// the spellings sPlt1/mPlt1 from the sample session are accepted as aliases.
// `preprocess('fltl')` only marks the pipeline: progression needs no
// preprocessing.  readCPUtimer prints seconds with five decimals, which is
// the one transcript line that varies between runs.
//
// ============================================================================

#pragma once

#include "domains.hpp"
#include "solvers.hpp"
#include "structured.hpp"
#include "translate.hpp"

#include <cctype>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>

namespace nmrdpp {

struct CommandError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StatsRow {
    std::string domain;
    std::string method;
    size_t n_props = 0;
    size_t estates = 0;
    size_t iterations = 0;
    double wall_time_ms = 0.0;
    double value_at_start = 0.0;
};

inline std::string export_stats_csv(const std::vector<StatsRow>& rows) {
    std::ostringstream out;
    out << "domain,method,nProps,eStates,iterations,wallTimeMs,valueAtStart\n";
    for (const StatsRow& r : rows) {
        out << r.domain << ',' << r.method << ',' << r.n_props << ',' << r.estates << ','
            << r.iterations << ',' << r.wall_time_ms << ',' << std::setprecision(12)
            << r.value_at_start << '\n';
    }
    return out.str();
}

class Session {
public:
    explicit Session(std::ostream& out) : out_(&out) {}

    std::vector<std::string> search_dirs = {"."};
    size_t max_estates = 1'000'000;
    std::atomic<bool>* interrupt = nullptr;

    const std::vector<StatsRow>& stats() const { return stats_; }

    // Executes one command line; throws CommandError on failure.
    void run_line(const std::string& line) {
        std::string name;
        std::vector<std::string> args;
        if (!parse_command(line, name, args)) return;  // blank or comment
        dispatch(name, args);
    }

    // Runs a whole script, echoing commands transcript-style.  Returns 0 on
    // success, 1 on the first error.
    int run_script(std::istream& in, bool interactive = false) {
        std::string line;
        if (interactive) *out_ << "> " << std::flush;
        while (std::getline(in, line)) {
            if (!interactive && !blank(line)) *out_ << "> " << line << "\n";
            try {
                run_line(line);
            } catch (const ProgressionFailure& e) {
                *out_ << "error: " << e.what();
                if (world_) {
                    *out_ << ": " << print_formula(e.offending, world_->vocab)
                          << " under prefix";
                    for (const State& s : e.witness) *out_ << " " << s.to_string(world_->vocab);
                }
                *out_ << "\n";
                return 1;
            } catch (const std::exception& e) {
                *out_ << "error: " << e.what() << "\n";
                return 1;
            }
            if (interactive) *out_ << "> " << std::flush;
        }
        return 0;
    }

private:
    static bool blank(const std::string& s) {
        for (char c : s)
            if (!std::isspace(static_cast<unsigned char>(c)) && c != '#') return false;
        return true;
    }

    static std::string trim(std::string s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        size_t e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }

    static std::string unquote(std::string s) {
        s = trim(s);
        if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
            return s.substr(1, s.size() - 2);
        return s;
    }

    static bool parse_command(const std::string& line, std::string& name,
                              std::vector<std::string>& args) {
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') return false;
        size_t i = 0;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
            ++i;
        if (i == 0) throw CommandError("unknown command: " + s);
        name = s.substr(0, i);
        std::string rest = trim(s.substr(i));
        if (rest.empty()) return true;
        if (rest[0] != '(') throw CommandError("expected '(' after " + name);
        size_t close = rest.rfind(')');
        if (close == std::string::npos) throw CommandError("missing ')' in " + name);
        std::string tail = trim(rest.substr(close + 1));
        if (!tail.empty() && tail[0] != '|')  // rendering pipes are ignored
            throw CommandError("trailing input after " + name);
        std::string inner = rest.substr(1, close - 1);
        size_t start = 0;
        int depth = 0;
        bool any = false;
        for (size_t k = 0; k <= inner.size(); ++k) {
            if (k < inner.size() && (inner[k] == '(')) ++depth;
            if (k < inner.size() && (inner[k] == ')')) --depth;
            if (k == inner.size() || (inner[k] == ',' && depth == 0)) {
                std::string a = trim(inner.substr(start, k - start));
                if (!a.empty()) {
                    args.push_back(a);
                    any = true;
                } else if (any || k < inner.size()) {
                    if (k < inner.size()) throw CommandError("empty argument in " + name);
                }
                start = k + 1;
            }
        }
        return true;
    }

    static double to_real(const std::string& s, const std::string& what) {
        try {
            size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw CommandError("expected a number for " + what + ", got '" + s + "'");
        }
    }

    void dispatch(const std::string& name, const std::vector<std::string>& args) {
        if (name == "loadWorld") return cmd_load(one(args, name));
        if (name == "preprocess") return cmd_preprocess(one(args, name));
        if (name == "expand") return cmd_expand();
        if (name == "valIt" || name == "polIt") return cmd_solve_flat(name, args);
        if (name == "lao") return cmd_lao(args);
        if (name == "spudd") return cmd_spudd(args);
        if (name == "startCPUtimer") return cmd_timer_start();
        if (name == "stopCPUtimer") return cmd_timer_stop();
        if (name == "readCPUtimer") return cmd_timer_read();
        if (name == "iterationCount") return cmd_iteration_count();
        if (name == "domainStateSize") return cmd_domain_state_size();
        if (name == "expandedStateCount") return cmd_expanded_state_count();
        if (name == "getPolicy") return cmd_get_policy();
        if (name == "displayDot") return cmd_display_dot(one(args, name));
        if (name == "printDomain") return cmd_print_domain();
        if (name == "setSeed") return cmd_set_seed(one(args, name));
        if (name == "echo") return cmd_echo(args);
        throw CommandError("unknown command: " + name);
    }

    static std::string one(const std::vector<std::string>& args, const std::string& name) {
        if (args.size() != 1) throw CommandError(name + " takes one argument");
        return unquote(args[0]);
    }

    // ── phases ──────────────────────────────────────────────────────────────

    void cmd_load(const std::string& name) {
        namespace fs = std::filesystem;
        std::vector<std::string> candidates = {name, name + ".world"};
        for (const std::string& dir : search_dirs) {
            candidates.push_back((fs::path(dir) / name).string());
            candidates.push_back((fs::path(dir) / (name + ".world")).string());
        }
        for (const std::string& c : candidates)
            if (fs::exists(c)) {
                world_ = std::make_unique<Nmrdp>(load_world(c));
                world_name_ = fs::path(name).stem().string();
                method_.clear();
                labels_.reset();
                expanded_.reset();
                structured_.reset();
                generator_.reset();
                flat_result_.reset();
                structured_result_.reset();
                return;
            }
        throw CommandError("world not found: " + name);
    }

    const Nmrdp& world() const {
        if (!world_) throw CommandError("no world loaded; run loadWorld first");
        return *world_;
    }

    void cmd_preprocess(const std::string& raw) {
        std::string m = raw;
        if (m == "sPlt1") m = "sPltl";
        if (m == "mPlt1") m = "mPltl";
        if (m == "strPlt1") m = "strPltl";
        if (m != "sPltl" && m != "mPltl" && m != "strPltl" && m != "fltl")
            throw CommandError("unknown method: " + raw);
        const Nmrdp& d = world();
        if (m == "fltl") {
            if (d.reward_dialect() != Dialect::fltl)
                throw CommandError("world rewards are past-dialect; the fltl method needs "
                                   "future-dialect rewards");
        } else if (d.reward_dialect() != Dialect::pltl) {
            throw CommandError("world rewards are future-dialect; " + m +
                               " needs past-dialect rewards");
        }
        method_ = m;
        labels_.reset();
        expanded_.reset();
        structured_.reset();
        generator_.reset();
        if (m == "mPltl") labels_ = pltlmin_preprocess(d, d.pltl_rewards());
        if (m == "strPltl") structured_ = pltlstr_translate(d, d.pltl_rewards());
        // sPltl and fltl defer their work to expansion / solving
    }

    void require_method() const {
        if (method_.empty()) throw CommandError("no method selected; run preprocess first");
    }

    void cmd_expand() {
        require_method();
        const Nmrdp& d = world();
        TranslateOptions opts;
        opts.max_estates = max_estates;
        if (method_ == "sPltl") {
            expanded_ = pltlsim_translate(d, d.pltl_rewards(), opts);
        } else if (method_ == "mPltl") {
            expanded_ = pltlmin_translate(d, d.pltl_rewards(), *labels_, opts);
        } else if (method_ == "fltl") {
            expanded_ = fltl_translate(d, d.fltl_rewards(), d.control, opts);
        } else {
            throw CommandError("the symbolic method does not expand; run spudd directly");
        }
    }

    const ExpandedMdp& expanded() const {
        if (!expanded_) throw CommandError("no expanded process; run expand first");
        return *expanded_;
    }

    // ── solving ─────────────────────────────────────────────────────────────

    SolverConfig config(const std::vector<std::string>& args, size_t want) const {
        if (args.size() < want) throw CommandError("solver needs beta and epsilon");
        SolverConfig cfg;
        cfg.beta = to_real(args[0], "beta");
        cfg.epsilon = to_real(args[1], "epsilon");
        if (cfg.beta < 0.0 || cfg.beta >= 1.0) throw CommandError("beta must be in [0,1)");
        if (cfg.epsilon <= 0.0) throw CommandError("epsilon must be positive");
        return cfg;
    }

    void record(const std::string& solver, size_t estates, size_t iterations, double ms,
                double value) {
        StatsRow row;
        row.domain = world_name_;
        row.method = method_ + "+" + solver;
        row.n_props = world().vocab.size();
        row.estates = estates;
        row.iterations = iterations;
        row.wall_time_ms = ms;
        row.value_at_start = value;
        stats_.push_back(row);
    }

    void cmd_solve_flat(const std::string& name, const std::vector<std::string>& args) {
        SolverConfig cfg = config(args, 2);
        const ExpandedMdp& m = expanded();
        flat_result_ = name == "valIt" ? value_iteration(m, cfg) : policy_iteration(m, cfg);
        structured_result_.reset();
        record(name, m.size(), flat_result_->iterations, flat_result_->wall_time_ms,
               flat_result_->value_at_initial);
    }

    void cmd_lao(const std::vector<std::string>& args) {
        require_method();
        SolverConfig cfg = config(args, 2);
        const Nmrdp& d = world();

        Heuristic h;
        std::string hname = args.size() > 2 ? unquote(args[2]) : "sumRewards";
        if (hname == "sumRewards") {
            double v = uninformed_fringe_value(d, cfg.beta);
            h = [v](const State&) { return v; };
        } else if (hname == "unserved50") {
            std::vector<uint32_t> served;
            for (uint32_t p = 0; p < d.vocab.size(); ++p)
                if (d.vocab.name(p).rfind("ServedP", 0) == 0) served.push_back(p);
            double beta = cfg.beta;
            h = [served, beta](const State& s) {
                size_t unserved = 0;
                for (uint32_t p : served)
                    if (!s.get(p)) ++unserved;
                return beta * 50.0 * double(unserved);
            };
        } else {
            double v = to_real(hname, "heuristic");
            h = [v](const State&) { return v; };
        }

        if (method_ == "fltl") {
            TranslateOptions opts;
            opts.max_estates = max_estates;
            generator_ = std::make_unique<FltlOnDemandGenerator>(d, d.fltl_rewards(), d.control,
                                                                 opts);
            flat_result_ = lao_star(*generator_, cfg, h, interrupt);
            structured_result_.reset();
            record("lao", flat_result_->expanded_count, flat_result_->iterations,
                   flat_result_->wall_time_ms, flat_result_->value_at_initial);
        } else {
            const ExpandedMdp& m = expanded();
            ExpandedMdpGenerator gen(m);
            flat_result_ = lao_star(gen, cfg, h, interrupt);
            structured_result_.reset();
            record("lao", flat_result_->expanded_count, flat_result_->iterations,
                   flat_result_->wall_time_ms, flat_result_->value_at_initial);
        }
    }

    void cmd_spudd(const std::vector<std::string>& args) {
        SolverConfig cfg = config(args, 2);
        if (!structured_) throw CommandError("no symbolic model; run preprocess('strPltl') first");
        structured_result_ = spudd_solve(*structured_, cfg);
        flat_result_.reset();
        record("spudd", size_t(1) << structured_->flat_count(), structured_result_->iterations,
               structured_result_->wall_time_ms, structured_result_->value_at_initial);
    }

    // ── timers and counters ─────────────────────────────────────────────────

    void cmd_timer_start() {
        timer_running_ = true;
        timer_start_ = std::clock();
    }
    void cmd_timer_stop() {
        if (timer_running_) timer_accum_ += double(std::clock() - timer_start_) / CLOCKS_PER_SEC;
        timer_running_ = false;
    }
    void cmd_timer_read() {
        double t = timer_accum_;
        if (timer_running_) t += double(std::clock() - timer_start_) / CLOCKS_PER_SEC;
        *out_ << std::fixed << std::setprecision(5) << t << "\n";
        out_->unsetf(std::ios_base::floatfield);
    }

    void cmd_iteration_count() {
        if (structured_result_) *out_ << structured_result_->iterations << "\n";
        else if (flat_result_) *out_ << flat_result_->iterations << "\n";
        else throw CommandError("nothing solved yet");
    }

    void cmd_domain_state_size() { *out_ << expanded().size() << "\n"; }

    void cmd_expanded_state_count() {
        if (flat_result_) *out_ << flat_result_->expanded_count << "\n";
        else throw CommandError("no state-based solve yet");
    }

    void cmd_get_policy() {
        const Nmrdp& d = world();
        if (structured_result_) {
            // one line per reachable assignment of the symbolic model
            const StructuredMdp& m = *structured_;
            Add reach = reachability_restrict(m);
            size_t n = m.flat_count();
            for (size_t v = 0; v < (size_t(1) << n); ++v) {
                std::vector<bool> flat(n);
                for (size_t k = 0; k < n; ++k) flat[k] = (v >> k) & 1;
                auto assign = m.manager_assignment(flat);
                if (m.mgr->eval(reach, assign) != 1.0) continue;
                int32_t a = structured_result_->policy_at(*m.mgr, assign);
                *out_ << assignment_text(m, flat) << " -> "
                      << (a >= 0 ? d.actions[a].name : "-") << "\n";
            }
            return;
        }
        if (!flat_result_) throw CommandError("nothing solved yet");
        const std::vector<int32_t>& pi = flat_result_->policy;
        if (expanded_) {
            for (uint32_t e = 0; e < expanded_->size(); ++e)
                *out_ << "e" << e << " " << expanded_->tau(e).to_string(d.vocab) << " -> "
                      << (pi[e] >= 0 ? d.actions[pi[e]].name : "-") << "\n";
        } else if (generator_) {
            for (uint32_t e = 0; e < pi.size(); ++e)
                *out_ << "e" << e << " " << generator_->state_of(e).to_string(d.vocab) << " -> "
                      << (pi[e] >= 0 ? d.actions[pi[e]].name : "-") << "\n";
        }
    }

    static std::string assignment_text(const StructuredMdp& m, const std::vector<bool>& flat) {
        std::string out = "{";
        bool first = true;
        for (size_t k = 0; k < m.flat_count(); ++k) {
            if (!flat[k]) continue;
            if (!first) out += ",";
            out += m.mgr->var_name(m.cur(k));
            first = false;
        }
        return out + "}";
    }

    void cmd_display_dot(const std::string& kind) {
        if (kind == "mdpToDot") {
            *out_ << to_dot(expanded());
            return;
        }
        if (kind == "valueToDot") {
            if (structured_result_) {
                *out_ << structured_->mgr->to_dot(structured_result_->value);
                return;
            }
            if (flat_result_) {
                *out_ << value_dot();
                return;
            }
            throw CommandError("nothing solved yet");
        }
        if (kind == "policyToDot") {
            if (structured_result_) {
                *out_ << structured_->mgr->to_dot(structured_policy_add());
                return;
            }
            if (flat_result_) {
                *out_ << policy_dot();
                return;
            }
            throw CommandError("nothing solved yet");
        }
        throw CommandError("unknown displayDot kind: " + kind);
    }

    const State& solved_state(uint32_t e) const {
        if (expanded_) return expanded_->tau(e);
        return generator_->state_of(e);
    }

    std::string value_dot() const {
        const Nmrdp& d = world();
        std::ostringstream out;
        out << "digraph value {\n  node [shape=record];\n";
        for (uint32_t e = 0; e < flat_result_->value.size(); ++e)
            out << "  e" << e << " [label=\"" << solved_state(e).to_string(d.vocab) << " | "
                << flat_result_->value[e] << "\"];\n";
        out << "}\n";
        return out.str();
    }

    std::string policy_dot() const {
        const Nmrdp& d = world();
        std::ostringstream out;
        out << "digraph policy {\n";
        for (uint32_t e = 0; e < flat_result_->policy.size(); ++e) {
            int32_t a = flat_result_->policy[e];
            out << "  e" << e << " [label=\"" << solved_state(e).to_string(d.vocab) << "\"];\n";
            if (a < 0) continue;
            Distribution dist =
                expanded_ ? expanded_->trans[e][a]
                          : generator_->successors_of(e, static_cast<uint32_t>(a));
            for (const auto& [t, pr] : dist)
                out << "  e" << e << " -> e" << t << " [label=\"" << d.actions[a].name << " : "
                    << pr << "\"];\n";
        }
        out << "}\n";
        return out.str();
    }

    Add structured_policy_add() const {
        const StructuredMdp& m = *structured_;
        AddManager& mgr = *m.mgr;
        Add policy = mgr.constant(0.0);
        Add best = structured_result_->qvalues[0];
        for (size_t a = 1; a < structured_result_->qvalues.size(); ++a) {
            Add q = structured_result_->qvalues[a];
            Add gain = mgr.apply(AddOp::minus, q, best);
            Add better = mgr.threshold_pos(gain);
            Add keep = mgr.apply(AddOp::minus, mgr.constant(1.0), better);
            policy = mgr.apply(AddOp::plus, mgr.apply(AddOp::times, keep, policy),
                               mgr.apply(AddOp::times, better, mgr.constant(double(a))));
            best = mgr.apply(AddOp::max_of, best, q);
        }
        return policy;
    }

    void cmd_print_domain() { *out_ << to_world_text(world()); }

    void cmd_set_seed(const std::string& arg) {
        seed_ = static_cast<uint64_t>(to_real(arg, "seed"));
    }

    void cmd_echo(const std::vector<std::string>& args) {
        for (size_t i = 0; i < args.size(); ++i)
            *out_ << (i ? " " : "") << unquote(args[i]);
        *out_ << "\n";
    }

    std::ostream* out_;
    std::unique_ptr<Nmrdp> world_;
    std::string world_name_;
    std::string method_;
    std::optional<LabelFunction> labels_;
    std::optional<ExpandedMdp> expanded_;
    std::optional<StructuredMdp> structured_;
    std::unique_ptr<FltlOnDemandGenerator> generator_;
    std::optional<SolveResult> flat_result_;
    std::optional<StructuredSolveResult> structured_result_;
    std::vector<StatsRow> stats_;
    uint64_t seed_ = 0;
    bool timer_running_ = false;
    std::clock_t timer_start_ = 0;
    double timer_accum_ = 0.0;
};

}  // namespace nmrdpp
