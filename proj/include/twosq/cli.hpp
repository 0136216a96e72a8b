#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/constants/constants.hpp>

#include "acceptance.hpp"
#include "config.hpp"

namespace twosq::cli {

enum ExitCode { ok = 0, config_failure = 1, verification_failure = 2 };

struct Options {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    int verbosity = 0;
    std::optional<int> workers;
    std::optional<i64> prime_cutoff;
    std::optional<int> depth;
    std::optional<int> two_adic_level;
    std::string X;
    bool inject_fault = false;
    std::vector<int> only;
};

namespace detail {

inline ExperimentConfig load(const Options& o, bool require_ladder = false) {
    if (o.config_path.empty()) throw config_error("", 0, "--config is required for this command");
    ExperimentConfig cfg = parse_config(read_file(o.config_path));
    if (o.workers) cfg.workers = *o.workers;
    if (o.prime_cutoff) cfg.prime_cutoff = *o.prime_cutoff;
    if (o.depth) cfg.depth = *o.depth;
    if (o.two_adic_level) cfg.n2 = *o.two_adic_level;
    if (require_ladder && cfg.X_ladder.empty()) throw config_error("X_ladder", 0, "ladder must not be empty");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error("", 0, e.what());
    }
    return cfg;
}

inline int workers_of(const Options& o) { return o.workers.value_or(0); }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const {
        std::string s;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
            s += "\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        return s;
    }
};

class Emitter {
public:
    Emitter(const Options& o, std::ostream& out) : opt_(o), out_(out) {
        if (o.format != "json" && o.format != "csv") throw config_error("--format", 0, "expected csv or json");
    }

    bool csv() const { return opt_.format == "csv"; }

    void write(const std::string& text) const {
        if (opt_.out_path.empty()) {
            out_ << text;
            return;
        }
        std::ofstream f(opt_.out_path);
        if (!f) throw config_error("--out", 0, "cannot write " + opt_.out_path);
        f << text;
    }

    void emit(const json& j, const Table& t) const { write(csv() ? t.csv() : JsonWriter::dump(j) + "\n"); }

private:
    const Options& opt_;
    std::ostream& out_;
};

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

inline int suite_exit(const std::vector<acceptance::CriterionResult>& rs, const Emitter& em) {
    json j = json::array();
    Table t{{"criterion", "pass", "detail"}, {}};
    bool all = true;
    for (const auto& r : rs) {
        all = all && r.pass;
        j.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
        std::string d = r.detail;
        std::replace(d.begin(), d.end(), ',', ';');
        t.rows.push_back({std::to_string(r.id), yes_no(r.pass), d});
    }
    em.emit(j, t);
    return all ? ok : verification_failure;
}

}  // namespace detail

inline int cmd_verify_arith(const Options& o, const detail::Emitter& em) {
    acceptance::SuiteOptions so;
    so.workers = detail::workers_of(o);
    return detail::suite_exit(acceptance::run_suite(so, {1, 2, 3}), em);
}

inline int cmd_two_adic(const Options& o, const detail::Emitter& em, std::ostream& err) {
    struct Job {
        std::string name;
        FormSystem S;
        Quad d;
        int k;
        Parity j;
    };
    std::vector<Job> jobs;
    int level = o.two_adic_level.value_or(12);
    if (!o.config_path.empty()) {
        const auto cfg = detail::load(o);
        level = cfg.n2;
        jobs.push_back({"config", cfg.system, cfg.dp.d, cfg.k, cfg.j});
    } else {
        for (const auto& c : acceptance::two_adic_suite())
            for (Parity j : c.parities) jobs.push_back({c.name, FormSystem(c.forms), c.d, c.k, j});
    }
    const int upper = std::min(level + 1, 14);
    json arr = json::array();
    detail::Table t{{"system", "j", "k", "closed", "brute_n", "brute_n_plus_1", "match"}, {}};
    bool all = true;
    for (const auto& job : jobs) {
        Rational closed = delta_closed(job.j, job.k, job.S, job.d);
        if (o.inject_fault) closed += Rational(1, i64{1} << 20);
        const Rational b0 = delta_brute(job.j, job.k, job.S, job.d, level, detail::workers_of(o));
        const Rational b1 = upper > level ? delta_brute(job.j, job.k, job.S, job.d, upper, detail::workers_of(o)) : b0;
        const bool match = closed == b0 && b0 == b1;
        all = all && match;
        if (!match) err << "mismatch: " << job.name << " j=" << to_string(job.j) << "\n";
        arr.push_back({{"system", job.name},
                       {"j", to_string(job.j)},
                       {"k", job.k},
                       {"closed", dyadic_string(closed)},
                       {"brute", {{"level", level}, {"value", dyadic_string(b0)}}},
                       {"brute_next", {{"level", upper}, {"value", dyadic_string(b1)}}},
                       {"match", match}});
        t.rows.push_back({job.name, to_string(job.j), std::to_string(job.k), dyadic_string(closed), dyadic_string(b0),
                          dyadic_string(b1), detail::yes_no(match)});
    }
    em.emit(arr, t);
    return all ? ok : verification_failure;
}

inline int cmd_local(const Options& o, const detail::Emitter& em) {
    const auto cfg = detail::load(o);
    json arr = json::array();
    detail::Table t{{"p", "sigma_p", "c_p", "omega_p_n1", "omega_p_n2", "omega_p_n3"}, {}};
    for (i64 p : primes_up_to(std::min<i64>(cfg.prime_cutoff, 13))) {
        if (p == 2) continue;
        const auto sp = sigma_p_general(p, cfg.system, cfg.dp, cfg.depth);
        const auto cp = c_p_closed(p, cfg.system, cfg.dp, cfg.depth);
        PAdicQuery q{p, {}, {}, 1};
        for (std::size_t i = 0; i < 4; ++i) {
            q.lambda[i] = nu_p(cfg.dp.d[i], p);
            q.mu[i] = nu_p(cfg.dp.D[i], p);
        }
        json row{{"p", p},
                 {"sigma_p", JsonWriter::number(sp.value)},
                 {"c_p", JsonWriter::number(cp.value)},
                 {"last_term", JsonWriter::number(cp.last_term)}};
        std::vector<std::string> cells{std::to_string(p), format_double(sp.value), format_double(cp.value)};
        json brute = json::object();
        for (int n = 1; n <= 3; ++n) {
            q.n = n;
            const int lam = *std::max_element(q.lambda.begin(), q.lambda.end());
            if (lam > n) {
                cells.push_back("");
                continue;
            }
            const double w = omega_p_brute(q, cfg.system);
            brute[std::to_string(n)] = JsonWriter::number(w);
            cells.push_back(format_double(w));
        }
        row["omega_p_brute"] = brute;
        arr.push_back(row);
        t.rows.push_back(cells);
    }
    em.emit(arr, t);
    return ok;
}

inline int cmd_euler(const Options& o, const detail::Emitter& em) {
    const auto cfg = detail::load(o);
    std::vector<i64> cutoffs;
    for (i64 P = 10; P < cfg.prime_cutoff; P *= 10) cutoffs.push_back(P);
    cutoffs.push_back(cfg.prime_cutoff);
    json arr = json::array();
    detail::Table t{{"P", "euler", "max_last_term", "tail_heuristic"}, {}};
    for (i64 P : cutoffs) {
        const auto E = euler_product(P, [&](i64 p) { return sigma_p_general(p, cfg.system, cfg.dp, cfg.depth); });
        const double tail = euler_tail_heuristic(P);
        arr.push_back({{"P", P},
                       {"euler", JsonWriter::number(E.value)},
                       {"max_last_term", JsonWriter::number(E.max_last_term)},
                       {"tail_heuristic", JsonWriter::number(tail)}});
        t.rows.push_back({std::to_string(P), format_double(E.value), format_double(E.max_last_term), format_double(tail)});
    }
    em.emit(arr, t);
    return ok;
}

inline int cmd_arch(const Options& o, const detail::Emitter& em) {
    const auto cfg = detail::load(o);
    const auto q = omega_infinity(cfg.system, cfg.dp.d, cfg.region);
    const double pi = boost::math::constants::pi<double>();
    const double expect = pi * pi * pi * pi * boost::rational_cast<double>(measure(cfg.region));
    const double diff = std::abs(q.value - expect);
    const bool agree = diff < 1e-6;
    json j{{"omega_infinity", JsonWriter::number(q.value)},
           {"error_estimate", JsonWriter::number(q.error)},
           {"pi4_meas", JsonWriter::number(expect)},
           {"abs_diff", JsonWriter::number(diff)},
           {"agree", agree}};
    detail::Table t{{"omega_infinity", "error_estimate", "pi4_meas", "abs_diff", "agree"},
                    {{format_double(q.value), format_double(q.error), format_double(expect), format_double(diff),
                      detail::yes_no(agree)}}};
    em.emit(j, t);
    return agree ? ok : verification_failure;
}

inline int cmd_sum(const Options& o, const detail::Emitter& em) {
    const auto cfg = detail::load(o);
    Rational X;
    if (!o.X.empty()) {
        const std::string doc = "{\"X\": " + (o.X.find('/') == std::string::npos ? o.X : "\"" + o.X + "\"") + "}";
        try {
            X = twosq::detail::FieldReader{doc}.rational(json::parse(doc)["X"], "--X");
        } catch (const json::exception&) {
            throw config_error("--X", 0, "cannot read \"" + o.X + "\" as a rational");
        }
        if (X <= 0) throw config_error("--X", 0, "X must be positive");
    } else if (!cfg.X_ladder.empty()) {
        X = cfg.X_ladder.back();
    } else {
        throw config_error("--X", 0, "give --X or a non-empty X_ladder");
    }
    const u64 S = sum_brute(X, cfg);
    json j{{"X", twosq::detail::rational_json(X)}, {"j", to_string(cfg.j)}, {"S", S}};
    detail::Table t{{"X", "j", "S"}, {{to_string(X), to_string(cfg.j), std::to_string(S)}}};
    em.emit(j, t);
    return ok;
}

inline int cmd_asymptotic(const Options& o, const detail::Emitter& em, std::ostream& err) {
    const auto cfg = detail::load(o, true);
    const auto tab = asymptotic_table(cfg);
    const auto local = local_product_constant(cfg.j, cfg.k, cfg.system, cfg.dp, cfg.region, cfg.prime_cutoff,
                                              cfg.depth, cfg.n2, detail::workers_of(o));
    const double diff = std::abs(tab.report.c - local.c);
    const bool agree = diff <= 1e-8 * std::max(1.0, std::abs(tab.report.c));
    if (!agree) err << "constant routes disagree by " << format_double(diff) << "\n";
    if (em.csv()) {
        em.write(ladder_csv(tab.rows));
    } else {
        json j{{"config", config_to_json(cfg)},
               {"rows", ladder_json(tab.rows)},
               {"reports", {report_to_json(tab.report), report_to_json(local)}},
               {"route_difference", JsonWriter::number(diff)}};
        em.write(JsonWriter::dump(j) + "\n");
    }
    return agree ? ok : verification_failure;
}

inline int cmd_selftest(const Options& o, const detail::Emitter& em, std::ostream& err) {
    if (!o.config_path.empty()) (void)detail::load(o);
    acceptance::SuiteOptions so;
    so.workers = detail::workers_of(o);
    if (o.verbosity > 0) so.log = [&](const std::string& s) { err << s << "\n"; };
    std::vector<acceptance::CriterionResult> rs;
    for (const auto& r : acceptance::run_suite(so, o.only)) {
        err << acceptance::format_line(r) << "\n";
        rs.push_back(r);
    }
    return detail::suite_exit(rs, em);
}

// Parses args (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Verification lab for binary linear forms and sums of two squares", "twosq"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "experiment configuration (JSON)");
    app.add_option("--out", o.out_path, "write output to this file instead of stdout");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", o.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--prime-cutoff", o.prime_cutoff, "largest prime in the Euler product");
    app.add_option("--depth", o.depth, "per-exponent truncation depth of the local factors");
    app.add_option("--two-adic-level", o.two_adic_level, "2-adic enumeration level");
    app.add_flag("-v,--verbose", o.verbosity, "progress on stderr");

    auto* verify = app.add_subcommand("verify-arith", "closed forms, Gauss circle and divisor splittings");
    auto* two_adic = app.add_subcommand("two-adic", "2-adic densities, closed form vs enumeration");
    two_adic->add_flag("--inject-fault", o.inject_fault)->group("");
    auto* local = app.add_subcommand("local", "local factors and p-adic densities for one configuration");
    auto* euler = app.add_subcommand("euler", "Euler product with a cutoff sweep");
    auto* arch = app.add_subcommand("arch", "archimedean density by quadrature");
    auto* sum = app.add_subcommand("sum", "one brute-force sum");
    sum->add_option("--X", o.X, "dilation factor (integer or p/q); default: last ladder entry");
    auto* asym = app.add_subcommand("asymptotic", "ladder of brute sums against both constant routes");
    auto* self = app.add_subcommand("selftest", "acceptance suite");
    self->add_option("--only", o.only, "criterion numbers to run")->check(CLI::Range(1, 10));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config_failure;
    }

    try {
        const detail::Emitter em(o, out);
        if (verify->parsed()) return cmd_verify_arith(o, em);
        if (two_adic->parsed()) return cmd_two_adic(o, em, err);
        if (local->parsed()) return cmd_local(o, em);
        if (euler->parsed()) return cmd_euler(o, em);
        if (arch->parsed()) return cmd_arch(o, em);
        if (sum->parsed()) return cmd_sum(o, em);
        if (asym->parsed()) return cmd_asymptotic(o, em, err);
        if (self->parsed()) return cmd_selftest(o, em, err);
    } catch (const config_error& e) {
        err << "error: " << e.what() << "\n";
        return config_failure;
    } catch (const capacity_error& e) {
        err << "error: " << e.what() << "\n";
        return config_failure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return config_failure;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return config_failure;
    } catch (const std::exception& e) {
        err << "internal check failed: " << e.what() << "\n";
        return verification_failure;
    }
    return config_failure;
}

}  // namespace twosq::cli
