#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiment.hpp"

namespace twosq {

using json = nlohmann::json;

// Malformed or invalid configuration. line is 0 when no position is known.
struct config_error : std::runtime_error {
    std::string field;
    std::size_t line = 0;

    config_error(std::string field_, std::size_t line_, const std::string& what)
        : std::runtime_error(describe(field_, line_, what)), field(std::move(field_)), line(line_) {}

private:
    static std::string describe(const std::string& field, std::size_t line, const std::string& what) {
        std::string s = "config error";
        if (line > 0) s += " at line " + std::to_string(line);
        if (!field.empty()) s += " in field '" + field + "'";
        return s + ": " + what;
    }
};

struct RunConfig {
    ExperimentConfig experiment;
    std::string format = "json";  // csv | json
    std::string out;              // empty = stdout
    int verbosity = 0;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key": in the document, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

struct FieldReader {
    const std::string& text;

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        const auto root = field.substr(0, field.find('['));
        throw config_error(field, line_of_key(text, root), what);
    }

    i64 integer(const json& v, const std::string& field) const {
        if (!v.is_number_integer()) fail(field, "expected an integer");
        return v.get<i64>();
    }

    Rational rational(const json& v, const std::string& field) const {
        if (v.is_number_integer()) return Rational(v.get<i64>());
        if (!v.is_string()) fail(field, "expected an integer or a \"p/q\" string");
        const std::string s = v.get<std::string>();
        try {
            std::size_t used = 0;
            const auto slash = s.find('/');
            const i64 num = std::stoll(s.substr(0, slash), &used);
            if (used != (slash == std::string::npos ? s.size() : slash)) throw std::invalid_argument("trailing text");
            if (slash == std::string::npos) return Rational(num);
            const std::string den_s = s.substr(slash + 1);
            const i64 den = std::stoll(den_s, &used);
            if (used != den_s.size()) throw std::invalid_argument("trailing text");
            if (den == 0) fail(field, "zero denominator in \"" + s + "\"");
            return Rational(num, den);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            fail(field, "cannot read \"" + s + "\" as a rational");
        }
    }

    const json& array(const json& v, const std::string& field, std::size_t min_size, std::size_t max_size) const {
        if (!v.is_array()) fail(field, "expected an array");
        if (v.size() < min_size || v.size() > max_size) {
            const std::string want = min_size == max_size ? std::to_string(min_size)
                                                          : "at least " + std::to_string(min_size);
            fail(field, "expected " + want + " entries, got " + std::to_string(v.size()));
        }
        return v;
    }

    Quad quad(const json& v, const std::string& field) const {
        array(v, field, 4, 4);
        Quad q{};
        for (std::size_t i = 0; i < 4; ++i) q[i] = integer(v[i], field + "[" + std::to_string(i) + "]");
        return q;
    }
};

inline json rational_json(const Rational& q) {
    if (q.denominator() == 1) return q.numerator();
    return to_string(q);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error("", detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    const detail::FieldReader rd{text};
    if (!doc.is_object()) rd.fail("", "top level must be a JSON object");
    static const std::vector<std::string> known{"forms",        "region", "d",     "D",     "j",
                                                "k",            "X_ladder", "prime_cutoff", "depth",
                                                "two_adic_level", "workers"};
    for (const auto& [key, _] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) rd.fail(key, "unknown field");
    for (const char* key : {"forms", "region"})
        if (!doc.contains(key)) throw config_error(key, 0, "required field is missing");

    ExperimentConfig cfg;
    {
        const json& fs = rd.array(doc["forms"], "forms", 4, 4);
        std::array<LinearForm, 4> forms;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::string f = "forms[" + std::to_string(i) + "]";
            rd.array(fs[i], f, 2, 2);
            const i64 a = rd.integer(fs[i][0], f + "[0]"), b = rd.integer(fs[i][1], f + "[1]");
            try {
                forms[i] = LinearForm(a, b);
            } catch (const std::exception& e) {
                rd.fail(f, e.what());
            }
        }
        try {
            cfg.system = FormSystem(forms);
        } catch (const std::exception& e) {
            rd.fail("forms", e.what());
        }
    }
    {
        const json& rs = rd.array(doc["region"], "region", 3, 1000);
        std::vector<Point> vs;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const std::string f = "region[" + std::to_string(i) + "]";
            rd.array(rs[i], f, 2, 2);
            vs.push_back({rd.rational(rs[i][0], f + "[0]"), rd.rational(rs[i][1], f + "[1]")});
        }
        try {
            cfg.region = ConvexRegion(vs);
        } catch (const std::exception& e) {
            rd.fail("region", e.what());
        }
    }
    Quad d{1, 1, 1, 1}, D{1, 1, 1, 1};
    if (doc.contains("d")) d = rd.quad(doc["d"], "d");
    if (doc.contains("D")) D = rd.quad(doc["D"], "D");
    try {
        cfg.dp = DParams(d, D);
    } catch (const std::exception& e) {
        rd.fail(doc.contains("d") ? "d" : "D", e.what());
    }
    if (doc.contains("j")) {
        const json& j = doc["j"];
        if (!j.is_string()) rd.fail("j", "expected \"star\", \"0\" or \"1\"");
        try {
            cfg.j = parse_parity(j.get<std::string>());
        } catch (const std::exception& e) {
            rd.fail("j", e.what());
        }
    }
    if (doc.contains("k")) cfg.k = static_cast<int>(rd.integer(doc["k"], "k"));
    if (doc.contains("X_ladder")) {
        const json& xs = rd.array(doc["X_ladder"], "X_ladder", 0, 10000);
        for (std::size_t i = 0; i < xs.size(); ++i)
            cfg.X_ladder.push_back(rd.rational(xs[i], "X_ladder[" + std::to_string(i) + "]"));
    }
    if (doc.contains("prime_cutoff")) cfg.prime_cutoff = rd.integer(doc["prime_cutoff"], "prime_cutoff");
    if (doc.contains("depth")) cfg.depth = static_cast<int>(rd.integer(doc["depth"], "depth"));
    if (doc.contains("two_adic_level")) cfg.n2 = static_cast<int>(rd.integer(doc["two_adic_level"], "two_adic_level"));
    if (doc.contains("workers")) cfg.workers = static_cast<int>(rd.integer(doc["workers"], "workers"));
    return cfg;
}

// Parses and checks every hypothesis; the message of a failed hypothesis names the field.
inline ExperimentConfig parse_and_validate(const std::string& text) {
    ExperimentConfig cfg = parse_config(text);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error("", 0, e.what());
    }
    return cfg;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", 0, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["forms"] = json::array();
    for (const auto& f : cfg.system.forms()) j["forms"].push_back({f.a, f.b});
    j["region"] = json::array();
    for (const auto& v : cfg.region.vertices())
        j["region"].push_back({detail::rational_json(v.x), detail::rational_json(v.y)});
    j["d"] = cfg.dp.d;
    j["D"] = cfg.dp.D;
    j["j"] = to_string(cfg.j);
    j["k"] = cfg.k;
    j["X_ladder"] = json::array();
    for (const auto& X : cfg.X_ladder) j["X_ladder"].push_back(detail::rational_json(X));
    j["prime_cutoff"] = cfg.prime_cutoff;
    j["depth"] = cfg.depth;
    j["two_adic_level"] = cfg.n2;
    j["workers"] = cfg.workers;
    return j;
}

inline std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

// ---------------------------------------------------------------- reports

// 17 significant digits; "nan" and "inf" spelled out.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Doubles go through a raw-number placeholder so the JSON text carries the same 17 digits as CSV.
class JsonWriter {
public:
    static json number(double x) {
        if (!std::isfinite(x)) return nullptr;
        return json::string_t(marker + format_double(x));
    }

    static std::string dump(const json& j, int indent = 2) {
        std::string s = j.dump(indent);
        const std::string quoted = "\"" + marker;
        for (std::size_t pos = s.find(quoted); pos != std::string::npos; pos = s.find(quoted, pos)) {
            const auto end = s.find('"', pos + quoted.size());
            s = s.substr(0, pos) + s.substr(pos + quoted.size(), end - pos - quoted.size()) + s.substr(end + 1);
        }
        return s;
    }

private:
    static inline const std::string marker = "@@twosq-num:";
};

inline json report_to_json(const DensityReport& r) {
    json j;
    j["delta"] = dyadic_string(r.delta);
    j["euler"] = JsonWriter::number(r.euler);
    j["euler_cutoff"] = r.euler_cutoff;
    j["arch"] = JsonWriter::number(r.arch);
    j["c"] = JsonWriter::number(r.c);
    j["route"] = r.route;
    j["depth"] = r.depth;
    j["det_gamma"] = r.det_gamma;
    j["max_last_term"] = JsonWriter::number(r.max_last_term);
    j["tail_heuristic"] = JsonWriter::number(r.tail_heuristic);
    j["tail_note"] = "heuristic size of the omitted primes p > euler_cutoff, not a bound";
    return j;
}

inline const char* ladder_csv_header = "X,S,S_over_X2,c,rel_err";

inline std::string ladder_csv(const std::vector<LadderRow>& rows) {
    std::string s = std::string(ladder_csv_header) + "\n";
    for (const auto& r : rows)
        s += to_string(r.X) + "," + std::to_string(r.S) + "," + format_double(r.S_over_X2) + "," + format_double(r.c) +
             "," + format_double(r.rel_err) + "\n";
    return s;
}

inline json ladder_json(const std::vector<LadderRow>& rows) {
    json a = json::array();
    for (const auto& r : rows)
        a.push_back({{"X", detail::rational_json(r.X)},
                     {"S", r.S},
                     {"S_over_X2", JsonWriter::number(r.S_over_X2)},
                     {"c", JsonWriter::number(r.c)},
                     {"rel_err", JsonWriter::number(r.rel_err)}});
    return a;
}

}  // namespace twosq
