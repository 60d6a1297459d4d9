#include "harmonize/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "harmonize/errors.hpp"

namespace harmonize {

namespace {

using nlohmann::json;

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_num(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

void json_double(JsonWriter& w, double x) {
    if (std::isfinite(x))
        w.value(x);
    else
        w.null();
}

double json_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

void write_verdict(JsonWriter& w, const ExistenceReport& r) {
    w.key("oracle").begin_object();
    w.key("run").value(r.oracle_run);
    w.key("verdict").value(to_string(r.oracle.verdict));
    w.key("growth_exponent");
    json_double(w, r.oracle.growth_exponent_estimate);
    w.key("outer_exponent");
    json_double(w, r.oracle.outer_exponent);
    w.key("inner_exponent");
    json_double(w, r.oracle.inner_exponent);
    w.end_object();
}

Verdict verdict_from(const std::string& s) {
    if (s == "Convergent") return Verdict::Convergent;
    if (s == "Divergent") return Verdict::Divergent;
    return Verdict::Inconclusive;
}

void read_existence(const json& j, ExistenceReport& r, const char* exponent_key) {
    const std::string d = j.at("decision").get<std::string>();
    r.decision = d == "Yes" ? Decision::Yes : d == "No" ? Decision::No : Decision::Inconclusive;
    r.reduced.exponent = json_number(j.at(exponent_key));
    const std::string src = j.at("source").get<std::string>();
    r.reduced.source = src == "cond-hyp"          ? ConditionSource::CondHyp
                       : src == "hyperbolic-cond" ? ConditionSource::HyperbolicCond
                                                  : ConditionSource::ParabolicCond;
    r.reduced.analytic = j.at("analytic").get<bool>();
    const json& o = j.at("oracle");
    r.oracle_run = o.at("run").get<bool>();
    r.oracle.verdict = verdict_from(o.at("verdict").get<std::string>());
    r.oracle.growth_exponent_estimate = json_number(o.at("growth_exponent"));
    r.oracle.outer_exponent = json_number(o.at("outer_exponent"));
    r.oracle.inner_exponent = json_number(o.at("inner_exponent"));
    r.agreement = j.at("agreement").get<bool>();
    r.note = j.at("note").get<std::string>();
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 1, static_cast<int>(e.byte));
    }
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void JsonWriter::newline() {
    out_ += '\n';
    out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::before_value() {
    if (after_key_) {
        after_key_ = false;
        return;
    }
    if (!stack_.empty()) {
        if (stack_.back().object) throw Error("JSON value without a key");
        if (stack_.back().count++ > 0) out_ += ',';
        newline();
    }
}

JsonWriter& JsonWriter::begin_object() {
    before_value();
    out_ += '{';
    stack_.push_back({true, 0});
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    const bool empty = stack_.back().count == 0;
    stack_.pop_back();
    if (!empty) newline();
    out_ += '}';
    if (stack_.empty()) out_ += '\n';
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    before_value();
    out_ += '[';
    stack_.push_back({false, 0});
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    const bool empty = stack_.back().count == 0;
    stack_.pop_back();
    if (!empty) newline();
    out_ += ']';
    if (stack_.empty()) out_ += '\n';
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    if (stack_.empty() || !stack_.back().object) throw Error("JSON key outside an object");
    if (stack_.back().count++ > 0) out_ += ',';
    newline();
    out_ += '"' + escape(k) + "\": ";
    after_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double x) {
    before_value();
    out_ += std::isfinite(x) ? format_double(x) : "null";
    return *this;
}

JsonWriter& JsonWriter::value(long long x) {
    before_value();
    out_ += std::to_string(x);
    return *this;
}

JsonWriter& JsonWriter::value(bool b) {
    before_value();
    out_ += b ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& s) {
    before_value();
    out_ += '"' + escape(s) + '"';
    return *this;
}

JsonWriter& JsonWriter::null() {
    before_value();
    out_ += "null";
    return *this;
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

std::string existence_json(const ExistenceReport& r, const std::string& command) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(kSchema);
    w.key("command").value(command);
    w.key("decision").value(to_string(r.decision));
    w.key("exponent");
    json_double(w, r.reduced.exponent);
    w.key("source").value(to_string(r.reduced.source));
    w.key("analytic").value(r.reduced.analytic);
    write_verdict(w, r);
    w.key("agreement").value(r.agreement);
    w.key("note").value(r.note);
    w.end_object();
    return w.str();
}

CsvTable existence_csv(const ExistenceReport& r) {
    CsvTable t;
    t.header = {"decision", "exponent", "source", "analytic", "oracle_run", "oracle_verdict", "growth_exponent",
                "agreement", "note"};
    t.rows.push_back({to_string(r.decision), csv_num(r.reduced.exponent), to_string(r.reduced.source),
                      csv_bool(r.reduced.analytic), csv_bool(r.oracle_run), to_string(r.oracle.verdict),
                      csv_num(r.oracle.growth_exponent_estimate), csv_bool(r.agreement), r.note});
    return t;
}

ExistenceReport existence_from_json(const std::string& text) {
    const json j = parse_json(text);
    try {
        ExistenceReport r;
        read_existence(j, r, "exponent");
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed existence report: ") + e.what(), 1, 1);
    }
}

std::string bounds_json(const ExistenceReport& existence, const BoundReport& b) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(kSchema);
    w.key("command").value("bounds");
    w.key("equation").value(to_string(b.kind));
    w.key("form").value(to_string(b.form));
    w.key("decision").value(to_string(existence.decision));
    w.key("reduced_exponent");
    json_double(w, existence.reduced.exponent);
    w.key("source").value(to_string(existence.reduced.source));
    w.key("analytic").value(existence.reduced.analytic);
    write_verdict(w, existence);
    w.key("agreement").value(existence.agreement);
    w.key("note").value(existence.note);
    w.key("all_pass").value(b.all_pass());
    w.key("constants").begin_array();
    for (const auto& [t, named] : b.constants) {
        w.begin_object();
        w.key("t").value(t);
        for (const auto& [name, v] : named) {
            w.key(name);
            json_double(w, v);
        }
        w.end_object();
    }
    w.end_array();
    w.key("rows").begin_array();
    for (const BoundRow& row : b.rows) {
        w.begin_object();
        w.key("t").value(row.t);
        w.key("psi").value(row.psi);
        w.key("n_t");
        json_double(w, row.n_t);
        w.key("reference");
        json_double(w, row.reference);
        w.key("lower");
        json_double(w, row.lower);
        w.key("upper");
        json_double(w, row.upper);
        w.key("pass").value(row.pass);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

CsvTable bounds_csv(const BoundReport& b) {
    CsvTable t;
    t.header = {"t", "psi", "n_t", "reference", "lower", "upper", "pass"};
    for (const BoundRow& r : b.rows)
        t.rows.push_back({csv_num(r.t), csv_num(r.psi), csv_num(r.n_t), csv_num(r.reference), csv_num(r.lower),
                          csv_num(r.upper), csv_bool(r.pass)});
    return t;
}

BoundReport bounds_from_json(const std::string& text) {
    const json j = parse_json(text);
    try {
        BoundReport b;
        b.kind = j.at("equation").get<std::string>() == "wave" ? EquationKind::Wave : EquationKind::Heat;
        b.form = wave_form_from(j.at("form").get<std::string>());
        for (const json& c : j.at("constants")) {
            std::map<std::string, double> named;
            for (const auto& [k, v] : c.items())
                if (k != "t") named[k] = json_number(v);
            b.constants.emplace_back(c.at("t").get<double>(), std::move(named));
        }
        for (const json& r : j.at("rows")) {
            BoundRow row;
            row.t = r.at("t").get<double>();
            row.psi = r.at("psi").get<double>();
            row.n_t = json_number(r.at("n_t"));
            row.reference = json_number(r.at("reference"));
            row.lower = json_number(r.at("lower"));
            row.upper = json_number(r.at("upper"));
            row.pass = r.at("pass").get<bool>();
            b.rows.push_back(row);
        }
        return b;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed bound report: ") + e.what(), 1, 1);
    }
}

std::string point_label(const FieldPoint& p) {
    std::string s = format_double(p.t);
    for (double x : p.x) s += ":" + format_double(x);
    return s;
}

std::string moments_json(const MomentReport& m) {
    const MomentTable& t = m.table;
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(kSchema);
    w.key("command").value("covtest");
    w.key("control").value(m.control);
    w.key("replicates").value(static_cast<long long>(t.replicates));
    w.key("points").begin_array();
    for (const FieldPoint& p : m.points) w.value(point_label(p));
    w.end_array();
    w.key("mean").begin_array();
    for (double v : t.mean) w.value(v);
    w.end_array();
    w.key("mean_se").begin_array();
    for (double v : t.mean_se) w.value(v);
    w.end_array();
    w.key("entries").begin_array();
    for (std::size_t i = 0; i < t.points; ++i) {
        for (std::size_t j = i; j < t.points; ++j) {
            w.begin_object();
            w.key("i").value(static_cast<long long>(i));
            w.key("j").value(static_cast<long long>(j));
            w.key("cov").value(t.cov_at(i, j));
            w.key("cov_se").value(t.cov_se_at(i, j));
            w.key("reference");
            json_double(w, m.reference_cov.empty() ? std::nan("") : m.reference_cov[i * t.points + j]);
            w.end_object();
        }
    }
    w.end_array();
    w.end_object();
    return w.str();
}

CsvTable moments_csv(const MomentReport& m) {
    const MomentTable& t = m.table;
    CsvTable out;
    out.header = {"i", "j", "point_i", "point_j", "mean_i", "mean_se_i", "cov", "cov_se", "reference"};
    for (std::size_t i = 0; i < t.points; ++i) {
        for (std::size_t j = i; j < t.points; ++j) {
            const double ref = m.reference_cov.empty() ? std::nan("") : m.reference_cov[i * t.points + j];
            out.rows.push_back({std::to_string(i), std::to_string(j), point_label(m.points[i]),
                                point_label(m.points[j]), csv_num(t.mean[i]), csv_num(t.mean_se[i]),
                                csv_num(t.cov_at(i, j)), csv_num(t.cov_se_at(i, j)), csv_num(ref)});
        }
    }
    return out;
}

}  // namespace harmonize
