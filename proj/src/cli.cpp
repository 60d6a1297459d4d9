#include "harmonize/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "harmonize/errors.hpp"
#include "harmonize/existence.hpp"
#include "harmonize/kernels.hpp"
#include "harmonize/report.hpp"
#include "harmonize/simulate.hpp"

namespace harmonize {

namespace {

struct HelpRequested : Error {
    using Error::Error;
};

const char* kCommands[] = {"check", "nt", "bounds", "simulate", "covtest"};

double parse_number(std::string_view tok, int column) {
    while (!tok.empty() && tok.front() == ' ') {
        tok.remove_prefix(1);
        ++column;
    }
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
        ++column;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw ParseError("expected a number, got '" + std::string(tok) + "'", 1,
                         column + static_cast<int>(ptr - tok.data()));
    return v;
}

std::vector<std::pair<std::string_view, int>> split(std::string_view s, char sep) {
    std::vector<std::pair<std::string_view, int>> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start),
                         static_cast<int>(start) + 1);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Config values become flags placed before the command line so explicit flags win.
std::vector<std::string> config_args(const std::string& path, std::string& command) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(path + ": invalid JSON", line, col);
    }
    if (!j.is_object()) throw ParseError(path + ": config must be a JSON object", 1, 1);
    auto scalar = [&path](const std::string& key, const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return v.dump();
        if (v.is_number()) return format_double(v.get<double>());
        throw ParseError(path + ": unsupported value for '" + key + "'", 1, 1);
    };
    std::vector<std::string> out;
    for (const auto& [key, v] : j.items()) {
        if (key == "command") {
            command = v.get<std::string>();
            continue;
        }
        std::string flag = "--" + key;
        for (char& c : flag)
            if (c == '_') c = '-';
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back(flag);
            continue;
        }
        std::string value;
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) value += (i > 0 ? (key == "points" ? ";" : ",") : "") + scalar(key, v[i]);
        } else {
            value = scalar(key, v);
        }
        out.push_back(flag);
        out.push_back(value);
    }
    return out;
}

double fbm_cov(double a, double b, double H) {
    return 0.5 * (std::pow(std::abs(a), 2 * H) + std::pow(std::abs(b), 2 * H) - std::pow(std::abs(a - b), 2 * H));
}

std::vector<double> reference_covariance(const RunConfig& cfg, const ControlSpec& spec, const OperatorSpec& op,
                                         const std::vector<FieldPoint>& pts) {
    const std::size_t np = pts.size();
    std::vector<double> ref(np * np, std::nan(""));
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            const FieldPoint& a = pts[i];
            const FieldPoint& b = pts[j];
            switch (spec.kind) {
                case ControlSpec::Kind::Fbm: ref[i * np + j] = fbm_cov(a.t, b.t, spec.H); break;
                case ControlSpec::Kind::Fbs: {
                    double r = fbm_cov(a.t, b.t, spec.H);
                    for (std::size_t k = 0; k < spec.Hj.size(); ++k) r *= fbm_cov(a.x[k], b.x[k], spec.Hj[k]);
                    ref[i * np + j] = r;
                    break;
                }
                case ControlSpec::Kind::Fbf: {
                    double na = a.t * a.t, nb = b.t * b.t, nd = (a.t - b.t) * (a.t - b.t);
                    for (std::size_t k = 0; k < a.x.size(); ++k) {
                        na += a.x[k] * a.x[k];
                        nb += b.x[k] * b.x[k];
                        nd += (a.x[k] - b.x[k]) * (a.x[k] - b.x[k]);
                    }
                    const double H = spec.H;
                    ref[i * np + j] = 0.5 * (std::pow(na, H) + std::pow(nb, H) - std::pow(nd, H));
                    break;
                }
                case ControlSpec::Kind::Solution:
                    // Only the variance has a closed reference: Var u(t, x) = I_t.
                    if (a.t == b.t && a.x == b.x && a.t > 0.0) {
                        const QuadResult r = i_t(op, *spec.nu, *spec.mu, a.t);
                        ref[i * np + j] = r.value;
                    }
                    break;
            }
        }
    }
    (void)cfg;
    return ref;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw Error("cannot open " + cfg.output + " for writing");
    f << text;
    if (!f) throw Error("failed writing " + cfg.output);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    if (text.empty()) throw ParseError("empty number list", 1, 1);
    const auto colon = split(text, ':');
    if (colon.size() == 3) {
        const double lo = parse_number(colon[0].first, colon[0].second);
        const double hi = parse_number(colon[1].first, colon[1].second);
        const double cnt = parse_number(colon[2].first, colon[2].second);
        if (!(lo > 0.0) || !(hi >= lo)) throw ParseError("log grid needs 0 < lo <= hi", 1, 1);
        if (cnt < 1.0 || cnt != std::floor(cnt)) throw ParseError("grid count must be a positive integer", 1, colon[2].second);
        const auto count = static_cast<std::size_t>(cnt);
        std::vector<double> g(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double f = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
            g[k] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
        }
        g.front() = lo;
        if (count > 1) g.back() = hi;
        return g;
    }
    if (colon.size() != 1) throw ParseError("expected v, v1,v2,... or lo:hi:count", 1, colon[1].second - 1);
    std::vector<double> g;
    for (const auto& [tok, col] : split(text, ',')) g.push_back(parse_number(tok, col));
    return g;
}

std::vector<FieldPoint> parse_points(const std::string& text) {
    std::vector<FieldPoint> pts;
    if (text.empty()) return pts;
    for (const auto& [item, col] : split(text, ';')) {
        FieldPoint p;
        const auto coords = split(item, ':');
        p.t = parse_number(coords[0].first, col + coords[0].second - 1);
        for (std::size_t k = 1; k < coords.size(); ++k)
            p.x.push_back(parse_number(coords[k].first, col + coords[k].second - 1));
        pts.push_back(std::move(p));
    }
    return pts;
}

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    std::vector<std::string> rest = args;
    if (!rest.empty() && !rest.front().empty() && rest.front()[0] != '-') {
        cfg.command = rest.front();
        rest.erase(rest.begin());
    }

    std::string config_path;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == "--config" && i + 1 < rest.size()) config_path = rest[i + 1];
        if (rest[i].rfind("--config=", 0) == 0) config_path = rest[i].substr(9);
    }
    std::vector<std::string> argv;
    if (!config_path.empty()) {
        std::string cfg_command;
        argv = config_args(config_path, cfg_command);
        if (cfg.command.empty()) cfg.command = cfg_command;
    }
    argv.insert(argv.end(), rest.begin(), rest.end());

    CLI::App app{"Existence checks, N_t curves, bound verification and spectral simulation", "harmonize"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.usage("Usage: harmonize <check|nt|bounds|simulate|covtest> [OPTIONS]");
    std::string t_text, psi_text, hj_text, points_text;
    app.add_option("--config", config_path, "JSON file mirroring the flags");
    app.add_option("--equation", cfg.equation, "heat | wave")->check(CLI::IsMember({"heat", "wave"}));
    app.add_option("--beta", cfg.beta, "symbol exponent");
    app.add_option("--cbeta", cfg.c_beta, "symbol constant (heat only)");
    app.add_option("--dim", cfg.d, "spatial dimension d");
    app.add_option("--nu", cfg.nu, "temporal spectral measure: riesz:<g> | bessel:<g> | scaled:<c>:<spec>");
    app.add_option("--mu", cfg.mu, "spatial measure: lebesgue | riesz:<a> | bessel:<a> | scaled:<c>:<spec>");
    app.add_option("--t", t_text, "t values: v | v1,v2 | lo:hi:count");
    app.add_option("--psi", psi_text, "psi values: v | v1,v2 | lo:hi:count");
    app.add_option("--form", cfg.form, "wave reference form")
        ->check(CLI::IsMember({"cond-hyp", "hyperbolic-cond", "hyperbolic-cond2"}));
    app.add_option("--lambda", cfg.lambda, "grid half-width");
    app.add_option("--n", cfg.n, "cells per axis (even)");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--replicates", cfg.replicates, "Monte Carlo replicates");
    app.add_option("--noise", cfg.noise, "fbm | fbs | fbf | solution")
        ->check(CLI::IsMember({"fbm", "fbs", "fbf", "solution"}));
    app.add_option("--H", cfg.H, "Hurst index in time");
    app.add_option("--Hj", hj_text, "spatial Hurst indices (fbs)");
    app.add_option("--points", points_text, "t[:x1...] separated by ';'");
    app.add_option("--grid-out", cfg.grid_out, "write the HGRD1 grid file");
    app.add_option("--output", cfg.output, "output path (default stdout)");
    app.add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--strict", cfg.strict, "exit 1 when the decision is No");

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw PreconditionError(e.what());
    }

    if (cfg.command.empty()) throw PreconditionError("missing command (check, nt, bounds, simulate, covtest)");
    bool known = false;
    for (const char* c : kCommands) known = known || cfg.command == c;
    if (!known) throw PreconditionError("unknown command '" + cfg.command + "'");
    if (!t_text.empty()) cfg.t = parse_grid(t_text);
    if (!psi_text.empty()) cfg.psi = parse_grid(psi_text);
    if (!hj_text.empty()) cfg.Hj = parse_grid(hj_text);
    cfg.points = parse_points(points_text);
    if (cfg.format.empty()) cfg.format = (cfg.command == "check" || cfg.command == "bounds") ? "json" : "csv";
    return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const char* stage = "measures";
    try {
        if (cfg.equation == "wave" && cfg.c_beta != 1.0) throw PreconditionError("the wave symbol uses c_beta = 1");
        const OperatorSpec op = cfg.equation == "wave" ? OperatorSpec::wave(cfg.beta, cfg.d)
                                                       : OperatorSpec::heat(cfg.beta, cfg.d, cfg.c_beta);
        const SpectralDensity1D nu = parse_density(cfg.nu);
        const bool json = cfg.format == "json";

        if (cfg.command == "check" || cfg.command == "bounds") {
            const SpatialMeasure mu = cfg.mu.empty() ? SpatialMeasure::lebesgue(cfg.d) : parse_spatial(cfg.mu, cfg.d);
            stage = "existence";
            const ExistenceReport rep = decide_existence(op, nu, mu);
            bool ok = true;
            if (cfg.command == "check") {
                stage = "report";
                emit(cfg, out, json ? existence_json(rep) : existence_csv(rep).str());
            } else {
                const BoundReport b = verify_bounds(op, nu, cfg.t, cfg.psi, wave_form_from(cfg.form));
                ok = b.all_pass();
                stage = "report";
                emit(cfg, out, json ? bounds_json(rep, b) : bounds_csv(b).str());
            }
            if (cfg.strict && (rep.decision == Decision::No || !ok)) return 1;
            return 0;
        }

        if (cfg.command == "nt") {
            stage = "kernels";
            CsvTable table;
            JsonWriter w;
            w.begin_object();
            w.key("schema").value(kSchema);
            w.key("command").value("nt");
            w.key("equation").value(cfg.equation);
            w.key("nu").value(nu.describe());
            if (cfg.mu.empty()) {
                const std::size_t np = cfg.psi.size();
                std::vector<QuadResult> res(cfg.t.size() * np);
                for_each_index(res.size(), Exec::Parallel, [&](std::size_t k) {
                    res[k] = n_t_quad(op, nu, cfg.psi[k % np], cfg.t[k / np]);
                });
                table.header = {"t", "psi", "n_t", "abs_error"};
                w.key("rows").begin_array();
                for (std::size_t k = 0; k < res.size(); ++k) {
                    const double t = cfg.t[k / np];
                    const double psi = cfg.psi[k % np];
                    if (!res[k].converged)
                        throw QuadratureError("N_t did not converge at t=" + format_double(t) + ", psi=" + format_double(psi),
                                              res[k].abs_error_estimate);
                    table.rows.push_back({format_double(t), format_double(psi), format_double(res[k].value),
                                          format_double(res[k].abs_error_estimate)});
                    w.begin_object().key("t").value(t).key("psi").value(psi).key("n_t").value(res[k].value);
                    w.key("abs_error").value(res[k].abs_error_estimate).end_object();
                }
            } else {
                const SpatialMeasure mu = parse_spatial(cfg.mu, cfg.d);
                w.key("mu").value(mu.describe());
                table.header = {"t", "i_t", "abs_error"};
                w.key("rows").begin_array();
                for (double t : cfg.t) {
                    const QuadResult r = i_t(op, nu, mu, t);
                    table.rows.push_back({format_double(t), format_double(r.value), format_double(r.abs_error_estimate)});
                    w.begin_object().key("t").value(t).key("i_t").value(r.value);
                    w.key("abs_error").value(r.abs_error_estimate).end_object();
                }
            }
            w.end_array().end_object();
            stage = "report";
            emit(cfg, out, json ? w.str() : table.str());
            return 0;
        }

        // simulate / covtest
        stage = "simulate";
        ControlSpec spec;
        FieldKind kind = FieldKind::Fbm;
        if (cfg.noise == "fbm") {
            spec = ControlSpec::fbm(cfg.H);
        } else if (cfg.noise == "fbs") {
            spec = ControlSpec::fbs(cfg.H, cfg.Hj);
            kind = FieldKind::Rect;
        } else if (cfg.noise == "fbf") {
            spec = ControlSpec::fbf(cfg.H, cfg.d);
            kind = FieldKind::Star;
        } else {
            const SpatialMeasure mu = cfg.mu.empty() ? SpatialMeasure::lebesgue(cfg.d) : parse_spatial(cfg.mu, cfg.d);
            spec = ControlSpec::solution(nu, mu);
            kind = FieldKind::Solution;
        }
        std::vector<FieldPoint> pts = cfg.points;
        if (pts.empty()) pts.push_back({1.0, std::vector<double>(static_cast<std::size_t>(spec.d), 0.0)});

        const HermitianGrid grid = build_grid(spec, cfg.lambda, cfg.n);
        if (!cfg.grid_out.empty()) write_grid(grid, cfg.grid_out);
        const Generator gen = field_generator(grid, kind, pts, kind == FieldKind::Solution ? &op : nullptr);
        const std::size_t np = pts.size();

        if (cfg.command == "simulate") {
            std::vector<double> vals(cfg.replicates * np);
            for_each_index(cfg.replicates, Exec::Parallel, [&](std::size_t r) {
                gen(cfg.seed, r, std::span<double>(vals.data() + r * np, np));
            });
            stage = "report";
            CsvTable table;
            table.header = {"replicate", "point", "value"};
            JsonWriter w;
            w.begin_object();
            w.key("schema").value(kSchema);
            w.key("command").value("simulate");
            w.key("control").value(spec.describe());
            w.key("seed").value(static_cast<long long>(cfg.seed));
            w.key("points").begin_array();
            for (const FieldPoint& p : pts) w.value(point_label(p));
            w.end_array();
            w.key("samples").begin_array();
            for (std::size_t r = 0; r < cfg.replicates; ++r) {
                w.begin_array();
                for (std::size_t p = 0; p < np; ++p) {
                    w.value(vals[r * np + p]);
                    table.rows.push_back({std::to_string(r), point_label(pts[p]), format_double(vals[r * np + p])});
                }
                w.end_array();
            }
            w.end_array().end_object();
            emit(cfg, out, json ? w.str() : table.str());
            return 0;
        }

        MomentReport m;
        m.control = spec.describe();
        m.points = pts;
        m.table = mc_moments(gen, np, cfg.replicates, cfg.seed);
        stage = "kernels";
        m.reference_cov = reference_covariance(cfg, spec, op, pts);
        stage = "report";
        emit(cfg, out, json ? moments_json(m) : moments_csv(m).str());
        return 0;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
    } catch (const DivergenceError& e) {
        err << stage << ": " << e.what() << " (verdict " << to_string(e.verdict.verdict) << ")\n";
    } catch (const std::exception& e) {
        err << stage << ": " << e.what() << '\n';
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const HelpRequested& h) {
        out << h.what();
        return 0;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "usage: " << e.what() << '\n';
        return 2;
    }
    return execute(cfg, out, err);
}

}  // namespace harmonize
