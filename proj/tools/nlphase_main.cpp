// nlphase_main.cpp
// Command-line front end: probe preparation reports, sensitivity sweeps,
// AECS coefficient dumps and lossy sweeps, emitted as CSV/JSON tables
// with provenance headers.
//
// Exit codes: 0 success, 1 numeric/property failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <random>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlphase/loss_oracle.hpp"

namespace {

constexpr const char* kVersion = "nlphase 1.0.0";

using nlphase::Parity;
using nlphase::StateSpec;
using nlphase::Truncation;
using nlphase::TwoModeState;

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Table model: typed cells so CSV and JSON render from the same data.

struct Cell {
    enum Kind { Str, Num, Int, Empty } kind = Empty;
    std::string s;
    double d = 0;
    long long i = 0;

    static Cell str(std::string v) { return {Str, std::move(v), 0, 0}; }
    static Cell num(double v) { return {Num, {}, v, 0}; }
    static Cell integer(long long v) { return {Int, {}, 0, v}; }
    static Cell empty() { return {}; }
};

struct Table {
    std::vector<std::string> comments;  // without leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::ostream& os, const Table& t) {
    for (const auto& c : t.comments) os << "# " << c << "\n";
    for (size_t i = 0; i < t.header.size(); ++i)
        os << (i ? "," : "") << csv_escape(t.header[i]);
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            switch (row[i].kind) {
                case Cell::Str: os << csv_escape(row[i].s); break;
                case Cell::Num: os << fmt(row[i].d); break;
                case Cell::Int: os << row[i].i; break;
                case Cell::Empty: break;
            }
        }
        os << "\n";
    }
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

void write_json(std::ostream& os, const Table& t) {
    os << "{\n  \"version\": \"" << json_escape(kVersion) << "\",\n";
    os << "  \"provenance\": [";
    for (size_t i = 0; i < t.comments.size(); ++i)
        os << (i ? ", " : "") << "\"" << json_escape(t.comments[i]) << "\"";
    os << "],\n  \"rows\": [\n";
    for (size_t r = 0; r < t.rows.size(); ++r) {
        os << "    {";
        for (size_t i = 0; i < t.header.size(); ++i) {
            os << (i ? ", " : "") << "\"" << json_escape(t.header[i]) << "\": ";
            const Cell& c = t.rows[r][i];
            switch (c.kind) {
                case Cell::Str: os << "\"" << json_escape(c.s) << "\""; break;
                case Cell::Num:
                    if (std::isinf(c.d))
                        os << "\"" << fmt(c.d) << "\"";
                    else
                        os << fmt(c.d);
                    break;
                case Cell::Int: os << c.i; break;
                case Cell::Empty: os << "null"; break;
            }
        }
        os << "}" << (r + 1 < t.rows.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
}

void emit(const Table& t, const std::string& path, const std::string& format) {
    std::ostringstream buf;
    if (format == "json")
        write_json(buf, t);
    else
        write_csv(buf, t);
    if (path.empty() || path == "-") {
        std::cout << buf.str();
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + path);
        f << buf.str();
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers.

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<int> parse_int_range(const std::string& spec) {
    const auto parts = split(spec, ':');
    try {
        if (parts.size() == 1) return {std::stoi(parts[0])};
        const int a = std::stoi(parts[0]);
        const int b = std::stoi(parts[1]);
        const int step = parts.size() > 2 ? std::stoi(parts[2]) : 1;
        if (parts.size() > 3 || step <= 0 || b < a)
            throw UsageError("bad integer range: " + spec);
        std::vector<int> out;
        for (int v = a; v <= b; v += step) out.push_back(v);
        return out;
    } catch (const std::invalid_argument&) {
        throw UsageError("bad integer range: " + spec);
    }
}

std::vector<double> parse_real_range(const std::string& spec) {
    const auto parts = split(spec, ':');
    try {
        if (parts.size() == 1) return {std::stod(parts[0])};
        const double a = std::stod(parts[0]);
        const double b = std::stod(parts[1]);
        const double step = parts.size() > 2 ? std::stod(parts[2]) : 0.005;
        if (parts.size() > 3 || step <= 0 || b < a)
            throw UsageError("bad real range: " + spec);
        std::vector<double> out;
        // count-based stepping avoids accumulation drift on the grid
        const int n = static_cast<int>(std::floor((b - a) / step + 0.5));
        for (int j = 0; j <= n; ++j) {
            const double v = a + j * step;
            if (v <= b + 1e-12) out.push_back(std::min(v, b));
        }
        return out;
    } catch (const std::invalid_argument&) {
        throw UsageError("bad real range: " + spec);
    }
}

std::vector<std::string> parse_states(const std::string& spec) {
    std::vector<std::string> out;
    for (const auto& s : split(spec, ',')) {
        if (s.empty()) continue;
        if (s != "noon" && s != "ecs-" && s != "ecs+" && s != "aecs")
            throw UsageError("unknown state family: " + s);
        out.push_back(s);
    }
    if (out.empty()) throw UsageError("empty state list");
    return out;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

// Loads --config JSON (if present) and appends "--key=value" for every key
// not already given on the command line; flags therefore take precedence.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file: " + path);
    nlohmann::json cfg;
    try {
        f >> cfg;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("bad config file: ") + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
    std::vector<std::string> out = args;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string flag = "--" + it.key();
        bool present = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (present) continue;
        std::string v;
        if (it.value().is_string())
            v = it.value().get<std::string>();
        else
            v = it.value().dump();
        out.push_back(flag + "=" + v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// sensitivity

struct SensCell {
    bool feasible = true;
    double nbar = 0, alpha = 0, qfi = 0, delta_phi = 0;
    int cutoff = -1;  // -1: closed form, no truncation involved
};

int cmd_sensitivity(const std::string& states_arg, const std::string& k_arg,
                    const std::string& n_arg, double eps, const std::string& out,
                    const std::string& format, const std::string& cmdline) {
    const auto states = parse_states(states_arg);
    std::vector<int> ks;
    for (const auto& p : split(k_arg, ',')) ks.push_back(std::stoi(p));
    const auto ns = parse_int_range(n_arg);
    for (int k : ks)
        if (k < 1) throw UsageError("k must be >= 1");
    for (int n : ns)
        if (n < 1) throw UsageError("N must be >= 1");

    // noon reference sensitivities, needed for the diff column
    std::map<std::pair<int, int>, double> noon_dp;
    for (int k : ks)
        for (int n : ns) noon_dp[{k, n}] = nlphase::noon_sensitivity(n, k).delta_phi;

    Table t;
    t.comments = {kVersion, "command: " + cmdline, "tail_epsilon: " + fmt(eps)};
    t.header = {"state", "k", "N", "nbar", "alpha", "qfi", "delta_phi", "diff_vs_noon", "status"};

    for (const auto& st : states) {
        // matched states are k-independent: build/match once per N
        std::map<int, SensCell> base;  // alpha / state per N (k filled later)
        std::map<int, TwoModeState> aecs_states;
        for (int n : ns) {
            SensCell c;
            const double nbar = n / 2.0;
            c.nbar = nbar;
            try {
                if (st == "noon") {
                    c.alpha = 0;
                } else if (st == "ecs-") {
                    c.alpha = nlphase::match_alpha(nbar, Parity::Odd);
                } else if (st == "ecs+") {
                    c.alpha = nlphase::match_alpha(nbar, Parity::Even);
                } else {  // aecs
                    const double a0 = nlphase::match_aecs_alpha0(nbar);
                    c.alpha = std::sqrt(2.0) * a0;  // alpha_A
                    const Truncation tr = nlphase::adapt_aecs(a0, eps);
                    c.cutoff = tr.cutoff;
                    aecs_states.emplace(n, nlphase::aecs(a0, tr));
                }
            } catch (const std::domain_error&) {
                c.feasible = false;
            }
            base.emplace(n, c);
        }
        for (int k : ks) {
            for (int n : ns) {
                SensCell c = base.at(n);
                std::vector<Cell> row{Cell::str(st), Cell::integer(k), Cell::integer(n),
                                      Cell::num(c.nbar)};
                if (!c.feasible) {
                    row.push_back(Cell::empty());
                    row.push_back(Cell::empty());
                    row.push_back(Cell::empty());
                    row.push_back(Cell::empty());
                    row.push_back(Cell::str("infeasible"));
                    t.rows.push_back(std::move(row));
                    continue;
                }
                nlphase::QfiReport rep;
                if (st == "noon") {
                    rep = nlphase::noon_sensitivity(n, k);
                    row.push_back(Cell::empty());
                } else if (st == "aecs") {
                    rep = nlphase::pure_qfi(aecs_states.at(n), k);
                    row.push_back(Cell::num(c.alpha));
                } else {
                    rep = nlphase::ecs_qfi_series(
                        c.alpha, st == "ecs-" ? Parity::Odd : Parity::Even, k);
                    row.push_back(Cell::num(c.alpha));
                }
                row.push_back(Cell::num(rep.qfi));
                row.push_back(Cell::num(rep.delta_phi));
                row.push_back(Cell::num(noon_dp.at({k, n}) - rep.delta_phi));
                row.push_back(Cell::str("ok"));
                t.rows.push_back(std::move(row));
            }
        }
        for (const auto& [n, c] : base)
            if (c.cutoff >= 0)
                t.comments.push_back("cutoff " + st + " N=" + std::to_string(n) + ": " +
                                     std::to_string(c.cutoff));
    }
    emit(t, out, format);
    return 0;
}

// ---------------------------------------------------------------------------
// coeffs

int cmd_coeffs(double alpha_a, double eps, const std::string& out,
               const std::string& profile_out, const std::string& format,
               const std::string& cmdline) {
    if (!(alpha_a > 0)) throw UsageError("alphaA must be > 0");
    const double a0 = alpha_a / std::sqrt(2.0);
    const Truncation tr = nlphase::adapt_aecs(a0, eps);
    const TwoModeState s = nlphase::aecs(a0, tr);
    const auto h = nlphase::h_coefficients(s);

    Table t;
    t.comments = {kVersion, "command: " + cmdline, "tail_epsilon: " + fmt(eps),
                  "cutoff aecs: " + std::to_string(tr.cutoff),
                  "alpha_a: " + fmt(alpha_a), "alpha0: " + fmt(a0),
                  "r0: " + fmt(nlphase::aecs_squeezing(a0))};
    t.header = {"m", "mprime", "re_h", "im_h"};
    for (const auto& c : h)
        t.rows.push_back({Cell::integer(c.m), Cell::integer(c.mprime), Cell::num(c.value),
                          Cell::num(0.0)});
    emit(t, out, format);

    if (!profile_out.empty()) {
        const nlphase::SingleModeState coh = nlphase::coherent(alpha_a, tr);
        Table p;
        p.comments = t.comments;
        p.header = {"m", "abs_h_m0", "coherent_amplitude"};
        const auto& cmat = s.coeffs();
        for (int m = 1; m < s.dim(); ++m)
            p.rows.push_back({Cell::integer(m), Cell::num(std::abs(cmat(m, 0))),
                              Cell::num(std::abs(coh.amplitude(m)))});
        emit(p, profile_out, format);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// loss

int cmd_loss(const std::string& states_arg, const std::string& k_arg,
             const std::string& t_arg, double nbar, bool oracle, int oracle_cutoff,
             int oracle_max_cutoff, double eps, const std::string& out,
             const std::string& format, const std::string& cmdline) {
    const auto states = parse_states(states_arg);
    std::vector<int> ks;
    for (const auto& p : split(k_arg, ',')) ks.push_back(std::stoi(p));
    for (int k : ks)
        if (k != 1 && k != 2) throw UsageError("loss bounds require k in {1,2}");
    const auto ts = parse_real_range(t_arg);
    for (double T : ts)
        if (!(T >= 0.0 && T <= 1.0)) throw UsageError("transmission must lie in [0,1]");
    if (!(nbar > 0)) throw UsageError("nbar must be > 0");
    if (oracle && oracle_cutoff > oracle_max_cutoff)
        throw UsageError("oracle cutoff " + std::to_string(oracle_cutoff) +
                         " exceeds the configured maximum " + std::to_string(oracle_max_cutoff) +
                         "; raise --oracle-max-cutoff or lower --oracle-cutoff");

    Table t;
    t.comments = {kVersion, "command: " + cmdline, "tail_epsilon: " + fmt(eps),
                  "nbar: " + fmt(nbar)};
    t.header = {"state", "k", "T", "cq", "delta_phi_bound"};
    if (oracle) {
        t.header.push_back("qfi_exact");
        t.header.push_back("delta_phi_exact");
        t.comments.push_back("oracle_cutoff: " + std::to_string(oracle_cutoff));
    }

    bool dominance_ok = true;
    const int noon_n = static_cast<int>(std::lround(2.0 * nbar));
    for (const auto& st : states) {
        // resource matching at the shared nbar
        std::optional<nlphase::MomentSet> moments;
        std::optional<TwoModeState> oracle_state;
        std::string match_note;
        if (st == "noon") {
            if (std::abs(noon_n - 2.0 * nbar) > 1e-9)
                throw UsageError("noon requires 2*nbar to be an integer");
            moments = nlphase::moments_of(StateSpec::noon(noon_n));
            if (oracle)
                oracle_state = nlphase::noon(noon_n, Truncation(oracle_cutoff, 1e-6));
            match_note = "noon N=" + std::to_string(noon_n);
        } else if (st == "ecs-" || st == "ecs+") {
            const Parity p = st == "ecs-" ? Parity::Odd : Parity::Even;
            const double alpha = nlphase::match_alpha(nbar, p);
            moments = nlphase::moments_of(StateSpec::ecs(alpha, p));
            if (oracle) oracle_state = nlphase::ecs(alpha, p, Truncation(oracle_cutoff, 1e-6));
            match_note = st + " alpha=" + fmt(alpha);
        } else {
            const double a0 = nlphase::match_aecs_alpha0(nbar);
            const Truncation tr = nlphase::adapt_aecs(a0, eps);
            moments = nlphase::moments_of(nlphase::aecs(a0, tr));
            if (oracle) oracle_state = nlphase::aecs(a0, Truncation(oracle_cutoff, 1e-6));
            match_note = "aecs alpha0=" + fmt(a0) + " cutoff=" + std::to_string(tr.cutoff);
        }
        t.comments.push_back("matched " + match_note);

        for (int k : ks) {
            for (double T : ts) {
                const auto b = nlphase::lossy_sensitivity(*moments, nlphase::LossModel(T), k);
                std::vector<Cell> row{Cell::str(st), Cell::integer(k), Cell::num(T),
                                      Cell::num(b.cq), Cell::num(b.delta_phi_bound)};
                if (oracle) {
                    const double f =
                        nlphase::mixed_qfi_exact(nlphase::loss_channel(*oracle_state, T, k));
                    row.push_back(Cell::num(f));
                    row.push_back(Cell::num(
                        f > 0 ? 1.0 / std::sqrt(f) : std::numeric_limits<double>::infinity()));
                    if (b.cq < f - 1e-6) dominance_ok = false;
                }
                t.rows.push_back(std::move(row));
            }
        }
    }
    emit(t, out, format);
    if (!dominance_ok) {
        std::cerr << "error: bound dominance violated (cq < qfi_exact beyond slack)\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// prepare

int cmd_prepare(const std::string& family, int N, double alpha, double alpha0, double r,
                double eta, double eps, const std::string& out, const std::string& cmdline) {
    std::ostringstream js;
    js << "{\n  \"version\": \"" << json_escape(kVersion) << "\",\n";
    js << "  \"command\": \"" << json_escape(cmdline) << "\",\n";
    js << "  \"family\": \"" << json_escape(family) << "\",\n";

    auto finish = [&](const std::string& params, double mean_photon, int cutoff,
                      std::optional<double> fid, std::optional<double> succ) {
        js << "  \"params\": {" << params << "},\n";
        js << "  \"mean_photon\": " << fmt(mean_photon) << ",\n";
        if (fid) js << "  \"fidelity_to_ideal\": " << fmt(*fid) << ",\n";
        if (succ) js << "  \"success_probability\": " << fmt(*succ) << ",\n";
        js << "  \"tail_epsilon\": " << fmt(eps) << ",\n";
        js << "  \"cutoff\": " << cutoff << "\n}\n";
        if (out.empty() || out == "-") {
            std::cout << js.str();
        } else {
            std::ofstream f(out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file: " + out);
            f << js.str();
        }
        return 0;
    };

    if (family == "noon") {
        if (N < 1) throw UsageError("prepare noon requires --N >= 1");
        const Truncation tr(std::max(N, 4), eps);
        const TwoModeState s = nlphase::noon(N, tr);
        return finish("\"n\": " + std::to_string(N), nlphase::number_moment(s, 2, 1),
                      tr.cutoff, std::nullopt, std::nullopt);
    }
    if (family == "ecs-" || family == "ecs+") {
        const Parity p = family == "ecs-" ? Parity::Odd : Parity::Even;
        if (!(alpha > 0)) throw UsageError("prepare " + family + " requires --alpha > 0");
        const Truncation tr = nlphase::adapt_coherent(alpha, eps);
        const TwoModeState s = nlphase::ecs(alpha, p, tr);
        return finish("\"alpha\": " + fmt(alpha), nlphase::number_moment(s, 2, 1), tr.cutoff,
                      std::nullopt, std::nullopt);
    }
    if (family == "aecs") {
        if (!(alpha0 > 0)) throw UsageError("prepare aecs requires --alpha0 > 0");
        const double r0 = nlphase::aecs_squeezing(alpha0);
        const double alpha_a = std::sqrt(2.0) * alpha0;
        const Truncation tr = nlphase::adapt_aecs(alpha0, eps);
        std::optional<double> succ;
        TwoModeState s = nlphase::aecs(alpha0, tr);
        if (eta > 0) {
            if (!(eta < 1)) throw UsageError("--eta must lie in (0,1)");
            // conditional pipeline: heralded photon subtraction at finite eta
            const auto rep =
                nlphase::photon_subtract(nlphase::squeezed_vacuum(r0, tr), eta);
            succ = rep.success_probability;
            s = nlphase::beam_splitter(
                nlphase::tensor(std::get<nlphase::SingleModeState>(rep.state),
                                nlphase::coherent(alpha0, tr)),
                0.5);
        }
        // ideal target: the odd ECS at the same alpha_A
        const TwoModeState ideal = nlphase::ecs(alpha_a, Parity::Odd, tr);
        const double fid = nlphase::fidelity(s, ideal);
        return finish("\"alpha0\": " + fmt(alpha0) + ", \"r0\": " + fmt(r0) +
                          ", \"alpha_a\": " + fmt(alpha_a),
                      nlphase::number_moment(s, 2, 1), tr.cutoff, fid, succ);
    }
    if (family == "coherent") {
        if (alpha < 0) throw UsageError("prepare coherent requires --alpha >= 0");
        const Truncation tr = nlphase::adapt_coherent(alpha, eps);
        const auto s = nlphase::coherent(alpha, tr);
        return finish("\"alpha\": " + fmt(alpha), nlphase::number_moment(s, 1),
                      tr.cutoff, std::nullopt, std::nullopt);
    }
    if (family == "css-" || family == "css+") {
        const Parity p = family == "css-" ? Parity::Odd : Parity::Even;
        if (!(alpha > 0) && p == Parity::Odd)
            throw UsageError("prepare css- requires --alpha > 0");
        const Truncation tr = nlphase::adapt_css(alpha, p, eps);
        const auto s = nlphase::css(alpha, p, tr);
        return finish("\"alpha\": " + fmt(alpha), nlphase::number_moment(s, 1),
                      tr.cutoff, std::nullopt, std::nullopt);
    }
    if (family == "squeezed") {
        if (r < 0) throw UsageError("prepare squeezed requires --r >= 0");
        const Truncation tr = nlphase::adapt_squeezed(r, eps);
        const auto s = nlphase::squeezed_vacuum(r, tr);
        return finish("\"r\": " + fmt(r), nlphase::number_moment(s, 1), tr.cutoff,
                      std::nullopt, std::nullopt);
    }
    if (family == "acss") {
        if (!(r > 0)) throw UsageError("prepare acss requires --r > 0");
        const Truncation tr = nlphase::adapt_acss(r, eps);
        std::optional<double> succ, fid;
        nlphase::SingleModeState s = nlphase::acss_closed_form(r, tr);
        if (eta > 0) {
            if (!(eta < 1)) throw UsageError("--eta must lie in (0,1)");
            auto rep = nlphase::photon_subtract(nlphase::squeezed_vacuum(r, tr), eta);
            succ = rep.success_probability;
            fid = rep.fidelity_to_ideal;
            s = std::get<nlphase::SingleModeState>(rep.state);
        }
        return finish("\"r\": " + fmt(r), nlphase::number_moment(s, 1), tr.cutoff, fid, succ);
    }
    if (family == "fock") {
        if (N < 0) throw UsageError("prepare fock requires --N >= 0");
        const Truncation tr(std::max(N, 4), eps);
        const auto s = nlphase::fock_state(N, tr);
        return finish("\"n\": " + std::to_string(N), nlphase::number_moment(s, 1),
                      tr.cutoff, std::nullopt, std::nullopt);
    }
    throw UsageError("unknown family: " + family);
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   - " : "FAIL - ") << name << "\n";
        if (!ok) ++failures;
    };
    using namespace nlphase;

    const Truncation t12(12, 1e-6);
    check("vacuum inner product", std::abs(inner_product(vacuum(t12), vacuum(t12)) - 1.0) < 1e-14);
    check("fock orthogonality",
          std::abs(inner_product(fock_state(0, t12), fock_state(1, t12))) < 1e-14);

    // beam splitter unitarity on seeded pseudo-random states
    {
        std::mt19937 rng(12345);
        std::normal_distribution<double> g;
        bool ok = true;
        for (int rep = 0; rep < 3; ++rep) {
            // support only on sectors m1 + m2 <= cutoff, which the beam
            // splitter maps into themselves without spilling past the corner
            Mat c = Mat::Zero(t12.dim(), t12.dim());
            for (int i = 0; i < t12.dim(); ++i)
                for (int j = 0; i + j <= t12.cutoff; ++j) c(i, j) = complexd(g(rng), g(rng));
            const TwoModeState s(c, t12);
            const TwoModeState o = beam_splitter(s, 0.3 + 0.2 * rep);
            ok = ok && std::abs(detail::squared_norm(o.coeffs()) - 1.0) < 1e-10;
        }
        check("beam splitter unitarity", ok);
    }
    {
        const TwoModeState s = tensor(coherent(1.0, t12), fock_state(1, t12));
        const TwoModeState once = beam_splitter(s, 0.5);
        check("beam splitter eta=1 identity", fidelity(beam_splitter(s, 1.0), s) > 1.0 - 1e-12);
        // inverse: swap modes, apply, swap back equals the adjoint at eta=1/2
        check("beam splitter preserves norm", std::abs(detail::squared_norm(once.coeffs()) - 1.0) <
                                                  1e-10);
    }

    const Truncation t = adapt_coherent(1.5);
    check("coherent mean photon",
          std::abs(number_moment(coherent(1.5, t), 1) - 2.25) < 1e-9);
    check("noon closed form",
          std::abs(pure_qfi(noon(4, Truncation(8, 1e-12)), 2).qfi - 256.0) < 1e-9 * 256.0);
    {
        bool ok = true;
        for (Parity p : {Parity::Even, Parity::Odd})
            for (int k : {1, 2}) {
                const double a = 1.0;
                const double s = ecs_qfi_series(a, p, k).qfi;
                const double f = pure_qfi(ecs(a, p, adapt_coherent(a)), k).qfi;
                ok = ok && std::abs(s - f) < 1e-8 * std::max(1.0, std::abs(s));
            }
        check("ecs series vs fock qfi", ok);
    }
    {
        const double r = 0.6;
        const Truncation tr = adapt_squeezed(r, 1e-10);
        const auto closed = acss_closed_form(r, tr);
        const auto sub = annihilate(squeezed_vacuum(r, tr)).normalized();
        check("acss construction equivalence", fidelity(closed, sub) > 1.0 - 1e-10);
    }
    {
        const Truncation tr = adapt_aecs(1.0);
        const TwoModeState s = aecs(1.0, tr);
        const auto h = h_coefficients(s);
        detail::KahanSum sum;
        for (const auto& c : h) sum.add(2.0 * c.value * c.value);
        check("aecs antisymmetry + normalization",
              (s.coeffs() + s.coeffs().transpose()).cwiseAbs().maxCoeff() < 1e-9 &&
                  std::abs(sum.value() - 1.0) < 1e-10);
    }
    {
        // T = 1 reduction and dominance spot checks at nbar = 2
        bool reduce_ok = true, dom_ok = true;
        const Truncation tr(30, 1e-6);
        const std::vector<TwoModeState> probes{
            noon(4, tr), ecs(match_alpha(2.0, Parity::Odd), Parity::Odd, tr),
            ecs(match_alpha(2.0, Parity::Even), Parity::Even, tr),
            aecs(match_aecs_alpha0(2.0), tr)};
        for (const auto& s : probes)
            for (int k : {1, 2}) {
                const double pure = pure_qfi(s, k).qfi;
                const double exact1 = mixed_qfi_exact(loss_channel(s, 1.0, k));
                reduce_ok = reduce_ok && std::abs(exact1 - pure) < 1e-8 * std::max(1.0, pure);
                const MomentSet m = moments_of(s);
                const double c1 = k == 1 ? cq1(m, LossModel(1.0)) : cq2(m, LossModel(1.0));
                reduce_ok = reduce_ok && std::abs(c1 - pure) < 1e-8 * std::max(1.0, pure);
                const double f95 = mixed_qfi_exact(loss_channel(s, 0.95, k));
                const double c95 =
                    k == 1 ? cq1(m, LossModel(0.95)) : cq2(m, LossModel(0.95));
                dom_ok = dom_ok && c95 >= f95 - 1e-6;
            }
        check("T=1 reductions", reduce_ok);
        check("bound dominance at T=0.95", dom_ok);
    }

    std::cout << (failures == 0 ? "selftest: all checks passed\n"
                                : "selftest: " + std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truncated-Fock-space toolkit for nonlinear phase estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    const std::string cmdline = join_args(argc, argv);

    std::string config_path, out, format = "csv", profile_out;
    double eps = 1e-12;

    auto* sens = app.add_subcommand("sensitivity", "resource-matched sensitivity sweep");
    std::string sens_states, sens_k = "1", sens_n = "2:20";
    sens->add_option("--states", sens_states, "comma list: noon,ecs-,ecs+,aecs")->required();
    sens->add_option("--k", sens_k, "comma list of nonlinearity orders");
    sens->add_option("--N", sens_n, "integer range a:b[:step]");

    auto* coeffs = app.add_subcommand("coeffs", "AECS coefficient dump");
    double alpha_a = 1.9807;
    coeffs->add_option("--alphaA", alpha_a, "AECS amplitude alpha_A = sqrt(2) alpha0");
    coeffs->add_option("--profile", profile_out, "also write |H(m,0)| vs coherent profile");

    auto* loss = app.add_subcommand("loss", "lossy sensitivity sweep");
    std::string loss_states = "noon,ecs-,ecs+,aecs", loss_k = "1,2", loss_t = "0.90:1.00:0.005";
    double loss_nbar = 2.0;
    bool oracle = false;
    int oracle_cutoff = 30, oracle_max_cutoff = 40;
    loss->add_option("--states", loss_states, "comma list: noon,ecs-,ecs+,aecs");
    loss->add_option("--k", loss_k, "comma list, subset of {1,2}");
    loss->add_option("--T", loss_t, "transmission range a:b[:step]");
    loss->add_option("--nbar", loss_nbar, "matched mean photon number");
    loss->add_flag("--oracle", oracle, "also compute exact mixed-state QFI");
    loss->add_option("--oracle-cutoff", oracle_cutoff, "Fock cutoff for the oracle");
    loss->add_option("--oracle-max-cutoff", oracle_max_cutoff, "refuse oracle beyond this cutoff");

    auto* prep = app.add_subcommand("prepare", "state preparation report (JSON)");
    std::string prep_family;
    int prep_n = -1;
    double prep_alpha = -1, prep_alpha0 = -1, prep_r = -1, prep_eta = 0;
    prep->add_option("family", prep_family,
                     "noon|ecs-|ecs+|aecs|coherent|css-|css+|squeezed|acss|fock")
        ->required();
    prep->add_option("--N", prep_n, "photon number (noon, fock)");
    prep->add_option("--alpha", prep_alpha, "coherent amplitude");
    prep->add_option("--alpha0", prep_alpha0, "AECS input amplitude");
    prep->add_option("--r", prep_r, "squeezing parameter");
    prep->add_option("--eta", prep_eta, "finite beam-splitter transmission for photon subtraction");

    auto* self = app.add_subcommand("selftest", "run the invariant suite");

    for (auto* sc : {sens, coeffs, loss, prep, self}) {
        sc->add_option("--config", config_path, "JSON config file (flags take precedence)");
        sc->add_option("--tail-epsilon", eps, "max truncated tail probability");
        if (sc != self && sc != prep) sc->add_option("--format", format, "csv or json");
        if (sc != self) sc->add_option("--output", out, "output path (default stdout)");
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config(args);
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (format != "csv" && format != "json") throw UsageError("format must be csv or json");
        if (!(eps > 0 && eps < 1)) throw UsageError("tail-epsilon must lie in (0,1)");
        if (sens->parsed())
            return cmd_sensitivity(sens_states, sens_k, sens_n, eps, out, format, cmdline);
        if (coeffs->parsed())
            return cmd_coeffs(alpha_a, eps, out, profile_out, format, cmdline);
        if (loss->parsed())
            return cmd_loss(loss_states, loss_k, loss_t, loss_nbar, oracle, oracle_cutoff,
                            oracle_max_cutoff, eps, out, format, cmdline);
        if (prep->parsed())
            return cmd_prepare(prep_family, prep_n, prep_alpha, prep_alpha0, prep_r, prep_eta,
                               eps, out, cmdline);
        if (self->parsed()) return cmd_selftest();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
