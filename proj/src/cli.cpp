#include "qtasep/cli.hpp"

#include "qtasep/evolution.hpp"
#include "qtasep/fredholm.hpp"
#include "qtasep/moments.hpp"
#include "qtasep/monte_carlo.hpp"
#include "qtasep/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace qtasep {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string> kKnownKeys{
    "schema", "flavor", "N",     "n",        "k",         "a",          "q",          "t",
    "gamma",  "alpha",  "alpha_schedule",    "beta",      "beta_schedule", "initial", "trials",
    "seed",   "workers", "zeta", "invert_max", "contour_radii", "suite", "trajectories", "out"};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& field) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(field, "expected an integer");
    return j.get<std::int64_t>();
}

std::vector<double> get_numbers(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(get_number(e, field));
    return v;
}

std::vector<int> get_ints(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of integers");
    std::vector<int> v;
    for (const auto& e : j) v.push_back(static_cast<int>(get_int(e, field)));
    return v;
}

std::vector<double> schedule(const json& doc, const std::string& name, int steps, bool all_of_array) {
    const std::string arr = name + "_schedule";
    if (doc.contains(arr)) {
        std::vector<double> v = get_numbers(doc[arr], arr);
        if (all_of_array) return v;
        if (static_cast<int>(v.size()) < steps)
            fail(arr, "has " + std::to_string(v.size()) + " entries but t = " + std::to_string(steps) + " steps need " +
                          std::to_string(steps));
        v.resize(steps);
        return v;
    }
    if (doc.contains(name)) return std::vector<double>(steps, get_number(doc[name], name));
    if (steps == 0) return {};
    fail(arr, "missing (give an array `" + arr + "` or a constant `" + name + "`)");
}

std::vector<std::vector<int>> sorted_vectors(int N, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int hi) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int v = hi; v >= 1; --v) {
            cur.push_back(v);
            self(self, v);
            cur.pop_back();
        }
    };
    rec(rec, N);
    return out;
}

std::string n_str(const std::vector<int>& n) {
    std::string s;
    for (std::size_t i = 0; i < n.size(); ++i) s += (i ? " " : "") + std::to_string(n[i]);
    return s;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_preamble(const ExperimentConfig& c) {
    return "# qtasep config_hash=" + c.hash + " seed=" + std::to_string(c.seed) + "\n";
}

ojson json_preamble(const ExperimentConfig& c, const std::string& command) {
    ojson j;
    j["schema"] = kConfigSchema;
    j["command"] = command;
    j["config_hash"] = c.hash;
    j["seed"] = c.seed;
    return j;
}

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

bool is_step(const ExperimentConfig& c) { return c.initial_state() == step_initial(c.N); }

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Protocol ExperimentConfig::protocol() const {
    switch (flavor) {
        case Flavor::poisson: return Protocol::poisson(t);
        case Flavor::geometric: return Protocol::geometric(alpha_schedule);
        case Flavor::bernoulli: return Protocol::bernoulli(beta_schedule);
        case Flavor::combined: return Protocol::combined(gamma, alpha_schedule, beta_schedule);
    }
    throw ConfigError("unknown flavor");
}

ProcessParams ExperimentConfig::params() const { return ProcessParams{a, QParam(q)}; }

ParticleState ExperimentConfig::initial_state() const {
    return initial ? ParticleState{*initial} : step_initial(N);
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!kKnownKeys.count(key)) fail(key, "unknown key");
    if (!doc.contains("schema")) fail("schema", "missing (expected \"" + std::string(kConfigSchema) + "\")");
    if (doc["schema"] != kConfigSchema) fail("schema", "expected \"" + std::string(kConfigSchema) + "\"");

    ExperimentConfig c;
    if (doc.contains("flavor")) {
        if (!doc["flavor"].is_string()) fail("flavor", "expected a string");
        try {
            c.flavor = parse_flavor(doc["flavor"].get<std::string>());
        } catch (const std::exception& e) {
            fail("flavor", e.what());
        }
    }
    if (doc.contains("q")) c.q = get_number(doc["q"], "q");
    if (!(c.q > 0.0 && c.q < 1.0)) fail("q", "must lie in (0,1)");

    if (doc.contains("n") && doc.contains("k")) fail("k", "give either `n` or `k`, not both");
    if (doc.contains("n")) {
        const json& jn = doc["n"];
        if (!jn.is_array() || jn.empty()) fail("n", "expected a non-empty array");
        if (jn[0].is_array())
            for (const auto& e : jn) c.n_vectors.push_back(get_ints(e, "n"));
        else
            c.n_vectors.push_back(get_ints(jn, "n"));
    }

    // N from the explicit field, the rate vector, the initial positions or the largest n entry
    int N = 0;
    if (doc.contains("N")) {
        N = static_cast<int>(get_int(doc["N"], "N"));
        if (N < 1) fail("N", "must be >= 1");
        c.N_explicit = true;
    }
    if (doc.contains("a") && doc["a"].is_array()) {
        c.a = get_numbers(doc["a"], "a");
        if (N && static_cast<int>(c.a.size()) != N) fail("a", "length " + std::to_string(c.a.size()) + " differs from N");
        N = static_cast<int>(c.a.size());
    }
    if (doc.contains("initial")) {
        std::vector<std::int64_t> x;
        if (!doc["initial"].is_array()) fail("initial", "expected an array of integers");
        for (const auto& e : doc["initial"]) x.push_back(get_int(e, "initial"));
        if (N && static_cast<int>(x.size()) != N) fail("initial", "length differs from N");
        N = static_cast<int>(x.size());
        c.initial = x;
        try {
            ParticleState{x}.validate();
        } catch (const std::exception& e) {
            fail("initial", e.what());
        }
    }
    if (!N)
        for (const auto& n : c.n_vectors)
            for (int v : n) N = std::max(N, v);
    c.N = N ? N : 1;
    if (c.n_vectors.empty()) {
        c.k = doc.contains("k") ? static_cast<int>(get_int(doc["k"], "k")) : 1;
        if (c.k < 1) fail("k", "must be >= 1");
        c.n_vectors = sorted_vectors(c.N, c.k);
        if (!doc.contains("k")) c.k = 0;
    }
    for (auto& n : c.n_vectors) {
        if (n.empty()) fail("n", "empty n-vector");
        for (int v : n)
            if (v < 0 || v > c.N) fail("n", "entries must lie in 0..N = " + std::to_string(c.N));
        std::sort(n.rbegin(), n.rend());
    }
    if (c.a.empty()) c.a.assign(c.N, doc.contains("a") ? get_number(doc["a"], "a") : 1.0);

    if (doc.contains("t")) c.t = get_number(doc["t"], "t");
    if (c.t < 0) fail("t", "must be nonnegative");
    const bool discrete = c.flavor == Flavor::geometric || c.flavor == Flavor::bernoulli || c.flavor == Flavor::combined;
    int steps = 0;
    if (discrete) {
        if (c.t != std::floor(c.t)) fail("t", "must be an integer number of steps for flavor " +
                                               std::string(flavor_name(c.flavor)));
        steps = static_cast<int>(c.t);
    }
    if (doc.contains("gamma")) {
        if (c.flavor != Flavor::combined) fail("gamma", "only used by flavor combined (use t for Poisson time)");
        c.gamma = get_number(doc["gamma"], "gamma");
        if (c.gamma < 0) fail("gamma", "must be nonnegative");
    }
    const bool uses_alpha = c.flavor == Flavor::geometric || c.flavor == Flavor::combined;
    const bool uses_beta = c.flavor == Flavor::bernoulli || c.flavor == Flavor::combined;
    for (const char* key : {"alpha", "alpha_schedule"})
        if (doc.contains(key) && !uses_alpha) fail(key, "not used by flavor " + std::string(flavor_name(c.flavor)));
    for (const char* key : {"beta", "beta_schedule"})
        if (doc.contains(key) && !uses_beta) fail(key, "not used by flavor " + std::string(flavor_name(c.flavor)));
    if (c.flavor == Flavor::combined) {
        c.alpha_schedule = (doc.contains("alpha") || doc.contains("alpha_schedule")) ? schedule(doc, "alpha", steps, true)
                                                                                  : std::vector<double>{};
        c.beta_schedule = (doc.contains("beta") || doc.contains("beta_schedule")) ? schedule(doc, "beta", steps, true)
                                                                               : std::vector<double>{};
    } else if (uses_alpha) {
        c.alpha_schedule = schedule(doc, "alpha", steps, false);
    } else if (uses_beta) {
        c.beta_schedule = schedule(doc, "beta", steps, false);
    }

    if (doc.contains("trials")) {
        const auto tr = get_int(doc["trials"], "trials");
        if (tr < 2) fail("trials", "must be >= 2");
        c.trials = static_cast<std::uint64_t>(tr);
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) fail("seed", "expected an integer");
        c.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("workers")) c.workers = static_cast<int>(get_int(doc["workers"], "workers"));
    if (c.workers < 0) fail("workers", "must be >= 0");

    if (doc.contains("zeta")) {
        if (!doc["zeta"].is_array()) fail("zeta", "expected an array");
        for (const auto& e : doc["zeta"]) {
            if (e.is_number())
                c.zeta.emplace_back(e.get<double>(), 0.0);
            else if (e.is_array() && e.size() == 2)
                c.zeta.emplace_back(get_number(e[0], "zeta"), get_number(e[1], "zeta"));
            else
                fail("zeta", "entries must be numbers or [re, im] pairs");
        }
    } else {
        c.zeta = {Complex(-1.0, 0.0)};
    }
    if (doc.contains("invert_max")) c.invert_max = static_cast<int>(get_int(doc["invert_max"], "invert_max"));
    if (doc.contains("contour_radii")) c.contour_radii = get_numbers(doc["contour_radii"], "contour_radii");
    if (doc.contains("suite")) {
        if (!doc["suite"].is_string()) fail("suite", "expected a string");
        c.suite = doc["suite"].get<std::string>();
    }
    if (doc.contains("trajectories")) {
        const json& jt = doc["trajectories"];
        if (!jt.is_object() || !jt.contains("path") || !jt["path"].is_string())
            fail("trajectories", "expected {\"path\": ..., \"count\": ...}");
        for (const auto& [key, _] : jt.items())
            if (key != "path" && key != "count") fail("trajectories." + key, "unknown key");
        c.trajectories = jt["path"].get<std::string>();
        if (jt.contains("count")) c.trajectory_count = static_cast<std::uint64_t>(get_int(jt["count"], "trajectories.count"));
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) fail("out", "expected a path string");
        c.out = doc["out"].get<std::string>();
    }

    try {
        const Protocol p = c.protocol();
        c.params().validate(&p);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("config parameters: ") + e.what());
    }

    json canon = doc;
    canon.erase("seed");
    c.hash = hex64(fnv1a64(canon.dump()));
    return c;
}

// ---------------------------------------------------------------- commands

std::string cmd_simulate(const ExperimentConfig& c, bool as_json) {
    const Protocol spec = c.protocol();
    const auto stages = stages_of(spec);
    McOptions opt;
    opt.trials = c.trials;
    opt.seed = c.seed;
    opt.workers = c.workers;
    const auto est = mc_moments(c.initial_state(), c.params(), stages, {stages.size()}, c.n_vectors, opt)[0];
    if (c.trajectories) {
        std::ofstream f(*c.trajectories);
        if (!f) throw ConfigError("config field 'trajectories': cannot open " + *c.trajectories);
        dump_trajectories(f, c.initial_state(), c.params(), stages, c.trajectory_count, c.seed);
    }
    const std::string fl(flavor_name(c.flavor));
    if (as_json) {
        ojson j = json_preamble(c, "simulate");
        j["results"] = ojson::array();
        for (std::size_t i = 0; i < est.size(); ++i)
            j["results"].push_back({{"flavor", fl}, {"n", c.n_vectors[i]}, {"t", spec.time()}, {"mean", est[i].mean},
                                    {"stderr", est[i].stderr_}, {"trials", est[i].trials}, {"seed", c.seed}});
        return j.dump(2) + "\n";
    }
    std::string out = csv_preamble(c) + "flavor,n_vec,t,mean,stderr,trials,seed\n";
    for (std::size_t i = 0; i < est.size(); ++i)
        out += fl + "," + n_str(c.n_vectors[i]) + "," + format_double(spec.time()) + "," + format_double(est[i].mean) + "," +
               format_double(est[i].stderr_) + "," + std::to_string(est[i].trials) + "," + std::to_string(c.seed) + "\n";
    return out;
}

std::string cmd_evolve(const ExperimentConfig& c, bool as_json) {
    const Protocol spec = c.protocol();
    const QParam q(c.q);
    std::map<int, ObservableVector> by_k;
    for (const auto& n : c.n_vectors) {
        const int k = static_cast<int>(n.size());
        if (!by_k.count(k)) by_k.emplace(k, evolve_true(initial_data(c.initial_state(), k, q), spec, c.a, q));
    }
    const std::string fl(flavor_name(c.flavor));
    if (as_json) {
        ojson j = json_preamble(c, "evolve");
        j["order"] = kOrderTag;
        j["results"] = ojson::array();
        for (const auto& n : c.n_vectors) {
            const auto& h = by_k.at(static_cast<int>(n.size()));
            j["results"].push_back({{"flavor", fl}, {"n", n}, {"t", spec.time()}, {"value", h.at_n(n)},
                                    {"lattice_size", h.values.size()}});
        }
        return j.dump(2) + "\n";
    }
    std::string out = csv_preamble(c) + "flavor,n_vec,t,value,lattice_size\n";
    for (const auto& n : c.n_vectors) {
        const auto& h = by_k.at(static_cast<int>(n.size()));
        out += fl + "," + n_str(n) + "," + format_double(spec.time()) + "," + format_double(h.at_n(n)) + "," +
               std::to_string(h.values.size()) + "\n";
    }
    return out;
}

std::string cmd_moments(const ExperimentConfig& c, bool as_json) {
    if (!is_step(c)) throw ConfigError("config field 'initial': the contour formulas need step initial data");
    const Protocol spec = c.protocol();
    const QParam q(c.q);
    std::vector<MomentResult> res;
    for (const auto& n : c.n_vectors) {
        if (c.contour_radii) {
            const int k = static_cast<int>(n.size());
            if (static_cast<int>(c.contour_radii->size()) != k)
                throw ConfigError("config field 'contour_radii': needs one radius per entry of n");
            ContourFamily cf = default_contours(k, q, c.a, 0.1, 0.02, 0, &spec);
            for (int i = 0; i < k; ++i) cf.circles[i].radius = (*c.contour_radii)[i];
            validate_contours(cf, q, c.a, &spec);
            res.push_back(nested_moment(spec, n, c.a, q, cf));
        } else {
            res.push_back(nested_moment(spec, n, c.a, q));
        }
    }
    const std::string fl(flavor_name(c.flavor));
    if (as_json) {
        ojson j = json_preamble(c, "moments");
        j["results"] = ojson::array();
        for (std::size_t i = 0; i < res.size(); ++i)
            j["results"].push_back({{"flavor", fl}, {"n", c.n_vectors[i]}, {"t", spec.time()}, {"value", res[i].value},
                                    {"im_part", res[i].im_part}, {"doubling_change", res[i].doubling_change},
                                    {"nodes", res[i].nodes}});
        return j.dump(2) + "\n";
    }
    std::string out = csv_preamble(c) + "flavor,n_vec,t,value,im_part,doubling_change,nodes\n";
    for (std::size_t i = 0; i < res.size(); ++i)
        out += fl + "," + n_str(c.n_vectors[i]) + "," + format_double(spec.time()) + "," + format_double(res[i].value) +
               "," + format_double(res[i].im_part) + "," + format_double(res[i].doubling_change) + "," +
               n_str(res[i].nodes) + "\n";
    return out;
}

std::string cmd_fredholm(const ExperimentConfig& c, bool as_json) {
    if (!is_step(c)) throw ConfigError("config field 'initial': the determinant formulas need step initial data");
    for (double v : c.a)
        if (v != 1.0) throw ConfigError("config field 'a': the determinant formulas need a_i = 1");
    const Protocol spec = c.protocol();
    const QParam q(c.q);
    const std::string fl(flavor_name(c.flavor));

    struct Row {
        int n;
        Complex zeta;
        DetResult mb, ca;
    };
    struct PmfRow {
        int n, m;
        InversionResult r;
    };
    std::vector<Row> rows;
    std::vector<PmfRow> pmf;
    std::set<int> done;
    for (const auto& nv : c.n_vectors) {
        if (nv.size() != 1) throw ConfigError("config field 'n': fredholm takes single particle indices");
        const int n = nv[0];
        if (n < 1 || !done.insert(n).second) continue;
        for (Complex z : c.zeta) {
            const TransformPoint p{z, spec, n, q};
            rows.push_back({n, z, q_laplace_mb(p), q_laplace_cauchy(p)});
        }
        if (c.invert_max >= 0) {
            const CauchyTransform ct(spec, n, q);
            for (int m = 0; m <= c.invert_max; ++m) pmf.push_back({n, m, invert_q_laplace(ct, m)});
        }
    }
    if (as_json) {
        ojson j = json_preamble(c, "fredholm");
        j["results"] = ojson::array();
        for (const auto& r : rows)
            j["results"].push_back({{"flavor", fl},
                                    {"n", r.n},
                                    {"t", spec.time()},
                                    {"zeta", complex_json(r.zeta)},
                                    {"det_mb", complex_json(r.mb.value)},
                                    {"det_cauchy", complex_json(r.ca.value)},
                                    {"M", {{"mb", r.mb.nodes}, {"cauchy", r.ca.nodes}}},
                                    {"S_max", r.mb.s_max},
                                    {"agreement_gap", std::abs(r.mb.value - r.ca.value)}});
        if (!pmf.empty()) {
            j["pmf"] = ojson::array();
            for (const auto& p : pmf)
                j["pmf"].push_back({{"n", p.n}, {"m", p.m}, {"probability", p.r.probability}, {"im_part", p.r.im_part},
                                    {"nodes", p.r.nodes}});
        }
        return j.dump(2) + "\n";
    }
    std::string out = csv_preamble(c) +
                      "flavor,n,t,zeta_re,zeta_im,det_mb_re,det_mb_im,det_cauchy_re,det_cauchy_im,M_mb,M_cauchy,S_max,"
                      "agreement_gap\n";
    for (const auto& r : rows)
        out += fl + "," + std::to_string(r.n) + "," + format_double(spec.time()) + "," + format_double(r.zeta.real()) +
               "," + format_double(r.zeta.imag()) + "," + format_double(r.mb.value.real()) + "," +
               format_double(r.mb.value.imag()) + "," + format_double(r.ca.value.real()) + "," +
               format_double(r.ca.value.imag()) + "," + std::to_string(r.mb.nodes) + "," + std::to_string(r.ca.nodes) +
               "," + format_double(r.mb.s_max) + "," + format_double(std::abs(r.mb.value - r.ca.value)) + "\n";
    if (!pmf.empty()) {
        out += "\nn,m,probability,im_part,nodes\n";
        for (const auto& p : pmf)
            out += std::to_string(p.n) + "," + std::to_string(p.m) + "," + format_double(p.r.probability) + "," +
                   format_double(p.r.im_part) + "," + std::to_string(p.r.nodes) + "\n";
    }
    return out;
}

std::string cmd_verify(const ExperimentConfig& c, bool as_json, bool& pass) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), c.suite) == names.end())
        throw ConfigError("unknown suite '" + c.suite + "'");
    VerifyOptions opt;
    opt.seed = c.seed;
    opt.workers = c.workers;
    opt.trials = c.trials;
    opt.q = c.q;
    opt.contour_radii = c.contour_radii;
    opt.N = c.N_explicit ? c.N : 0;
    opt.k = c.k;
    const SuiteReport r = run_suite(c.suite, opt);
    pass = r.pass();
    if (as_json) {
        ojson j = json_preamble(c, "verify");
        ojson body = ojson::parse(to_json(r));
        for (auto& [key, val] : body.items()) j[key] = val;
        return j.dump(2) + "\n";
    }
    std::string out = csv_preamble(c) + "suite,criterion,name,residual,tolerance,pass,seconds,detail\n";
    auto quote = [](std::string s) {
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    for (const auto& ch : r.checks)
        out += r.suite + "," + std::to_string(ch.criterion) + "," + quote(ch.name) + "," + format_double(ch.residual) +
               "," + format_double(ch.tolerance) + "," + (ch.pass ? "PASS" : "FAIL") + "," + format_double(ch.seconds) +
               "," + quote(ch.detail) + "\n";
    return out;
}

// ---------------------------------------------------------------- entry point

int run_cli(int argc, char** argv) {
    CLI::App app{"q-TASEP simulation, exact moments, Fredholm determinants and verification"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    app.add_option("--config", config_path, "JSON experiment config (schema qtasep-v1)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
    app.add_option("--out", out_path, "output path (default stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of E[prod q^{x_{n_i}+n_i}]");
    auto* evo = app.add_subcommand("evolve", "true evolution equations on Y^N_k");
    auto* mom = app.add_subcommand("moments", "nested contour integral moments");
    auto* fre = app.add_subcommand("fredholm", "Mellin-Barnes and Cauchy Fredholm determinants");
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    ver->add_option("suite", suite, "identities|truevsmc|contour|fredholm|duality|macdonald|scaling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    bool pass = true;
    try {
        std::string text = "{\"schema\":\"" + std::string(kConfigSchema) + "\"}";
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        ExperimentConfig c = parse_config(text);
        if (seed) c.seed = *seed;
        if (workers) {
            if (*workers < 0) throw ConfigError("--workers must be >= 0");
            c.workers = *workers;
        }
        if (!suite.empty()) c.suite = suite;
        const bool is_verify = ver->parsed();
        if (is_verify && c.suite.empty()) throw ConfigError("verify needs a suite name");
        const bool as_json = format.empty() ? is_verify : format == "json";

        std::string output;
        if (sim->parsed()) output = cmd_simulate(c, as_json);
        else if (evo->parsed()) output = cmd_evolve(c, as_json);
        else if (mom->parsed()) output = cmd_moments(c, as_json);
        else if (fre->parsed()) output = cmd_fredholm(c, as_json);
        else output = cmd_verify(c, as_json, pass);

        const std::string path = !out_path.empty() ? out_path : c.out.value_or("");
        if (path.empty()) {
            std::cout << output;
        } else {
            std::ofstream f(path, std::ios::binary);
            if (!f) throw ConfigError("cannot open output " + path);
            f << output;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return pass ? 0 : 2;
}

}  // namespace qtasep
