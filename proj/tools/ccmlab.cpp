#include <chrono>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccm/ccm.hpp"
#include "ccm/cli.hpp"

using namespace ccm;
using namespace ccm::cli;

namespace {

struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Checker = std::string (*)(const std::string&);

struct Session {
    RunManifest manifest;
    std::string verb;
    std::string manifest_path;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    // Writes, re-reads and validates one output file.
    void emit(const std::string& path, const std::string& text, Checker check) {
        std::string p = resolve_output(path);
        write_file(p, text);
        std::string err = check(read_file(p));
        if (!err.empty()) throw SchemaFailure(p + ": " + err);
        manifest.add_output(p);
        if (manifest_path.empty()) manifest_path = p + ".manifest.json";
    }

    void finish() {
        manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string path = manifest_path;
        if (path.empty()) {
            const char* dir = std::getenv(output_dir_env);
            if (!dir || !*dir) return;
            path = resolve_output(verb + ".manifest.json");
        }
        json j = manifest.to_json();
        std::string err = schema::manifest(j);
        if (!err.empty()) throw SchemaFailure(path + ": " + err);
        write_file(path, j.dump(2) + "\n");
    }
};

std::string check_json_with(const std::string& text, std::string (*f)(const json&)) {
    try {
        return f(json::parse(text));
    } catch (const json::exception& e) {
        return e.what();
    }
}

std::string state_file(const std::string& t) { return check_json_with(t, schema::state); }
std::string run_file(const std::string& t) { return check_json_with(t, schema::run); }
std::string verify_file(const std::string& t) { return check_json_with(t, schema::verify_report); }
std::string spectrum_file(const std::string& t) { return check_json_with(t, schema::spectrum_report); }
std::string bracket_file(const std::string& t) { return check_json_with(t, schema::bracket_report); }

// ---- state ----

struct StateArgs {
    std::string preset = "soliton-torus";
    double n = 1.0;
    int n_modes = 128;
    double half_length = 40.0;
    std::string geometry = "torus";
    std::string sign = "focusing";
    double c_re = 1.0, c_im = 0.0;
    int m = 0;
    std::uint64_t seed = 1;
    std::optional<double> decay;
    double mass = 1.0;
    std::string output;
};

Geometry make_geometry(const std::string& kind, int n_modes, double half_length) {
    return kind_from_string(kind) == Kind::Torus ? Geometry::torus(n_modes) : Geometry::line(n_modes, half_length);
}

HardyState build_state(const StateArgs& a) {
    if (a.preset == "soliton-torus") return soliton_torus(a.n, a.n_modes);
    if (a.preset == "soliton-line") return soliton_line(a.n, a.n_modes, a.half_length);
    Geometry g = make_geometry(a.geometry, a.n_modes, a.half_length);
    Sign s = sign_from_string(a.sign);
    if (a.preset == "plane-wave") return plane_wave(g, s, cplx(a.c_re, a.c_im), a.m);
    if (a.preset == "random") {
        std::mt19937_64 rng(a.seed);
        RandomOptions opt;
        if (a.decay) opt.decay_min = opt.decay_max = *a.decay;
        return random_state(g, s, a.mass, rng, opt);
    }
    throw std::invalid_argument("unknown preset: " + a.preset);
}

int run_state(Session& ses, const StateArgs& a) {
    HardyState q = build_state(a);
    ses.manifest.seed = a.seed;
    ses.manifest.config = {{"preset", a.preset}, {"n", a.n}, {"n_modes", a.n_modes}, {"half_length", a.half_length},
                           {"geometry", a.geometry}, {"sign", a.sign}, {"c", {a.c_re, a.c_im}}, {"m", a.m},
                           {"mass", a.mass}};
    if (a.decay) ses.manifest.config["decay"] = *a.decay;
    std::string text = state_to_json(q).dump(2) + "\n";
    if (a.output.empty() || a.output == "-") std::cout << text;
    else ses.emit(a.output, text, state_file);
    std::cerr << "state " << a.preset << ": n_modes " << q.size() << ", mass " << csv_number(mass(q)) << "\n";
    return Ok;
}

// ---- simulate ----

struct SimulateArgs {
    std::string geometry = "torus";
    std::string sign = "focusing";
    std::string flow = "ccm";
    int n_modes = 128;
    double half_length = 40.0;
    double dt = 1e-4;
    double t_final = 1.0;
    std::uint64_t seed = 1;
    double mass = 1.0;
    int stride = 100;
    bool no_lax = false;
    std::string input, output, csv;
};

int run_simulate(Session& ses, const SimulateArgs& a, const CLI::App& sub) {
    HardyState q0;
    if (!a.input.empty()) {
        q0 = load_state(a.input);
        if (sub.count("--geometry") && kind_from_string(a.geometry) != q0.geo.kind)
            throw std::invalid_argument("--geometry disagrees with the input state");
        if (sub.count("--sign") && sign_from_string(a.sign) != q0.sign)
            throw std::invalid_argument("--sign disagrees with the input state");
        if (sub.count("--n-modes") && a.n_modes != q0.size())
            throw std::invalid_argument("--n-modes disagrees with the input state");
    } else {
        std::mt19937_64 rng(a.seed);
        q0 = random_state(make_geometry(a.geometry, a.n_modes, a.half_length), sign_from_string(a.sign), a.mass, rng);
    }
    FlowSpec spec = FlowSpec::for_state(q0, a.flow, a.dt, a.t_final, a.stride);
    spec.monitor_lax = !a.no_lax;
    ses.manifest.seed = a.seed;
    ses.manifest.config = flow_spec_to_json(spec);
    ses.manifest.config["input"] = a.input;
    if (a.input.empty()) ses.manifest.config["initial_mass"] = a.mass;

    TrajectoryRecord rec = evolve(spec, q0);
    if (!a.output.empty()) ses.emit(a.output, trajectory_to_json(rec).dump(2) + "\n", run_file);
    if (!a.csv.empty()) ses.emit(a.csv, monitor_table(rec).str(), schema::monitors_csv);

    const Monitors& m = rec.monitors;
    std::cout << "flow " << spec.field_name() << " " << to_string(spec.geo.kind) << " " << to_string(spec.sign)
              << " N=" << q0.size() << " steps=" << spec.steps() << "\n";
    std::cout << "drift mass " << csv_number(relative_drift(m.mass)) << " momentum "
              << csv_number(relative_drift(m.momentum)) << " hamiltonian " << csv_number(relative_drift(m.hamiltonian))
              << " beta " << csv_number(relative_drift(m.beta)) << " e2 " << csv_number(relative_drift(m.e2)) << "\n";
    if (rec.threshold_flag) std::cerr << "warning: " << "focusing mass at or above 2pi\n";
    if (rec.blowup) throw BlowupError("blowup at t = " + csv_number(rec.blowup_time) + ": " + rec.message);
    return Ok;
}

// ---- spectrum ----

struct SpectrumArgs {
    std::string input;
    std::vector<double> kappas{2.0};
    std::string output, csv, eigenvalues;
};

int run_spectrum(Session& ses, const SpectrumArgs& a) {
    HardyState q = load_state(a.input);
    LaxSpectrum sp = spectrum(build_lax(q));
    CsvTable eig{{"index", "eigenvalue"}, {{}, {}}};
    for (int i = 0; i < sp.values.size(); ++i) {
        eig.columns[0].push_back(i);
        eig.columns[1].push_back(sp.values[i]);
    }
    CsvTable table{{"kappa", "beta", "dbeta_dk"}, {{}, {}, {}}};
    json rows = json::array();
    for (double k : a.kappas) {
        ResolventVector r = resolve(q, k);
        double db = -l2_sq(q.geo, r.m);
        table.columns[0].push_back(k);
        table.columns[1].push_back(r.beta);
        table.columns[2].push_back(db);
        rows.push_back({{"kappa", k}, {"beta", r.beta}, {"dbeta_dk", db}});
    }
    ses.manifest.config = {{"input", a.input}, {"kappa", a.kappas}};
    std::cout << table.str();
    if (!a.output.empty()) {
        json ev = json::array();
        for (int i = 0; i < sp.values.size(); ++i) ev.push_back(sp.values[i]);
        json j{{"state", state_to_json(q)}, {"eigenvalues", ev}, {"beta_table", rows}};
        ses.emit(a.output, j.dump(2) + "\n", spectrum_file);
    }
    if (!a.csv.empty()) ses.emit(a.csv, table.str(), schema::beta_csv);
    if (!a.eigenvalues.empty()) ses.emit(a.eigenvalues, eig.str(), schema::eigen_csv);
    return Ok;
}

// ---- bracket ----

struct BracketArgs {
    std::string f, g, input, output;
};

json gradient_json(const GradientReport& r) {
    return {{"name", r.name},
            {"discrepancy", r.discrepancy},
            {"analytic", coeffs_to_json(r.analytic)},
            {"oracle", coeffs_to_json(r.oracle)}};
}

int run_bracket(Session& ses, const BracketArgs& a) {
    HardyState q = load_state(a.input);
    Functional f = Functional::parse(a.f), g = Functional::parse(a.g);
    double b = poisson_bracket(f, g, q);
    json j{{"f", f.name()},
           {"g", g.name()},
           {"bracket", b},
           {"gradients", {gradient_json(gradient_report(f, q)), gradient_json(gradient_report(g, q))}}};
    ses.manifest.config = {{"f", f.name()}, {"g", g.name()}, {"input", a.input}};
    if (a.output.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        ses.emit(a.output, j.dump(2) + "\n", bracket_file);
        std::cout << "{" << f.name() << ", " << g.name() << "} = " << csv_number(b) << "\n";
    }
    return Ok;
}

// ---- verify ----

struct VerifyArgs {
    std::string suite = "all";
    std::uint64_t seed = 1;
    int n_modes = 64;
    int trials = 20;
    std::string mutation = "none";
    std::string json_path;
};

int run_verify(Session& ses, const VerifyArgs& a) {
    VerifyConfig cfg;
    cfg.seed = a.seed;
    cfg.n_modes = a.n_modes;
    cfg.trials = a.trials;
    cfg.mutation = mutation_from_string(a.mutation);
    if (cfg.n_modes < 8) throw std::invalid_argument("--n-modes must be at least 8");
    if (cfg.trials < 1) throw std::invalid_argument("--trials must be positive");
    VerifyResult res = run_suites(a.suite, cfg);
    ses.manifest.seed = a.seed;
    ses.manifest.config = {{"suite", a.suite}, {"n_modes", a.n_modes}, {"trials", a.trials}, {"mutation", a.mutation}};
    for (const auto& s : res.suites) {
        std::cout << (s.passed() ? "PASS " : "FAIL ") << s.name << " (" << std::setprecision(3) << s.seconds << " s)\n";
        for (const auto& c : s.checks)
            if (!c.passed)
                std::cout << "  " << c.name << " = " << csv_number(c.value) << " violates " << c.relation << " "
                          << csv_number(c.bound) << "\n";
    }
    if (!a.json_path.empty()) {
        json j = res.to_json(cfg);
        j["mutation"] = a.mutation;
        ses.emit(a.json_path, j.dump(2) + "\n", verify_file);
    }
    return res.passed() ? Ok : VerificationFailure;
}

int fail(int code, const std::string& kind, const std::string& what) {
    json j{{"error", what}, {"kind", kind}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral lab for continuum Calogero-Moser models in truncated Hardy space"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    StateArgs st;
    auto* s_state = app.add_subcommand("state", "Build a canonical state");
    s_state->add_option("--preset", st.preset, "soliton-torus | soliton-line | plane-wave | random")
        ->check(CLI::IsMember({"soliton-torus", "soliton-line", "plane-wave", "random"}));
    s_state->add_option("--n", st.n, "Soliton index");
    s_state->add_option("--n-modes", st.n_modes, "Retained modes");
    s_state->add_option("--half-length", st.half_length, "Line window half length L");
    s_state->add_option("--geometry", st.geometry, "torus | line")->check(CLI::IsMember({"torus", "line"}));
    s_state->add_option("--sign", st.sign, "focusing | defocusing")->check(CLI::IsMember({"focusing", "defocusing"}));
    s_state->add_option("--c-re", st.c_re, "Plane-wave amplitude, real part");
    s_state->add_option("--c-im", st.c_im, "Plane-wave amplitude, imaginary part");
    s_state->add_option("--m", st.m, "Plane-wave mode");
    s_state->add_option("--seed", st.seed, "Random seed");
    s_state->add_option("--decay", st.decay, "Fixed coefficient decay exponent a");
    s_state->add_option("--mass", st.mass, "Target mass of a random state");
    s_state->add_option("-o,--output", st.output, "Output state JSON (stdout when omitted)");

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Integrate a flow and record monitors");
    s_sim->add_option("--geometry", sim.geometry, "torus | line")->check(CLI::IsMember({"torus", "line"}));
    s_sim->add_option("--sign", sim.sign, "focusing | defocusing")->check(CLI::IsMember({"focusing", "defocusing"}));
    s_sim->add_option("--flow", sim.flow, "ccm | eq195 | momentum | beta:K | en:N | hk:K");
    s_sim->add_option("--n-modes", sim.n_modes, "Retained modes");
    s_sim->add_option("--half-length", sim.half_length, "Line window half length L");
    s_sim->add_option("--dt", sim.dt, "Time step");
    s_sim->add_option("--t-final", sim.t_final, "Final time");
    s_sim->add_option("--seed", sim.seed, "Seed of the random initial state when -i is absent");
    s_sim->add_option("--mass", sim.mass, "Mass of the random initial state");
    s_sim->add_option("--stride", sim.stride, "Steps between monitor records");
    s_sim->add_flag("--no-lax", sim.no_lax, "Skip the Lax residual monitor");
    s_sim->add_option("-i,--input", sim.input, "Initial state JSON");
    s_sim->add_option("-o,--output", sim.output, "Run JSON (spec, monitors, final state)");
    s_sim->add_option("--csv", sim.csv, "Monitor CSV");

    SpectrumArgs spa;
    auto* s_spec = app.add_subcommand("spectrum", "Eigenvalues of L_q and beta tables");
    s_spec->add_option("-i,--input", spa.input, "State JSON")->required();
    s_spec->add_option("--kappa", spa.kappas, "Spectral parameters (repeatable)");
    s_spec->add_option("-o,--output", spa.output, "Report JSON");
    s_spec->add_option("--csv", spa.csv, "Beta table CSV");
    s_spec->add_option("--eigenvalues", spa.eigenvalues, "Eigenvalue CSV");

    BracketArgs br;
    auto* s_br = app.add_subcommand("bracket", "Poisson bracket of two functionals");
    s_br->add_option("--f", br.f, "mass | momentum | hamiltonian | en:N | beta:K | hk:K")->required();
    s_br->add_option("--g", br.g, "Second functional")->required();
    s_br->add_option("-i,--input", br.input, "State JSON")->required();
    s_br->add_option("-o,--output", br.output, "Report JSON (stdout when omitted)");

    VerifyArgs ver;
    auto* s_ver = app.add_subcommand("verify", "Run verification suites");
    std::vector<std::string> suites{"all"};
    for (const auto& n : suite_names()) suites.push_back(n);
    s_ver->add_option("suite", ver.suite, "all | carleman | bounds | gradients | commute | degeneracy | lipschitz")
        ->check(CLI::IsMember(suites));
    s_ver->add_option("--seed", ver.seed, "Seed");
    s_ver->add_option("--n-modes", ver.n_modes, "Retained modes");
    s_ver->add_option("--trials", ver.trials, "Trials per suite");
    s_ver->add_option("--mutation", ver.mutation, "none | theta | lax | hamiltonian")
        ->check(CLI::IsMember({"none", "theta", "lax", "hamiltonian"}));
    s_ver->add_option("--json", ver.json_path, "Report JSON");

    for (auto* s : {s_state, s_sim, s_spec, s_br, s_ver})
        s->add_option("--manifest", "Manifest path (default: next to the first output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }

    Session ses;
    for (int i = 0; i < argc; ++i) ses.manifest.command_line.push_back(argv[i]);
    try {
        int code = Ok;
        CLI::App* sub = app.get_subcommands().front();
        ses.verb = sub->get_name();
        if (auto* mo = sub->get_option("--manifest"); mo->count())
            ses.manifest_path = resolve_output(mo->as<std::string>());
        if (sub == s_state) code = run_state(ses, st);
        else if (sub == s_sim) code = run_simulate(ses, sim, *s_sim);
        else if (sub == s_spec) code = run_spectrum(ses, spa);
        else if (sub == s_br) code = run_bracket(ses, br);
        else if (sub == s_ver) code = run_verify(ses, ver);
        ses.finish();
        return code;
    } catch (const BlowupError& e) {
        ses.finish();
        return fail(NumericalFailure, "blowup", e.what());
    } catch (const ThresholdError& e) {
        return fail(NumericalFailure, "threshold", e.what());
    } catch (const DegeneracyError& e) {
        return fail(NumericalFailure, "degeneracy", e.what());
    } catch (const SchemaFailure& e) {
        return fail(NumericalFailure, "schema", e.what());
    } catch (const json::exception& e) {
        return fail(Usage, "input", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(Usage, "usage", e.what());
    } catch (const std::exception& e) {
        return fail(Usage, "io", e.what());
    }
}
