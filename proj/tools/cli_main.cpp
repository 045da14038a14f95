// Command-line front end: single simulations, convergence studies, collision
// censuses, and comparisons against the fine-step reference integrator.
//
// Exit codes: 0 success, 2 usage error, 66 unreadable input file,
// 70 violated runtime invariant (named on stderr).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twospecies/diagnostics.hpp"
#include "twospecies/engine.hpp"
#include "twospecies/harness.hpp"
#include "twospecies/measures.hpp"
#include "twospecies/oracle.hpp"

namespace {

using namespace twospecies;

/// Grammar: `uniform:a,b` | `mix:w1*uniform:a,b+w2*uniform:c,d` | `cdf:PATH`.
/// Grammar problems throw std::invalid_argument (usage error); an unreadable
/// tabulated file throws std::runtime_error (I/O error).
InitialDensity parse_preset(const std::string& text) {
    auto bad = [&text](const std::string& why) {
        throw std::invalid_argument("density preset '" + text + "': " + why);
    };
    auto parse_real = [&bad](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            bad("expected a number, got '" + s + "'");
        }
        if (used != s.size()) bad("trailing characters in number '" + s + "'");
        return v;
    };
    auto parse_uniform = [&](const std::string& s) {
        if (s.rfind("uniform:", 0) != 0) bad("expected 'uniform:a,b', got '" + s + "'");
        std::string args = s.substr(8);
        auto comma = args.find(',');
        if (comma == std::string::npos) bad("uniform needs two endpoints 'a,b'");
        double a = parse_real(args.substr(0, comma));
        double b = parse_real(args.substr(comma + 1));
        return std::pair<double, double>{a, b};
    };

    if (text.rfind("uniform:", 0) == 0) {
        auto [a, b] = parse_uniform(text);
        return InitialDensity::uniform(a, b);
    }
    if (text.rfind("cdf:", 0) == 0) {
        std::string path = text.substr(4);
        if (path.empty()) bad("cdf needs a file path");
        return InitialDensity::from_file(path);
    }
    if (text.rfind("mix:", 0) == 0) {
        std::string body = text.substr(4);
        std::vector<InitialDensity::Component> comps;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto plus = body.find('+', pos);
            std::string term =
                body.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
            auto star = term.find('*');
            if (star == std::string::npos) bad("mixture term needs 'weight*uniform:a,b'");
            double w = parse_real(term.substr(0, star));
            auto [a, b] = parse_uniform(term.substr(star + 1));
            comps.push_back({w, a, b});
            if (plus == std::string::npos) break;
            pos = plus + 1;
        }
        return InitialDensity::mixture(std::move(comps));
    }
    bad("unknown preset kind");
    return InitialDensity::uniform(0.0, 1.0);  // unreachable
}

std::string trajectory_csv(const SimulationRecord& rec, std::optional<double> sample_dt) {
    std::vector<double> times;
    for (const auto& snap : rec.snapshots) times.push_back(snap.t);
    if (rec.t_final > times.back()) times.push_back(rec.t_final);
    if (sample_dt) {
        const double t0 = rec.snapshots.front().t;
        for (double t = t0; t < rec.t_final; t += *sample_dt) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::string out = "t,species,index,position\n";
    for (double t : times) {
        ParticleState s = rec.state_at(t);
        for (int species = 0; species < 2; ++species) {
            const auto& z = (species == 0) ? s.x : s.y;
            for (std::size_t i = 0; i < z.size(); ++i) {
                out += format_double(t);
                out += (species == 0) ? ",x," : ",y,";
                out += std::to_string(i + 1);
                out += ',';
                out += format_double(z[i]);
                out += '\n';
            }
        }
    }
    return out;
}

struct SimulateArgs {
    std::string rho, eta, out;
    int n = 0;
    double T = 0.0;
    std::optional<double> sample_dt;
    std::optional<double> ctol;
};

int run_simulate(const SimulateArgs& a) {
    InitialDensity rho = parse_preset(a.rho);
    InitialDensity eta = parse_preset(a.eta);
    ParticleState s0 = make_state(discretize(rho, a.n), discretize(eta, a.n));
    if (a.ctol) {
        if (!(*a.ctol > 0.0)) throw std::invalid_argument("--ctol must be positive");
        s0.ctol = *a.ctol;
    }
    SimulationRecord rec = run(s0, a.T);
    auto rows = diagnostics_trace(rec);

    std::filesystem::path dir(a.out);
    std::ostringstream echo;
    echo << "subcommand=simulate\n"
         << "rho=" << a.rho << "\neta=" << a.eta << "\nn=" << a.n << "\nT=" << format_double(a.T)
         << "\nctol=" << format_double(s0.ctol) << '\n';
    if (a.sample_dt) echo << "sample=" << format_double(*a.sample_dt) << '\n';
    atomic_write(dir / "config", echo.str());
    atomic_write(dir / "trace.csv", trace_csv(rows));
    atomic_write(dir / "trajectory.csv", trajectory_csv(rec, a.sample_dt));

    CensusRow totals = census_row(static_cast<int>(rec.n()), rec);
    std::cout << "events=" << totals.events << " final_energy=" << format_double(rows.back().F.total())
              << " t_stationary=" << format_double(rec.t_stationary) << '\n';
    return 0;
}

struct StudyArgs {
    std::string rho, eta, out;
    std::vector<int> n_list;
    double T = 0.0;
    double p = 1.0;
    std::vector<double> eval_times;
    bool parallel = false;
};

StudyConfig to_config(const StudyArgs& a) {
    StudyConfig cfg;
    cfg.rho0 = parse_preset(a.rho);
    cfg.eta0 = parse_preset(a.eta);
    cfg.rho_label = a.rho;
    cfg.eta_label = a.eta;
    cfg.n_list = a.n_list;
    cfg.T = a.T;
    cfg.p = a.p;
    cfg.parallel = a.parallel;
    cfg.eval_times = a.eval_times.empty() ? std::vector<double>{0.0, a.T / 2.0, a.T} : a.eval_times;
    cfg.validate();
    return cfg;
}

int run_converge(const StudyArgs& a) {
    StudyConfig cfg = to_config(a);
    StudyResult result = convergence_study(cfg);
    write_study(cfg, result, a.out);
    double worst_ratio = 0.0;
    for (const auto& c : result.coupling) {
        if (c.bound_rho > 0.0) worst_ratio = std::max(worst_ratio, c.w1_rho / c.bound_rho);
        if (c.bound_eta > 0.0) worst_ratio = std::max(worst_ratio, c.w1_eta / c.bound_eta);
    }
    std::cout << "rates=" << result.rates.size()
              << " coupling_max_ratio=" << format_double(worst_ratio) << '\n';
    return 0;
}

int run_census(const StudyArgs& a) {
    StudyConfig cfg = to_config(a);
    auto rows = collision_census(cfg);
    std::filesystem::path dir(a.out);
    atomic_write(dir / "config", config_echo(cfg));
    atomic_write(dir / "census.csv", census_csv(rows));
    long total = 0;
    for (const auto& r : rows) total += r.events;
    std::cout << "runs=" << rows.size() << " total_events=" << total << '\n';
    return 0;
}

struct OracleArgs {
    std::string rho, eta;
    int n = 0;
    double T = 0.0;
    double delta = 1e-4;
    std::optional<double> dt;
    int samples = 8;
};

int run_oracle_compare(const OracleArgs& a) {
    InitialDensity rho = parse_preset(a.rho);
    InitialDensity eta = parse_preset(a.eta);
    ParticleState s0 = make_state(discretize(rho, a.n), discretize(eta, a.n));
    SimulationRecord rec = run(s0, a.T);

    std::vector<double> times;
    for (int j = 1; j <= a.samples; ++j)
        times.push_back(a.T * static_cast<double>(j) / static_cast<double>(a.samples));
    double dt = a.dt ? *a.dt : a.delta / 4.0;
    auto oracle = fine_step_integrate(s0, a.delta, dt, times);

    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        ParticleState s = rec.state_at(times[k]);
        worst = std::max(worst, sup_distance(Snapshot{s.t, s.x, s.y}, oracle[k]));
    }
    std::cout << "sup_distance=" << format_double(worst) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact event-driven dynamics of two attracting/self-repelling particle species"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one simulation, write trace and trajectory");
    simulate->add_option("--rho", sim.rho, "First-species density preset")->required();
    simulate->add_option("--eta", sim.eta, "Second-species density preset")->required();
    simulate->add_option("--n", sim.n, "Particles per species")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--t", sim.T, "Time horizon")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--sample", sim.sample_dt, "Also sample the trajectory every DT")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--ctol", sim.ctol, "Override the contact tolerance")
        ->check(CLI::PositiveNumber);

    StudyArgs conv;
    auto* converge = app.add_subcommand("converge", "Cross-N convergence study");
    converge->add_option("--rho", conv.rho, "First-species density preset")->required();
    converge->add_option("--eta", conv.eta, "Second-species density preset")->required();
    converge->add_option("--n-list", conv.n_list, "Comma-separated particle counts")
        ->required()
        ->delimiter(',');
    converge->add_option("--t", conv.T, "Time horizon")->required()->check(CLI::PositiveNumber);
    converge->add_option("--p", conv.p, "Wasserstein order (default 1)");
    converge->add_option("--times", conv.eval_times, "Evaluation times (default 0,T/2,T)")
        ->delimiter(',');
    converge->add_option("--out", conv.out, "Output directory")->required();
    converge->add_flag("--parallel", conv.parallel, "Run the N sweep concurrently");

    StudyArgs cens;
    auto* census = app.add_subcommand("census", "Collision census over an N list");
    census->add_option("--rho", cens.rho, "First-species density preset")->required();
    census->add_option("--eta", cens.eta, "Second-species density preset")->required();
    census->add_option("--n-list", cens.n_list, "Comma-separated particle counts")
        ->required()
        ->delimiter(',');
    census->add_option("--t", cens.T, "Time horizon")->required()->check(CLI::PositiveNumber);
    census->add_option("--out", cens.out, "Output directory")->required();
    census->add_flag("--parallel", cens.parallel, "Run the N sweep concurrently");

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle-compare",
                                      "Compare the event engine against the fine-step integrator");
    oracle->add_option("--rho", orc.rho, "First-species density preset")->required();
    oracle->add_option("--eta", orc.eta, "Second-species density preset")->required();
    oracle->add_option("--n", orc.n, "Particles per species")->required()->check(CLI::PositiveNumber);
    oracle->add_option("--t", orc.T, "Time horizon")->required()->check(CLI::PositiveNumber);
    oracle->add_option("--delta", orc.delta, "Kernel smoothing width (default 1e-4)")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--dt", orc.dt, "Integrator step (default delta/4)")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--samples", orc.samples, "Number of comparison times (default 8)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (converge->parsed()) return run_converge(conv);
        if (census->parsed()) return run_census(cens);
        if (oracle->parsed()) return run_oracle_compare(orc);
    } catch (const twospecies::invariant_violation& e) {
        std::cerr << "invariant violation: " << e.invariant() << '\n';
        return 70;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 66;
    }
    return 0;
}
