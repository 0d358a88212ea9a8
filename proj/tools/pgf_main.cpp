// Command-line driver: green-verify / cgo-build / dn-sim / reconstruct /
// carleman-probe. One JSON config file, flag overrides, machine-readable
// JSON summary on stdout. Exit codes: 0 pass, 1 invariant failure, 2
// usage/config error.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgf/carleman.hpp"
#include "pgf/cgo.hpp"
#include "pgf/errors.hpp"
#include "pgf/forward.hpp"
#include "pgf/green.hpp"
#include "pgf/io.hpp"
#include "pgf/reconstruct.hpp"

using nlohmann::json;
using namespace pgf;

namespace {

constexpr unsigned kDefaultSeed = 12345;

json default_config() {
    return json{
        {"problem", {{"n", 3}, {"m", 1}}},
        {"grid", {{"points_per_axis", 32}, {"half_width", 3.0}}},
        {"zeta", {{"s_list", {4.0, 8.0, 16.0}}}},
        {"green",
         {{"backend", "naive"},
          {"allow_unsafe", false},
          {"mollify", 1.0},
          {"sigma", -0.5},
          {"gaussian_width", 1.2},
          {"decay_width", 0.35},
          {"modulation_mode", {0, -7, 0}}}},
        {"cgo",
         {{"tol", 1e-8},
          {"max_iter", 200},
          {"s", 16.0},
          {"bump_radius", 0.9},
          {"bump_height", 5.0}}},
        {"forward", {{"a", 1.0}, {"K", 6}, {"Kt", 3}}},
        {"reconstruct",
         {{"xi_cutoff", 2.0},
          {"s_schedule", {8.0, 16.0}},
          {"conjugate_symmetry", true}}},
        {"carleman",
         {{"k_mags", {1.0, 2.0, 4.0, 8.0, 16.0}},
          {"t_offset", 0.5},
          {"half_width", 1.0},
          {"bump_radius", 0.5},
          {"r0", 0.55},
          {"w", 0.25}}},
        {"output", {{"directory", "pgf-out"}}},
        {"seed", kDefaultSeed},
    };
}

void deep_merge(json& base, const json& over) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) &&
            base[it.key()].is_object())
            deep_merge(base[it.key()], *it);
        else
            base[it.key()] = *it;
    }
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config file not found: " + path);
        json user;
        in >> user;  // throws json::exception on malformed input
        deep_merge(cfg, user);
    }
    return cfg;
}

GreenBackend parse_backend(const std::string& name) {
    if (name == "naive") return GreenBackend::naive;
    if (name == "paper") return GreenBackend::paper;
    throw std::runtime_error("unknown green backend: " + name);
}

GridSpec grid_from(const json& cfg) {
    return GridSpec(cfg["problem"]["n"].get<int>(), cfg["problem"]["m"].get<int>(),
                    cfg["grid"]["points_per_axis"].get<int>(),
                    cfg["grid"]["half_width"].get<double>());
}

std::filesystem::path out_dir(const json& cfg) {
    std::filesystem::path dir = cfg["output"]["directory"].get<std::string>();
    std::filesystem::create_directories(dir);
    return dir;
}

void emit_summary(json summary, const json& cfg, bool passed) {
    summary["seed"] = cfg["seed"];
    summary["threads"] = [] {
        const char* t = std::getenv("PGF_THREADS");
        return t ? std::atoi(t) : 1;
    }();
    summary["pass"] = passed;
    std::cout << summary.dump(2) << "\n";
}

/// Band-limited (modulated) Gaussian: spectral mass centered away from the
/// characteristic sphere for every s in the sweep.
ComplexField probe_input(const GridSpec& g, const json& green_cfg) {
    std::vector<double> c0(g.n, 0.0);
    ComplexField f =
        make_gaussian(g, c0, green_cfg["gaussian_width"].get<double>());
    std::vector<int> mode(g.n, 0);
    const auto& jm = green_cfg["modulation_mode"];
    for (int a = 0; a < g.n && a < static_cast<int>(jm.size()); ++a)
        mode[a] = jm[a].get<int>();
    bool modulated = false;
    for (int v : mode) modulated |= (v != 0);
    if (modulated) f = multiply(f, make_plane_wave(g, mode));
    return f;
}

int cmd_green_verify(const json& cfg) {
    const GridSpec g = grid_from(cfg);
    const int n = cfg["problem"]["n"], m = cfg["problem"]["m"];
    const GreenBackend backend =
        parse_backend(cfg["green"]["backend"].get<std::string>());
    const bool allow_unsafe = cfg["green"]["allow_unsafe"].get<bool>();
    const double sigma = cfg["green"]["sigma"].get<double>();
    const std::vector<double> s_list =
        cfg["zeta"]["s_list"].get<std::vector<double>>();
    const auto dir = out_dir(cfg);

    const ComplexField f = probe_input(g, cfg["green"]);
    const double res_tol = backend == GreenBackend::naive ? 1e-6 : 1e-2;

    std::ofstream res_csv(dir / "green_residuals.csv");
    res_csv << "s,residual\n";
    bool pass = true;
    json residuals = json::array();
    for (double s : s_list) {
        GreenOperator G =
            assemble_green(canonical_zeta(s, n), m, g, backend, allow_unsafe,
                           cfg["green"]["mollify"].get<double>());
        const double r = verify_fundamental(G, f);
        res_csv << s << "," << r << "\n";
        residuals.push_back({{"s", s}, {"residual", r}});
        pass = pass && r <= res_tol;
    }

    // Decay probe: broad centered Gaussian (its spectrum straddles the
    // near-characteristic region at every s in the sweep).
    std::vector<double> c0(g.n, 0.0);
    const ComplexField f_decay =
        make_gaussian(g, c0, cfg["green"]["decay_width"].get<double>());
    DecaySweep decay =
        probe_weighted_decay(s_list, f_decay, sigma, m, backend, allow_unsafe);
    std::ofstream dec_csv(dir / "green_decay.csv");
    dec_csv << "s,weighted_norm\n";
    for (std::size_t i = 0; i < decay.s_values.size(); ++i)
        dec_csv << decay.s_values[i] << "," << decay.norms[i] << "\n";
    pass = pass && decay.slope <= -m + 0.25;

    const double w0 = cfg["green"]["gaussian_width"].get<double>();
    const double s0 = s_list.front();
    LpSweep lp = probe_lp_bound(
        s_list,
        [&](double s) {
            std::vector<double> c0(g.n, 0.0);
            return make_gaussian(g, c0, w0 * s0 / s);
        },
        n, m, backend, allow_unsafe);
    std::ofstream lp_csv(dir / "green_lp.csv");
    lp_csv << "s,ratio\n";
    for (std::size_t i = 0; i < lp.s_values.size(); ++i)
        lp_csv << lp.s_values[i] << "," << lp.ratios[i] << "\n";
    pass = pass && lp.max_over_min <= 3.0;

    emit_summary(json{{"command", "green-verify"},
                      {"residuals", residuals},
                      {"decay_slope", decay.slope},
                      {"lp_max_over_min", lp.max_over_min},
                      {"failed_invariant",
                       pass ? "" : "green residual/decay/lp contract"}},
                 cfg, pass);
    return pass ? 0 : 1;
}

Potential potential_from(const json& cfg, const GridSpec& g,
                         const std::string& potential_file) {
    if (!potential_file.empty()) return Potential(read_field(potential_file));
    std::vector<double> c0(g.n, 0.0);
    return Potential(make_bump(g, c0, cfg["cgo"]["bump_radius"].get<double>(),
                               cd(cfg["cgo"]["bump_height"].get<double>(), 0.0)));
}

int cmd_cgo_build(const json& cfg, const std::string& potential_file) {
    const GridSpec g = grid_from(cfg);
    const int n = cfg["problem"]["n"], m = cfg["problem"]["m"];
    if (n <= 2 * m)
        throw std::runtime_error("cgo-build requires n > 2m");
    const auto dir = out_dir(cfg);
    const Potential pot = potential_from(cfg, g, potential_file);
    const double s = cfg["cgo"]["s"].get<double>();
    const ZetaVector zeta = canonical_zeta(s, n);
    GreenOperator G = assemble_green(
        zeta, m, g, parse_backend(cfg["green"]["backend"].get<std::string>()),
        cfg["green"]["allow_unsafe"].get<bool>());
    CGOSolution sol =
        build_cgo(pot, zeta, G, cfg["cgo"]["tol"].get<double>(),
                  cfg["cgo"]["max_iter"].get<int>());
    write_field((dir / "cgo_remainder.json").string(), sol.r);
    json diag{{"command", "cgo-build"},
              {"s", s},
              {"iterations", sol.iterations},
              {"contraction_factor", sol.contraction_factor},
              {"eq_residual", sol.eq_residual},
              {"r_norm_lp", sol.r_norm_lp},
              {"r_norm_l2K", sol.r_norm_l2K},
              {"low_s_flagged", sol.low_s_flagged},
              {"remainder_file", (dir / "cgo_remainder.json").string()}};
    std::ofstream(dir / "cgo_diagnostics.json") << diag.dump(2) << "\n";
    emit_summary(std::move(diag), cfg, true);
    return 0;
}

int cmd_dn_sim(const json& cfg, const std::string& potential_file) {
    const int n = cfg["problem"]["n"], m = cfg["problem"]["m"];
    const auto dir = out_dir(cfg);
    GalerkinBasis basis =
        make_basis(n, m, cfg["forward"]["a"].get<double>(),
                   cfg["forward"]["K"].get<int>(), cfg["forward"]["Kt"].get<int>());
    PotentialFn q;
    if (!potential_file.empty()) q = field_interpolant(read_field(potential_file));
    FormMatrices mats = assemble_form(basis, q);
    const AssumptionAReport rep = check_assumption_A(mats);
    DNMap dn = assemble_dn_map(mats, basis);
    const std::string dn_path = (dir / "dn_map.json").string();
    write_dn_map(dn_path, dn);
    emit_summary(json{{"command", "dn-sim"},
                      {"trace_size", basis.trace_size},
                      {"interior_size", basis.interior_size},
                      {"sigma_min", rep.sigma_min},
                      {"sigma_max", rep.sigma_max},
                      {"dn_file", dn_path}},
                 cfg, true);
    return 0;
}

int cmd_reconstruct(const json& cfg, const std::string& potential_file,
                    const std::string& dn_file, const std::string& dn0_file) {
    const int n = cfg["problem"]["n"], m = cfg["problem"]["m"];
    if (n <= 2 * m)
        throw std::runtime_error("reconstruct requires n > 2m");
    const auto dir = out_dir(cfg);
    const auto& rc = cfg["reconstruct"];
    const std::vector<double> sched = rc["s_schedule"].get<std::vector<double>>();
    const double cutoff = rc["xi_cutoff"].get<double>();
    const bool sym = rc["conjugate_symmetry"].get<bool>();

    ReconstructionResult result;
    if (!potential_file.empty()) {
        const Potential q(read_field(potential_file));
        result = reconstruct(
            q, cutoff, sched, m,
            parse_backend(cfg["green"]["backend"].get<std::string>()), sym,
            cfg["cgo"]["tol"].get<double>());
    } else if (!dn_file.empty() && !dn0_file.empty()) {
        const DNMap dn = read_dn_map(dn_file);
        const DNMap dn0 = read_dn_map(dn0_file);
        GalerkinBasis basis = make_basis(dn.n, dn.m, dn.a,
                                         cfg["forward"]["K"].get<int>(), dn.Kt);
        result = reconstruct(dn, dn0, basis, grid_from(cfg), cutoff, sched, sym);
    } else {
        std::cerr << "reconstruct needs either --potential (oracle mode) or "
                     "both --dn and --dn0 (boundary mode); run dn-sim first "
                     "to produce DN map files\n";
        return 2;
    }

    write_field((dir / "q_reconstructed.json").string(), result.q_rec);
    std::ofstream csv(dir / "reconstruct_rows.csv");
    csv << "xi,s_used,feasible,correction,r1_norm\n";
    int infeasible = 0;
    for (const ReconstructionRow& row : result.rows) {
        csv << "\"";
        for (std::size_t i = 0; i < row.xi.size(); ++i)
            csv << (i ? " " : "") << row.xi[i];
        csv << "\"," << row.s_used << "," << (row.feasible ? 1 : 0) << ","
            << row.correction_mag << "," << row.r1_norm << "\n";
        infeasible += row.feasible ? 0 : 1;
    }
    json summary{{"command", "reconstruct"},
                 {"modes_sampled", result.rows.size()},
                 {"infeasible_modes", infeasible},
                 {"max_imag", result.max_imag},
                 {"symmetry_enforced", result.symmetry_enforced},
                 {"field_file", (dir / "q_reconstructed.json").string()}};
    if (!result.qhat_truth.empty())
        summary["band_relative_error"] = band_relative_error(result);
    emit_summary(std::move(summary), cfg, true);
    return 0;
}

int cmd_carleman_probe(const json& cfg) {
    const int n = cfg["problem"]["n"], m = cfg["problem"]["m"];
    const auto dir = out_dir(cfg);
    const auto& cc = cfg["carleman"];
    const CarlemanConfig ccfg(m, n);
    // Probes run on their own (smaller) box: e^{k.x} with |k| up to 16
    // needs |x| bounded, and the log weight needs origin clearance.
    const GridSpec g(n, m, cfg["grid"]["points_per_axis"].get<int>(),
                     cc["half_width"].get<double>());

    // Linear probe: solid centered bump.
    std::vector<double> c0(n, 0.0);
    const double radius = cc["bump_radius"].get<double>();
    std::vector<CarlemanSample> solid;
    solid.push_back(
        {make_bump(g, c0, radius, cd(1.0, 0.0)), 0.0, radius, "bump", {}});

    std::vector<std::vector<double>> k_list;
    for (double mag : cc["k_mags"].get<std::vector<double>>()) {
        std::vector<double> k(n, 0.0);
        k[0] = mag;
        k_list.push_back(std::move(k));
    }
    CarlemanReport lin = probe_linear(ccfg, solid, k_list);

    // Log probe: annular bump vanishing near the origin.
    const double r0 = cc["r0"].get<double>(), w = cc["w"].get<double>();
    std::vector<CarlemanSample> annular;
    annular.push_back(
        {make_annular_bump(g, r0, w), r0 - w, r0 + w, "annular-bump", {}});
    const double t = 0.5 * (n - 2 * m) + cc["t_offset"].get<double>();
    CarlemanReport logr = probe_log(ccfg, annular, t);

    std::ofstream csv(dir / "carleman_probe.csv");
    write_probe_csv(csv, lin);
    write_probe_csv(csv, logr);

    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const ProbeRow& row : lin.rows)
        if (!row.skipped) {
            rmin = std::min(rmin, row.ratio);
            rmax = std::max(rmax, row.ratio);
        }
    const bool pass = std::isfinite(lin.empirical_constant) &&
                      std::isfinite(logr.empirical_constant);
    emit_summary(json{{"command", "carleman-probe"},
                      {"linear_ratio_spread", rmax / rmin},
                      {"linear_max_ratio", lin.empirical_constant},
                      {"log_max_ratio", logr.empirical_constant},
                      {"log_t", t},
                      {"delta", logr.delta},
                      {"delta_flagged", logr.delta_flagged}},
                 cfg, pass);
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polyharmonic Green/CGO toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // allow --config after the subcommand name
    std::string config_path, potential_file, dn_file, dn0_file;
    app.add_option("--config", config_path, "JSON configuration file");

    auto* green = app.add_subcommand("green-verify",
                                     "Green operator residual/decay/Lp probes");
    auto* cgo = app.add_subcommand("cgo-build", "Build a CGO remainder");
    cgo->add_option("--potential", potential_file, "potential field file");
    auto* dnsim = app.add_subcommand("dn-sim", "Assemble a DN map");
    dnsim->add_option("--potential", potential_file, "potential field file");
    auto* rec = app.add_subcommand("reconstruct", "Born reconstruction");
    rec->add_option("--potential", potential_file,
                    "potential field file (oracle mode)");
    rec->add_option("--dn", dn_file, "DN map file (boundary mode)");
    rec->add_option("--dn0", dn0_file, "reference DN map file (boundary mode)");
    auto* carl = app.add_subcommand("carleman-probe", "Carleman weight probes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors map to exit 2
    }

    try {
        const json cfg = load_config(config_path);
        if (cfg["problem"]["n"].get<int>() < 2 ||
            cfg["problem"]["m"].get<int>() < 1 ||
            cfg["cgo"]["tol"].get<double>() <= 0.0)
            throw std::runtime_error("config: invalid problem/tolerance values");
        if (green->parsed()) return cmd_green_verify(cfg);
        if (cgo->parsed()) return cmd_cgo_build(cfg, potential_file);
        if (dnsim->parsed()) return cmd_dn_sim(cfg, potential_file);
        if (rec->parsed())
            return cmd_reconstruct(cfg, potential_file, dn_file, dn0_file);
        if (carl->parsed()) return cmd_carleman_probe(cfg);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        // Config/usage problems (including our own validation messages).
        if (dynamic_cast<const Error*>(&e)) {
            std::cerr << "invariant failure: " << e.what() << "\n";
            return 1;
        }
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
