// Command-line driver. Flags mirror RunConfig; a JSON file passed through
// --config overrides flag values. Exit codes: 0 ok, 2 validation, 3 numerical.

#include <string>

#include "CLI11.hpp"
#include "subres/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"subwavelength PT-dimer toolkit: spectra, screens, homogenization"};
    app.require_subcommand(0, 1);

    subres::RunConfig cfg;
    std::string config_path;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--shape", cfg.shape, "resonator shape: sphere|disk");
        sc->add_option("--radius", cfg.radius, "resonator radius");
        sc->add_option("--gap", cfg.gap, "surface-to-surface gap");
        sc->add_option("--a", cfg.a, "real part of v^2 delta");
        sc->add_option("--b", cfg.b, "gain/loss magnitude");
        sc->add_option("--v", cfg.v, "wave speed");
        sc->add_option("--L", cfg.L, "lattice period");
        sc->add_option("--dim", cfg.dim, "ambient dimension (2|3)");
        sc->add_option("--basis-order", cfg.basis_order, "discretization order (0 = default)");
        sc->add_option("--seed", cfg.seed, "RNG seed");
        sc->add_option("--out", cfg.out_path, "output path");
        sc->add_option("--config", config_path, "JSON config file; overrides flags");
        return sc;
    };

    add_common(app.add_subcommand("capacitance", "capacitance matrix of the dimer (JSON)"));

    auto* spec = add_common(
        app.add_subcommand("dimer-spectrum", "leading-order frequencies vs gain (CSV)"));
    spec->add_option("--b-range", [&cfg](const std::vector<std::string>& v) {
        if (v.size() != 2) return false;
        cfg.b_lo = std::stod(v[0]);
        cfg.b_hi = std::stod(v[1]);
        return true;
    }, "gain sweep range lo hi")->expected(2);
    spec->add_option("--b-count", cfg.b_count, "sweep point count");

    auto* band = add_common(app.add_subcommand("band", "quasiperiodic band structure (CSV)"));
    band->add_option("--npts", cfg.npts, "points along Gamma-M");

    auto* scat = add_common(
        app.add_subcommand("screen-scatter", "screen reflection/transmission sweep (CSV)"));
    scat->add_option("--omega-range", [&cfg](const std::vector<std::string>& v) {
        if (v.size() != 2) return false;
        cfg.omega_lo = std::stod(v[0]);
        cfg.omega_hi = std::stod(v[1]);
        return true;
    }, "frequency range lo hi (omit for the band window)")->expected(2);
    scat->add_option("--omega-count", cfg.omega_count, "sweep point count");
    scat->add_option("--w,--w1", cfg.w1, "in-plane incident direction cosine");

    auto* ext = add_common(
        app.add_subcommand("extraordinary", "peak transmittance vs gain (CSV)"));
    ext->add_option("--b-range", [&cfg](const std::vector<std::string>& v) {
        if (v.size() != 2) return false;
        cfg.b_lo = std::stod(v[0]);
        cfg.b_hi = std::stod(v[1]);
        return true;
    }, "gain grid range lo hi")->expected(2);
    ext->add_option("--b-count", cfg.b_count, "gain grid count");
    ext->add_option("--w,--w1", cfg.w1, "in-plane incident direction cosine");

    auto* cav = add_common(
        app.add_subcommand("cavity", "cloud microfield vs effective ball field (CSV)"));
    cav->add_option("--N-list", cfg.N_list, "scatterer counts")->delimiter(',');
    cav->add_option("--epsilon1", cfg.epsilon1, "separation exponent");
    cav->add_option("--cloud", cfg.cloud, "cloud kind: grid|poisson");

    auto* grn = add_common(
        app.add_subcommand("green-check", "spatial vs spectral lattice-sum cross-check (CSV)"));

    auto* fig = app.add_subcommand("figure", "run a preset figure recipe");
    fig->add_option("--tag", cfg.figure_tag, "fig2|fig4|fig5|fig6")->required();
    fig->add_option("--basis-order", cfg.basis_order, "discretization order (0 = default)");
    fig->add_option("--seed", cfg.seed, "RNG seed");
    fig->add_option("--out", cfg.out_path, "output path");
    fig->add_option("--config", config_path, "JSON config file; overrides flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::cout << app.help() << std::endl;
        return 2;
    }
    cfg.subcommand = subs[0]->get_name();

    // subcommand-specific defaults for parameters the user did not set
    if (cfg.subcommand == "cavity") {
        if (!cav->count("--a")) cfg.a = 1.0 / 3.0;
        if (!cav->count("--b")) cfg.b = -1.0;
    }
    if (cfg.subcommand == "green-check") {
        if (!grn->count("--dim")) cfg.dim = 2;
        if (!grn->count("--shape")) cfg.shape = "disk";
    }

    if (!config_path.empty()) {
        try {
            subres::apply_config_file(cfg, config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return subres::cli::run(cfg);
}
