// earfit: forward simulation, parameter fitting and validation of ear-canal
// impedance models from the command line.
//
// Exit codes: 0 success, 2 argument/input error, 3 numerical failure.

#include "earfit/fit.hpp"
#include "earfit/horn_fem.hpp"
#include "earfit/io.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace earfit;

namespace {

constexpr int kExitArgument = 2;
constexpr int kExitNumerical = 3;

struct GridOptions {
    double f_start = 100.0;
    double f_end = 20000.0;
    int count = 200;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--f-start", f_start, "First grid frequency in Hz")->capture_default_str();
        cmd.add_option("--f-end", f_end, "Last grid frequency in Hz")->capture_default_str();
        cmd.add_option("--count", count, "Number of grid points")->capture_default_str();
    }
    std::vector<double> grid() const { return linear_grid(f_start, f_end, count); }
};

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw io::FormatError("cannot create output directory " + dir.string());
}

int run_simulate(const fs::path& params_file, const GridOptions& grid, const fs::path& out_dir) {
    const io::SimulationInput input = io::simulation_from_json(io::read_json(params_file));
    const HornProblem problem{input.area, input.load, input.medium, 1.0};
    const ImpedancePair z = impedances(problem, grid.grid());
    ensure_directory(out_dir);
    io::write_spectrum(out_dir / "zin.csv", z.input);
    io::write_spectrum(out_dir / "ztr.csv", z.transfer);
    std::cout << "wrote " << z.input.size() << " frequencies to " << (out_dir / "zin.csv") << " and "
              << (out_dir / "ztr.csv") << '\n';
    return 0;
}

struct FitOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> f_cap;
    std::optional<std::string> distribution;
    std::optional<int> n_starts;
    std::optional<int> restarts;
    std::optional<int> order;
    bool serial = false;
};

int run_fit(const fs::path& data_file, const std::optional<fs::path>& config_file,
            const FitOverrides& o, const fs::path& out_dir) {
    io::Json cfg = config_file ? io::read_json(*config_file) : io::Json::object();
    if (o.seed)
        cfg["multistart"]["seed"] = *o.seed;
    if (o.n_starts)
        cfg["multistart"]["n_starts"] = *o.n_starts;
    if (o.restarts)
        cfg["multistart"]["restarts"] = *o.restarts;
    if (o.f_cap)
        cfg["frequency_set"]["f_cap"] = *o.f_cap;
    if (o.distribution)
        cfg["frequency_set"]["distribution"] = *o.distribution;
    if (o.order)
        cfg["order"] = *o.order;
    if (o.serial)
        cfg["execution"] = "serial";
    const FitConfig config = io::fit_config_from_json(cfg);

    const ImpedanceSpectrum data = io::read_spectrum(data_file, SpectrumKind::input);
    const FitResult result = fit(data, config);

    ensure_directory(out_dir);
    const io::ReportFiles files;
    io::write_spectrum(out_dir / files.zin, result.zin);
    io::write_spectrum(out_dir / files.ztr, result.ztr);
    io::write_area_table(out_dir / files.area, result.parameters.area);
    io::write_json(out_dir / "report.json", io::report_to_json(result, files));

    std::cout << "length estimate " << result.length_estimate.length * 1e3 << " mm"
              << (result.length_estimate.fallback ? " (fallback)" : "") << '\n'
              << "fit frequencies " << result.frequency_set.size() << ", best start "
              << result.best_start << '\n'
              << "J0 " << result.cost.misfit << ", J1 " << result.cost.area_floor << ", J2 "
              << result.cost.end_minimum << ", full-grid J0 " << result.selection_cost << '\n';
    if (result.penalty_active)
        std::cout << "warning: penalty terms active at the optimum; the fitted area function "
                     "violates the area floor or end-minimum constraint\n";
    std::cout << "report written to " << (out_dir / "report.json") << '\n';
    return 0;
}

int run_validate(const std::vector<fs::path>& reports, const std::vector<fs::path>& references,
                 const fs::path& out_dir) {
    if (reports.size() != references.size())
        throw std::invalid_argument("give one --reference per --report");
    ensure_directory(out_dir);
    std::vector<Validation> batch;
    io::Json summary = io::Json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const io::StoredReport report = io::report_from_json(io::read_json(reports[i]));
        const ImpedanceSpectrum fitted =
            io::read_spectrum(reports[i].parent_path() / report.files.ztr, SpectrumKind::transfer);
        const ImpedanceSpectrum reference =
            io::read_spectrum(references[i], SpectrumKind::transfer);
        batch.push_back(validate(fitted, reference));
        const std::string name = "validation_" + std::to_string(i) + ".csv";
        io::write_validation_table(out_dir / name, batch.back());
        summary.push_back({{"report", reports[i].string()},
                           {"reference", references[i].string()},
                           {"jval", batch.back().jval},
                           {"table", name}});
        std::cout << reports[i].string() << ": J_val = " << batch.back().jval << '\n';
    }
    io::Json doc{{"pairs", summary}};
    if (batch.size() > 1) {
        io::write_quantile_table(out_dir / "summary.csv", summarize(batch));
        doc["summary"] = "summary.csv";
    }
    io::write_json(out_dir / "validation.json", doc);
    return 0;
}

int run_oracle(const std::string& kind, double area, double length, const Medium& medium,
               const GridOptions& grid, const fs::path& out_file) {
    if (kind != "rigid_cylinder")
        throw std::invalid_argument("unknown oracle kind '" + kind + "'");
    if (!(area > 0.0) || !(length > 0.0))
        throw std::invalid_argument("oracle geometry needs positive area and length");
    std::vector<double> f, omitted;
    std::vector<Complex> z;
    for (double freq : grid.grid()) {
        const double kl = 2.0 * kPi * freq / medium.speed_of_sound * length;
        if (std::abs(std::sin(kl)) < 1e-12) {
            omitted.push_back(freq);
            continue;
        }
        f.push_back(freq);
        z.push_back(rigid_cylinder_input_impedance(area, length, medium, freq));
    }
    const ImpedanceSpectrum spectrum(SpectrumKind::input, f, z);
    std::ofstream out(out_file);
    if (!out)
        throw io::FormatError("cannot open " + out_file.string() + " for writing");
    for (double freq : omitted)
        out << "# omitted frequency_hz=" << freq << ": cot pole\n";
    io::write_spectrum(out, spectrum);
    if (!out)
        throw io::FormatError("failed writing " + out_file.string());
    std::cout << "wrote " << spectrum.size() << " rows to " << out_file.string();
    if (!omitted.empty())
        std::cout << " (" << omitted.size() << " pole rows omitted)";
    std::cout << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ear-canal transfer impedance estimation with a 1D horn model"};
    app.require_subcommand(1);

    fs::path out_dir = ".";
    GridOptions grid;

    auto* simulate = app.add_subcommand("simulate", "Forward-model Z_in and Z_tr spectra");
    fs::path params_file;
    simulate->add_option("--params", params_file, "Model parameter JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--output", out_dir, "Output directory")->capture_default_str();
    grid.add_to(*simulate);

    auto* fit_cmd = app.add_subcommand("fit", "Fit the model to input-impedance data");
    fs::path data_file;
    std::optional<fs::path> config_file;
    FitOverrides overrides;
    fit_cmd->add_option("--data", data_file, "Input impedance spectrum (CSV)")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--config", config_file, "Fit configuration JSON")->check(CLI::ExistingFile);
    fit_cmd->add_option("-o,--output", out_dir, "Output directory")->capture_default_str();
    fit_cmd->add_option("--seed", overrides.seed, "Multistart seed");
    fit_cmd->add_option("--f-cap", overrides.f_cap, "Highest fit frequency in Hz")
        ->check(CLI::IsMember({10000.0, 20000.0}));
    fit_cmd->add_option("--distribution", overrides.distribution, "Fit frequency spacing")
        ->check(CLI::IsMember({"log", "linear"}));
    fit_cmd->add_option("--n-starts", overrides.n_starts, "Number of initial parameter sets");
    fit_cmd->add_option("--restarts", overrides.restarts, "Nelder-Mead restarts per start");
    fit_cmd->add_option("-M,--order", overrides.order, "Fourier order of the area function")
        ->check(CLI::Range(1, 8));
    fit_cmd->add_flag("--serial", overrides.serial, "Run the starts on one thread");

    auto* validate_cmd = app.add_subcommand("validate", "Compare fitted Z_tr with reference data");
    std::vector<fs::path> reports, references;
    validate_cmd->add_option("--report", reports, "Fit report JSON (repeatable)")->required()->check(CLI::ExistingFile);
    validate_cmd->add_option("--reference", references, "Reference Z_tr CSV (repeatable)")->required()->check(CLI::ExistingFile);
    validate_cmd->add_option("-o,--output", out_dir, "Output directory")->capture_default_str();

    auto* oracle = app.add_subcommand("oracle", "Analytic reference spectra");
    std::string kind = "rigid_cylinder";
    double area = 6e-5, length = 0.03;
    Medium medium;
    fs::path out_file;
    oracle->add_option("--kind", kind, "Oracle kind")->check(CLI::IsMember({"rigid_cylinder"}))->capture_default_str();
    oracle->add_option("--area", area, "Cross-section in m^2")->capture_default_str();
    oracle->add_option("--length", length, "Length in m")->capture_default_str();
    oracle->add_option("--density", medium.density, "Air density in kg/m^3")->capture_default_str();
    oracle->add_option("--speed-of-sound", medium.speed_of_sound, "Speed of sound in m/s")->capture_default_str();
    oracle->add_option("-o,--output", out_file, "Output CSV file")->required();
    grid.add_to(*oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitArgument;
    }

    try {
        if (*simulate)
            return run_simulate(params_file, grid, out_dir);
        if (*fit_cmd)
            return run_fit(data_file, config_file, overrides, out_dir);
        if (*validate_cmd)
            return run_validate(reports, references, out_dir);
        if (*oracle)
            return run_oracle(kind, area, length, medium, grid, out_file);
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure at " << e.frequency() << " Hz: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FitFailure& e) {
        std::cerr << "fit failed: " << e.what() << '\n';
        for (std::size_t i = 0; i < e.starts().size(); ++i)
            std::cerr << "  start " << i << ": cost " << e.starts()[i].fit_cost << ", evaluations "
                      << e.starts()[i].evaluations << '\n';
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitArgument;
}
