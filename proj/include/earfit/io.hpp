#ifndef EARFIT_IO_HPP
#define EARFIT_IO_HPP

#include "earfit/fit.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

namespace earfit::io {

using Json = nlohmann::ordered_json;

/// Malformed or unreadable input and unwritable output.
class FormatError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// -- spectra: "frequency_hz,re,im" rows after a header, '#' lines are comments

void write_spectrum(std::ostream& out, const ImpedanceSpectrum& spectrum);
void write_spectrum(const std::filesystem::path& path, const ImpedanceSpectrum& spectrum);
ImpedanceSpectrum read_spectrum(std::istream& in, SpectrumKind kind);
ImpedanceSpectrum read_spectrum(const std::filesystem::path& path, SpectrumKind kind);

/// "x_m,area_m2" table of the sampled area function.
void write_area_table(const std::filesystem::path& path, const AreaFunctionParams& area,
                      int samples = kDefaultAreaSamples);

// -- structured documents ----------------------------------------------------

Json to_json(const Medium& medium);
Medium medium_from_json(const Json& j, const Medium& defaults = {});

Json to_json(const ModelParameters& params);
/// Missing keys fall back to `defaults`, so partial documents act as overrides.
ModelParameters parameters_from_json(const Json& j, const ModelParameters& defaults);

/// Forward-model description accepted by `simulate`.
struct SimulationInput {
    Medium medium;
    AreaFunctionParams area;
    EardrumLoad load;
};
SimulationInput simulation_from_json(const Json& j);
Json to_json(const SimulationInput& input);

Json to_json(const FitConfig& config);
/// Unspecified fields keep their defaults; values outside sanity ranges throw.
FitConfig fit_config_from_json(const Json& j);

struct ReportFiles {
    std::string zin = "fit_zin.csv";
    std::string ztr = "fit_ztr.csv";
    std::string area = "area.csv";
};

Json report_to_json(const FitResult& result, const ReportFiles& files);

/// The parts of a stored report needed to reproduce or validate a fit.
struct StoredReport {
    Medium medium;
    ModelParameters parameters;
    ReportFiles files;
    Json document;
};
StoredReport report_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// -- validation tables -------------------------------------------------------

void write_validation_table(const std::filesystem::path& path, const Validation& v);
void write_quantile_table(const std::filesystem::path& path, const QuantileCurves& q);

} // namespace earfit::io

#endif
