#include "earfit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace earfit::io {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& token, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    // trailing whitespace is fine
    while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used])))
        ++used;
    if (used == 0 || used != token.size() || !std::isfinite(v))
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" + token +
                          "'");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open " + path.string() + " for reading");
    return in;
}

void check_written(const std::ostream& out, const std::filesystem::path& path) {
    if (!out)
        throw FormatError("failed writing " + path.string());
}

} // namespace

void write_spectrum(std::ostream& out, const ImpedanceSpectrum& spectrum) {
    out << "frequency_hz,re,im\n";
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        out << format_double(spectrum.frequency(i)) << ',' << format_double(spectrum.value(i).real())
            << ',' << format_double(spectrum.value(i).imag()) << '\n';
}

void write_spectrum(const std::filesystem::path& path, const ImpedanceSpectrum& spectrum) {
    auto out = open_out(path);
    write_spectrum(out, spectrum);
    check_written(out, path);
}

ImpedanceSpectrum read_spectrum(std::istream& in, SpectrumKind kind) {
    std::vector<double> f;
    std::vector<Complex> z;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            if (line != "frequency_hz,re,im")
                throw FormatError("expected header 'frequency_hz,re,im', got '" + line + "'");
            header_seen = true;
            continue;
        }
        std::stringstream row(line);
        std::string a, b, c, extra;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',') ||
            std::getline(row, extra, ','))
            throw FormatError("line " + std::to_string(line_no) + ": expected three columns");
        f.push_back(parse_double(a, line_no));
        z.emplace_back(parse_double(b, line_no), parse_double(c, line_no));
    }
    if (!header_seen)
        throw FormatError("spectrum file has no header");
    try {
        return ImpedanceSpectrum(kind, std::move(f), std::move(z));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

ImpedanceSpectrum read_spectrum(const std::filesystem::path& path, SpectrumKind kind) {
    auto in = open_in(path);
    try {
        return read_spectrum(in, kind);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_area_table(const std::filesystem::path& path, const AreaFunctionParams& area,
                      int samples) {
    auto out = open_out(path);
    out << "x_m,area_m2\n";
    for (const AreaSample& s : sample_area(area, samples))
        out << format_double(s.x) << ',' << format_double(s.area) << '\n';
    check_written(out, path);
}

// -- JSON --------------------------------------------------------------------

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

void require_range(double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi))
        throw FormatError(std::string(what) + " = " + format_double(v) + " is outside [" +
                          format_double(lo) + ", " + format_double(hi) + "]");
}

Json resonators_to_json(const TwoResonatorParams& r) {
    return Json{{"L01", r.level_db}, {"dL", r.level_offset_db}, {"Q1", r.quality1},
                {"Q2", r.quality2},  {"f01", r.resonance1_hz}, {"f02", r.resonance2_hz}};
}

TwoResonatorParams resonators_from_json(const Json& j, const TwoResonatorParams& d) {
    TwoResonatorParams r;
    r.level_db = get_or(j, "L01", d.level_db);
    r.level_offset_db = get_or(j, "dL", d.level_offset_db);
    r.quality1 = get_or(j, "Q1", d.quality1);
    r.quality2 = get_or(j, "Q2", d.quality2);
    r.resonance1_hz = get_or(j, "f01", d.resonance1_hz);
    r.resonance2_hz = get_or(j, "f02", d.resonance2_hz);
    return r;
}

Json area_to_json(const AreaFunctionParams& a) {
    return Json{{"S0", a.mean_area}, {"cos", a.cos_coeffs}, {"sin", a.sin_coeffs},
                {"length", a.length}};
}

AreaFunctionParams area_from_json(const Json& j, const AreaFunctionParams& d) {
    AreaFunctionParams a;
    a.mean_area = get_or(j, "S0", d.mean_area);
    a.cos_coeffs = get_or(j, "cos", d.cos_coeffs);
    a.sin_coeffs = get_or(j, "sin", d.sin_coeffs);
    a.length = get_or(j, "length", d.length);
    if (a.cos_coeffs.size() != a.sin_coeffs.size())
        throw FormatError("area: 'cos' and 'sin' must have the same length");
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("area: ") + e.what());
    }
    return a;
}

const char* distribution_name(FrequencyDistribution d) {
    return d == FrequencyDistribution::logarithmic ? "log" : "linear";
}

} // namespace

Json to_json(const Medium& medium) {
    return Json{{"density", medium.density}, {"speed_of_sound", medium.speed_of_sound}};
}

Medium medium_from_json(const Json& j, const Medium& defaults) {
    Medium m;
    m.density = get_or(j, "density", defaults.density);
    m.speed_of_sound = get_or(j, "speed_of_sound", defaults.speed_of_sound);
    require_range(m.density, 1e-3, 100.0, "medium.density");
    require_range(m.speed_of_sound, 10.0, 1e4, "medium.speed_of_sound");
    return m;
}

Json to_json(const ModelParameters& p) {
    Json eardrum = resonators_to_json(p.drum);
    eardrum["V"] = p.cone_volume;
    return Json{{"area", area_to_json(p.area)}, {"eardrum", eardrum}};
}

ModelParameters parameters_from_json(const Json& j, const ModelParameters& defaults) {
    ModelParameters p = defaults;
    const Json empty = Json::object();
    const Json& area = j.contains("area") ? j.at("area") : empty;
    const Json& drum = j.contains("eardrum") ? j.at("eardrum") : empty;
    p.area = area_from_json(area, defaults.area);
    p.drum = resonators_from_json(drum, defaults.drum);
    p.cone_volume = get_or(drum, "V", defaults.cone_volume);
    return p;
}

SimulationInput simulation_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("area"))
        throw FormatError("simulation parameters need an 'area' object");
    SimulationInput s;
    s.medium = medium_from_json(j.value("medium", Json::object()));
    const ModelParameters base = FitBounds::defaults(4).basic;
    const ModelParameters p = parameters_from_json(j, base);
    s.area = p.area;
    s.load = p.load();
    const Json drum = j.value("eardrum", Json::object());
    const std::string mode = get_or<std::string>(drum, "mode", "two_resonator");
    if (mode == "rigid")
        s.load.mode = TerminationMode::rigid;
    else if (mode != "two_resonator")
        throw FormatError("eardrum.mode must be 'two_resonator' or 'rigid', got '" + mode + "'");
    if (s.load.mode == TerminationMode::two_resonator_with_cone) {
        try {
            s.load.resonators.validate();
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string("eardrum: ") + e.what());
        }
        if (!(s.load.cone.volume >= 0.0))
            throw FormatError("eardrum.V must be non-negative");
    }
    return s;
}

Json to_json(const SimulationInput& input) {
    Json eardrum = resonators_to_json(input.load.resonators);
    eardrum["V"] = input.load.cone.volume;
    eardrum["mode"] = input.load.mode == TerminationMode::rigid ? "rigid" : "two_resonator";
    return Json{{"medium", to_json(input.medium)},
                {"area", area_to_json(input.area)},
                {"eardrum", eardrum}};
}

Json to_json(const FitConfig& c) {
    const FitBounds b = c.effective_bounds();
    Json optimizer{{"x_tolerance", c.optimizer.x_tolerance},
                   {"f_tolerance", c.optimizer.f_tolerance},
                   {"evals_per_dimension", c.optimizer.evals_per_dimension}};
    optimizer["max_evals"] = c.optimizer.max_evals ? Json(*c.optimizer.max_evals) : Json(nullptr);
    return Json{
        {"medium", to_json(c.medium)},
        {"order", c.order},
        {"weights",
         {{"A", c.weights.magnitude_weight},
          {"B", c.weights.phase_weight},
          {"H1", c.weights.area_floor},
          {"H2", c.weights.end_margin}}},
        {"frequency_set",
         {{"count", c.frequencies.count},
          {"f_lo", c.frequencies.f_lo},
          {"f_cap", c.frequencies.f_cap},
          {"distribution", distribution_name(c.frequencies.distribution)},
          {"include_extrema", c.frequencies.include_extrema}}},
        {"multistart",
         {{"n_starts", c.multistart.n_starts},
          {"restarts", c.multistart.restarts},
          {"seed", c.multistart.seed}}},
        {"optimizer", optimizer},
        {"penalty_samples", c.penalty_samples},
        {"execution", c.execution == Execution::parallel ? "parallel" : "serial"},
        {"bounds", {{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}, {"basic", to_json(b.basic)}}},
    };
}

FitConfig fit_config_from_json(const Json& j) {
    if (!j.is_object())
        throw FormatError("fit configuration must be a JSON object");
    FitConfig c;
    c.medium = medium_from_json(j.value("medium", Json::object()));
    c.order = get_or(j, "order", c.order);
    if (c.order < 1 || c.order > 8)
        throw FormatError("order must be within 1..8");

    const Json w = j.value("weights", Json::object());
    c.weights.magnitude_weight = get_or(w, "A", c.weights.magnitude_weight);
    c.weights.phase_weight = get_or(w, "B", c.weights.phase_weight);
    c.weights.area_floor = get_or(w, "H1", c.weights.area_floor);
    c.weights.end_margin = get_or(w, "H2", c.weights.end_margin);
    require_range(c.weights.magnitude_weight, 0.0, 1e6, "weights.A");
    require_range(c.weights.phase_weight, 0.0, 1e6, "weights.B");
    require_range(c.weights.area_floor, 1e-9, 1e-3, "weights.H1");
    require_range(c.weights.end_margin, 0.0, 1e-3, "weights.H2");

    const Json fs = j.value("frequency_set", Json::object());
    c.frequencies.count = get_or(fs, "count", c.frequencies.count);
    c.frequencies.f_lo = get_or(fs, "f_lo", c.frequencies.f_lo);
    c.frequencies.f_cap = get_or(fs, "f_cap", c.frequencies.f_cap);
    c.frequencies.include_extrema = get_or(fs, "include_extrema", c.frequencies.include_extrema);
    const std::string dist = get_or<std::string>(fs, "distribution", "log");
    if (dist == "log")
        c.frequencies.distribution = FrequencyDistribution::logarithmic;
    else if (dist == "linear")
        c.frequencies.distribution = FrequencyDistribution::linear;
    else
        throw FormatError("frequency_set.distribution must be 'log' or 'linear'");
    require_range(c.frequencies.count, 2, 1000, "frequency_set.count");
    require_range(c.frequencies.f_lo, 1.0, 1e5, "frequency_set.f_lo");
    require_range(c.frequencies.f_cap, c.frequencies.f_lo + 1.0, 1e5, "frequency_set.f_cap");

    const Json ms = j.value("multistart", Json::object());
    c.multistart.n_starts = get_or(ms, "n_starts", c.multistart.n_starts);
    c.multistart.restarts = get_or(ms, "restarts", c.multistart.restarts);
    c.multistart.seed = get_or(ms, "seed", c.multistart.seed);
    require_range(c.multistart.n_starts, 1, 1000, "multistart.n_starts");
    require_range(c.multistart.restarts, 0, 100, "multistart.restarts");

    const Json opt = j.value("optimizer", Json::object());
    c.optimizer.x_tolerance = get_or(opt, "x_tolerance", c.optimizer.x_tolerance);
    c.optimizer.f_tolerance = get_or(opt, "f_tolerance", c.optimizer.f_tolerance);
    c.optimizer.evals_per_dimension =
        get_or(opt, "evals_per_dimension", c.optimizer.evals_per_dimension);
    if (opt.contains("max_evals") && !opt.at("max_evals").is_null())
        c.optimizer.max_evals = get_or<long>(opt, "max_evals", 0);
    require_range(c.optimizer.evals_per_dimension, 1, 1e6, "optimizer.evals_per_dimension");

    c.penalty_samples = get_or(j, "penalty_samples", c.penalty_samples);
    require_range(c.penalty_samples, 2, 1e5, "penalty_samples");

    const std::string exec = get_or<std::string>(j, "execution", "parallel");
    if (exec == "parallel")
        c.execution = Execution::parallel;
    else if (exec == "serial")
        c.execution = Execution::serial;
    else
        throw FormatError("execution must be 'parallel' or 'serial'");

    if (j.contains("bounds")) {
        const Json& bj = j.at("bounds");
        FitBounds b = FitBounds::defaults(c.order);
        b.lower = parameters_from_json(bj.value("lower", Json::object()), b.lower);
        b.upper = parameters_from_json(bj.value("upper", Json::object()), b.upper);
        b.basic = parameters_from_json(bj.value("basic", Json::object()), b.basic);
        c.bounds = b;
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("fit configuration: ") + e.what());
    }
    return c;
}

Json report_to_json(const FitResult& r, const ReportFiles& files) {
    Json starts = Json::array();
    for (std::size_t i = 0; i < r.starts.size(); ++i) {
        const StartDiagnostics& s = r.starts[i];
        Json runs = Json::array();
        for (const RunDiagnostics& run : s.runs)
            runs.push_back({{"best_value", run.best_value},
                            {"iterations", run.iterations},
                            {"evaluations", run.evaluations},
                            {"converged", run.converged}});
        starts.push_back({{"index", i},
                          {"fit_cost", s.fit_cost},
                          {"selection_cost", s.selection_cost},
                          {"evaluations", s.evaluations},
                          {"eval_limit_reached", s.eval_limit_reached},
                          {"runs", runs},
                          {"initial", to_json(s.initial)},
                          {"optimum", to_json(s.optimum)}});
    }
    return Json{
        {"format", "earfit-report"},
        {"version", 1},
        {"medium", to_json(r.medium)},
        {"parameters", to_json(r.parameters)},
        {"cost",
         {{"J0", r.cost.misfit},
          {"J1", r.cost.area_floor},
          {"J2", r.cost.end_minimum},
          {"total", r.cost.total()}}},
        {"selection_cost_full_grid", r.selection_cost},
        {"penalty_active", r.penalty_active},
        {"length_estimate",
         {{"length_m", r.length_estimate.length},
          {"peak_frequency_hz", r.length_estimate.peak_frequency},
          {"fallback", r.length_estimate.fallback}}},
        {"bounds",
         {{"lower", to_json(r.bounds.lower)},
          {"upper", to_json(r.bounds.upper)},
          {"basic", to_json(r.bounds.basic)}}},
        {"frequency_set_hz", r.frequency_set},
        {"best_start", r.best_start},
        {"starts", starts},
        {"files", {{"zin", files.zin}, {"ztr", files.ztr}, {"area", files.area}}},
    };
}

StoredReport report_from_json(const Json& j) {
    if (!j.is_object() || j.value("format", std::string{}) != "earfit-report")
        throw FormatError("not an earfit report");
    StoredReport r;
    r.medium = medium_from_json(j.value("medium", Json::object()));
    if (!j.contains("parameters"))
        throw FormatError("report has no parameters");
    r.parameters = parameters_from_json(j.at("parameters"), FitBounds::defaults(4).basic);
    const Json files = j.value("files", Json::object());
    r.files.zin = get_or<std::string>(files, "zin", r.files.zin);
    r.files.ztr = get_or<std::string>(files, "ztr", r.files.ztr);
    r.files.area = get_or<std::string>(files, "area", r.files.area);
    r.document = j;
    return r;
}

Json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    check_written(out, path);
}

void write_validation_table(const std::filesystem::path& path, const Validation& v) {
    auto out = open_out(path);
    out << "# J_val = " << format_double(v.jval) << '\n';
    out << "frequency_hz,level_db,phase_rad\n";
    for (std::size_t i = 0; i < v.frequencies.size(); ++i)
        out << format_double(v.frequencies[i]) << ',' << format_double(v.differences[i].level_db)
            << ',' << format_double(v.differences[i].phase_rad) << '\n';
    check_written(out, path);
}

void write_quantile_table(const std::filesystem::path& path, const QuantileCurves& q) {
    auto out = open_out(path);
    out << "frequency_hz,level_mean_db,level_q05_db,level_q95_db,phase_mean_rad,phase_q05_rad,"
           "phase_q95_rad\n";
    for (std::size_t i = 0; i < q.frequencies.size(); ++i)
        out << format_double(q.frequencies[i]) << ',' << format_double(q.level_mean[i]) << ','
            << format_double(q.level_q05[i]) << ',' << format_double(q.level_q95[i]) << ','
            << format_double(q.phase_mean[i]) << ',' << format_double(q.phase_q05[i]) << ','
            << format_double(q.phase_q95[i]) << '\n';
    check_written(out, path);
}

} // namespace earfit::io
