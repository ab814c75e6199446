#include "e3dtv/cli/run_config.hpp"

#include "e3dtv/errors.hpp"
#include "e3dtv/tensor_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace e3dtv::cli {
namespace {

struct KeyDefault {
    const char* key;
    const char* value;
};

// Empty defaults are derived at use time (see the accessors below).
constexpr KeyDefault kDefaults[] = {
    // run
    {"seed", "1"},
    {"threads", "1"},
    {"input", ""},
    {"reference", ""},
    {"measurement", ""},
    {"output_dir", "."},
    {"export_bands", ""},
    {"clip", "false"},
    // phantom
    {"h", "32"},
    {"w", "32"},
    {"s", "16"},
    {"phantom_rank", "3"},
    {"smoothness", "2.0"},
    // denoising
    {"c", "0.004"},
    {"tau", ""},
    {"lambda", ""},
    {"rank", "6"},
    {"baseline", "false"},
    {"mu0", "0.01"},
    {"mu_growth", "1.05"},
    {"mu_max", "1e6"},
    {"eps1", ""},
    {"eps2", "1e-6"},
    {"max_iters", "200"},
    // compressed sensing
    {"ratio", "0.2"},
    {"cs_tau", ""},
    {"cs_rank", ""},
    {"mu4_factor", "10"},
    {"cg_tol", "1e-8"},
    {"cg_max_iters", "500"},
    // noise
    {"noise_case", "a"},
    {"sigma", ""},
    {"impulse", ""},
    {"strict_variance", "false"},
    {"deadline_bands", ""},
    {"stripe_bands", ""},
    // benchmark
    {"bench_mode", "noise"},
    {"cases", "abcdef"},
    {"ratios", "0.003,0.01,0.05,0.1,0.2"},
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(key, text, "a finite number");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, text, "an integer");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& d : kDefaults) k.emplace_back(d.key);
        return k;
    }();
    return keys;
}

RunConfig::RunConfig() {
    for (const auto& d : kDefaults) values_[d.key] = Entry{d.value, Origin::Default};
}

void RunConfig::set(const std::string& key, const std::string& value, Origin origin) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = Entry{value, origin};
}

void RunConfig::set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = trim(std::string_view(assignment).substr(0, eq));
    set(key, trim(std::string_view(assignment).substr(eq + 1)), Origin::CommandLine);
}

void RunConfig::merge_text(std::string_view text, const std::string& source) {
    std::istringstream is{std::string(text)};
    std::string line;
    std::vector<std::string> seen;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ConfigError(where + ": key '" + key + "' given twice");
        }
        seen.push_back(key);
        if (!values_.contains(key)) throw ConfigError(where + ": unknown config key '" + key + "'");
        // A file never overrides a value already given on the command line.
        if (values_[key].origin == Origin::CommandLine) continue;
        set(key, trim(std::string_view(body).substr(eq + 1)), Origin::File);
    }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    Bytes bytes;
    try {
        bytes = read_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    merge_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

const RunConfig::Entry& RunConfig::entry(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

bool RunConfig::has(const std::string& key) const { return !entry(key).value.empty(); }
RunConfig::Origin RunConfig::origin(const std::string& key) const { return entry(key).origin; }

std::string RunConfig::get_string(const std::string& key) const { return entry(key).value; }

double RunConfig::get_double(const std::string& key) const {
    const std::string& v = entry(key).value;
    if (v.empty()) throw ConfigError("config key '" + key + "' is required");
    return parse_double(key, v);
}

long long RunConfig::get_int(const std::string& key) const {
    const std::string& v = entry(key).value;
    if (v.empty()) throw ConfigError("config key '" + key + "' is required");
    return parse_int(key, v);
}

std::uint64_t RunConfig::get_seed() const {
    const std::string& v = entry("seed").value;
    std::uint64_t seed = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, seed);
    if (v.empty() || ec != std::errc() || ptr != end) bad_value("seed", v, "an unsigned 64-bit integer");
    return seed;
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "a boolean (true/false)");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    for (const auto& part : split(entry(key).value, ',')) out.push_back(parse_double(key, part));
    return out;
}

std::vector<Index> RunConfig::get_band_list(const std::string& key, Index bands) const {
    std::vector<Index> out;
    if (!has(key)) return out;
    for (const auto& part : split(entry(key).value, ',')) {
        const long long b = parse_int(key, part);
        if (b < 1 || b > bands) {
            throw ConfigError("config key '" + key + "': band " + part + " outside 1.." + std::to_string(bands));
        }
        out.push_back(static_cast<Index>(b - 1));
    }
    return out;
}

std::optional<BandRange> RunConfig::get_band_range(const std::string& key, Index bands) const {
    if (!has(key)) return std::nullopt;
    const std::string& v = entry(key).value;
    const auto parts = split(v, '-');
    if (parts.size() != 2) bad_value(key, v, "a band range 'first-last'");
    const long long first = parse_int(key, parts[0]), last = parse_int(key, parts[1]);
    if (first < 1 || last < first || last > bands) {
        throw ConfigError("config key '" + key + "': range " + v + " outside 1.." + std::to_string(bands));
    }
    return BandRange{static_cast<Index>(first - 1), static_cast<Index>(last - 1)};
}

Dims RunConfig::phantom_dims() const {
    const long long h = get_int("h"), w = get_int("w"), s = get_int("s");
    if (h < 1 || w < 1 || s < 1) throw ConfigError("phantom dimensions h, w, s must be positive");
    return {static_cast<Index>(h), static_cast<Index>(w), static_cast<Index>(s)};
}

SolverConfig RunConfig::solver_config(Dims dims) const {
    SolverConfig cfg = SolverConfig::with_defaults(dims, get_double("c"), static_cast<Index>(get_int("rank")));
    if (has("tau")) cfg.tau = get_double("tau");
    if (has("lambda")) cfg.lambda = get_double("lambda");
    cfg.baseline_3dtv = get_bool("baseline");
    cfg.mu0 = get_double("mu0");
    cfg.mu_growth = get_double("mu_growth");
    cfg.mu_max = get_double("mu_max");
    cfg.eps1 = has("eps1") ? get_double("eps1") : 1e-6;
    cfg.eps2 = get_double("eps2");
    cfg.max_iters = static_cast<int>(get_int("max_iters"));
    cfg.threads = static_cast<int>(get_int("threads"));
    cfg.validate(dims.s);
    return cfg;
}

CsConfig RunConfig::cs_config(double ratio, Index bands) const {
    CsConfig cfg = CsConfig::for_ratio(ratio, bands);
    if (has("cs_tau")) cfg.tau = get_double("cs_tau");
    if (has("cs_rank")) cfg.rank = static_cast<Index>(get_int("cs_rank"));
    cfg.baseline_3dtv = get_bool("baseline");
    cfg.mu0 = get_double("mu0");
    cfg.mu_growth = get_double("mu_growth");
    cfg.mu_max = get_double("mu_max");
    cfg.mu4_factor = get_double("mu4_factor");
    if (has("eps1")) cfg.eps1 = get_double("eps1");
    cfg.eps2 = get_double("eps2");
    cfg.max_iters = static_cast<int>(get_int("max_iters"));
    cfg.cg_tol = get_double("cg_tol");
    cfg.cg_max_iters = static_cast<int>(get_int("cg_max_iters"));
    cfg.threads = static_cast<int>(get_int("threads"));
    cfg.validate(bands);
    return cfg;
}

NoiseSpec RunConfig::noise_spec(NoiseCase c, Index bands) const {
    NoiseSpec spec = NoiseSpec::preset(c, bands, get_seed());
    if (has("sigma")) {
        spec.gaussian_sigma = get_double("sigma");
        spec.sigma_max = spec.gaussian_sigma;
    }
    if (has("impulse")) {
        spec.impulse_ratio = get_double("impulse");
        spec.impulse_max = spec.impulse_ratio;
    }
    spec.strict_variance = get_bool("strict_variance");
    if (auto r = get_band_range("deadline_bands", bands)) spec.deadline_bands = *r;
    if (auto r = get_band_range("stripe_bands", bands)) spec.stripe_bands = *r;
    return spec;
}

NoiseSpec RunConfig::noise_spec(Index bands) const {
    try {
        return noise_spec(parse_noise_case(get_string("noise_case")), bands);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'noise_case': ") + e.what());
    }
}

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& [key, e] : values_) {
        if (!e.value.empty()) out += key + "=" + e.value + "\n";
    }
    return out;
}

}  // namespace e3dtv::cli
