#pragma once

#include "e3dtv/cs_solver.hpp"
#include "e3dtv/denoise.hpp"
#include "e3dtv/noise.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace e3dtv::cli {

/// Flat key = value settings for one CLI run.
///
/// Every key has a built-in default (possibly empty, meaning "derive it").
/// Values from a config file override the defaults and command-line values
/// override both. Unknown keys and malformed values throw ConfigError.
class RunConfig {
public:
    enum class Origin { Default, File, CommandLine };

    RunConfig();

    /// Parses "key = value" lines; '#' starts a comment. A key may appear
    /// only once per file.
    void merge_text(std::string_view text, const std::string& source);
    void merge_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value, Origin origin);
    /// "key=value" as given to --set.
    void set_assignment(const std::string& assignment);

    /// True when the key holds a non-empty value.
    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] Origin origin(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& key) const;
    [[nodiscard]] long long get_int(const std::string& key) const;
    [[nodiscard]] std::uint64_t get_seed() const;
    [[nodiscard]] bool get_bool(const std::string& key) const;
    [[nodiscard]] std::vector<double> get_double_list(const std::string& key) const;
    /// Comma-separated 1-based band numbers, returned 0-based.
    [[nodiscard]] std::vector<Index> get_band_list(const std::string& key, Index bands) const;
    /// "first-last", 1-based inclusive; nullopt when the key is empty.
    [[nodiscard]] std::optional<BandRange> get_band_range(const std::string& key, Index bands) const;

    [[nodiscard]] Dims phantom_dims() const;
    [[nodiscard]] SolverConfig solver_config(Dims dims) const;
    [[nodiscard]] CsConfig cs_config(double ratio, Index bands) const;
    [[nodiscard]] NoiseSpec noise_spec(NoiseCase c, Index bands) const;
    [[nodiscard]] NoiseSpec noise_spec(Index bands) const;

    /// Sorted "key=value" lines of every non-empty setting.
    [[nodiscard]] std::string dump() const;

    [[nodiscard]] static const std::vector<std::string>& known_keys();

private:
    struct Entry {
        std::string value;
        Origin origin = Origin::Default;
    };
    const Entry& entry(const std::string& key) const;
    std::map<std::string, Entry> values_;
};

}  // namespace e3dtv::cli
