#pragma once

#include "e3dtv/cli/run_config.hpp"
#include "e3dtv/tensor_io.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace e3dtv::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitIo = 2,
    kExitNumerical = 3,
};

/// Output files of one command, held in memory until commit(). commit()
/// writes every file as a ".tmp" sibling first and renames them only once
/// all writes succeeded, so a failed command leaves no partial output.
class OutputStage {
public:
    explicit OutputStage(std::filesystem::path root) : root_(std::move(root)) {}

    void add(const std::filesystem::path& relative, Bytes bytes);
    void add_text(const std::filesystem::path& relative, const std::string& text);

    void commit();

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    [[nodiscard]] std::vector<std::filesystem::path> paths() const;

private:
    std::filesystem::path root_;
    std::vector<std::pair<std::filesystem::path, Bytes>> files_;
};

[[nodiscard]] const std::vector<std::string>& command_names();

/// Runs one command and maps failures to exit codes: ConfigError and other
/// std::invalid_argument to 1, FormatError and file errors to 2,
/// NumericalError and non-convergence to 3. Diagnostics go to `err`,
/// a short summary to `out`.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace e3dtv::cli
