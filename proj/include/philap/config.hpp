#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "philap/existence.hpp"

namespace philap {

/// Flat INI document: `[section]` headers, `key = value` lines, `#`/`;` comments.
class IniDocument {
public:
    static IniDocument parse(std::string_view text);

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    const std::map<std::string, std::string>& section(const std::string& name) const;
    const std::map<std::string, std::map<std::string, std::string>>& sections() const noexcept {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct OutputOptions {
    std::string dir = ".";
    bool csv = true;
    bool json = true;
};

/// Everything a CLI run needs, resolved from a config file.
struct RunConfig {
    ProblemSpec problem;
    std::string phi_text;
    /// Subinterval where m >= 0, for sign-changing weights.
    std::optional<Interval> omega0;
    std::vector<double> sweep_lambdas;
    IterationOptions iteration;
    OutputOptions output;
};

/// Throws ConfigError (or ParseError) on unknown sections/keys, malformed
/// numbers or expressions, and missing required entries.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Strict number parsing; the whole string must be consumed.
double parse_number(std::string_view text, std::string_view what);
/// Comma-separated list of numbers.
std::vector<double> parse_number_list(std::string_view text, std::string_view what);

}  // namespace philap
