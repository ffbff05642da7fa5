#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "finopt/config.hpp"
#include "finopt/fields.hpp"

namespace finopt {

constexpr int schema_version = 1;

/// Named columns of equal length. Headers carry their SI unit, e.g. "x_m".
struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> columns;

    void add(std::string header, std::vector<double> values);
    void add(std::string header, const VectorXd& values);
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Shortest text that parses back to the same double (17 significant digits); "nan" for NaN.
std::string format_double(double v);

/// Writes `stem`.csv or `stem`.json and returns the path written.
std::filesystem::path write_table(const std::filesystem::path& stem, const Table& table, OutputFormat format);
Table read_csv(const std::filesystem::path& path);

/// Writes a JSON document with a trailing newline; `schema_version` is added when absent.
void write_json(const std::filesystem::path& path, nlohmann::json doc);

/// Nodal radius from the x_m and a_m columns of a profile file.
RadiusProfile read_profile_csv(const std::filesystem::path& path, double a0);

}  // namespace finopt
