#include "finopt/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace finopt {

void Table::add(std::string header, std::vector<double> values) {
    if (!columns.empty() && values.size() != rows()) {
        throw std::invalid_argument("Table::add: column '" + header + "' has the wrong length");
    }
    headers.push_back(std::move(header));
    columns.push_back(std::move(values));
}

void Table::add(std::string header, const VectorXd& values) {
    add(std::move(header), std::vector<double>(values.data(), values.data() + values.size()));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::filesystem::path write_table(const std::filesystem::path& stem, const Table& table, OutputFormat format) {
    std::filesystem::path path = stem;
    path += format == OutputFormat::Csv ? ".csv" : ".json";
    if (format == OutputFormat::Json) {
        nlohmann::json doc;
        doc["schema_version"] = schema_version;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            nlohmann::json col = nlohmann::json::array();
            for (double v : table.columns[c]) {
                if (std::isfinite(v)) {
                    col.push_back(v);
                } else {
                    col.push_back(nullptr);
                }
            }
            doc["columns"][table.headers[c]] = std::move(col);
        }
        write_json(path, std::move(doc));
        return path;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_table: cannot open " + path.string());
    for (std::size_t c = 0; c < table.headers.size(); ++c) out << (c ? "," : "") << table.headers[c];
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.columns[c][r]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_table: failed writing " + path.string());
    return path;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ":1: missing header row");
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) t.headers.push_back(h);
        t.columns.resize(t.headers.size());
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::size_t c = 0;
        while (std::getline(ss, field, ',')) {
            if (c >= t.columns.size()) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": too many fields");
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(field.c_str(), &end);
            if (field.empty() || *end != '\0' || errno == ERANGE) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            t.columns[c++].push_back(v);
        }
        if (c != t.columns.size()) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": too few fields");
    }
    return t;
}

void write_json(const std::filesystem::path& path, nlohmann::json doc) {
    if (!doc.contains("schema_version")) doc["schema_version"] = schema_version;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write_json: failed writing " + path.string());
}

RadiusProfile read_profile_csv(const std::filesystem::path& path, double a0) {
    const Table t = read_csv(path);
    auto column = [&](const std::string& name) -> const std::vector<double>& {
        for (std::size_t c = 0; c < t.headers.size(); ++c) {
            if (t.headers[c] == name) return t.columns[c];
        }
        throw ConfigError(path.string() + ": missing column " + name);
    };
    const auto& x = column("x_m");
    const auto& a = column("a_m");
    if (x.size() < 3) throw ConfigError(path.string() + ": needs at least 3 nodes");
    const Index n = static_cast<Index>(x.size()) - 1;
    const Grid grid(x.back(), n);
    for (Index i = 0; i <= n; ++i) {
        if (std::abs(x[static_cast<std::size_t>(i)] - grid.node(i)) > 1e-9 * grid.length()) {
            throw ConfigError(path.string() + ": x_m is not a uniform grid starting at 0 (row " + std::to_string(i + 2) + ")");
        }
    }
    RadiusProfile p{grid, Eigen::Map<const VectorXd>(a.data(), n + 1), a0};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return p;
}

}  // namespace finopt
