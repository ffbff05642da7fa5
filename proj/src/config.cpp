#include "finopt/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace finopt {

namespace {

namespace pt = boost::property_tree;

constexpr double mm = 1e-3;
constexpr double mm2 = 1e-6;
constexpr double mm3 = 1e-9;

const std::map<std::string, std::set<std::string>> known_keys{
    {"geometry", {"a0_mm", "length_mm"}},
    {"physics", {"k", "h_kind", "h", "h_start", "h_end", "h_before", "h_after", "x_step_mm", "step_width_mm",
                 "h_x_mm", "h_values", "h_r", "T_d", "T_inf"}},
    {"profile", {"kind", "radius_mm", "tip_radius_mm", "S_mm2", "m", "x_mm", "a_mm", "path"}},
    {"constraint", {"kind", "S0_mm2", "caption_factor", "caption_reading", "V0_mm3", "M_mm", "uncapped"}},
    {"sequence", {"kind", "S_mm2", "m", "n"}},
    {"numerics", {"n_cells", "convergence_cells", "max_iters", "tol", "seed"}},
    {"output", {"dir", "format"}},
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Typed access to one INI section with field-named diagnostics.
class Section {
public:
    Section(const pt::ptree* node, std::string name, std::string source)
        : node_(node), name_(std::move(name)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return node_ && node_->find(key) != node_->not_found(); }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? trim(node_->get<std::string>(key)) : fallback;
    }

    double number(const std::string& key, double fallback) const {
        return has(key) ? parse_number(key, text(key, "")) : fallback;
    }

    double required(const std::string& key) const {
        if (!has(key)) fail(key, "missing required value");
        return number(key, 0.0);
    }

    long integer(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        const std::string s = text(key, "");
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || *end != '\0' || errno == ERANGE) fail(key, "expected an integer, got '" + s + "'");
        return v;
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string s = text(key, "");
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail(key, "expected true or false, got '" + s + "'");
    }

    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        std::stringstream ss(text(key, ""));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(source_ + ": [" + name_ + "] " + key + ": " + what);
    }

private:
    double parse_number(const std::string& key, const std::string& s) const {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
            fail(key, "expected a finite number, got '" + s + "'");
        }
        return v;
    }

    const pt::ptree* node_;
    std::string name_;
    std::string source_;
};

ConvectionProfile parse_convection(const Section& s, double length) {
    const std::string kind = s.text("h_kind", "constant");
    if (kind == "constant") return ConvectionProfile::constant(s.required("h"));
    if (kind == "affine") return ConvectionProfile::affine(s.required("h_start"), s.required("h_end"), length);
    if (kind == "step") {
        return ConvectionProfile::step(s.required("h_before"), s.required("h_after"), s.required("x_step_mm") * mm,
                                       s.number("step_width_mm", 0.0) * mm);
    }
    if (kind == "table") {
        std::vector<double> x = s.list("h_x_mm");
        for (double& v : x) v *= mm;
        return ConvectionProfile::table(std::move(x), s.list("h_values"));
    }
    s.fail("h_kind", "expected constant, affine, step or table, got '" + kind + "'");
}

ProfileSpec parse_profile(const Section& s, const std::filesystem::path& base_dir) {
    ProfileSpec p;
    const std::string kind = s.text("kind", "constant");
    p.radius = s.number("radius_mm", 0.0) * mm;
    p.tip_radius = s.number("tip_radius_mm", 0.0) * mm;
    p.S = s.number("S_mm2", 0.0) * mm2;
    p.m = static_cast<int>(s.integer("m", 16));
    if (kind == "constant") {
        p.kind = ProfileKind::Constant;
    } else if (kind == "cone") {
        p.kind = ProfileKind::Cone;
        if (!s.has("tip_radius_mm")) s.fail("tip_radius_mm", "missing required value for a cone");
    } else if (kind == "asm") {
        p.kind = ProfileKind::Asm;
        if (!s.has("S_mm2")) s.fail("S_mm2", "missing required value for a_{S,m}");
    } else if (kind == "table") {
        p.kind = ProfileKind::Table;
        p.x = s.list("x_mm");
        p.a = s.list("a_mm");
        for (double& v : p.x) v *= mm;
        for (double& v : p.a) v *= mm;
        if (p.x.size() < 2 || p.x.size() != p.a.size()) s.fail("x_mm", "needs >= 2 samples matching a_mm");
    } else if (kind == "csv") {
        p.kind = ProfileKind::Csv;
        const std::filesystem::path path = s.text("path", "");
        if (path.empty()) s.fail("path", "missing profile.csv path");
        p.path = (path.is_absolute() ? path : base_dir / path).string();
    } else {
        s.fail("kind", "expected constant, cone, asm, table or csv, got '" + kind + "'");
    }
    return p;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [name, section] : tree) {
        const auto known = known_keys.find(name);
        if (known == known_keys.end()) throw ConfigError(source + ": unknown section [" + name + "]");
        for (const auto& entry : section) {
            if (!known->second.count(entry.first)) {
                throw ConfigError(source + ": [" + name + "] " + entry.first + ": unknown key");
            }
        }
    }
    auto section = [&](const std::string& name) {
        const auto child = tree.get_child_optional(name);
        return Section(child ? &*child : nullptr, name, source);
    };

    ExperimentConfig cfg;
    const Section geometry = section("geometry");
    cfg.a0 = geometry.number("a0_mm", 1.0) * mm;
    cfg.length = geometry.number("length_mm", 100.0) * mm;
    if (!(cfg.a0 > 0.0)) geometry.fail("a0_mm", "must be > 0");
    if (!(cfg.length > 0.0)) geometry.fail("length_mm", "must be > 0");

    const Section physics = section("physics");
    cfg.params.k = physics.number("k", 10.0);
    cfg.params.h = physics.has("h") || physics.has("h_kind") ? parse_convection(physics, cfg.length)
                                                             : ConvectionProfile::constant(10.0);
    const std::string h_r = physics.text("h_r", "h(l)");
    cfg.params.h_r = h_r == "h(l)" ? cfg.params.h(cfg.length) : physics.number("h_r", 0.0);
    cfg.params.T_d = physics.number("T_d", 10.0);
    cfg.params.T_inf = physics.number("T_inf", 0.0);
    if (!(cfg.params.h.min_on(cfg.length) > 0.0)) physics.fail("h", "h(x) must stay > 0 on [0, l]");

    cfg.profile = parse_profile(section("profile"),
                                std::filesystem::path(source).has_parent_path()
                                    ? std::filesystem::path(source).parent_path()
                                    : std::filesystem::path("."));

    const Section constraint = section("constraint");
    const std::string kind = constraint.text("kind", "surface");
    if (kind == "surface") {
        cfg.constraint = ConstraintKind::Surface;
    } else if (kind == "volume") {
        cfg.constraint = ConstraintKind::Volume;
    } else {
        constraint.fail("kind", "expected surface or volume, got '" + kind + "'");
    }
    if (constraint.has("S0_mm2")) {
        if (constraint.has("caption_factor")) constraint.fail("S0_mm2", "give either S0_mm2 or caption_factor");
        cfg.S0 = constraint.number("S0_mm2", 0.0) * mm2;
    } else {
        // A caption budget "S = f pi a0 l" read either as S0 = f a0 l or as the lateral area 2 pi S0.
        const double factor = constraint.number("caption_factor", 6.0);
        const std::string reading = constraint.text("caption_reading", "surface");
        if (reading != "surface" && reading != "area") {
            constraint.fail("caption_reading", "expected surface or area, got '" + reading + "'");
        }
        cfg.S0 = (reading == "area" ? 0.5 : 1.0) * factor * cfg.a0 * cfg.length;
    }
    cfg.V0 = constraint.number("V0_mm3", 0.0) * mm3;
    cfg.M_list = constraint.list("M_mm");
    for (double& M : cfg.M_list) M *= mm;
    cfg.uncapped = constraint.flag("uncapped", false);

    const Section sequence = section("sequence");
    const std::string seq = sequence.text("kind", "asm");
    if (seq == "asm") {
        cfg.sequence.kind = SequenceKind::Asm;
    } else if (seq == "bang") {
        cfg.sequence.kind = SequenceKind::Bang;
    } else if (seq == "volume") {
        cfg.sequence.kind = SequenceKind::Volume;
    } else {
        sequence.fail("kind", "expected asm, bang or volume, got '" + seq + "'");
    }
    cfg.sequence.S = sequence.number("S_mm2", 0.0) * mm2;
    cfg.sequence.m = static_cast<int>(sequence.integer("m", 16));
    cfg.sequence.n = static_cast<int>(sequence.integer("n", 5));

    const Section numerics = section("numerics");
    cfg.n_cells = numerics.integer("n_cells", 500);
    cfg.convergence_cells = numerics.integer("convergence_cells", 4096);
    cfg.max_iters = static_cast<int>(numerics.integer("max_iters", 5000));
    cfg.tol = numerics.number("tol", 1e-13);
    const long seed = numerics.integer("seed", 20240917);
    if (seed < 0) numerics.fail("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);

    const Section output = section("output");
    cfg.out_dir = output.text("dir", "out");
    const std::string format = output.text("format", "csv");
    if (format == "csv") {
        cfg.format = OutputFormat::Csv;
    } else if (format == "json") {
        cfg.format = OutputFormat::Json;
    } else {
        output.fail("format", "expected csv or json, got '" + format + "'");
    }

    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse_config(in, path);
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    try {
        cfg.params.validate(cfg.length);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (cfg.n_cells < 2) fail("[numerics] n_cells must be >= 2");
    if (cfg.convergence_cells < 8 || cfg.convergence_cells % 4 != 0) {
        fail("[numerics] convergence_cells must be a multiple of 4 and >= 8");
    }
    if (cfg.max_iters < 1) fail("[numerics] max_iters must be >= 1");
    if (!(cfg.tol >= 0.0)) fail("[numerics] tol must be >= 0");
    if (cfg.constraint == ConstraintKind::Surface && !(cfg.S0 >= cfg.a0 * cfg.length)) {
        fail("[constraint] S0 must be >= a0 * l");
    }
    if (cfg.constraint == ConstraintKind::Volume && !(cfg.V0 > 0.0)) fail("[constraint] V0_mm3 must be > 0");
    for (std::size_t i = 0; i < cfg.M_list.size(); ++i) {
        if (!(cfg.M_list[i] > cfg.a0)) fail("[constraint] every M must exceed a0");
        if (i > 0 && !(cfg.M_list[i] > cfg.M_list[i - 1])) fail("[constraint] M_mm must be increasing");
    }
    if (cfg.profile.kind == ProfileKind::Constant && cfg.profile.radius != 0.0 && cfg.profile.radius < cfg.a0) {
        fail("[profile] radius_mm must be >= a0");
    }
    if (cfg.profile.kind == ProfileKind::Cone && cfg.profile.tip_radius < cfg.a0) {
        fail("[profile] tip_radius_mm must be >= a0");
    }
    if (cfg.profile.kind == ProfileKind::Asm && cfg.profile.m < 1) fail("[profile] m must be >= 1");
    if (cfg.sequence.m < 1) fail("[sequence] m must be >= 1");
    if (cfg.sequence.n < 1) fail("[sequence] n must be >= 1");
}

const char* to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

}  // namespace finopt
