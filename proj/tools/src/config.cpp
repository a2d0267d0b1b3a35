#include "sdlab/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sdlab/errors.hpp"

namespace sdlab::cli {

using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed.
class Section {
public:
    Section(const json& doc, std::string path) : path_(std::move(path)) {
        if (!doc.is_object()) throw ConfigError(where() + " must be an object");
        doc_ = &doc;
    }

    bool has(const char* key) const { return doc_->contains(key) && !(*doc_)[key].is_null(); }

    const json* raw(const char* key) {
        seen_.insert(key);
        return has(key) ? &(*doc_)[key] : nullptr;
    }

    void number(const char* key, double& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(where(key) + " must be finite");
        }
    }

    void number(const char* key, std::optional<double>& out) {
        if (raw(key)) {
            double v = 0.0;
            number(key, v);
            out = v;
        }
    }

    void integer(const char* key, int& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            out = v->get<int>();
        }
    }

    void string(const char* key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    void interval(const char* key, std::array<double, 2>& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                throw ConfigError(where(key) + " must be [alpha, beta]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
            if (!(0.0 <= out[0] && out[0] < out[1] && out[1] <= 1.0)) {
                throw ConfigError(where(key) + " needs 0 <= alpha < beta <= 1");
            }
        }
    }

    std::string where(const char* key = nullptr) const {
        return key ? path_ + "." + key : path_;
    }

    /// Throws on keys nobody asked for.
    void finish() const {
        for (const auto& [k, v] : doc_->items()) {
            if (!seen_.count(k)) throw ConfigError("unknown key " + where(k.c_str()));
        }
    }

private:
    const json* doc_ = nullptr;
    std::string path_;
    std::set<std::string> seen_;
};

void positive(const Section& s, const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(s.where(key) + " must be positive");
}

CoefficientSpec coefficient(Section& s, const char* key, CoefficientSpec fallback,
                            const std::filesystem::path& base_dir) {
    const json* v = s.raw(key);
    if (!v) return fallback;
    if (v->is_number()) return {v->get<double>(), {}};
    if (v->is_string()) {
        std::filesystem::path p = v->get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return {std::nullopt, p};
    }
    throw ConfigError(s.where(key) + " must be an exponent or a CSV path");
}

TimeScheme scheme_of(const std::string& name, const std::string& where) {
    if (name == "implicit_euler") return TimeScheme::ImplicitEuler;
    if (name == "crank_nicolson") return TimeScheme::CrankNicolson;
    throw ConfigError(where + " must be \"implicit_euler\" or \"crank_nicolson\"");
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::istringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i].empty()) throw ConfigError("empty path component in override " + key);
        if (!node->is_object()) throw ConfigError("override " + key + " descends into a non-object");
        node = &(*node)[path[i]];
        if (node->is_null()) *node = json::object();
    }
    if (path.empty() || path.back().empty()) throw ConfigError("empty path component in override " + key);
    if (!node->is_object()) throw ConfigError("override " + key + " descends into a non-object");
    (*node)[path.back()] = std::move(value);
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    Section root(doc, "config");

    if (const json* j = root.raw("coefficients")) {
        Section s(*j, "coefficients");
        auto& c = cfg.coefficients;
        s.number("x0", c.x0);
        c.a = coefficient(s, "a", c.a, base_dir);
        c.b = coefficient(s, "b", c.b, base_dir);
        if (s.has("lambda") && s.has("lambda_factor")) {
            throw ConfigError("coefficients.lambda and coefficients.lambda_factor are exclusive");
        }
        s.number("lambda", c.lambda);
        s.number("lambda_factor", c.lambda_factor);
        s.finish();
        if (!(c.x0 > 0.0 && c.x0 < 1.0)) throw ConfigError("coefficients.x0 must lie in (0, 1)");
    }

    if (const json* j = root.raw("mesh")) {
        Section s(*j, "mesh");
        auto& m = cfg.mesh;
        s.integer("n_cells", m.n_cells);
        s.number("grading", m.grading);
        s.integer("audit_grid", m.audit_grid);
        s.finish();
        if (m.n_cells < 16 || m.n_cells % 2 != 0) throw ConfigError("mesh.n_cells must be an even integer >= 16");
        if (m.grading && !(*m.grading >= 1.0)) throw ConfigError("mesh.grading must be >= 1");
        if (m.audit_grid < 64) throw ConfigError("mesh.audit_grid must be >= 64");
    }

    if (const json* j = root.raw("time")) {
        Section s(*j, "time");
        auto& t = cfg.time;
        s.number("T", t.T);
        s.integer("n_steps", t.n_steps);
        std::string scheme = t.scheme == TimeScheme::ImplicitEuler ? "implicit_euler" : "crank_nicolson";
        s.string("scheme", scheme);
        t.scheme = scheme_of(scheme, s.where("scheme"));
        s.finish();
        positive(s, "T", t.T);
        if (t.n_steps < 8) throw ConfigError("time.n_steps must be >= 8");
    }

    if (const json* j = root.raw("carleman")) {
        Section s(*j, "carleman");
        auto& c = cfg.carleman;
        s.number("c1", c.c1);
        s.number("c2_margin", c.c2_margin);
        if (const json* v = s.raw("s_list")) {
            if (!v->is_array()) throw ConfigError("carleman.s_list must be an array");
            c.s_list.clear();
            for (const auto& x : *v) {
                if (!x.is_number()) throw ConfigError("carleman.s_list must hold numbers");
                c.s_list.push_back(x.get<double>());
            }
            for (std::size_t i = 0; i < c.s_list.size(); ++i) {
                if (!(c.s_list[i] > 0.0) || (i > 0 && !(c.s_list[i] > c.s_list[i - 1]))) {
                    throw ConfigError("carleman.s_list must be positive and strictly increasing");
                }
            }
        }
        s.integer("n_s", c.n_s);
        s.interval("omega", c.omega);
        s.interval("omega_prime", c.omega_prime);
        s.finish();
        positive(s, "c1", c.c1);
        positive(s, "c2_margin", c.c2_margin);
        if (c.n_s < 2) throw ConfigError("carleman.n_s must be >= 2");
        if (!(c.omega[0] < c.omega_prime[0] && c.omega_prime[1] < c.omega[1])) {
            throw ConfigError("carleman.omega_prime must lie strictly inside carleman.omega");
        }
    }

    if (const json* j = root.raw("control")) {
        Section s(*j, "control");
        auto& c = cfg.control;
        s.interval("omega", c.omega);
        s.number("epsilon", c.epsilon);
        s.number("cg_tol", c.cg_tol);
        s.integer("cg_max", c.cg_max);
        s.integer("observability_iters", c.observability_iters);
        s.number("observability_tol", c.observability_tol);
        s.finish();
        if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) throw ConfigError("control.epsilon must lie in (0, 1]");
        if (!(c.cg_tol > 1e-14 && c.cg_tol < 1e-2)) throw ConfigError("control.cg_tol must lie in (1e-14, 1e-2)");
        if (c.cg_max < 1) throw ConfigError("control.cg_max must be >= 1");
        if (c.observability_iters < 1) throw ConfigError("control.observability_iters must be >= 1");
        positive(s, "observability_tol", c.observability_tol);
    }

    if (const json* j = root.raw("data")) {
        Section s(*j, "data");
        auto& d = cfg.data;
        s.string("u0", d.u0);
        if (const json* v = s.raw("seed")) {
            if (!v->is_number_unsigned()) throw ConfigError("data.seed must be a nonnegative integer");
            d.seed = v->get<std::uint64_t>();
        }
        s.finish();
        if (d.u0 != "sine" && d.u0 != "random") throw ConfigError("data.u0 must be \"sine\" or \"random\"");
    }

    if (const json* j = root.raw("output")) {
        Section s(*j, "output");
        auto& o = cfg.output;
        std::string dir = o.directory.string();
        s.string("directory", dir);
        if (dir.empty()) throw ConfigError("output.directory must not be empty");
        o.directory = dir;
        if (const json* v = s.raw("formats")) {
            if (!v->is_array()) throw ConfigError("output.formats must be an array");
            o.csv = false;
            o.binary = false;
            for (const auto& f : *v) {
                const std::string name = f.is_string() ? f.get<std::string>() : "";
                if (name == "csv") {
                    o.csv = true;
                } else if (name == "binary") {
                    o.binary = true;
                } else if (name != "json") {
                    throw ConfigError("output.formats entries must be \"json\", \"csv\" or \"binary\"");
                }
            }
        }
        s.finish();
    }

    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc, path.parent_path());
}

CoefficientPair make_pair(const ExperimentConfig& cfg) {
    const auto& c = cfg.coefficients;
    auto build = [&](const CoefficientSpec& spec) {
        return spec.exponent ? CoefficientFunction::power(*spec.exponent, c.x0)
                             : CoefficientFunction::from_csv(spec.csv, c.x0);
    };
    try {
        CoefficientPair pair{c.x0, build(c.a), build(c.b), c.lambda, cfg.time.T};
        pair.validate();
        return pair;
    } catch (const sdlab::Error& e) {
        throw ConfigError(std::string("coefficients: ") + e.what());
    }
}

}  // namespace sdlab::cli
