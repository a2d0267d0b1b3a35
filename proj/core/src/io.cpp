#include "sdlab/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "sdlab/errors.hpp"

namespace sdlab::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

json optional_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw Error("truncated binary trajectory");
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

json to_json(const HypothesisAudit& a) {
    json j;
    j["class"] = a.degeneracy_class ? json(std::string(to_string(*a.degeneracy_class))) : json(nullptr);
    j["min_k1"] = a.min_k1;
    j["min_k2"] = a.min_k2;
    j["sum_ok"] = a.sum_ok;
    j["theta"] = a.theta ? json(*a.theta) : json(nullptr);
    j["theta_bounded_below"] = a.theta_bounded_below;
    j["sigma"] = a.sigma ? optional_number(*a.sigma) : json(nullptr);
    j["b_monotone_ok"] = a.b_monotone_ok;
    j["lambda_admissible"] = a.lambda_admissible ? json(*a.lambda_admissible) : json(nullptr);
    j["localization"] = std::string(to_string(a.localization));
    json v = json::array();
    for (const auto& viol : a.violations) {
        v.push_back({{"x", optional_number(viol.x)}, {"quantity", viol.quantity}, {"value", optional_number(viol.value)}});
    }
    j["violations"] = v;
    return j;
}

json to_json(const HardyReport& r) {
    return {{"cstar_h", r.cstar_h},
            {"mu_min", r.mu_min},
            {"analytic_bound", r.analytic_bound ? json(*r.analytic_bound) : json(nullptr)},
            {"mesh_n", r.mesh_n},
            {"iterations", r.iterations}};
}

json to_json(const CoercivityReport& r) {
    return {{"lambda", r.lambda},
            {"Lambda_h", r.Lambda_h},
            {"min_eig_shifted", r.min_eig_shifted},
            {"admissible", r.admissible}};
}

json to_json(const CarlemanReport& r) {
    return {{"s", r.s},
            {"lhs", r.lhs},
            {"rhs_source", r.rhs_source},
            {"rhs_boundary", r.rhs_boundary},
            {"ratio", optional_number(r.ratio)}};
}

json to_json(const ObservabilityReport& r) {
    return {{"c_T", optional_number(r.c_T)},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"observable", r.observable},
            {"history", r.history}};
}

json to_json(const ControlResult& r) {
    return {{"terminal_norm", r.terminal_norm},
            {"cost", r.cost},
            {"cost_ratio", optional_number(r.cost_ratio)},
            {"cg_iters", r.cg_iters},
            {"epsilon", r.epsilon},
            {"converged", r.converged},
            {"functional", r.functional}};
}

json carleman_summary(const std::vector<CarlemanReport>& scan, double s0, const CarlemanWeight& w) {
    double max_ratio = -std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    json reports = json::array();
    for (const auto& r : scan) {
        max_ratio = std::max(max_ratio, r.ratio);
        min_ratio = std::min(min_ratio, r.ratio);
        reports.push_back(to_json(r));
    }
    return {{"max_ratio", optional_number(max_ratio)},
            {"min_ratio", optional_number(min_ratio)},
            {"s0", s0},
            {"c1", w.c1},
            {"c2", w.c2},
            {"reports", reports}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::span<const double>>& columns) {
    if (header.size() != columns.size()) throw DimensionError("csv: header and column counts differ");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) throw DimensionError("csv: columns have different lengths");
    }
    auto out = open_out(path);
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_double(columns[k][i]);
        out << '\n';
    }
}

void write_mesh_csv(const std::filesystem::path& path, const Mesh& mesh) {
    write_columns_csv(path, {"x"}, {mesh.nodes});
}

void write_coo(const std::filesystem::path& path, const SymTridiagonal& a) {
    auto out = open_out(path);
    const auto d = a.diag();
    const auto o = a.off();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i > 0) out << i << ' ' << i - 1 << ' ' << format_double(o[i - 1]) << '\n';
        out << i << ' ' << i << ' ' << format_double(d[i]) << '\n';
        if (i + 1 < d.size()) out << i << ' ' << i + 1 << ' ' << format_double(o[i]) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const DiscreteOperator& op, const TimeGrid& tg,
                          const Trajectory& traj, const std::string& value_name) {
    if (traj.n_dof() != op.n_dof() || traj.n_steps() != tg.n_steps) {
        throw DimensionError("trajectory csv: trajectory does not conform");
    }
    auto out = open_out(path);
    out << "t,x," << value_name << '\n';
    for (int n = 0; n <= traj.n_steps(); ++n) {
        const auto full = op.expand(traj.row(n));
        const std::string t = format_double(tg.time(n));
        for (std::size_t i = 0; i < full.size(); ++i) {
            out << t << ',' << format_double(op.mesh.nodes[i]) << ',' << format_double(full[i]) << '\n';
        }
    }
}

void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(traj.n_steps()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(traj.n_dof()));
    for (double v : traj.values()) put_le<double>(out, v);
}

Trajectory read_trajectory_binary(const std::filesystem::path& path, TrajectoryKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    const auto n_steps = get_le<std::uint64_t>(in);
    const auto n_dof = get_le<std::uint64_t>(in);
    Trajectory traj(kind, static_cast<int>(n_steps), static_cast<std::size_t>(n_dof));
    for (double& v : traj.values()) v = get_le<double>(in);
    return traj;
}

void write_carleman_csv(const std::filesystem::path& path, const std::vector<CarlemanReport>& scan) {
    std::vector<double> s, lhs, src, bnd, ratio;
    for (const auto& r : scan) {
        s.push_back(r.s);
        lhs.push_back(r.lhs);
        src.push_back(r.rhs_source);
        bnd.push_back(r.rhs_boundary);
        ratio.push_back(r.ratio);
    }
    write_columns_csv(path, {"s", "lhs", "rhs_source", "rhs_boundary", "ratio"}, {s, lhs, src, bnd, ratio});
}

}  // namespace sdlab::io
