#include "sdlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sdlab/errors.hpp"

namespace sdlab {

namespace {

constexpr double kAeRelTol = 1e-8;
constexpr double kAeFraction = 1e-3;

bool ae_passes(std::size_t failures, std::size_t checks) {
    return checks == 0 || static_cast<double>(failures) <= kAeFraction * static_cast<double>(checks);
}

void check_x0(double x0) {
    if (!(x0 > 0.0 && x0 < 1.0)) {
        std::ostringstream os;
        os << "degeneracy point x0 = " << x0 << " must lie in (0,1)";
        throw DomainError(os.str());
    }
}

}  // namespace

CoefficientFunction::CoefficientFunction(std::variant<PowerLaw, Tabulated> spec, double x0)
    : spec_(std::move(spec)), x0_(x0) {}

CoefficientFunction CoefficientFunction::power(double exponent, double x0) {
    check_x0(x0);
    if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
        throw DomainError("power-law exponent must be finite and nonnegative");
    }
    return CoefficientFunction(PowerLaw{exponent}, x0);
}

CoefficientFunction CoefficientFunction::tabulated(std::vector<double> x, std::vector<double> values,
                                                   double x0) {
    check_x0(x0);
    if (x.size() != values.size() || x.size() < 3) {
        throw DomainError("tabulated coefficient needs at least 3 (x, value) samples");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw DomainError("tabulated abscissae must be strictly increasing");
        }
    }
    constexpr double tol = 1e-12;
    auto has = [&](double v) {
        return std::any_of(x.begin(), x.end(), [&](double s) { return std::abs(s - v) <= tol; });
    };
    if (std::abs(x.front()) > tol || std::abs(x.back() - 1.0) > tol || !has(x0)) {
        throw DomainError("tabulated abscissae must include 0, x0 and 1");
    }
    x.front() = 0.0;
    x.back() = 1.0;
    for (auto& s : x) {
        if (std::abs(s - x0) <= tol) s = x0;
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("tabulated coefficient values must be finite");
    }
    return CoefficientFunction(Tabulated{std::move(x), std::move(values)}, x0);
}

CoefficientFunction CoefficientFunction::from_csv(const std::filesystem::path& path, double x0) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open coefficient table " + path.string());
    std::vector<double> xs;
    std::vector<double> vs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double xv = 0.0;
        double vv = 0.0;
        if (!(row >> xv >> vv)) {
            if (xs.empty() && lineno == 1) continue;  // header
            throw DomainError("malformed row " + std::to_string(lineno) + " in " + path.string());
        }
        xs.push_back(xv);
        vs.push_back(vv);
    }
    return tabulated(std::move(xs), std::move(vs), x0);
}

std::optional<double> CoefficientFunction::exponent() const noexcept {
    if (const auto* p = std::get_if<PowerLaw>(&spec_)) return p->exponent;
    return std::nullopt;
}

double CoefficientFunction::value(double x) const {
    if (const auto* p = std::get_if<PowerLaw>(&spec_)) {
        if (p->exponent == 0.0) return 1.0;
        return std::pow(std::abs(x - x0_), p->exponent);
    }
    const auto& t = std::get<Tabulated>(spec_);
    if (x <= t.x.front()) return t.values.front();
    if (x >= t.x.back()) return t.values.back();
    const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    const auto k = static_cast<std::size_t>(it - t.x.begin()) - 1;
    const double w = (x - t.x[k]) / (t.x[k + 1] - t.x[k]);
    return (1.0 - w) * t.values[k] + w * t.values[k + 1];
}

double CoefficientFunction::derivative(double x) const {
    if (const auto* p = std::get_if<PowerLaw>(&spec_)) {
        const double y = x - x0_;
        if (p->exponent == 0.0 || y == 0.0) return 0.0;
        return p->exponent * std::copysign(std::pow(std::abs(y), p->exponent - 1.0), y);
    }
    const auto& t = std::get<Tabulated>(spec_);
    std::size_t k = 0;
    if (x >= t.x.back()) {
        k = t.x.size() - 2;
    } else if (x > t.x.front()) {
        k = static_cast<std::size_t>(std::upper_bound(t.x.begin(), t.x.end(), x) - t.x.begin()) - 1;
    }
    return (t.values[k + 1] - t.values[k]) / (t.x[k + 1] - t.x[k]);
}

std::vector<double> CoefficientFunction::breakpoints(double lo, double hi) const {
    std::vector<double> out;
    if (x0_ > lo && x0_ < hi) out.push_back(x0_);
    if (const auto* t = std::get_if<Tabulated>(&spec_)) {
        for (double s : t->x) {
            if (s > lo && s < hi && s != x0_) out.push_back(s);
        }
        std::sort(out.begin(), out.end());
    }
    return out;
}

double effective_exponent(const CoefficientFunction& f) {
    if (auto e = f.exponent()) return *e;
    return f.value(f.x0()) == 0.0 ? 1.0 : 0.0;
}

void CoefficientPair::validate() const {
    check_x0(x0);
    if (a.x0() != x0 || b.x0() != x0) {
        throw DomainError("coefficients a and b must share the degeneracy point x0");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("final time T must be positive");
    if (!std::isfinite(lambda)) throw DomainError("singular strength lambda must be finite");
    if (auto e = a.exponent(); e && *e >= 2.0) {
        throw DomainError("diffusion exponent K1 must be below 2");
    }
    if (auto e = b.exponent(); e && *e >= 3.0) {
        throw DomainError("potential exponent K2 must be below 3 for 1/b to be integrable against P1 hats");
    }
}

CoefficientPair CoefficientPair::with_lambda(double new_lambda) const {
    CoefficientPair out = *this;
    out.lambda = new_lambda;
    return out;
}

CoefficientPair make_power_pair(double x0, double k1, double k2, double lambda, double T) {
    CoefficientPair p{x0, CoefficientFunction::power(k1, x0), CoefficientFunction::power(k2, x0), lambda, T};
    p.validate();
    return p;
}

std::string_view to_string(DegeneracyClass c) noexcept {
    switch (c) {
        case DegeneracyClass::WWD: return "WWD";
        case DegeneracyClass::WSD: return "WSD";
        case DegeneracyClass::SWD: return "SWD";
        case DegeneracyClass::SSD: return "SSD";
    }
    return "?";
}

std::string_view to_string(LocalizationIdentity s) noexcept {
    switch (s) {
        case LocalizationIdentity::NotRequired: return "not-required";
        case LocalizationIdentity::PrototypeConstruction: return "prototype-construction";
        case LocalizationIdentity::Unaudited: return "unaudited";
    }
    return "?";
}

DegeneracyClass classify(double k1, double k2) {
    auto check = [](double k, const char* name) {
        if (!(k > 0.0 && k < 2.0)) {
            std::ostringstream os;
            os << "exponent " << name << " = " << k << " outside (0,2)";
            throw DomainError(os.str());
        }
    };
    check(k1, "K1");
    check(k2, "K2");
    const bool weak1 = k1 < 1.0;
    const bool weak2 = k2 < 1.0;
    if (weak1 && weak2) return DegeneracyClass::WWD;
    if (weak1) return DegeneracyClass::WSD;
    if (weak2) return DegeneracyClass::SWD;
    return DegeneracyClass::SSD;
}

bool admissible_lambda(double lambda, double cstar, DegeneracyClass cls, double exponent_sum) {
    if (lambda == 0.0) {
        throw DomainError("lambda = 0 is the purely degenerate case, see prior work");
    }
    if (!(cstar > 0.0)) throw PreconditionError("Hardy constant cstar must be positive");
    if (lambda < 0.0) return true;
    return cls != DegeneracyClass::SSD && exponent_sum <= 2.0 + 1e-12 && lambda < 1.0 / cstar;
}

HypothesisAudit audit(const CoefficientPair& pair, int grid_resolution, std::optional<double> cstar) {
    if (grid_resolution < 64) throw PreconditionError("audit grid_resolution must be at least 64");
    pair.validate();

    const double x0 = pair.x0;
    const double cell = 1.0 / grid_resolution;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_resolution) + 1);
    for (int i = 0; i <= grid_resolution; ++i) {
        const double x = i * cell;
        if (std::abs(x - x0) > cell * (1.0 + 1e-12)) grid.push_back(x);
    }

    HypothesisAudit rep;
    for (double x : grid) {
        const double av = pair.a.value(x);
        const double bv = pair.b.value(x);
        if (!(av > 0.0) || !(bv > 0.0)) {
            std::ostringstream os;
            os << "coefficient " << (av > 0.0 ? 'b' : 'a') << " is nonpositive at x = " << x;
            throw InvalidCoefficientError(os.str());
        }
    }

    // Smallest K with (x - x0) f' <= K f on the grid.
    auto min_k = [&](const CoefficientFunction& f) {
        double k = -std::numeric_limits<double>::infinity();
        for (double x : grid) k = std::max(k, (x - x0) * f.derivative(x) / f.value(x));
        return k;
    };
    rep.min_k1 = min_k(pair.a);
    rep.min_k2 = min_k(pair.b);
    if (auto e = pair.a.exponent()) rep.min_k1 = *e;
    if (auto e = pair.b.exponent()) rep.min_k2 = *e;
    rep.sum_ok = rep.min_k1 + rep.min_k2 <= 2.0 + 1e-12;
    if (!rep.sum_ok) rep.violations.push_back({x0, "K1+K2", rep.min_k1 + rep.min_k2});

    try {
        rep.degeneracy_class = classify(rep.min_k1, rep.min_k2);
    } catch (const DomainError&) {
        rep.violations.push_back({x0, "K1", rep.min_k1});
        rep.violations.push_back({x0, "K2", rep.min_k2});
    }

    // Monotonicity of f away from x0: nonincreasing on the left, nondecreasing on the right.
    auto monotone_away = [&](auto&& f, const char* quantity, bool record) {
        std::size_t fails = 0;
        std::size_t checks = 0;
        std::vector<AuditViolation> found;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double xl = grid[i];
            const double xr = grid[i + 1];
            if ((xl < x0) != (xr < x0)) continue;
            const double fl = f(xl);
            const double fr = f(xr);
            ++checks;
            const double scale = std::max(std::abs(fl), std::abs(fr));
            const bool bad = xr < x0 ? fr > fl + kAeRelTol * scale : fr < fl - kAeRelTol * scale;
            if (bad) {
                ++fails;
                found.push_back({xr, quantity, fr - fl});
            }
        }
        const bool ok = ae_passes(fails, checks);
        if (record && !ok) rep.violations.insert(rep.violations.end(), found.begin(), found.end());
        return ok;
    };

    if (rep.min_k1 > 4.0 / 3.0) {
        std::vector<double> candidates{rep.min_k1};
        for (int j = 1; j < 20; ++j) candidates.push_back(rep.min_k1 * (1.0 - j / 20.0));
        for (double th : candidates) {
            auto ratio = [&](double x) { return pair.a.value(x) / std::pow(std::abs(x - x0), th); };
            if (monotone_away(ratio, "a/|x-x0|^theta", false)) {
                rep.theta = th;
                break;
            }
        }
        if (!rep.theta) rep.violations.push_back({x0, "theta", rep.min_k1});
    }
    if (rep.min_k1 > 1.5 && rep.theta) {
        const double th = *rep.theta;
        double lo = std::numeric_limits<double>::infinity();
        double sig = 0.0;
        for (double x : grid) {
            const double y = std::abs(x - x0);
            lo = std::min(lo, pair.a.value(x) / std::pow(y, th));
            sig = std::max(sig, std::abs(pair.a.derivative(x)) * std::pow(y, 3.0 - 2.0 * th));
        }
        rep.theta_bounded_below = lo > 0.0;
        if (!rep.theta_bounded_below) rep.violations.push_back({x0, "a/|x-x0|^theta lower bound", lo});
        rep.sigma = sig;
    }

    {
        std::size_t fails = 0;
        for (double x : grid) {
            const double v = (x - x0) * pair.b.derivative(x);
            if (v < -kAeRelTol * pair.b.value(x)) {
                ++fails;
                rep.violations.push_back({x, "(x-x0)b'", v});
            }
        }
        rep.b_monotone_ok = ae_passes(fails, grid.size());
    }

    if (pair.lambda == 0.0) {
        rep.lambda_admissible = false;
        rep.violations.push_back({x0, "lambda (purely degenerate case)", 0.0});
    } else if (pair.lambda < 0.0) {
        rep.lambda_admissible = true;
    } else if (cstar) {
        if (rep.degeneracy_class) {
            rep.lambda_admissible =
                admissible_lambda(pair.lambda, *cstar, *rep.degeneracy_class, rep.min_k1 + rep.min_k2);
        } else {
            rep.lambda_admissible = rep.sum_ok && pair.lambda < 1.0 / *cstar;
        }
        if (!*rep.lambda_admissible) rep.violations.push_back({x0, "lambda", pair.lambda});
    }

    const bool weak_a = rep.degeneracy_class && (*rep.degeneracy_class == DegeneracyClass::WWD ||
                                                 *rep.degeneracy_class == DegeneracyClass::WSD);
    if (!weak_a) {
        rep.localization = LocalizationIdentity::NotRequired;
    } else if (auto e = pair.a.exponent(); e && *e > 0.0 && *e < 1.0) {
        // g = g0 = h0 = 1: h(x,B) = -a'/(2 sqrt a) (B - x + 1) + sqrt a must be finite away from x0.
        bool finite = true;
        for (double x : grid) {
            for (double B : {0.0, x0, 1.0}) {
                const double h = -pair.a.derivative(x) / (2.0 * std::sqrt(pair.a.value(x))) * (B - x + 1.0) +
                                 std::sqrt(pair.a.value(x));
                finite = finite && std::isfinite(h);
            }
        }
        rep.localization = finite ? LocalizationIdentity::PrototypeConstruction : LocalizationIdentity::Unaudited;
    } else {
        rep.localization = LocalizationIdentity::Unaudited;
    }
    return rep;
}

}  // namespace sdlab
