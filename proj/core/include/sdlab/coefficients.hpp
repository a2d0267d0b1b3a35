#pragma once

// Degenerate diffusion a(x) and singular potential weight b(x) vanishing at an
// interior point x0, their regime classification, and hypothesis audits.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sdlab {

/// |x - x0|^exponent. Exponent 0 is the constant 1 (nondegenerate).
struct PowerLaw {
    double exponent = 0.0;
};

/// Piecewise-linear interpolation of samples; x strictly increasing from 0 to 1.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> values;
};

class CoefficientFunction {
public:
    static CoefficientFunction power(double exponent, double x0);
    static CoefficientFunction tabulated(std::vector<double> x, std::vector<double> values, double x0);
    /// Two-column CSV (x, value); must contain 0, x0 and 1 as abscissae.
    static CoefficientFunction from_csv(const std::filesystem::path& path, double x0);

    double value(double x) const;
    /// Analytic derivative; piecewise constant (right slope) for tabulated data.
    double derivative(double x) const;

    bool is_power() const noexcept { return std::holds_alternative<PowerLaw>(spec_); }
    /// Exponent of a power law, nullopt for tabulated data.
    std::optional<double> exponent() const noexcept;
    const Tabulated* table() const noexcept { return std::get_if<Tabulated>(&spec_); }
    double x0() const noexcept { return x0_; }

    /// Abscissae where the function is not smooth (x0 and table samples) inside (lo, hi).
    std::vector<double> breakpoints(double lo, double hi) const;

private:
    CoefficientFunction(std::variant<PowerLaw, Tabulated> spec, double x0);

    std::variant<PowerLaw, Tabulated> spec_;
    double x0_;
};

struct CoefficientPair {
    double x0 = 0.5;
    CoefficientFunction a;
    CoefficientFunction b;
    double lambda = 0.0;
    double T = 1.0;

    /// Checks 0 < x0 < 1, T > 0, shared x0 and prototype exponent ranges.
    void validate() const;

    /// Same coefficients with a different singular strength.
    CoefficientPair with_lambda(double new_lambda) const;
};

CoefficientPair make_power_pair(double x0, double k1, double k2, double lambda = 0.0, double T = 1.0);

enum class DegeneracyClass { WWD, WSD, SWD, SSD };

std::string_view to_string(DegeneracyClass c) noexcept;

/// Regime from (K1 < 1, K2 < 1) membership. Throws DomainError outside (0,2).
DegeneracyClass classify(double k1, double k2);

struct AuditViolation {
    double x;
    std::string quantity;
    double value;
};

/// Whether the localization identity on g, h, g0, h0 has been established.
enum class LocalizationIdentity { NotRequired, PrototypeConstruction, Unaudited };

std::string_view to_string(LocalizationIdentity s) noexcept;

struct HypothesisAudit {
    std::optional<DegeneracyClass> degeneracy_class;
    double min_k1 = 0.0;
    double min_k2 = 0.0;
    bool sum_ok = false;
    std::optional<double> theta;
    bool theta_bounded_below = true;
    std::optional<double> sigma;
    bool b_monotone_ok = false;
    /// Empty when lambda > 0 and no Hardy constant was supplied.
    std::optional<bool> lambda_admissible;
    LocalizationIdentity localization = LocalizationIdentity::Unaudited;
    std::vector<AuditViolation> violations;
};

/// Samples the hypotheses on a uniform grid of `grid_resolution` cells.
/// `cstar`, when given, decides admissibility of a positive lambda.
HypothesisAudit audit(const CoefficientPair& pair, int grid_resolution,
                      std::optional<double> cstar = std::nullopt);

/// Hypothesis on lambda: negative always, positive below 1/cstar outside SSD with
/// K1 + K2 <= 2. lambda == 0 is rejected with a DomainError.
bool admissible_lambda(double lambda, double cstar, DegeneracyClass cls, double exponent_sum = 2.0);

/// Exponent actually governing b near x0: the power exponent, or 1 for a
/// tabulated b vanishing at x0 (linear interpolation), 0 otherwise.
double effective_exponent(const CoefficientFunction& f);

}  // namespace sdlab
