#include "sdlab/errors.hpp"

#include <sstream>

namespace sdlab {

namespace {
std::string with_suffix(const std::string& what, const char* label, std::size_t value) {
    std::ostringstream os;
    os << what << " (" << label << ' ' << value << ')';
    return os.str();
}
}  // namespace

AssemblyError::AssemblyError(const std::string& what, std::size_t cell)
    : Error(with_suffix(what, "cell", cell)), cell_(cell) {}

NotSpdError::NotSpdError(std::size_t pivot_index, double pivot)
    : Error([&] {
          std::ostringstream os;
          os << "matrix is not positive definite: pivot " << pivot_index << " = " << pivot;
          return os.str();
      }()),
      index_(pivot_index),
      pivot_(pivot) {}

ConvergenceError::ConvergenceError(const std::string& what, double residual)
    : Error([&] {
          std::ostringstream os;
          os << what << " (residual " << residual << ')';
          return os.str();
      }()),
      residual_(residual) {}

InstabilityError::InstabilityError(const std::string& what, std::size_t step)
    : Error(with_suffix(what, "step", step)), step_(step) {}

InadmissibleLambdaError::InadmissibleLambdaError(double lambda, double min_eig_shifted)
    : Error([&] {
          std::ostringstream os;
          os << "singular strength lambda = " << lambda
             << " is inadmissible: smallest eigenvalue of (K_a - lambda M_b, K_a) is "
             << min_eig_shifted;
          return os.str();
      }()),
      lambda_(lambda),
      min_eig_(min_eig_shifted) {}

}  // namespace sdlab
