#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sae {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<cplx>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I(0.0, 1.0);

// Error categories. Each maps to a process exit code in the CLI.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct GeometryError : ConfigError {
    using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};
struct IncompatibleSystemError : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};

// Spacing to the next representable double above |x|.
inline double eps_of(double x)
{
    x = std::abs(x);
    return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

}  // namespace sae
