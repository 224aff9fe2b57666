#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace heterokink {

/// Phase-space state. Component i (0-based) is the i-th x-derivative of the
/// scaled profile c. Fixed capacity so hot loops never allocate.
using PhaseVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
using PhaseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

enum class ModelKind { CCH, HCCH };

constexpr int dimension(ModelKind kind) { return kind == ModelKind::CCH ? 3 : 5; }

std::string to_string(ModelKind kind);
/// Accepts "cch"/"hcch" in any case; throws ContractViolation otherwise.
ModelKind parse_model_kind(std::string_view text);

struct ModelParams {
    double A = 1.0;
    double delta = 0.0;

    /// Throws ContractViolation unless A > 0, delta >= 0 and both finite.
    void validate() const;
};

/// Right-hand side of the first-order system U' = F(U).
PhaseVector rhs(ModelKind kind, const ModelParams& params, const PhaseVector& U);

/// Analytic dF/dU.
PhaseMatrix jacobian(ModelKind kind, const ModelParams& params, const PhaseVector& U);

/// d F / d A at fixed U (the only parameter the BVP solves for).
PhaseVector rhs_dA(ModelKind kind, const ModelParams& params, const PhaseVector& U);

/// Reversibility operator: component j (1-based) is multiplied by (-1)^j.
PhaseVector reverse(const PhaseVector& U);

/// Root-mean of the odd (1-based) components: sqrt(U1^2 + U3^2 + ...).
double odd_norm(const PhaseVector& U);

/// A stationary problem: which equation plus its parameters.
struct ModelSystem {
    ModelKind kind = ModelKind::CCH;
    ModelParams params;

    int dim() const { return dimension(kind); }
    PhaseVector operator()(const PhaseVector& U) const { return rhs(kind, params, U); }
    PhaseMatrix jac(const PhaseVector& U) const { return jacobian(kind, params, U); }
};

enum class EquilibriumSign { Plus, Minus };

/// sign * (1, 0, ..., 0).
PhaseVector equilibrium_point(ModelKind kind, EquilibriumSign sign);

/// Monic characteristic polynomial at U+ or U-, highest degree first.
///   CCH:  l^3 + (1-3A) l  -/+ delta sqrt(A)     (upper sign at U+)
///   HCCH: l^5 + (1-3A) l^3 +/- delta sqrt(A)    (upper sign at U+)
/// Both follow from det(J - l I) of the analytic Jacobian; the opposite
/// orientation of the constant term comes from the opposite sign of the
/// forcing term in the two right-hand sides.
std::vector<double> characteristic_polynomial(ModelKind kind, const ModelParams& params,
                                              EquilibriumSign sign);

/// Horner evaluation of a polynomial given highest degree first.
std::complex<double> eval_polynomial(const std::vector<double>& coeffs, std::complex<double> z);

struct EquilibriumInfo {
    PhaseVector point;
    std::vector<double> char_poly;
    /// Sorted by decreasing real part, then decreasing imaginary part.
    std::vector<std::complex<double>> eigenvalues;
    /// eigenvectors[i] belongs to eigenvalues[i]; unit length, first nonzero
    /// component positive real.
    std::vector<Eigen::VectorXcd> eigenvectors;
    int n_unstable = 0;
    int n_stable = 0;
    int n_center = 0;
};

/// Real parts with magnitude below this are treated as center directions.
inline constexpr double kCenterTolerance = 1e-12;

EquilibriumInfo equilibrium_analysis(ModelKind kind, const ModelParams& params,
                                     EquilibriumSign sign);

/// Orthonormal real basis (columns) of the invariant subspace spanned by the
/// eigenvectors with Re > 0 (unstable) or Re < 0 (stable). Complex pairs are
/// realified into (Re v, Im v) before orthonormalisation.
Eigen::MatrixXd unstable_basis(const EquilibriumInfo& info);
Eigen::MatrixXd stable_basis(const EquilibriumInfo& info);

/// One sample of a profile and its derivatives: jet[m] = c^(m)(x).
struct JetSample {
    double x = 0.0;
    std::vector<double> jet;
};

/// Number of derivatives (beyond c itself) needed by profile_residual.
constexpr int required_derivatives(ModelKind kind) { return kind == ModelKind::CCH ? 3 : 5; }

/// Max-norm residual of the stationary equation written with delta on the
/// algebraic side, so delta = 0 is admissible:
///   CCH:  (delta sqrt(A)/2)(1 - c^2) + (c'' + c - A c^3)'
///   HCCH: -(delta sqrt(A)/2)(1 - c^2) + (c'' + c - A c^3)'''
double profile_residual(ModelKind kind, const ModelParams& params,
                        const std::vector<JetSample>& profile);

}  // namespace heterokink
