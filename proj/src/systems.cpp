#include "heterokink/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "heterokink/errors.hpp"

namespace heterokink {

namespace {

void check_dim(ModelKind kind, const PhaseVector& U) {
    if (U.size() != dimension(kind)) {
        throw ContractViolation("phase vector has dimension " + std::to_string(U.size()) +
                                ", model " + to_string(kind) + " needs " +
                                std::to_string(dimension(kind)));
    }
}

// Newton on the characteristic polynomial. Converges linearly onto the
// multiple root 0 that appears at delta = 0, so the iteration cap is generous.
std::complex<double> polish_root(const std::vector<double>& p, std::complex<double> z) {
    const int n = static_cast<int>(p.size()) - 1;
    for (int it = 0; it < 400; ++it) {
        std::complex<double> val = p[0];
        std::complex<double> der = 0.0;
        for (int i = 1; i <= n; ++i) {
            der = der * z + val;
            val = val * z + p[i];
        }
        if (val == 0.0 || der == 0.0) break;
        const std::complex<double> step = val / der;
        z -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

Eigen::VectorXcd null_vector(const PhaseMatrix& J, std::complex<double> lambda) {
    const int n = static_cast<int>(J.rows());
    Eigen::MatrixXcd M = J.cast<std::complex<double>>();
    M -= lambda * Eigen::MatrixXcd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    Eigen::VectorXcd v = svd.matrixV().col(n - 1);
    v /= v.norm();
    for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 1e-14) {
            v *= std::conj(v[i]) / std::abs(v[i]);
            v[i] = std::abs(v[i]);
            break;
        }
    }
    return v;
}

Eigen::MatrixXd realified_basis(const EquilibriumInfo& info, bool unstable) {
    const int n = static_cast<int>(info.point.size());
    std::vector<Eigen::VectorXd> cols;
    for (std::size_t i = 0; i < info.eigenvalues.size(); ++i) {
        const auto lam = info.eigenvalues[i];
        const bool take = unstable ? lam.real() > kCenterTolerance : lam.real() < -kCenterTolerance;
        if (!take) continue;
        const auto& v = info.eigenvectors[i];
        if (std::abs(lam.imag()) <= kCenterTolerance) {
            cols.push_back(v.real());
        } else if (lam.imag() > 0.0) {
            cols.push_back(v.real());
            cols.push_back(v.imag());
        }
    }
    Eigen::MatrixXd B(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = cols[j];
    if (B.cols() == 0) return B;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, B.cols());
    // Householder QR fixes column signs only up to +-; make the projection of
    // each basis vector onto the source column positive for reproducibility.
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        if (Q.col(j).dot(B.col(j)) < 0.0) Q.col(j) *= -1.0;
    }
    return Q;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::CCH ? "cch" : "hcch"; }

ModelKind parse_model_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "cch") return ModelKind::CCH;
    if (lower == "hcch") return ModelKind::HCCH;
    throw ContractViolation("unknown model kind '" + std::string(text) + "' (expected cch or hcch)");
}

void ModelParams::validate() const {
    if (!std::isfinite(A) || A <= 0.0) {
        throw ContractViolation("A must be positive and finite, got " + std::to_string(A));
    }
    if (!std::isfinite(delta) || delta < 0.0) {
        throw ContractViolation("delta must be non-negative and finite, got " + std::to_string(delta));
    }
}

PhaseVector rhs(ModelKind kind, const ModelParams& params, const PhaseVector& U) {
    check_dim(kind, U);
    const double A = params.A;
    const double forcing = params.delta * std::sqrt(A) / 2.0;
    const double u1 = U[0];
    const double u2 = U[1];
    PhaseVector F(U.size());
    if (kind == ModelKind::CCH) {
        F[0] = u2;
        F[1] = U[2];
        F[2] = (3.0 * A * u1 * u1 - 1.0) * u2 + forcing * (u1 * u1 - 1.0);
    } else {
        const double u3 = U[2];
        F[0] = u2;
        F[1] = u3;
        F[2] = U[3];
        F[3] = U[4];
        F[4] = 6.0 * A * u2 * u2 * u2 + 18.0 * A * u1 * u2 * u3 +
               (3.0 * A * u1 * u1 - 1.0) * U[3] + forcing * (1.0 - u1 * u1);
    }
    return F;
}

PhaseMatrix jacobian(ModelKind kind, const ModelParams& params, const PhaseVector& U) {
    check_dim(kind, U);
    const int n = dimension(kind);
    const double A = params.A;
    const double dsA = params.delta * std::sqrt(A);
    PhaseMatrix J = PhaseMatrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = 1.0;
    const double u1 = U[0];
    const double u2 = U[1];
    if (kind == ModelKind::CCH) {
        J(2, 0) = 6.0 * A * u1 * u2 + dsA * u1;
        J(2, 1) = 3.0 * A * u1 * u1 - 1.0;
    } else {
        const double u3 = U[2];
        J(4, 0) = 18.0 * A * u2 * u3 + 6.0 * A * u1 * U[3] - dsA * u1;
        J(4, 1) = 18.0 * A * u2 * u2 + 18.0 * A * u1 * u3;
        J(4, 2) = 18.0 * A * u1 * u2;
        J(4, 3) = 3.0 * A * u1 * u1 - 1.0;
    }
    return J;
}

PhaseVector rhs_dA(ModelKind kind, const ModelParams& params, const PhaseVector& U) {
    check_dim(kind, U);
    const double dforcing = params.delta / (4.0 * std::sqrt(params.A));
    const double u1 = U[0];
    const double u2 = U[1];
    PhaseVector d = PhaseVector::Zero(U.size());
    if (kind == ModelKind::CCH) {
        d[2] = 3.0 * u1 * u1 * u2 + dforcing * (u1 * u1 - 1.0);
    } else {
        const double u3 = U[2];
        d[4] = 6.0 * u2 * u2 * u2 + 18.0 * u1 * u2 * u3 + 3.0 * u1 * u1 * U[3] +
               dforcing * (1.0 - u1 * u1);
    }
    return d;
}

PhaseVector reverse(const PhaseVector& U) {
    PhaseVector R = U;
    for (Eigen::Index i = 0; i < U.size(); i += 2) R[i] = -R[i];
    return R;
}

double odd_norm(const PhaseVector& U) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < U.size(); i += 2) s += U[i] * U[i];
    return std::sqrt(s);
}

PhaseVector equilibrium_point(ModelKind kind, EquilibriumSign sign) {
    PhaseVector p = PhaseVector::Zero(dimension(kind));
    p[0] = sign == EquilibriumSign::Plus ? 1.0 : -1.0;
    return p;
}

std::vector<double> characteristic_polynomial(ModelKind kind, const ModelParams& params,
                                              EquilibriumSign sign) {
    params.validate();
    const double dsA = params.delta * std::sqrt(params.A);
    const double s = sign == EquilibriumSign::Plus ? 1.0 : -1.0;
    if (kind == ModelKind::CCH) return {1.0, 0.0, 1.0 - 3.0 * params.A, -s * dsA};
    return {1.0, 0.0, 1.0 - 3.0 * params.A, 0.0, 0.0, s * dsA};
}

std::complex<double> eval_polynomial(const std::vector<double>& coeffs, std::complex<double> z) {
    std::complex<double> v = 0.0;
    for (double c : coeffs) v = v * z + c;
    return v;
}

EquilibriumInfo equilibrium_analysis(ModelKind kind, const ModelParams& params,
                                     EquilibriumSign sign) {
    params.validate();
    EquilibriumInfo info;
    info.point = equilibrium_point(kind, sign);
    info.char_poly = characteristic_polynomial(kind, params, sign);

    const PhaseMatrix J = jacobian(kind, params, info.point);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(J), false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigen-decomposition failed");

    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        auto z = polish_root(info.char_poly, solver.eigenvalues()[i]);
        if (std::abs(z.imag()) <= kCenterTolerance) z.imag(0.0);
        if (std::abs(z.real()) <= 1e-15) z.real(0.0);
        info.eigenvalues.push_back(z);
    }
    std::sort(info.eigenvalues.begin(), info.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() > b.real();
                  return a.imag() > b.imag();
              });
    for (const auto& lam : info.eigenvalues) {
        info.eigenvectors.push_back(null_vector(J, lam));
        if (lam.real() > kCenterTolerance) {
            ++info.n_unstable;
        } else if (lam.real() < -kCenterTolerance) {
            ++info.n_stable;
        } else {
            ++info.n_center;
        }
    }
    return info;
}

Eigen::MatrixXd unstable_basis(const EquilibriumInfo& info) { return realified_basis(info, true); }
Eigen::MatrixXd stable_basis(const EquilibriumInfo& info) { return realified_basis(info, false); }

double profile_residual(ModelKind kind, const ModelParams& params,
                        const std::vector<JetSample>& profile) {
    params.validate();
    const int need = required_derivatives(kind) + 1;
    const double forcing = params.delta * std::sqrt(params.A) / 2.0;
    const double A = params.A;
    double worst = 0.0;
    for (const auto& s : profile) {
        if (static_cast<int>(s.jet.size()) < need) {
            throw ContractViolation("profile sample at x=" + std::to_string(s.x) + " has " +
                                    std::to_string(s.jet.size()) + " jet entries, need " +
                                    std::to_string(need));
        }
        const auto& c = s.jet;
        double r = 0.0;
        if (kind == ModelKind::CCH) {
            r = forcing * (1.0 - c[0] * c[0]) + c[3] + c[1] - 3.0 * A * c[0] * c[0] * c[1];
        } else {
            const double cube3 = 6.0 * c[1] * c[1] * c[1] + 18.0 * c[0] * c[1] * c[2] +
                                 3.0 * c[0] * c[0] * c[3];
            r = -forcing * (1.0 - c[0] * c[0]) + c[5] + c[3] - A * cube3;
        }
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace heterokink
