#pragma once

#include <string>
#include <vector>

#include "heterokink/systems.hpp"

namespace heterokink {

/// How much a prediction can be trusted.
enum class Provenance {
    Exact,        ///< closed-form solution of the full problem
    Derived,      ///< leading-order matched asymptotics
    Empirical,    ///< pattern fitted to numerics
    Conjectured,  ///< proposed generalisation, not derived
};

std::string to_string(Provenance p);

/// Leading-order predictions for one het_k family at one delta. Widths are the
/// gap between consecutive zero crossings in the integration coordinate.
struct AsymptoticPrediction {
    ModelKind kind = ModelKind::CCH;
    int k = 0;
    double delta = 0.0;
    double A_pred = 1.0;
    double width_pred = 0.0;  ///< 0 when k == 0 (no humps) or outside the formula's range
    bool valid = false;       ///< delta below validity_threshold(kind)
    Provenance A_provenance = Provenance::Derived;
};

/// Constants appearing in the width laws.
inline constexpr double kRho = 5.656854249492380195;      // 4 sqrt(2)
inline constexpr double kB0 = -5.656854249492380195;      // -8 / sqrt(2)

/// Principal branch of Lambert W by Halley iteration. Throws DomainError for x < -1/e.
double lambert_w(double x);

/// CCH: A = 1 - (2k+1) delta / sqrt(2).
double cch_A_pred(int k, double delta);

/// CCH hump width (ln(4 sqrt 2) - ln delta) / sqrt 2. Throws NonpositiveWidth
/// for delta >= 1/(4 sqrt 2).
double cch_width_pred(double delta);

/// HCCH: A = 1 - (2k+1) 2^(1/6) delta^(1/3).
double hcch_A_pred(int k, double delta);

/// HCCH hump width (sqrt 2 / 6) ln(beta / W(beta^(1/3))^3), beta = 2^11 / (27 delta^2).
double hcch_width_pred(double delta);

/// Provenance of the A law for (kind, k).
Provenance A_law_provenance(ModelKind kind, int k);

/// Delta below which the leading-order laws are expected to hold.
double validity_threshold(ModelKind kind);

AsymptoticPrediction predict(ModelKind kind, int k, double delta);

/// Alternating tanh train
///   V_k(x) = sum_{j=-k..k} (-1)^(k+1+j) tanh(rate (x - j K)),
/// zeros near 0, +-K, ..., +-kK, V -> -+1 as x -> +-inf. k = 1, rate = 1 gives
/// -tanh(x-K) + tanh(x) - tanh(x+K). Returns c and 5 analytic derivatives.
std::vector<JetSample> tanh_profile(int k, double K, const std::vector<double>& grid, double rate = 1.0);

}  // namespace heterokink
