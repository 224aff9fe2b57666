#include "heterokink/asymptotics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "heterokink/errors.hpp"

namespace heterokink {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Exact: return "exact";
        case Provenance::Derived: return "derived";
        case Provenance::Empirical: return "empirical";
        case Provenance::Conjectured: return "conjectured";
    }
    return "unknown";
}

double lambert_w(double x) {
    constexpr double inv_e = 1.0 / std::numbers::e;
    if (std::isnan(x) || x < -inv_e) throw DomainError("lambert_w: argument below -1/e");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;
    if (x == -inv_e) return -1.0;

    double w;
    if (x < -0.3) {
        // Series about the branch point.
        const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (x < 0.3) {
        w = x * (1.0 - x);
    } else if (x > std::numbers::e) {
        const double l = std::log(x);
        w = l - std::log(l);
    } else {
        const double t = (x - 0.3) / (std::numbers::e - 0.3);
        w = (1.0 - t) * 0.3 * 0.7 + t * 1.0;
    }

    for (int it = 0; it < 100; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        if (f == 0.0) break;
        const double wp1 = w + 1.0;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 4e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

double cch_A_pred(int k, double delta) {
    if (k < 0 || !(delta >= 0.0)) throw DomainError("cch_A_pred: need k >= 0, delta >= 0");
    return 1.0 - (2 * k + 1) / std::numbers::sqrt2 * delta;
}

double cch_width_pred(double delta) {
    if (!(delta > 0.0)) throw DomainError("cch_width_pred: delta must be positive");
    if (delta >= 1.0 / kRho) throw NonpositiveWidth("cch_width_pred: delta >= 1/(4 sqrt 2) gives no positive width");
    return (std::log(kRho) - std::log(delta)) / std::numbers::sqrt2;
}

double hcch_A_pred(int k, double delta) {
    if (k < 0 || !(delta >= 0.0)) throw DomainError("hcch_A_pred: need k >= 0, delta >= 0");
    return 1.0 - (2 * k + 1) * std::pow(2.0, 1.0 / 6.0) * std::cbrt(delta);
}

double hcch_width_pred(double delta) {
    if (!(delta > 0.0)) throw DomainError("hcch_width_pred: delta must be positive");
    const double beta = 2048.0 / (27.0 * delta * delta);
    const double w = lambert_w(std::cbrt(beta));
    // ln(beta / w^3), split to stay finite for tiny delta
    return std::numbers::sqrt2 / 6.0 * (std::log(beta) - 3.0 * std::log(w));
}

Provenance A_law_provenance(ModelKind kind, int k) {
    if (kind == ModelKind::CCH) {
        if (k == 0) return Provenance::Exact;
        return k == 1 ? Provenance::Derived : Provenance::Empirical;
    }
    return k == 1 ? Provenance::Derived : Provenance::Conjectured;
}

double validity_threshold(ModelKind kind) { return kind == ModelKind::CCH ? 0.05 : 1e-3; }

AsymptoticPrediction predict(ModelKind kind, int k, double delta) {
    AsymptoticPrediction p;
    p.kind = kind;
    p.k = k;
    p.delta = delta;
    p.A_pred = kind == ModelKind::CCH ? cch_A_pred(k, delta) : hcch_A_pred(k, delta);
    p.A_provenance = A_law_provenance(kind, k);
    p.valid = delta <= validity_threshold(kind);
    if (k > 0 && delta > 0.0) {
        if (kind == ModelKind::HCCH) {
            p.width_pred = hcch_width_pred(delta);
        } else if (delta < 1.0 / kRho) {
            p.width_pred = cch_width_pred(delta);
        }
    }
    return p;
}

namespace {

constexpr int kOrders = 6;
using Poly = std::array<double, kOrders + 2>;  // coefficients in t, low degree first

// d^n/dx^n tanh(r x) = r^n P_n(t), P_0 = t, P_{n+1} = (1 - t^2) P_n'(t).
std::array<Poly, kOrders> tanh_derivative_polys() {
    std::array<Poly, kOrders> P{};
    P[0][1] = 1.0;
    for (int n = 0; n + 1 < kOrders; ++n) {
        Poly d{};
        for (int i = 1; i < static_cast<int>(d.size()); ++i) d[i - 1] = i * P[n][i];
        Poly next{};
        for (int i = 0; i < static_cast<int>(d.size()); ++i) {
            if (d[i] == 0.0) continue;
            next[i] += d[i];
            if (i + 2 < static_cast<int>(next.size())) next[i + 2] -= d[i];
        }
        P[n + 1] = next;
    }
    return P;
}

}  // namespace

std::vector<JetSample> tanh_profile(int k, double K, const std::vector<double>& grid, double rate) {
    if (k < 0) throw DomainError("tanh_profile: k must be nonnegative");
    if (k > 0 && !(K > 0.0)) throw DomainError("tanh_profile: K must be positive");
    if (!(rate > 0.0)) throw DomainError("tanh_profile: rate must be positive");
    static const auto P = tanh_derivative_polys();

    std::vector<JetSample> out;
    out.reserve(grid.size());
    for (double x : grid) {
        JetSample s{x, std::vector<double>(kOrders, 0.0)};
        for (int j = -k; j <= k; ++j) {
            const double sign = ((k + 1 + j) % 2 == 0) ? 1.0 : -1.0;
            const double t = std::tanh(rate * (x - j * K));
            double rn = 1.0;
            for (int n = 0; n < kOrders; ++n) {
                double v = 0.0;
                for (int i = static_cast<int>(P[n].size()) - 1; i >= 0; --i) v = v * t + P[n][i];
                s.jet[n] += sign * rn * v;
                rn *= rate;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace heterokink
