#include "heterokink/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "heterokink/detail/brent.hpp"

namespace heterokink {

namespace {

std::vector<double> gaps_of(const std::vector<double>& zeros) {
    if (zeros.size() < 2)
        throw FewerThanTwoCrossings("profile has " + std::to_string(zeros.size()) + " zero crossing(s), need two");
    std::vector<double> out;
    for (std::size_t i = 1; i < zeros.size(); ++i) out.push_back(zeros[i] - zeros[i - 1]);
    return out;
}

double hermite1(double x, double x0, double x1, double c0, double c1, double d0, double d1) {
    const double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * c0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * c1 + (t3 - t2) * h * d1;
}

}  // namespace

std::vector<double> root_distances(const MeshFunction& profile) { return gaps_of(zero_crossings(profile)); }

std::vector<double> root_distances(const std::vector<JetSample>& profile) {
    std::vector<double> zeros;
    for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
        const auto& a = profile[i];
        const auto& b = profile[i + 1];
        if (a.jet.size() < 2 || b.jet.size() < 2) throw ContractViolation("root_distances: jets need c and c'");
        const double ca = a.jet[0], cb = b.jet[0];
        if (ca == 0.0) {
            zeros.push_back(a.x);
            continue;
        }
        if ((ca > 0.0) == (cb > 0.0) || cb == 0.0) continue;
        auto f = [&](double x) { return hermite1(x, a.x, b.x, ca, cb, a.jet[1], b.jet[1]); };
        zeros.push_back(detail::brent(f, a.x, b.x, ca, cb, 1e-14));
    }
    if (!profile.empty() && profile.back().jet.at(0) == 0.0) zeros.push_back(profile.back().x);
    return gaps_of(zeros);
}

std::vector<JetSample> midpoint_jets(const MeshFunction& profile) {
    std::vector<JetSample> out;
    if (profile.x.size() < 2) return out;
    const int dim = static_cast<int>(profile.U.front().size());
    for (std::size_t i = 0; i + 1 < profile.x.size(); ++i) {
        const double xm = 0.5 * (profile.x[i] + profile.x[i + 1]);
        const Eigen::VectorXd v = profile.value(xm), s = profile.slope(xm);
        JetSample j{xm, std::vector<double>(dim + 1)};
        for (int c = 0; c < dim; ++c) j.jet[c] = v[c];
        j.jet[dim] = s[dim - 1];
        out.push_back(std::move(j));
    }
    return out;
}

std::string to_string(Source s) { return s == Source::Shoot ? "shoot" : "bvp"; }

Source parse_source(std::string_view text) {
    if (text == "shoot") return Source::Shoot;
    if (text == "bvp") return Source::Bvp;
    throw ContractViolation("unknown source '" + std::string(text) + "'");
}

BranchTable BranchTable::from_points(const std::vector<BranchPoint>& points, Source source) {
    if (points.empty()) return {};
    BranchTable t(points.front().kind, points.front().k, source);
    for (const auto& p : points) {
        if (p.kind != t.kind_ || p.k != t.k_) throw MismatchedFamilies("from_points: points of different families");
        t.add({p.delta, p.A, p.k, p.d_min, p.root_distances});
    }
    return t;
}

BranchTable BranchTable::from_solutions(const std::vector<BvpSolution>& solutions, int k) {
    if (solutions.empty()) return {};
    BranchTable t(solutions.front().kind, k, Source::Bvp);
    for (const auto& s : solutions) {
        if (s.kind != t.kind_) throw MismatchedFamilies("from_solutions: solutions of different kinds");
        const MeshFunction full = reflect(s);
        std::vector<double> zeros = zero_crossings(full);
        // Gaps from the first zero up to the symmetric point.
        std::vector<double> gaps;
        for (std::size_t i = 1; i < zeros.size() && zeros[i - 1] < -1e-9; ++i) gaps.push_back(zeros[i] - zeros[i - 1]);
        t.add({s.delta, s.A, k, 0.0, gaps});
    }
    return t;
}

void BranchTable::add(const BranchRow& row) {
    if (row.k != k_) throw MismatchedFamilies("BranchTable::add: row belongs to het_" + std::to_string(row.k));
    auto it = std::lower_bound(rows_.begin(), rows_.end(), row.delta,
                               [](const BranchRow& r, double d) { return r.delta < d; });
    if (it != rows_.end() && it->delta == row.delta) {
        *it = row;
    } else {
        rows_.insert(it, row);
    }
}

BranchTable BranchTable::subset(double lo, double hi) const {
    BranchTable t(kind_, k_, source_);
    for (const auto& r : rows_)
        if (r.delta >= lo && r.delta <= hi) t.rows_.push_back(r);
    return t;
}

std::string to_string(FitModel m) {
    switch (m) {
        case FitModel::LinearA: return "linear_A";
        case FitModel::LogWidth: return "log_width";
        case FitModel::CubeRootA: return "cube_root_A";
    }
    return "unknown";
}

namespace {

void need_rows(const BranchTable& t, const char* what) {
    if (t.size() < 3) throw ContractViolation(std::string(what) + ": need at least 3 rows, got " + std::to_string(t.size()));
}

/// Least squares for y = c * t through the origin.
FitResult fit_through_origin(FitModel model, const std::vector<double>& t, const std::vector<double>& y) {
    double tt = 0.0, ty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tt += t[i] * t[i];
        ty += t[i] * y[i];
    }
    if (tt == 0.0) throw DomainError(to_string(model) + ": all abscissae are zero");
    const double c = ty / tt;
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) ss += (y[i] - c * t[i]) * (y[i] - c * t[i]);
    return {model, {c}, std::sqrt(ss / static_cast<double>(t.size())), static_cast<int>(t.size())};
}

}  // namespace

FitResult fit_linear_A(const BranchTable& table) {
    need_rows(table, "fit_linear_A");
    std::vector<double> t, y;
    for (const auto& r : table.rows()) {
        t.push_back(r.delta);
        y.push_back(1.0 - r.A);
    }
    return fit_through_origin(FitModel::LinearA, t, y);
}

FitResult fit_cube_root_A(const BranchTable& table) {
    need_rows(table, "fit_cube_root_A");
    std::vector<double> t, y;
    for (const auto& r : table.rows()) {
        t.push_back(std::cbrt(r.delta));
        y.push_back(r.A - 1.0);
    }
    return fit_through_origin(FitModel::CubeRootA, t, y);
}

FitResult fit_log_width(const BranchTable& table) {
    std::vector<double> u, K;
    for (const auto& r : table.rows()) {
        if (r.gaps.empty() || !(r.delta > 0.0)) continue;
        u.push_back(std::log(r.delta));
        K.push_back(r.gaps.front());
    }
    if (u.size() < 3) throw ContractViolation("fit_log_width: need at least 3 rows with gap data");
    const double n = static_cast<double>(u.size());
    double su = 0, sK = 0, suu = 0, suK = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        su += u[i];
        sK += K[i];
        suu += u[i] * u[i];
        suK += u[i] * K[i];
    }
    const double den = n * suu - su * su;
    if (den == 0.0) throw DomainError("fit_log_width: all delta values coincide");
    const double a = (n * suK - su * sK) / den;
    const double b = (sK - a * su) / n;
    if (a == 0.0) throw DomainError("fit_log_width: zero slope, eta2 undefined");
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ss += (K[i] - a * u[i] - b) * (K[i] - a * u[i] - b);
    return {FitModel::LogWidth, {a, std::exp(b / a)}, std::sqrt(ss / n), static_cast<int>(u.size())};
}

Report compare_report(const BranchTable& table, const std::vector<AsymptoticPrediction>& predictions) {
    Report rep;
    rep.kind = table.kind();
    rep.k = table.k();
    rep.provenance = A_law_provenance(table.kind(), table.k());
    for (const auto& p : predictions)
        if (p.kind != table.kind() || p.k != table.k())
            throw MismatchedFamilies("compare_report: prediction for " + to_string(p.kind) + " het_" +
                                     std::to_string(p.k) + " against table of " + to_string(table.kind()) + " het_" +
                                     std::to_string(table.k()));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : table.rows()) {
        auto it = std::find_if(predictions.begin(), predictions.end(), [&](const AsymptoticPrediction& p) {
            return std::abs(p.delta - r.delta) <= 1e-12 * std::max(std::abs(r.delta), 1e-300);
        });
        if (it == predictions.end()) continue;
        ComparisonRow c;
        c.delta = r.delta;
        c.A_num = r.A;
        c.A_pred = it->A_pred;
        c.A_abs_err = std::abs(r.A - it->A_pred);
        c.A_rel_err = c.A_abs_err / std::abs(r.A);
        c.width_pred = it->width_pred;
        if (!r.gaps.empty() && it->width_pred > 0.0) {
            c.width_num = r.gaps.front();
            c.width_abs_err = std::abs(c.width_num - c.width_pred);
            c.width_rel_err = c.width_abs_err / std::abs(c.width_num);
        } else {
            c.width_num = c.width_abs_err = c.width_rel_err = nan;
        }
        rep.rows.push_back(c);
    }
    if (rep.rows.empty()) throw MismatchedFamilies("compare_report: no delta shared by table and predictions");
    if (table.size() >= 3) {
        rep.fits.push_back(table.kind() == ModelKind::CCH ? fit_linear_A(table) : fit_cube_root_A(table));
        if (table.k() > 0) {
            try {
                rep.fits.push_back(fit_log_width(table));
            } catch (const Error&) {
                // no usable gap data
            }
        }
    }
    return rep;
}

namespace {

nlohmann::ordered_json num(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = to_string(kind);
    j["k"] = k;
    j["A_law_provenance"] = to_string(provenance);
    auto& rows_j = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        rows_j.push_back({{"delta", num(r.delta)},
                          {"A_num", num(r.A_num)},
                          {"A_pred", num(r.A_pred)},
                          {"A_abs_err", num(r.A_abs_err)},
                          {"A_rel_err", num(r.A_rel_err)},
                          {"width_num", num(r.width_num)},
                          {"width_pred", num(r.width_pred)},
                          {"width_abs_err", num(r.width_abs_err)},
                          {"width_rel_err", num(r.width_rel_err)}});
    }
    auto& fits_j = j["fits"] = nlohmann::ordered_json::array();
    for (const auto& f : fits) {
        nlohmann::ordered_json fj;
        fj["model"] = to_string(f.model);
        fj["parameters"] = f.parameters;
        fj["rms_residual"] = num(f.rms_residual);
        fj["n_points"] = f.n_points;
        fits_j.push_back(fj);
    }
    return j;
}

std::string Report::to_text() const {
    std::ostringstream os;
    char buf[256];
    os << to_string(kind) << " het_" << k << "  (A law: " << to_string(provenance) << ")\n";
    std::snprintf(buf, sizeof buf, "%12s %12s %12s %10s %10s %10s %10s\n", "delta", "A_num", "A_pred", "A_relerr",
                  "K_num", "K_pred", "K_relerr");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%12.5e %12.8f %12.8f %10.3e %10.5f %10.5f %10.3e\n", r.delta, r.A_num, r.A_pred,
                      r.A_rel_err, r.width_num, r.width_pred, r.width_rel_err);
        os << buf;
    }
    for (const auto& f : fits) {
        os << "fit " << to_string(f.model) << ":";
        for (double p : f.parameters) {
            std::snprintf(buf, sizeof buf, " %.8g", p);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "  (rms %.3e, n = %d)\n", f.rms_residual, f.n_points);
        os << buf;
    }
    return os.str();
}

}  // namespace heterokink
