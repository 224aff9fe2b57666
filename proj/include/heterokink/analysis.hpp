#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/shoot.hpp"

namespace heterokink {

/// Consecutive gaps between zero crossings of U1 on the Hermite interpolant.
/// Throws FewerThanTwoCrossings.
std::vector<double> root_distances(const MeshFunction& profile);

/// Same for a sampled scalar profile with first derivatives (jet[0], jet[1]).
std::vector<double> root_distances(const std::vector<JetSample>& profile);

/// Jets (c, c', ..., c^(dim)) at interval midpoints of a phase-space
/// profile: the first dim entries from the Hermite value, the last from the
/// Hermite slope of U_dim. Feeds profile_residual.
std::vector<JetSample> midpoint_jets(const MeshFunction& profile);

enum class Source { Shoot, Bvp };
std::string to_string(Source s);
Source parse_source(std::string_view text);

struct BranchRow {
    double delta = 0.0;
    double A = 0.0;
    int k = 0;
    double d_min = 0.0;
    std::vector<double> gaps;

    friend bool operator==(const BranchRow&, const BranchRow&) = default;
};

/// Rows of one (kind, k) family from one method, sorted by delta.
class BranchTable {
public:
    BranchTable() = default;
    BranchTable(ModelKind kind, int k, Source source) : kind_(kind), k_(k), source_(source) {}

    static BranchTable from_points(const std::vector<BranchPoint>& points, Source source = Source::Shoot);
    static BranchTable from_solutions(const std::vector<BvpSolution>& solutions, int k);

    /// Inserts in delta order; a row with the same delta replaces the old one.
    void add(const BranchRow& row);

    ModelKind kind() const { return kind_; }
    int k() const { return k_; }
    Source source() const { return source_; }
    const std::vector<BranchRow>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    /// Rows with delta in [lo, hi].
    BranchTable subset(double lo, double hi) const;

    friend bool operator==(const BranchTable&, const BranchTable&) = default;

private:
    ModelKind kind_ = ModelKind::CCH;
    int k_ = 0;
    Source source_ = Source::Shoot;
    std::vector<BranchRow> rows_;
};

enum class FitModel { LinearA, LogWidth, CubeRootA };
std::string to_string(FitModel m);

struct FitResult {
    FitModel model = FitModel::LinearA;
    /// LinearA: {mu1} with A = 1 - mu1 delta. LogWidth: {eta1, eta2} with
    /// K = eta1 ln(eta2 delta). CubeRootA: {A1} with A = 1 + A1 delta^(1/3).
    std::vector<double> parameters;
    double rms_residual = 0.0;
    int n_points = 0;
};

FitResult fit_linear_A(const BranchTable& table);

/// Unweighted linear least squares of the first gap against ln delta,
/// K = a ln delta + b, reported as eta1 = a, eta2 = exp(b / a).
FitResult fit_log_width(const BranchTable& table);

FitResult fit_cube_root_A(const BranchTable& table);

struct ComparisonRow {
    double delta = 0.0;
    double A_num = 0.0;
    double A_pred = 0.0;
    double width_num = 0.0;  ///< NaN when the row has no gap
    double width_pred = 0.0;
    double A_abs_err = 0.0;
    double A_rel_err = 0.0;
    double width_abs_err = 0.0;
    double width_rel_err = 0.0;
};

struct Report {
    ModelKind kind = ModelKind::CCH;
    int k = 0;
    Provenance provenance = Provenance::Derived;
    std::vector<ComparisonRow> rows;
    std::vector<FitResult> fits;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

/// Matches rows to predictions by delta (relative 1e-12). Throws
/// MismatchedFamilies when families differ or no delta overlaps.
Report compare_report(const BranchTable& table, const std::vector<AsymptoticPrediction>& predictions);

}  // namespace heterokink
