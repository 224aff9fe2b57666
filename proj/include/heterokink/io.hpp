#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "heterokink/analysis.hpp"
#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/shoot.hpp"

namespace heterokink {

const char* tool_version();

/// Writes to `path.tmp` and renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// Sidecar of a profile CSV.
struct ProfileMeta {
    ModelKind kind = ModelKind::CCH;
    int k = 0;
    double A = 0.0;
    double delta = 0.0;
    double L = 0.0;
    Source source = Source::Bvp;
    double residual = 0.0;
    std::string tool_version;
};

struct ProfileFile {
    ProfileMeta meta;
    std::vector<double> x;
    std::vector<Eigen::VectorXd> U;

    /// Hermite-ready profile; slopes by second-order finite differences.
    MeshFunction mesh_function() const;
};

/// Sidecar path: the CSV path with extension ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

std::string profile_csv(const std::vector<double>& x, const std::vector<Eigen::VectorXd>& U);
std::string profile_sidecar(const ProfileMeta& meta);

/// Parses `x,U1,...,Udim`; checks column count against `kind` and that x is
/// strictly increasing. Throws ParseError.
void parse_profile_csv(const std::string& text, ModelKind kind, std::vector<double>& x,
                       std::vector<Eigen::VectorXd>& U);
ProfileMeta parse_profile_sidecar(const std::string& text);

void write_profile(const std::filesystem::path& csv, const ProfileFile& file);
ProfileFile read_profile(const std::filesystem::path& csv);

/// `delta,A,k,d_min,gap1,...`; missing gaps are empty cells. A file may mix
/// families (a scan at one delta); tables hold one.
std::string branch_csv(const std::vector<BranchRow>& rows);
std::string branch_csv(const BranchTable& table);
/// `k` is null for mixed files.
std::string branch_sidecar(ModelKind kind, Source source, std::optional<int> k, std::size_t rows);

/// Rows in file order. Throws ParseError.
std::vector<BranchRow> parse_branch_rows(const std::string& text);

/// Keeps rows of family `k`, or requires a single family when k is unset.
BranchTable to_table(const std::vector<BranchRow>& rows, ModelKind kind, Source source,
                     std::optional<int> k = std::nullopt);

BranchRow to_row(const BranchPoint& point);

void write_branch(const std::filesystem::path& csv, const BranchTable& table);
void write_branch(const std::filesystem::path& csv, ModelKind kind, Source source, const std::vector<BranchRow>& rows);

struct BranchFile {
    ModelKind kind = ModelKind::CCH;
    Source source = Source::Shoot;
    std::vector<BranchRow> rows;
};

/// The kind comes from the sidecar, or from `kind` when there is none.
BranchFile read_branch_file(const std::filesystem::path& csv, std::optional<ModelKind> kind = std::nullopt);
BranchTable read_branch(const std::filesystem::path& csv, std::optional<ModelKind> kind = std::nullopt,
                        std::optional<int> k = std::nullopt);

std::string distance_csv(const DistanceProfile& profile);
std::string prediction_csv(const std::vector<AsymptoticPrediction>& rows);

/// Defaults shared by every command. Keys are `section.field`.
struct RunConfig {
    ShootConfig shoot;
    BvpConfig bvp;
    ContinuationConfig cont;
    double fit_delta_min = 0.0;
    double fit_delta_max = std::numeric_limits<double>::infinity();

    /// Throws ContractViolation for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    static const std::vector<std::string>& keys();
    /// Every key with its current value, one `key = value` per line.
    std::string dump() const;
};

/// `key = value` lines, `#` comments. Throws ParseError with the line number.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});

/// Config from $HETEROKINK_CONFIG, or defaults when unset.
RunConfig load_run_config();

}  // namespace heterokink
