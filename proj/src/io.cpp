#include "heterokink/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#ifndef HETEROKINK_VERSION
#define HETEROKINK_VERSION "0.0.0"
#endif

namespace heterokink {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* tool_version() { return HETEROKINK_VERSION; }

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

std::optional<long> to_long(const std::string& s) {
    const std::string t = trim(s);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

double need_double(const std::string& s, int line, const char* what) {
    auto v = to_double(s);
    if (!v) throw ParseError(std::string("bad number for ") + what + ": '" + trim(s) + "'", line);
    return *v;
}

/// Lines with their 1-based numbers, blank lines dropped.
std::vector<std::pair<int, std::string>> lines_of(const std::string& text) {
    std::vector<std::pair<int, std::string>> out;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        out.emplace_back(n, line);
    }
    return out;
}

ojson parse_json(const std::string& text, const char* what) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what(), 1);
    }
}

void check_schema(const ojson& j, const char* what) {
    if (!j.is_object() || !j.contains("schema") || j["schema"] != 1)
        throw ParseError(std::string(what) + ": missing or unsupported schema", 1);
}

template <class T>
T field(const ojson& j, const char* key, const char* what) {
    if (!j.contains(key)) throw ParseError(std::string(what) + ": missing field '" + key + "'", 1);
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string(what) + ": bad field '" + key + "'", 1);
    }
}

ModelKind kind_field(const ojson& j, const char* what) {
    try {
        return parse_model_kind(field<std::string>(j, "kind", what));
    } catch (const ContractViolation& e) {
        throw ParseError(std::string(what) + ": " + e.what(), 1);
    }
}

Source source_field(const ojson& j, const char* what) {
    try {
        return parse_source(field<std::string>(j, "source", what));
    } catch (const ContractViolation& e) {
        throw ParseError(std::string(what) + ": " + e.what(), 1);
    }
}

}  // namespace

fs::path sidecar_path(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

MeshFunction ProfileFile::mesh_function() const {
    MeshFunction m;
    m.x = x;
    m.U = U;
    const std::size_t n = x.size();
    m.dU.resize(n);
    if (n < 2) {
        for (auto& d : m.dU) d = Eigen::VectorXd::Zero(U.empty() ? 0 : U.front().size());
        return m;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            m.dU[i] = (U[1] - U[0]) / (x[1] - x[0]);
        } else if (i == n - 1) {
            m.dU[i] = (U[n - 1] - U[n - 2]) / (x[n - 1] - x[n - 2]);
        } else {
            // Three-point derivative on a nonuniform grid.
            const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            m.dU[i] = (-h1 / (h0 * (h0 + h1))) * U[i - 1] + ((h1 - h0) / (h0 * h1)) * U[i] +
                      (h0 / (h1 * (h0 + h1))) * U[i + 1];
        }
    }
    return m;
}

std::string profile_csv(const std::vector<double>& x, const std::vector<Eigen::VectorXd>& U) {
    if (x.size() != U.size()) throw ContractViolation("profile_csv: x and U differ in length");
    const int dim = U.empty() ? 0 : static_cast<int>(U.front().size());
    std::string out = "x";
    for (int c = 1; c <= dim; ++c) out += ",U" + std::to_string(c);
    out += '\n';
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += fmt17(x[i]);
        for (int c = 0; c < dim; ++c) out += ',' + fmt17(U[i][c]);
        out += '\n';
    }
    return out;
}

std::string profile_sidecar(const ProfileMeta& m) {
    ojson j;
    j["schema"] = 1;
    j["kind"] = to_string(m.kind);
    j["k"] = m.k;
    j["A"] = m.A;
    j["delta"] = m.delta;
    j["L"] = m.L;
    j["source"] = to_string(m.source);
    j["residual"] = m.residual;
    j["tool_version"] = m.tool_version.empty() ? tool_version() : m.tool_version;
    return j.dump(2) + "\n";
}

void parse_profile_csv(const std::string& text, ModelKind kind, std::vector<double>& x,
                       std::vector<Eigen::VectorXd>& U) {
    const int dim = dimension(kind);
    auto lines = lines_of(text);
    if (lines.empty()) throw ParseError("empty profile file", 1);
    const auto header = split(lines.front().second, ',');
    if (static_cast<int>(header.size()) != dim + 1 || trim(header[0]) != "x")
        throw ParseError("profile header must be x,U1..U" + std::to_string(dim), lines.front().first);
    for (int c = 1; c <= dim; ++c)
        if (trim(header[c]) != "U" + std::to_string(c))
            throw ParseError("profile header must be x,U1..U" + std::to_string(dim), lines.front().first);
    x.clear();
    U.clear();
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, line] = lines[r];
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != dim + 1)
            throw ParseError("expected " + std::to_string(dim + 1) + " columns, got " + std::to_string(cells.size()),
                             no);
        const double xv = need_double(cells[0], no, "x");
        if (!x.empty() && !(xv > x.back())) throw ParseError("x is not strictly increasing", no);
        Eigen::VectorXd u(dim);
        for (int c = 0; c < dim; ++c) u[c] = need_double(cells[c + 1], no, "U");
        x.push_back(xv);
        U.push_back(std::move(u));
    }
    if (x.size() < 2) throw ParseError("profile needs at least two rows", lines.back().first);
}

ProfileMeta parse_profile_sidecar(const std::string& text) {
    const char* what = "profile sidecar";
    const ojson j = parse_json(text, what);
    check_schema(j, what);
    ProfileMeta m;
    m.kind = kind_field(j, what);
    m.k = field<int>(j, "k", what);
    m.A = field<double>(j, "A", what);
    m.delta = field<double>(j, "delta", what);
    m.L = field<double>(j, "L", what);
    m.source = source_field(j, what);
    m.residual = field<double>(j, "residual", what);
    m.tool_version = field<std::string>(j, "tool_version", what);
    return m;
}

void write_profile(const fs::path& csv, const ProfileFile& file) {
    write_atomic(csv, profile_csv(file.x, file.U));
    write_atomic(sidecar_path(csv), profile_sidecar(file.meta));
}

ProfileFile read_profile(const fs::path& csv) {
    ProfileFile f;
    f.meta = parse_profile_sidecar(read_text(sidecar_path(csv)));
    parse_profile_csv(read_text(csv), f.meta.kind, f.x, f.U);
    return f;
}

std::string branch_csv(const std::vector<BranchRow>& rows) {
    std::size_t ng = 0;
    for (const auto& r : rows) ng = std::max(ng, r.gaps.size());
    std::string out = "delta,A,k,d_min";
    for (std::size_t g = 1; g <= ng; ++g) out += ",gap" + std::to_string(g);
    out += '\n';
    for (const auto& r : rows) {
        out += fmt17(r.delta) + ',' + fmt17(r.A) + ',' + std::to_string(r.k) + ',' + fmt17(r.d_min);
        for (std::size_t g = 0; g < ng; ++g) {
            out += ',';
            if (g < r.gaps.size()) out += fmt17(r.gaps[g]);
        }
        out += '\n';
    }
    return out;
}

std::string branch_csv(const BranchTable& table) { return branch_csv(table.rows()); }

std::string branch_sidecar(ModelKind kind, Source source, std::optional<int> k, std::size_t rows) {
    ojson j;
    j["schema"] = 1;
    j["kind"] = to_string(kind);
    j["k"] = k ? ojson(*k) : ojson(nullptr);
    j["source"] = to_string(source);
    j["rows"] = rows;
    j["tool_version"] = tool_version();
    return j.dump(2) + "\n";
}

std::vector<BranchRow> parse_branch_rows(const std::string& text) {
    auto lines = lines_of(text);
    if (lines.empty()) throw ParseError("empty branch file", 1);
    const auto header = split(lines.front().second, ',');
    static const char* fixed[] = {"delta", "A", "k", "d_min"};
    if (header.size() < 4) throw ParseError("branch header must start with delta,A,k,d_min", lines.front().first);
    for (int c = 0; c < 4; ++c)
        if (trim(header[c]) != fixed[c])
            throw ParseError("branch header must start with delta,A,k,d_min", lines.front().first);
    for (std::size_t c = 4; c < header.size(); ++c)
        if (trim(header[c]) != "gap" + std::to_string(c - 3))
            throw ParseError("unexpected column '" + trim(header[c]) + "'", lines.front().first);

    std::vector<BranchRow> rows;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, line] = lines[r];
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(cells.size()),
                             no);
        BranchRow row;
        row.delta = need_double(cells[0], no, "delta");
        row.A = need_double(cells[1], no, "A");
        auto k = to_long(cells[2]);
        if (!k || *k < 0) throw ParseError("bad k: '" + trim(cells[2]) + "'", no);
        row.k = static_cast<int>(*k);
        row.d_min = need_double(cells[3], no, "d_min");
        bool ended = false;
        for (std::size_t c = 4; c < cells.size(); ++c) {
            auto g = to_double(cells[c]);
            if (!g) {
                if (!trim(cells[c]).empty()) throw ParseError("bad gap: '" + trim(cells[c]) + "'", no);
                ended = true;
                continue;
            }
            if (ended) throw ParseError("gap after an empty cell", no);
            row.gaps.push_back(*g);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

BranchTable to_table(const std::vector<BranchRow>& rows, ModelKind kind, Source source, std::optional<int> k) {
    if (!k) {
        for (const auto& r : rows)
            if (r.k != rows.front().k)
                throw ContractViolation("branch file holds several families; select one k");
        k = rows.empty() ? 0 : rows.front().k;
    }
    BranchTable t(kind, *k, source);
    for (const auto& r : rows)
        if (r.k == *k) t.add(r);
    return t;
}

BranchRow to_row(const BranchPoint& p) { return {p.delta, p.A, p.k, p.d_min, p.root_distances}; }

void write_branch(const fs::path& csv, const BranchTable& table) {
    write_atomic(csv, branch_csv(table));
    write_atomic(sidecar_path(csv), branch_sidecar(table.kind(), table.source(), table.k(), table.size()));
}

void write_branch(const fs::path& csv, ModelKind kind, Source source, const std::vector<BranchRow>& rows) {
    std::optional<int> k;
    if (!rows.empty() && std::all_of(rows.begin(), rows.end(), [&](const BranchRow& r) { return r.k == rows[0].k; }))
        k = rows[0].k;
    write_atomic(csv, branch_csv(rows));
    write_atomic(sidecar_path(csv), branch_sidecar(kind, source, k, rows.size()));
}

BranchFile read_branch_file(const fs::path& csv, std::optional<ModelKind> kind) {
    BranchFile f;
    const fs::path side = sidecar_path(csv);
    if (fs::exists(side)) {
        const char* what = "branch sidecar";
        const ojson j = parse_json(read_text(side), what);
        check_schema(j, what);
        const ModelKind sk = kind_field(j, what);
        if (kind && *kind != sk)
            throw MismatchedFamilies("branch file is " + to_string(sk) + ", expected " + to_string(*kind));
        kind = sk;
        f.source = source_field(j, what);
    }
    if (!kind) throw ContractViolation("branch file " + csv.string() + " has no sidecar; pass the model kind");
    f.kind = *kind;
    f.rows = parse_branch_rows(read_text(csv));
    return f;
}

BranchTable read_branch(const fs::path& csv, std::optional<ModelKind> kind, std::optional<int> k) {
    const BranchFile f = read_branch_file(csv, kind);
    return to_table(f.rows, f.kind, f.source, k);
}

std::string distance_csv(const DistanceProfile& p) {
    std::string out = "A,d\n";
    for (std::size_t i = 0; i < p.A_values.size(); ++i) out += fmt17(p.A_values[i]) + ',' + fmt17(p.d_values[i]) + '\n';
    return out;
}

std::string prediction_csv(const std::vector<AsymptoticPrediction>& rows) {
    std::string out = "kind,k,delta,A_pred,width_pred,valid,A_provenance\n";
    for (const auto& r : rows) {
        out += to_string(r.kind) + ',' + std::to_string(r.k) + ',' + fmt17(r.delta) + ',' + fmt17(r.A_pred) + ',' +
               (r.width_pred > 0.0 ? fmt17(r.width_pred) : std::string()) + ',' + (r.valid ? "1" : "0") + ',' +
               to_string(r.A_provenance) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

struct Key {
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double parse_d(const std::string& key, const std::string& v) {
    auto d = to_double(v);
    if (!d) {
        if (trim(v) == "inf") return std::numeric_limits<double>::infinity();
        throw ContractViolation("config key " + key + ": bad number '" + v + "'");
    }
    return *d;
}

long parse_l(const std::string& key, const std::string& v) {
    auto l = to_long(v);
    if (!l) throw ContractViolation("config key " + key + ": bad integer '" + v + "'");
    return *l;
}

#define HK_DOUBLE(name, member)                                                       \
    Key {                                                                             \
        name, [](RunConfig& c, const std::string& v) { c.member = parse_d(name, v); }, \
            [](const RunConfig& c) { return fmt17(c.member); }                        \
    }
#define HK_INT(name, member, type)                                                                      \
    Key {                                                                                               \
        name, [](RunConfig& c, const std::string& v) { c.member = static_cast<type>(parse_l(name, v)); }, \
            [](const RunConfig& c) { return std::to_string(c.member); }                                 \
    }

const std::vector<Key>& key_table() {
    static const std::vector<Key> table = {
        HK_DOUBLE("shoot.eps_offset", shoot.eps_offset),
        HK_DOUBLE("shoot.threshold", shoot.threshold),
        HK_DOUBLE("shoot.a_min", shoot.a_min),
        HK_DOUBLE("shoot.a_max", shoot.a_max),
        HK_DOUBLE("shoot.a_step", shoot.a_step),
        HK_DOUBLE("shoot.refine_below", shoot.refine_below),
        HK_INT("shoot.refine_factor", shoot.refine_factor, int),
        HK_DOUBLE("shoot.bisect_tol", shoot.bisect_tol),
        HK_DOUBLE("shoot.accept_dmin", shoot.accept_dmin),
        HK_DOUBLE("shoot.angle", shoot.angle),
        HK_DOUBLE("shoot.x_max", shoot.x_max),
        HK_INT("shoot.threads", shoot.threads, unsigned),
        HK_INT("shoot.angle_samples", shoot.angle_samples, int),
        HK_DOUBLE("shoot.hcch_accept_dmin", shoot.hcch_accept_dmin),
        HK_DOUBLE("integrator.rtol", shoot.integrator.rtol),
        HK_DOUBLE("integrator.atol", shoot.integrator.atol),
        HK_DOUBLE("integrator.h_max", shoot.integrator.h_max),
        HK_INT("integrator.max_steps", shoot.integrator.max_steps, long),
        HK_DOUBLE("bvp.mesh_tol", bvp.mesh_tol),
        HK_DOUBLE("bvp.step_tol", bvp.step_tol),
        HK_DOUBLE("bvp.residual_tol", bvp.residual_tol),
        HK_INT("bvp.max_newton", bvp.max_newton, int),
        HK_INT("bvp.max_nodes", bvp.max_nodes, int),
        HK_INT("bvp.max_remesh", bvp.max_remesh, int),
        HK_DOUBLE("bvp.max_dx", bvp.max_dx),
        HK_INT("continuation.max_halvings", cont.max_halvings, int),
        HK_DOUBLE("fit.delta_min", fit_delta_min),
        HK_DOUBLE("fit.delta_max", fit_delta_max),
    };
    return table;
}

#undef HK_DOUBLE
#undef HK_INT

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    for (const auto& k : key_table()) {
        if (key == k.name) {
            k.set(*this, value);
            return;
        }
    }
    throw ContractViolation("unknown config key '" + key + "'");
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& k : key_table()) out.emplace_back(k.name);
        return out;
    }();
    return names;
}

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& k : key_table()) out += std::string(k.name) + " = " + k.get(*this) + '\n';
    return out;
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", no);
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        try {
            base.set(key, value);
        } catch (const ContractViolation& e) {
            throw ParseError(e.what(), no);
        }
    }
    return base;
}

RunConfig load_run_config() {
    const char* path = std::getenv("HETEROKINK_CONFIG");
    if (!path || !*path) return {};
    return parse_run_config(read_text(path));
}

}  // namespace heterokink
