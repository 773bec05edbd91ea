#include "rsl/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rsl/rng.hpp"

namespace rsl {

namespace datasets {
extern const char* data1_csv;
extern const char* data2_csv;
extern const char* data3_csv;
extern const char* table5_csv;
extern const char* material_gh4169_25c;
extern const char* material_tc4_25c;
extern const char* material_gh4169_650c;
}  // namespace datasets

void MaterialProperties::validate() const {
    if (E_gpa <= 0 || G_gpa <= 0) throw DataValueError("material: E and G must be positive");
    if (sigma_f_prime_mpa <= 0 || eps_f_prime <= 0)
        throw DataValueError("material: sigma_f_prime and eps_f_prime must be positive");
    if (b >= 0 || c >= 0) throw DataValueError("material: b and c must be negative");
    if (tau_f_prime_mpa > 0 && (b0 >= 0 || c0 >= 0))
        throw DataValueError("material: b0 and c0 must be negative");
}

void MaterialProperties::fill_missing_torsional() {
    if (tau_f_prime_mpa > 0) return;
    tau_f_prime_mpa = sigma_f_prime_mpa / std::sqrt(3.0);
    gamma_f_prime = std::sqrt(3.0) * eps_f_prime;
    b0 = b;
    c0 = c;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (std::string& s : out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    }
    return out;
}

double parse_number(const std::string& s, const std::string& origin, std::size_t row,
                    const std::string& col) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataValueError(origin + ": row " + std::to_string(row) + ", column '" + col +
                             "': cannot parse value '" + s + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataValueError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* bundled_dataset(const std::string& name) {
    if (name == "data1") return datasets::data1_csv;
    if (name == "data2") return datasets::data2_csv;
    if (name == "data3") return datasets::data3_csv;
    return nullptr;
}

std::string resolve_text(const std::string& name_or_path, const char* bundled) {
    if (bundled) {
        if (const char* dir = std::getenv("RSL_DATA_DIR")) {
            std::string p = std::string(dir) + "/" + name_or_path + ".csv";
            if (std::ifstream probe(p); probe) return read_file(p);
        }
        return bundled;
    }
    return read_file(name_or_path);
}

}  // namespace

std::vector<FatigueRecord> parse_dataset_csv(const std::string& text, const std::string& origin) {
    static const char* kCols[] = {"phase_deg", "eps_a_pct",   "gamma_a_pct",
                                  "sigma_a_mpa", "tau_a_mpa", "nf_cycles"};
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch(origin + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() != 6) throw SchemaMismatch(origin + ": expected 6 columns");
    for (int i = 0; i < 6; ++i)
        if (header[static_cast<std::size_t>(i)] != kCols[i])
            throw SchemaMismatch(origin + ": missing or renamed column '" + std::string(kCols[i]) +
                                 "' (found '" + header[static_cast<std::size_t>(i)] + "')");
    std::vector<FatigueRecord> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6)
            throw DataValueError(origin + ": row " + std::to_string(row) + ": expected 6 fields");
        FatigueRecord r;
        r.phase_deg = parse_number(f[0], origin, row, kCols[0]);
        r.eps_a_pct = parse_number(f[1], origin, row, kCols[1]);
        r.gamma_a_pct = parse_number(f[2], origin, row, kCols[2]);
        r.sigma_a_mpa = parse_number(f[3], origin, row, kCols[3]);
        r.tau_a_mpa = parse_number(f[4], origin, row, kCols[4]);
        r.nf_cycles = parse_number(f[5], origin, row, kCols[5]);
        if (r.nf_cycles < 1)
            throw DataValueError(origin + ": row " + std::to_string(row) + ": nf_cycles must be >= 1");
        if (r.eps_a_pct < 0 || r.gamma_a_pct < 0 || r.sigma_a_mpa < 0 || r.tau_a_mpa < 0)
            throw DataValueError(origin + ": row " + std::to_string(row) + ": amplitudes must be >= 0");
        out.push_back(r);
    }
    return out;
}

std::vector<FatigueRecord> load_dataset(const std::string& name_or_path) {
    const char* bundled = bundled_dataset(name_or_path);
    return parse_dataset_csv(resolve_text(name_or_path, bundled), name_or_path);
}

std::vector<OperatingCondition> load_conditions(const std::string& name_or_path) {
    const char* bundled = name_or_path == "table5" ? datasets::table5_csv : nullptr;
    std::string text = resolve_text(name_or_path, bundled);
    static const char* kCols[] = {"condition", "omega_profile", "eps_a_pct",
                                  "gamma_a_pct", "sigma_a_mpa", "tau_a_mpa"};
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch(name_or_path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() != 6) throw SchemaMismatch(name_or_path + ": expected 6 columns");
    for (int i = 0; i < 6; ++i)
        if (header[static_cast<std::size_t>(i)] != kCols[i])
            throw SchemaMismatch(name_or_path + ": missing or renamed column '" +
                                 std::string(kCols[i]) + "'");
    std::vector<OperatingCondition> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6)
            throw DataValueError(name_or_path + ": row " + std::to_string(row) +
                                 ": expected 6 fields");
        OperatingCondition c;
        c.condition = f[0];
        c.omega_profile = f[1];
        c.eps_a_pct = parse_number(f[2], name_or_path, row, kCols[2]);
        c.gamma_a_pct = parse_number(f[3], name_or_path, row, kCols[3]);
        c.sigma_a_mpa = parse_number(f[4], name_or_path, row, kCols[4]);
        c.tau_a_mpa = parse_number(f[5], name_or_path, row, kCols[5]);
        out.push_back(c);
    }
    return out;
}

MaterialProperties load_material(const std::string& name_or_path) {
    std::string text;
    if (name_or_path == "GH4169_25C")
        text = datasets::material_gh4169_25c;
    else if (name_or_path == "TC4_25C")
        text = datasets::material_tc4_25c;
    else if (name_or_path == "GH4169_650C")
        text = datasets::material_gh4169_650c;
    else
        text = read_file(name_or_path);

    MaterialProperties m;
    m.tau_f_prime_mpa = 0;  // may be filled by approximation
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        double v = parse_number(val, name_or_path, row, key);
        if (key == "E_gpa") m.E_gpa = v;
        else if (key == "G_gpa") m.G_gpa = v;
        else if (key == "sigma_y_mpa") m.sigma_y_mpa = v;
        else if (key == "nu_e") m.nu_e = v;
        else if (key == "nu_p") m.nu_p = v;
        else if (key == "sigma_f_prime_mpa") m.sigma_f_prime_mpa = v;
        else if (key == "b") m.b = v;
        else if (key == "eps_f_prime") m.eps_f_prime = v;
        else if (key == "c") m.c = v;
        else if (key == "tau_f_prime_mpa") m.tau_f_prime_mpa = v;
        else if (key == "b0") m.b0 = v;
        else if (key == "gamma_f_prime") m.gamma_f_prime = v;
        else if (key == "c0") m.c0 = v;
        else if (key == "K1_mpa") m.K1_mpa = v;
        else if (key == "n1") m.n1 = v;
        else if (key == "K_prime_mpa") m.K_prime_mpa = v;
        else if (key == "n_prime") m.n_prime = v;
        else if (key == "K1_prime_mpa") m.K1_prime_mpa = v;
        else if (key == "n1_prime") m.n1_prime = v;
        else throw SchemaMismatch(name_or_path + ": unknown material field '" + key + "'");
    }
    m.fill_missing_torsional();
    m.validate();
    return m;
}

std::string dataset_csv(std::span<const FatigueRecord> records) {
    std::string out = "phase_deg,eps_a_pct,gamma_a_pct,sigma_a_mpa,tau_a_mpa,nf_cycles\n";
    char buf[256];
    for (const FatigueRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.phase_deg,
                      r.eps_a_pct, r.gamma_a_pct, r.sigma_a_mpa, r.tau_a_mpa, r.nf_cycles);
        out += buf;
    }
    return out;
}

std::vector<DimensionlessSample> preprocess_dr(std::span<const FatigueRecord> records,
                                               const MaterialProperties& mat, Units units) {
    std::vector<DimensionlessSample> out;
    out.reserve(records.size());
    const double unit_scale = units == Units::Percent ? 1.0 : 0.01;
    for (const FatigueRecord& r : records) {
        DimensionlessSample s;
        s.features[0] = r.eps_a_pct * unit_scale;
        s.features[1] = r.gamma_a_pct * unit_scale;
        s.features[2] = 100.0 * r.sigma_a_mpa / (mat.E_gpa * 1000.0) * unit_scale;
        s.features[3] = 100.0 * r.tau_a_mpa / (mat.G_gpa * 1000.0) * unit_scale;
        s.nf_cycles = r.nf_cycles;
        s.target_log = std::log(r.nf_cycles);
        out.push_back(s);
    }
    return out;
}

std::vector<double> feature_matrix(std::span<const DimensionlessSample> samples) {
    std::vector<double> X;
    X.reserve(samples.size() * 4);
    for (const DimensionlessSample& s : samples)
        X.insert(X.end(), {s.features[0], s.features[1], s.features[2], s.features[3]});
    return X;
}

std::vector<double> target_vector(std::span<const DimensionlessSample> samples) {
    std::vector<double> y;
    y.reserve(samples.size());
    for (const DimensionlessSample& s : samples) y.push_back(s.nf_cycles);
    return y;
}

Metrics compute_metrics(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.size() != predicted.size())
        throw std::invalid_argument("compute_metrics: length mismatch");
    // canonical order: exact permutation invariance of the accumulations
    std::vector<std::size_t> idx(observed.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (observed[a] != observed[b]) return observed[a] < observed[b];
        bool fa = std::isfinite(predicted[a]), fb = std::isfinite(predicted[b]);
        if (fa != fb) return fb;
        if (fa && predicted[a] != predicted[b]) return predicted[a] < predicted[b];
        return false;
    });

    Metrics m;
    std::size_t n = 0;
    double mean = 0;
    for (std::size_t i : idx) {
        if (!std::isfinite(predicted[i])) {
            ++m.n_excluded;
            continue;
        }
        mean += observed[i];
        ++n;
    }
    if (n == 0) {
        m.rmse_cycles = std::numeric_limits<double>::quiet_NaN();
        m.r2 = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    mean /= static_cast<double>(n);
    double ssr = 0, sst = 0;
    std::size_t in2 = 0, in3 = 0;
    for (std::size_t i : idx) {
        if (!std::isfinite(predicted[i])) continue;
        const double o = observed[i], p = predicted[i];
        ssr += (o - p) * (o - p);
        sst += (o - mean) * (o - mean);
        if (p >= o / 2 && p <= 2 * o) ++in2;
        if (p >= o / 3 && p <= 3 * o) ++in3;
    }
    m.rmse_cycles = std::sqrt(ssr / static_cast<double>(n));
    m.r2 = sst > 0 ? 1.0 - ssr / sst : (ssr == 0 ? 1.0 : -std::numeric_limits<double>::infinity());
    m.frac_within_2x = static_cast<double>(in2) / static_cast<double>(n);
    m.frac_within_3x = static_cast<double>(in3) / static_cast<double>(n);
    return m;
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > n) throw InvalidK("kfold: need 1 <= k <= n");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0xf01d5ULL));
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(idx[i - 1], idx[j]);
    }
    std::vector<Fold> folds(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) folds[f].validation.push_back(idx[pos++]);
        std::sort(folds[f].validation.begin(), folds[f].validation.end());
    }
    for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            bool in_val = std::binary_search(folds[f].validation.begin(),
                                             folds[f].validation.end(), i);
            if (!in_val) folds[f].train.push_back(i);
        }
    }
    return folds;
}

}  // namespace rsl
