#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {

struct FatigueRecord {
    double phase_deg = 0;
    double eps_a_pct = 0;
    double gamma_a_pct = 0;
    double sigma_a_mpa = 0;
    double tau_a_mpa = 0;
    double nf_cycles = 0;
};

struct OperatingCondition {
    std::string condition;
    std::string omega_profile;
    double eps_a_pct = 0;
    double gamma_a_pct = 0;
    double sigma_a_mpa = 0;
    double tau_a_mpa = 0;
};

struct MaterialProperties {
    double E_gpa = 0, G_gpa = 0, sigma_y_mpa = 0, nu_e = 0;
    double nu_p = 0.5;  // not tabulated anywhere; incompressible-plasticity default
    double sigma_f_prime_mpa = 0, b = 0, eps_f_prime = 0, c = 0;
    double tau_f_prime_mpa = 0, b0 = 0, gamma_f_prime = 0, c0 = 0;
    // cyclic stress-strain parameters: stored for completeness, unused
    double K1_mpa = 0, n1 = 0, K_prime_mpa = 0, n_prime = 0, K1_prime_mpa = 0, n1_prime = 0;

    void validate() const;
    // tau_f' ~ sigma_f'/sqrt(3), gamma_f' ~ sqrt(3)*eps_f', b0~b, c0~c
    void fill_missing_torsional();
};

struct DimensionlessSample {
    double features[4];  // eps_a, gamma_a, sigma/E, tau/G
    double nf_cycles = 0;
    double target_log = 0;
};

struct Metrics {
    double rmse_cycles = 0;
    double r2 = 0;
    double frac_within_2x = 0;
    double frac_within_3x = 0;
    int n_excluded = 0;
};

struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct DataValueError : std::runtime_error {
    explicit DataValueError(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidK : std::invalid_argument {
    explicit InvalidK(const std::string& what) : std::invalid_argument(what) {}
};

// Bundled names data1/data2/data3 resolve to the embedded appendix tables;
// anything else is treated as a CSV path. RSL_DATA_DIR, when set, redirects
// bundled-name lookup to <dir>/<name>.csv.
std::vector<FatigueRecord> load_dataset(const std::string& name_or_path);
std::vector<OperatingCondition> load_conditions(const std::string& name_or_path);  // "table5"

// Bundled material ids: GH4169_25C, TC4_25C, GH4169_650C; else key=value file.
MaterialProperties load_material(const std::string& name_or_path);

std::string dataset_csv(std::span<const FatigueRecord> records);
std::vector<FatigueRecord> parse_dataset_csv(const std::string& text, const std::string& origin);

enum class Units { Percent, Fraction };

std::vector<DimensionlessSample> preprocess_dr(std::span<const FatigueRecord> records,
                                               const MaterialProperties& mat,
                                               Units units = Units::Percent);

// feature matrix view (n x 4, row-major) of preprocessed samples
std::vector<double> feature_matrix(std::span<const DimensionlessSample> samples);
std::vector<double> target_vector(std::span<const DimensionlessSample> samples);

// Cycle-space metrics; non-finite predictions are excluded and counted.
// Band membership is inclusive: within 2x means pred in [obs/2, 2*obs].
Metrics compute_metrics(std::span<const double> observed, std::span<const double> predicted);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Seeded shuffle then contiguous partition; fold sizes differ by at most one.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace rsl
