#pragma once

#include <span>
#include <string>
#include <vector>

#include "rsl/dataio.hpp"

namespace rsl {

enum class Criterion { CmAxial, CmShear, BM, KBM, FS, WHS, MWHS };

const std::vector<std::string>& criterion_names();
Criterion criterion_from_name(const std::string& name);  // throws std::invalid_argument
std::string criterion_name(Criterion c);

// strains as fractions, stresses in MPa
struct LoadState {
    double eps_a = 0;
    double gamma_a = 0;
    double sigma_a_mpa = 0;
    double tau_a_mpa = 0;
    double phase_deg = 0;
};

struct CriticalPlaneResult {
    double max_shear_amp = 0;        // engineering shear, fraction
    double normal_strain_range = 0;  // fraction
    double max_normal_stress_mpa = 0;
    double plane_angle_deg = 0;
};

struct PlaneResolution {
    double plane_step_deg = 0.5;
    int time_steps = 720;
};

// Plane sweep over the thin-tube surface strain state
//   eps_x = eps_a sin wt, eps_y = -nu_e eps_x, gamma_xy = gamma_a sin(wt-phi),
//   sigma_x = sigma_a sin wt, tau_xy = tau_a sin(wt-phi).
// Critical plane maximizes the shear strain amplitude; ties break toward the
// larger normal strain range.
CriticalPlaneResult critical_plane(const LoadState& load, const MaterialProperties& mat,
                                   const PlaneResolution& res = {});

enum class SolveStatus { Ok, NoRootInBracket, InvalidDamage };

struct SolveOutcome {
    SolveStatus status = SolveStatus::Ok;
    double nf_cycles = 0;
    double residual = 0;  // |LHS - RHS| in strain units at the returned life
};

// LHS(damage) - RHS(2Nf) at reversals two_nf; for KBM (life-dependent s0) and
// FS (life-dependent k) the material constant is evaluated at the iterate.
// whs_k only matters for Criterion::WHS.
double criterion_residual(Criterion c, double two_nf, const CriticalPlaneResult& cp,
                          const LoadState& load, const MaterialProperties& mat,
                          double whs_k = 0.0);

// Bisection on log10(2Nf) over [1, 2e9] reversals.
SolveOutcome solve_life(Criterion c, const CriticalPlaneResult& cp, const LoadState& load,
                        const MaterialProperties& mat, double tol = 1e-10, double whs_k = 0.0);
SolveOutcome solve_life(Criterion c, const LoadState& load, const MaterialProperties& mat,
                        double tol = 1e-10, double whs_k = 0.0,
                        const PlaneResolution& res = {});

// 1-D golden-section calibration of WHS's k on [0,10], minimizing log-life
// RMSE over the dataset ("k is not constant but varies with the fatigue
// life"; a per-dataset scalar is the weakest defensible reading).
double calibrate_whs_k(std::span<const FatigueRecord> records, const MaterialProperties& mat,
                       const PlaneResolution& res = {});

struct DatasetPrediction {
    std::vector<double> nf_pred;  // NaN for flagged records
    int n_flagged = 0;
    double whs_k = 0.0;  // populated for Criterion::WHS
};

LoadState to_load_state(const FatigueRecord& r);  // percent -> fraction, the one conversion site

DatasetPrediction predict_dataset(Criterion c, std::span<const FatigueRecord> records,
                                  const MaterialProperties& mat, int threads = 1,
                                  const PlaneResolution& res = {});

}  // namespace rsl
