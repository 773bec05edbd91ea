#include "rsl/fatigue.hpp"

#include <algorithm>
#include <cmath>

#include "rsl/parallel.hpp"

namespace rsl {

const std::vector<std::string>& criterion_names() {
    static const std::vector<std::string> names{"cm_axial", "cm_shear", "bm", "kbm",
                                                "fs",       "whs",      "mwhs"};
    return names;
}

Criterion criterion_from_name(const std::string& name) {
    const auto& names = criterion_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Criterion>(i);
    std::string msg = "unknown criterion '" + name + "'; valid:";
    for (const auto& n : names) msg += " " + n;
    throw std::invalid_argument(msg);
}

std::string criterion_name(Criterion c) {
    return criterion_names()[static_cast<std::size_t>(c)];
}

CriticalPlaneResult critical_plane(const LoadState& load, const MaterialProperties& mat,
                                   const PlaneResolution& res) {
    const double nu = mat.nu_e;
    const double phi = load.phase_deg * M_PI / 180.0;
    const int nt = res.time_steps;
    std::vector<double> ex(static_cast<std::size_t>(nt)), gxy(static_cast<std::size_t>(nt)),
        sx(static_cast<std::size_t>(nt)), txy(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) {
        const double wt = 2.0 * M_PI * i / nt;
        ex[static_cast<std::size_t>(i)] = load.eps_a * std::sin(wt);
        gxy[static_cast<std::size_t>(i)] = load.gamma_a * std::sin(wt - phi);
        sx[static_cast<std::size_t>(i)] = load.sigma_a_mpa * std::sin(wt);
        txy[static_cast<std::size_t>(i)] = load.tau_a_mpa * std::sin(wt - phi);
    }
    CriticalPlaneResult best;
    bool first = true;
    for (double theta = 0.0; theta < 180.0 - 1e-12; theta += res.plane_step_deg) {
        const double t2 = 2.0 * theta * M_PI / 180.0;
        const double s2 = std::sin(t2), c2 = std::cos(t2);
        double gmax = -1e300, gmin = 1e300, emax = -1e300, emin = 1e300, smax = -1e300;
        for (int i = 0; i < nt; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            // engineering shear and normal strain on the plane at angle theta
            const double g = -(1.0 + nu) * ex[k] * s2 + gxy[k] * c2;
            const double en = ex[k] * (1.0 - nu) / 2.0 + ex[k] * (1.0 + nu) / 2.0 * c2 +
                              gxy[k] / 2.0 * s2;
            const double sn = sx[k] / 2.0 + sx[k] / 2.0 * c2 + txy[k] * s2;
            gmax = std::max(gmax, g);
            gmin = std::min(gmin, g);
            emax = std::max(emax, en);
            emin = std::min(emin, en);
            smax = std::max(smax, sn);
        }
        const double ga = (gmax - gmin) / 2.0;
        const double er = emax - emin;
        if (first || ga > best.max_shear_amp ||
            (ga == best.max_shear_amp && er > best.normal_strain_range)) {
            best.max_shear_amp = ga;
            best.normal_strain_range = er;
            best.max_normal_stress_mpa = smax;
            best.plane_angle_deg = theta;
            first = false;
        }
    }
    return best;
}

namespace {

struct Curves {
    double elastic, plastic, torsion;  // strain-life terms at the current 2Nf
};

Curves curves_at(double two_nf, const MaterialProperties& mat) {
    Curves c;
    c.elastic = mat.sigma_f_prime_mpa / (mat.E_gpa * 1000.0) * std::pow(two_nf, mat.b);
    c.plastic = mat.eps_f_prime * std::pow(two_nf, mat.c);
    c.torsion = mat.tau_f_prime_mpa / (mat.G_gpa * 1000.0) * std::pow(two_nf, mat.b0) +
                mat.gamma_f_prime * std::pow(two_nf, mat.c0);
    return c;
}

double whs_term(const CriticalPlaneResult& cp, const MaterialProperties& mat) {
    const double E = mat.E_gpa * 1000.0;
    return std::sqrt(std::max(cp.max_normal_stress_mpa, 0.0) * cp.normal_strain_range / E);
}

}  // namespace

double criterion_residual(Criterion c, double two_nf, const CriticalPlaneResult& cp,
                          const LoadState& load, const MaterialProperties& mat, double whs_k) {
    const Curves cv = curves_at(two_nf, mat);
    const double nu_e = mat.nu_e, nu_p = mat.nu_p;
    switch (c) {
        case Criterion::CmAxial:
            return load.eps_a - (cv.elastic + cv.plastic);
        case Criterion::CmShear:
            return cp.max_shear_amp - cv.torsion;
        case Criterion::BM: {
            const double s0 = 0.5;  // classic Brown-Miller coefficients
            return (cp.max_shear_amp + s0 * cp.normal_strain_range) -
                   ((1 + nu_e + s0 * (1 - nu_e)) * cv.elastic +
                    (1 + nu_p + s0 * (1 - nu_p)) * cv.plastic);
        }
        case Criterion::KBM: {
            // life-dependent s0, evaluated at the current iterate
            const double s0 = (cv.torsion - (1 + nu_e) * cv.elastic - (1 + nu_p) * cv.plastic) /
                              ((1 - nu_e) * cv.elastic + (1 - nu_p) * cv.plastic);
            return (cp.max_shear_amp + s0 * cp.normal_strain_range) -
                   ((1 + nu_e + s0 * (1 - nu_e)) * cv.elastic +
                    (1 + nu_p + s0 * (1 - nu_p)) * cv.plastic);
        }
        case Criterion::FS: {
            const double k = (cv.torsion / ((1 + nu_e) * cv.elastic + (1 + nu_p) * cv.plastic) -
                              1.0) *
                             2.0 * mat.sigma_y_mpa /
                             (mat.sigma_f_prime_mpa * std::pow(two_nf, mat.b));
            return cp.max_shear_amp *
                       (1.0 + k * cp.max_normal_stress_mpa / mat.sigma_y_mpa) -
                   cv.torsion;
        }
        case Criterion::WHS:
            return (cp.max_shear_amp + whs_k * whs_term(cp, mat)) - cv.torsion;
        case Criterion::MWHS:
            return (cp.max_shear_amp +
                    0.5 * (1.0 + cp.max_normal_stress_mpa / mat.sigma_y_mpa) * whs_term(cp, mat)) -
                   cv.torsion;
    }
    return 0.0;
}

SolveOutcome solve_life(Criterion c, const CriticalPlaneResult& cp, const LoadState& load,
                        const MaterialProperties& mat, double tol, double whs_k) {
    SolveOutcome out;
    const double damage = c == Criterion::CmAxial ? load.eps_a : cp.max_shear_amp;
    if (!(damage > 0.0)) {
        out.status = SolveStatus::InvalidDamage;
        return out;
    }
    double lo = 0.0, hi = 9.0;  // log10(2Nf)
    double flo = criterion_residual(c, std::pow(10.0, lo), cp, load, mat, whs_k);
    double fhi = criterion_residual(c, std::pow(10.0, hi), cp, load, mat, whs_k);
    if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0) {
        out.status = SolveStatus::NoRootInBracket;
        return out;
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = criterion_residual(c, std::pow(10.0, mid), cp, load, mat, whs_k);
        if (flo * fmid <= 0.0) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if (hi - lo < 1e-15) break;
    }
    (void)fhi;
    out.nf_cycles = std::pow(10.0, 0.5 * (lo + hi)) / 2.0;
    out.residual = std::abs(
        criterion_residual(c, 2.0 * out.nf_cycles, cp, load, mat, whs_k));
    out.status = out.residual < tol ? SolveStatus::Ok : SolveStatus::NoRootInBracket;
    return out;
}

SolveOutcome solve_life(Criterion c, const LoadState& load, const MaterialProperties& mat,
                        double tol, double whs_k, const PlaneResolution& res) {
    return solve_life(c, critical_plane(load, mat, res), load, mat, tol, whs_k);
}

LoadState to_load_state(const FatigueRecord& r) {
    LoadState l;
    l.eps_a = r.eps_a_pct / 100.0;
    l.gamma_a = r.gamma_a_pct / 100.0;
    l.sigma_a_mpa = r.sigma_a_mpa;
    l.tau_a_mpa = r.tau_a_mpa;
    l.phase_deg = r.phase_deg;
    return l;
}

double calibrate_whs_k(std::span<const FatigueRecord> records, const MaterialProperties& mat,
                       const PlaneResolution& res) {
    std::vector<CriticalPlaneResult> cps;
    std::vector<LoadState> loads;
    for (const FatigueRecord& r : records) {
        loads.push_back(to_load_state(r));
        cps.push_back(critical_plane(loads.back(), mat, res));
    }
    auto log_rmse = [&](double k) {
        double s = 0.0;
        for (std::size_t i = 0; i < cps.size(); ++i) {
            auto sol = solve_life(Criterion::WHS, cps[i], loads[i], mat, 1e-10, k);
            if (sol.status != SolveStatus::Ok) return 1e9;
            double d = std::log(sol.nf_cycles) - std::log(records[i].nf_cycles);
            s += d * d;
        }
        return std::sqrt(s / static_cast<double>(cps.size()));
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 10.0;
    for (int i = 0; i < 60; ++i) {
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        if (log_rmse(c1) < log_rmse(c2))
            b = c2;
        else
            a = c1;
    }
    return 0.5 * (a + b);
}

DatasetPrediction predict_dataset(Criterion c, std::span<const FatigueRecord> records,
                                  const MaterialProperties& mat, int threads,
                                  const PlaneResolution& res) {
    DatasetPrediction out;
    out.nf_pred.assign(records.size(), std::numeric_limits<double>::quiet_NaN());
    if (c == Criterion::WHS) out.whs_k = calibrate_whs_k(records, mat, res);
    std::vector<int> flagged(records.size(), 0);
    parallel_for(records.size(), threads, [&](std::size_t i) {
        LoadState load = to_load_state(records[i]);
        auto sol = solve_life(c, load, mat, 1e-10, out.whs_k, res);
        if (sol.status == SolveStatus::Ok)
            out.nf_pred[i] = sol.nf_cycles;
        else
            flagged[i] = 1;
    });
    for (int f : flagged) out.n_flagged += f;
    return out;
}

}  // namespace rsl
