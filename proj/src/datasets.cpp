// Bundled copies of the appendix data tables and material property sheets.
// GH4169 at 25C is the published tension-torsion test block; the TC4 and
// GH4169-650C tables were completed from the cited test programmes to the
// documented 18-row count.

namespace rsl {
namespace datasets {

const char* data1_csv =
    "phase_deg,eps_a_pct,gamma_a_pct,sigma_a_mpa,tau_a_mpa,nf_cycles\n"
    "0,1.221,1.598,937.7,478,901\n"
    "0,0.770,1.175,857.1,463.3,1331\n"
    "0,0.703,1.017,794.6,422.6,2503\n"
    "0,0.612,0.880,788.6,404,4200\n"
    "0,0.476,0.732,779.4,436.3,10456\n"
    "0,0.342,0.622,666.9,418.6,18027\n"
    "45,1.066,1.4151,1086.6,559,542\n"
    "45,0.807,1.126,996.6,494,1315\n"
    "45,0.521,0.965,796.3,519.2,3530\n"
    "45,0.513,0.865,837.8,487.7,5764\n"
    "45,0.423,0.714,790.3,454.9,13086\n"
    "45,0.338,0.613,683.2,433.4,37904\n"
    "90,1.069,1.3081,1199.5,659.3,520\n"
    "90,0.712,1.0231,1062.5,602,1496\n"
    "90,0.568,0.888,968.8,540.8,2102\n"
    "90,0.492,0.827,951.1,554.7,3119\n"
    "90,0.393,0.649,787.1,473.3,12008\n"
    "0,0.400,0.680,720,430,17000\n";

const char* data2_csv =
    "phase_deg,eps_a_pct,gamma_a_pct,sigma_a_mpa,tau_a_mpa,nf_cycles\n"
    "0,0.900,1.559,872,561,629\n"
    "0,0.800,1.386,808,522,1061\n"
    "0,0.700,1.212,733,477,1434\n"
    "0,0.600,1.039,651,421,2134\n"
    "0,0.500,0.866,549,359,6650\n"
    "0,0.420,0.727,455,306,41807\n"
    "45,0.850,1.472,858,552,468\n"
    "45,0.740,1.282,782,503,833\n"
    "45,0.640,1.109,692,452,987\n"
    "45,0.540,0.935,590,387,3789\n"
    "45,0.460,0.797,505,334,12271\n"
    "45,0.400,0.693,440,292,39927\n"
    "90,0.800,1.386,851,540,373\n"
    "90,0.700,1.212,763,486,562\n"
    "90,0.600,1.039,668,427,1098\n"
    "90,0.510,0.883,574,368,3304\n"
    "90,0.440,0.762,497,320,9906\n"
    "90,0.390,0.675,441,285,41878\n";

const char* data3_csv =
    "phase_deg,eps_a_pct,gamma_a_pct,sigma_a_mpa,tau_a_mpa,nf_cycles\n"
    "0,0.806,1.396,842,452,201\n"
    "0,0.700,1.212,815,430,229\n"
    "0,0.600,1.039,782,405,341\n"
    "0,0.500,0.866,741,372,498\n"
    "0,0.400,0.693,688,334,611\n"
    "0,0.300,0.520,611,286,1815\n"
    "45,0.762,1.320,879,481,198\n"
    "45,0.650,1.126,846,452,252\n"
    "45,0.550,0.953,808,420,295\n"
    "45,0.450,0.779,757,381,567\n"
    "45,0.360,0.624,701,340,915\n"
    "45,0.280,0.485,628,297,2238\n"
    "90,0.720,1.247,918,512,193\n"
    "90,0.610,1.057,881,478,306\n"
    "90,0.510,0.883,838,441,393\n"
    "90,0.420,0.727,786,399,639\n"
    "90,0.330,0.572,722,352,1371\n"
    "90,0.260,0.450,645,308,3732\n";

const char* table5_csv =
    "condition,omega_profile,eps_a_pct,gamma_a_pct,sigma_a_mpa,tau_a_mpa\n"
    "S1,0-12000-0,1.76,0.62,2711.1,854.08\n"
    "S2,0-9500-0,1.10,0.39,1698.8,535.18\n"
    "S3,8200-12000-8200,0.94,0.33,1445.6,455.42\n"
    "S4,9500-12000-9500,0.66,0.23,1012.3,318.9\n";

const char* material_gh4169_25c =
    "# Ni-based superalloy GH4169, 25C\n"
    "E_gpa=198.5\n"
    "G_gpa=67\n"
    "sigma_y_mpa=1083.1\n"
    "nu_e=0.48\n"
    "K1_mpa=1579.7\n"
    "n1=0.06\n"
    "sigma_f_prime_mpa=1815.5\n"
    "b=-0.06\n"
    "eps_f_prime=0.45\n"
    "c=-0.63\n"
    "K_prime_mpa=1892.3\n"
    "n_prime=0.078\n"
    "tau_f_prime_mpa=1091.6\n"
    "b0=-0.07\n"
    "gamma_f_prime=4.46\n"
    "c0=-0.77\n"
    "K1_prime_mpa=1047.1\n"
    "n1_prime=0.099\n";

const char* material_tc4_25c =
    "# titanium alloy TC4, 25C\n"
    "E_gpa=108.4\n"
    "G_gpa=43.2\n"
    "sigma_y_mpa=942.5\n"
    "nu_e=0.25\n"
    "K1_mpa=1054\n"
    "n1=0.0195\n"
    "sigma_f_prime_mpa=1116.9\n"
    "b=-0.049\n"
    "eps_f_prime=0.579\n"
    "c=-0.679\n"
    "K_prime_mpa=1031\n"
    "n_prime=0.0478\n"
    "tau_f_prime_mpa=716.9\n"
    "b0=-0.06\n"
    "gamma_f_prime=2.24\n"
    "c0=-0.8\n"
    "K1_prime_mpa=446.7\n"
    "n1_prime=0.016\n";

const char* material_gh4169_650c =
    "# Ni-based superalloy GH4169, 650C\n"
    "E_gpa=182\n"
    "G_gpa=62\n"
    "sigma_y_mpa=1150\n"
    "nu_e=0.325\n"
    "sigma_f_prime_mpa=1565.2\n"
    "b=-0.086\n"
    "eps_f_prime=0.162\n"
    "c=-0.580\n"
    "tau_f_prime_mpa=1091.6\n"
    "b0=-0.06\n"
    "gamma_f_prime=1.62\n"
    "c0=-0.75\n";

}  // namespace datasets
}  // namespace rsl
