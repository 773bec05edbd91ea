#include "rsl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rsl {

void RunConfig::validate() const {
    try {
        constraints.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (hidden_width < 1) throw ConfigError("policy: hidden_width must be >= 1");
    if (n_size < 1) throw ConfigError("trainer: n_size must be >= 1");
    if (n_epoch < 0) throw ConfigError("trainer: n_epoch must be >= 0");
    if (n_group < 0 || n_group > n_epoch)
        throw ConfigError("trainer: need 0 <= n_group <= n_epoch");
    if (augment_factor < 1) throw ConfigError("trainer: augment_factor must be >= 1");
    if (!(p1 > 0 && p1 < 1) || !(p2 > 0 && p2 < 1))
        throw ConfigError("trainer: p1 and p2 must lie in (0, 1)");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("trainer: optimizer must be adam or sgd");
    if (restarts < 1) throw ConfigError("trainer: restarts must be >= 1");
    if (target_transform != "log_life" && target_transform != "raw")
        throw ConfigError("trainer: target_transform must be log_life or raw");
    if (units != "percent" && units != "fraction")
        throw ConfigError("units: units must be percent or fraction");
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("field '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_num(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
    }
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            if (section != "library" && section != "constraints" && section != "policy" &&
                section != "trainer" && section != "units")
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
        auto fail_key = [&]() {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown field '" + key +
                              "' in section [" + section + "]");
        };
        if (section == "library") {
            if (key == "add") cfg.library.op_add = parse_bool(val, key);
            else if (key == "sub") cfg.library.op_sub = parse_bool(val, key);
            else if (key == "mul") cfg.library.op_mul = parse_bool(val, key);
            else if (key == "div") cfg.library.op_div = parse_bool(val, key);
            else if (key == "ln") cfg.library.op_ln = parse_bool(val, key);
            else if (key == "exp") cfg.library.op_exp = parse_bool(val, key);
            else if (key == "sqrt") cfg.library.op_sqrt = parse_bool(val, key);
            else if (key == "square") cfg.library.op_square = parse_bool(val, key);
            else fail_key();
        } else if (section == "constraints") {
            if (key == "l") cfg.constraints.l = static_cast<int>(parse_num(val, key));
            else if (key == "n_const") cfg.constraints.n_const = static_cast<int>(parse_num(val, key));
            else if (key == "max_tokens") cfg.constraints.max_tokens = static_cast<int>(parse_num(val, key));
            else if (key == "inss_enabled") cfg.constraints.inss_enabled = parse_bool(val, key);
            else if (key == "cosm_enabled") cfg.constraints.cosm_enabled = parse_bool(val, key);
            else if (key == "felc_enabled") cfg.constraints.felc_enabled = parse_bool(val, key);
            else fail_key();
        } else if (section == "policy") {
            if (key == "hidden_width") cfg.hidden_width = static_cast<int>(parse_num(val, key));
            else if (key == "init_range") cfg.init_range = parse_num(val, key);
            else fail_key();
        } else if (section == "trainer") {
            if (key == "n_size") cfg.n_size = static_cast<int>(parse_num(val, key));
            else if (key == "n_epoch") cfg.n_epoch = static_cast<int>(parse_num(val, key));
            else if (key == "n_group") cfg.n_group = static_cast<int>(parse_num(val, key));
            else if (key == "augment_factor") cfg.augment_factor = static_cast<int>(parse_num(val, key));
            else if (key == "p1") cfg.p1 = parse_num(val, key);
            else if (key == "p2") cfg.p2 = parse_num(val, key);
            else if (key == "learning_rate") cfg.learning_rate = parse_num(val, key);
            else if (key == "entropy_coeff") cfg.entropy_coeff = parse_num(val, key);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_num(val, key));
            else if (key == "optimizer") cfg.optimizer = val;
            else if (key == "grad_clip") cfg.grad_clip = parse_num(val, key);
            else if (key == "stop_r2") cfg.stop_r2 = parse_num(val, key);
            else if (key == "restarts") cfg.restarts = static_cast<int>(parse_num(val, key));
            else if (key == "restart_range") cfg.restart_range = parse_num(val, key);
            else if (key == "max_fit_iterations") cfg.max_fit_iterations = static_cast<int>(parse_num(val, key));
            else if (key == "fit_grad_tol") cfg.fit_grad_tol = parse_num(val, key);
            else if (key == "target_transform") cfg.target_transform = val;
            else fail_key();
        } else if (section == "units") {
            if (key == "units") cfg.units = val;
            else fail_key();
        } else {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": field outside of any section");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string render_config(const RunConfig& cfg) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto b = [](bool v) { return v ? "true" : "false"; };
    std::string out;
    out += "[library]\n";
    out += std::string("add=") + b(cfg.library.op_add) + "\n";
    out += std::string("sub=") + b(cfg.library.op_sub) + "\n";
    out += std::string("mul=") + b(cfg.library.op_mul) + "\n";
    out += std::string("div=") + b(cfg.library.op_div) + "\n";
    out += std::string("ln=") + b(cfg.library.op_ln) + "\n";
    out += std::string("exp=") + b(cfg.library.op_exp) + "\n";
    out += std::string("sqrt=") + b(cfg.library.op_sqrt) + "\n";
    out += std::string("square=") + b(cfg.library.op_square) + "\n";
    out += "[constraints]\n";
    out += "l=" + std::to_string(cfg.constraints.l) + "\n";
    out += "n_const=" + std::to_string(cfg.constraints.n_const) + "\n";
    out += "max_tokens=" + std::to_string(cfg.constraints.max_tokens) + "\n";
    out += std::string("inss_enabled=") + b(cfg.constraints.inss_enabled) + "\n";
    out += std::string("cosm_enabled=") + b(cfg.constraints.cosm_enabled) + "\n";
    out += std::string("felc_enabled=") + b(cfg.constraints.felc_enabled) + "\n";
    out += "[policy]\n";
    out += "hidden_width=" + std::to_string(cfg.hidden_width) + "\n";
    out += "init_range=" + num(cfg.init_range) + "\n";
    out += "[trainer]\n";
    out += "n_size=" + std::to_string(cfg.n_size) + "\n";
    out += "n_epoch=" + std::to_string(cfg.n_epoch) + "\n";
    out += "n_group=" + std::to_string(cfg.n_group) + "\n";
    out += "augment_factor=" + std::to_string(cfg.augment_factor) + "\n";
    out += "p1=" + num(cfg.p1) + "\n";
    out += "p2=" + num(cfg.p2) + "\n";
    out += "learning_rate=" + num(cfg.learning_rate) + "\n";
    out += "entropy_coeff=" + num(cfg.entropy_coeff) + "\n";
    out += "seed=" + std::to_string(cfg.seed) + "\n";
    out += "optimizer=" + cfg.optimizer + "\n";
    out += "grad_clip=" + num(cfg.grad_clip) + "\n";
    out += "stop_r2=" + num(cfg.stop_r2) + "\n";
    out += "restarts=" + std::to_string(cfg.restarts) + "\n";
    out += "restart_range=" + num(cfg.restart_range) + "\n";
    out += "max_fit_iterations=" + std::to_string(cfg.max_fit_iterations) + "\n";
    out += "fit_grad_tol=" + num(cfg.fit_grad_tol) + "\n";
    out += "target_transform=" + cfg.target_transform + "\n";
    out += "[units]\n";
    out += "units=" + cfg.units + "\n";
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::string text = render_config(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace rsl
