#include "nirsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nirsim/io.hpp"

namespace nirsim {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string join_list(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += io::fmt_full(v[i]);
    }
    return s;
}

struct Parser {
    std::vector<std::string> errors;

    bool parse_double(const std::string& key, const std::string& v, double& out) {
        try {
            size_t pos = 0;
            double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            out = x;
            return true;
        } catch (...) {
            errors.push_back(key + ": expected a number, got '" + v + "'");
            return false;
        }
    }
    bool parse_int(const std::string& key, const std::string& v, long& out) {
        try {
            size_t pos = 0;
            long x = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            out = x;
            return true;
        } catch (...) {
            errors.push_back(key + ": expected an integer, got '" + v + "'");
            return false;
        }
    }
    bool parse_u64(const std::string& key, const std::string& v, std::uint64_t& out) {
        try {
            size_t pos = 0;
            unsigned long long x = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            out = x;
            return true;
        } catch (...) {
            errors.push_back(key + ": expected an unsigned integer, got '" + v + "'");
            return false;
        }
    }
    bool parse_list(const std::string& key, const std::string& v,
                    std::vector<double>& out) {
        std::vector<double> tmp;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            double x;
            if (!parse_double(key, item, x)) return false;
            tmp.push_back(x);
        }
        if (tmp.empty()) {
            errors.push_back(key + ": empty list");
            return false;
        }
        out = tmp;
        return true;
    }
};

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
    return serialize_config(*this) == serialize_config(other);
}

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    Parser p;
    bool kstar_given = false;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            p.errors.push_back("line " + std::to_string(lineno) +
                               ": expected key = value, got '" + t + "'");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        long li;
        std::uint64_t u;
        if (key == "d") {
            if (p.parse_int(key, val, li)) c.params.d = static_cast<int>(li);
        } else if (key == "e") {
            p.parse_double(key, val, c.params.e);
        } else if (key == "sigma") {
            p.parse_double(key, val, c.params.sigma);
        } else if (key == "pot_C") {
            p.parse_double(key, val, c.params.pot_C);
        } else if (key == "alpha") {
            p.parse_double(key, val, c.params.pot_alpha);
        } else if (key == "T") {
            p.parse_double(key, val, c.T);
        } else if (key == "dt") {
            p.parse_double(key, val, c.dt);
        } else if (key == "zeta") {
            p.parse_double(key, val, c.test.zeta);
        } else if (key == "Tstar") {
            p.parse_double(key, val, c.test.Tstar);
        } else if (key == "kstar") {
            kstar_given = p.parse_double(key, val, c.test.kstar);
        } else if (key == "steps") {
            if (p.parse_int(key, val, li)) c.mcmc.sweeps = li;
        } else if (key == "burnin") {
            if (p.parse_int(key, val, li)) c.mcmc.burnin = li;
        } else if (key == "chains") {
            if (p.parse_int(key, val, li)) c.mcmc.chains = static_cast<int>(li);
        } else if (key == "thin") {
            if (p.parse_int(key, val, li)) c.mcmc.thin = li;
        } else if (key == "seed") {
            if (p.parse_u64(key, val, u)) c.mcmc.seed = u;
        } else if (key == "T_list") {
            p.parse_list(key, val, c.T_list);
        } else if (key == "n_bins") {
            if (p.parse_int(key, val, li)) c.n_bins = static_cast<int>(li);
        } else if (key == "cap_multiplier") {
            p.parse_double(key, val, c.cap_multiplier);
        } else if (key == "gamma_list") {
            p.parse_list(key, val, c.gamma_list);
        } else if (key == "lags") {
            p.parse_list(key, val, c.lags);
        } else if (key == "out") {
            c.out_dir = val;
        } else if (key == "acc_decay_factor") {
            p.parse_double(key, val, c.acc_decay_factor);
        } else if (key == "acc_nsigma") {
            p.parse_double(key, val, c.acc_nsigma);
        } else {
            p.errors.push_back("unknown key '" + key + "'");
        }
    }
    // the probe support scales with the charge width unless set explicitly
    if (!kstar_given && c.params.sigma > 0.0) c.test.kstar = 0.5 / c.params.sigma;
    // invariant validation, collecting every violation
    if (c.params.d < 3 || c.params.d > 5)
        p.errors.push_back("d: unsupported dimension " + std::to_string(c.params.d) +
                           " (supported: 3, 4, 5)");
    if (!(c.params.e >= 0.0)) p.errors.push_back("e: must be >= 0");
    if (!(c.params.sigma > 0.0)) p.errors.push_back("sigma: must be > 0");
    if (!(c.params.pot_C > 0.0)) p.errors.push_back("pot_C: must be > 0");
    if (!(c.params.pot_alpha > 0.0)) p.errors.push_back("alpha: must be > 0");
    if (!(c.dt > 0.0)) p.errors.push_back("dt: must be > 0");
    if (!(c.T > 0.0)) p.errors.push_back("T: must be > 0");
    else {
        double m = 2.0 * c.T / c.dt;
        if (std::abs(m - std::lround(m)) > 1e-9 * std::max(1.0, m))
            p.errors.push_back("dt: 2T/dt must be an integer");
    }
    if (!(c.test.zeta > 0.0 && c.test.zeta < 1.0))
        p.errors.push_back("zeta: must lie in (0,1)");
    if (!(std::log(c.test.Tstar) > 1.0))
        p.errors.push_back("Tstar: ln(Tstar) must exceed 1");
    if (!(c.test.kstar > 0.0)) p.errors.push_back("kstar: must be > 0");
    if (c.mcmc.sweeps < 1) p.errors.push_back("steps: must be >= 1");
    if (c.mcmc.burnin < 0) p.errors.push_back("burnin: must be >= 0");
    if (c.mcmc.chains < 1) p.errors.push_back("chains: must be >= 1");
    if (c.mcmc.thin < 1) p.errors.push_back("thin: must be >= 1");
    if (c.n_bins < 2) p.errors.push_back("n_bins: must be >= 2");
    for (size_t i = 1; i < c.T_list.size(); ++i)
        if (c.T_list[i] <= c.T_list[i - 1]) {
            p.errors.push_back("T_list: must be strictly increasing");
            break;
        }
    if (!p.errors.empty()) {
        std::string msg = "config errors:";
        for (const auto& e : p.errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::string s;
    auto kv = [&](const std::string& k, const std::string& v) {
        s += k + " = " + v + "\n";
    };
    kv("d", std::to_string(c.params.d));
    kv("e", io::fmt_full(c.params.e));
    kv("sigma", io::fmt_full(c.params.sigma));
    kv("pot_C", io::fmt_full(c.params.pot_C));
    kv("alpha", io::fmt_full(c.params.pot_alpha));
    kv("T", io::fmt_full(c.T));
    kv("dt", io::fmt_full(c.dt));
    kv("zeta", io::fmt_full(c.test.zeta));
    kv("Tstar", io::fmt_full(c.test.Tstar));
    kv("kstar", io::fmt_full(c.test.kstar));
    kv("steps", std::to_string(c.mcmc.sweeps));
    kv("burnin", std::to_string(c.mcmc.burnin));
    kv("chains", std::to_string(c.mcmc.chains));
    kv("thin", std::to_string(c.mcmc.thin));
    kv("seed", std::to_string(c.mcmc.seed));
    kv("T_list", join_list(c.T_list));
    kv("n_bins", std::to_string(c.n_bins));
    kv("cap_multiplier", io::fmt_full(c.cap_multiplier));
    kv("gamma_list", join_list(c.gamma_list));
    kv("lags", join_list(c.lags));
    kv("out", c.out_dir);
    kv("acc_decay_factor", io::fmt_full(c.acc_decay_factor));
    kv("acc_nsigma", io::fmt_full(c.acc_nsigma));
    return s;
}

std::uint64_t config_hash(const RunConfig& c) {
    // out dir does not change the science; hash everything else
    RunConfig copy = c;
    copy.out_dir = "";
    return io::fnv1a(serialize_config(copy));
}

}  // namespace nirsim
