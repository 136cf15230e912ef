#include "wzw/config.hpp"

#include "wzw/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wzw {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& v, int line) {
    size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw config_error("expected a number, got '" + v + "'", line);
    }
    if (pos != v.size()) throw config_error("trailing characters in number '" + v + "'", line);
    return x;
}

uint64_t to_u64(const std::string& v, int line) {
    size_t pos = 0;
    unsigned long long x;
    // stoull wraps negative input around instead of failing
    if (!v.empty() && v[0] == '-')
        throw config_error("expected a nonnegative integer, got '" + v + "'", line);
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw config_error("expected a nonnegative integer, got '" + v + "'", line);
    }
    if (pos != v.size())
        throw config_error("trailing characters in integer '" + v + "'", line);
    return x;
}

int to_int(const std::string& v, int line) {
    const uint64_t x = to_u64(v, line);
    if (x > 1000000000ull) throw config_error("integer out of range: '" + v + "'", line);
    return static_cast<int>(x);
}

bool to_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("expected a boolean, got '" + v + "'", line);
}

std::vector<double> to_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), line));
    if (out.empty()) throw config_error("empty list", line);
    return out;
}

std::vector<int> to_int_list(const std::string& v, int line) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(trim(item), line));
    if (out.empty()) throw config_error("empty list", line);
    return out;
}

} // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    using Setter = std::function<void(const std::string&, int)>;
    const std::map<std::string, std::map<std::string, Setter>> schema{
        {"experiment",
         {
             {"kind", [&](const std::string& v, int) { cfg.kind = v; }},
             {"dim", [&](const std::string& v, int l) { cfg.dim = to_int(v, l); }},
             {"drift", [&](const std::string& v, int) { cfg.drift = v; }},
             {"sigma", [&](const std::string& v, int) { cfg.sigma = v; }},
             {"sigma_value",
              [&](const std::string& v, int l) { cfg.sigma_value = to_list(v, l); }},
             {"sigma_slope",
              [&](const std::string& v, int l) { cfg.sigma_slope = to_double(v, l); }},
             {"beta", [&](const std::string& v, int l) { cfg.beta = to_list(v, l); }},
             {"coupling",
              [&](const std::string& v, int l) { cfg.coupling = to_list(v, l); }},
             {"init", [&](const std::string& v, int l) { cfg.init = to_list(v, l); }},
             {"horizon",
              [&](const std::string& v, int l) { cfg.horizon = to_double(v, l); }},
             {"partitions",
              [&](const std::string& v, int l) { cfg.partitions = to_int_list(v, l); }},
             {"paths", [&](const std::string& v, int l) { cfg.paths = to_u64(v, l); }},
             {"fine_steps",
              [&](const std::string& v, int l) { cfg.fine_steps = to_u64(v, l); }},
             {"probe_times",
              [&](const std::string& v, int l) { cfg.probe_times = to_list(v, l); }},
             {"p_norm", [&](const std::string& v, int l) { cfg.p_norm = to_double(v, l); }},
             {"seed", [&](const std::string& v, int l) { cfg.seed = to_u64(v, l); }},
             {"ref_scheme", [&](const std::string& v, int) { cfg.ref_scheme = v; }},
         }},
        {"solver",
         {
             {"quad_nodes",
              [&](const std::string& v, int l) { cfg.solver.quad_nodes = to_int(v, l); }},
             {"picard_max",
              [&](const std::string& v, int l) { cfg.solver.picard_max = to_int(v, l); }},
             {"picard_tol",
              [&](const std::string& v, int l) { cfg.solver.picard_tol = to_double(v, l); }},
             {"fd_step",
              [&](const std::string& v, int l) { cfg.solver.fd_step = to_double(v, l); }},
             {"s_nodes",
              [&](const std::string& v, int l) { cfg.solver.s_nodes = to_int(v, l); }},
             {"shift_nodes",
              [&](const std::string& v, int l) { cfg.solver.shift_nodes = to_int(v, l); }},
             {"backend", [&](const std::string& v, int) { cfg.solver.backend = v; }},
         }},
        {"output",
         {
             {"dir", [&](const std::string& v, int) { cfg.out_dir = v; }},
             {"svg", [&](const std::string& v, int l) { cfg.svg = to_bool(v, l); }},
         }},
    };

    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw config_error("unterminated section header", lineno);
            section = trim(s.substr(1, s.size() - 2));
            if (!schema.count(section))
                throw config_error("unknown section [" + section + "]", lineno);
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key = value, got '" + s + "'", lineno);
        if (section.empty()) throw config_error("key outside any section", lineno);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto& keys = schema.at(section);
        const auto it = keys.find(key);
        if (it == keys.end())
            throw config_error("unknown key '" + key + "' in [" + section + "]", lineno);
        it->second(value, lineno);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

void validate_config(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw config_error(msg); };
    const std::vector<std::string> kinds{"validate", "converge", "fokker-planck", "simulate"};
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
        fail("unknown experiment kind '" + cfg.kind + "'");
    if (cfg.dim < 1 || cfg.dim > 8) fail("dim must be between 1 and 8");
    if (!(cfg.horizon > 0.0)) fail("horizon must be positive");
    const size_t d = static_cast<size_t>(cfg.dim);
    if (cfg.init.size() != d && cfg.init.size() != 1)
        fail("init must have dim entries (or one to broadcast)");
    if (cfg.sigma_value.size() != d && cfg.sigma_value.size() != 1)
        fail("sigma_value must have dim entries (or one to broadcast)");
    if (cfg.drift == "tanh_coupled" && cfg.coupling.size() != d * d)
        fail("coupling must have dim*dim entries");
    if (cfg.partitions.empty()) fail("partitions must not be empty");
    for (int n : cfg.partitions) {
        if (n < 1) fail("partition counts must be positive");
        if (cfg.fine_steps % static_cast<uint64_t>(n) != 0)
            fail("fine_steps must be divisible by every partition count");
    }
    if (cfg.fine_steps < 2) fail("fine_steps must be at least 2");
    if (cfg.paths < 2) fail("paths must be at least 2");
    if (cfg.kind == "converge") {
        // only the convergence study reads the probes, and it compares the
        // approximant against the reference sampled on the fine grid
        if (cfg.probe_times.empty()) fail("converge needs at least one probe time");
        for (double t : cfg.probe_times) {
            if (t <= 0.0 || t > cfg.horizon) fail("probe times must lie in (0, horizon]");
            const double steps = t / cfg.horizon * static_cast<double>(cfg.fine_steps);
            if (std::abs(steps - std::round(steps)) > 1e-6)
                fail("probe times must lie on the fine grid");
        }
    }
    if (cfg.p_norm < 1.0) fail("p_norm must be at least 1");
    if (cfg.ref_scheme != "euler" && cfg.ref_scheme != "exact-gbm")
        fail("unknown ref_scheme '" + cfg.ref_scheme + "'");
    if (cfg.ref_scheme == "exact-gbm" && cfg.drift != "zero")
        fail("ref_scheme exact-gbm requires zero drift");
    if (cfg.solver.backend != "collocation" && cfg.solver.backend != "fan")
        fail("unknown solver backend '" + cfg.solver.backend + "'");
    if (cfg.solver.quad_nodes < 1 || cfg.solver.quad_nodes > 64)
        fail("quad_nodes must be between 1 and 64");
    if (cfg.solver.picard_max < 1) fail("picard_max must be positive");
    if (!(cfg.solver.picard_tol > 0.0)) fail("picard_tol must be positive");
    if (cfg.threads < 1) fail("threads must be positive");
}

} // namespace wzw
