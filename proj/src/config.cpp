#include "chernlab/config.hpp"

#include "chernlab/snapshot.hpp"

#include <fstream>
#include <sstream>

namespace chernlab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("ConfigError", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail("ConfigError", "line " + std::to_string(lineno) + ": empty key");
        c.kv_[key] = val;
    }
    return c;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("ConfigError", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

std::string Config::str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) fail("ConfigError", "missing key '" + key + "'");
    return it->second;
}

std::string Config::str_or(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

double Config::num(const std::string& key) const {
    const std::string s = str(key);
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail("ConfigError", "key '" + key + "' is not a number: '" + s + "'");
    }
}

double Config::num_or(const std::string& key, double def) const {
    return has(key) ? num(key) : def;
}

long Config::integer_or(const std::string& key, long def) const {
    return has(key) ? static_cast<long>(num(key)) : def;
}

std::vector<double> Config::list(const std::string& key) const {
    const std::string s = str(key);
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            fail("ConfigError", "key '" + key + "': bad list entry '" + tok + "'");
        }
    }
    if (out.empty()) fail("ConfigError", "key '" + key + "': empty list");
    return out;
}

std::vector<double> Config::list_or(const std::string& key, std::vector<double> def) const {
    return has(key) ? list(key) : def;
}

MapState make_initial_map(const Config& cfg, std::shared_ptr<const Domain> dom,
                          std::shared_ptr<const HermitianTarget> tgt, uint64_t seed) {
    const std::string kind = cfg.str_or("map.kind", "constant");
    if (kind == "constant") {
        const cd z1(cfg.num_or("map.z1_re", tgt->id() == TargetId::Hopf ? 1.2 : 0.1),
                    cfg.num_or("map.z1_im", 0.0));
        const cd z2(cfg.num_or("map.z2_re", tgt->id() == TargetId::Hopf ? 0.4 : -0.2),
                    cfg.num_or("map.z2_im", 0.0));
        return MapState::sample(dom, tgt, [=](int, cd) { return TargetPoint{z1, z2, 0}; });
    }
    if (kind == "holomorphic_poly") {
        // f(x) = (a x^p + c1, b x^q + c2)
        const double a = cfg.num_or("map.a", 1.0), b = cfg.num_or("map.b", 0.0);
        const int p = static_cast<int>(cfg.num_or("map.p", 2));
        const int q = static_cast<int>(cfg.num_or("map.q", 1));
        const cd c1(cfg.num_or("map.c1_re", 0.0), cfg.num_or("map.c1_im", 0.0));
        const cd c2(cfg.num_or("map.c2_re", 0.0), cfg.num_or("map.c2_im", 0.0));
        return MapState::sample(dom, tgt, [=](int, cd x) {
            return TargetPoint{a * std::pow(x, p) + c1, b * std::pow(x, q) + c2, 0};
        });
    }
    if (kind == "hopf_exp") {
        // holomorphic into the Hopf chart, image kept inside a shell
        const double r0 = cfg.num_or("map.r0", 1.3);
        const cd alpha(cfg.num_or("map.alpha_re", 0.4), cfg.num_or("map.alpha_im", 0.2));
        const cd beta(cfg.num_or("map.beta_re", -0.3), cfg.num_or("map.beta_im", 0.5));
        return MapState::sample(dom, tgt, [=](int, cd x) {
            return TargetPoint{r0 * std::exp(alpha * x), 0.35 * std::exp(beta * x), 0};
        });
    }
    if (kind == "trig_random") {
        return random_trig_map(dom, tgt, seed, cfg.num_or("map.amplitude", 0.25));
    }
    if (kind == "snapshot") {
        return load_snapshot(cfg.str("map.path"), tgt);
    }
    fail("ConfigError", "unknown map.kind '" + kind + "'");
}

Experiment build_experiment(const Config& cfg) {
    Experiment ex;
    const std::string dk = cfg.str("domain.kind");
    const int n = static_cast<int>(cfg.num("domain.n"));
    const std::string scheme_s = cfg.str_or("domain.scheme", "spectral");
    const DiffScheme scheme =
        scheme_s == "stencil4" ? DiffScheme::Stencil4 : DiffScheme::Spectral;
    if (dk == "torus") {
        ex.domain = std::make_shared<Domain>(
            Domain::torus(n, cfg.num_or("domain.size", 1.0), scheme));
    } else if (dk == "disk") {
        const std::string lam = cfg.str_or("domain.lambda", "flat");
        LambdaKind lk = LambdaKind::Flat;
        if (lam == "sphere") lk = LambdaKind::Sphere;
        else if (lam == "hyperbolic") lk = LambdaKind::Hyperbolic;
        else if (lam != "flat") fail("ConfigError", "unknown domain.lambda '" + lam + "'");
        ex.domain = std::make_shared<Domain>(Domain::disk(n, cfg.num_or("domain.size", 0.7), lk));
    } else if (dk == "sphere") {
        ex.domain = std::make_shared<Domain>(Domain::sphere_pair(n));
    } else {
        fail("ConfigError", "unknown domain.kind '" + dk + "'");
    }
    ex.target = std::make_shared<HermitianTarget>(target_from_string(cfg.str("target.id")),
                                                  cfg.num_or("target.self_test", 0.0) != 0.0);
    ex.seed = static_cast<uint64_t>(cfg.integer_or("seed", 1));
    ex.initial = make_initial_map(cfg, ex.domain, ex.target, ex.seed);

    ex.flow.dt = cfg.num_or("flow.dt", 0.0);
    ex.flow.tol = cfg.num_or("flow.tol", 1e-8);
    ex.flow.max_steps = static_cast<int>(cfg.integer_or("flow.max_steps", 4000));
    ex.flow.cfl_safety = cfg.num_or("flow.cfl_safety", 0.5);
    const std::string fs = cfg.str_or("flow.scheme", "semi_implicit");
    if (fs == "explicit") ex.flow.scheme = FlowScheme::Explicit;
    else if (fs == "semi_implicit") ex.flow.scheme = FlowScheme::SemiImplicit;
    else fail("ConfigError", "unknown flow.scheme '" + fs + "'");

    ex.bubble.k_values = cfg.list_or("bubble.k_values", {8, 16, 32, 64});
    ex.bubble.epsilon1 = cfg.num_or("bubble.epsilon1", 8.0);
    ex.bubble.c0 = cfg.num_or("bubble.c0", 0.0);
    ex.bubble.radii_ladder = cfg.list_or("bubble.radii_ladder", {});
    ex.bubble.window_radius = cfg.num_or("bubble.window_radius", 0.95);
    ex.bubble.neck_rho0 = cfg.num_or("bubble.neck_rho0", 0.8);
    ex.bubble.fill_radius = cfg.num_or("bubble.fill_radius", 0.12);

    ex.out_dir = cfg.str_or("output.dir", "out");
    return ex;
}

}  // namespace chernlab
