#include "csbp/config.hpp"

#include <fstream>
#include <stdexcept>

namespace csbp {

namespace {

using nlohmann::json;

double need_number(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key))
        throw std::runtime_error(std::string("config: missing '") + key + "' in " + ctx);
    if (!j.at(key).is_number())
        throw std::runtime_error(std::string("config: '") + key + "' in " + ctx +
                                 " must be a number");
    return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

ComponentPtr parse_component(const json& j) {
    const std::string family = j.value("family", "");
    if (family == "power" || family == "uniform") {
        const double expo = family == "uniform" ? 0.0 : need_number(j, "exponent", "component");
        return make_power_component(need_number(j, "rate", "component"), expo,
                                    need_number(j, "lo", "component"),
                                    need_number(j, "hi", "component"));
    }
    if (family == "beta")
        return make_beta_component(need_number(j, "rate", "component"),
                                   need_number(j, "alpha", "component"),
                                   need_number(j, "beta", "component"));
    if (family == "pareto")
        return make_pareto_component(need_number(j, "rate", "component"),
                                     need_number(j, "alpha", "component"),
                                     need_number(j, "m0", "component"));
    if (family == "singular")
        return make_singular_component(need_number(j, "c", "component"),
                                       need_number(j, "gamma", "component"),
                                       need_number(j, "lo", "component"),
                                       need_number(j, "hi", "component"));
    throw std::runtime_error("config: unknown component family '" + family + "'");
}

EnvironmentSpec parse_environment(const json& j) {
    std::vector<Atom> atoms;
    if (j.contains("atoms"))
        for (const json& a : j.at("atoms"))
            atoms.push_back({need_number(a, "m", "atom"), need_number(a, "rate", "atom")});
    std::vector<ComponentPtr> comps;
    if (j.contains("components"))
        for (const json& c : j.at("components")) comps.push_back(parse_component(c));
    return EnvironmentSpec(number_or(j, "drift", 0.0), std::move(atoms), std::move(comps));
}

StableMechanism parse_stable(const json& j) {
    StableMechanism m;
    m.g = need_number(j, "g", "mechanism");
    m.c_plus = need_number(j, "c_plus", "mechanism");
    m.beta = number_or(j, "beta", 1.0);
    if (!(m.beta > 0.0 && m.beta <= 1.0))
        throw std::runtime_error("config: mechanism beta must lie in (0,1]");
    if (!(m.c_plus > 0.0)) throw std::runtime_error("config: mechanism c_plus must be > 0");
    return m;
}

GeneralMechanism parse_general(const json& j) {
    std::vector<MuAtom> atoms;
    if (j.contains("mu_atoms"))
        for (const json& a : j.at("mu_atoms"))
            atoms.push_back({need_number(a, "z", "mu atom"), need_number(a, "rate", "mu atom")});
    std::optional<MuDensity> density;
    if (j.contains("mu_density")) {
        const json& d = j.at("mu_density");
        MuDensity md;
        const std::string family = d.value("family", "exponential");
        if (family == "exponential") {
            md.family = MuDensity::Family::exponential;
            md.p1 = need_number(d, "theta", "mu density");
        } else if (family == "uniform") {
            md.family = MuDensity::Family::uniform;
            md.p1 = need_number(d, "lo", "mu density");
            md.p2 = need_number(d, "hi", "mu density");
        } else {
            throw std::runtime_error("config: unknown mu density family '" + family + "'");
        }
        md.mass = need_number(d, "mass", "mu density");
        density = md;
    }
    return GeneralMechanism(need_number(j, "g", "mechanism"), need_number(j, "sigma2", "mechanism"),
                            std::move(atoms), std::move(density));
}

CellModel parse_cell(const json& j) {
    CellModel m;
    m.g = need_number(j, "g", "cell model");
    m.sigma2 = need_number(j, "sigma2", "cell model");
    m.r = need_number(j, "r", "cell model");
    const json& th = j.at("theta");
    const std::string kind = th.value("kind", "two_point");
    if (kind == "two_point") {
        m.theta.kind = ThetaLaw::Kind::two_point;
        m.theta.theta = need_number(th, "theta", "theta law");
    } else if (kind == "beta") {
        m.theta.kind = ThetaLaw::Kind::beta;
        m.theta.alpha = need_number(th, "alpha", "theta law");
        m.theta.beta_param = need_number(th, "beta", "theta law");
    } else {
        throw std::runtime_error("config: unknown theta law '" + kind + "'");
    }
    return m;
}

} // namespace

double ModelConfig::growth() const {
    if (stable) return stable->g;
    if (general) return general->g();
    if (cell) return cell->g;
    throw std::runtime_error("config: no mechanism to take a growth rate from");
}

double ModelConfig::beta() const {
    if (stable) return stable->beta;
    return 1.0;
}

EnvironmentSpec ModelConfig::environment_for_mechanism() const {
    if (!environment) throw std::runtime_error("config: no environment block");
    return environment->with_drift(growth());
}

ModelConfig parse_model(const json& doc) {
    ModelConfig cfg;
    cfg.raw = doc;
    cfg.x0 = number_or(doc, "x0", 1.0);
    if (!(cfg.x0 > 0.0)) throw std::runtime_error("config: x0 must be > 0");
    if (doc.contains("mechanism")) {
        const json& m = doc.at("mechanism");
        const std::string kind = m.value("kind", "stable");
        if (kind == "stable")
            cfg.stable = parse_stable(m);
        else if (kind == "general")
            cfg.general = parse_general(m);
        else
            throw std::runtime_error("config: unknown mechanism kind '" + kind + "'");
    }
    if (doc.contains("environment")) cfg.environment = parse_environment(doc.at("environment"));
    if (doc.contains("cell_model")) {
        cfg.cell = parse_cell(doc.at("cell_model"));
        if (!cfg.has_mechanism() && !cfg.environment) {
            const auto [env, mech] = to_environment(*cfg.cell);
            cfg.environment = env;
            cfg.stable = mech;
        }
    }
    if (!cfg.has_mechanism() && !cfg.environment && !cfg.cell)
        throw std::runtime_error("config: document describes neither a model nor an environment");
    return cfg;
}

ModelConfig load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("config: failed to parse '" + path + "': " + e.what());
    }
    return parse_model(doc);
}

} // namespace csbp
