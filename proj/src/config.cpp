#include "catmmv/config.hpp"

#include <fstream>

#include "catmmv/errors.hpp"

namespace catmmv {

namespace {

double need(const nlohmann::json& j, const std::string& section, const char* field) {
    if (!j.contains(field) || !j[field].is_number()) {
        throw ValidationError(section + "." + field, "missing or not a number");
    }
    return j[field].get<double>();
}

ClaimDistribution claim_from_json(const nlohmann::json& j, const std::string& section) {
    if (!j.contains("dist") || !j["dist"].is_string()) {
        throw ValidationError(section + ".dist", "missing");
    }
    const std::string dist = j["dist"].get<std::string>();
    if (dist != "exponential") {
        throw ValidationError(section + ".dist", "only 'exponential' supported in config");
    }
    return ClaimDistribution::exponential(need(j, section, "rate"));
}

}  // namespace

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams p;
    const auto& market = j.at("market");
    p.market.mu0 = need(market, "market", "mu0");
    p.market.sigma0 = need(market, "market", "sigma0");
    p.market.r = need(market, "market", "r");
    const auto& loadings = j.at("loadings");
    p.loadings.kappa = need(loadings, "loadings", "kappa");
    p.loadings.kappa_r = need(loadings, "loadings", "kappa_r");
    p.loadings.iota = need(loadings, "loadings", "iota");
    p.loadings.iota_r = need(loadings, "loadings", "iota_r");
    const auto& cat = j.at("catastrophe");
    p.cat.rho = need(cat, "catastrophe", "rho");
    p.cat.delta = need(cat, "catastrophe", "delta");
    p.cat.k = need(cat, "catastrophe", "k");
    const auto& claims = j.at("claims");
    p.claims_ordinary = claim_from_json(claims.at("ordinary"), "claims.ordinary");
    p.claims_catastrophe = claim_from_json(claims.at("catastrophe"), "claims.catastrophe");
    if (!j.contains("theta")) throw ValidationError("theta", "missing");
    p.theta = j.at("theta").get<double>();
    const auto& horizon = j.at("horizon");
    p.T = need(horizon, "horizon", "T");
    p.s = horizon.contains("s") ? need(horizon, "horizon", "s") : 0.0;
    const auto& initial = j.at("initial");
    p.x0 = need(initial, "initial", "x0");
    p.lambda0 = need(initial, "initial", "lambda0");
    p.y0 = initial.contains("y0") ? need(initial, "initial", "y0") : 1.0;
    return p;
}

nlohmann::json params_to_json(const ModelParams& p) {
    nlohmann::json j;
    j["market"] = {{"mu0", p.market.mu0}, {"sigma0", p.market.sigma0}, {"r", p.market.r}};
    j["loadings"] = {{"kappa", p.loadings.kappa},
                     {"kappa_r", p.loadings.kappa_r},
                     {"iota", p.loadings.iota},
                     {"iota_r", p.loadings.iota_r}};
    j["catastrophe"] = {{"rho", p.cat.rho}, {"delta", p.cat.delta}, {"k", p.cat.k}};
    j["claims"] = {{"ordinary", {{"dist", "exponential"}, {"rate", p.claims_ordinary.rate()}}},
                   {"catastrophe",
                    {{"dist", "exponential"}, {"rate", p.claims_catastrophe.rate()}}}};
    j["theta"] = p.theta;
    j["horizon"] = {{"T", p.T}, {"s", p.s}};
    j["initial"] = {{"x0", p.x0}, {"lambda0", p.lambda0}, {"y0", p.y0}};
    return j;
}

ModelParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("config", std::string("json parse error: ") + e.what());
    }
    try {
        return params_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config", std::string("schema error: ") + e.what());
    }
}

}  // namespace catmmv
