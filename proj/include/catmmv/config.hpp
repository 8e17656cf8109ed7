#pragma once

#include <string>

#include <json.hpp>

#include "catmmv/model.hpp"

namespace catmmv {

// JSON parameter schema, field names exactly:
//   market.{mu0,sigma0,r}, loadings.{kappa,kappa_r,iota,iota_r},
//   catastrophe.{rho,delta,k}, claims.ordinary.{dist,rate},
//   claims.catastrophe.{dist,rate}, theta, horizon.{T,s}, initial.{x0,lambda0,y0}.
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& p);

ModelParams load_params_file(const std::string& path);

}  // namespace catmmv
