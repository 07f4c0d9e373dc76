#pragma once

// JSON shapes shared by the session documents, the HTTP service and the CLI.
// Field names are fixed; see docs/api.md.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "elicit/errors.hpp"
#include "elicit/feedback.hpp"
#include "elicit/fitting/location.hpp"
#include "elicit/fitting/variance.hpp"
#include "elicit/transforms.hpp"

namespace elicit::json {

using Json = nlohmann::json;

// ---- reading with located errors

inline std::string child_pointer(const std::string& parent, const std::string& key) { return parent + "/" + key; }

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ParseError("expected an object", where.empty() ? "/" : where);
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + key + "'", child_pointer(where, key));
  return *it;
}

inline bool has(const Json& j, const std::string& key) { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError("expected a number", where.empty() ? "/" : where);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError("number must be finite", where);
  return v;
}

inline double number(const Json& j, const std::string& key, const std::string& where) {
  return number(field(j, key, where), child_pointer(where, key));
}

inline std::string text(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw ParseError("expected a string", child_pointer(where, key));
  return v.get<std::string>();
}

inline std::uint64_t unsigned_integer(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ParseError("expected a non-negative integer", child_pointer(where, key));
  }
  return v.get<std::uint64_t>();
}

inline int integer(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) throw ParseError("expected an integer", child_pointer(where, key));
  return v.get<int>();
}

inline std::vector<double> numbers(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  const std::string at = child_pointer(where, key);
  if (!v.is_array()) throw ParseError("expected an array", at);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at + "/" + std::to_string(i)));
  return out;
}

// ---- judgements

inline Json to_json(const QuantileJudgement& q) { return {{"alpha", q.alpha}, {"value", q.value}}; }

inline QuantileJudgement quantile_from_json(const Json& j, const std::string& where) {
  return {number(j, "alpha", where), number(j, "value", where)};
}

inline Json to_json(const std::vector<QuantileJudgement>& qs) {
  Json out = Json::array();
  for (const auto& q : qs) out.push_back(to_json(q));
  return out;
}

inline std::vector<QuantileJudgement> quantiles_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("expected an array of quantile judgements", where);
  std::vector<QuantileJudgement> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(quantile_from_json(j[i], where + "/" + std::to_string(i)));
  return out;
}

inline Json to_json(const VarianceQuantiles& v) {
  return {{"lower_alpha", v.lower_alpha}, {"lower", v.lower}, {"upper_alpha", v.upper_alpha}, {"upper", v.upper}};
}

inline VarianceQuantiles variance_quantiles_from_json(const Json& j, const std::string& where) {
  return {number(j, "lower_alpha", where), number(j, "lower", where), number(j, "upper_alpha", where),
          number(j, "upper", where)};
}

// ---- priors

inline Json to_json(const LocationPrior& p) {
  Json params;
  if (const auto* n = std::get_if<NormalParams>(&p.dist)) {
    params = {{"mean", n->mean}, {"variance", n->variance}};
  } else if (const auto* l = std::get_if<LogNormalParams>(&p.dist)) {
    params = {{"meanlog", l->meanlog}, {"sdlog", l->sdlog}};
  } else if (const auto* b = std::get_if<BetaParams>(&p.dist)) {
    params = {{"alpha", b->alpha}, {"beta", b->beta}, {"lower", b->lower}, {"upper", b->upper}};
  }
  return {{"family", std::string(to_string(p.family()))},
          {"params", params},
          {"fitted_from", to_json(p.fitted_from)},
          {"residual", p.residual}};
}

inline LocationPrior location_prior_from_json(const Json& j, const std::string& where) {
  LocationPrior p;
  const std::string family = text(j, "family", where);
  const Json& params = field(j, "params", where);
  const std::string at = child_pointer(where, "params");
  if (family == "normal") {
    p.dist = NormalParams{number(params, "mean", at), number(params, "variance", at)};
  } else if (family == "lognormal") {
    p.dist = LogNormalParams{number(params, "meanlog", at), number(params, "sdlog", at)};
  } else if (family == "beta") {
    p.dist = BetaParams{number(params, "alpha", at), number(params, "beta", at), number(params, "lower", at),
                        number(params, "upper", at)};
  } else {
    throw ParseError("unknown location family '" + family + "'", child_pointer(where, "family"));
  }
  p.fitted_from = quantiles_from_json(field(j, "fitted_from", where), child_pointer(where, "fitted_from"));
  p.residual = number(j, "residual", where);
  return p;
}

inline Json variance_params_json(const VariancePrior& v) {
  switch (v.family) {
    case PrecisionFamily::inverse_gamma: return {{"shape", v.p1}, {"scale", v.p2}};
    case PrecisionFamily::gamma_precision: return {{"shape", v.p1}, {"rate", v.p2}};
    case PrecisionFamily::lognormal_precision: return {{"meanlog", v.p1}, {"sdlog", v.p2}};
  }
  return Json::object();
}

inline Json to_json(const VariancePrior& v) {
  return {{"family", std::string(to_string(v.family))},
          {"params", variance_params_json(v)},
          {"target", to_json(v.target)},
          {"residual", v.residual}};
}

inline VariancePrior variance_prior_from_json(const Json& j, const std::string& where) {
  VariancePrior v;
  const std::string family = text(j, "family", where);
  const Json& params = field(j, "params", where);
  const std::string at = child_pointer(where, "params");
  if (family == "inverse-gamma") {
    v.family = PrecisionFamily::inverse_gamma;
    v.p1 = number(params, "shape", at);
    v.p2 = number(params, "scale", at);
  } else if (family == "gamma-precision") {
    v.family = PrecisionFamily::gamma_precision;
    v.p1 = number(params, "shape", at);
    v.p2 = number(params, "rate", at);
  } else if (family == "lognormal-precision") {
    v.family = PrecisionFamily::lognormal_precision;
    v.p1 = number(params, "meanlog", at);
    v.p2 = number(params, "sdlog", at);
  } else {
    throw ParseError("unknown variance family '" + family + "'", child_pointer(where, "family"));
  }
  v.target = variance_quantiles_from_json(field(j, "target", where), child_pointer(where, "target"));
  v.residual = number(j, "residual", where);
  return v;
}

// ---- feedback

inline Json to_json(const FeedbackConfig& c) {
  return {{"K", c.draws},
          {"J", c.grid_size},
          {"seed", c.seed},
          {"band_level", c.band_level},
          {"quantile_interval_level", c.quantile_interval_level},
          {"quantiles", c.quantiles}};
}

// Applies the fields present in j on top of base.
inline FeedbackConfig feedback_config_from_json(const Json& j, FeedbackConfig base, const std::string& where) {
  if (!j.is_object()) throw ParseError("expected an object", where.empty() ? "/" : where);
  if (has(j, "K")) base.draws = integer(j, "K", where);
  if (has(j, "J")) base.grid_size = integer(j, "J", where);
  if (has(j, "seed")) base.seed = unsigned_integer(j, "seed", where);
  if (has(j, "band_level")) base.band_level = number(j, "band_level", where);
  if (has(j, "quantile_interval_level")) base.quantile_interval_level = number(j, "quantile_interval_level", where);
  if (has(j, "quantiles")) base.quantiles = numbers(j, "quantiles", where);
  return base;
}

inline Json to_json(const QuantileInterval& q) { return {{"alpha", q.alpha}, {"lower", q.lower}, {"upper", q.upper}}; }

inline Json to_json(const DensityCurve& c) {
  return {{"label", c.label}, {"mean", c.mean}, {"variance", c.variance}, {"grid", c.grid}, {"density", c.density}};
}

inline Json to_json(const FeedbackBundle& b) {
  Json intervals = Json::array();
  for (const auto& q : b.quantile_intervals) intervals.push_back(to_json(q));
  Json overlays = Json::array();
  for (const auto& c : b.overlay_curves) overlays.push_back(to_json(c));
  return {{"config", to_json(b.config)},   {"grid", b.grid},
          {"cdf_lower", b.cdf_lower},      {"cdf_median", b.cdf_median},
          {"cdf_upper", b.cdf_upper},      {"quantile_intervals", intervals},
          {"overlay_curves", overlays}};
}

inline Json to_json(const ProportionShading& s) {
  return {{"curve", to_json(s.curve)},
          {"interval", {s.interval_lower, s.interval_upper}},
          {"mass", s.mass}};
}

// ---- payloads shared by the service and the CLI

inline Json error_json(const Error& e) {
  Json body = {{"code", e.code()}, {"message", e.what()}};
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) body["location"] = p->location();
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) body["invariant"] = v->invariant();
  if (const auto* f = dynamic_cast<const FitFailure*>(&e)) {
    body["best_params"] = {f->best_params().first, f->best_params().second};
    body["residual"] = f->residual();
  }
  return {{"error", body}};
}

inline Json location_fit_json(const LocationPrior& prior, const Transform& t,
                              const std::vector<double>& levels = {0.01, 0.99}) {
  Json percentiles = Json::array();
  for (const auto& q : location_percentiles(prior, levels)) percentiles.push_back(to_json(q));
  return {{"location", to_json(prior)}, {"anchor", apply(t, prior.median())}, {"percentiles", percentiles}};
}

inline Json variance_fit_json(const ProportionJudgement& p, const VariancePrior& prior, const Transform& t) {
  const auto [k1, k2] = variance_interval_endpoints(p.anchor, p.width, t);
  const auto warning = robustness_warning(p.theta_lo, p.theta_hi);
  Json quantiles = Json::array();
  for (double a : {0.05, 0.95}) quantiles.push_back(to_json(QuantileJudgement{a, prior.quantile(a)}));
  return {{"variance", to_json(prior)},
          {"c", p.width},
          {"anchor", p.anchor},
          {"interval", {k1, k2}},
          {"variance_quantiles", quantiles},
          {"in_robust_band", !warning.has_value()},
          {"warning", warning ? Json(*warning) : Json(nullptr)}};
}

// Population feedback: the bundle plus, on the identity scale, the shaded
// proportion at the median variance.
inline Json population_feedback_json(const PopulationModel& model, const FeedbackConfig& cfg,
                                     const std::optional<ProportionJudgement>& proportion = std::nullopt) {
  Json out = to_json(compute_feedback(model, cfg));
  out["kind"] = "population";
  if (proportion && model.transform.tag == TransformTag::identity) {
    out["proportion_shading"] = to_json(proportion_shading_data(
        proportion->anchor, std::sqrt(model.variance.quantile(0.5)),
        {proportion->anchor, proportion->anchor + proportion->width}, model.bounds, cfg.grid_size));
  }
  return out;
}

// ---- number formatting for CSV

// Shortest text that reads back as the same double, locale independent.
inline std::string format_number(double x) { return Json(x).dump(); }

}  // namespace elicit::json
