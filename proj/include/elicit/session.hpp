#pragma once

// Elicitation workflow. A session moves
//   Created -> BoundsSet -> (MeanElicited) -> MeanFitted -> (ProportionElicited)
//   -> VarianceFitted -> FeedbackShown -> Concluded
// Judgements and their fits are recorded in one operation, so the
// parenthesised states are passed through rather than rested in. Revisions
// jump back to re-elicit the mean or the proportion from any later state.
//
// Every operation appends one history entry holding its input and result.
// Replaying the inputs from the creation entry rebuilds the record exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/errors.hpp"
#include "elicit/feedback.hpp"
#include "elicit/fitting/location.hpp"
#include "elicit/fitting/variance.hpp"
#include "elicit/json.hpp"
#include "elicit/transforms.hpp"

namespace elicit {

using json::Json;

inline constexpr int kSchemaVersion = 1;

enum class SessionState {
  Created,
  BoundsSet,
  MeanElicited,
  MeanFitted,
  ProportionElicited,
  VarianceFitted,
  FeedbackShown,
  Concluded
};

inline std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Created: return "Created";
    case SessionState::BoundsSet: return "BoundsSet";
    case SessionState::MeanElicited: return "MeanElicited";
    case SessionState::MeanFitted: return "MeanFitted";
    case SessionState::ProportionElicited: return "ProportionElicited";
    case SessionState::VarianceFitted: return "VarianceFitted";
    case SessionState::FeedbackShown: return "FeedbackShown";
    case SessionState::Concluded: return "Concluded";
  }
  return "Created";
}

inline std::optional<SessionState> parse_state(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(SessionState::Concluded); ++i) {
    const auto state = static_cast<SessionState>(i);
    if (to_string(state) == s) return state;
  }
  return std::nullopt;
}

inline bool at_least(SessionState s, SessionState step) { return static_cast<int>(s) >= static_cast<int>(step); }

struct JudgementRecord {
  std::optional<Bounds> bounds;
  std::vector<QuantileJudgement> mean_quantiles;
  LocationFamily location_family = LocationFamily::normal;
  std::optional<ProportionJudgement> proportion;
  PrecisionFamily variance_family = PrecisionFamily::inverse_gamma;
};

struct HistoryEntry {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string event;
  SessionState from = SessionState::Created;
  SessionState to = SessionState::Created;
  Json payload;  // {"input": ..., "result": ...}
};

struct SessionRecord {
  std::string id;
  Json context = Json::object();
  Transform transform;
  std::uint64_t seed = 0;
  JudgementRecord judgements;
  std::optional<LocationPrior> location;
  std::optional<VariancePrior> variance;
  SessionState state = SessionState::Created;
  std::vector<HistoryEntry> history;

  // m_hat: transformed-scale image of the location prior's median.
  double anchor() const {
    if (!location) throw StateError("no location prior has been fitted yet");
    return apply(transform, location->median());
  }

  PopulationModel model() const {
    if (!location || !variance || !judgements.bounds) {
      throw StateError("the population model needs both the mean and the variance fits");
    }
    return {transform, *location, *variance, *judgements.bounds};
  }
};

// ---- clock

using Clock = std::function<std::string()>;

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

// ---- operation inputs

struct ProportionInput {
  std::optional<double> width;  // c; defaults to a third of the way from m_hat to g(U)
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double alpha_lo = 0.05;
  double alpha_hi = 0.95;
  PrecisionFamily family = PrecisionFamily::inverse_gamma;
};

inline LocationFamily default_location_family(const Transform& t) {
  switch (t.tag) {
    case TransformTag::identity: return LocationFamily::normal;
    case TransformTag::log: return LocationFamily::lognormal;
    case TransformTag::logit: return LocationFamily::beta;
  }
  return LocationFamily::normal;
}

namespace detail {

inline Json mean_input_json(const std::vector<QuantileJudgement>& qs, LocationFamily family) {
  return {{"mean_quantiles", json::to_json(qs)}, {"family", std::string(to_string(family))}};
}

inline Json proportion_input_json(const ProportionInput& p) {
  Json j = {{"theta_lo", p.theta_lo},
            {"theta_hi", p.theta_hi},
            {"alpha_lo", p.alpha_lo},
            {"alpha_hi", p.alpha_hi},
            {"family", std::string(to_string(p.family))}};
  if (p.width) j["c"] = *p.width;
  return j;
}

inline ProportionInput proportion_input_from_json(const Json& j, const std::string& where) {
  ProportionInput p;
  if (json::has(j, "c")) p.width = json::number(j, "c", where);
  p.theta_lo = json::number(j, "theta_lo", where);
  p.theta_hi = json::number(j, "theta_hi", where);
  if (json::has(j, "alpha_lo")) p.alpha_lo = json::number(j, "alpha_lo", where);
  if (json::has(j, "alpha_hi")) p.alpha_hi = json::number(j, "alpha_hi", where);
  if (json::has(j, "family")) p.family = parse_precision_family(json::text(j, "family", where));
  return p;
}

inline void append(SessionRecord& s, std::string event, SessionState to, Json input, Json result,
                   const std::string& timestamp) {
  HistoryEntry e;
  e.seq = s.history.size();
  e.timestamp = timestamp;
  e.event = std::move(event);
  e.from = s.state;
  e.to = to;
  e.payload = {{"input", std::move(input)}, {"result", std::move(result)}};
  s.history.push_back(std::move(e));
  s.state = to;
}

inline Json location_result(const SessionRecord& s) { return json::location_fit_json(*s.location, s.transform); }

inline Json variance_result(const SessionRecord& s) {
  return json::variance_fit_json(*s.judgements.proportion, *s.variance, s.transform);
}

// Fits the location prior from mean quantiles. Values must lie inside (L, U).
inline void fit_mean(SessionRecord& s, const std::vector<QuantileJudgement>& qs, LocationFamily family) {
  const Bounds& b = *s.judgements.bounds;
  for (const auto& q : qs) {
    if (!(q.value > b.lower && q.value < b.upper)) {
      throw InvalidJudgement("mean quantile value " + json::format_number(q.value) + " lies outside the bounds (" +
                             json::format_number(b.lower) + ", " + json::format_number(b.upper) + ")");
    }
  }
  const auto support = family == LocationFamily::beta ? std::optional{std::pair{b.lower, b.upper}} : std::nullopt;
  auto median_prior = elicit_median_prior(qs, family, s.transform, support);
  s.judgements.mean_quantiles = qs;
  s.judgements.location_family = family;
  s.location = std::move(median_prior.prior);
}

inline void fit_proportion(SessionRecord& s, const ProportionInput& in) {
  const double m_hat = s.anchor();
  const double c = in.width ? *in.width : suggest_c(m_hat, apply(s.transform, s.judgements.bounds->upper));
  ProportionJudgement p{m_hat, c, in.theta_lo, in.theta_hi, in.alpha_lo, in.alpha_hi};
  const auto vq = variance_quantiles_from_proportion(p);
  auto prior = fit_variance_prior(vq, in.family);
  s.judgements.proportion = p;
  s.judgements.variance_family = in.family;
  s.variance = prior;
}

inline ProportionInput proportion_input_of(const SessionRecord& s) {
  const auto& p = *s.judgements.proportion;
  return {p.width, p.theta_lo, p.theta_hi, p.alpha_lo, p.alpha_hi, s.judgements.variance_family};
}

// Mean (re)submission from any state at or past BoundsSet. When the anchor
// moves, the proportion judgement referred to the old anchor and is dropped
// along with the variance fit; otherwise the variance fit is recomputed.
inline void do_mean(SessionRecord& s, const std::string& event, const Json& input, const std::string& ts) {
  const auto qs = json::quantiles_from_json(json::field(input, "mean_quantiles", ""), "/mean_quantiles");
  const LocationFamily family = json::has(input, "family")
                                    ? parse_location_family(json::text(input, "family", ""))
                                    : default_location_family(s.transform);
  const double old_anchor = s.location ? s.anchor() : std::nan("");
  const Json previous = s.location ? location_result(s) : Json(nullptr);
  const bool had_variance = s.variance.has_value();
  fit_mean(s, qs, family);
  SessionState to = SessionState::MeanFitted;
  bool variance_kept = false;
  if (s.judgements.proportion && old_anchor == s.anchor()) {
    fit_proportion(s, proportion_input_of(s));
    to = SessionState::VarianceFitted;
    variance_kept = true;
  } else {
    s.judgements.proportion.reset();
    s.variance.reset();
  }
  Json result = location_result(s);
  if (previous.is_object()) {
    result["previous"] = previous;
    result["variance_invalidated"] = had_variance && !variance_kept;
  }
  if (variance_kept) result["variance"] = json::to_json(*s.variance);
  append(s, event, to, input, std::move(result), ts);
}

inline void do_proportion(SessionRecord& s, const std::string& event, const Json& input, const std::string& ts) {
  const Json previous = s.variance ? variance_result(s) : Json(nullptr);
  fit_proportion(s, proportion_input_from_json(input, ""));
  Json result = variance_result(s);
  if (previous.is_object()) result["previous"] = previous;
  // The resolved c goes into the recorded input so replay never depends on the default rule.
  Json recorded = input;
  recorded["c"] = s.judgements.proportion->width;
  append(s, event, SessionState::VarianceFitted, std::move(recorded), std::move(result), ts);
}

inline void require_state(bool ok, std::string_view operation, SessionState state) {
  if (!ok) {
    throw StateError(std::string(operation) + " is not allowed in state " + std::string(to_string(state)));
  }
}

}  // namespace detail

// Applies one recorded operation. The record is left untouched when the
// operation throws.
inline void apply_event(SessionRecord& session, const std::string& event, const Json& input,
                        const std::string& timestamp) {
  SessionRecord s = session;
  const SessionState st = s.state;
  if (!input.is_object()) throw ParseError("operation input must be an object", "/input");
  if (event == "bounds_set") {
    detail::require_state(st == SessionState::Created, "recording bounds", st);
    const double lower = json::number(input, "L", "");
    const double upper = json::number(input, "U", "");
    check_bounds(s.transform, lower, upper);
    s.judgements.bounds = Bounds{lower, upper};
    detail::append(s, event, SessionState::BoundsSet, input, Json::object(), timestamp);
  } else if (event == "mean_fitted") {
    detail::require_state(at_least(st, SessionState::BoundsSet) && st != SessionState::Concluded,
                          "recording mean quantiles", st);
    detail::do_mean(s, event, input, timestamp);
  } else if (event == "mean_revised") {
    detail::require_state(at_least(st, SessionState::MeanFitted), "revising the mean quantiles", st);
    detail::do_mean(s, event, input, timestamp);
  } else if (event == "variance_fitted") {
    detail::require_state(at_least(st, SessionState::MeanFitted) && st != SessionState::Concluded,
                          "recording the proportion judgements", st);
    detail::do_proportion(s, event, input, timestamp);
  } else if (event == "proportion_revised") {
    detail::require_state(at_least(st, SessionState::VarianceFitted), "revising the proportion judgements", st);
    detail::do_proportion(s, event, input, timestamp);
  } else if (event == "feedback_shown") {
    detail::require_state(st == SessionState::VarianceFitted || st == SessionState::FeedbackShown,
                          "showing feedback", st);
    FeedbackConfig base;
    base.seed = s.seed;
    const FeedbackConfig cfg = json::feedback_config_from_json(json::field(input, "config", ""), base, "/config");
    const auto bundle = compute_feedback(s.model(), cfg);
    Json intervals = Json::array();
    for (const auto& q : bundle.quantile_intervals) intervals.push_back(json::to_json(q));
    detail::append(s, event, SessionState::FeedbackShown, {{"config", json::to_json(cfg)}},
                   {{"quantile_intervals", intervals}}, timestamp);
  } else if (event == "concluded") {
    detail::require_state(st == SessionState::FeedbackShown, "concluding", st);
    const Json& accepted = json::field(input, "accepted", "");
    if (!accepted.is_boolean() || !accepted.get<bool>()) {
      throw InvalidJudgement("concluding needs the expert's explicit acceptance (accepted: true)");
    }
    detail::append(s, event, SessionState::Concluded, input, Json::object(), timestamp);
  } else if (event == "created") {
    throw StateError("a session can only be created once");
  } else {
    throw ParseError("unknown event '" + event + "'", "/event");
  }
  session = std::move(s);
}

// ---- operations

inline SessionRecord create_session(std::string id, const Transform& transform, Json context, std::uint64_t seed,
                                    const std::string& timestamp) {
  if (!context.is_object()) throw InvalidJudgement("session context must be a JSON object");
  SessionRecord s;
  s.id = std::move(id);
  s.context = context;
  s.transform = transform;
  s.seed = seed;
  s.judgements.location_family = default_location_family(transform);
  detail::append(s, "created", SessionState::Created,
                 {{"context", std::move(context)}, {"transform", std::string(to_string(transform))}, {"seed", seed}},
                 Json::object(), timestamp);
  return s;
}

inline void record_bounds(SessionRecord& s, double lower, double upper, const std::string& ts) {
  apply_event(s, "bounds_set", {{"L", lower}, {"U", upper}}, ts);
}

inline void record_mean_quantiles(SessionRecord& s, const std::vector<QuantileJudgement>& qs,
                                  std::optional<LocationFamily> family, const std::string& ts) {
  apply_event(s, "mean_fitted", detail::mean_input_json(qs, family.value_or(default_location_family(s.transform))),
              ts);
}

inline void record_proportion(SessionRecord& s, const ProportionInput& p, const std::string& ts) {
  apply_event(s, "variance_fitted", detail::proportion_input_json(p), ts);
}

inline void revise_mean(SessionRecord& s, const std::vector<QuantileJudgement>& qs,
                        std::optional<LocationFamily> family, const std::string& ts) {
  apply_event(s, "mean_revised", detail::mean_input_json(qs, family.value_or(s.judgements.location_family)), ts);
}

inline void revise_proportion(SessionRecord& s, const ProportionInput& p, const std::string& ts) {
  apply_event(s, "proportion_revised", detail::proportion_input_json(p), ts);
}

// Records that the bundle for cfg was shown and returns it.
inline FeedbackBundle show_feedback(SessionRecord& s, const FeedbackConfig& cfg, const std::string& ts) {
  apply_event(s, "feedback_shown", {{"config", json::to_json(cfg)}}, ts);
  return compute_feedback(s.model(), cfg);
}

inline void conclude(SessionRecord& s, const std::string& note, const std::string& ts) {
  apply_event(s, "concluded", {{"accepted", true}, {"note", note}}, ts);
}

// Summaries available once the mean is fitted: percentiles and the density
// of the location prior over [L, U].
inline Json mean_feedback(const SessionRecord& s, int points = 300) {
  if (!s.location || !s.judgements.bounds) throw StateError("mean feedback needs a fitted location prior");
  Json out = json::location_fit_json(*s.location, s.transform);
  const auto grid = even_grid(s.judgements.bounds->lower, s.judgements.bounds->upper, points);
  std::vector<double> density;
  for (double x : grid) density.push_back(s.location->pdf(x));
  out["grid"] = grid;
  out["density"] = density;
  return out;
}

// ---- documents

inline Json to_json(const HistoryEntry& e) {
  return {{"seq", e.seq},
          {"timestamp", e.timestamp},
          {"event", e.event},
          {"from_state", std::string(to_string(e.from))},
          {"to_state", std::string(to_string(e.to))},
          {"payload", e.payload}};
}

inline Json to_json(const ProportionJudgement& p) {
  return {{"anchor", p.anchor},     {"c", p.width},           {"theta_lo", p.theta_lo},
          {"theta_hi", p.theta_hi}, {"alpha_lo", p.alpha_lo}, {"alpha_hi", p.alpha_hi}};
}

inline Json export_json(const SessionRecord& s) {
  Json judgements = Json::object();
  if (s.judgements.bounds) {
    judgements["L"] = s.judgements.bounds->lower;
    judgements["U"] = s.judgements.bounds->upper;
  }
  judgements["mean_quantiles"] = json::to_json(s.judgements.mean_quantiles);
  judgements["location_family"] = std::string(to_string(s.judgements.location_family));
  judgements["proportion"] = s.judgements.proportion ? to_json(*s.judgements.proportion) : Json(nullptr);
  judgements["variance_family"] = std::string(to_string(s.judgements.variance_family));
  Json fits = Json::object();
  fits["location"] = s.location ? json::to_json(*s.location) : Json(nullptr);
  fits["variance"] = s.variance ? json::to_json(*s.variance) : Json(nullptr);
  Json history = Json::array();
  for (const auto& e : s.history) history.push_back(to_json(e));
  return {{"schema_version", kSchemaVersion},
          {"id", s.id},
          {"context", s.context},
          {"transform", std::string(to_string(s.transform))},
          {"seed", s.seed},
          {"state", std::string(to_string(s.state))},
          {"judgements", judgements},
          {"fits", fits},
          {"history", history}};
}

inline std::string export_session(const SessionRecord& s) { return export_json(s).dump(2) + "\n"; }

namespace detail {

inline SessionState state_from_json(const Json& j, const std::string& key, const std::string& where) {
  const std::string name = json::text(j, key, where);
  const auto state = parse_state(name);
  if (!state) throw ParseError("unknown state '" + name + "'", json::child_pointer(where, key));
  return *state;
}

// Structural read, no invariant checks.
inline SessionRecord read_document(const Json& doc) {
  if (!doc.is_object()) throw ParseError("session document must be a JSON object", "/");
  const Json& version = json::field(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kSchemaVersion) {
    throw ParseError("unsupported schema version " + version.dump() + " (expected " +
                         std::to_string(kSchemaVersion) + ")",
                     "/schema_version");
  }
  SessionRecord s;
  s.id = json::text(doc, "id", "");
  s.context = json::field(doc, "context", "");
  if (!s.context.is_object()) throw ParseError("context must be an object", "/context");
  try {
    s.transform = parse_transform(json::text(doc, "transform", ""));
  } catch (const InvalidTransform& e) {
    throw ParseError(e.what(), "/transform");
  }
  s.seed = json::unsigned_integer(doc, "seed", "");
  s.state = state_from_json(doc, "state", "");

  const Json& j = json::field(doc, "judgements", "");
  if (json::has(j, "L") || json::has(j, "U")) {
    s.judgements.bounds = Bounds{json::number(j, "L", "/judgements"), json::number(j, "U", "/judgements")};
  }
  s.judgements.mean_quantiles =
      json::quantiles_from_json(json::field(j, "mean_quantiles", "/judgements"), "/judgements/mean_quantiles");
  try {
    s.judgements.location_family = parse_location_family(json::text(j, "location_family", "/judgements"));
    s.judgements.variance_family = parse_precision_family(json::text(j, "variance_family", "/judgements"));
  } catch (const InvalidJudgement& e) {
    throw ParseError(e.what(), "/judgements");
  }
  if (json::has(j, "proportion")) {
    const Json& p = j.at("proportion");
    const std::string at = "/judgements/proportion";
    s.judgements.proportion =
        ProportionJudgement{json::number(p, "anchor", at),   json::number(p, "c", at),
                            json::number(p, "theta_lo", at), json::number(p, "theta_hi", at),
                            json::number(p, "alpha_lo", at), json::number(p, "alpha_hi", at)};
  }
  const Json& fits = json::field(doc, "fits", "");
  if (json::has(fits, "location")) s.location = json::location_prior_from_json(fits.at("location"), "/fits/location");
  if (json::has(fits, "variance")) s.variance = json::variance_prior_from_json(fits.at("variance"), "/fits/variance");

  const Json& history = json::field(doc, "history", "");
  if (!history.is_array()) throw ParseError("history must be an array", "/history");
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::string at = "/history/" + std::to_string(i);
    const Json& h = history[i];
    HistoryEntry e;
    e.seq = json::unsigned_integer(h, "seq", at);
    e.timestamp = json::text(h, "timestamp", at);
    e.event = json::text(h, "event", at);
    e.from = state_from_json(h, "from_state", at);
    e.to = state_from_json(h, "to_state", at);
    e.payload = json::field(h, "payload", at);
    if (!e.payload.is_object() || !e.payload.contains("input")) {
      throw ParseError("history payload needs an input object", at + "/payload");
    }
    s.history.push_back(std::move(e));
  }
  return s;
}

// Numbers equal to a relative 1e-9, everything else exactly.
inline bool json_close(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
  }
  if (a.type() != b.type()) return false;
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_close(a[i], b[i])) return false;
    }
    return true;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
      const auto other = b.find(it.key());
      if (other == b.end() || !json_close(it.value(), *other)) return false;
    }
    return true;
  }
  return a == b;
}

}  // namespace detail

// Rebuilds a session from its history inputs and recorded timestamps.
inline SessionRecord replay(const SessionRecord& s) {
  if (s.history.empty() || s.history.front().event != "created") {
    throw ValidationError("history-starts-with-created", "the first history entry must be the creation event");
  }
  const Json& created = s.history.front().payload.at("input");
  SessionRecord rebuilt;
  try {
    rebuilt = create_session(s.id, parse_transform(json::text(created, "transform", "/history/0/payload/input")),
                             json::field(created, "context", "/history/0/payload/input"),
                             json::unsigned_integer(created, "seed", "/history/0/payload/input"),
                             s.history.front().timestamp);
    for (std::size_t i = 1; i < s.history.size(); ++i) {
      const auto& e = s.history[i];
      apply_event(rebuilt, e.event, e.payload.at("input"), e.timestamp);
    }
  } catch (const Error& e) {
    throw ValidationError("history-replay", std::string("replaying the history failed: ") + e.what());
  }
  return rebuilt;
}

// Invariant checks over a parsed document. Throws ValidationError naming
// the first invariant that fails.
inline void validate_session(const SessionRecord& s) {
  auto fail = [](const char* invariant, const std::string& message) { throw ValidationError(invariant, message); };
  const auto& j = s.judgements;
  if (j.bounds) {
    if (!(j.bounds->lower < j.bounds->upper)) fail("L < U", "lower bound must be below the upper bound");
    if (!in_support(s.transform, j.bounds->lower) || !in_support(s.transform, j.bounds->upper)) {
      fail("bounds-in-transform-support", "bounds fall outside the transform's support");
    }
  }
  if (at_least(s.state, SessionState::BoundsSet) != j.bounds.has_value()) {
    fail("bounds-match-state", "bounds are recorded exactly from BoundsSet onwards");
  }
  for (std::size_t i = 0; i < j.mean_quantiles.size(); ++i) {
    const auto& q = j.mean_quantiles[i];
    if (!(q.alpha > 0.0 && q.alpha < 1.0)) fail("mean-quantile-levels", "quantile levels must lie in (0, 1)");
    if (j.bounds && !(q.value > j.bounds->lower && q.value < j.bounds->upper)) {
      fail("mean-quantiles-within-bounds", "mean quantile values must lie in (L, U)");
    }
    if (i > 0 && !(q.alpha > j.mean_quantiles[i - 1].alpha && q.value > j.mean_quantiles[i - 1].value)) {
      fail("mean-quantiles-increasing", "mean quantile levels and values must be strictly increasing");
    }
  }
  if (j.proportion) {
    const auto& p = *j.proportion;
    if (!(p.theta_lo > 0.0 && p.theta_lo < p.theta_hi && p.theta_hi < 0.5)) {
      fail("0 < theta_lo < theta_hi < 0.5", "theta quantiles out of order or range");
    }
    if (!(p.width > 0.0)) fail("c > 0", "interval width must be positive");
  }
  const bool want_location = at_least(s.state, SessionState::MeanFitted);
  const bool want_variance = at_least(s.state, SessionState::VarianceFitted);
  if (s.location.has_value() != want_location) fail("location-fit-matches-state", "location fit presence vs state");
  if (s.variance.has_value() != want_variance || j.proportion.has_value() != want_variance) {
    fail("variance-fit-matches-state", "variance fit and proportion presence vs state");
  }
  if (s.state == SessionState::MeanElicited || s.state == SessionState::ProportionElicited) {
    fail("resting-state", "judgements are always recorded together with their fit");
  }
  if (s.location) {
    try {
      numerics::validate(s.location->dist);
    } catch (const DomainError& e) {
      fail("location-params-valid", e.what());
    }
  }
  if (s.variance) {
    try {
      s.variance->validate();
    } catch (const DomainError& e) {
      fail("variance-params-valid", e.what());
    }
  }
  if (s.location && j.proportion) {
    const double m_hat = apply(s.transform, s.location->median());
    if (std::abs(m_hat - j.proportion->anchor) > 1e-9 * std::max(1.0, std::abs(m_hat))) {
      fail("anchor-equals-location-median", "proportion anchor differs from the fitted location median");
    }
  }
  if (s.history.empty()) fail("history-nonempty", "history must hold at least the creation event");
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const auto& e = s.history[i];
    if (e.seq != i) fail("history-sequence", "history seq numbers must run 0, 1, 2, ...");
    if (i > 0 && e.from != s.history[i - 1].to) fail("history-chain", "each entry must start where the last ended");
  }
  if (s.history.back().to != s.state) fail("state-matches-history", "state differs from the last history entry");

  const SessionRecord rebuilt = replay(s);
  if (!detail::json_close(export_json(rebuilt), export_json(s))) {
    fail("history-replay", "replaying the history does not reproduce the recorded session");
  }
}

inline SessionRecord import_json(const Json& doc) {
  SessionRecord s = detail::read_document(doc);
  validate_session(s);
  return s;
}

inline SessionRecord import_session(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  return import_json(doc);
}

}  // namespace elicit
