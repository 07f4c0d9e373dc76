#pragma once

// Command-line front end. run() is the whole program minus main(), so tests
// can drive it with argument vectors and captured streams.
//
// Exit codes: 0 ok, 2 usage, 3 domain, judgement, fit or document error,
// 4 I/O.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "elicit/session.hpp"

namespace elicit::cli {

enum ExitCode { kOk = 0, kUsage = 2, kEngine = 3, kIo = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << text;
  if (!file) throw IoError("cannot write " + path);
}

inline std::string describe(const LocationPrior& p) {
  std::ostringstream s;
  if (const auto* n = std::get_if<NormalParams>(&p.dist)) {
    s << "normal(mean=" << json::format_number(n->mean) << ", variance=" << json::format_number(n->variance) << ")";
  } else if (const auto* l = std::get_if<LogNormalParams>(&p.dist)) {
    s << "lognormal(meanlog=" << json::format_number(l->meanlog) << ", sdlog=" << json::format_number(l->sdlog)
      << ")";
  } else if (const auto* b = std::get_if<BetaParams>(&p.dist)) {
    s << "beta(alpha=" << json::format_number(b->alpha) << ", beta=" << json::format_number(b->beta)
      << ", lower=" << json::format_number(b->lower) << ", upper=" << json::format_number(b->upper) << ")";
  }
  return s.str();
}

inline std::string describe(const VariancePrior& v) {
  const Json params = json::variance_params_json(v);
  std::ostringstream s;
  s << to_string(v.family) << "(";
  bool first = true;
  for (const auto& [key, value] : params.items()) {
    s << (first ? "" : ", ") << key << "=" << json::format_number(value.get<double>());
    first = false;
  }
  s << ")";
  return s.str();
}

inline std::string csv(const FeedbackBundle& b) {
  std::string out = "x,cdf_lower,cdf_median,cdf_upper\n";
  for (std::size_t j = 0; j < b.grid.size(); ++j) {
    out += json::format_number(b.grid[j]) + "," + json::format_number(b.cdf_lower[j]) + "," +
           json::format_number(b.cdf_median[j]) + "," + json::format_number(b.cdf_upper[j]) + "\n";
  }
  return out;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior elicitation for a normal population: mean and variance priors from expert judgements."};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Print machine-readable JSON (the service's payload shapes)");

  // fit-mean
  auto* fit_mean = app.add_subcommand("fit-mean", "Fit the prior for the mean from quantile judgements");
  std::vector<double> probs;
  std::vector<double> vals;
  double lower = 0.0;
  double upper = 0.0;
  std::string location_family;
  std::string transform_name = "identity";
  std::optional<double> ql;
  std::optional<double> qu;
  fit_mean->add_option("--probs", probs, "Quantile levels, comma separated")->required()->delimiter(',');
  fit_mean->add_option("--vals", vals, "Quantile values, comma separated")->required()->delimiter(',');
  fit_mean->add_option("--lower", lower, "Lower plausible bound L")->required();
  fit_mean->add_option("--upper", upper, "Upper plausible bound U")->required();
  fit_mean->add_option("--family", location_family, "normal, lognormal or beta (default follows --transform)");
  fit_mean->add_option("--transform", transform_name, "identity, log or logit");
  fit_mean->add_option("--ql", ql, "Report this lower quantile of the fitted prior");
  fit_mean->add_option("--qu", qu, "Report this upper quantile of the fitted prior");

  // fit-precision
  auto* fit_precision = app.add_subcommand("fit-precision", "Fit the variance prior from proportion judgements");
  std::vector<double> interval;
  std::vector<std::string> propvals;
  std::string precision_family = "inverse-gamma";
  std::string precision_transform = "identity";
  fit_precision->add_option("--interval", interval, "k1,k2: the interval the proportion refers to")
      ->required()
      ->delimiter(',')
      ->expected(2);
  fit_precision->add_option("--propvals", propvals, "t1,t2: 5% and 95% quantiles of the proportion (33% allowed)")
      ->required()
      ->delimiter(',')
      ->expected(2);
  fit_precision->add_option("--family", precision_family, "inverse-gamma, gamma-precision or lognormal-precision");
  fit_precision->add_option("--transform", precision_transform, "identity, log or logit");

  // feedback
  auto* feedback = app.add_subcommand("feedback", "Monte Carlo feedback for a fitted model");
  std::string session_path;
  std::optional<double> mean;
  std::optional<double> mean_var;
  std::optional<double> shape;
  std::optional<double> scale;
  std::optional<double> fb_lower;
  std::optional<double> fb_upper;
  std::string fb_transform = "identity";
  std::optional<std::uint64_t> seed;
  int draws = 300;
  int grid_size = 300;
  std::vector<double> levels;
  double level = 0.90;
  double band_level = 0.95;
  int threads = 1;
  std::string format = "json";
  std::string output;
  auto* session_opt = feedback->add_option("--session", session_path, "Exported session document");
  auto* mean_opt = feedback->add_option("--mean", mean, "Mean of the normal prior for the mean");
  feedback->add_option("--mean-var", mean_var, "Variance of the normal prior for the mean")->needs(mean_opt);
  feedback->add_option("--shape", shape, "Inverse-gamma shape of the variance prior")->needs(mean_opt);
  feedback->add_option("--scale", scale, "Inverse-gamma scale of the variance prior")->needs(mean_opt);
  feedback->add_option("--lower", fb_lower, "Lower end of the plotting range");
  feedback->add_option("--upper", fb_upper, "Upper end of the plotting range");
  feedback->add_option("--transform", fb_transform, "identity, log or logit (explicit parameters only)");
  session_opt->excludes(mean_opt);
  feedback->add_option("--seed", seed, "RNG seed (default: the session's seed, or 1)");
  feedback->add_option("--K", draws, "Number of parameter draws");
  feedback->add_option("--J", grid_size, "Grid points for the CDF band");
  feedback->add_option("--levels,--quantiles", levels, "Population quantile levels")->delimiter(',');
  feedback->add_option("--level", level, "Coverage of each quantile interval");
  feedback->add_option("--band-level", band_level, "Coverage of the pointwise CDF band");
  feedback->add_option("--threads", threads, "Worker threads (results do not depend on it)");
  feedback->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  feedback->add_option("--output,-o", output, "Write to this file instead of stdout");

  // validate / replay
  auto* validate = app.add_subcommand("validate", "Check a session document's invariants and history");
  std::string validate_path;
  validate->add_option("file", validate_path, "Session document")->required();
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild a session from its history and print the result");
  std::string replay_path;
  std::string replay_output;
  replay_cmd->add_option("file", replay_path, "Session document")->required();
  replay_cmd->add_option("--output,-o", replay_output, "Write to this file instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  auto fail = [&](int code, const std::string& kind, const std::string& message, const Json& body) {
    if (as_json) {
      out << body.dump() << "\n";
    } else {
      err << kind << ": " << message << "\n";
    }
    return code;
  };

  try {
    if (fit_mean->parsed()) {
      if (probs.size() != vals.size()) throw UsageError("--probs and --vals must have the same length");
      if (probs.size() < 2) throw UsageError("at least two quantile judgements are needed");
      const Transform t = parse_transform(transform_name);
      const LocationFamily family =
          location_family.empty() ? default_location_family(t) : parse_location_family(location_family);
      std::vector<QuantileJudgement> qs;
      for (std::size_t i = 0; i < probs.size(); ++i) qs.push_back({probs[i], vals[i]});
      // Same path as a session so the output matches the service's mean-fit result.
      auto s = create_session("cli", t, Json::object(), 0, "");
      record_bounds(s, lower, upper, "");
      record_mean_quantiles(s, qs, family, "");
      std::vector<double> report{0.01, 0.99};
      if (ql) report[0] = *ql;
      if (qu) report[1] = *qu;
      const Json result = json::location_fit_json(*s.location, t, report);
      if (as_json) {
        out << result.dump() << "\n";
      } else {
        out << detail::describe(*s.location) << "\n";
        if (s.location->fitted_from.size() > 2 || family != LocationFamily::normal) {
          out << "residual " << json::format_number(s.location->residual) << "\n";
        }
        for (const auto& q : location_percentiles(*s.location, report)) {
          out << "quantile " << json::format_number(q.alpha) << ": " << json::format_number(q.value) << "\n";
        }
      }
      return kOk;
    }

    if (fit_precision->parsed()) {
      const Transform t = parse_transform(precision_transform);
      if (!(interval[0] < interval[1])) throw InvalidJudgement("--interval needs k1 < k2");
      const double anchor = apply(t, interval[0]);
      const double width = apply(t, interval[1]) - anchor;
      const ProportionJudgement p{anchor, width, parse_theta(propvals[0]), parse_theta(propvals[1])};
      const auto prior = fit_variance_prior(variance_quantiles_from_proportion(p), parse_precision_family(precision_family));
      const Json result = json::variance_fit_json(p, prior, t);
      if (as_json) {
        out << result.dump() << "\n";
      } else {
        out << detail::describe(prior) << "\n";
        for (double a : {0.05, 0.95}) {
          out << "variance quantile " << json::format_number(a) << ": " << json::format_number(prior.quantile(a))
              << "\n";
        }
        if (const auto warning = robustness_warning(p.theta_lo, p.theta_hi)) out << "warning: " << *warning << "\n";
      }
      return kOk;
    }

    if (feedback->parsed()) {
      PopulationModel model;
      std::optional<ProportionJudgement> proportion;
      FeedbackConfig cfg;
      if (!session_path.empty()) {
        const SessionRecord s = import_session(detail::read_text(session_path));
        model = s.model();
        proportion = s.judgements.proportion;
        cfg.seed = s.seed;
      } else {
        if (!mean || !mean_var || !shape || !scale || !fb_lower || !fb_upper) {
          throw UsageError(
              "give --session, or all of --mean --mean-var --shape --scale --lower --upper");
        }
        model.transform = parse_transform(fb_transform);
        model.location.dist = NormalParams{*mean, *mean_var};
        model.variance = VariancePrior::inverse_gamma({*shape, *scale});
        model.bounds = {*fb_lower, *fb_upper};
        cfg.seed = 1;
      }
      if (!session_path.empty() && (fb_lower || fb_upper)) {
        model.bounds = {fb_lower.value_or(model.bounds.lower), fb_upper.value_or(model.bounds.upper)};
      }
      if (seed) cfg.seed = *seed;
      cfg.draws = draws;
      cfg.grid_size = grid_size;
      if (!levels.empty()) cfg.quantiles = levels;
      cfg.quantile_interval_level = level;
      cfg.band_level = band_level;
      cfg.threads = threads;
      cfg.validate();
      model.validate();
      if (format == "csv") {
        detail::write_text(output, detail::csv(compute_feedback(model, cfg)), out);
      } else {
        detail::write_text(output, json::population_feedback_json(model, cfg, proportion).dump() + "\n", out);
      }
      return kOk;
    }

    if (validate->parsed()) {
      const SessionRecord s = import_session(detail::read_text(validate_path));
      if (as_json) {
        out << Json{{"valid", true}, {"id", s.id}, {"state", std::string(to_string(s.state))}}.dump() << "\n";
      } else {
        out << "valid: session " << s.id << " in state " << to_string(s.state) << ", " << s.history.size()
            << " history entries\n";
      }
      return kOk;
    }

    if (replay_cmd->parsed()) {
      Json doc;
      try {
        doc = Json::parse(detail::read_text(replay_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
      }
      const SessionRecord rebuilt = replay(elicit::detail::read_document(doc));
      detail::write_text(replay_output, export_session(rebuilt), out);
      return kOk;
    }
  } catch (const UsageError& e) {
    return fail(kUsage, "usage error", e.what(), {{"error", {{"code", "usage"}, {"message", e.what()}}}});
  } catch (const IoError& e) {
    return fail(kIo, "i/o error", e.what(), {{"error", {{"code", "io"}, {"message", e.what()}}}});
  } catch (const Error& e) {
    return fail(kEngine, e.code(), e.what(), json::error_json(e));
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIo, "i/o error", e.what(), {{"error", {{"code", "io"}, {"message", e.what()}}}});
  }
  return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace elicit::cli
