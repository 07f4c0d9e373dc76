// Walks through a complete elicitation for the time an expert translator
// needs per page, including one revision of the proportion judgements,
// and writes the exported session document.
//
//   translation_times [output.json]

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "elicit/session.hpp"

using namespace elicit;

namespace {

void show_location(const SessionRecord& s) {
  const auto& n = std::get<NormalParams>(s.location->dist);
  const auto p = location_percentiles(*s.location);
  std::printf("  mean prior N(%.2f, %.2f); 1st and 99th percentiles %.0f and %.0f minutes\n", n.mean, n.variance,
              p[0].value, p[1].value);
}

void show_variance(const SessionRecord& s) {
  const auto& v = *s.variance;
  std::printf("  variance prior IG(%.1f, %.0f); sigma^2 90%% range %.1f to %.1f\n", v.p1, v.p2, v.quantile(0.05),
              v.quantile(0.95));
  if (const auto warning = robustness_warning(s.judgements.proportion->theta_lo, s.judgements.proportion->theta_hi)) {
    std::printf("  note: %s\n", warning->c_str());
  }
}

void show_feedback(const FeedbackBundle& b) {
  for (const auto& q : b.quantile_intervals) {
    std::printf("  %2.0f%% population quantile: 90%% interval %.1f to %.1f minutes\n", q.alpha * 100, q.lower,
                q.upper);
  }
}

}  // namespace

int main(int argc, char** argv) {
  int tick = 0;
  auto clock = [&tick] {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "2026-01-01T10:%02d:00Z", tick++);
    return std::string(buffer);
  };

  auto s = create_session("translation-demo", Transform{},
                          {{"quantity", "minutes for an expert to translate one page"}, {"expert", "translator"}},
                          20240521, clock());

  std::puts("Plausible range: 5 to 70 minutes");
  record_bounds(s, 5, 70, clock());

  std::puts("Mean: 5% quantile 30 minutes, 95% quantile 40 minutes");
  record_mean_quantiles(s, {{0.05, 30}, {0.95, 40}}, std::nullopt, clock());
  show_location(s);

  std::puts("Proportion of pages taking 35 to 45 minutes: between 33% and 40%");
  ProportionInput first;
  first.width = 10;
  first.theta_lo = 0.33;
  first.theta_hi = 0.40;
  record_proportion(s, first, clock());
  show_variance(s);

  FeedbackConfig cfg;
  cfg.seed = s.seed;
  show_feedback(::elicit::show_feedback(s, cfg, clock()));

  std::puts("The expert finds the spread too wide and revises to between 30% and 35%");
  ProportionInput revised = first;
  revised.theta_lo = 0.30;
  revised.theta_hi = 0.35;
  revise_proportion(s, revised, clock());
  show_variance(s);
  show_feedback(::elicit::show_feedback(s, cfg, clock()));

  conclude(s, "expert accepts the revised fit", clock());
  std::printf("Concluded after %zu recorded steps\n", s.history.size());

  if (argc > 1) {
    std::ofstream out(argv[1], std::ios::binary);
    out << export_session(s);
    if (!out) {
      std::cerr << "cannot write " << argv[1] << "\n";
      return 4;
    }
    std::printf("Session written to %s\n", argv[1]);
  }
  return 0;
}
