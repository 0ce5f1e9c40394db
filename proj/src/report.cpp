#include "busyburst/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "busyburst/error.hpp"

namespace busyburst {

using nlohmann::ordered_json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

ordered_json number_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

}  // namespace

AnalysisReport analyze(const ValidatedModel& model, double height) {
  const auto s = busy_exponent_K(model);
  return AnalysisReport{s, check_symmetry(model, s), psi_star_integral(s), hit_level_exponent(s, height), height};
}

std::string analysis_json(const ValidatedModel& model, const AnalysisReport& r) {
  ordered_json j;
  j["kind"] = std::string(model.kind());
  j["drift"] = model.drift();
  j["delta"] = r.summary.delta;
  j["x_star"] = r.summary.x_star;
  j["lambda_star"] = r.summary.lambda_star;
  j["K"] = r.summary.K;
  j["integral_lambda"] = r.summary.integral_lambda;
  j["psi_star_integral"] = r.psi_star_integral;
  j["height"] = r.height;
  j["hit_level_exponent"] = r.hit_level_exponent;
  j["symmetry"] = {{"symmetric", r.symmetry.symmetric},
                   {"max_defect", r.symmetry.max_defect},
                   {"x_star_defect", r.symmetry.x_star_defect},
                   {"lambda_star_defect", r.symmetry.lambda_star_defect},
                   {"identities_hold", r.symmetry.identities_hold}};
  return j.dump(2) + "\n";
}

std::vector<SampledPath> analysis_paths(const ValidatedModel& model, const AnalysisReport& r, std::size_t points) {
  const auto& s = r.summary;
  std::vector<SampledPath> out;
  SampledPath lambda{uniform_grid(s.lambda_star, points), {}, PathLabel::scgf};
  lambda.values.reserve(points);
  for (double theta : lambda.times) lambda.values.push_back(scgf(model, theta));
  out.push_back(std::move(lambda));
  out.push_back(psi_star(model, s, uniform_grid(1.0, points)));
  const double end = r.height / s.x_star + r.height / s.delta;
  out.push_back(varphi_star(s, r.height, uniform_grid(end, points)));
  return out;
}

std::string paths_csv(std::span<const SampledPath> paths) {
  std::string out = "t,value,label\n";
  for (const auto& p : paths) {
    const auto label = to_string(p.label);
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      out += format_double(p.times[i]);
      out += ',';
      out += format_double(p.values[i]);
      out += ',';
      out += label;
      out += '\n';
    }
  }
  return out;
}

std::string tail_csv(const TailTable& table, double K, std::optional<double> kappa) {
  std::string out = "b,count,log_p_emp,log_p_pred,log_p_pred_shifted\n";
  for (const auto& p : empirical_log_tail(table)) {
    const double pred = -K * std::sqrt(p.b);
    out += format_double(p.b) + ',' + std::to_string(p.count) + ',' + format_double(p.log_p) + ',' +
           format_double(pred) + ',' + (kappa ? format_double(pred + *kappa) : std::string()) + '\n';
  }
  return out;
}

std::string extremes_csv(const ValidatedModel& model, const LdpSummary& s, const ExtremeRecords& records) {
  std::string out = "i,value,which\n";
  auto emit = [&out](const SampledPath& path, const char* which) {
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      out += format_double(path.times[i]) + ',' + format_double(path.values[i]) + ',' + which + '\n';
    }
  };
  emit(records.max_area.path, "max_area");
  emit(records.max_height.path, "max_height");
  if (records.max_area.value > 0.0) emit(predicted_big_path(model, s, records.max_area.value), "predicted_area");
  if (records.max_height.value > 0.0) emit(predicted_high_path(s, records.max_height.value), "predicted_height");
  return out;
}

std::string campaign_json(const CampaignResult& result, const LdpSummary& s, std::uint64_t seed,
                          std::optional<double> kappa) {
  ordered_json j;
  j["n_paths"] = result.summary.n_paths;
  j["seed"] = seed;
  j["n_truncated"] = result.summary.n_truncated;
  j["kappa"] = kappa ? ordered_json(*kappa) : ordered_json(nullptr);
  j["K"] = s.K;
  j["lambda_star"] = s.lambda_star;
  j["x_star"] = s.x_star;
  j["delta"] = s.delta;
  j["mean_tau"] = result.summary.mean_tau;
  j["n_positive_area"] = result.summary.n_positive_area;
  j["mean_positive_area"] = result.summary.mean_positive_area;
  if (result.extremes) {
    const auto& e = *result.extremes;
    j["max_area"] = {{"value", e.max_area.value}, {"path_index", e.max_area.path_index}, {"tau", e.max_area.tau},
                     {"predicted_tau", e.max_area.value > 0 ? number_or_null(predicted_duration(s, e.max_area.value))
                                                            : ordered_json(nullptr)}};
    j["max_height"] = {{"value", e.max_height.value},
                       {"path_index", e.max_height.path_index},
                       {"tau", e.max_height.tau}};
  }
  return j.dump(2) + "\n";
}

std::string estimate_json(const EstimateReport& r) {
  ordered_json j;
  j["kind"] = std::string(to_string(r.kind));
  j["n"] = r.n;
  j["lambda_star_hat"] = r.lambda_star_hat;
  j["K_hat"] = r.K_hat;
  j["integral_lambda"] = r.integral_lambda;
  j["diagnostics"] = {{"drift_estimate", r.drift_estimate}, {"bracket_lo", r.bracket_lo},
                      {"bracket_hi", r.bracket_hi},         {"theta_max", r.theta_max},
                      {"distinct_values", r.distinct_values}, {"min_value", r.min_value},
                      {"max_value", r.max_value}};
  return j.dump(2) + "\n";
}

}  // namespace busyburst
