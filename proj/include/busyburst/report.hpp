#pragma once

#include <optional>
#include <span>
#include <string>

#include "busyburst/est.hpp"
#include "busyburst/ldp.hpp"
#include "busyburst/sim.hpp"

namespace busyburst {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

/// Everything `analyze` reports about a model.
struct AnalysisReport {
  LdpSummary summary;
  SymmetryReport symmetry;
  double psi_star_integral;
  double hit_level_exponent;  // for the requested height
  double height;
};

AnalysisReport analyze(const ValidatedModel& model, double height);

std::string analysis_json(const ValidatedModel& model, const AnalysisReport& report);

/// Lambda on [0, lambda*], psi* on [0, 1] and varphi* for the report height,
/// each on `points` uniform points.
std::vector<SampledPath> analysis_paths(const ValidatedModel& model, const AnalysisReport& report,
                                        std::size_t points = 1001);

/// CSV with header `t,value,label`.
std::string paths_csv(std::span<const SampledPath> paths);

/// CSV with header `b,count,log_p_emp,log_p_pred,log_p_pred_shifted`; rows
/// with a zero count are omitted and the shifted column is empty without kappa.
std::string tail_csv(const TailTable& table, double K, std::optional<double> kappa);

/// CSV with header `i,value,which`: the record paths and the predictions
/// parameterized by their observed area and height.
std::string extremes_csv(const ValidatedModel& model, const LdpSummary& s, const ExtremeRecords& records);

std::string campaign_json(const CampaignResult& result, const LdpSummary& s, std::uint64_t seed,
                          std::optional<double> kappa);

std::string estimate_json(const EstimateReport& report);

}  // namespace busyburst
