#include "busyburst/c/busyburst.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "busyburst/error.hpp"
#include "busyburst/est.hpp"
#include "busyburst/ldp.hpp"
#include "busyburst/model.hpp"
#include "busyburst/report.hpp"
#include "busyburst/sim.hpp"

struct bb_model {
  busyburst::ValidatedModel model;
};

struct bb_campaign {
  busyburst::ValidatedModel model;
  busyburst::LdpSummary summary;
  std::uint64_t seed;
  busyburst::CampaignResult result;
  std::optional<double> kappa;
};

namespace {

using busyburst::ErrorCode;

thread_local std::string last_error;

bb_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return BB_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return BB_ERR_PARSE;
    case ErrorCode::Io: return BB_ERR_IO;
    case ErrorCode::InvalidParameter: return BB_ERR_INVALID_PARAMETER;
    case ErrorCode::InvalidProbability: return BB_ERR_INVALID_PROBABILITY;
    case ErrorCode::NonNegativeDrift: return BB_ERR_NON_NEGATIVE_DRIFT;
    case ErrorCode::ReducibleChain: return BB_ERR_REDUCIBLE_CHAIN;
    case ErrorCode::DuplicateStateValue: return BB_ERR_DUPLICATE_STATE_VALUE;
    case ErrorCode::NonConvergence: return BB_ERR_NON_CONVERGENCE;
    case ErrorCode::NoPositiveRoot: return BB_ERR_NO_POSITIVE_ROOT;
    case ErrorCode::OutOfSupport: return BB_ERR_OUT_OF_SUPPORT;
    case ErrorCode::ExcessiveTruncation: return BB_ERR_EXCESSIVE_TRUNCATION;
    case ErrorCode::EmptyTable: return BB_ERR_EMPTY_TABLE;
    case ErrorCode::InsufficientData: return BB_ERR_INSUFFICIENT_DATA;
    case ErrorCode::SingleState: return BB_ERR_SINGLE_STATE;
    case ErrorCode::NonNegativeSampleDrift: return BB_ERR_NON_NEGATIVE_SAMPLE_DRIFT;
  }
  return BB_ERR_INTERNAL;
}

template <class F>
bb_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return BB_OK;
  } catch (const busyburst::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BB_ERR_INTERNAL;
  }
}

bb_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return BB_ERR_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

busyburst::SeriesKind to_kind(bb_series_kind kind) {
  if (kind == BB_SERIES_IID) return busyburst::SeriesKind::iid;
  if (kind == BB_SERIES_MARKOV) return busyburst::SeriesKind::markov;
  throw busyburst::Error(ErrorCode::InvalidArgument, "unknown series kind");
}

void fill(const busyburst::EstimateReport& r, bb_estimate* out) {
  out->lambda_star_hat = r.lambda_star_hat;
  out->K_hat = r.K_hat;
  out->integral_lambda = r.integral_lambda;
  out->n = r.n;
  out->kind = r.kind == busyburst::SeriesKind::iid ? BB_SERIES_IID : BB_SERIES_MARKOV;
  out->drift_estimate = r.drift_estimate;
  out->bracket_lo = r.bracket_lo;
  out->bracket_hi = r.bracket_hi;
  out->theta_max = r.theta_max;
  out->distinct_values = r.distinct_values;
}

}  // namespace

namespace {

template <class MakePath>
bb_status sample_path(const bb_model* model, const double* t, size_t n, double* out, MakePath&& make) {
  if (!model || ((!t || !out) && n > 0)) return null_argument("model/t/out");
  return guarded([&] {
    const auto s = busyburst::busy_exponent_K(model->model);
    const auto path = make(s, std::span<const double>(t, n));
    std::copy(path.values.begin(), path.values.end(), out);
  });
}

}  // namespace

extern "C" {

const char* bb_version(void) { return BUSYBURST_VERSION; }

const char* bb_status_name(bb_status status) {
  switch (status) {
    case BB_OK: return "Ok";
    case BB_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  static const ErrorCode codes[] = {
      ErrorCode::InvalidArgument,     ErrorCode::Parse,           ErrorCode::Io,
      ErrorCode::InvalidParameter,    ErrorCode::InvalidProbability, ErrorCode::NonNegativeDrift,
      ErrorCode::ReducibleChain,      ErrorCode::DuplicateStateValue, ErrorCode::NonConvergence,
      ErrorCode::NoPositiveRoot,      ErrorCode::OutOfSupport,    ErrorCode::ExcessiveTruncation,
      ErrorCode::EmptyTable,          ErrorCode::InsufficientData, ErrorCode::SingleState,
      ErrorCode::NonNegativeSampleDrift};
  for (auto code : codes) {
    if (to_status(code) == status) return busyburst::to_string(code).data();
  }
  return "Unknown";
}

const char* bb_last_error(void) { return last_error.c_str(); }

void bb_string_free(char* s) { std::free(s); }

bb_status bb_model_parse(const char* json, bb_model** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new bb_model{busyburst::validate(busyburst::parse_model_json(json))}; });
}

bb_status bb_model_load(const char* path, bb_model** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new bb_model{busyburst::load_model_file(path)}; });
}

void bb_model_free(bb_model* model) { delete model; }

const char* bb_model_kind(const bb_model* model) { return model ? model->model.kind().data() : nullptr; }

bb_status bb_model_drift(const bb_model* model, double* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] { *out = busyburst::drift(model->model); });
}

bb_status bb_model_scgf(const bb_model* model, double theta, double* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] { *out = busyburst::scgf(model->model, theta); });
}

bb_status bb_model_scgf_derivative(const bb_model* model, double theta, double* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] { *out = busyburst::scgf_derivative(model->model, theta); });
}

bb_status bb_model_sample(const bb_model* model, uint64_t seed, uint64_t stream_id, double* out, size_t n) {
  if (!model || (!out && n > 0)) return null_argument("model/out");
  return guarded([&] {
    auto stream = busyburst::sample_increments(model->model, seed, stream_id);
    for (size_t i = 0; i < n; ++i) out[i] = stream.next();
  });
}

bb_status bb_ldp_summary(const bb_model* model, bb_summary* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] {
    const auto s = busyburst::busy_exponent_K(model->model);
    *out = bb_summary{s.delta, s.x_star, s.lambda_star, s.K, s.integral_lambda};
  });
}

bb_status bb_rate_function(const bb_model* model, double x, double* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] { *out = busyburst::rate_function(model->model, x); });
}

bb_status bb_symmetry_check(const bb_model* model, bb_symmetry* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] {
    const auto r = busyburst::check_symmetry(model->model, busyburst::busy_exponent_K(model->model));
    *out = bb_symmetry{r.symmetric ? 1 : 0, r.max_defect, r.x_star_defect, r.lambda_star_defect,
                       r.identities_hold ? 1 : 0};
  });
}

bb_status bb_most_likely_duration(const bb_model* model, double b, double* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] { *out = busyburst::most_likely_duration_a(busyburst::busy_exponent_K(model->model), b); });
}


bb_status bb_psi_star(const bb_model* model, const double* t, size_t n, double* out) {
  return sample_path(model, t, n, out,
                     [&](const auto& s, auto grid) { return busyburst::psi_star(model->model, s, grid); });
}

bb_status bb_psi_star_b(const bb_model* model, double b, const double* t, size_t n, double* out) {
  return sample_path(model, t, n, out,
                     [&](const auto& s, auto grid) { return busyburst::psi_star_b(model->model, s, b, grid); });
}

bb_status bb_varphi_star(const bb_model* model, double h, const double* t, size_t n, double* out) {
  return sample_path(model, t, n, out, [&](const auto& s, auto grid) { return busyburst::varphi_star(s, h, grid); });
}

bb_status bb_analyze_report(const bb_model* model, double height, size_t points, char** summary_json,
                            char** paths_csv) {
  if (!model || !summary_json || !paths_csv) return null_argument("model/summary_json/paths_csv");
  return guarded([&] {
    if (!(height > 0.0)) throw busyburst::Error(ErrorCode::InvalidArgument, "height must be positive");
    const auto report = busyburst::analyze(model->model, height);
    const auto json = busyburst::analysis_json(model->model, report);
    const auto csv = busyburst::paths_csv(busyburst::analysis_paths(model->model, report, points));
    char* j = duplicate(json);
    try {
      *paths_csv = duplicate(csv);
    } catch (...) {
      std::free(j);
      throw;
    }
    *summary_json = j;
  });
}

bb_status bb_paths_csv(const bb_model* model, double area, double height, size_t points, char** csv) {
  if (!model || !csv) return null_argument("model/csv");
  return guarded([&] {
    const auto& m = model->model;
    const auto s = busyburst::busy_exponent_K(m);
    std::vector<busyburst::SampledPath> paths;
    paths.push_back(busyburst::psi_star(m, s, busyburst::uniform_grid(1.0, points)));
    if (area > 0.0) {
      const double a = busyburst::most_likely_duration_a(s, area);
      paths.push_back(busyburst::psi_star_b(m, s, area, busyburst::uniform_grid(a, points)));
    }
    if (height > 0.0) {
      const double end = height / s.x_star + height / s.delta;
      paths.push_back(busyburst::varphi_star(s, height, busyburst::uniform_grid(end, points)));
    }
    *csv = duplicate(busyburst::paths_csv(paths));
  });
}

bb_status bb_run_busy_period(const bb_model* model, uint64_t seed, uint64_t stream_id, uint64_t max_steps,
                             bb_outcome* out) {
  if (!model || !out) return null_argument("model/out");
  return guarded([&] {
    const auto o = busyburst::run_busy_period(model->model, seed, stream_id, max_steps);
    *out = bb_outcome{o.tau, o.area, o.max_height, o.truncated ? 1 : 0};
  });
}

bb_status bb_replay_busy_period(const double* increments, size_t n, bb_outcome* out) {
  if ((!increments && n > 0) || !out) return null_argument("increments/out");
  return guarded([&] {
    const auto o = busyburst::run_busy_period(std::span<const double>(increments, n));
    *out = bb_outcome{o.tau, o.area, o.max_height, o.truncated ? 1 : 0};
  });
}

void bb_campaign_config_init(bb_campaign_config* config) {
  if (!config) return;
  const busyburst::CampaignConfig defaults;
  *config = bb_campaign_config{defaults.n_paths,  defaults.base_seed, defaults.max_steps, nullptr, 0,
                               defaults.workers, defaults.record_extremes ? 1 : 0};
}

bb_status bb_simulate(const bb_model* model, const bb_campaign_config* config, bb_campaign** out) {
  if (!model || !config || !out) return null_argument("model/config/out");
  if (!config->thresholds && config->n_thresholds > 0) return null_argument("thresholds");
  return guarded([&] {
    busyburst::CampaignConfig c;
    c.n_paths = config->n_paths;
    c.base_seed = config->base_seed;
    c.max_steps = config->max_steps;
    c.workers = config->workers;
    c.record_extremes = config->record_extremes != 0;
    if (config->n_thresholds > 0) c.thresholds.assign(config->thresholds, config->thresholds + config->n_thresholds);
    const auto summary = busyburst::busy_exponent_K(model->model);
    auto result = busyburst::simulate_campaign(model->model, c);
    std::optional<double> kappa;
    try {
      kappa = busyburst::fit_offset_kappa(busyburst::empirical_log_tail(result.tail), summary.K);
    } catch (const busyburst::Error& e) {
      if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::EmptyTable) throw;
    }
    *out = new bb_campaign{model->model, summary, c.base_seed, std::move(result), kappa};
  });
}

void bb_campaign_free(bb_campaign* campaign) { delete campaign; }

bb_status bb_campaign_tail(const bb_campaign* campaign, size_t* n_thresholds, const double** thresholds,
                           const uint64_t** counts, uint64_t* n_paths) {
  if (!campaign || !n_thresholds || !thresholds || !counts || !n_paths) return null_argument("campaign/outputs");
  const auto& tail = campaign->result.tail;
  *n_thresholds = tail.thresholds.size();
  *thresholds = tail.thresholds.data();
  *counts = tail.counts.data();
  *n_paths = tail.n_paths;
  return BB_OK;
}

bb_status bb_campaign_kappa(const bb_campaign* campaign, double* out) {
  if (!campaign || !out) return null_argument("campaign/out");
  if (!campaign->kappa) {
    last_error = "fewer than 3 tail thresholds reached a count of 100";
    return BB_ERR_INSUFFICIENT_DATA;
  }
  *out = *campaign->kappa;
  return BB_OK;
}

bb_status bb_campaign_tail_csv(const bb_campaign* campaign, char** out) {
  if (!campaign || !out) return null_argument("campaign/out");
  return guarded(
      [&] { *out = duplicate(busyburst::tail_csv(campaign->result.tail, campaign->summary.K, campaign->kappa)); });
}

bb_status bb_campaign_extremes_csv(const bb_campaign* campaign, char** out) {
  if (!campaign || !out) return null_argument("campaign/out");
  return guarded([&] {
    if (!campaign->result.extremes) {
      *out = duplicate("i,value,which\n");
      return;
    }
    *out = duplicate(busyburst::extremes_csv(campaign->model, campaign->summary, *campaign->result.extremes));
  });
}

bb_status bb_campaign_summary_json(const bb_campaign* campaign, char** out) {
  if (!campaign || !out) return null_argument("campaign/out");
  return guarded([&] {
    *out = duplicate(busyburst::campaign_json(campaign->result, campaign->summary, campaign->seed, campaign->kappa));
  });
}

bb_status bb_estimate_values(const double* values, size_t n, bb_series_kind kind, bb_estimate* out, char** json) {
  if ((!values && n > 0) || !out) return null_argument("values/out");
  return guarded([&] {
    const busyburst::SampleSeries series{std::vector<double>(values, values + n), to_kind(kind)};
    const auto report = busyburst::estimate(series);
    fill(report, out);
    if (json) *json = duplicate(busyburst::estimate_json(report));
  });
}

bb_status bb_estimate_file(const char* path, bb_series_kind kind, bb_estimate* out, char** json) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] {
    const busyburst::SampleSeries series{busyburst::read_series_file(path), to_kind(kind)};
    const auto report = busyburst::estimate(series);
    fill(report, out);
    if (json) *json = duplicate(busyburst::estimate_json(report));
  });
}

}  // extern "C"
