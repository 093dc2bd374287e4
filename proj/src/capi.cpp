#include "curvegroups/curvegroups.h"

#include <fstream>
#include <new>
#include <string>
#include <variant>

#include "curvegroups/errors.hpp"
#include "curvegroups/hypothesis_test.hpp"
#include "curvegroups/io.hpp"
#include "curvegroups/k_selection.hpp"
#include "curvegroups/simulation.hpp"

struct cg_collection {
  curvegroups::CurveCollection value;
};

struct cg_result {
  std::variant<curvegroups::CurveEstimateMatrix, curvegroups::TestResult,
               curvegroups::KSelectionTrace, curvegroups::MonteCarloReport>
      value;
};

namespace {

using namespace curvegroups;

thread_local std::string last_error;

template <class Fn>
cg_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    last_error.clear();
    return CG_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<cg_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CG_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CG_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return CG_INTERNAL_ERROR;
  }
}

const char* need_text(const char* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string("null ") + what);
  return p;
}

template <class T>
T& need(T* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string("null ") + what);
  return *p;
}

KernelFunction kernel_of(cg_kernel k) {
  switch (k) {
    case CG_KERNEL_EPANECHNIKOV: return KernelFunction(KernelType::Epanechnikov);
    case CG_KERNEL_GAUSSIAN: return KernelFunction(KernelType::Gaussian);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kernel");
}

Norm norm_of(cg_norm n) {
  switch (n) {
    case CG_NORM_CM: return Norm::CM;
    case CG_NORM_KS: return Norm::KS;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown norm");
}

BinningPolicy binning_of(const cg_fit_options& o) {
  BinningPolicy b;
  b.enabled = o.binning != 0;
  return b;
}

EvaluationGrid grid_of(const CurveCollection& c, const cg_fit_options& o) {
  if (o.grid_size < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
  if (!(o.grid_trim >= 0.0 && o.grid_trim < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "grid trim must lie in [0, 0.5)");
  }
  return common_grid(c, o.grid_size, o.grid_trim);
}

TestConfig config_of(const cg_test_options& o) {
  TestConfig cfg;
  cfg.norm = norm_of(o.norm);
  cfg.kernel = kernel_of(o.fit.kernel);
  cfg.binning = binning_of(o.fit);
  cfg.bandwidth_candidates = o.fit.candidates;
  cfg.bootstrap.replicates = o.boot;
  cfg.bootstrap.alpha = o.alpha;
  cfg.bootstrap.seed = o.seed;
  cfg.bootstrap.reselect_bandwidth = o.reselect_bandwidth != 0;
  cfg.restarts = o.restarts;
  cfg.threads = o.threads == 0 ? 1 : o.threads;
  cfg.validate();
  return cfg;
}

const CurveEstimateMatrix* estimates_of(const cg_result& r) {
  if (auto* m = std::get_if<CurveEstimateMatrix>(&r.value)) return m;
  if (auto* t = std::get_if<TestResult>(&r.value)) return t->estimates ? &*t->estimates : nullptr;
  if (auto* s = std::get_if<KSelectionTrace>(&r.value)) {
    if (!s->tests.empty() && s->tests.front().estimates) return &*s->tests.front().estimates;
  }
  return nullptr;
}

const TestResult& decisive_test(const cg_result& r) {
  if (auto* t = std::get_if<TestResult>(&r.value)) return *t;
  if (auto* s = std::get_if<KSelectionTrace>(&r.value)) return s->selected();
  throw Error(ErrorCode::InvalidArgument, "result holds no test");
}

std::ofstream open_output(const char* path) {
  if (!path) throw Error(ErrorCode::InvalidArgument, "null path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, std::string("cannot write ") + path);
  return out;
}

void finish(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, std::string("write failed for ") + path);
}

}  // namespace

extern "C" {

const char* cg_last_error(void) { return last_error.c_str(); }

const char* cg_status_name(cg_status status) {
  if (status == CG_OK) return "Ok";
  if (status == CG_INTERNAL_ERROR) return "InternalError";
  return to_string(static_cast<ErrorCode>(status));
}

const char* cg_version(void) { return "0.1.0"; }

cg_status cg_collection_read_csv(const char* path, cg_collection** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    auto c = read_curves_csv(need_text(path, "path"));
    *out = new cg_collection{std::move(c)};
  });
}

cg_status cg_collection_read_tunnel(const char* path, cg_tunnel_format format,
                                    cg_collection** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    const auto f = format == CG_TUNNEL_POLAR ? TunnelFormat::Polar : TunnelFormat::Cartesian;
    auto c = read_tunnel_csv(need_text(path, "path"), f);
    *out = new cg_collection{std::move(c)};
  });
}

cg_status cg_collection_create(size_t curves, const char* const* ids, const size_t* sizes,
                               const double* const* xs, const double* const* ys,
                               cg_collection** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    if (curves > 0 && (!ids || !sizes || !xs || !ys)) {
      throw Error(ErrorCode::InvalidArgument, "null curve arrays");
    }
    std::vector<CurveSample> raw(curves);
    for (size_t j = 0; j < curves; ++j) {
      raw[j].curve_id = need_text(ids[j], "curve id");
      if (sizes[j] > 0 && (!xs[j] || !ys[j])) {
        throw Error(ErrorCode::InvalidArgument, "null data for curve " + raw[j].curve_id);
      }
      raw[j].xs.assign(xs[j], xs[j] + sizes[j]);
      raw[j].ys.assign(ys[j], ys[j] + sizes[j]);
    }
    *out = new cg_collection{validate_collection(std::move(raw))};
  });
}

cg_status cg_collection_curve_count(const cg_collection* c, size_t* out) {
  return guarded([&] { need(out, "output") = need(c, "collection").value.curve_count(); });
}

cg_status cg_collection_total_size(const cg_collection* c, size_t* out) {
  return guarded([&] { need(out, "output") = need(c, "collection").value.total_size(); });
}

void cg_collection_destroy(cg_collection* c) { delete c; }

void cg_fit_options_init(cg_fit_options* o) {
  if (!o) return;
  o->grid_size = 100;
  o->grid_trim = 0.025;
  o->kernel = CG_KERNEL_EPANECHNIKOV;
  o->candidates = 30;
  o->binning = 1;
}

void cg_test_options_init(cg_test_options* o) {
  if (!o) return;
  cg_fit_options_init(&o->fit);
  o->norm = CG_NORM_CM;
  o->boot = 500;
  o->alpha = 0.05;
  o->seed = 0;
  o->reselect_bandwidth = 1;
  o->restarts = 20;
  o->threads = 1;
}

void cg_simulate_options_init(cg_simulate_options* o) {
  if (!o) return;
  o->scenario = "three:R1:V1";
  o->a = 0.0;
  o->heteroscedastic = 0;
  o->n = nullptr;
  o->n_count = 0;
  o->runs = 200;
  o->select_k = -1;
  o->k = 0;
  o->k_max = 0;
  o->noise_as_sd = 0;
  cg_test_options_init(&o->test);
  o->test.boot = 200;
}

cg_status cg_fit(const cg_collection* c, const cg_fit_options* o, cg_result** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    const auto& coll = need(c, "collection").value;
    const auto& opt = need(o, "options");
    if (opt.candidates < 1) throw Error(ErrorCode::InvalidArgument, "need candidates >= 1");
    auto m = estimate_curves(coll, grid_of(coll, opt), kernel_of(opt.kernel), binning_of(opt),
                             opt.candidates);
    *out = new cg_result{std::move(m)};
  });
}

cg_status cg_test(const cg_collection* c, size_t k, const cg_test_options* o, cg_result** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    const auto& coll = need(c, "collection").value;
    const auto& opt = need(o, "options");
    auto r = test_h0k(coll, k, config_of(opt), grid_of(coll, opt.fit));
    *out = new cg_result{std::move(r)};
  });
}

cg_status cg_autok(const cg_collection* c, size_t k_max, const cg_test_options* o,
                   cg_result** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    const auto& coll = need(c, "collection").value;
    const auto& opt = need(o, "options");
    if (k_max == 0) k_max = coll.curve_count();
    auto t = select_k(coll, k_max, config_of(opt), grid_of(coll, opt.fit));
    *out = new cg_result{std::move(t)};
  });
}

cg_status cg_simulate(const cg_simulate_options* o, cg_result** out) {
  return guarded([&] {
    need(out, "output");
    *out = nullptr;
    const auto& opt = need(o, "options");
    ScenarioSpec spec = parse_scenario(need_text(opt.scenario, "scenario"));
    std::vector<std::size_t> n;
    if (opt.n_count > 0) {
      need(opt.n, "sizes");
      n.assign(opt.n, opt.n + opt.n_count);
    }
    switch (spec.family) {
      case ScenarioFamily::ThirtyCurve:
        spec.a = opt.a;
        spec.variance_mode =
            opt.heteroscedastic ? VarianceMode::Heteroscedastic : VarianceMode::Homoscedastic;
        if (n.size() == 1) {
          spec.total_size = n.front();
        } else if (!n.empty()) {
          spec.sample_sizes = n;
        }
        break;
      case ScenarioFamily::ThreeCurve:
      case ScenarioFamily::HundredTwentyCurve:
        if (!n.empty()) spec.sample_sizes = n;
        spec.noise_as_sd = opt.noise_as_sd != 0;
        break;
    }
    MonteCarloConfig cfg;
    cfg.runs = opt.runs;
    cfg.test = config_of(opt.test);
    cfg.seed = opt.test.seed;
    cfg.grid_size = opt.test.fit.grid_size;
    const bool select = opt.select_k < 0 ? spec.family == ScenarioFamily::HundredTwentyCurve
                                         : opt.select_k != 0;
    cfg.metric = select ? MonteCarloMetric::Selection : MonteCarloMetric::Rejection;
    cfg.k = opt.k != 0 ? opt.k : (spec.family == ScenarioFamily::ThirtyCurve ? 5 : 1);
    cfg.k_max = opt.k_max;
    auto report = run_monte_carlo(spec, cfg);
    *out = new cg_result{std::move(report)};
  });
}

cg_status cg_result_kind_of(const cg_result* r, cg_result_kind* out) {
  return guarded([&] {
    need(out, "output") = static_cast<cg_result_kind>(need(r, "result").value.index());
  });
}

cg_status cg_result_k(const cg_result* r, size_t* out) {
  return guarded([&] {
    const auto& res = need(r, "result");
    if (auto* s = std::get_if<KSelectionTrace>(&res.value)) {
      need(out, "output") = s->selected_k;
      return;
    }
    need(out, "output") = decisive_test(res).k;
  });
}

cg_status cg_result_statistic(const cg_result* r, double* out) {
  return guarded([&] { need(out, "output") = decisive_test(need(r, "result")).statistic; });
}

cg_status cg_result_p_value(const cg_result* r, double* out) {
  return guarded([&] { need(out, "output") = decisive_test(need(r, "result")).p_value; });
}

cg_status cg_result_reject(const cg_result* r, int* out) {
  return guarded([&] { need(out, "output") = decisive_test(need(r, "result")).reject ? 1 : 0; });
}

cg_status cg_result_saturated(const cg_result* r, int* out) {
  return guarded([&] {
    const auto* s = std::get_if<KSelectionTrace>(&need(r, "result").value);
    if (!s) throw Error(ErrorCode::InvalidArgument, "result is not a K selection");
    need(out, "output") = s->saturated ? 1 : 0;
  });
}

cg_status cg_result_rate(const cg_result* r, double* out) {
  return guarded([&] {
    const auto* m = std::get_if<MonteCarloReport>(&need(r, "result").value);
    if (!m) throw Error(ErrorCode::InvalidArgument, "result is not a Monte Carlo report");
    need(out, "output") = m->rejection_rate;
  });
}

cg_status cg_result_assignment(const cg_result* r, size_t* labels, size_t capacity,
                               size_t* len) {
  return guarded([&] {
    const auto& res = need(r, "result");
    const Partition& p = std::holds_alternative<KSelectionTrace>(res.value)
                             ? std::get<KSelectionTrace>(res.value).final_partition
                             : decisive_test(res).partition;
    need(len, "length") = p.size();
    if (capacity > 0) need(labels, "labels");
    for (size_t j = 0; j < p.size() && j < capacity; ++j) labels[j] = p.group_of(j) + 1;
  });
}

cg_status cg_result_bandwidth(const cg_result* r, size_t j, double* out) {
  return guarded([&] {
    const auto* m = estimates_of(need(r, "result"));
    if (!m) throw Error(ErrorCode::InvalidArgument, "result holds no curve estimates");
    if (j >= m->bandwidths.size()) throw Error(ErrorCode::InvalidArgument, "curve out of range");
    need(out, "output") = m->bandwidths[j];
  });
}

cg_status cg_result_curve_values(const cg_result* r, size_t j, double* values, size_t capacity,
                                 size_t* len) {
  return guarded([&] {
    const auto* m = estimates_of(need(r, "result"));
    if (!m) throw Error(ErrorCode::InvalidArgument, "result holds no curve estimates");
    if (j >= m->values.rows()) throw Error(ErrorCode::InvalidArgument, "curve out of range");
    const auto row = m->values.row(j);
    need(len, "length") = row.size();
    if (capacity > 0) need(values, "values");
    for (size_t q = 0; q < row.size() && q < capacity; ++q) values[q] = row[q];
  });
}

cg_status cg_result_write_json(const cg_result* r, const char* path) {
  return guarded([&] {
    const auto& res = need(r, "result");
    const auto j = std::visit([](const auto& v) { return to_json(v); }, res.value);
    write_json_file(j, need_text(path, "path"));
  });
}

cg_status cg_result_write_csv(const cg_result* r, const char* path) {
  return guarded([&] {
    const auto& res = need(r, "result");
    auto out = open_output(path);
    if (auto* m = std::get_if<MonteCarloReport>(&res.value)) {
      write_report_csv(*m, out);
    } else {
      const auto* est = estimates_of(res);
      if (!est) throw Error(ErrorCode::InvalidArgument, "result holds no group labels");
      const Partition& p = std::holds_alternative<KSelectionTrace>(res.value)
                               ? std::get<KSelectionTrace>(res.value).final_partition
                               : decisive_test(res).partition;
      write_labels_csv(est->curve_ids, p, out);
    }
    finish(out, path);
  });
}

cg_status cg_result_write_profile(const cg_result* r, const char* path) {
  return guarded([&] {
    const auto& t = decisive_test(need(r, "result"));
    if (!t.pooled) throw Error(ErrorCode::InvalidArgument, "result holds no pooled fits");
    auto out = open_output(path);
    write_profile_csv(*t.pooled, out);
    finish(out, path);
  });
}

void cg_result_destroy(cg_result* r) { delete r; }

}  // extern "C"
