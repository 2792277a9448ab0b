#include "ues/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ues/errors.h"

namespace ues {

const char* const kTraceCsvHeader =
    "k,fevals,gevals,proxevals,cpu_ns,f_val,phi_star,gap,ratio,alpha,lk,"
    "lambda_cum";

std::string_view synthetic_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kExtremalQuadratic:
      return "extremal-quadratic";
    case SyntheticKind::kDiagonalQuadratic:
      return "diagonal-quadratic";
    case SyntheticKind::kRandomLogistic:
      return "random-logistic";
  }
  return "?";
}

SyntheticKind parse_synthetic(std::string_view name) {
  for (auto k : {SyntheticKind::kExtremalQuadratic,
                 SyntheticKind::kDiagonalQuadratic,
                 SyntheticKind::kRandomLogistic}) {
    if (synthetic_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown synthetic problem '" +
                              std::string(name) + "'");
}

std::shared_ptr<const SparseDataset> make_gaussian_dataset(
    std::size_t rows, std::size_t cols, std::uint64_t seed,
    bool classification, double label_flip) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("gaussian dataset needs rows, cols > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec w(cols);
  for (auto& wi : w) wi = normal(rng);
  std::vector<Vec> dense(rows, Vec(cols));
  Vec labels(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      dense[i][j] = normal(rng);
      z += dense[i][j] * w[j];
    }
    const double noise = normal(rng);
    if (classification) {
      double y = z >= 0.0 ? 1.0 : -1.0;
      if (unif(rng) < label_flip) y = -y;
      labels[i] = y;
    } else {
      labels[i] = z / std::sqrt(static_cast<double>(cols)) + 0.1 * noise;
    }
  }
  return std::make_shared<const SparseDataset>(
      SparseDataset::from_dense(dense, std::move(labels)));
}

SyntheticProblem make_synthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw std::invalid_argument("synthetic: dim must be > 0");
  if (!(spec.mu > 0.0)) throw std::invalid_argument("synthetic: mu must be > 0");
  switch (spec.kind) {
    case SyntheticKind::kExtremalQuadratic: {
      return {make_diagonal_quadratic(Vec(spec.dim, spec.mu)),
              Vec(spec.dim, 1.0), nullptr};
    }
    case SyntheticKind::kDiagonalQuadratic: {
      if (!(spec.l >= spec.mu) || !std::isfinite(spec.l)) {
        throw std::invalid_argument("synthetic: spectrum needs mu <= l");
      }
      if (spec.dim == 1 && spec.l != spec.mu) {
        throw std::invalid_argument(
            "synthetic: a 1-D spectrum cannot span [mu, l] with mu < l");
      }
      Vec diag(spec.dim);
      for (std::size_t i = 0; i < spec.dim; ++i) {
        const double t = spec.dim == 1 ? 0.0
                                       : static_cast<double>(i) /
                                             static_cast<double>(spec.dim - 1);
        diag[i] = spec.mu * std::pow(spec.l / spec.mu, t);
      }
      // Pin the endpoints so mu and L are reported exactly.
      diag.front() = spec.mu;
      diag.back() = spec.dim == 1 ? spec.mu : spec.l;
      return {make_diagonal_quadratic(std::move(diag)), Vec(spec.dim, 1.0),
              nullptr};
    }
    case SyntheticKind::kRandomLogistic: {
      auto data = make_gaussian_dataset(spec.rows, spec.dim, spec.seed, true);
      ErmSpec erm;
      erm.loss = Loss::kLogistic;
      erm.lambda1 = spec.mu;
      erm.dataset = data;
      return {build_logistic(erm), Vec(spec.dim, 0.0), data};
    }
  }
  throw std::invalid_argument("synthetic: unknown kind");
}

std::string AlgoChoice::label() const {
  std::string s(algorithm_name(algo));
  if (adaptive) s += "_adaptive";
  return s;
}

ResolvedProblem resolve_problem(const RunPlan& plan) {
  if (const auto* ds = std::get_if<DatasetProblem>(&plan.problem)) {
    ParseOptions opts;
    opts.dim_override = ds->dim_override;
    opts.normalize_labels = ds->loss != Loss::kLeastSquares;
    auto data = std::make_shared<const SparseDataset>(load_libsvm(ds->path, opts));
    ErmSpec erm;
    erm.loss = ds->loss;
    erm.lambda1 = ds->lambda1;
    erm.lambda2 = ds->lambda2;
    erm.literal_paper_losses = ds->literal_paper_losses;
    erm.dataset = data;
    if (ds->lambda2 > 0.0 && ds->loss != Loss::kLeastSquares) {
      throw std::invalid_argument("lambda2 > 0 is only defined for least-squares");
    }
    CompositeObjective obj = build_objective(erm);
    Vec x0 = plan.x0 ? *plan.x0 : Vec(obj.dim(), 0.0);
    std::ostringstream desc;
    desc << ds->path << " (" << data->rows() << "x" << data->cols() << ", "
         << loss_name(ds->loss) << ", lambda1=" << ds->lambda1
         << ", lambda2=" << ds->lambda2 << ")";
    return {std::move(obj), std::move(x0), desc.str()};
  }
  const auto& syn = std::get<SyntheticSpec>(plan.problem);
  SyntheticProblem p = make_synthetic(syn);
  std::ostringstream desc;
  desc << synthetic_name(syn.kind) << " (dim=" << syn.dim;
  if (syn.kind == SyntheticKind::kRandomLogistic) desc << ", rows=" << syn.rows;
  desc << ", seed=" << syn.seed << ")";
  Vec x0 = plan.x0 ? *plan.x0 : std::move(p.x0);
  return {std::move(p.objective), std::move(x0), desc.str()};
}

namespace {

void put_number(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void validate_plan(const RunPlan& plan, const ResolvedProblem& problem) {
  if (plan.algorithms.empty()) {
    throw std::invalid_argument("run plan needs at least one algorithm");
  }
  if (plan.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  plan.cfg.validate();
  require_same_dim(problem.x0.size(), problem.objective.dim(), "x0");
  for (const auto& c : plan.algorithms) {
    if (!problem.objective.is_smooth() && !is_composite(c.algo)) {
      throw std::invalid_argument(c.label() +
                                  " cannot handle a nonsmooth term; use "
                                  "cuesa or acuesa");
    }
    if (c.algo == Algorithm::kGradientDescent && c.adaptive) {
      throw std::invalid_argument("gd has no adaptive variant");
    }
  }
}

}  // namespace

PlanSummary run_plan(const RunPlan& plan) {
  return run_plan(plan, resolve_problem(plan));
}

PlanSummary run_plan(const RunPlan& plan, const ResolvedProblem& problem) {
  validate_plan(plan, problem);
  const auto& obj = problem.objective;
  PlanSummary summary;
  summary.problem = problem.description;
  summary.mu = obj.mu();
  summary.lipschitz = obj.lipschitz();

  const bool needs_ref =
      std::any_of(plan.algorithms.begin(), plan.algorithms.end(),
                  [](const AlgoChoice& c) {
                    return c.algo == Algorithm::kGradientDescent;
                  });
  if (needs_ref) {
    if (plan.cfg.f_ref) {
      summary.f_ref = plan.cfg.f_ref;
    } else {
      SolverConfig ref_cfg = plan.cfg;
      ref_cfg.adaptive = false;
      ref_cfg.epsilon = plan.cfg.epsilon * 1e-3;
      ref_cfg.max_iters = std::max<std::int64_t>(plan.cfg.max_iters, 1000000);
      const SolveResult ref = acuesa(obj, problem.x0, ref_cfg);
      summary.f_ref = ref.f_val;
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(plan.out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + plan.out_dir.string() + ": " +
                             ec.message());
  }

  summary.runs.resize(plan.algorithms.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t i = next++; i < plan.algorithms.size(); i = next++) {
      try {
        const AlgoChoice& choice = plan.algorithms[i];
        SolverConfig cfg = plan.cfg;
        cfg.adaptive = choice.adaptive;
        if (choice.algo == Algorithm::kGradientDescent) cfg.f_ref = summary.f_ref;
        const auto t0 = std::chrono::steady_clock::now();
        const SolveResult res = solve(choice.algo, obj, problem.x0, cfg);
        const auto t1 = std::chrono::steady_clock::now();

        RunSummary& rs = summary.runs[i];
        rs.choice = choice;
        rs.certified = res.certified;
        rs.reached_target = res.reached_target;
        rs.iterations = res.iterations;
        rs.counters = res.counters;
        rs.wall_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        rs.f_val = res.f_val;
        rs.gap = res.gap;
        rs.csv_path = plan.out_dir / (choice.label() + ".csv");
        std::ofstream out(rs.csv_path);
        if (!out) throw std::runtime_error("cannot write " + rs.csv_path.string());
        write_trace_csv(out, res.trace);
        if (!out) throw std::runtime_error("write failed: " + rs.csv_path.string());
        if (plan.write_ratio_reports && res.trace.size() >= 2) {
          const auto path = plan.out_dir / (choice.label() + "_ratio.csv");
          std::ofstream rout(path);
          write_ratio_report(rout, ratio_report(res.trace, obj.mu(),
                                                obj.lipschitz()));
          if (!rout) throw std::runtime_error("write failed: " + path.string());
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int threads =
      std::min<int>(plan.jobs, static_cast<int>(plan.algorithms.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (const auto& rs : summary.runs) {
    if (rs.choice.algo != Algorithm::kGradientDescent && !rs.certified) {
      summary.all_certified = false;
    }
  }
  const auto path = plan.out_dir / "summary.txt";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << summary.text();
  return summary;
}

std::string PlanSummary::text() const {
  std::ostringstream out;
  char buf[256];
  out << "problem: " << problem << "\n";
  std::snprintf(buf, sizeof(buf), "mu: %.17g\nL: %.17g\n", mu, lipschitz);
  out << buf;
  if (f_ref) {
    std::snprintf(buf, sizeof(buf), "f_ref: %.17g\n", *f_ref);
    out << buf;
  }
  out << "run,status,iterations,fevals,gevals,proxevals,wall_ms,f_val,gap\n";
  for (const auto& r : runs) {
    const char* status =
        r.choice.algo == Algorithm::kGradientDescent
            ? (r.reached_target ? "reached-target" : "max-iters")
            : (r.certified ? "certified" : "not-certified");
    std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%lld,%lld,%lld,%.3f,%.17g,%.17g\n",
                  r.choice.label().c_str(), status,
                  static_cast<long long>(r.iterations),
                  static_cast<long long>(r.counters.fevals),
                  static_cast<long long>(r.counters.gevals),
                  static_cast<long long>(r.counters.proxevals),
                  static_cast<double>(r.wall_ns) * 1e-6, r.f_val, r.gap);
    out << buf;
  }
  return out.str();
}

void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace) {
    out << r.k << ',' << r.fevals << ',' << r.gevals << ',' << r.proxevals
        << ',' << r.cpu_ns << ',';
    put_number(out, r.f_val);
    out << ',';
    put_number(out, r.phi_star);
    out << ',';
    put_number(out, r.gap);
    out << ',';
    if (r.ratio) put_number(out, *r.ratio);
    out << ',';
    put_number(out, r.alpha);
    out << ',';
    put_number(out, r.lk);
    out << ',';
    put_number(out, r.lambda_cum);
    out << '\n';
  }
}

RatioReport ratio_report(const std::vector<IterationRecord>& trace, double mu,
                         double lipschitz) {
  if (trace.size() < 2) {
    throw std::invalid_argument("ratio_report: need at least two trace rows");
  }
  if (!(mu > 0.0) || !(lipschitz >= mu)) {
    throw std::invalid_argument("ratio_report: need 0 < mu <= L");
  }
  RatioReport rep;
  rep.plain_rate = 1.0 - mu / lipschitz;
  rep.accelerated_rate = 1.0 - std::sqrt(mu / lipschitz);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& r = trace[i];
    RatioRow row;
    row.k = r.k;
    row.ratio = r.ratio;
    if (!std::isnan(r.alpha)) row.bound = 1.0 - r.alpha;
    if (row.ratio && row.bound && *row.ratio > *row.bound + 1e-12) {
      row.flagged = true;
      ++rep.flags;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_ratio_report(std::ostream& out, const RatioReport& report) {
  out << "k,ratio,bound,rate_plain,rate_accelerated,flag\n";
  for (const auto& r : report.rows) {
    out << r.k << ',';
    if (r.ratio) put_number(out, *r.ratio);
    out << ',';
    if (r.bound) put_number(out, *r.bound);
    out << ',';
    put_number(out, report.plain_rate);
    out << ',';
    put_number(out, report.accelerated_rate);
    out << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace ues
