#pragma once
// Experiment harness: builds a problem, runs a set of solvers from a common
// starting point and writes one CSV trace per run plus a text summary.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ues/dataio.h"
#include "ues/problems.h"
#include "ues/solvers.h"

namespace ues {

enum class SyntheticKind { kExtremalQuadratic, kDiagonalQuadratic,
                           kRandomLogistic };

std::string_view synthetic_name(SyntheticKind kind);
SyntheticKind parse_synthetic(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kDiagonalQuadratic;
  std::size_t dim = 2;
  std::size_t rows = 100;  // random-logistic only
  double mu = 1.0;
  double l = 4.0;  // ignored by extremal-quadratic (L = mu) and logistic
  std::uint64_t seed = 1;
};

struct SyntheticProblem {
  CompositeObjective objective;
  Vec x0;
  std::shared_ptr<const SparseDataset> dataset;  // logistic only
};

// extremal-quadratic: f = (mu/2)||x||^2, x0 = ones.
// diagonal-quadratic: f = 1/2 x'Dx, D log-spaced in [mu, l], x0 = ones.
// random-logistic: Gaussian features, labels from a planted separator with
// 5% flips, lambda = mu, x0 = 0. Deterministic in seed.
SyntheticProblem make_synthetic(const SyntheticSpec& spec);

// Gaussian design with a planted linear response; labels are real-valued
// targets for least squares, or their signs when classification is set.
std::shared_ptr<const SparseDataset> make_gaussian_dataset(
    std::size_t rows, std::size_t cols, std::uint64_t seed,
    bool classification, double label_flip = 0.05);

struct DatasetProblem {
  std::string path;
  Loss loss = Loss::kLogistic;
  double lambda1 = 1e-4;
  double lambda2 = 0.0;
  bool literal_paper_losses = false;
  std::optional<std::size_t> dim_override;
};

struct AlgoChoice {
  Algorithm algo = Algorithm::kSuesa;
  bool adaptive = false;
  std::string label() const;
};

struct RunPlan {
  std::variant<DatasetProblem, SyntheticSpec> problem;
  std::vector<AlgoChoice> algorithms;
  SolverConfig cfg;
  std::optional<Vec> x0;
  std::filesystem::path out_dir = ".";
  bool require_certificate = false;
  // Also write <label>_ratio.csv for every UES run.
  bool write_ratio_reports = false;
  int jobs = 1;
};

struct ResolvedProblem {
  CompositeObjective objective;
  Vec x0;
  std::string description;
};

// Loads or synthesizes the plan's problem. Throws std::runtime_error /
// ParseError on I/O and format problems, std::invalid_argument otherwise.
ResolvedProblem resolve_problem(const RunPlan& plan);

struct RunSummary {
  AlgoChoice choice;
  bool certified = false;
  bool reached_target = false;
  std::int64_t iterations = 0;
  EvalCounters counters;
  std::int64_t wall_ns = 0;
  double f_val = 0.0;
  double gap = 0.0;
  std::filesystem::path csv_path;
};

struct PlanSummary {
  std::string problem;
  double mu = 0.0;
  double lipschitz = 0.0;
  std::optional<double> f_ref;
  std::vector<RunSummary> runs;
  // True when every UES run certified (gradient descent is not counted).
  bool all_certified = true;
  std::string text() const;
};

// Validates the plan, runs every algorithm and writes <label>.csv and
// summary.txt under plan.out_dir.
PlanSummary run_plan(const RunPlan& plan);
PlanSummary run_plan(const RunPlan& plan, const ResolvedProblem& problem);

// Header: k,fevals,gevals,proxevals,cpu_ns,f_val,phi_star,gap,ratio,alpha,
// lk,lambda_cum. NaN and missing values are written as empty fields.
void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& trace);
extern const char* const kTraceCsvHeader;

struct RatioRow {
  std::int64_t k = 0;
  std::optional<double> ratio;
  std::optional<double> bound;  // 1 - alpha_k for UES runs
  bool flagged = false;
};

struct RatioReport {
  double plain_rate = 0.0;        // 1 - mu/L
  double accelerated_rate = 0.0;  // 1 - sqrt(mu/L)
  std::vector<RatioRow> rows;     // one per iteration k >= 1
  std::size_t flags = 0;
};

// Per-iteration gap ratios next to the theoretical rates. An iteration is
// flagged when its ratio exceeds 1 - alpha_k by more than 1e-12. Needs at
// least two trace rows.
RatioReport ratio_report(const std::vector<IterationRecord>& trace, double mu,
                         double lipschitz);
void write_ratio_report(std::ostream& out, const RatioReport& report);

}  // namespace ues
