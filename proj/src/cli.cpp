#include "scalinglaw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "scalinglaw/counting_learner.hpp"
#include "scalinglaw/fitting.hpp"
#include "scalinglaw/io.hpp"
#include "scalinglaw/projection.hpp"
#include "scalinglaw/regions.hpp"
#include "scalinglaw/sharding.hpp"

namespace scalinglaw::cli {

namespace {

// Flag values that parse but make no sense ("--floor sideways") are usage
// errors, not domain errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlanArgs {
  std::uint64_t total = 0;
  double smallest = 0.001;
  double ratio = 2.0;
  double max = 0.5;
  double val = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitArgs {
  std::string in;
  std::string floor = "zero";
  bool composite = false;
  bool model_size = false;
  std::size_t bootstrap = 0;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> cutoff;
};

struct SegmentArgs {
  std::string in;
  std::string baseline;
  double plateau_tol = 0.05;
  double floor_tol = 0.01;
  std::string labels_out;
};

struct ProjectArgs {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::optional<double> sizing_alpha;
  std::optional<double> sizing_beta;
  double target = 0.0;
  double reference = 1.0;
  std::optional<double> largest_observed;
};

struct SimulateArgs {
  std::string learner = "counting";
  double p = 0.5;
  std::string loss = "l1";
  std::string method = "closed";
  std::vector<std::uint64_t> shards;
  std::uint64_t seed = 0;
  std::string out;
};

struct PlotArgs {
  std::string in;
  std::string fit;
  std::string out;
};

std::string dump(const io::Json& doc) { return doc.dump(2) + "\n"; }

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty())
    out << content;
  else
    io::write_file(path, content);
}

std::vector<CurveObservation> load_observations(const std::string& path) {
  return io::observations_from_csv(io::read_file(path));
}

double parse_number_arg(std::string_view text, std::string_view flag) {
  try {
    return io::parse_double(text);
  } catch (const Error&) {
    throw UsageError("invalid number '" + std::string(text) + "' for " + std::string(flag));
  }
}

int parse_int_arg(std::string_view text, std::string_view flag) {
  const double v = parse_number_arg(text, flag);
  if (v != std::floor(v) || v < 1 || v > 1e9)
    throw UsageError("invalid integer '" + std::string(text) + "' for " + std::string(flag));
  return static_cast<int>(v);
}

FitMethod parse_floor(const std::string& text) {
  if (text == "zero") return FitMethod::zero();
  if (text == "free") return FitMethod::free();
  if (text.rfind("fixed:", 0) == 0) return FitMethod::fixed(parse_number_arg(text.substr(6), "--floor"));
  throw UsageError("--floor must be free, zero or fixed:<gamma>");
}

GuessBaseline parse_baseline(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw UsageError("--baseline must be xent:K, topk:K,k or value:x");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "xent") return guess_baseline(MetricKind::cross_entropy, parse_int_arg(rest, "--baseline"));
  if (kind == "topk") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw UsageError("--baseline topk needs K,k");
    return guess_baseline(MetricKind::top_k_error, parse_int_arg(rest.substr(0, comma), "--baseline"),
                          parse_int_arg(rest.substr(comma + 1), "--baseline"));
  }
  if (kind == "value") return custom_baseline(parse_number_arg(rest, "--baseline"));
  throw UsageError("--baseline must be xent:K, topk:K,k or value:x");
}

LossKind parse_loss(const std::string& text) {
  if (text == "l1") return LossKind::l1;
  if (text == "l2") return LossKind::l2_norm;
  if (text == "kl") return LossKind::abs_kl;
  throw UsageError("--loss must be l1, l2 or kl");
}

ExpectationMethod parse_method(const std::string& text, std::uint64_t seed) {
  if (text == "closed") return ClosedForm{};
  if (text == "binomial") return BinomialSum{};
  if (text.rfind("mc:", 0) == 0) {
    const double trials = parse_number_arg(text.substr(3), "--method");
    if (trials < 1 || trials != std::floor(trials)) throw UsageError("--method mc:<trials> needs a positive integer");
    return MonteCarlo{static_cast<std::uint64_t>(trials), seed};
  }
  throw UsageError("--method must be closed, binomial or mc:<trials>");
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  ShardPlanRequest request;
  request.total_size = a.total;
  request.smallest_fraction = a.smallest;
  request.ratio = a.ratio;
  request.max_fraction = a.max;
  request.validation_fraction = a.val;
  request.seed = a.seed;
  const std::string doc = dump(io::shard_plan_to_json(plan_shards(request)));
  if (!a.out.empty()) io::write_file(a.out, doc);
  out << doc;
  return kExitOk;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const FitMethod method = a.model_size ? FitMethod::model_size() : parse_floor(a.floor);
  auto observations = load_observations(a.in);
  if (a.composite) observations = select_composite(observations);
  FitOptions options;
  options.max_size_cutoff = a.cutoff;
  FitReport report;
  if (a.bootstrap > 0) {
    BootstrapOptions bootstrap;
    bootstrap.n_resamples = a.bootstrap;
    bootstrap.confidence = a.confidence;
    bootstrap.seed = a.seed;
    report = bootstrap_ci(observations, method, bootstrap, options);
  } else {
    report = fit(observations, method, options);
  }
  out << dump(io::fit_report_to_json(report));
  return kExitOk;
}

int cmd_segment(const SegmentArgs& a, std::ostream& out) {
  const GuessBaseline baseline = parse_baseline(a.baseline);
  auto observations = load_observations(a.in);
  std::stable_sort(observations.begin(), observations.end(),
                   [](const auto& x, const auto& y) { return x.shard_size < y.shard_size; });
  SegmentOptions options;
  options.plateau_tolerance = a.plateau_tol;
  options.floor_improvement_threshold = a.floor_tol;
  const RegionSegmentation seg = segment(observations, baseline, options);
  if (!a.labels_out.empty()) {
    std::ostringstream csv;
    csv << "shard_size,loss_value,label\n";
    for (std::size_t i = 0; i < observations.size(); ++i)
      csv << observations[i].shard_size << ',' << io::format_double(observations[i].loss_value)
          << ',' << region_name(seg.labels[i]) << '\n';
    io::write_file(a.labels_out, csv.str());
  }
  out << dump(io::segmentation_to_json(seg, baseline));
  return kExitOk;
}

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  if (a.sizing_alpha.has_value() != a.sizing_beta.has_value())
    throw UsageError("--sizing-alpha and --sizing-beta go together");
  const PowerLawCurve learning(a.alpha, a.beta, a.gamma);
  std::optional<ModelSizeCurve> sizing;
  if (a.sizing_alpha) sizing.emplace(*a.sizing_alpha, *a.sizing_beta);
  ProjectionOptions options;
  options.reference_size = a.reference;
  options.largest_observed = a.largest_observed;
  io::Json doc = io::projection_to_json(project(learning, sizing, a.target, options));

  io::Json per_doubling;
  per_doubling["improvement"] = improvement_per_doubling(learning);
  per_doubling["data_factor_to_halve_loss"] = data_factor_to_halve_loss(learning);
  io::Json table = io::Json::array();
  for (int d = 1; d <= 10; ++d) {
    io::Json row;
    row["doublings"] = d;
    row["data_factor"] = std::exp2(d);
    row["above_floor_loss_ratio"] = std::exp2(learning.beta() * d);
    table.push_back(std::move(row));
  }
  per_doubling["table"] = std::move(table);
  doc["per_doubling"] = std::move(per_doubling);
  out << dump(doc);
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.learner != "counting") throw UsageError("--learner supports only 'counting'");
  if (a.shards.empty()) throw UsageError("--shards needs at least one size");
  const LossKind loss = parse_loss(a.loss);
  const ExpectationMethod method = parse_method(a.method, a.seed);
  const CoinDistribution coin(a.p);
  const auto curve = expected_loss_curve(a.shards, coin, loss, method);
  emit(io::observations_to_csv(curve), a.out, out);
  return kExitOk;
}

int cmd_plotdata(const PlotArgs& a, std::ostream& out) {
  const auto observations = load_observations(a.in);
  if (observations.empty()) throw Error(ErrorCode::insufficient_data, "no observations to plot", a.in);
  const FitReport report = io::fit_report_from_json(io::Json::parse(io::read_file(a.fit)));
  std::ostringstream csv;
  csv << "log10_size,log10_observed,log10_fitted\n";
  for (const auto& o : observations) {
    const double m = static_cast<double>(o.shard_size);
    csv << io::format_double(std::log10(m)) << ',' << io::format_double(std::log10(o.loss_value))
        << ',' << io::format_double(std::log10(report.predict(m))) << '\n';
  }
  emit(csv.str(), a.out, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-curve measurement, fitting and projection toolkit", "scalinglaw"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Plan a geometric shard schedule");
  plan->add_option("--total", plan_args.total, "Records in the dataset")->required();
  plan->add_option("--smallest", plan_args.smallest, "Smallest shard as a fraction of total")->capture_default_str();
  plan->add_option("--ratio", plan_args.ratio, "Growth ratio between shards")->capture_default_str();
  plan->add_option("--max", plan_args.max, "Largest shard fraction")->capture_default_str();
  plan->add_option("--val", plan_args.val, "Validation fraction")->capture_default_str();
  plan->add_option("--seed", plan_args.seed, "Shuffle seed")->capture_default_str();
  plan->add_option("--out", plan_args.out, "Write the plan JSON here");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a power-law learning curve");
  fit_cmd->add_option("--in", fit_args.in, "Observations CSV")->required();
  fit_cmd->add_option("--floor", fit_args.floor, "free | zero | fixed:<gamma>")->capture_default_str();
  fit_cmd->add_flag("--composite", fit_args.composite, "Keep the best record per shard size first");
  fit_cmd->add_flag("--model-size", fit_args.model_size, "Fit model_params against shard size");
  fit_cmd->add_option("--bootstrap", fit_args.bootstrap, "Bootstrap resamples (0 = none)")->capture_default_str();
  fit_cmd->add_option("--confidence", fit_args.confidence, "Bootstrap confidence level")->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed, "Bootstrap seed")->capture_default_str();
  fit_cmd->add_option("--cutoff", fit_args.cutoff, "Ignore shards larger than this");

  SegmentArgs seg_args;
  auto* seg = app.add_subcommand("segment", "Split a learning curve into regions");
  seg->add_option("--in", seg_args.in, "Observations CSV")->required();
  seg->add_option("--baseline", seg_args.baseline, "xent:K | topk:K,k | value:x")->required();
  seg->add_option("--plateau-tol", seg_args.plateau_tol, "Relative distance from the baseline")->capture_default_str();
  seg->add_option("--floor-tol", seg_args.floor_tol, "Per-doubling improvement threshold")->capture_default_str();
  seg->add_option("--labels-out", seg_args.labels_out, "Write per-point labels CSV here");

  ProjectArgs proj_args;
  auto* proj = app.add_subcommand("project", "Project data, model size and compute for a target loss");
  proj->add_option("--alpha", proj_args.alpha)->required();
  proj->add_option("--beta", proj_args.beta)->required();
  proj->add_option("--gamma", proj_args.gamma)->capture_default_str();
  proj->add_option("--sizing-alpha", proj_args.sizing_alpha);
  proj->add_option("--sizing-beta", proj_args.sizing_beta);
  proj->add_option("--target", proj_args.target, "Target loss")->required();
  proj->add_option("--reference", proj_args.reference, "Reference data size")->capture_default_str();
  proj->add_option("--largest-observed", proj_args.largest_observed, "Largest measured shard");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Expected-loss curve of the counting learner");
  sim->add_option("--learner", sim_args.learner)->capture_default_str();
  sim->add_option("--p", sim_args.p, "Probability of a one")->capture_default_str();
  sim->add_option("--loss", sim_args.loss, "l1 | l2 | kl")->capture_default_str();
  sim->add_option("--method", sim_args.method, "closed | binomial | mc:<trials>")->capture_default_str();
  sim->add_option("--shards", sim_args.shards, "Comma-separated training-set sizes")->required()->delimiter(',');
  sim->add_option("--seed", sim_args.seed)->capture_default_str();
  sim->add_option("--out", sim_args.out, "Write the observations CSV here");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plotdata", "Log-log observed and fitted columns for plotting");
  plot->add_option("--in", plot_args.in, "Observations CSV")->required();
  plot->add_option("--fit", plot_args.fit, "Fit report JSON")->required();
  plot->add_option("--out", plot_args.out, "Write the CSV here");

  std::vector<const char*> argv{"scalinglaw"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  try {
    if (plan->parsed()) return cmd_plan(plan_args, out);
    if (fit_cmd->parsed()) return cmd_fit(fit_args, out);
    if (seg->parsed()) return cmd_segment(seg_args, out);
    if (proj->parsed()) return cmd_project(proj_args, out);
    if (sim->parsed()) return cmd_simulate(sim_args, out);
    if (plot->parsed()) return cmd_plotdata(plot_args, out);
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << io::error_to_json(e).dump() << "\n";
    return kExitDomainError;
  } catch (const io::Json::exception& e) {
    err << io::error_to_json(Error(ErrorCode::parse_error, e.what())).dump() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace scalinglaw::cli
