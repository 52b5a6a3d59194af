#include "scalinglaw/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace scalinglaw::io {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (in_quotes)
    throw Error(ErrorCode::parse_error, "unterminated quoted field",
                "line=" + std::to_string(line_no));
  return fields;
}

template <class Int>
Int parse_integer(std::string_view text, std::string_view what, std::size_t line_no) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorCode::parse_error, "invalid " + std::string(what) + " '" + std::string(text) + "'",
                "line=" + std::to_string(line_no));
  return value;
}

Json interval_json(const ParameterInterval& interval) { return Json::array({interval.low, interval.high}); }

ParameterInterval interval_from_json(const Json& doc) {
  return {doc.at(0).get<double>(), doc.at(1).get<double>()};
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorCode::parse_error, "invalid number '" + std::string(text) + "'");
  return value;
}

void write_observations_csv(std::ostream& out, std::span<const CurveObservation> observations) {
  out << kObservationsHeader << '\n';
  for (const auto& o : observations) {
    out << o.shard_size << ',' << format_double(o.loss_value) << ',' << csv_field(o.metric_name)
        << ',';
    if (o.model_params) out << *o.model_params;
    out << ',';
    if (o.seed) out << *o.seed;
    out << ',' << csv_field(o.split_tag) << '\n';
  }
}

std::string observations_to_csv(std::span<const CurveObservation> observations) {
  std::ostringstream out;
  write_observations_csv(out, observations);
  return out.str();
}

std::vector<CurveObservation> read_observations_csv(std::istream& in,
                                                    const ObservationPolicy& policy) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<CurveObservation> observations;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kObservationsHeader)
        throw Error(ErrorCode::parse_error, "unexpected CSV header", "line=1");
      header_seen = true;
      continue;
    }
    // A quoted field may span physical lines.
    const std::size_t record_line = line_no;
    std::string next;
    while (std::count(line.begin(), line.end(), '"') % 2 == 1 && std::getline(in, next)) {
      ++line_no;
      if (!next.empty() && next.back() == '\r') next.pop_back();
      line += '\n';
      line += next;
    }
    const auto fields = split_csv_line(line, record_line);
    if (fields.size() != 6)
      throw Error(ErrorCode::parse_error, "expected 6 fields", "line=" + std::to_string(record_line));
    CurveObservation o;
    o.shard_size = parse_integer<std::uint64_t>(fields[0], "shard_size", record_line);
    try {
      o.loss_value = parse_double(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse_error, e.what(), "line=" + std::to_string(record_line));
    }
    o.metric_name = fields[2];
    if (!fields[3].empty())
      o.model_params = parse_integer<std::uint64_t>(fields[3], "model_params", record_line);
    if (!fields[4].empty()) o.seed = parse_integer<std::int64_t>(fields[4], "seed", record_line);
    o.split_tag = fields[5];
    try {
      observations.push_back(validate_observation(std::move(o), policy));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), "line=" + std::to_string(record_line));
    }
  }
  if (!header_seen) throw Error(ErrorCode::parse_error, "missing CSV header");
  return observations;
}

std::vector<CurveObservation> observations_from_csv(std::string_view text,
                                                    const ObservationPolicy& policy) {
  std::istringstream in{std::string(text)};
  return read_observations_csv(in, policy);
}

Json shard_plan_to_json(const ShardPlan& plan) {
  Json doc;
  doc["total_size"] = plan.total_size;
  doc["validation_size"] = plan.validation_size;
  doc["shard_sizes"] = plan.shard_sizes;
  doc["shuffle_seed"] = plan.shuffle_seed;
  doc["nested"] = plan.nested;
  return doc;
}

ShardPlan shard_plan_from_json(const Json& doc) {
  ShardPlan plan;
  try {
    plan.total_size = doc.at("total_size").get<std::uint64_t>();
    plan.validation_size = doc.at("validation_size").get<std::uint64_t>();
    plan.shard_sizes = doc.at("shard_sizes").get<std::vector<std::uint64_t>>();
    plan.shuffle_seed = doc.at("shuffle_seed").get<std::uint64_t>();
    plan.nested = doc.at("nested").get<bool>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed shard plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

Json fit_report_to_json(const FitReport& report) {
  Json doc;
  doc["fit_kind"] = std::string(fit_kind_name(report.kind));
  doc["alpha"] = report.alpha;
  doc["beta"] = report.beta;
  doc["gamma"] = report.gamma;
  doc["rrmse"] = report.rrmse;
  doc["n_observations"] = report.n_observations;
  if (report.ci) {
    Json ci;
    ci["alpha"] = interval_json(report.ci->alpha);
    ci["beta"] = interval_json(report.ci->beta);
    ci["gamma"] = interval_json(report.ci->gamma);
    ci["confidence"] = report.ci->confidence;
    ci["resamples_used"] = report.ci->resamples_used;
    ci["degenerate_resamples"] = report.ci->degenerate_resamples;
    doc["ci"] = std::move(ci);
  }
  doc["residuals"] = report.residuals;
  doc["warnings"] = report.warnings;
  return doc;
}

FitReport fit_report_from_json(const Json& doc) {
  FitReport report;
  try {
    const auto kind = parse_fit_kind(doc.at("fit_kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::parse_error, "unknown fit_kind");
    report.kind = *kind;
    report.alpha = doc.at("alpha").get<double>();
    report.beta = doc.at("beta").get<double>();
    report.gamma = doc.at("gamma").get<double>();
    report.rrmse = doc.at("rrmse").get<double>();
    report.n_observations = doc.at("n_observations").get<std::size_t>();
    if (doc.contains("ci")) {
      const Json& ci_doc = doc.at("ci");
      ConfidenceIntervals ci;
      ci.alpha = interval_from_json(ci_doc.at("alpha"));
      ci.beta = interval_from_json(ci_doc.at("beta"));
      ci.gamma = interval_from_json(ci_doc.at("gamma"));
      ci.confidence = ci_doc.value("confidence", 0.95);
      ci.resamples_used = ci_doc.value("resamples_used", std::size_t{0});
      ci.degenerate_resamples = ci_doc.value("degenerate_resamples", std::size_t{0});
      ci.resamples_requested = ci.resamples_used + ci.degenerate_resamples;
      report.ci = ci;
    }
    report.residuals = doc.at("residuals").get<std::vector<double>>();
    report.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed fit report: ") + e.what());
  }
  report.degenerate_floor =
      std::find(report.warnings.begin(), report.warnings.end(), "degenerate_floor") !=
      report.warnings.end();
  return report;
}

Json projection_to_json(const ProjectionResult& result) {
  Json doc;
  doc["target_loss"] = result.target_loss;
  doc["feasible"] = result.feasible;
  auto put = [&doc](const char* key, const std::optional<double>& v) {
    if (v) doc[key] = *v;
  };
  put("required_data", result.required_data);
  put("required_params", result.required_params);
  put("relative_compute", result.relative_compute);
  put("extrapolation_factor", result.extrapolation_factor);
  doc["warnings"] = result.warnings;
  return doc;
}

Json segmentation_to_json(const RegionSegmentation& segmentation, const GuessBaseline& baseline) {
  Json doc;
  doc["baseline"] = baseline.value;
  Json labels = Json::array();
  for (Region r : segmentation.labels) labels.push_back(std::string(region_name(r)));
  doc["labels"] = std::move(labels);
  doc["power_law_range"] =
      Json::array({segmentation.power_law_min_size, segmentation.power_law_max_size});
  if (segmentation.fit) doc["fit"] = fit_report_to_json(*segmentation.fit);
  doc["caveats"] = segmentation.caveats;
  return doc;
}

Json error_to_json(const Error& error) {
  Json doc;
  doc["code"] = std::string(error_code_name(error.code()));
  doc["message"] = error.what();
  doc["context"] = error.context();
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open file for reading", path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open file for writing", path);
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "write failed", path);
}

}  // namespace scalinglaw::io
