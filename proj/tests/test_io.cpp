#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "scalinglaw/io.hpp"
#include "test_support.hpp"

namespace scalinglaw {
namespace {

using testing::code_of;

std::string random_text(std::mt19937_64& rng) {
  static constexpr std::string_view alphabet = "abcXYZ019-_ ,\"\n.;";
  std::string s(rng() % 8, ' ');
  for (char& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(0.25), "0.25");
  EXPECT_EQ(io::format_double(1e-300), "1e-300");
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10000; ++t) {
    double x;
    do x = std::bit_cast<double>(rng()); while (!std::isfinite(x));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(io::parse_double(io::format_double(x))),
              std::bit_cast<std::uint64_t>(x));
  }
  EXPECT_EQ(code_of([] { io::parse_double("1,5"); }), ErrorCode::parse_error);
  EXPECT_EQ(code_of([] { io::parse_double(""); }), ErrorCode::parse_error);
}

TEST(ObservationsCsv, RoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CurveObservation> obs(rng() % 20);
    for (auto& o : obs) {
      o.shard_size = 1 + rng() % (std::uint64_t{1} << 40);
      o.loss_value = std::ldexp(double(rng() >> 11), -53 + int(rng() % 40) - 20);
      if (o.loss_value == 0.0) o.loss_value = 0.5;
      o.metric_name = random_text(rng);
      if (rng() % 2) o.model_params = 1 + rng() % 1000000;
      if (rng() % 2) o.seed = static_cast<std::int64_t>(rng());
      o.split_tag = random_text(rng);
    }
    const std::string text = io::observations_to_csv(obs);
    EXPECT_EQ(io::observations_from_csv(text), obs);
    EXPECT_EQ(io::observations_to_csv(io::observations_from_csv(text)), text);
  }
}

TEST(ObservationsCsv, Layout) {
  CurveObservation o;
  o.shard_size = 100;
  o.loss_value = 0.25;
  o.metric_name = "top-1, val";
  o.split_tag = "say \"hi\"";
  EXPECT_EQ(io::observations_to_csv(std::vector{o}),
            "shard_size,loss_value,metric_name,model_params,seed,split_tag\n"
            "100,0.25,\"top-1, val\",,,\"say \"\"hi\"\"\"\n");
}

TEST(ObservationsCsv, Errors) {
  const std::string header = "shard_size,loss_value,metric_name,model_params,seed,split_tag\n";
  auto context_of = [](const std::string& text) {
    try {
      io::observations_from_csv(text);
    } catch (const Error& e) {
      return std::string(error_code_name(e.code())) + " " + e.context();
    }
    return std::string("none");
  };
  EXPECT_EQ(context_of("size,loss\n1,2\n"), "ParseError line=1");
  EXPECT_EQ(context_of(""), "ParseError ");
  EXPECT_EQ(context_of(header + "10,0.5,x,,,\n20,0.4,x,,\n"), "ParseError line=3");
  EXPECT_EQ(context_of(header + "10,abc,x,,,\n"), "ParseError line=2");
  EXPECT_EQ(context_of(header + "10,1 000,x,,,\n"), "ParseError line=2");
  EXPECT_EQ(context_of(header + "-5,0.5,x,,,\n"), "ParseError line=2");
  EXPECT_EQ(context_of(header + "10,-0.5,x,,,\n"), "NonPositiveLoss line=2");
  EXPECT_EQ(context_of(header + "10,0.5,\"open,,,\n"), "ParseError line=2");

  const auto clamped = io::observations_from_csv(header + "10,0,x,,,\r\n");
  ASSERT_EQ(clamped.size(), 1u);
  EXPECT_TRUE(clamped[0].clamped);
  EXPECT_GT(clamped[0].loss_value, 0.0);
  EXPECT_EQ(code_of([&] {
              io::observations_from_csv(header + "10,0,x,,,\n", ObservationPolicy{1e-12, false});
            }),
            ErrorCode::non_positive_loss);
}

TEST(FitReportJson, KeyOrderAndRoundTrip) {
  const auto obs = testing::sample_law(testing::geometric_sizes(100, 1e5, 8), [](double m) { return evaluate(PowerLawCurve(3, -0.4, 0.2), m); });
  auto report = fit(obs, FitMethod::free());
  report.ci = bootstrap_ci(obs, FitMethod::zero(), {200, 0.9, 5}).ci;
  const auto doc = io::fit_report_to_json(report);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"fit_kind", "alpha", "beta", "gamma", "rrmse", "n_observations",
                                            "ci", "residuals", "warnings"}));
  EXPECT_EQ(doc.at("fit_kind"), "free-floor");

  const auto back = io::fit_report_from_json(io::Json::parse(doc.dump()));
  EXPECT_EQ(back.alpha, report.alpha);
  EXPECT_EQ(back.beta, report.beta);
  EXPECT_EQ(back.gamma, report.gamma);
  EXPECT_EQ(back.rrmse, report.rrmse);
  EXPECT_EQ(back.residuals, report.residuals);
  EXPECT_EQ(back.ci->beta.low, report.ci->beta.low);
  EXPECT_EQ(back.ci->gamma.high, report.ci->gamma.high);
  EXPECT_EQ(io::fit_report_to_json(back).dump(), doc.dump());

  report.ci.reset();
  EXPECT_FALSE(io::fit_report_to_json(report).contains("ci"));
  EXPECT_EQ(code_of([] { io::fit_report_from_json(io::Json::parse(R"({"fit_kind":"cubic"})")); }),
            ErrorCode::parse_error);
}

TEST(ShardPlanJson, RoundTripAndValidation) {
  const ShardPlan plan = plan_shards({1000000, 0.001, 2.0, 0.5, 0.05, 7});
  const auto doc = io::shard_plan_to_json(plan);
  EXPECT_EQ(io::shard_plan_from_json(io::Json::parse(doc.dump())), plan);

  auto broken = doc;
  broken["shard_sizes"] = {4000, 2000};
  EXPECT_EQ(code_of([&] { io::shard_plan_from_json(broken); }), ErrorCode::invalid_plan);
  broken = doc;
  broken["total_size"] = 10;
  EXPECT_EQ(code_of([&] { io::shard_plan_from_json(broken); }), ErrorCode::invalid_plan);
  broken = doc;
  broken.erase("nested");
  EXPECT_EQ(code_of([&] { io::shard_plan_from_json(broken); }), ErrorCode::parse_error);
}

TEST(ErrorJson, SingleLine) {
  const Error e(ErrorCode::infeasible_target, "target below floor\nsecond line", "target=0.05");
  const std::string line = io::error_to_json(e).dump();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(line, R"({"code":"InfeasibleTarget","message":"target below floor\nsecond line","context":"target=0.05"})");
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { io::read_file("/nonexistent/dir/file.csv"); }), ErrorCode::io_error);
  EXPECT_EQ(code_of([] { io::write_file("/nonexistent/dir/file.csv", "x"); }), ErrorCode::io_error);
}

}  // namespace
}  // namespace scalinglaw
