#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "divkit/bench.hpp"
#include "divkit/errors.hpp"
#include "oracles.hpp"

using namespace divkit;
using namespace divkit::bench;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("divkit_bench_" + name);
  std::ofstream(path) << body;
  return path.string();
}

double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

ModelSpec small_net(ModelKind k) {
  ModelSpec s;
  s.kind = k;
  s.epochs = 400;
  return s;
}

}  // namespace

TEST(Synth, FeatureMomentsAndSectorShares) {
  const auto d = synth_dataset(1, 100000, Regime::SectorLinear);
  const double mean[4] = {0.65, 0.76, 0.51, 0.62};
  const double sd[4] = {0.11, 0.17, 0.23, 0.15};
  for (int j = 0; j < 4; ++j) {
    std::vector<double> col(d.features.col(j).data(), d.features.col(j).data() + d.features.rows());
    EXPECT_NEAR(oracle::sample_mean(col), mean[j], 0.01) << d.feature_names[j];
    EXPECT_NEAR(oracle::sample_sd(col), sd[j], 0.01) << d.feature_names[j];
    for (double v : col) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
  const double share[5] = {33.05, 1.32, 5.18, 54.52, 5.93};
  std::vector<double> count(5, 0.0);
  for (int s : d.sector) count[static_cast<std::size_t>(s)] += 1.0;
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(100.0 * count[k] / 1e5, share[k], 0.5) << d.sector_names[k];
  EXPECT_GT(d.targets.minCoeff(), 0.0);
}

TEST(Synth, ByteIdenticalForFixedSeed) {
  EXPECT_EQ(to_csv(synth_dataset(4, 500, Regime::Nonlinear)), to_csv(synth_dataset(4, 500, Regime::Nonlinear)));
  EXPECT_NE(to_csv(synth_dataset(4, 500, Regime::Nonlinear)), to_csv(synth_dataset(5, 500, Regime::Nonlinear)));
  EXPECT_THROW(synth_dataset(1, 100, Regime::SectorLinear), InvalidArgument);
  EXPECT_THROW(synth_dataset(1, 500, Regime::SectorLinear, -1.0), InvalidArgument);
}

TEST(Synth, ParseNames) {
  EXPECT_EQ(parse_regime("global_linear"), Regime::GlobalLinear);
  EXPECT_EQ(parse_model("NNETS"), ModelKind::NNETS);
  EXPECT_EQ(to_string(ModelKind::LINS), "LINS");
  EXPECT_THROW(parse_model("GBM"), InvalidArgument);
}

TEST(Split, PartitionIsSeededAndComplete) {
  const auto d = synth_dataset(2, 1000, Regime::SectorLinear);
  const auto [a, b] = split(d, 9);
  EXPECT_EQ(a.rows(), 800u);
  EXPECT_EQ(b.rows(), 200u);
  const auto [a2, b2] = split(d, 9);
  EXPECT_EQ(to_csv(a), to_csv(a2));
  // every row lands in exactly one part: compare column sums
  EXPECT_NEAR(a.targets.sum() + b.targets.sum(), d.targets.sum(), 1e-9 * d.targets.sum());
  EXPECT_THROW(split(d, 1, 1.0), InvalidArgument);
}

TEST(Models, NoiselessLinearSignalIsRecovered) {
  const auto d = synth_dataset(3, 1000, Regime::SectorLinear, 0.0);
  const auto lins = fit_model({ModelKind::LINS}, d);
  EXPECT_LE(rmse(lins.predict(d), d.targets), 1e-8);
  const auto lin = fit_model({ModelKind::LIN}, d);
  EXPECT_GT(rmse(lin.predict(d), d.targets), 1e-3);
  const auto g = synth_dataset(3, 1000, Regime::GlobalLinear, 0.0);
  EXPECT_LE(rmse(fit_model({ModelKind::LIN}, g).predict(g), g.targets), 1e-8);
}

TEST(Models, PerceptronIsReproducibleAndLearns) {
  const auto d = synth_dataset(4, 600, Regime::Nonlinear);
  const auto a = fit_model(small_net(ModelKind::NNETS), d), b = fit_model(small_net(ModelKind::NNETS), d);
  EXPECT_EQ(a.predict(d), b.predict(d));
  EXPECT_EQ(a.training_loss(), b.training_loss());
  // better than predicting the column means
  const Eigen::RowVectorXd m = d.targets.colwise().mean();
  const Eigen::MatrixXd baseline = Eigen::MatrixXd::Ones(d.targets.rows(), 1) * m;
  EXPECT_LT(rmse(a.predict(d), d.targets), rmse(baseline, d.targets));
  ModelSpec bad = small_net(ModelKind::NNET);
  bad.hidden = 0;
  EXPECT_THROW(fit_model(bad, d), InvalidArgument);
}

TEST(Models, ScaleInvariantAfterWhitening) {
  // Rescaling one target column rescales predictions of that column and nothing else.
  const auto d = synth_dataset(5, 800, Regime::SectorLinear);
  auto scaled = d;
  scaled.targets.col(1) *= 1000.0;
  for (ModelKind k : {ModelKind::LIN, ModelKind::LINS, ModelKind::NNET}) {
    const auto p = fit_model(small_net(k), d).predict(d);
    const auto q = fit_model(small_net(k), scaled).predict(scaled);
    EXPECT_NEAR((q.col(1) / 1000.0 - p.col(1)).cwiseAbs().maxCoeff(), 0.0, 1e-8) << to_string(k);
    EXPECT_NEAR((q.col(0) - p.col(0)).cwiseAbs().maxCoeff(), 0.0, 1e-8) << to_string(k);
  }
}

TEST(Score, PerfectPredictorScoresZero) {
  const auto d = synth_dataset(6, 1000, Regime::SectorLinear, 0.0);
  const auto [train, test] = split(d, 1);
  const std::vector<PredictiveModel> models = {fit_model({ModelKind::LIN}, train), fit_model({ModelKind::LINS}, train)};
  const auto sb = score_models(models, test, {0.5, 1.0, 1.5});
  ASSERT_EQ(sb.rows.size(), 2u);
  for (double e : sb.rows[1].energy) EXPECT_NEAR(e, 0.0, 1e-6);
  EXPECT_NEAR(sb.rows[1].rmse, 0.0, 1e-8);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(sb.winners[c], 1u);
  EXPECT_THROW(score_models(models, test, {0.0}), InvalidArgument);
}

TEST(Score, ScoreIsInvariantToTargetUnits) {
  const auto d = synth_dataset(7, 1000, Regime::SectorLinear);
  auto scaled = d;
  scaled.targets.col(2) *= 0.001;
  const auto score = [](const Dataset& data) {
    const auto [train, test] = split(data, 3);
    return score_models({fit_model({ModelKind::LIN}, train), fit_model({ModelKind::LINS}, train)}, test, {1.0});
  };
  const auto a = score(d), b = score(scaled);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(a.rows[r].energy[0], b.rows[r].energy[0], 1e-9);
}

TEST(Score, JsonRoundTripAndTable) {
  BenchConfig c;
  c.rows = 400;
  c.models = {{ModelKind::LIN}, {ModelKind::LINS}, small_net(ModelKind::NNET)};
  const auto sb = run_bench(c);
  const auto j = to_json(sb);
  const auto back = scoreboard_from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(back.rows[r].energy, sb.rows[r].energy);
    EXPECT_EQ(back.rows[r].rmse, sb.rows[r].rmse);
  }
  EXPECT_EQ(back.winners, sb.winners);
  EXPECT_EQ(j.at("winners").size(), 4u);
  EXPECT_TRUE(j.at("winners").contains("alpha=1.5"));
  const auto table = format_table(sb);
  std::istringstream in(table);
  std::string line;
  std::size_t lines = 0, stars = 0;
  while (std::getline(in, line)) {
    ++lines;
    for (char ch : line) stars += ch == '*';
  }
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(stars, 4u);
}

TEST(Score, LinsWinsOnSectorData) {
  const auto sb = run_bench(BenchConfig{});
  ASSERT_EQ(sb.rows.size(), 4u);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(sb.rows[sb.winners[c]].kind, ModelKind::LINS) << c;
}

TEST(LoadDataset, ReadsSelectedColumns) {
  const auto path = temp_file("ok.csv", "id,a,b,y1,y2,grp\n1,0.1,0.2,1,2,x\n2,0.3,0.1,2,1,y\n3,0.5,0.9,3,5,x\n");
  const auto d = load_dataset(path, {"a", "b"}, {"y1", "y2"}, "grp");
  EXPECT_EQ(d.rows(), 3u);
  EXPECT_EQ(d.features(2, 1), 0.9);
  EXPECT_EQ(d.targets(1, 0), 2.0);
  EXPECT_EQ(d.sector_names.size(), 2u);
  EXPECT_EQ(d.sector[0], d.sector[2]);
  const auto round = temp_file("round.csv", to_csv(d));
  const auto back = load_dataset(round, {"a", "b"}, {"y1", "y2"}, "sector");
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.targets, d.targets);
}

TEST(LoadDataset, Errors) {
  EXPECT_THROW(load_dataset("/nonexistent/x.csv", {"a"}, {"y"}, "s"), IoError);
  const auto missing = temp_file("missing.csv", "a,y,s\n1,2,x\n");
  EXPECT_THROW(load_dataset(missing, {"b"}, {"y"}, "s"), ParseError);
  try {
    load_dataset(temp_file("bad.csv", "a,y,s\n1,2,x\n1,oops,x\n"), {"a"}, {"y"}, "s");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
  EXPECT_THROW(load_dataset(temp_file("short.csv", "a,y,s\n1,2\n"), {"a"}, {"y"}, "s"), ParseError);
}
