#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "divkit/whitening.hpp"

namespace divkit::bench {

enum class Regime { SectorLinear, GlobalLinear, Nonlinear };
enum class ModelKind { LIN, LINS, NNET, NNETS };

std::string_view to_string(Regime r);
std::string_view to_string(ModelKind k);
Regime parse_regime(std::string_view s);  // sector_linear | global_linear | nonlinear
ModelKind parse_model(std::string_view s);

struct Dataset {
  Eigen::MatrixXd features;  // rows x d_x
  Eigen::MatrixXd targets;   // rows x d_y
  std::vector<int> sector;   // index into sector_names
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::vector<std::string> sector_names;

  std::size_t rows() const { return sector.size(); }
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// ESG-like features (four Beta-distributed scores) and three positive, right-skewed
/// financial targets. The signal is linear in the features: per sector (SectorLinear),
/// shared (GlobalLinear) or passed through a saturating nonlinearity (Nonlinear). The additive
/// noise is centered log-normal scaled by `noise`; noise = 0 gives exact signals.
Dataset synth_dataset(std::uint64_t seed, std::size_t rows, Regime regime, double noise = 1.0);

/// Reads a CSV with a header row; numeric feature and target columns and one categorical
/// sector column are selected by name.
Dataset load_dataset(const std::string& path, const std::vector<std::string>& features,
                     const std::vector<std::string>& targets, const std::string& sector);
std::string to_csv(const Dataset& d);

/// Seeded permutation split; the first `train_fraction` of the permuted rows train.
std::pair<Dataset, Dataset> split(const Dataset& d, std::uint64_t seed, double train_fraction = 0.8);

struct ModelSpec {
  ModelKind kind = ModelKind::LIN;
  std::size_t hidden = 16;
  std::size_t epochs = 3000;
  double learning_rate = 0.05;
  std::uint64_t seed = 7;
};

/// A fitted model. Targets are whitened with a ZCA-cor map of the training targets before
/// fitting and predictions are mapped back to the original units.
class PredictiveModel {
 public:
  ModelKind kind() const { return spec_.kind; }
  const ModelSpec& spec() const { return spec_; }
  double training_loss() const { return loss_; }
  Eigen::MatrixXd predict(const Dataset& d) const;

 private:
  friend PredictiveModel fit_model(const ModelSpec& spec, const Dataset& train);

  Eigen::MatrixXd design(const Dataset& d) const;

  ModelSpec spec_;
  std::size_t sectors_ = 0;
  Eigen::MatrixXd white_;      // target whitening W
  Eigen::MatrixXd white_inv_;  // W^{-1}
  Eigen::MatrixXd beta_;       // linear models: design -> whitened targets
  Eigen::MatrixXd w1_, w2_;    // perceptron weights
  Eigen::RowVectorXd b1_, b2_;
  double loss_ = 0.0;
  bool ridge_used_ = false;
};

PredictiveModel fit_model(const ModelSpec& spec, const Dataset& train);

struct Score {
  ModelKind kind = ModelKind::LIN;
  std::vector<double> energy;  // whitened energy_sq per alpha
  double rmse = 0.0;
};

struct Scoreboard {
  std::vector<double> alphas;
  std::vector<Score> rows;
  /// Index into rows of the per-column minimum, one entry per alpha, then RMSE.
  std::vector<std::size_t> winners;
  whitening::Method method = whitening::Method::ZCAcor;
};

/// Whitened energy_sq between the predicted and the true test-target laws, with one map fit
/// on the true test targets applied to both; plus RMSE in original units.
Scoreboard score_models(const std::vector<PredictiveModel>& models, const Dataset& test,
                        const std::vector<double>& alphas, whitening::Method method = whitening::Method::ZCAcor);

nlohmann::json to_json(const Scoreboard& s);
Scoreboard scoreboard_from_json(const nlohmann::json& j);
/// Plain-text table: one row per model, columns alpha values then RMSE; '*' marks winners.
std::string format_table(const Scoreboard& s);

struct BenchConfig {
  std::uint64_t data_seed = 1;
  std::uint64_t split_seed = 2;
  std::size_t rows = 1000;
  Regime regime = Regime::SectorLinear;
  double noise = 1.0;
  std::vector<double> alphas = {0.5, 1.0, 1.5};
  std::vector<ModelSpec> models = {{ModelKind::LIN}, {ModelKind::LINS}, {ModelKind::NNET}, {ModelKind::NNETS}};
};

Scoreboard run_bench(const Dataset& data, const BenchConfig& config);
Scoreboard run_bench(const BenchConfig& config);

}  // namespace divkit::bench
