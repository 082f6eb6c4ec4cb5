#include "divkit/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "divkit/energy.hpp"
#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"
#include "divkit/sample_set.hpp"

namespace divkit::bench {

namespace {

const std::vector<std::string> kSectorNames = {"Consumer", "Financials", "Health.Util", "Manufacturing", "Tech.Com"};
const std::vector<double> kSectorShare = {33.05, 1.32, 5.18, 54.52, 5.93};
const std::vector<std::string> kFeatureNames = {"ESG", "E.Sc", "S.Sc", "G.Sc"};
const std::vector<double> kFeatureMean = {0.65, 0.76, 0.51, 0.62};
const std::vector<double> kFeatureSd = {0.11, 0.17, 0.23, 0.15};
const std::vector<std::string> kTargetNames = {"TASS", "SFND", "TOVR"};

// Shared slopes per target and per-sector deviations (scaled per target).
const double kGlobal[3][4] = {{0.8, -0.4, 0.6, 0.5}, {0.3, 0.2, -0.3, 0.6}, {0.7, -0.5, 0.4, 0.3}};
const double kSectorDev[5][4] = {{1.0, -0.8, 0.5, 0.0},
                                 {-1.2, 0.6, 0.0, 0.9},
                                 {0.4, 1.0, -0.9, -0.5},
                                 {-0.6, -0.3, 0.8, 0.6},
                                 {0.0, 0.9, 0.6, -1.0}};
const double kDevScale[3] = {1.0, 0.6, 0.9};
const double kSectorShift[5] = {0.4, 0.0, 0.2, 0.1, 0.8};
constexpr double kNoiseScale = 0.35;
constexpr double kNoiseLogSd = 0.8;

double beta_draw(std::mt19937_64& rng, double mean, double sd) {
  const double k = mean * (1.0 - mean) / (sd * sd) - 1.0;
  std::gamma_distribution<double> ga(mean * k, 1.0), gb((1.0 - mean) * k, 1.0);
  const double a = ga(rng), b = gb(rng);
  return a / (a + b);
}

int sector_draw(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 100.0)(rng);
  double c = 0.0;
  for (std::size_t s = 0; s < kSectorShare.size(); ++s) {
    c += kSectorShare[s];
    if (u < c) return static_cast<int>(s);
  }
  return static_cast<int>(kSectorShare.size()) - 1;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::MatrixXd one_hot_interactions(const Dataset& d, std::size_t sectors, bool with_slopes) {
  const auto n = static_cast<Eigen::Index>(d.rows());
  const auto p = d.features.cols();
  const auto s = static_cast<Eigen::Index>(sectors);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, with_slopes ? s * (p + 1) : s);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = d.sector[static_cast<std::size_t>(i)];
    if (k >= s) throw InvalidArgument("sector index outside the fitted range");
    x(i, k) = 1.0;
    if (with_slopes) x.block(i, s + k * p, 1, p) = d.features.row(i);
  }
  return x;
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::SectorLinear:
      return "sector_linear";
    case Regime::GlobalLinear:
      return "global_linear";
    default:
      return "nonlinear";
  }
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::LIN:
      return "LIN";
    case ModelKind::LINS:
      return "LINS";
    case ModelKind::NNET:
      return "NNET";
    default:
      return "NNETS";
  }
}

Regime parse_regime(std::string_view s) {
  if (s == "sector_linear") return Regime::SectorLinear;
  if (s == "global_linear") return Regime::GlobalLinear;
  if (s == "nonlinear") return Regime::Nonlinear;
  throw InvalidArgument("unknown regime '" + std::string(s) + "'");
}

ModelKind parse_model(std::string_view s) {
  for (auto k : {ModelKind::LIN, ModelKind::LINS, ModelKind::NNET, ModelKind::NNETS})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown model '" + std::string(s) + "' (expected LIN, LINS, NNET or NNETS)");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.target_names = target_names;
  out.sector_names = sector_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
    out.targets.row(static_cast<Eigen::Index>(r)) = targets.row(static_cast<Eigen::Index>(rows[r]));
    out.sector.push_back(sector[rows[r]]);
  }
  return out;
}

Dataset synth_dataset(std::uint64_t seed, std::size_t rows, Regime regime, double noise) {
  if (rows < 200) throw InvalidArgument("synthetic datasets need at least 200 rows");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise scale must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(rows);
  Dataset d;
  d.feature_names = kFeatureNames;
  d.target_names = kTargetNames;
  d.sector_names = kSectorNames;
  d.features.resize(n, 4);
  d.targets.resize(n, 3);
  d.sector.resize(rows);
  const double noise_mean = std::exp(0.5 * kNoiseLogSd * kNoiseLogSd);

  for (Eigen::Index i = 0; i < n; ++i) {
    const int s = sector_draw(rng);
    d.sector[static_cast<std::size_t>(i)] = s;
    for (int j = 0; j < 4; ++j) d.features(i, j) = beta_draw(rng, kFeatureMean[j], kFeatureSd[j]);
    for (int k = 0; k < 3; ++k) {
      double slope[4];
      double floor = 1.0;
      for (int j = 0; j < 4; ++j) {
        slope[j] = kGlobal[k][j] + (regime == Regime::GlobalLinear ? 0.0 : kDevScale[k] * kSectorDev[s][j]);
        floor += std::max(-slope[j], 0.0);
      }
      double lin = 0.0, total = 0.0;
      for (int j = 0; j < 4; ++j) {
        lin += slope[j] * d.features(i, j);
        total += slope[j];
      }
      double signal = 0.0;
      if (regime == Regime::Nonlinear) {
        signal = 1.0 + 1.5 * (1.0 + std::tanh(3.0 * (lin - 0.6 * total)));
      } else {
        signal = floor + (regime == Regime::SectorLinear ? kSectorShift[s] : 0.3) + lin;
      }
      const double eps = normal(rng);
      d.targets(i, k) = signal + noise * kNoiseScale * (std::exp(kNoiseLogSd * eps) - noise_mean);
    }
  }
  return d;
}

Dataset load_dataset(const std::string& path, const std::vector<std::string>& features,
                     const std::vector<std::string>& targets, const std::string& sector) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) header = split_csv(line);
  }
  if (header.empty()) throw ParseError(row, "missing header row");
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> fc, tc;
  for (const auto& f : features) fc.push_back(column(f));
  for (const auto& t : targets) tc.push_back(column(t));
  const std::size_t sc = column(sector);
  if (fc.empty() || tc.empty()) throw InvalidArgument("need at least one feature and one target column");

  Dataset d;
  d.feature_names = features;
  d.target_names = targets;
  std::vector<double> fv, tv;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    auto number = [&](std::size_t c) {
      double v = 0.0;
      const auto& s = cells[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(row, "column '" + header[c] + "' is not a finite number: '" + s + "'");
      }
      return v;
    };
    for (auto c : fc) fv.push_back(number(c));
    for (auto c : tc) tv.push_back(number(c));
    const std::string& label = cells[sc];
    if (label.empty()) throw ParseError(row, "missing sector label");
    auto it = std::find(d.sector_names.begin(), d.sector_names.end(), label);
    if (it == d.sector_names.end()) {
      d.sector_names.push_back(label);
      it = d.sector_names.end() - 1;
    }
    d.sector.push_back(static_cast<int>(it - d.sector_names.begin()));
  }
  const auto n = static_cast<Eigen::Index>(d.sector.size());
  if (n == 0) throw ParseError(row, "no data rows");
  d.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      fv.data(), n, static_cast<Eigen::Index>(fc.size()));
  d.targets = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      tv.data(), n, static_cast<Eigen::Index>(tc.size()));
  return d;
}

std::string to_csv(const Dataset& d) {
  std::ostringstream out;
  for (const auto& f : d.feature_names) out << f << ',';
  for (const auto& t : d.target_names) out << t << ',';
  out << "sector\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) out << fmt(d.features(r, j)) << ',';
    for (Eigen::Index j = 0; j < d.targets.cols(); ++j) out << fmt(d.targets(r, j)) << ',';
    out << d.sector_names[static_cast<std::size_t>(d.sector[i])] << '\n';
  }
  return out.str();
}

std::pair<Dataset, Dataset> split(const Dataset& d, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  std::vector<std::size_t> perm(d.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.rows())));
  if (cut == 0 || cut == d.rows()) throw InvalidArgument("split leaves an empty part");
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
  return {d.subset(train), d.subset(test)};
}

Eigen::MatrixXd PredictiveModel::design(const Dataset& d) const {
  const auto n = static_cast<Eigen::Index>(d.rows());
  switch (spec_.kind) {
    case ModelKind::LIN: {
      Eigen::MatrixXd x(n, d.features.cols() + 1);
      x << Eigen::VectorXd::Ones(n), d.features;
      return x;
    }
    case ModelKind::LINS:
      return one_hot_interactions(d, sectors_, true);
    case ModelKind::NNET:
      return d.features;
    default: {
      const Eigen::MatrixXd oh = one_hot_interactions(d, sectors_, false);
      Eigen::MatrixXd x(n, d.features.cols() + oh.cols());
      x << d.features, oh;
      return x;
    }
  }
}

PredictiveModel fit_model(const ModelSpec& spec, const Dataset& train) {
  if (train.rows() == 0) throw InvalidArgument("training set is empty");
  PredictiveModel m;
  m.spec_ = spec;
  m.sectors_ = train.sector_names.size();
  const auto map = whitening::fit_whitening(WeightedSampleSet::from_matrix(train.targets), whitening::Method::ZCAcor);
  m.white_ = map.matrix;
  m.white_inv_ = map.matrix.inverse();
  const Eigen::MatrixXd z = train.targets * m.white_.transpose();
  const Eigen::MatrixXd x = m.design(train);
  const auto n = x.rows();

  if (spec.kind == ModelKind::LIN || spec.kind == ModelKind::LINS) {
    const Eigen::MatrixXd gram = x.transpose() * x;
    const Eigen::MatrixXd rhs = x.transpose() * z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd diag = ldlt.vectorD().cwiseAbs();
    const bool ok = ldlt.info() == Eigen::Success && diag.minCoeff() > 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    if (ok) {
      m.beta_ = ldlt.solve(rhs);
    } else {
      const double ridge = 1e-8 * std::max(gram.trace() / static_cast<double>(gram.rows()), 1e-300);
      m.ridge_used_ = true;
      m.beta_ = (gram + ridge * Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).ldlt().solve(rhs);
    }
    const Eigen::MatrixXd e = x * m.beta_ - z;
    m.loss_ = e.squaredNorm() / static_cast<double>(n);
    if (!std::isfinite(m.loss_)) throw NumericalError("least-squares fit produced a non-finite loss");
    return m;
  }

  const auto p = x.cols();
  const auto h = static_cast<Eigen::Index>(spec.hidden);
  const auto q = z.cols();
  if (h == 0 || spec.epochs == 0 || !(spec.learning_rate > 0.0)) {
    throw InvalidArgument("perceptron needs positive width, epochs and learning rate");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  m.w1_.resize(p, h);
  m.w2_.resize(h, q);
  for (Eigen::Index i = 0; i < m.w1_.size(); ++i) m.w1_.data()[i] = normal(rng) / std::sqrt(static_cast<double>(p));
  for (Eigen::Index i = 0; i < m.w2_.size(); ++i) m.w2_.data()[i] = normal(rng) / std::sqrt(static_cast<double>(h));
  m.b1_ = Eigen::RowVectorXd::Zero(h);
  m.b2_ = z.colwise().mean();

  const double lr = spec.learning_rate;
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    const Eigen::MatrixXd a = (x * m.w1_).rowwise() + m.b1_;
    const Eigen::MatrixXd hid = a.array().tanh().matrix();
    const Eigen::MatrixXd e = ((hid * m.w2_).rowwise() + m.b2_) - z;
    m.loss_ = e.squaredNorm() / static_cast<double>(n);
    if (!std::isfinite(m.loss_)) {
      throw NumericalError("perceptron training diverged at epoch " + std::to_string(epoch) +
                           "; lower the learning rate");
    }
    const Eigen::MatrixXd dy = scale * e;
    const Eigen::MatrixXd da = ((dy * m.w2_.transpose()).array() * (1.0 - hid.array().square())).matrix();
    m.w2_ -= lr * (hid.transpose() * dy);
    m.b2_ -= lr * dy.colwise().sum();
    m.w1_ -= lr * (x.transpose() * da);
    m.b1_ -= lr * da.colwise().sum();
  }
  return m;
}

Eigen::MatrixXd PredictiveModel::predict(const Dataset& d) const {
  const Eigen::MatrixXd x = design(d);
  Eigen::MatrixXd z;
  if (spec_.kind == ModelKind::LIN || spec_.kind == ModelKind::LINS) {
    z = x * beta_;
  } else {
    const Eigen::MatrixXd hid = ((x * w1_).rowwise() + b1_).array().tanh().matrix();
    z = (hid * w2_).rowwise() + b2_;
  }
  return z * white_inv_.transpose();
}

Scoreboard score_models(const std::vector<PredictiveModel>& models, const Dataset& test,
                        const std::vector<double>& alphas, whitening::Method method) {
  if (models.empty()) throw InvalidArgument("no models to score");
  for (double a : alphas) energy::EnergyOrder{a}.validate(static_cast<std::size_t>(test.targets.cols()));
  const WeightedSampleSet truth = WeightedSampleSet::from_matrix(test.targets);
  const whitening::WhiteningMap map = whitening::fit_whitening(truth, method);
  const WeightedSampleSet white_truth = whitening::apply_whitening(map, truth);

  Scoreboard sb;
  sb.alphas = alphas;
  sb.method = method;
  for (const auto& model : models) {
    const Eigen::MatrixXd pred = model.predict(test);
    Score s;
    s.kind = model.kind();
    const WeightedSampleSet white_pred = whitening::apply_whitening(map, WeightedSampleSet::from_matrix(pred));
    for (double a : alphas) s.energy.push_back(energy::energy_sq(white_pred, white_truth, {a}).value);
    s.rmse = std::sqrt((pred - test.targets).squaredNorm() / static_cast<double>(pred.size()));
    sb.rows.push_back(std::move(s));
  }
  for (std::size_t c = 0; c <= alphas.size(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < sb.rows.size(); ++r) {
      const double v = c < alphas.size() ? sb.rows[r].energy[c] : sb.rows[r].rmse;
      const double b = c < alphas.size() ? sb.rows[best].energy[c] : sb.rows[best].rmse;
      if (v < b) best = r;
    }
    sb.winners.push_back(best);
  }
  return sb;
}

nlohmann::json to_json(const Scoreboard& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"model", std::string(to_string(r.kind))}, {"energy", r.energy}, {"rmse", r.rmse}});
  nlohmann::json winners = nlohmann::json::object();
  for (std::size_t c = 0; c < s.winners.size(); ++c) {
    const std::string key = c < s.alphas.size() ? "alpha=" + fmt(s.alphas[c]) : "rmse";
    winners[key] = std::string(to_string(s.rows[s.winners[c]].kind));
  }
  return {{"alphas", s.alphas},
          {"whitening", std::string(whitening::to_string(s.method))},
          {"frame", "true_test_targets"},
          {"divergence", "energy_sq"},
          {"rows", rows},
          {"winner_index", s.winners},
          {"winners", winners}};
}

Scoreboard scoreboard_from_json(const nlohmann::json& j) {
  Scoreboard s;
  s.alphas = j.at("alphas").get<std::vector<double>>();
  s.method = whitening::parse_method(j.at("whitening").get<std::string>());
  for (const auto& r : j.at("rows")) {
    Score sc;
    sc.kind = parse_model(r.at("model").get<std::string>());
    sc.energy = r.at("energy").get<std::vector<double>>();
    sc.rmse = r.at("rmse").get<double>();
    s.rows.push_back(std::move(sc));
  }
  s.winners = j.at("winner_index").get<std::vector<std::size_t>>();
  return s;
}

std::string format_table(const Scoreboard& s) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-8s", "model");
  out << buf;
  for (double a : s.alphas) {
    std::snprintf(buf, sizeof buf, " %14s", ("alpha=" + fmt(a)).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, " %14s\n", "RMSE");
  out << buf;
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%-8s", std::string(to_string(s.rows[r].kind)).c_str());
    out << buf;
    for (std::size_t c = 0; c <= s.alphas.size(); ++c) {
      const double v = c < s.alphas.size() ? s.rows[r].energy[c] : s.rows[r].rmse;
      std::snprintf(buf, sizeof buf, " %13.6g%c", v, s.winners[c] == r ? '*' : ' ');
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

Scoreboard run_bench(const Dataset& data, const BenchConfig& config) {
  const auto [train, test] = split(data, config.split_seed);
  std::vector<PredictiveModel> models(config.models.size());
  parallel_for_blocks(config.models.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) models[k] = fit_model(config.models[k], train);
  });
  return score_models(models, test, config.alphas);
}

Scoreboard run_bench(const BenchConfig& config) {
  return run_bench(synth_dataset(config.data_seed, config.rows, config.regime, config.noise), config);
}

}  // namespace divkit::bench
