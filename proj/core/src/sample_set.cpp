#include "divkit/sample_set.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"

namespace divkit {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

std::uint64_t bits(double x) {
  if (x == 0.0) x = 0.0;  // fold -0.0 onto +0.0
  return std::bit_cast<std::uint64_t>(x);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(row, "column " + std::to_string(col + 1) + ": non-numeric cell '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(row, "column " + std::to_string(col + 1) + ": non-finite value");
  }
  return v;
}

}  // namespace

WeightedSampleSet::WeightedSampleSet(std::size_t dim, std::vector<double> coords,
                                     std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw InvalidArgument("sample set dimension must be positive");
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw InvalidArgument("sample set needs at least one point and a whole number of coordinates");
  }
  const std::size_t n = coords_.size() / dim_;
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (!std::isfinite(coords_[k])) {
      throw InvalidArgument("non-finite coordinate at point " + std::to_string(k / dim_));
    }
  }
  if (weights_.empty()) {
    weights_.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (weights_.size() != n) throw InvalidArgument("weight count does not match point count");
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
        throw InvalidArgument("weight of point " + std::to_string(i) + " is negative or not finite");
      }
      total += weights_[i];
    }
    const double t = total.value();
    if (!(t > 0.0)) throw InvalidArgument("weights sum to zero");
    for (double& w : weights_) w /= t;
  }

  std::uint64_t h = kFnvOffset;
  fnv_mix(h, dim_);
  for (double c : coords_) fnv_mix(h, bits(c));
  for (double w : weights_) fnv_mix(h, bits(w));
  fingerprint_ = h;
}

WeightedSampleSet WeightedSampleSet::from_values(std::vector<double> values, std::vector<double> weights) {
  return WeightedSampleSet(1, std::move(values), std::move(weights));
}

WeightedSampleSet WeightedSampleSet::from_matrix(const Eigen::MatrixXd& points, std::vector<double> weights) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  std::vector<double> coords(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) coords[i * d + k] = points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return WeightedSampleSet(d, std::move(coords), std::move(weights));
}

Eigen::MatrixXd WeightedSampleSet::matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = 0; k < dim_; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = coord(i, k);
  return m;
}

WeightedSampleSet WeightedSampleSet::transformed(const Eigen::MatrixXd& a) const {
  if (static_cast<std::size_t>(a.cols()) != dim_) {
    throw DimensionMismatch("linear map has " + std::to_string(a.cols()) + " columns, samples have dim " +
                            std::to_string(dim_));
  }
  const auto out_dim = static_cast<std::size_t>(a.rows());
  std::vector<double> out(size() * out_dim);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t r = 0; r < out_dim; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) * coord(i, k);
      out[i * out_dim + r] = s;
    }
  }
  return WeightedSampleSet(out_dim, std::move(out), weights_);
}

WeightedSampleSet WeightedSampleSet::shifted(std::span<const double> shift) const {
  if (shift.size() != dim_) throw DimensionMismatch("shift vector has wrong dimension");
  std::vector<double> out = coords_;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = 0; k < dim_; ++k) out[i * dim_ + k] += shift[k];
  return WeightedSampleSet(dim_, std::move(out), weights_);
}

WeightedSampleSet WeightedSampleSet::scaled(double c) const {
  std::vector<double> out = coords_;
  for (double& x : out) x *= c;
  return WeightedSampleSet(dim_, std::move(out), weights_);
}

WeightedSampleSet parse_samples(const std::string& text, const std::optional<std::string>& weight_column) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw ParseError(std::max<std::size_t>(row, 1), "missing header line");

  std::optional<std::size_t> wcol;
  if (weight_column) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == *weight_column) wcol = c;
    if (!wcol) throw ParseError(row, "weight column '" + *weight_column + "' not found in header");
  } else {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (lower(header[c]) == "weight") wcol = c;
  }
  const std::size_t width = header.size();
  const std::size_t dim = width - (wcol ? 1 : 0);
  if (dim == 0) throw ParseError(row, "no coordinate columns");

  std::vector<double> coords;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError(row, "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const double v = parse_cell(fields[c], row, c);
      if (wcol && c == *wcol) {
        if (v < 0.0) throw ParseError(row, "negative weight");
        weights.push_back(v);
      } else {
        coords.push_back(v);
      }
    }
  }
  if (coords.empty()) throw ParseError(row, "no data rows");
  try {
    return WeightedSampleSet(dim, std::move(coords), std::move(weights));
  } catch (const InvalidArgument& e) {
    throw ParseError(row, e.what());
  }
}

WeightedSampleSet load_samples(const std::string& path, const std::optional<std::string>& weight_column) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_samples(buf.str(), weight_column);
}

std::string format_samples(const WeightedSampleSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.dim(); ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "weight\n";
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t k = 0; k < set.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", set.coord(i, k));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", set.weight(i));
    out += buf;
  }
  return out;
}

void save_samples(const std::string& path, const WeightedSampleSet& set) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << format_samples(set);
  if (!f) throw IoError("write failed for '" + path + "'");
}

namespace {

// Graded-lex enumeration of exponent vectors with total order exactly k.
void compositions(std::size_t dim, int k, std::vector<int>& cur, std::size_t pos,
                  std::vector<std::vector<int>>& out) {
  if (pos + 1 == dim) {
    cur[pos] = k;
    out.push_back(cur);
    return;
  }
  for (int e = k; e >= 0; --e) {
    cur[pos] = e;
    compositions(dim, k - e, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<Moment> MomentTable::of_order(int k) const {
  std::vector<Moment> out;
  for (const auto& m : entries) {
    int total = 0;
    for (int e : m.exponents) total += e;
    if (total == k) out.push_back(m);
  }
  return out;
}

MomentTable moments(const WeightedSampleSet& mu, int order) {
  if (order < 0 || order > kMaxMomentOrder) {
    throw InvalidArgument("moment order must be in [0, 4], got " + std::to_string(order));
  }
  MomentTable table;
  table.dim = mu.dim();
  table.max_order = order;
  for (int k = 0; k <= order; ++k) {
    std::vector<std::vector<int>> exps;
    std::vector<int> cur(mu.dim(), 0);
    compositions(mu.dim(), k, cur, 0, exps);
    for (auto& e : exps) {
      if (k == 0) {
        table.entries.push_back({e, 1.0});
        continue;
      }
      CompensatedSum s;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        double term = mu.weight(i);
        for (std::size_t d = 0; d < mu.dim(); ++d)
          for (int p = 0; p < e[d]; ++p) term *= mu.coord(i, d);
        s += term;
      }
      table.entries.push_back({std::move(e), s.value()});
    }
  }
  return table;
}

int MomentMismatch::order() const {
  int total = 0;
  for (int e : exponents) total += e;
  return total;
}

std::string MomentMismatch::describe() const {
  std::string idx = "(";
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    if (k) idx += ",";
    idx += std::to_string(exponents[k]);
  }
  idx += ")";
  char buf[160];
  std::snprintf(buf, sizeof buf, "order-%d moment %s differs: %.17g vs %.17g", order(), idx.c_str(), lhs, rhs);
  return buf;
}

std::optional<MomentMismatch> moment_mismatch(const WeightedSampleSet& a, const WeightedSampleSet& b, int order,
                                              double tol) {
  if (a.dim() != b.dim()) throw DimensionMismatch("moment comparison needs equal dimensions");
  if (order <= 0) return std::nullopt;
  const auto ma = moments(a, order);
  const auto mb = moments(b, order);
  for (std::size_t k = 0; k < ma.entries.size(); ++k) {
    const double x = ma.entries[k].value;
    const double y = mb.entries[k].value;
    if (std::abs(x - y) > tol * std::max({1.0, std::abs(x), std::abs(y)})) {
      return MomentMismatch{ma.entries[k].exponents, x, y};
    }
  }
  return std::nullopt;
}

int matched_moment_order(const WeightedSampleSet& a, const WeightedSampleSet& b, int max_order, double tol) {
  max_order = std::min(max_order, kMaxMomentOrder);
  const auto mm = moment_mismatch(a, b, max_order, tol);
  return mm ? mm->order() - 1 : max_order;
}

Eigen::VectorXd mean(const WeightedSampleSet& mu) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(mu.dim()));
  for (std::size_t k = 0; k < mu.dim(); ++k) {
    CompensatedSum s;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * mu.coord(i, k);
    m(static_cast<Eigen::Index>(k)) = s.value();
  }
  return m;
}

Covariance covariance(const WeightedSampleSet& mu) {
  const std::size_t n = mu.dim();
  const Eigen::VectorXd m = mean(mu);
  Covariance out;
  out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      CompensatedSum s;
      const double ma = m(static_cast<Eigen::Index>(a));
      const double mb = m(static_cast<Eigen::Index>(b));
      for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * (mu.coord(i, a) - ma) * (mu.coord(i, b) - mb);
      out.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s.value();
      out.matrix(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = s.value();
    }
  }
  const double trace = out.matrix.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues()(0);
  out.degenerate = !(trace > 0.0) || out.min_eigenvalue <= 1e-10 * trace;
  return out;
}

}  // namespace divkit
