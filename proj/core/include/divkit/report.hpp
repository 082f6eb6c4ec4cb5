#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace divkit {

enum class Family { Energy, Fourier, Wasserstein, KL, Fisher, Cramer, GiniFamily };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);

/// Result of a divergence evaluation.
struct DivergenceReport {
  Family family = Family::Energy;
  double order = 0.0;           // alpha, s or p, depending on the family
  double value = 0.0;           // >= 0
  double error_estimate = 0.0;  // >= 0
  nlohmann::json diagnostics = nlohmann::json::object();
};

nlohmann::json to_json(const DivergenceReport& r);
DivergenceReport report_from_json(const nlohmann::json& j);

/// Non-finite doubles become null; everything else is emitted with round-trip precision.
nlohmann::json json_number(double x);

}  // namespace divkit
