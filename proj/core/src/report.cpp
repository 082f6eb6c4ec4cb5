#include "divkit/report.hpp"

#include <cmath>
#include <limits>

#include "divkit/errors.hpp"

namespace divkit {

namespace {

constexpr std::pair<Family, std::string_view> kFamilyNames[] = {
    {Family::Energy, "energy"}, {Family::Fourier, "fourier"}, {Family::Wasserstein, "wasserstein"},
    {Family::KL, "kl"},         {Family::Fisher, "fisher"},   {Family::Cramer, "cramer"},
    {Family::GiniFamily, "gini"},
};

double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string_view to_string(Family f) {
  for (const auto& [fam, name] : kFamilyNames)
    if (fam == f) return name;
  return "unknown";
}

Family parse_family(std::string_view s) {
  for (const auto& [fam, name] : kFamilyNames)
    if (name == s) return fam;
  throw InvalidArgument("unknown divergence family '" + std::string(s) + "'");
}

nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

nlohmann::json to_json(const DivergenceReport& r) {
  return {
      {"family", std::string(to_string(r.family))},
      {"order", json_number(r.order)},
      {"value", json_number(r.value)},
      {"error_estimate", json_number(r.error_estimate)},
      {"diagnostics", r.diagnostics},
  };
}

DivergenceReport report_from_json(const nlohmann::json& j) {
  DivergenceReport r;
  r.family = parse_family(j.at("family").get<std::string>());
  r.order = number_or_nan(j.at("order"));
  r.value = number_or_nan(j.at("value"));
  r.error_estimate = number_or_nan(j.at("error_estimate"));
  r.diagnostics = j.value("diagnostics", nlohmann::json::object());
  return r;
}

}  // namespace divkit
