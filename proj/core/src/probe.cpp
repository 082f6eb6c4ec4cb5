#include "divkit/probe.hpp"

#include <charconv>
#include <cmath>

#include "divkit/energy.hpp"
#include "divkit/errors.hpp"
#include "divkit/transport.hpp"

namespace divkit {

namespace {

double parse_order(std::string_view text, std::string_view whole) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidArgument("bad order in probe '" + std::string(whole) + "'");
  }
  return v;
}

std::string format_order(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

}  // namespace

std::string Probe::label() const {
  switch (family) {
    case Family::Energy:
      return "energy:" + format_order(order) + (norm == Norm::L1 ? ":l1" : "");
    case Family::Fourier:
      return "fourier:" + format_order(order);
    case Family::Wasserstein:
      return "w" + format_order(order);
    case Family::Cramer:
      return "cramer";
    default:
      return std::string(to_string(family));
  }
}

Probe parse_probe(std::string_view text) {
  Probe p;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "cramer") {
    p.family = Family::Cramer;
    p.order = 2.0;
    return p;
  }
  if (head == "energy") {
    p.family = Family::Energy;
    std::string_view order = rest;
    const auto second = rest.find(':');
    if (second != std::string_view::npos) {
      order = rest.substr(0, second);
      p.norm = parse_norm(rest.substr(second + 1));
    }
    p.order = order.empty() ? 1.0 : parse_order(order, text);
    return p;
  }
  if (head == "fourier") {
    p.family = Family::Fourier;
    p.order = rest.empty() ? 2.0 : parse_order(rest, text);
    return p;
  }
  if (head == "wasserstein") {
    p.family = Family::Wasserstein;
    p.order = rest.empty() ? 1.0 : parse_order(rest, text);
    return p;
  }
  if (head.size() > 1 && head[0] == 'w' && colon == std::string_view::npos) {
    p.family = Family::Wasserstein;
    p.order = parse_order(head.substr(1), text);
    return p;
  }
  throw InvalidArgument("unknown probe '" + std::string(text) + "' (expected energy:A, fourier:S, wP or cramer)");
}

std::vector<Probe> parse_probes(std::string_view text) {
  std::vector<Probe> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) out.push_back(parse_probe(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidArgument("no probes given");
  return out;
}

DivergenceReport evaluate(const Probe& probe, const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  switch (probe.family) {
    case Family::Energy:
      return energy::energy_sq(mu, nu, {probe.order, probe.norm}, probe.moment_tol);
    case Family::Fourier:
      return fourier::fourier_metric(mu, nu, {probe.order, mu.dim()}, probe.quad, probe.moment_tol);
    case Family::Wasserstein:
      return transport::wasserstein(mu, nu, probe.order);
    case Family::Cramer:
      return energy::cramer(mu, nu);
    default:
      throw InvalidArgument("probe family '" + std::string(to_string(probe.family)) + "' needs densities, not samples");
  }
}

}  // namespace divkit
