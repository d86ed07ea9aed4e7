#include "gapforge/homogenized.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gapforge/dispersion.hpp"
#include "gapforge/error.hpp"

namespace gapforge {

namespace {

constexpr double kSigmaDistinctTol = 1e-12;

// (b_j - a_j) * prod_{i != j} (b_i - a_j) / (a_i - a_j); positive for every
// valid spec because each factor pairs two differences of equal sign.
double edge_product(const GapSpec& spec, std::size_t j) {
  double p = spec.beta(j) - spec.alpha(j);
  for (std::size_t i = 0; i < spec.m(); ++i) {
    if (i == j) continue;
    p *= (spec.beta(i) - spec.alpha(j)) / (spec.alpha(i) - spec.alpha(j));
  }
  return p;
}

void check_distinct(const std::vector<double>& sorted_sigma) {
  for (std::size_t k = 0; k + 1 < sorted_sigma.size(); ++k) {
    const double a = sorted_sigma[k];
    const double b = sorted_sigma[k + 1];
    if (std::abs(b - a) <= kSigmaDistinctTol * std::max(std::abs(a), std::abs(b))) {
      throw Error(ErrorCode::DuplicateSigma,
                  "channels " + std::to_string(k) + " and " + std::to_string(k + 1) +
                      " share the same resonance");
    }
  }
}

}  // namespace

double sphere_measure(int k) {
  if (k < 1) {
    throw Error(ErrorCode::InvalidDimension, "sphere_measure: k must be at least 1");
  }
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double channel_sigma(int n, const Channel& c) {
  if (n == 2) return c.d / (4.0 * c.b * c.b);
  return 0.5 * (n - 2) * std::pow(c.d, n - 2) * sphere_measure(n - 1) /
         (std::pow(c.b, n) * sphere_measure(n));
}

double channel_rho(int n, const Channel& c) { return std::pow(c.b, n) * sphere_measure(n); }

BubbleGeometry make_geometry(int n, std::vector<Channel> channels, double kappa) {
  if (n < 2) throw Error(ErrorCode::InvalidDimension, "geometry: n must be at least 2");
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidGeometry, "geometry: kappa must be positive");
  for (std::size_t j = 0; j < channels.size(); ++j) {
    if (!(channels[j].d > 0.0) || !(channels[j].b > 0.0) || !std::isfinite(channels[j].d) ||
        !std::isfinite(channels[j].b)) {
      throw Error(ErrorCode::InvalidGeometry,
                  "channels[" + std::to_string(j) + "]: d and b must be positive");
    }
  }
  std::stable_sort(channels.begin(), channels.end(), [n](const Channel& a, const Channel& b) {
    return channel_sigma(n, a) < channel_sigma(n, b);
  });
  std::vector<double> sigma;
  for (const auto& c : channels) sigma.push_back(channel_sigma(n, c));
  check_distinct(sigma);
  return BubbleGeometry{n, std::move(channels), kappa};
}

HomogenizedModel make_model(int n, std::vector<double> sigma, std::vector<double> rho) {
  if (sigma.size() != rho.size()) {
    throw Error(ErrorCode::InvalidGeometry, "model: sigma and rho must have equal length");
  }
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] > 0.0) || !(rho[j] > 0.0) || !std::isfinite(sigma[j]) ||
        !std::isfinite(rho[j])) {
      throw Error(ErrorCode::InvalidGeometry,
                  "model: sigma[" + std::to_string(j) + "] and rho must be positive");
    }
    if (j > 0 && !(sigma[j] > sigma[j - 1])) {
      throw Error(ErrorCode::DuplicateSigma, "model: sigma must be strictly increasing");
    }
  }
  check_distinct(sigma);
  HomogenizedModel model;
  model.n = n;
  model.sigma = std::move(sigma);
  model.rho = std::move(rho);
  return model;
}

HomogenizedModel forward_model(const BubbleGeometry& geom) {
  std::vector<std::size_t> order(geom.m());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sigma(geom.m());
  std::vector<double> rho(geom.m());
  for (std::size_t j = 0; j < geom.m(); ++j) {
    sigma[j] = channel_sigma(geom.n, geom.channels[j]);
    rho[j] = channel_rho(geom.n, geom.channels[j]);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] < sigma[b]; });
  HomogenizedModel model;
  model.n = geom.n;
  for (auto j : order) {
    model.sigma.push_back(sigma[j]);
    model.rho.push_back(rho[j]);
  }
  check_distinct(model.sigma);
  return model;
}

std::vector<double> weights_closed_form(const GapSpec& spec) {
  std::vector<double> rho(spec.m());
  for (std::size_t j = 0; j < spec.m(); ++j) {
    rho[j] = edge_product(spec, j) / spec.alpha(j);
  }
  return rho;
}

std::vector<double> solve_weight_system(const GapSpec& spec) {
  const auto m = static_cast<Eigen::Index>(spec.m());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(k, j) = spec.alpha(j) / (spec.beta(k) - spec.alpha(j));
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(std::abs(lu.determinant()) > 0.0)) {
    throw Error(ErrorCode::InternalInvariant, "weight system is singular");
  }
  const Eigen::VectorXd rho = lu.solve(Eigen::VectorXd::Ones(m));
  return {rho.data(), rho.data() + m};
}

Design design_geometry(const GapSpec& spec, double kappa) {
  const int n = spec.n;
  std::vector<Channel> channels(spec.m());
  for (std::size_t j = 0; j < spec.m(); ++j) {
    const double p = edge_product(spec, j);
    if (!(p > 0.0)) {
      throw Error(ErrorCode::InternalInvariant,
                  "design_geometry: nonpositive radicand for channel " + std::to_string(j));
    }
    const double b_radicand = p / (sphere_measure(n) * spec.alpha(j));
    if (n == 2) {
      channels[j].d = p / std::numbers::pi;
      channels[j].b = std::sqrt(b_radicand);
    } else {
      channels[j].d = std::pow(2.0 * p / (sphere_measure(n - 1) * (n - 2)), 1.0 / (n - 2));
      channels[j].b = std::pow(b_radicand, 1.0 / n);
    }
  }
  Design design;
  design.geometry = make_geometry(n, std::move(channels), kappa);
  design.model = forward_model(design.geometry);
  design.model.mu = mu_roots(design.model);
  return design;
}

void to_json(nlohmann::json& j, const BubbleGeometry& g) {
  std::vector<double> d, b;
  for (const auto& c : g.channels) {
    d.push_back(c.d);
    b.push_back(c.b);
  }
  j = {{"n", g.n}, {"d", d}, {"b", b}, {"kappa", g.kappa}};
}

void from_json(const nlohmann::json& j, BubbleGeometry& g) {
  const auto d = j.at("d").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (d.size() != b.size()) {
    throw Error(ErrorCode::InvalidGeometry, "geometry: d and b must have equal length");
  }
  std::vector<Channel> channels;
  for (std::size_t k = 0; k < d.size(); ++k) channels.push_back({d[k], b[k]});
  g = make_geometry(j.at("n").get<int>(), std::move(channels), j.value("kappa", 0.5));
}

void to_json(nlohmann::json& j, const HomogenizedModel& m) {
  j = {{"n", m.n}, {"sigma", m.sigma}, {"rho", m.rho}};
  if (m.mu) j["mu"] = *m.mu;
}

void from_json(const nlohmann::json& j, HomogenizedModel& m) {
  m = make_model(j.value("n", 0), j.at("sigma").get<std::vector<double>>(),
                 j.at("rho").get<std::vector<double>>());
  if (j.contains("mu")) m.mu = j.at("mu").get<std::vector<double>>();
}

}  // namespace gapforge
