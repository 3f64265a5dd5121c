#pragma once

// Wind scenario generation and reduction.
//
// Sampling uses std::mt19937_64 (bit-exact across platforms) with hand-rolled
// uniform/normal/gamma transforms, because the std:: distribution adapters are
// implementation-defined and would break seed-for-seed reproducibility.

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndcgem/common.hpp"
#include "ndcgem/model.hpp"

namespace ndcgem {

using json = nlohmann::json;

// Per-hour beta parameters for a farm's output fraction of capacity.
struct BetaSpec {
  std::vector<double> alpha;
  std::vector<double> beta;

  int horizon() const { return static_cast<int>(alpha.size()); }

  double mean(int t) const { return alpha[t] / (alpha[t] + beta[t]); }
};

// Method-of-moments fit of Beta(alpha, beta) from mean/variance fractions.
// Requires 0 < m < 1 and 0 < v < m(1-m).
inline std::pair<double, double> fit_beta(double m, double v) {
  if (!(m > 0.0 && m < 1.0))
    throw ValidationError("beta fit: mean fraction must lie strictly in (0, 1)");
  const double bound = m * (1.0 - m);
  if (!(v > 0.0 && v < bound))
    throw ValidationError("beta fit: variance must lie strictly in (0, m(1-m))");
  const double k = bound / v - 1.0;
  return {m * k, (1.0 - m) * k};
}

inline BetaSpec make_beta_spec(const std::vector<double>& mean_frac,
                               const std::vector<double>& var_frac) {
  if (mean_frac.size() != var_frac.size())
    throw ValidationError("beta spec: mean/variance profiles differ in length");
  BetaSpec spec;
  for (size_t t = 0; t < mean_frac.size(); ++t) {
    auto [a, b] = fit_beta(mean_frac[t], var_frac[t]);
    spec.alpha.push_back(a);
    spec.beta.push_back(b);
  }
  return spec;
}

namespace rng {

inline double uniform01(std::mt19937_64& g) {
  // 53-bit mantissa draw in (0, 1); never returns an exact endpoint.
  return (static_cast<double>(g() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double normal(std::mt19937_64& g) {
  // Box-Muller; one fresh pair per call keeps the stream position
  // independent of call history.
  const double u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia-Tsang gamma sampling, shape boost for a < 1.
inline double gamma(std::mt19937_64& g, double a) {
  if (a < 1.0) {
    const double u = uniform01(g);
    return gamma(g, a + 1.0) * std::pow(u, 1.0 / a);
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal(g);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01(g);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double beta(std::mt19937_64& g, double a, double b) {
  const double x = gamma(g, a);
  const double y = gamma(g, b);
  return x / (x + y);
}

}  // namespace rng

// One wind realization: per-farm hourly MW.
struct WindProfile {
  std::map<std::string, std::vector<double>> farms;
};

struct Scenario {
  double weight = 0.0;
  WindProfile profile;
};

struct ScenarioSet {
  WindProfile da_forecast;
  std::vector<Scenario> rt_scenarios;
};

// Independent per-farm beta draws for every hour; farm k advances its own
// deterministic stream derived from (seed, k).
inline std::vector<WindProfile> sample_profiles(
    const std::vector<WindFarm>& farms,
    const std::map<std::string, BetaSpec>& specs, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_profiles: n must be >= 1");
  std::vector<WindProfile> out(n);
  for (size_t k = 0; k < farms.size(); ++k) {
    const auto& farm = farms[k];
    const auto it = specs.find(farm.id);
    if (it == specs.end())
      throw ValidationError("sample_profiles: no beta spec for farm " + farm.id);
    const BetaSpec& spec = it->second;
    std::mt19937_64 gen(seed + 0x9e3779b97f4a7c15ULL * (k + 1));
    for (int i = 0; i < n; ++i) {
      std::vector<double> profile(spec.horizon());
      for (int t = 0; t < spec.horizon(); ++t)
        profile[t] = farm.capacity * rng::beta(gen, spec.alpha[t], spec.beta[t]);
      out[i].farms[farm.id] = std::move(profile);
    }
  }
  return out;
}

inline WindProfile forecast_from_spec(const std::vector<WindFarm>& farms,
                                      const std::map<std::string, BetaSpec>& specs) {
  WindProfile f;
  for (const auto& farm : farms) {
    const BetaSpec& spec = specs.at(farm.id);
    std::vector<double> p(spec.horizon());
    for (int t = 0; t < spec.horizon(); ++t) p[t] = farm.capacity * spec.mean(t);
    f.farms[farm.id] = std::move(p);
  }
  return f;
}

namespace detail {

// Euclidean distance over the concatenated per-farm hourly vectors.
inline double profile_distance(const WindProfile& a, const WindProfile& b) {
  double s = 0.0;
  auto ia = a.farms.begin();
  auto ib = b.farms.begin();
  for (; ia != a.farms.end(); ++ia, ++ib) {
    const auto& va = ia->second;
    const auto& vb = ib->second;
    for (size_t t = 0; t < va.size(); ++t) {
      const double d = va[t] - vb[t];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

}  // namespace detail

// Fast-forward selection of k representatives with redistribution of the
// dropped probability mass to each sample's nearest kept neighbor
// (ties break toward the lower selected index).
inline std::vector<Scenario> fast_forward_reduce(const std::vector<WindProfile>& samples,
                                                 int k) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw ValidationError("fast_forward_reduce: empty sample set");
  if (k < 1 || k > n)
    throw ValidationError("fast_forward_reduce: need 1 <= k <= n");
  const double p = 1.0 / n;

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = detail::profile_distance(samples[i], samples[j]);

  // c[i][j]: cost of representing i by j given the current selection.
  std::vector<std::vector<double>> c = dist;
  std::vector<char> selected(n, 0);
  std::vector<int> order;
  for (int round = 0; round < k; ++round) {
    int best = -1;
    double best_z = 0.0;
    for (int u = 0; u < n; ++u) {
      if (selected[u]) continue;
      double z = 0.0;
      for (int i = 0; i < n; ++i)
        if (!selected[i] && i != u) z += p * c[i][u];
      if (best < 0 || z < best_z - 1e-15) {
        best = u;
        best_z = z;
      }
    }
    selected[best] = 1;
    order.push_back(best);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        c[i][j] = std::min(c[i][j], dist[i][best]);
  }

  std::vector<int> kept(order);
  std::sort(kept.begin(), kept.end());
  std::vector<double> weight(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (selected[i]) {
      weight[i] += p;
      continue;
    }
    int nearest = kept.front();
    for (int j : kept)
      if (dist[i][j] < dist[i][nearest] - 1e-15) nearest = j;
    weight[nearest] += p;
  }

  std::vector<Scenario> out;
  for (int j : kept) {
    Scenario s;
    s.weight = weight[j];
    s.profile = samples[j];
    out.push_back(std::move(s));
  }
  return out;
}

// --- scenario set JSON ---

inline json to_json(const ScenarioSet& set) {
  json j;
  json fc = json::object();
  for (const auto& [farm, p] : set.da_forecast.farms) fc[farm] = p;
  j["da_forecast"] = fc;
  j["rt_scenarios"] = json::array();
  for (const auto& s : set.rt_scenarios) {
    json pf = json::object();
    for (const auto& [farm, p] : s.profile.farms) pf[farm] = p;
    j["rt_scenarios"].push_back({{"weight", s.weight}, {"profiles", pf}});
  }
  return j;
}

inline ScenarioSet scenario_set_from_json(const json& j) {
  ScenarioSet set;
  if (!j.contains("da_forecast") || !j["da_forecast"].is_object())
    throw ValidationError("scenario set: missing 'da_forecast' object");
  for (const auto& [farm, p] : j["da_forecast"].items())
    set.da_forecast.farms[farm] = p.get<std::vector<double>>();
  if (!j.contains("rt_scenarios") || !j["rt_scenarios"].is_array())
    throw ValidationError("scenario set: missing 'rt_scenarios' array");
  for (const auto& js : j["rt_scenarios"]) {
    Scenario s;
    if (!js.contains("weight") || !js.contains("profiles"))
      throw ValidationError("scenario set: scenarios need 'weight' and 'profiles'");
    s.weight = js["weight"].get<double>();
    for (const auto& [farm, p] : js["profiles"].items())
      s.profile.farms[farm] = p.get<std::vector<double>>();
    set.rt_scenarios.push_back(std::move(s));
  }
  return set;
}

inline ScenarioSet load_scenario_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return scenario_set_from_json(j);
}

// Consistency of a scenario set against a system: every farm covered with
// horizon-length non-negative profiles, weights positive and summing to 1.
inline void validate_scenarios(const JointSystem& sys, const ScenarioSet& set) {
  auto check_profile = [&](const WindProfile& p, const std::string& what) {
    for (const auto& farm : sys.windfarms) {
      auto it = p.farms.find(farm.id);
      if (it == p.farms.end())
        throw ValidationError(what + ": missing profile for farm " + farm.id);
      detail::check_profile(it->second, sys.horizon, what + " farm " + farm.id);
      for (double v : it->second)
        if (v > farm.capacity * (1.0 + 1e-9))
          throw ValidationError(what + ": farm " + farm.id + " exceeds capacity");
    }
  };
  check_profile(set.da_forecast, "da_forecast");
  if (set.rt_scenarios.empty())
    throw ValidationError("scenario set has no RT scenarios");
  double total = 0.0;
  for (size_t i = 0; i < set.rt_scenarios.size(); ++i) {
    const auto& s = set.rt_scenarios[i];
    if (!(s.weight > 0.0))
      throw ValidationError("scenario " + std::to_string(i) + ": weight must be > 0");
    total += s.weight;
    check_profile(s.profile, "scenario " + std::to_string(i));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("scenario weights sum to " + std::to_string(total) +
                          ", expected 1");
}

}  // namespace ndcgem
