/*
 * campaign.hpp - configuration, energy sweeps and artifact output for the CLI.
 *
 * Config files are flat `key = value` text, '#' starts a comment. Unknown or
 * repeated keys are rejected. Every run writes one CSV per coupling and a
 * manifest.json echoing the effective configuration, which can be fed back
 * in to reproduce the CSVs byte for byte.
 */
#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>
#include "lyapcert/certificate.hpp"
#include "lyapcert/estimator.hpp"

namespace lyapcert {

inline constexpr const char* kVersion = "0.1.0";

using ConfigMap = std::map<std::string, std::string>;

enum class CampaignMode { certify_doubling, certify_toral, estimate, baseline, deviations, reproduce_figures };

inline std::string_view to_string(CampaignMode m) {
  switch (m) {
    case CampaignMode::certify_doubling: return "certify-doubling";
    case CampaignMode::certify_toral: return "certify-toral";
    case CampaignMode::estimate: return "estimate";
    case CampaignMode::baseline: return "baseline";
    case CampaignMode::deviations: return "deviations";
    case CampaignMode::reproduce_figures: return "reproduce-figures";
  }
  return "?";
}

/// Fixed 12-significant-digit, locale-independent formatting.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

/// Shortest round-trip formatting, used in file names and config echoes.
inline std::string format_short(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Defaults; also the set of accepted keys.
inline const ConfigMap& config_defaults() {
  static const ConfigMap defaults = {
      {"mode", "certify-doubling"},
      {"dynamics", "doubling"},
      {"K", "2"},
      {"A", "2,1,1,1"},
      {"potential", "cosine"},
      {"terms", ""},
      {"lambdas", "1"},
      {"N0", "6"},
      {"E_min", format_short(-std::numbers::sqrt2)},
      {"E_max", format_short(std::numbers::sqrt2)},
      {"E_count", "200"},
      {"energies", ""},
      {"x_grid", "1024"},
      {"theta_grid", "256"},
      {"toral_x_grid", "128"},
      {"segment_points", "4096"},
      {"refine", "true"},
      {"rigor", "fast"},
      {"representation", "fp-auto"},
      {"delta", "0.05"},
      {"atom_budget", std::to_string(kDefaultAtomBudget)},
      {"seed", "1"},
      {"N", "100000"},
      {"samples", "20"},
      {"mc_samples", "10000"},
      {"dev_delta", "0.1"},
      {"ladder", "100,1000,10000"},
      {"out", "out"},
      {"format", "csv"},
  };
  return defaults;
}

/// Values the reproduce-figures preset pins unless the user sets them.
inline const ConfigMap& figure_preset() {
  static const ConfigMap preset = {
      {"K", "2"},
      {"N0", "6"},
      {"potential", "cosine"},
      {"lambdas", "0.4,0.5,0.6,1,1.5,2"},
      {"E_min", format_short(-std::numbers::sqrt2)},
      {"E_max", format_short(std::numbers::sqrt2)},
      {"E_count", "200"},
      {"rigor", "fast"},
      {"representation", "fp-auto"},
  };
  return preset;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    out.push_back(trim(s.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorCode::config_invalid, what); }

template <typename T>
T parse_int(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) invalid("key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    invalid("key '" + key + "': expected a finite number, got '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  invalid("key '" + key + "': expected true/false, got '" + text + "'");
}

}  // namespace detail

/// Parses `key = value` lines. Rejects unknown and repeated keys.
inline ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) detail::invalid("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (!config_defaults().contains(key)) detail::invalid("unknown key '" + key + "'");
    if (out.contains(key)) detail::invalid("repeated key '" + key + "'");
    out[key] = value;
  }
  return out;
}

inline ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) detail::invalid("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Config echoed in a manifest.
inline ConfigMap load_manifest_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) detail::invalid("cannot read manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    detail::invalid(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) detail::invalid("manifest has no config object");
  ConfigMap out;
  for (const auto& [k, v] : j["config"].items()) {
    if (!config_defaults().contains(k)) detail::invalid("unknown key '" + k + "' in manifest");
    if (!v.is_string()) detail::invalid("manifest config values must be strings");
    out[k] = v.get<std::string>();
  }
  return out;
}

/// Validated, typed campaign configuration.
struct CampaignConfig {
  CampaignMode mode = CampaignMode::certify_doubling;
  ConfigMap effective;  // every key with its effective value (the manifest echo)

  std::int64_t K = 2;
  ToralMap A{};
  PotentialDescriptor potential = PotentialDescriptor::cosine(1.0);
  std::vector<double> lambdas;
  int N0 = 6;
  std::vector<double> energies;
  std::size_t x_grid = 1024, theta_grid = 256, toral_x_grid = 128, segment_points = 4096;
  bool refine = true;
  RigorMode rigor = RigorMode::fast;
  RepresentationMode representation = RepresentationMode::fp_auto;
  double delta = kDefaultBandMargin;
  std::uint64_t atom_budget = kDefaultAtomBudget;
  std::uint64_t seed = 1;
  std::int64_t N = 100000;
  std::size_t samples = 20, mc_samples = 10000;
  double dev_delta = 0.1;
  std::vector<std::int64_t> ladder;
  std::filesystem::path out = "out";

  bool certify_mode() const {
    return mode == CampaignMode::certify_doubling || mode == CampaignMode::certify_toral ||
           mode == CampaignMode::reproduce_figures;
  }

  bool toral = false;

  DynamicsDescriptor dynamics() const {
    return toral ? DynamicsDescriptor::toral(A) : DynamicsDescriptor::doubling(K);
  }
};

inline CampaignMode parse_mode(const std::string& text) {
  for (auto m : {CampaignMode::certify_doubling, CampaignMode::certify_toral, CampaignMode::estimate,
                 CampaignMode::baseline, CampaignMode::deviations, CampaignMode::reproduce_figures}) {
    if (to_string(m) == text) return m;
  }
  detail::invalid("unknown mode '" + text + "'");
}

/// Merges defaults, the reproduce-figures preset (if that mode), the file
/// values and then the overrides, and validates the result.
inline CampaignConfig build_config(const ConfigMap& file_values, const ConfigMap& overrides = {}) {
  using namespace detail;
  ConfigMap user = file_values;
  for (const auto& [k, v] : overrides) {
    if (!config_defaults().contains(k)) invalid("unknown key '" + k + "'");
    user[k] = v;
  }
  ConfigMap eff = config_defaults();
  const std::string mode_text = user.contains("mode") ? user.at("mode") : eff.at("mode");
  CampaignConfig c;
  c.mode = parse_mode(mode_text);
  if (c.mode == CampaignMode::reproduce_figures) {
    for (const auto& [k, v] : figure_preset()) eff[k] = v;
  }
  for (const auto& [k, v] : user) eff[k] = v;
  c.effective = eff;

  if (eff["dynamics"] != "doubling" && eff["dynamics"] != "toral") invalid("dynamics must be doubling or toral");
  if (c.mode == CampaignMode::certify_toral) eff["dynamics"] = "toral";
  if (c.mode == CampaignMode::certify_doubling || c.mode == CampaignMode::reproduce_figures) {
    if (eff["dynamics"] == "toral") invalid("mode " + mode_text + " needs dynamics = doubling");
  }
  c.toral = eff["dynamics"] == "toral";
  c.effective = eff;

  c.K = parse_int<std::int64_t>("K", eff["K"]);
  if (c.K < 2) invalid("K must be an integer >= 2");
  {
    const auto parts = split(eff["A"], ',');
    if (parts.size() != 4) invalid("A must be four integers a,b,c,d");
    c.A = {parse_int<std::int64_t>("A", parts[0]), parse_int<std::int64_t>("A", parts[1]),
           parse_int<std::int64_t>("A", parts[2]), parse_int<std::int64_t>("A", parts[3])};
    if (c.toral) {
      if (c.A.det() != 1) invalid("A must have determinant 1");
      if (std::llabs(c.A.trace()) <= 2) invalid("A must be hyperbolic (|trace| > 2)");
    }
  }

  c.lambdas = parse_double_list("lambdas", eff["lambdas"]);
  if (c.lambdas.empty()) invalid("lambdas is empty");

  if (eff["potential"] == "cosine") {
    if (!trim(eff["terms"]).empty()) invalid("terms is only valid with potential = trig");
    c.potential = PotentialDescriptor::cosine(1.0);
  } else if (eff["potential"] == "trig") {
    std::vector<TrigTerm> terms;
    for (const auto& item : split(eff["terms"], ';')) {
      if (item.empty()) continue;
      const auto f = split(item, ':');
      if (f.size() != 4) invalid("each trig term is cos_coeff:sin_coeff:n1:n2");
      terms.push_back({parse_double("terms", f[0]), parse_double("terms", f[1]), parse_int<int>("terms", f[2]),
                       parse_int<int>("terms", f[3])});
    }
    if (terms.empty()) invalid("potential = trig needs at least one term");
    c.potential = PotentialDescriptor::trig(std::move(terms), 1.0);
  } else {
    invalid("potential must be cosine or trig");
  }
  if (!c.toral && !c.potential.is_one_dimensional()) invalid("a circle potential cannot use n2 != 0");

  c.N0 = parse_int<int>("N0", eff["N0"]);
  if (c.N0 < 1) invalid("N0 must be >= 1");

  if (user.contains("energies")) {
    c.energies = parse_double_list("energies", eff["energies"]);
    if (c.energies.empty()) invalid("energy list is empty");
  } else {
    const double lo = parse_double("E_min", eff["E_min"]);
    const double hi = parse_double("E_max", eff["E_max"]);
    const auto n = parse_int<std::int64_t>("E_count", eff["E_count"]);
    if (n < 1) invalid("energy list is empty (E_count < 1)");
    if (hi < lo) invalid("E_max < E_min");
    for (std::int64_t i = 0; i < n; ++i) {
      c.energies.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    std::string listed;
    for (double E : c.energies) listed += (listed.empty() ? "" : ",") + format_short(E);
    c.effective["energies"] = listed;
  }

  c.x_grid = parse_int<std::size_t>("x_grid", eff["x_grid"]);
  c.theta_grid = parse_int<std::size_t>("theta_grid", eff["theta_grid"]);
  c.toral_x_grid = parse_int<std::size_t>("toral_x_grid", eff["toral_x_grid"]);
  c.segment_points = parse_int<std::size_t>("segment_points", eff["segment_points"]);
  if (c.x_grid == 0 || c.theta_grid == 0 || c.toral_x_grid == 0 || c.segment_points == 0) {
    invalid("grid resolutions must be positive");
  }
  c.refine = parse_bool("refine", eff["refine"]);
  if (eff["rigor"] == "fast") {
    c.rigor = RigorMode::fast;
  } else if (eff["rigor"] == "slack") {
    c.rigor = RigorMode::slack_accounted;
  } else {
    invalid("rigor must be fast or slack");
  }
  if (eff["representation"] == "raw") {
    c.representation = RepresentationMode::raw;
  } else if (eff["representation"] == "fp-auto") {
    c.representation = RepresentationMode::fp_auto;
  } else {
    invalid("representation must be raw or fp-auto");
  }
  c.delta = parse_double("delta", eff["delta"]);
  if (!(c.delta > 0.0 && c.delta < 2.0)) invalid("delta must lie in (0, 2)");
  c.atom_budget = parse_int<std::uint64_t>("atom_budget", eff["atom_budget"]);
  c.seed = parse_int<std::uint64_t>("seed", eff["seed"]);
  c.N = parse_int<std::int64_t>("N", eff["N"]);
  if (c.N < 1) invalid("N must be >= 1");
  c.samples = parse_int<std::size_t>("samples", eff["samples"]);
  c.mc_samples = parse_int<std::size_t>("mc_samples", eff["mc_samples"]);
  if (c.samples == 0 || c.mc_samples == 0) invalid("sample counts must be positive");
  c.dev_delta = parse_double("dev_delta", eff["dev_delta"]);
  if (!(c.dev_delta > 0.0)) invalid("dev_delta must be > 0");
  for (const auto& item : split(eff["ladder"], ',')) {
    if (!item.empty()) c.ladder.push_back(parse_int<std::int64_t>("ladder", item));
  }
  if (c.ladder.empty() || c.ladder.front() < 1) invalid("ladder must be a nonempty list of N >= 1");
  for (std::size_t i = 1; i < c.ladder.size(); ++i) {
    if (c.ladder[i] <= c.ladder[i - 1]) invalid("ladder must be increasing");
  }
  if (eff["out"].empty()) invalid("out must name a directory");
  c.out = eff["out"];
  if (eff["format"] != "csv") invalid("format must be csv");
  return c;
}

struct CampaignOptions {
  bool require_positive = false;
  unsigned threads = 0;
};

struct CampaignResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
  std::size_t inconclusive = 0;
  std::string message;
};

namespace detail {

inline std::string certify_csv(const CertificateReport& report) {
  std::string s = "E,raw_bound,normalized,slack,error_term,verdict\n";
  for (const auto& r : report.rows) {
    s += format_number(r.energy) + "," + format_number(r.raw_bound) + "," + format_number(r.normalized) + "," +
         format_number(r.slack) + "," + format_number(r.error_term) + "," + to_string(r.verdict) + "\n";
  }
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Runs the campaign and writes its artifacts under `cfg.out`.
/// Exit codes: 0 done, 1 config-invalid, 2 INCONCLUSIVE with require_positive,
/// 3 budget-exceeded.
inline CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignOptions& opts = {}) {
  CampaignResult result;
  const auto started_clock = std::chrono::steady_clock::now();
  const std::string started = detail::utc_now();
  try {
    std::filesystem::create_directories(cfg.out);
    const DynamicsDescriptor dyn = cfg.dynamics();
    for (double lambda : cfg.lambdas) {
      CocycleSpec spec{cfg.potential, 0.0, dyn};
      spec.potential.coupling = lambda;
      std::string csv;
      if (cfg.certify_mode()) {
        CertificateRequest req{spec, cfg.N0, cfg.energies};
        req.x_grid = cfg.x_grid;
        req.theta_grid = cfg.theta_grid;
        req.toral_x_grid = cfg.toral_x_grid;
        req.segment_points = cfg.segment_points;
        req.representation = cfg.representation;
        req.delta = cfg.delta;
        req.rigor = cfg.rigor;
        req.refine = cfg.refine;
        req.atom_budget = cfg.atom_budget;
        req.threads = opts.threads;
        const CertificateReport report =
            cfg.mode == CampaignMode::certify_toral ? certify_toral(req) : certify_doubling(req);
        for (const auto& r : report.rows) result.inconclusive += r.verdict == Verdict::inconclusive ? 1 : 0;
        csv = detail::certify_csv(report);
      } else if (cfg.mode == CampaignMode::estimate) {
        csv = "E,mean,stddev,N,samples\n";
        for (double E : cfg.energies) {
          spec.energy = E;
          const auto frame = resolve_frame(E, cfg.representation, cfg.delta);
          const auto est = direct_lyapunov(spec, cfg.N, cfg.samples, cfg.seed, frame, opts.threads);
          csv += format_number(E) + "," + format_number(est.mean) + "," + format_number(est.stddev) + "," +
                 std::to_string(est.N) + "," + std::to_string(est.samples) + "\n";
        }
      } else if (cfg.mode == CampaignMode::baseline) {
        csv = "E,mean,stddev,N,samples\n";
        for (double E : cfg.energies) {
          const auto frame = resolve_frame(E, cfg.representation, cfg.delta);
          const auto b = furstenberg_baseline(spec.potential, E, cfg.N0, cfg.mc_samples, cfg.seed, cfg.theta_grid,
                                              frame);
          const double sd = b.min_stderr * std::sqrt(static_cast<double>(b.samples));
          csv += format_number(E) + "," + format_number(b.min_per_site) + "," + format_number(sd) + "," +
                 std::to_string(b.N0) + "," + std::to_string(b.samples) + "\n";
        }
      } else {
        csv = "E,delta,N,mean,fraction,samples\n";
        for (double E : cfg.energies) {
          spec.energy = E;
          const auto frame = resolve_frame(E, cfg.representation, cfg.delta);
          const auto prof = deviation_profile(spec, cfg.dev_delta, cfg.ladder, cfg.samples, cfg.seed, frame,
                                              opts.threads);
          for (std::size_t r = 0; r < prof.ladder.size(); ++r) {
            csv += format_number(E) + "," + format_number(prof.delta) + "," + std::to_string(prof.ladder[r]) + "," +
                   format_number(prof.means[r]) + "," + format_number(prof.fractions[r]) + "," +
                   std::to_string(prof.samples) + "\n";
          }
        }
      }
      const auto path = cfg.out / (std::string(to_string(cfg.mode)) + "_lambda_" + format_short(lambda) + ".csv");
      detail::write_file(path, csv);
      result.outputs.push_back(path);
    }
  } catch (const Error& e) {
    result.message = e.what();
    result.exit_code = e.code() == ErrorCode::budget_exceeded ? 3 : 1;
    return result;
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_clock).count();
  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::object();
  for (const auto& [k, v] : cfg.effective) manifest["config"][k] = v;
  manifest["version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["started"] = started;
  manifest["elapsed_s"] = elapsed;
  manifest["outputs"] = nlohmann::json::array();
  for (const auto& p : result.outputs) manifest["outputs"].push_back(p.filename().string());
  manifest["assumptions"] = {"potential f = " + cfg.potential.describe() + " scaled by each lambda"};
  result.manifest = cfg.out / "manifest.json";
  detail::write_file(result.manifest, manifest.dump(2) + "\n");

  if (opts.require_positive && cfg.certify_mode() && result.inconclusive > 0) {
    result.exit_code = 2;
    result.message = std::to_string(result.inconclusive) + " energies INCONCLUSIVE";
  }
  return result;
}

}  // namespace lyapcert
