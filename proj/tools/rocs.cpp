// rocs: simulate -> extract -> stats -> build-kb -> query.
//
// Exit status: 0 success, 1 usage, 2 input/format error, 3 domain error,
// 4 partial success (some bundles failed to extract).

#include "rocs/catalog.hpp"
#include "rocs/config.hpp"
#include "rocs/dataset.hpp"
#include "rocs/io.hpp"
#include "rocs/knowledge.hpp"
#include "rocs/pipeline.hpp"
#include "rocs/substitution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <tuple>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace rocs;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;
constexpr int kExitPartial = 4;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::parse_error:
    case ErrorCode::io_error:
    case ErrorCode::schema_mismatch:
    case ErrorCode::duplicate_key: return kExitInput;
    case ErrorCode::invalid_argument: return kExitUsage;
    default: return kExitDomain;
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) fail(ErrorCode::io_error, "write to '" + p.string() + "' failed");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::ordered_json read_json(const fs::path& p) {
  try {
    return nlohmann::ordered_json::parse(read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::parse_error, p.string() + ": " + e.what());
  }
}

// Options shared by all subcommands; flags override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> eta;
  std::optional<std::string> variance;
  std::optional<double> threshold;

  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    if (seed) c.seed = *seed;
    if (eta) c.default_eta = *eta;
    if (variance) c.variance = parse_variance(*variance);
    if (threshold) c.threshold = *threshold;
    validate(c);
    return c;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Pipeline configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Root seed for every random stream");
}

int cmd_simulate(const Common& common, const std::string& scene_path, const std::string& out_dir) {
  auto cfg = common.resolve();
  auto scene = io::load_scene(scene_path);
  std::size_t written = 0;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    for (int rep = 1; rep <= scene.repetitions; ++rep) {
      auto b = sim::synthesize_bundle(o, scene.noise, bundle_seed(cfg.seed, i, rep), scene.params, rep);
      io::write_bundle(io::bundle_path(out_dir, o.class_label, o.instance_id, rep), b);
      ++written;
    }
  }
  std::cerr << "simulate: " << scene.objects.size() << " objects, " << written << " bundles -> " << out_dir << '\n';
  return 0;
}

int cmd_catalog(const Common& common, const std::string& out, int instances, int repetitions, double point_sigma,
                double marker_sigma, double effort_sigma) {
  auto cfg = common.resolve();
  if (instances < 1 || repetitions < 1) fail(ErrorCode::invalid_argument, "instances and repetitions must be >= 1");
  io::Scene sc;
  sc.objects = catalog::household_catalog(derive_seed(cfg.seed, "catalog"), instances);
  // Section names are instance ids, so qualify them with the class.
  for (auto& o : sc.objects) o.instance_id = o.class_label + "_" + o.instance_id;
  sc.repetitions = repetitions;
  sc.noise = {point_sigma, marker_sigma, effort_sigma};
  sim::validate(sc.noise);
  std::ostringstream ss;
  io::write_scene(ss, sc);
  write_text(out, ss.str());
  std::cerr << "catalog: " << sc.objects.size() << " objects -> " << out << '\n';
  return 0;
}

int cmd_extract(const Common& common, const std::string& bundles, const std::string& dataset_in,
                const std::string& out) {
  auto cfg = common.resolve();
  std::vector<dataset::ObservationRecord> records;
  std::size_t failures = 0;
  if (!dataset_in.empty()) {
    std::vector<std::string> warnings;
    records = dataset::ingest(dataset_in, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  } else {
    for (const auto& dir : io::find_bundles(bundles)) {
      try {
        auto x = extract_observation(io::read_bundle(dir), cfg);
        if (x.roughness_note) std::cerr << "note: " << dir.string() << ": roughness missing (" << *x.roughness_note << ")\n";
        records.push_back(std::move(x.record));
      } catch (const Error& e) {
        ++failures;
        std::cerr << "warning: " << code_name(e.code()) << ": " << dir.string() << ": " << e.what() << '\n';
      }
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.class_label, a.instance_id, a.repetition) < std::tie(b.class_label, b.instance_id, b.repetition);
  });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].class_label == records[i - 1].class_label && records[i].instance_id == records[i - 1].instance_id &&
        records[i].repetition == records[i - 1].repetition)
      fail(ErrorCode::duplicate_key, "duplicate observation " + records[i].class_label + "/" + records[i].instance_id +
                                         " repetition " + std::to_string(records[i].repetition));
  auto csv = dataset::to_csv(records);
  if (out.empty() || out == "-")
    std::cout << csv;
  else
    write_text(out, csv);
  std::cerr << "extract: " << records.size() << " records";
  if (failures) std::cerr << ", " << failures << " bundles failed";
  std::cerr << '\n';
  return failures ? kExitPartial : 0;
}

int cmd_stats(const Common& common, const std::string& dataset_path, const std::string& out_dir) {
  auto cfg = common.resolve();
  std::vector<std::string> warnings;
  auto records = dataset::ingest(dataset_path, &warnings);
  auto table = dataset::mean_variance_table(records, cfg.variance);
  auto means = dataset::instance_means(records);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  std::ostringstream var, cor, cov;
  dataset::write_variance_csv(var, table);
  dataset::write_correlation_csv(cor, dataset::pearson_matrix(means));
  dataset::write_coverage_csv(cov, dataset::coverage_stats(means));
  fs::path dir(out_dir);
  write_text(dir / "variance.csv", var.str());
  write_text(dir / "correlation.csv", cor.str());
  write_text(dir / "coverage.csv", cov.str());
  std::cerr << "stats: " << records.size() << " records, " << means.size() << " instances, "
            << variance_name(cfg.variance) << " variance -> " << out_dir << '\n';
  return 0;
}

int cmd_build_kb(const Common& common, const std::string& dataset_path, const std::string& out) {
  auto cfg = common.resolve();
  auto records = dataset::ingest(dataset_path);
  auto kb = knowledge::build(records, cfg.build_config());
  write_text(out, knowledge::to_json(kb).dump(2) + "\n");
  std::cerr << "build-kb: " << kb.models.size() << " properties, " << kb.holds.size() << " holds, "
            << kb.concepts.size() << " concepts -> " << out << '\n';
  return 0;
}

int cmd_query(const Common& common, const std::string& kb_path, const std::string& query_path, const std::string& out,
              const std::string& heatmap) {
  auto cfg = common.resolve();
  auto kb = knowledge::from_json(read_json(kb_path));
  auto queries = substitution::parse_queries(read_json(query_path));
  std::vector<substitution::Result> results;
  for (const auto& q : queries) results.push_back(substitution::substitute(kb, q, cfg.threshold));
  auto text = substitution::to_json(results, cfg.threshold).dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text(out, text);
  if (!heatmap.empty()) {
    std::ostringstream ss;
    substitution::write_heatmap_csv(ss, results);
    write_text(heatmap, ss.str());
  }
  return 0;
}

int cmd_pyramid(const Common& common, const std::string& dataset_path, const std::string& property, int k_min, int k_max,
                const std::string& out) {
  auto cfg = common.resolve();
  auto prop = knowledge::parse_prop(property);
  if (!prop) fail(ErrorCode::invalid_argument, "unknown property '" + property + "'");
  auto means = dataset::instance_means(dataset::ingest(dataset_path));
  auto norm = knowledge::fit_normalization(means);
  auto pv = knowledge::collect(*prop, means, norm);
  if (k_max <= 0) {
    std::set<std::string> classes;
    for (const auto& k : pv.instances) classes.insert(k.class_label);
    k_max = static_cast<int>(classes.size());
  }
  auto levels = knowledge::partition_pyramid(pv, k_min, k_max, derive_seed(cfg.seed, "pyramid"));
  std::ostringstream ss;
  knowledge::write_pyramid_csv(ss, property, levels);
  if (out.empty() || out == "-")
    std::cout << ss.str();
  else
    write_text(out, ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot-centric object knowledge: feature extraction, dataset statistics, knowledge base, substitution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rocs 1.0.0");

  Common common;
  std::string scene, out, bundles, dataset_in, kb, query, heatmap, property = "containment";
  int instances = 10, repetitions = 10, k_min = 2, k_max = 0;
  double point_sigma = 0.0, marker_sigma = 0.0, effort_sigma = 0.0;

  auto* sim_cmd = app.add_subcommand("simulate", "Render a scene file into feature bundle directories");
  add_common(sim_cmd, common);
  sim_cmd->add_option("scene", scene, "Scene file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", out, "Output directory")->required();

  auto* cat_cmd = app.add_subcommand("catalog", "Write a scene file for the eleven-class household catalog");
  add_common(cat_cmd, common);
  cat_cmd->add_option("--out", out, "Scene file to write")->required();
  cat_cmd->add_option("--instances", instances, "Instances per class")->check(CLI::Range(1, 1000));
  cat_cmd->add_option("--repetitions", repetitions, "Repetitions per instance")->check(CLI::Range(1, 1000));
  cat_cmd->add_option("--point-sigma", point_sigma, "Point noise std-dev (m)")->check(CLI::NonNegativeNumber);
  cat_cmd->add_option("--marker-sigma", marker_sigma, "Marker distance noise std-dev (m)")->check(CLI::NonNegativeNumber);
  cat_cmd->add_option("--effort-sigma", effort_sigma, "Joint effort noise std-dev (N*m)")->check(CLI::NonNegativeNumber);

  auto* ext_cmd = app.add_subcommand("extract", "Extract observation records from bundles (or re-export a dataset)");
  add_common(ext_cmd, common);
  auto* src = ext_cmd->add_option("bundles", bundles, "Bundle directory tree")->check(CLI::ExistingDirectory);
  ext_cmd->add_option("--dataset", dataset_in, "Validate and re-export an existing dataset CSV")
      ->check(CLI::ExistingFile)
      ->excludes(src);
  ext_cmd->add_option("--out", out, "Output CSV (default stdout)");

  auto* stats_cmd = app.add_subcommand("stats", "Variance, correlation and coverage reports");
  add_common(stats_cmd, common);
  stats_cmd->add_option("dataset", dataset_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", out, "Report directory")->required();
  stats_cmd->add_option("--variance", common.variance, "population or sample")
      ->check(CLI::IsMember({"population", "sample"}));

  auto* kb_cmd = app.add_subcommand("build-kb", "Build the knowledge base JSON from a dataset");
  add_common(kb_cmd, common);
  kb_cmd->add_option("dataset", dataset_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
  kb_cmd->add_option("--out", out, "kb.json path")->required();
  kb_cmd->add_option("--eta", common.eta, "Clusters per property")->check(CLI::Range(2, 1000));

  auto* q_cmd = app.add_subcommand("query", "Rank substitutes for missing tools");
  add_common(q_cmd, common);
  q_cmd->add_option("kb", kb, "kb.json")->required()->check(CLI::ExistingFile);
  q_cmd->add_option("query", query, "Query JSON")->required()->check(CLI::ExistingFile);
  q_cmd->add_option("--out", out, "Result JSON (default stdout)");
  q_cmd->add_option("--heatmap", heatmap, "Also write a similarity table CSV");
  q_cmd->add_option("--threshold", common.threshold, "Selection threshold")->check(CLI::Range(0.0, 1.0));

  auto* pyr_cmd = app.add_subcommand("pyramid", "Class composition of clusters for k = k-min..k-max");
  add_common(pyr_cmd, common);
  pyr_cmd->add_option("dataset", dataset_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
  pyr_cmd->add_option("--property", property, "Property to partition");
  pyr_cmd->add_option("--k-min", k_min, "Smallest k");
  pyr_cmd->add_option("--k-max", k_max, "Largest k (default: number of classes)");
  pyr_cmd->add_option("--out", out, "Output CSV (default stdout)");

  auto* cfg_cmd = app.add_subcommand("config", "Print the effective configuration");
  add_common(cfg_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: E_USAGE: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*sim_cmd) return cmd_simulate(common, scene, out);
    if (*cat_cmd) return cmd_catalog(common, out, instances, repetitions, point_sigma, marker_sigma, effort_sigma);
    if (*ext_cmd) {
      if (bundles.empty() && dataset_in.empty()) fail(ErrorCode::invalid_argument, "extract needs a bundle directory or --dataset");
      return cmd_extract(common, bundles, dataset_in, out);
    }
    if (*stats_cmd) return cmd_stats(common, dataset_in, out);
    if (*kb_cmd) return cmd_build_kb(common, dataset_in, out);
    if (*q_cmd) return cmd_query(common, kb, query, out, heatmap);
    if (*pyr_cmd) return cmd_pyramid(common, dataset_in, property, k_min, k_max, out);
    if (*cfg_cmd) {
      write_config(std::cout, common.resolve());
      return 0;
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << code_name(e.code()) << ": " << msg << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: E_INTERNAL: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
