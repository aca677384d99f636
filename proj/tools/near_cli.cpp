// near: graph-classification experiments with neighborhood edge aggregation.
//
// Subcommands: generate, verify-family, verify-collapse, train-toy, cv-bench,
// export. Human-readable progress goes to stderr; machine-readable results are
// written to files under --out. Exit codes: 0 ok, 1 runtime error, 2 bad
// flags, 3 failed assertion.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "near/collapse.hpp"
#include "near/family.hpp"
#include "near/graph.hpp"
#include "near/train.hpp"
#include "near/tu_dataset.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace near;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAssertion = 3;

std::string output_root() {
  const char* env = std::getenv("NEAR_OUTPUT_ROOT");
  return env && *env ? env : "runs";
}

void write_manifest(const std::string& dir, const std::string& command, json flags) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["flags"] = std::move(flags);
  manifest["config_hash"] = std::to_string(std::hash<std::string>{}(manifest.dump()));
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::string graph_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "graph_%05d.txt", index);
  return buf;
}

struct FamilyDataset {
  std::vector<FamilyGraph> graphs;
  std::vector<int> artfcc, artfcycle6;
};

// Reads a directory produced by `generate`: labels.txt plus one edge-list
// file per graph. Colors are implied by degree in valid family graphs.
FamilyDataset read_family_dir(const std::string& dir) {
  std::ifstream labels(fs::path(dir) / "labels.txt");
  if (!labels)
    throw std::runtime_error("cannot open " + dir + "/labels.txt");
  std::string header;
  std::getline(labels, header);

  FamilyDataset data;
  int graph_id = 0, cc = 0, cyc = 0, n_param = 0;
  while (labels >> graph_id >> cc >> cyc >> n_param) {
    const fs::path path = fs::path(dir) / graph_file_name(graph_id);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    FamilyGraph fg;
    fg.graph = read_edge_list(in);
    fg.colors = infer_colors_by_degree(fg.graph);
    fg.n_param = n_param;
    data.graphs.push_back(std::move(fg));
    data.artfcc.push_back(cc);
    data.artfcycle6.push_back(cyc);
  }
  if (data.graphs.empty()) throw std::runtime_error("no graphs listed in " + dir);
  return data;
}

int cmd_generate(int count, double mean, std::uint64_t seed, const std::string& out_dir) {
  SamplerConfig cfg{count, mean, seed};
  const auto sample = sample_dataset(cfg);

  fs::create_directories(out_dir);
  std::ofstream labels(fs::path(out_dir) / "labels.txt");
  labels << "graph_id artfcc artfcycle6 n_param\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::ofstream out(fs::path(out_dir) / graph_file_name(static_cast<int>(i)));
    write_edge_list(sample[i].graph, out);
    labels << i << ' ' << label_artfcc(sample[i].graph) << ' '
           << label_artfcycle6(sample[i].graph) << ' ' << sample[i].n_param << '\n';
  }
  write_manifest(out_dir, "generate",
                 {{"count", count}, {"mean", mean}, {"seed", seed}, {"out", out_dir}});
  std::cerr << "generated " << sample.size() << " family graphs in " << out_dir << "\n";
  return kExitOk;
}

int cmd_verify_family(const std::string& in_dir, const std::string& out_dir) {
  const FamilyDataset data = read_family_dir(in_dir);
  int failures = 0;
  json details = json::array();
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    const auto violations = verify_family(data.graphs[i]);
    if (!violations.empty()) {
      ++failures;
      std::cerr << "graph " << i << ": " << violations.size() << " violation(s)\n";
      for (const auto& v : violations) std::cerr << "  - " << v << "\n";
      details.push_back({{"graph", i}, {"violations", violations}});
    }
  }
  json result;
  result["graphs"] = data.graphs.size();
  result["failures"] = failures;
  result["details"] = std::move(details);
  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "verify_family.json") << result.dump(2) << '\n';
  write_manifest(out_dir, "verify-family", {{"in", in_dir}, {"out", out_dir}});
  std::cerr << (data.graphs.size() - failures) << "/" << data.graphs.size()
            << " graphs pass the family conditions\n";
  return failures == 0 ? kExitOk : kExitAssertion;
}

int cmd_verify_collapse(const std::string& in_dir, const std::string& readout,
                        const std::string& variant, int trials, std::uint64_t seed,
                        const std::string& out_dir) {
  const FamilyDataset data = read_family_dir(in_dir);

  CollapseOptions opt;
  opt.trials = trials;
  opt.seed = seed;
  opt.readout = readout_from_string(readout);
  if (variant != "all") {
    const NearVariant v = near_variant_from_string(variant);
    opt.probe_variants = v == NearVariant::None ? std::vector<NearVariant>{}
                                                : std::vector<NearVariant>{v};
  }

  const CollapseReport report = verify_collapse(data.graphs, opt);
  std::cerr << report.describe();

  json result;
  result["readout"] = readout;
  result["trials"] = report.trials;
  result["sample_size"] = report.sample_size;
  result["max_pairwise"] = report.max_pairwise;
  result["max_within_group"] = report.max_within_group;
  result["min_cross_group"] = report.min_cross_group;
  result["max_cross_group"] = report.max_cross_group;
  result["tolerance"] = report.tolerance;
  result["pass"] = report.pass;
  json stats = json::array();
  for (const auto& v : report.variant_stats)
    stats.push_back({{"variant", to_string(v.variant)},
                     {"max_within_group", v.max_within_group},
                     {"max_pairwise", v.max_pairwise}});
  result["near_separation"] = std::move(stats);
  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "collapse.json") << result.dump(2) << '\n';
  write_manifest(out_dir, "verify-collapse",
                 {{"in", in_dir},
                  {"readout", readout},
                  {"variant", variant},
                  {"trials", trials},
                  {"seed", seed},
                  {"out", out_dir}});
  return report.pass ? kExitOk : kExitAssertion;
}

int cmd_train_toy(const std::string& task, const std::string& variant, std::uint64_t seed,
                  int epochs, int count, double mean, const std::string& out_dir) {
  ToyConfig cfg;
  cfg.task = task;
  cfg.variant = near_variant_from_string(variant);
  cfg.seed = seed;
  cfg.epochs = epochs;
  cfg.count = count;
  cfg.poisson_mean = mean;

  const auto t0 = std::chrono::steady_clock::now();
  const ToyResult result = train_toy(cfg, [&](int epoch, const EpochStats& s) {
    if ((epoch + 1) % 25 == 0 || epoch == 0) {
      const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
      std::cerr << task << "/" << variant << " epoch " << epoch + 1 << "/" << epochs
                << "  train loss " << s.train_loss << "  val acc " << s.val_acc << "  ["
                << elapsed << "s]\n";
    }
  });

  export_curves(result.report, out_dir, task + "-" + variant);
  std::ofstream(fs::path(out_dir) / "report.json") << fold_report_to_json(result.report);
  json extra;
  extra["task"] = task;
  extra["variant"] = variant;
  extra["best_epoch"] = result.best_epoch;
  extra["best_val_accuracy"] = result.best_val_acc;
  extra["positive_prior"] = result.positive_prior;
  std::ofstream(fs::path(out_dir) / "toy_summary.json") << extra.dump(2) << '\n';
  write_manifest(out_dir, "train-toy",
                 {{"task", task},
                  {"variant", variant},
                  {"seed", seed},
                  {"epochs", epochs},
                  {"count", count},
                  {"mean", mean},
                  {"out", out_dir}});
  std::cerr << "best val accuracy " << result.best_val_acc << " at epoch "
            << result.best_epoch << " (label-1 prior " << result.positive_prior << ")\n";
  return kExitOk;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  if (path.empty()) return kv;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config " + path + " line " + std::to_string(line_no) +
                               ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int cmd_cv_bench(std::string dataset, std::string dir, std::string variant,
                 std::string grid_name, std::string features, int epochs, int folds,
                 int jobs, std::uint64_t seed, const std::string& config_path,
                 std::string out_dir, const std::map<std::string, bool>& given) {
  // Config file supplies defaults for flags not given on the command line.
  const auto file_cfg = read_config_file(config_path);
  auto take = [&](const char* key, auto& value, auto parse) {
    const auto it = file_cfg.find(key);
    if (it != file_cfg.end() && !given.at(key)) value = parse(it->second);
  };
  auto identity = [](const std::string& s) { return s; };
  take("dataset", dataset, identity);
  take("dir", dir, identity);
  take("variant", variant, identity);
  take("grid", grid_name, identity);
  take("features", features, identity);
  take("epochs", epochs, [](const std::string& s) { return std::stoi(s); });
  take("folds", folds, [](const std::string& s) { return std::stoi(s); });
  take("jobs", jobs, [](const std::string& s) { return std::stoi(s); });
  take("seed", seed, [](const std::string& s) { return std::stoull(s); });
  if (dataset.empty() || dir.empty())
    throw std::runtime_error("cv-bench: --dataset and --dir are required");

  const RawTuDataset raw = load_tu_dataset(dir, dataset);
  std::cerr << "loaded " << dataset << ": " << raw.graphs.size() << " graphs, "
            << raw.num_classes() << " classes";
  if (raw.clean_stats.self_loops_dropped || raw.clean_stats.duplicates_dropped)
    std::cerr << " (dropped " << raw.clean_stats.self_loops_dropped << " self-loops, "
              << raw.clean_stats.duplicates_dropped << " duplicate edges)";
  std::cerr << "\n";

  FeatureRecipe recipe;
  if (features.empty()) {
    recipe = default_recipe(raw);
  } else {
    std::stringstream ss(features);
    std::string block;
    while (std::getline(ss, block, ','))
      recipe.blocks.push_back(feature_block_from_string(block));
  }
  const DatasetBundle bundle = encode_node_features(raw, recipe);
  std::cerr << "feature width " << bundle.feature_dim << "\n";

  GridSpec spec;
  if (grid_name == "paper")
    spec = GridSpec::paper();
  else if (grid_name == "pinned")
    spec = GridSpec::pinned();
  else
    throw std::runtime_error("cv-bench: unknown grid '" + grid_name + "' (paper|pinned)");

  RunConfig base;
  base.model.aggregator.variant = near_variant_from_string(variant);
  base.epochs = epochs;
  base.seed = seed;
  base.fold_count = folds;

  const BenchResult bench =
      cv_bench(base, bundle, spec.enumerate(), folds, jobs,
               [&](std::size_t p, const GridResult& r) {
                 std::cerr << "grid point " << p << " [" << r.point.describe()
                           << "]: " << 100.0 * r.summary.mean_accuracy << " ("
                           << 100.0 * r.summary.std_accuracy << ") at epoch "
                           << r.summary.best_epoch << "\n";
               });

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "summary.csv");
  csv << "dataset,variant,grid_point,mean_accuracy,std_accuracy,best_epoch\n";
  for (const auto& r : bench.results)
    csv << dataset << ',' << variant << ",\"" << r.point.describe() << "\","
        << 100.0 * r.summary.mean_accuracy << ',' << 100.0 * r.summary.std_accuracy << ','
        << r.summary.best_epoch << '\n';

  json report;
  report["dataset"] = dataset;
  report["variant"] = variant;
  report["best"] = {{"grid_point", bench.best().point.describe()},
                    {"mean_accuracy", bench.best().summary.mean_accuracy},
                    {"std_accuracy", bench.best().summary.std_accuracy},
                    {"best_epoch", bench.best().summary.best_epoch}};
  json points = json::array();
  for (const auto& r : bench.results) {
    json p;
    p["grid_point"] = r.point.describe();
    p["mean_accuracy"] = r.summary.mean_accuracy;
    p["std_accuracy"] = r.summary.std_accuracy;
    p["best_epoch"] = r.summary.best_epoch;
    p["epoch_mean_val_acc"] = r.summary.epoch_mean_val_acc;
    points.push_back(std::move(p));
  }
  report["points"] = std::move(points);
  std::ofstream(fs::path(out_dir) / "report.json") << report.dump(2) << '\n';

  write_manifest(out_dir, "cv-bench",
                 {{"dataset", dataset},
                  {"dir", dir},
                  {"variant", variant},
                  {"grid", grid_name},
                  {"features", features},
                  {"epochs", epochs},
                  {"folds", folds},
                  {"jobs", jobs},
                  {"seed", seed},
                  {"config", config_path},
                  {"out", out_dir}});

  std::cerr << dataset << " " << variant << ": best " << 100.0 * bench.best().summary.mean_accuracy
            << " (" << 100.0 * bench.best().summary.std_accuracy << ") ["
            << bench.best().point.describe() << "]\n";
  return kExitOk;
}

int cmd_export(const std::string& report_path, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open report " + report_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const FoldReport report = fold_report_from_json(buf.str());
  export_curves(report, out_dir, fs::path(report_path).stem().string());
  write_manifest(out_dir, "export", {{"report", report_path}, {"out", out_dir}});
  std::cerr << "wrote curves.csv and summary.json to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NEAR graph classification toolkit"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "sample an adversarial family dataset");
  int gen_count = 1000;
  double gen_mean = 2.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out = output_root() + "/generate";
  generate->add_option("--count", gen_count, "number of graphs")->check(CLI::PositiveNumber);
  generate->add_option("--mean", gen_mean, "Poisson mean of N-1");
  generate->add_option("--seed", gen_seed, "RNG seed");
  generate->add_option("--out", gen_out, "output directory");

  // verify-family
  auto* vfam = app.add_subcommand("verify-family", "check every graph in a generated set");
  std::string vfam_in;
  std::string vfam_out = output_root() + "/verify-family";
  vfam->add_option("--in", vfam_in, "generated dataset directory")->required();
  vfam->add_option("--out", vfam_out, "output directory");

  // verify-collapse
  auto* vcol = app.add_subcommand("verify-collapse", "run the representation collapse check");
  std::string vcol_in, vcol_readout = "mean", vcol_variant = "all";
  int vcol_trials = 20;
  std::uint64_t vcol_seed = 1;
  std::string vcol_out = output_root() + "/verify-collapse";
  vcol->add_option("--in", vcol_in, "generated dataset directory")->required();
  vcol->add_option("--readout", vcol_readout, "sum|mean");
  vcol->add_option("--variant", vcol_variant, "NEAR variant to probe (none|c|e|m|h|all)");
  vcol->add_option("--trials", vcol_trials, "random parameter draws")->check(CLI::PositiveNumber);
  vcol->add_option("--seed", vcol_seed, "RNG seed");
  vcol->add_option("--out", vcol_out, "output directory");

  // train-toy
  auto* toy = app.add_subcommand("train-toy", "train one toy-task run");
  std::string toy_task = "artfcc", toy_variant = "none";
  std::uint64_t toy_seed = 1;
  int toy_epochs = 300, toy_count = 1000;
  double toy_mean = 2.0;
  std::string toy_out = output_root() + "/train-toy";
  toy->add_option("--task", toy_task, "artfcc|artfcycle6");
  toy->add_option("--variant", toy_variant, "none|c|e|m|h");
  toy->add_option("--seed", toy_seed, "RNG seed");
  toy->add_option("--epochs", toy_epochs, "training epochs")->check(CLI::PositiveNumber);
  toy->add_option("--count", toy_count, "dataset size")->check(CLI::PositiveNumber);
  toy->add_option("--mean", toy_mean, "Poisson mean of N-1");
  toy->add_option("--out", toy_out, "output directory");

  // cv-bench
  auto* bench = app.add_subcommand("cv-bench", "k-fold CV over a hyperparameter grid");
  std::string cb_dataset, cb_dir, cb_variant = "c", cb_grid = "pinned", cb_features;
  std::string cb_config;
  int cb_epochs = 300, cb_folds = 10, cb_jobs = 1;
  std::uint64_t cb_seed = 1;
  std::string cb_out = output_root() + "/cv-bench";
  bench->add_option("--dataset", cb_dataset, "TU dataset name");
  bench->add_option("--dir", cb_dir, "directory holding the TU files");
  bench->add_option("--variant", cb_variant, "none|c|e|m|h");
  bench->add_option("--grid", cb_grid, "paper|pinned");
  bench->add_option("--features", cb_features,
                    "comma list of labels|attributes|degree|dummy (default: auto)");
  bench->add_option("--epochs", cb_epochs, "epochs per fold")->check(CLI::PositiveNumber);
  bench->add_option("--folds", cb_folds, "fold count")->check(CLI::PositiveNumber);
  bench->add_option("--jobs", cb_jobs, "parallel fold jobs")->check(CLI::PositiveNumber);
  bench->add_option("--seed", cb_seed, "RNG seed");
  bench->add_option("--config", cb_config, "key=value config file");
  bench->add_option("--out", cb_out, "output directory");

  // export
  auto* exp = app.add_subcommand("export", "convert a report.json into curves");
  std::string exp_report;
  std::string exp_out = output_root() + "/export";
  exp->add_option("--report", exp_report, "path to report.json")->required();
  exp->add_option("--out", exp_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (generate->parsed())
      return cmd_generate(gen_count, gen_mean, gen_seed, gen_out);
    if (vfam->parsed()) return cmd_verify_family(vfam_in, vfam_out);
    if (vcol->parsed())
      return cmd_verify_collapse(vcol_in, vcol_readout, vcol_variant, vcol_trials, vcol_seed,
                                 vcol_out);
    if (toy->parsed())
      return cmd_train_toy(toy_task, toy_variant, toy_seed, toy_epochs, toy_count, toy_mean,
                           toy_out);
    if (bench->parsed()) {
      const std::map<std::string, bool> given{
          {"dataset", bench->count("--dataset") > 0}, {"dir", bench->count("--dir") > 0},
          {"variant", bench->count("--variant") > 0}, {"grid", bench->count("--grid") > 0},
          {"features", bench->count("--features") > 0},
          {"epochs", bench->count("--epochs") > 0},   {"folds", bench->count("--folds") > 0},
          {"jobs", bench->count("--jobs") > 0},       {"seed", bench->count("--seed") > 0}};
      return cmd_cv_bench(cb_dataset, cb_dir, cb_variant, cb_grid, cb_features, cb_epochs,
                          cb_folds, cb_jobs, cb_seed, cb_config, cb_out, given);
    }
    if (exp->parsed()) return cmd_export(exp_report, exp_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
