#include "near/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace near {

namespace {

using nlohmann::json;

void fisher_yates(std::vector<int>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.next_below(i)]);
}

// Minibatch index chunks; a trailing singleton is merged into the previous
// chunk so train-mode batch norm always sees at least two graphs.
std::vector<std::vector<int>> chunk_indices(const std::vector<int>& order, int batch_size) {
  std::vector<std::vector<int>> chunks;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t last = std::min(order.size(), i + batch_size);
    chunks.emplace_back(order.begin() + i, order.begin() + last);
  }
  if (chunks.size() >= 2 && chunks.back().size() == 1) {
    chunks[chunks.size() - 2].push_back(chunks.back()[0]);
    chunks.pop_back();
  }
  return chunks;
}

GraphBatch batch_from(const DatasetBundle& data, const std::vector<int>& indices) {
  std::vector<const Graph*> graphs;
  std::vector<const Matrix*> features;
  std::vector<int> labels;
  graphs.reserve(indices.size());
  for (int idx : indices) {
    graphs.push_back(&data.graphs[idx]);
    features.push_back(&data.node_features[idx]);
    labels.push_back(data.graph_labels[idx]);
  }
  return make_batch(graphs, features, labels);
}

int correct_count(const Matrix& logits, const std::vector<int>& labels) {
  int correct = 0;
  for (int r = 0; r < logits.rows(); ++r) {
    const double* row = logits.row_ptr(r);
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (row[c] > row[best]) best = c;
    if (best == labels[r]) ++correct;
  }
  return correct;
}

int argmax_epoch(const std::vector<double>& values) {
  int best = 0;
  for (std::size_t e = 1; e < values.size(); ++e)
    if (values[e] > values[best]) best = static_cast<int>(e);
  return best;
}

}  // namespace

std::string GridPoint::describe() const {
  std::ostringstream out;
  out << "batch=" << batch_size << " hidden=" << hidden_dim << " dropout=" << dropout
      << " readout=" << to_string(readout) << " lr=" << learning_rate;
  return out.str();
}

std::vector<GridPoint> GridSpec::enumerate() const {
  std::vector<GridPoint> points;
  for (int batch : batch_sizes)
    for (int hidden : hidden_dims)
      for (double drop : dropout_rates)
        for (ReadoutMode mode : readouts)
          for (double lr : learning_rates)
            points.push_back({batch, hidden, drop, mode, lr});
  return points;
}

GridSpec GridSpec::paper() { return GridSpec{}; }

GridSpec GridSpec::pinned() {
  GridSpec spec;
  spec.batch_sizes = {32};
  spec.hidden_dims = {32};
  spec.dropout_rates = {0.5};
  spec.readouts = {ReadoutMode::Sum};
  spec.learning_rates = {1e-2};
  return spec;
}

FoldReport train(const RunConfig& cfg, const DatasetBundle& data,
                 const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                 const EpochCallback& on_epoch) {
  if (train_idx.empty() || val_idx.empty())
    throw std::domain_error("train: empty train or validation split");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  ModelConfig mc = cfg.model;
  mc.input_dim = data.feature_dim;
  mc.num_classes = data.num_classes;

  const SplitMix64 master(cfg.seed);
  SplitMix64 init_rng = master.split(0);
  SplitMix64 shuffle_rng = master.split(1);
  SplitMix64 dropout_rng = master.split(2);

  GinNearModel model(mc, init_rng);
  AdamOptimizer adam(model.params(), mc.adam);

  // Calibrate batch-norm running statistics with train-mode passes that take
  // no optimizer step. Eval-mode validation reads the running statistics;
  // without this the first epochs measure the EMA warm-up of ten stacked
  // normalization layers instead of the model.
  SplitMix64 calib_rng = master.split(3);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& chunk : chunk_indices(train_idx, cfg.batch_size))
      model.forward(batch_from(data, chunk), Mode::Train, calib_rng);

  const auto val_chunks = chunk_indices(val_idx, cfg.batch_size);

  FoldReport report;
  report.epochs.reserve(cfg.epochs);
  std::vector<int> order = train_idx;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    double train_loss = 0.0;
    int train_correct = 0;
    for (const auto& chunk : chunk_indices(order, cfg.batch_size)) {
      GraphBatch batch = batch_from(data, chunk);
      const Matrix logits = model.forward(batch, Mode::Train, dropout_rng);
      const LossResult loss = softmax_cross_entropy(logits, batch.labels);
      train_loss += loss.loss * batch.num_graphs();
      train_correct += correct_count(logits, batch.labels);
      model.zero_grads();
      model.backward(batch, loss.grad);
      adam.step(model.params(), epoch);
    }

    double val_loss = 0.0;
    int val_correct = 0;
    for (const auto& chunk : val_chunks) {
      GraphBatch batch = batch_from(data, chunk);
      const Matrix logits = model.forward(batch, Mode::Eval, dropout_rng);
      const LossResult loss = softmax_cross_entropy(logits, batch.labels);
      val_loss += loss.loss * batch.num_graphs();
      val_correct += correct_count(logits, batch.labels);
    }

    EpochStats stats;
    stats.train_loss = train_loss / train_idx.size();
    stats.train_acc = static_cast<double>(train_correct) / train_idx.size();
    stats.val_loss = val_loss / val_idx.size();
    stats.val_acc = static_cast<double>(val_correct) / val_idx.size();
    report.epochs.push_back(stats);
    if (on_epoch) on_epoch(epoch, stats);
  }

  std::vector<double> val_accs;
  val_accs.reserve(report.epochs.size());
  for (const auto& e : report.epochs) val_accs.push_back(e.val_acc);
  report.best_epoch = argmax_epoch(val_accs);

  std::ostringstream ckpt;
  GinNearModel& final_model = model;
  save_checkpoint(final_model.state_params(), ckpt);
  report.checkpoint = ckpt.str();
  return report;
}

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int k,
                                               SplitMix64 rng) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
  if (labels.size() < std::size_t(k))
    throw std::invalid_argument("stratified_folds: fold count exceeds dataset size");
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(static_cast<int>(i));

  std::vector<std::vector<int>> folds(k);
  int position = 0;
  for (auto& [label, indices] : by_class) {
    fisher_yates(indices, rng);
    for (int idx : indices) folds[position++ % k].push_back(idx);
  }
  return folds;
}

CvSummary kfold_cv(const RunConfig& cfg, const DatasetBundle& data, int k, int jobs,
                   const std::function<void(int fold)>& on_fold) {
  if (static_cast<int>(data.graphs.size()) < k)
    throw std::invalid_argument("kfold_cv: k exceeds dataset size");
  const auto folds = stratified_folds(data.graph_labels, k, SplitMix64(cfg.seed).split(7001));

  CvSummary summary;
  summary.folds.resize(k);
  bool failed = false;
  std::string error;

#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1) if (jobs > 1)
  for (int f = 0; f < k; ++f) {
    try {
      std::vector<int> train_idx;
      for (int other = 0; other < k; ++other)
        if (other != f)
          train_idx.insert(train_idx.end(), folds[other].begin(), folds[other].end());
      std::sort(train_idx.begin(), train_idx.end());
      std::vector<int> val_idx = folds[f];
      std::sort(val_idx.begin(), val_idx.end());

      RunConfig fold_cfg = cfg;
      fold_cfg.seed = SplitMix64(cfg.seed).split(500 + f).next_u64();
      summary.folds[f] = train(fold_cfg, data, train_idx, val_idx);
      if (on_fold) {
#pragma omp critical
        on_fold(f);
      }
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        error = e.what();
      }
    }
  }
  if (failed) throw std::runtime_error("kfold_cv: fold failed: " + error);

  const int epochs = static_cast<int>(summary.folds[0].epochs.size());
  summary.epoch_mean_val_acc.resize(epochs, 0.0);
  for (int e = 0; e < epochs; ++e) {
    double sum = 0.0;
    for (const auto& fold : summary.folds) sum += fold.epochs[e].val_acc;
    summary.epoch_mean_val_acc[e] = sum / k;
  }
  summary.best_epoch = argmax_epoch(summary.epoch_mean_val_acc);
  summary.mean_accuracy = summary.epoch_mean_val_acc[summary.best_epoch];
  double var = 0.0;
  for (const auto& fold : summary.folds) {
    const double d = fold.epochs[summary.best_epoch].val_acc - summary.mean_accuracy;
    var += d * d;
  }
  summary.std_accuracy = std::sqrt(var / k);
  return summary;
}

BenchResult cv_bench(const RunConfig& base, const DatasetBundle& data,
                     const std::vector<GridPoint>& grid, int k, int jobs,
                     const std::function<void(std::size_t, const GridResult&)>& on_point) {
  if (grid.empty()) throw std::invalid_argument("cv_bench: empty grid");
  BenchResult bench;
  bench.results.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const GridPoint& point = grid[p];
    RunConfig cfg = base;
    cfg.batch_size = point.batch_size;
    cfg.model.hidden_dim = point.hidden_dim;
    cfg.model.classifier_hidden = point.hidden_dim;
    cfg.model.dropout_rate = point.dropout;
    cfg.model.readout = point.readout;
    cfg.model.adam.base_lr = point.learning_rate;
    GridResult result{point, kfold_cv(cfg, data, k, jobs)};
    bench.results.push_back(std::move(result));
    if (on_point) on_point(p, bench.results.back());
    if (bench.results.back().summary.mean_accuracy >
        bench.results[bench.best_index].summary.mean_accuracy)
      bench.best_index = static_cast<int>(p);
  }
  return bench;
}

DatasetBundle toy_bundle(const std::vector<FamilyGraph>& sample, const std::string& task) {
  if (task != "artfcc" && task != "artfcycle6")
    throw std::invalid_argument("toy task must be artfcc or artfcycle6, got '" + task + "'");
  DatasetBundle bundle;
  bundle.name = task;
  bundle.num_classes = 2;
  bundle.feature_dim = 2;
  bundle.graphs.reserve(sample.size());
  bundle.node_features.reserve(sample.size());
  bundle.graph_labels.reserve(sample.size());
  int positives = 0;
  for (const FamilyGraph& fg : sample) {
    bundle.graphs.push_back(fg.graph);
    bundle.node_features.push_back(initial_features(fg));
    const int label =
        task == "artfcc" ? label_artfcc(fg.graph) : label_artfcycle6(fg.graph);
    positives += label;
    bundle.graph_labels.push_back(label);
  }
  if (positives == 0 || positives == static_cast<int>(sample.size()))
    throw std::runtime_error("seed rejected: task " + task +
                             " is single-class over this sample (" +
                             std::to_string(positives) + "/" +
                             std::to_string(sample.size()) + " positive)");
  return bundle;
}

ToyResult train_toy(const ToyConfig& cfg, const EpochCallback& on_epoch) {
  const SamplerConfig sampler{cfg.count, cfg.poisson_mean, cfg.seed};
  const auto sample = sample_dataset(sampler);
  DatasetBundle bundle = toy_bundle(sample, cfg.task);

  // Fixed stratified 90/10 split shared by every variant at this seed.
  const auto folds =
      stratified_folds(bundle.graph_labels, 10, SplitMix64(cfg.seed).split(41));
  std::vector<int> val_idx = folds[0];
  std::vector<int> train_idx;
  for (int f = 1; f < 10; ++f)
    train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  RunConfig run;
  run.model.num_gnn_layers = 5;
  run.model.hidden_dim = 32;
  run.model.classifier_hidden = 32;
  run.model.aggregator.variant = cfg.variant;
  run.model.readout = ReadoutMode::Sum;
  run.model.dropout_rate = 0.5;
  run.model.adam.base_lr = 1e-4;
  run.model.adam.decay = 0.99;
  run.epochs = cfg.epochs;
  run.batch_size = 32;
  run.seed = SplitMix64(cfg.seed).split(42).next_u64();

  ToyResult result;
  result.report = train(run, bundle, train_idx, val_idx, on_epoch);
  result.best_epoch = result.report.best_epoch;
  result.best_val_acc = result.report.epochs[result.best_epoch].val_acc;
  double positives = 0;
  for (int label : bundle.graph_labels) positives += label;
  result.positive_prior = positives / bundle.graph_labels.size();
  return result;
}

void export_curves(const FoldReport& report, const std::string& dir,
                   const std::string& run_name) {
  std::filesystem::create_directories(dir);
  const std::string csv_path = (std::filesystem::path(dir) / "curves.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("export_curves: cannot write " + csv_path);
  csv << "epoch,split,loss,accuracy\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& s = report.epochs[e];
    csv << e << ",train," << s.train_loss << ',' << s.train_acc << '\n';
    csv << e << ",val," << s.val_loss << ',' << s.val_acc << '\n';
  }

  json summary;
  summary["run"] = run_name;
  summary["epochs"] = report.epochs.size();
  summary["best_epoch"] = report.best_epoch;
  summary["best_val_accuracy"] = report.epochs.empty()
                                     ? 0.0
                                     : report.epochs[report.best_epoch].val_acc;
  const std::string json_path = (std::filesystem::path(dir) / "summary.json").string();
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("export_curves: cannot write " + json_path);
  js << summary.dump(2) << '\n';
}

std::string fold_report_to_json(const FoldReport& report) {
  json j;
  j["best_epoch"] = report.best_epoch;
  j["checkpoint"] = report.checkpoint;
  json epochs = json::array();
  for (const EpochStats& s : report.epochs) {
    epochs.push_back({{"train_loss", s.train_loss},
                      {"train_acc", s.train_acc},
                      {"val_loss", s.val_loss},
                      {"val_acc", s.val_acc}});
  }
  j["epochs"] = std::move(epochs);
  return j.dump(2);
}

FoldReport fold_report_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  FoldReport report;
  report.best_epoch = j.at("best_epoch").get<int>();
  report.checkpoint = j.value("checkpoint", "");
  for (const auto& e : j.at("epochs")) {
    EpochStats s;
    s.train_loss = e.at("train_loss").get<double>();
    s.train_acc = e.at("train_acc").get<double>();
    s.val_loss = e.at("val_loss").get<double>();
    s.val_acc = e.at("val_acc").get<double>();
    report.epochs.push_back(s);
  }
  return report;
}

}  // namespace near
