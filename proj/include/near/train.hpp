#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "near/family.hpp"
#include "near/model.hpp"
#include "near/tu_dataset.hpp"

namespace near {

// The benchmark hyperparameter grid. Every value set comes from the stated
// protocol; presets only select subsets of it.
struct GridPoint {
  int batch_size = 32;
  int hidden_dim = 32;
  double dropout = 0.5;
  ReadoutMode readout = ReadoutMode::Sum;
  double learning_rate = 1e-2;

  std::string describe() const;
};

struct GridSpec {
  std::vector<int> batch_sizes{32, 64};
  std::vector<int> hidden_dims{32, 64};
  std::vector<double> dropout_rates{0.0, 0.5};
  std::vector<ReadoutMode> readouts{ReadoutMode::Mean, ReadoutMode::Sum};
  std::vector<double> learning_rates{1e-2, 1e-3};

  std::vector<GridPoint> enumerate() const;

  static GridSpec paper();   // the full 32-point grid
  static GridSpec pinned();  // 2-point desk-scale subset
};

struct RunConfig {
  ModelConfig model;
  int epochs = 300;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int fold_count = 10;
};

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct FoldReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;        // highest val accuracy, smallest index on ties
  std::string checkpoint;    // final parameters, text checkpoint format
};

using EpochCallback = std::function<void(int epoch, const EpochStats&)>;

// One training run: seeded shuffled minibatches, Adam with per-epoch lr
// decay, train-mode layers in training and eval-mode in validation.
// Deterministic given cfg.seed. Throws std::domain_error on an empty split.
FoldReport train(const RunConfig& cfg, const DatasetBundle& data,
                 const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                 const EpochCallback& on_epoch = {});

// Seeded stratified partition; per-class counts differ by at most one across
// folds and fold sizes by at most one overall.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int k,
                                               SplitMix64 rng);

struct CvSummary {
  std::vector<double> epoch_mean_val_acc;  // averaged across folds, per epoch
  int best_epoch = 0;
  double mean_accuracy = 0.0;  // max over epochs of the cross-fold average
  double std_accuracy = 0.0;   // across folds at the best epoch
  std::vector<FoldReport> folds;
};

// The reported number replicates the benchmark protocol: epoch-wise cross-
// fold averaging, then the max over epochs (ties broken by smallest epoch).
CvSummary kfold_cv(const RunConfig& cfg, const DatasetBundle& data, int k = 10,
                   int jobs = 1, const std::function<void(int fold)>& on_fold = {});

struct GridResult {
  GridPoint point;
  CvSummary summary;
};

struct BenchResult {
  int best_index = 0;
  std::vector<GridResult> results;

  const GridResult& best() const { return results[best_index]; }
};

// Runs the CV protocol at every grid point; best point by mean accuracy,
// ties broken by enumeration order.
BenchResult cv_bench(const RunConfig& base, const DatasetBundle& data,
                     const std::vector<GridPoint>& grid, int k, int jobs,
                     const std::function<void(std::size_t, const GridResult&)>& on_point = {});

// Toy protocol: 1000 family graphs, fixed stratified 90/10 split, 5 layers,
// width 32, batch 32, sum readout, lr 1e-4 with decay 0.99, dropout 0.5 on
// the prediction layers.
struct ToyConfig {
  std::string task = "artfcc";  // artfcc | artfcycle6
  NearVariant variant = NearVariant::None;
  std::uint64_t seed = 1;
  int epochs = 300;
  int count = 1000;
  double poisson_mean = 2.0;
};

struct ToyResult {
  FoldReport report;
  double best_val_acc = 0.0;
  int best_epoch = 0;
  double positive_prior = 0.0;  // label-1 fraction over the sample
};

ToyResult train_toy(const ToyConfig& cfg, const EpochCallback& on_epoch = {});

// Labels a family sample for one toy task and packs it as a DatasetBundle
// with the black/white one-hot initial features. Rejects seeds that produce
// a single-class sample.
DatasetBundle toy_bundle(const std::vector<FamilyGraph>& sample, const std::string& task);

// curves.csv (epoch, split, loss, accuracy) and summary.json under dir.
void export_curves(const FoldReport& report, const std::string& dir,
                   const std::string& run_name);

std::string fold_report_to_json(const FoldReport& report);
FoldReport fold_report_from_json(const std::string& json_text);

}  // namespace near
