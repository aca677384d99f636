#include "near/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace near {

namespace {

double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ModelConfig probe_config(const CollapseOptions& opt, NearVariant variant) {
  ModelConfig cfg;
  cfg.num_gnn_layers = opt.num_gnn_layers;
  cfg.hidden_dim = opt.hidden_dim;
  cfg.classifier_hidden = opt.hidden_dim;
  cfg.aggregator.variant = variant;
  cfg.readout = opt.readout;
  cfg.dropout_rate = 0.0;  // eval-mode probe; keep the head deterministic
  cfg.input_dim = 2;
  cfg.num_classes = 2;
  return cfg;
}

// Every learnable tensor redrawn uniformly, batch-norm affine included;
// Theorem-style claims must hold for arbitrary parameters.
void randomize_params(GinNearModel& model, SplitMix64& rng) {
  for (const ParamRef& p : model.params())
    for (std::size_t i = 0; i < p.size; ++i) p.value[i] = rng.uniform(-1.0, 1.0);
}

// h_G^(rep) of every sample graph for one random parameter draw.
std::vector<std::vector<double>> draw_representations(
    const std::vector<FamilyGraph>& sample, const ModelConfig& cfg, SplitMix64 rng) {
  GinNearModel model(cfg, rng);
  randomize_params(model, rng);
  std::vector<std::vector<double>> reps;
  reps.reserve(sample.size());
  SplitMix64 unused(0);
  for (const FamilyGraph& fg : sample) {
    const Matrix h0 = initial_features(fg);
    reps.push_back(model_forward(fg.graph, h0, model, Mode::Eval, unused).rep.concatenated);
  }
  return reps;
}

struct DistanceStats {
  double max_pairwise = 0.0;
  double max_within_group = 0.0;
  double min_cross_group = std::numeric_limits<double>::infinity();
  double max_cross_group = 0.0;
};

DistanceStats pairwise_stats(const std::vector<std::vector<double>>& reps,
                             const std::vector<int>& group_of) {
  DistanceStats stats;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      const double d = linf_distance(reps[i], reps[j]);
      stats.max_pairwise = std::max(stats.max_pairwise, d);
      if (group_of[i] == group_of[j]) {
        stats.max_within_group = std::max(stats.max_within_group, d);
      } else {
        stats.min_cross_group = std::min(stats.min_cross_group, d);
        stats.max_cross_group = std::max(stats.max_cross_group, d);
      }
    }
  }
  if (!std::isfinite(stats.min_cross_group)) stats.min_cross_group = 0.0;
  return stats;
}

}  // namespace

CollapseReport verify_collapse(const std::vector<FamilyGraph>& sample,
                               const CollapseOptions& opt) {
  if (sample.empty()) throw std::invalid_argument("verify_collapse: empty sample");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto violations = verify_family(sample[i]);
    if (!violations.empty())
      throw std::invalid_argument("verify_collapse: sample graph " + std::to_string(i) +
                                  " is not a family member: " + violations.front());
  }

  std::vector<int> group_of(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) group_of[i] = sample[i].n_param;

  CollapseReport report;
  report.readout = opt.readout;
  report.trials = opt.trials;
  report.sample_size = static_cast<int>(sample.size());
  report.tolerance = opt.tolerance;
  report.min_cross_group = std::numeric_limits<double>::infinity();

  const SplitMix64 master(opt.seed);
  for (int t = 0; t < opt.trials; ++t) {
    const auto reps =
        draw_representations(sample, probe_config(opt, NearVariant::None), master.split(t));
    const DistanceStats stats = pairwise_stats(reps, group_of);
    report.max_pairwise = std::max(report.max_pairwise, stats.max_pairwise);
    report.max_within_group = std::max(report.max_within_group, stats.max_within_group);
    report.min_cross_group = std::min(report.min_cross_group, stats.min_cross_group);
    report.max_cross_group = std::max(report.max_cross_group, stats.max_cross_group);
  }
  if (!std::isfinite(report.min_cross_group)) report.min_cross_group = 0.0;

  report.pass = opt.readout == ReadoutMode::Mean
                    ? report.max_pairwise < opt.tolerance
                    : report.max_within_group < opt.tolerance;

  for (NearVariant variant : opt.probe_variants) {
    CollapseReport::VariantStat vstat;
    vstat.variant = variant;
    for (int t = 0; t < opt.trials; ++t) {
      const auto reps = draw_representations(sample, probe_config(opt, variant),
                                             master.split(1000003ULL * (t + 1)));
      const DistanceStats stats = pairwise_stats(reps, group_of);
      vstat.max_within_group = std::max(vstat.max_within_group, stats.max_within_group);
      vstat.max_pairwise = std::max(vstat.max_pairwise, stats.max_pairwise);
    }
    report.variant_stats.push_back(vstat);
  }
  return report;
}

std::string CollapseReport::describe() const {
  std::ostringstream out;
  out << "collapse check: " << sample_size << " family graphs, " << trials
      << " parameter draws, readout=" << to_string(readout) << "\n";
  out << "  plain model max pairwise L-inf distance:        " << max_pairwise << "\n";
  out << "  plain model max within-equal-N distance:        " << max_within_group << "\n";
  out << "  plain model cross-N distance (min/max, info):   " << min_cross_group << " / "
      << max_cross_group << "\n";
  out << "  assertion (" << (readout == ReadoutMode::Mean ? "whole sample" : "within equal N")
      << " < " << tolerance << "): " << (pass ? "PASS" : "FAIL") << "\n";
  for (const auto& v : variant_stats)
    out << "  NEAR-" << to_string(v.variant)
        << " separation: max within-equal-N distance = " << v.max_within_group
        << " (max pairwise " << v.max_pairwise << ")\n";
  return out.str();
}

std::pair<FamilyGraph, FamilyGraph> make_separation_pair() {
  // N=2: blacks 0..3 with partner edges (0,1), (2,3); whites 4..7.
  auto build = [](const std::vector<Edge>& white_edges) {
    std::vector<Edge> edges{{0, 1}, {2, 3}};
    edges.insert(edges.end(), white_edges.begin(), white_edges.end());
    FamilyGraph fg;
    fg.graph = Graph(8, edges);
    fg.colors = {NodeColor::Black, NodeColor::Black, NodeColor::Black, NodeColor::Black,
                 NodeColor::White, NodeColor::White, NodeColor::White, NodeColor::White};
    fg.n_param = 2;
    return fg;
  };
  // Whites attach to partner pairs: four triangles.
  FamilyGraph with_triangles =
      build({{0, 4}, {1, 4}, {0, 5}, {1, 5}, {2, 6}, {3, 6}, {2, 7}, {3, 7}});
  // Whites attach across pairs: triangle free.
  FamilyGraph triangle_free =
      build({{0, 4}, {2, 4}, {1, 5}, {3, 5}, {0, 6}, {3, 6}, {1, 7}, {2, 7}});
  return {std::move(with_triangles), std::move(triangle_free)};
}

SeparationResult near_separation(const FamilyGraph& a, const FamilyGraph& b,
                                 NearVariant variant, int trials, std::uint64_t seed,
                                 double threshold) {
  for (const FamilyGraph* fg : {&a, &b}) {
    const auto violations = verify_family(*fg);
    if (!violations.empty())
      throw std::invalid_argument("near_separation: not a family member: " +
                                  violations.front());
  }
  SeparationResult result;
  result.trials = trials;
  result.threshold = threshold;
  result.min_distance = std::numeric_limits<double>::infinity();

  CollapseOptions opt;
  const SplitMix64 master(seed);
  for (int t = 0; t < trials; ++t) {
    ModelConfig cfg = probe_config(opt, variant);
    SplitMix64 init = master.split(t);
    GinNearModel model(cfg, init);
    randomize_params(model, init);
    SplitMix64 unused(0);
    const Matrix ha = initial_features(a);
    const Matrix hb = initial_features(b);
    const auto rep_a = model_forward(a.graph, ha, model, Mode::Eval, unused).rep.concatenated;
    const auto rep_b = model_forward(b.graph, hb, model, Mode::Eval, unused).rep.concatenated;
    const double d = linf_distance(rep_a, rep_b);
    result.min_distance = std::min(result.min_distance, d);
    if (d > threshold) ++result.separated;
  }
  return result;
}

}  // namespace near
