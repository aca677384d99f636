#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "near/family.hpp"
#include "near/model.hpp"

namespace near {

struct CollapseOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  ReadoutMode readout = ReadoutMode::Mean;
  double tolerance = 1e-8;
  // NEAR variants probed for the informational separation statistics.
  std::vector<NearVariant> probe_variants{NearVariant::C, NearVariant::E, NearVariant::M,
                                          NearVariant::H};
  // Structural hyperparameters of the probing model.
  int num_gnn_layers = 5;
  int hidden_dim = 32;
};

struct CollapseReport {
  ReadoutMode readout = ReadoutMode::Mean;
  int trials = 0;
  int sample_size = 0;
  double tolerance = 1e-8;

  // Plain model (no NEAR), max over trials.
  double max_pairwise = 0.0;      // whole sample; the mean-readout assertion
  double max_within_group = 0.0;  // equal-N groups; the sum-readout assertion
  double min_cross_group = 0.0;   // informational, expected nonzero for sum
  double max_cross_group = 0.0;
  bool pass = false;

  struct VariantStat {
    NearVariant variant = NearVariant::C;
    double max_within_group = 0.0;  // nonzero = the variant separates equal-N graphs
    double max_pairwise = 0.0;
  };
  std::vector<VariantStat> variant_stats;

  std::string describe() const;
};

// Runs `trials` random parameter draws of the plain (no NEAR) model over the
// sample and measures max pairwise L-infinity distances between h_G^(rep)
// vectors. With mean readout the pass condition is collapse over the whole
// sample; with sum readout, collapse within every equal-N group. Each NEAR
// probe variant is run the same way and its separation distances recorded.
// Throws std::invalid_argument if any sample graph fails verify_family.
CollapseReport verify_collapse(const std::vector<FamilyGraph>& sample,
                               const CollapseOptions& options);

// Two N=2 family members with triangle counts 4 and 0: the constructed
// equal-size pair that NEAR-c must separate.
std::pair<FamilyGraph, FamilyGraph> make_separation_pair();

struct SeparationResult {
  int trials = 0;
  int separated = 0;  // draws with distance > threshold
  double min_distance = 0.0;
  double threshold = 1e-3;
};

// Distance of h_G^(rep) between the two graphs under the given NEAR variant
// for `trials` random parameter draws.
SeparationResult near_separation(const FamilyGraph& a, const FamilyGraph& b,
                                 NearVariant variant, int trials, std::uint64_t seed,
                                 double threshold = 1e-3);

}  // namespace near
