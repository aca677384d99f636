#pragma once

#include <string>
#include <vector>

#include "near/graph.hpp"
#include "near/matrix.hpp"

namespace near {

// Which pairwise function g(h_u, h_z) a NEAR layer sums over the
// neighborhood edge set E_{N_v}. None = plain GIN-0 (no NEAR channel).
enum class NearVariant { None, C, E, M, H };

NearVariant near_variant_from_string(const std::string& s);
std::string to_string(NearVariant v);

// Width of the NEAR channel: 0 for None, 1 for C, feature_dim otherwise.
int near_embed_dim(NearVariant v, int feature_dim);

// Row v = sum of h_u over u in N_v; isolated nodes get a zero row.
Matrix aggregate_neighbors_sum(const Graph& g, const Matrix& h);

// NEAR_c(N_v, H) = |E_{N_v}|, the number of triangles through v.
double near_c(const Graph& g, int v);
// NEAR_e via the restricted-degree shortcut: sum_i d_i|_{N_v} h_i.
std::vector<double> near_e(const Graph& g, int v, const Matrix& h);
// Elementwise max / Hadamard product summed over inner edges.
std::vector<double> near_m(const Graph& g, int v, const Matrix& h);
std::vector<double> near_h(const Graph& g, int v, const Matrix& h);

// All nodes at once; production path (near_e uses the shortcut).
Matrix near_batch(const Graph& g, const Matrix& h, NearVariant variant);

// Direct-definition route: enumerates E_{N_v} and sums g over it. Second
// algebraic route for the shortcut identity checks; also exercised by the
// benchmark.
Matrix near_batch_direct(const Graph& g, const Matrix& h, NearVariant variant);

// dh(rows of g) += d(near_batch)/dH applied to dnear. None and C contribute
// nothing. Row indices are shifted by row_offset so batched graphs can share
// one node matrix.
void near_backward_accumulate(const Graph& g, const Matrix& h_in, NearVariant variant,
                              const Matrix& dnear, Matrix& dh, int row_offset = 0);

// Offset variants used by the batched model: graph-local node v maps to
// matrix row row_offset + v.
void aggregate_neighbors_sum_into(const Graph& g, const Matrix& h, int row_offset,
                                  Matrix& out, int out_col = 0);
void near_batch_into(const Graph& g, const Matrix& h, int row_offset, NearVariant variant,
                     Matrix& out, int out_col);

namespace serial {
Matrix aggregate_neighbors_sum(const Graph& g, const Matrix& h);
Matrix near_batch(const Graph& g, const Matrix& h, NearVariant variant);
}  // namespace serial

}  // namespace near
