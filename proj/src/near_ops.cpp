#include "near/near_ops.hpp"

#include <algorithm>
#include <stdexcept>

namespace near {

namespace {

void check_rows(const Graph& g, const Matrix& h) {
  if (h.rows() != g.num_nodes())
    throw std::invalid_argument("near: feature matrix has " + std::to_string(h.rows()) +
                                " rows for a graph with " + std::to_string(g.num_nodes()) +
                                " nodes");
}

// Calls fn(i, j) for every inner edge of N_v, i < j, lexicographic order.
template <typename F>
void for_each_inner_edge(const Graph& g, int v, F&& fn) {
  const auto& members = g.neighbors(v);
  for (int i : members) {
    const auto& ni = g.neighbors(i);
    std::size_t a = 0, b = 0;
    while (a < ni.size() && b < members.size()) {
      if (ni[a] < members[b]) {
        ++a;
      } else if (ni[a] > members[b]) {
        ++b;
      } else {
        if (ni[a] > i) fn(i, ni[a]);
        ++a;
        ++b;
      }
    }
  }
}

int intersection_size(const std::vector<int>& xs, const std::vector<int>& ys) {
  std::size_t a = 0, b = 0;
  int count = 0;
  while (a < xs.size() && b < ys.size()) {
    if (xs[a] < ys[b]) {
      ++a;
    } else if (xs[a] > ys[b]) {
      ++b;
    } else {
      ++count;
      ++a;
      ++b;
    }
  }
  return count;
}

}  // namespace

NearVariant near_variant_from_string(const std::string& s) {
  if (s == "none") return NearVariant::None;
  if (s == "c") return NearVariant::C;
  if (s == "e") return NearVariant::E;
  if (s == "m") return NearVariant::M;
  if (s == "h") return NearVariant::H;
  throw std::invalid_argument("unknown NEAR variant '" + s + "' (want none|c|e|m|h)");
}

std::string to_string(NearVariant v) {
  switch (v) {
    case NearVariant::None: return "none";
    case NearVariant::C: return "c";
    case NearVariant::E: return "e";
    case NearVariant::M: return "m";
    case NearVariant::H: return "h";
  }
  return "?";
}

int near_embed_dim(NearVariant v, int feature_dim) {
  switch (v) {
    case NearVariant::None: return 0;
    case NearVariant::C: return 1;
    default: return feature_dim;
  }
}

void aggregate_neighbors_sum_into(const Graph& g, const Matrix& h, int row_offset,
                                  Matrix& out, int out_col) {
  const int cols = h.cols();
  for (int v = 0; v < g.num_nodes(); ++v) {
    double* orow = out.row_ptr(row_offset + v) + out_col;
    for (int u : g.neighbors(v)) {
      const double* hrow = h.row_ptr(row_offset + u);
      for (int c = 0; c < cols; ++c) orow[c] += hrow[c];
    }
  }
}

Matrix aggregate_neighbors_sum(const Graph& g, const Matrix& h) {
  check_rows(g, h);
  Matrix out(h.rows(), h.cols());
  const int n = g.num_nodes(), cols = h.cols();
#pragma omp parallel for schedule(static) if (n > 256)
  for (int v = 0; v < n; ++v) {
    double* orow = out.row_ptr(v);
    for (int u : g.neighbors(v)) {
      const double* hrow = h.row_ptr(u);
      for (int c = 0; c < cols; ++c) orow[c] += hrow[c];
    }
  }
  return out;
}

double near_c(const Graph& g, int v) {
  const auto& members = g.neighbors(v);
  long long inner = 0;
  for (int i : members) inner += intersection_size(g.neighbors(i), members);
  return static_cast<double>(inner / 2);  // each inner edge seen from both endpoints
}

std::vector<double> near_e(const Graph& g, int v, const Matrix& h) {
  check_rows(g, h);
  std::vector<double> out(h.cols(), 0.0);
  const auto& members = g.neighbors(v);
  for (int i : members) {
    const int d = intersection_size(g.neighbors(i), members);
    if (d == 0) continue;
    const double* hrow = h.row_ptr(i);
    for (int c = 0; c < h.cols(); ++c) out[c] += d * hrow[c];
  }
  return out;
}

std::vector<double> near_m(const Graph& g, int v, const Matrix& h) {
  check_rows(g, h);
  std::vector<double> out(h.cols(), 0.0);
  for_each_inner_edge(g, v, [&](int i, int j) {
    const double* hi = h.row_ptr(i);
    const double* hj = h.row_ptr(j);
    for (int c = 0; c < h.cols(); ++c) out[c] += std::max(hi[c], hj[c]);
  });
  return out;
}

std::vector<double> near_h(const Graph& g, int v, const Matrix& h) {
  check_rows(g, h);
  std::vector<double> out(h.cols(), 0.0);
  for_each_inner_edge(g, v, [&](int i, int j) {
    const double* hi = h.row_ptr(i);
    const double* hj = h.row_ptr(j);
    for (int c = 0; c < h.cols(); ++c) out[c] += hi[c] * hj[c];
  });
  return out;
}

void near_batch_into(const Graph& g, const Matrix& h, int row_offset, NearVariant variant,
                     Matrix& out, int out_col) {
  const int cols = h.cols();
  for (int v = 0; v < g.num_nodes(); ++v) {
    double* orow = out.row_ptr(row_offset + v) + out_col;
    switch (variant) {
      case NearVariant::None:
        break;
      case NearVariant::C: {
        const auto& members = g.neighbors(v);
        long long inner = 0;
        for (int i : members) inner += intersection_size(g.neighbors(i), members);
        orow[0] = static_cast<double>(inner / 2);
        break;
      }
      case NearVariant::E: {
        const auto& members = g.neighbors(v);
        for (int i : members) {
          const int d = intersection_size(g.neighbors(i), members);
          if (d == 0) continue;
          const double* hrow = h.row_ptr(row_offset + i);
          for (int c = 0; c < cols; ++c) orow[c] += d * hrow[c];
        }
        break;
      }
      case NearVariant::M:
        for_each_inner_edge(g, v, [&](int i, int j) {
          const double* hi = h.row_ptr(row_offset + i);
          const double* hj = h.row_ptr(row_offset + j);
          for (int c = 0; c < cols; ++c) orow[c] += std::max(hi[c], hj[c]);
        });
        break;
      case NearVariant::H:
        for_each_inner_edge(g, v, [&](int i, int j) {
          const double* hi = h.row_ptr(row_offset + i);
          const double* hj = h.row_ptr(row_offset + j);
          for (int c = 0; c < cols; ++c) orow[c] += hi[c] * hj[c];
        });
        break;
    }
  }
}

Matrix near_batch(const Graph& g, const Matrix& h, NearVariant variant) {
  check_rows(g, h);
  const int width = near_embed_dim(variant, h.cols());
  Matrix out(g.num_nodes(), width);
  if (variant == NearVariant::None) return out;
  const int n = g.num_nodes();
#pragma omp parallel for schedule(static) if (n > 256)
  for (int v = 0; v < n; ++v) {
    // per-node paths write disjoint rows, safe to run in parallel
    switch (variant) {
      case NearVariant::C:
        out(v, 0) = near_c(g, v);
        break;
      case NearVariant::E: {
        const auto vals = near_e(g, v, h);
        std::copy(vals.begin(), vals.end(), out.row_ptr(v));
        break;
      }
      case NearVariant::M: {
        const auto vals = near_m(g, v, h);
        std::copy(vals.begin(), vals.end(), out.row_ptr(v));
        break;
      }
      case NearVariant::H: {
        const auto vals = near_h(g, v, h);
        std::copy(vals.begin(), vals.end(), out.row_ptr(v));
        break;
      }
      case NearVariant::None:
        break;
    }
  }
  return out;
}

Matrix near_batch_direct(const Graph& g, const Matrix& h, NearVariant variant) {
  check_rows(g, h);
  const int width = near_embed_dim(variant, h.cols());
  Matrix out(g.num_nodes(), width);
  if (variant == NearVariant::None) return out;
  for (int v = 0; v < g.num_nodes(); ++v) {
    double* orow = out.row_ptr(v);
    for_each_inner_edge(g, v, [&](int i, int j) {
      const double* hi = h.row_ptr(i);
      const double* hj = h.row_ptr(j);
      switch (variant) {
        case NearVariant::C:
          orow[0] += 1.0;
          break;
        case NearVariant::E:
          for (int c = 0; c < h.cols(); ++c) orow[c] += hi[c] + hj[c];
          break;
        case NearVariant::M:
          for (int c = 0; c < h.cols(); ++c) orow[c] += std::max(hi[c], hj[c]);
          break;
        case NearVariant::H:
          for (int c = 0; c < h.cols(); ++c) orow[c] += hi[c] * hj[c];
          break;
        case NearVariant::None:
          break;
      }
    });
  }
  return out;
}

void near_backward_accumulate(const Graph& g, const Matrix& h_in, NearVariant variant,
                              const Matrix& dnear, Matrix& dh, int row_offset) {
  if (variant == NearVariant::None || variant == NearVariant::C) return;  // constant in H
  const int cols = h_in.cols();
  for (int v = 0; v < g.num_nodes(); ++v) {
    const double* dn = dnear.row_ptr(row_offset + v);
    switch (variant) {
      case NearVariant::E: {
        const auto& members = g.neighbors(v);
        for (int i : members) {
          const int d = intersection_size(g.neighbors(i), members);
          if (d == 0) continue;
          double* grow = dh.row_ptr(row_offset + i);
          for (int c = 0; c < cols; ++c) grow[c] += d * dn[c];
        }
        break;
      }
      case NearVariant::M:
        for_each_inner_edge(g, v, [&](int i, int j) {
          const double* hi = h_in.row_ptr(row_offset + i);
          const double* hj = h_in.row_ptr(row_offset + j);
          double* gi = dh.row_ptr(row_offset + i);
          double* gj = dh.row_ptr(row_offset + j);
          for (int c = 0; c < cols; ++c) {
            if (hi[c] >= hj[c])
              gi[c] += dn[c];
            else
              gj[c] += dn[c];
          }
        });
        break;
      case NearVariant::H:
        for_each_inner_edge(g, v, [&](int i, int j) {
          const double* hi = h_in.row_ptr(row_offset + i);
          const double* hj = h_in.row_ptr(row_offset + j);
          double* gi = dh.row_ptr(row_offset + i);
          double* gj = dh.row_ptr(row_offset + j);
          for (int c = 0; c < cols; ++c) {
            gi[c] += hj[c] * dn[c];
            gj[c] += hi[c] * dn[c];
          }
        });
        break;
      default:
        break;
    }
  }
}

namespace serial {

Matrix aggregate_neighbors_sum(const Graph& g, const Matrix& h) {
  check_rows(g, h);
  Matrix out(h.rows(), h.cols());
  aggregate_neighbors_sum_into(g, h, 0, out, 0);
  return out;
}

Matrix near_batch(const Graph& g, const Matrix& h, NearVariant variant) {
  check_rows(g, h);
  const int width = near_embed_dim(variant, h.cols());
  Matrix out(g.num_nodes(), width);
  near_batch_into(g, h, 0, variant, out, 0);
  return out;
}

}  // namespace serial

}  // namespace near
