// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/constructor.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qderk/errors.hpp"

namespace qderk {

namespace {

std::size_t zi(int i) { return static_cast<std::size_t>(i); }

// Largest k in [1, n] with s-1-k(k-1)/2 >= j (variable-row cutoff of column j).
int d_level(const StageLayout& L, int j) {
  int k = 1;
  while (k + 1 <= L.n && L.s - 1 - (k + 1) * k / 2 >= j) ++k;
  return k;
}

// Largest k in [1, m] with i >= k(k-1)/2+2 (variable-column cutoff of row i).
int q_level(const StageLayout& L, int i) {
  int k = 1;
  while (k + 1 <= L.m && i >= (k + 1) * k / 2 + 2) ++k;
  return k;
}

}  // namespace

StageLayout plan_layout(int p, mpfr_prec_t precision_bits) {
  if (p < 4 || p % 2 != 0) {
    throw ValidationError("plan_layout: order must be even and >= 4, got " +
                          std::to_string(p));
  }
  StageLayout L;
  L.p = p;
  L.m = p / 2 - 1;
  L.n = p / 2;
  L.N = L.n + 1;
  L.l = L.m * (L.m - 1) / 2;
  L.s2 = L.n * (L.n + 1) / 2;
  L.s = 1 + L.l + L.s2;
  L.precision_bits = precision_bits;
  L.lobatto = lobatto_rule(L.N, precision_bits);

  for (int g = 1; g <= L.m - 1; ++g) {
    L.q_groups.emplace_back(2 + g * (g - 1) / 2, 1 + g * (g + 1) / 2);
  }
  for (int i = 1; i <= L.N - 2; ++i) L.ghost_stages.push_back(L.l + 1 + i);
  for (int j = 1; j <= L.N - 2; ++j) {
    std::vector<int> group;
    for (int i = 1; i <= j; ++i) group.push_back(L.s - 1 - j * (j + 1) / 2 + i);
    L.d_groups.push_back(std::move(group));
  }
  for (int i = 1; i <= L.N - 2; ++i) {
    std::vector<int> cluster{L.ghost_of_cluster(i)};
    for (int j = i; j <= L.N - 2; ++j) cluster.push_back(L.d_groups[zi(j - 1)][zi(i - 1)]);
    L.clusters.push_back(std::move(cluster));
  }
  return L;
}

std::vector<std::pair<int, int>> free_q_indices(const StageLayout& L) {
  std::vector<std::pair<int, int>> out;
  for (int k = 3; k <= L.m; ++k) {
    int jlo = (k - 1) * (k - 2) / 2 + 2, hi = k * (k - 1) / 2 + 1;
    for (int i = jlo + 1; i <= hi; ++i)
      for (int j = jlo; j < i; ++j) out.emplace_back(i, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> free_d_indices(const StageLayout& L) {
  std::vector<std::pair<int, int>> out;
  for (int j = L.l + 2; j <= L.l + L.N - 1; ++j)
    for (int i = j + 1; i <= L.l + L.N - 1; ++i) out.emplace_back(i, j);
  for (int k = 3; k <= L.n; ++k) {
    int rlo = L.s - 1 - k * (k - 1) / 2 + 1, rhi = L.s - 1 - (k - 1) * (k - 2) / 2;
    int jlo = L.s - k * (k - 1) / 2;
    for (int i = rlo; i <= rhi; ++i)
      for (int j = jlo; j < i; ++j) out.emplace_back(i, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int degrees_of_freedom(const StageLayout& L) {
  return L.l + (L.s - L.l - L.N) +
         static_cast<int>(free_q_indices(L).size() + free_d_indices(L).size());
}

FreeParameters default_free_parameters(const StageLayout& L) {
  FreeParameters F;
  F.q_nodes = DenseVector(zi(L.l));
  for (const auto& [first, last] : L.q_groups) {
    for (int stage = first; stage <= last; ++stage) {
      F.q_nodes[zi(stage - 2)] = L.lobatto.nodes[zi(stage - first + 1)];
    }
  }
  for (int i = 1; i <= L.N - 2; ++i) {
    const auto& cluster = L.clusters[zi(i - 1)];
    ExtReal share = L.cluster_weight(i) / ExtReal(static_cast<long>(cluster.size()),
                                                  L.precision_bits);
    DenseVector split(cluster.size());
    for (auto& w : split) w = share;
    F.cluster_splits.push_back(std::move(split));
  }
  return F;
}

void validate_free_parameters(const StageLayout& L, const FreeParameters& F) {
  if (static_cast<int>(F.q_nodes.size()) != L.l) {
    throw ValidationError("free parameters: expected " + std::to_string(L.l) +
                          " Q-group nodes, got " + std::to_string(F.q_nodes.size()));
  }
  for (const auto& [first, last] : L.q_groups) {
    for (int a = first; a <= last; ++a) {
      if (F.q_nodes[zi(a - 2)].is_zero()) {
        throw ValidationError("free parameters: node for stage " +
                              std::to_string(a) + " is zero");
      }
      for (int b = a + 1; b <= last; ++b) {
        if (F.q_nodes[zi(a - 2)] == F.q_nodes[zi(b - 2)]) {
          throw ValidationError("free parameters: duplicate node in Q-group at stages " +
                                std::to_string(a) + ", " + std::to_string(b));
        }
      }
    }
  }
  if (static_cast<int>(F.cluster_splits.size()) != L.N - 2) {
    throw ValidationError("free parameters: expected " + std::to_string(L.N - 2) +
                          " cluster splits");
  }
  ExtReal tol = pow_int(ExtReal(0.5, L.precision_bits),
                        static_cast<long>(L.precision_bits) / 2);
  for (int i = 1; i <= L.N - 2; ++i) {
    const DenseVector& split = F.cluster_splits[zi(i - 1)];
    if (split.size() != L.clusters[zi(i - 1)].size()) {
      throw ValidationError("free parameters: cluster " + std::to_string(i) +
                            " split has wrong length");
    }
    ExtReal sum = 0;
    for (const ExtReal& w : split) {
      if (w.is_zero()) {
        throw ValidationError("free parameters: zero weight in cluster " +
                              std::to_string(i));
      }
      sum += w;
    }
    if (abs(sum - L.cluster_weight(i)) > tol) {
      throw ValidationError("free parameters: cluster " + std::to_string(i) +
                            " weights do not sum to the quadrature weight");
    }
  }
  auto check_keys = [](const std::map<std::pair<int, int>, ExtReal>& entries,
                       const std::vector<std::pair<int, int>>& allowed,
                       const char* which) {
    std::set<std::pair<int, int>> ok(allowed.begin(), allowed.end());
    for (const auto& [ij, value] : entries) {
      (void)value;
      if (!ok.count(ij)) {
        throw ValidationError(std::string("free parameters: (") +
                              std::to_string(ij.first) + "," +
                              std::to_string(ij.second) + ") is not a free " +
                              which + "-region entry");
      }
    }
  };
  check_keys(F.free_A_Q, free_q_indices(L), "Q");
  check_keys(F.free_A_D, free_d_indices(L), "D");
}

DenseVector assemble_nodes(const StageLayout& L, const FreeParameters& F) {
  DenseVector c(zi(L.s));
  for (auto& x : c) x = ExtReal(0, L.precision_bits);
  for (int stage = 2; stage <= L.l + 1; ++stage) c[zi(stage - 1)] = F.q_nodes[zi(stage - 2)];
  for (int i = 1; i <= L.N - 2; ++i) {
    c[zi(L.ghost_of_cluster(i) - 1)] = L.cluster_node(i);
    for (int j = i; j <= L.N - 2; ++j) {
      c[zi(L.d_groups[zi(j - 1)][zi(i - 1)] - 1)] = L.cluster_node(i);
    }
  }
  c[zi(L.s - 1)] = ExtReal(1, L.precision_bits);
  return c;
}

DenseVector assemble_weights(const StageLayout& L, const FreeParameters& F) {
  DenseVector b(zi(L.s));
  for (auto& x : b) x = ExtReal(0, L.precision_bits);
  b[0] = L.lobatto.weights[0];
  b[zi(L.s - 1)] = L.lobatto.weights[zi(L.N - 1)];
  for (int i = 1; i <= L.N - 2; ++i) {
    const auto& cluster = L.clusters[zi(i - 1)];
    for (std::size_t t = 0; t < cluster.size(); ++t) {
      b[zi(cluster[t] - 1)] = F.cluster_splits[zi(i - 1)][t];
    }
  }
  return b;
}

int BlockSystem::total_variables() const {
  int count = 0;
  for (const Block& blk : blocks) count += static_cast<int>(blk.vars.size());
  return count;
}

BlockSystem assemble_d_system(const StageLayout& L, const DenseVector& b,
                              const DenseVector& c, const FreeParameters& free) {
  (void)free;  // free entries are read from the working matrix at solve time
  BlockSystem sys;
  sys.kind = 'D';
  sys.s = L.s;
  sys.level_equation_counts.assign(zi(L.n), 0);
  for (int j = L.s - 1; j >= L.l + 2; --j) {
    Block blk;
    blk.index = j;
    blk.level = d_level(L, j);
    const int K = blk.level;
    for (int i = L.s; i >= L.s - 1 - K * (K - 1) / 2 + 1; --i) blk.vars.emplace_back(i, j);

    std::vector<int> support;
    if (j >= L.l + L.N) {
      support = {j};
    } else {
      support = L.clusters[zi(j - L.l - 2)];
    }

    auto d_row = [&](int r) {
      LinEq eq;
      eq.level = r + 1;
      eq.rhs = ExtReal(0, L.precision_bits);
      for (int t : support) {
        for (int i = t + 1; i <= L.s; ++i) {
          eq.terms.push_back({i, t, b[zi(i - 1)] * pow_int(c[zi(i - 1)], r)});
        }
        eq.rhs += b[zi(t - 1)] * (ExtReal(1, L.precision_bits) - pow_int(c[zi(t - 1)], r + 1)) /
                  ExtReal(r + 1, L.precision_bits);
      }
      return eq;
    };
    auto eps_row = [&](int r, int ip) {
      LinEq eq;
      eq.level = r + 2;
      eq.rhs = ExtReal(0, L.precision_bits);
      int hook = L.d_groups[zi(r - 1)][zi(ip - 1)];
      int ghost = L.l + 1 + ip;
      for (int t : support) {
        if (hook > t) eq.terms.push_back({hook, t, ExtReal(1, L.precision_bits)});
        if (ghost > t) eq.terms.push_back({ghost, t, ExtReal(-1, L.precision_bits)});
      }
      return eq;
    };

    blk.eqs.push_back(d_row(0));
    for (int r = 1; r <= K - 2; ++r)
      for (int ip = 1; ip <= r; ++ip) blk.eqs.push_back(eps_row(r, ip));
    for (int r = 1; r <= K - 1; ++r) blk.eqs.push_back(d_row(r));

    if (blk.eqs.size() != blk.vars.size()) {
      throw std::logic_error("D-system column " + std::to_string(j) +
                             ": equation/variable count mismatch");
    }
    for (const LinEq& eq : blk.eqs) sys.level_equation_counts[zi(eq.level - 1)] += 1;
    sys.blocks.push_back(std::move(blk));
  }
  return sys;
}

BlockSystem assemble_q_system(const StageLayout& L, const DenseVector& c,
                              const FreeParameters& free) {
  (void)free;
  BlockSystem sys;
  sys.kind = 'Q';
  sys.s = L.s;
  sys.level_equation_counts.assign(zi(L.m), 0);
  for (int i = 2; i <= L.s; ++i) {
    Block blk;
    blk.index = i;
    blk.level = q_level(L, i);
    const int K = blk.level;
    blk.vars.emplace_back(i, 1);
    for (int j = 2; j <= K * (K - 1) / 2 + 1; ++j) blk.vars.emplace_back(i, j);

    for (int r = 0; r <= K - 1; ++r) {
      LinEq eq;
      eq.level = r + 1;
      for (int j = 1; j < i; ++j) {
        eq.terms.push_back({i, j, pow_int(c[zi(j - 1)], r)});
      }
      eq.rhs = pow_int(c[zi(i - 1)], r + 1) / ExtReal(r + 1, L.precision_bits);
      blk.eqs.push_back(std::move(eq));
    }
    for (int k = 3; k <= K; ++k) {
      for (int jp = (k - 2) * (k - 3) / 2 + 2; jp <= (k - 1) * (k - 2) / 2 + 1; ++jp) {
        LinEq eq;
        eq.level = k;
        eq.rhs = ExtReal(0, L.precision_bits);
        eq.terms.push_back({i, jp, ExtReal(1, L.precision_bits)});
        blk.eqs.push_back(std::move(eq));
      }
    }

    if (blk.eqs.size() != blk.vars.size()) {
      throw std::logic_error("Q-system row " + std::to_string(i) +
                             ": equation/variable count mismatch");
    }
    for (const LinEq& eq : blk.eqs) sys.level_equation_counts[zi(eq.level - 1)] += 1;
    sys.blocks.push_back(std::move(blk));
  }
  return sys;
}

namespace {

void solve_block_system(const BlockSystem& sys, DenseMatrix& A) {
  std::set<std::pair<int, int>> pending;
  for (const Block& blk : sys.blocks) pending.insert(blk.vars.begin(), blk.vars.end());

  for (const Block& blk : sys.blocks) {
    const std::size_t dim = blk.vars.size();
    std::map<std::pair<int, int>, std::size_t> column_of;
    for (std::size_t v = 0; v < dim; ++v) column_of.emplace(blk.vars[v], v);

    DenseMatrix M(dim, dim);
    DenseVector rhs(dim);
    for (std::size_t e = 0; e < dim; ++e) {
      rhs[e] = blk.eqs[e].rhs;
      for (const LinTerm& term : blk.eqs[e].terms) {
        auto it = column_of.find({term.i, term.j});
        if (it != column_of.end()) {
          M(e, it->second) += term.coeff;
        } else {
          if (pending.count({term.i, term.j})) {
            throw std::logic_error("block system references unsolved entry a(" +
                                   std::to_string(term.i) + "," +
                                   std::to_string(term.j) + ")");
          }
          rhs[e] -= term.coeff * A(zi(term.i - 1), zi(term.j - 1));
        }
      }
    }

    DenseVector x;
    try {
      x = solve_dense(M, rhs);
    } catch (const InfeasibleError& err) {
      std::ostringstream os;
      os << "singular " << sys.kind << "-system block at level " << blk.level
         << ", " << (sys.kind == 'D' ? "column " : "row ") << blk.index << ": "
         << err.what();
      throw InfeasibleError(os.str(), blk.level, blk.index);
    }
    for (std::size_t v = 0; v < dim; ++v) {
      A(zi(blk.vars[v].first - 1), zi(blk.vars[v].second - 1)) = x[v];
      pending.erase(blk.vars[v]);
    }
  }
}

}  // namespace

void solve_d_system(const BlockSystem& sys, DenseMatrix& A) {
  solve_block_system(sys, A);
}

void solve_q_system(const BlockSystem& sys, DenseMatrix& A) {
  solve_block_system(sys, A);
}

ButcherTableau construct(int p, const FreeParameters& free,
                         mpfr_prec_t precision_bits) {
  StageLayout L = plan_layout(p, precision_bits);
  validate_free_parameters(L, free);
  DenseVector c = assemble_nodes(L, free);
  DenseVector b = assemble_weights(L, free);

  DenseMatrix A(zi(L.s), zi(L.s));
  for (int i = 0; i < L.s; ++i)
    for (int j = 0; j < L.s; ++j) A(zi(i), zi(j)) = ExtReal(0, precision_bits);
  for (const auto& [ij, value] : free.free_A_Q) A(zi(ij.first - 1), zi(ij.second - 1)) = value;
  for (const auto& [ij, value] : free.free_A_D) A(zi(ij.first - 1), zi(ij.second - 1)) = value;

  BlockSystem dsys = assemble_d_system(L, b, c, free);
  solve_d_system(dsys, A);
  BlockSystem qsys = assemble_q_system(L, c, free);
  solve_q_system(qsys, A);

  ButcherTableau T;
  T.s = L.s;
  T.c = std::move(c);
  T.b = std::move(b);
  T.A = std::move(A);
  T.claimed_order = p;
  T.precision_bits = precision_bits;
  T.b_embedded = embedded_weights(T);
  return T;
}

ButcherTableau construct(int p, mpfr_prec_t precision_bits) {
  StageLayout L = plan_layout(p, precision_bits);
  return construct(p, default_free_parameters(L), precision_bits);
}

DenseVector embedded_weights(const ButcherTableau& T) {
  return T.b + d_vector(T, 1, T.b);
}

FreeParameters parse_free_parameters(const StageLayout& L,
                                     const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("free parameters: bad JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("free parameters: expected an object");

  FreeParameters F = default_free_parameters(L);
  auto decimal = [&](const nlohmann::json& v, const char* where) {
    if (!v.is_string()) {
      throw ValidationError(std::string("free parameters: ") + where +
                            " entries must be decimal strings");
    }
    return ExtReal::from_string(v.get<std::string>(), L.precision_bits);
  };
  if (doc.contains("q_nodes")) {
    const auto& arr = doc["q_nodes"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != L.l) {
      throw ValidationError("free parameters: q_nodes must list " +
                            std::to_string(L.l) + " values");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) F.q_nodes[i] = decimal(arr[i], "q_nodes");
  }
  if (doc.contains("cluster_splits")) {
    const auto& arr = doc["cluster_splits"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != L.N - 2) {
      throw ValidationError("free parameters: cluster_splits must list " +
                            std::to_string(L.N - 2) + " clusters");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_array() || arr[i].size() != L.clusters[i].size()) {
        throw ValidationError("free parameters: cluster split " +
                              std::to_string(i + 1) + " has wrong length");
      }
      for (std::size_t t = 0; t < arr[i].size(); ++t) {
        F.cluster_splits[i][t] = decimal(arr[i][t], "cluster_splits");
      }
    }
  }
  auto read_entries = [&](const char* key,
                          std::map<std::pair<int, int>, ExtReal>* out) {
    if (!doc.contains(key)) return;
    const auto& obj = doc[key];
    if (!obj.is_object()) {
      throw ValidationError(std::string("free parameters: ") + key +
                            " must map \"i,j\" keys to decimal strings");
    }
    for (const auto& [key_str, value] : obj.items()) {
      int i = 0, j = 0;
      char comma = 0;
      std::istringstream is(key_str);
      if (!(is >> i >> comma >> j) || comma != ',') {
        throw ValidationError(std::string("free parameters: bad index key \"") +
                              key_str + "\" in " + key);
      }
      (*out)[{i, j}] = decimal(value, key);
    }
  };
  read_entries("free_A_Q", &F.free_A_Q);
  read_entries("free_A_D", &F.free_A_D);
  validate_free_parameters(L, F);
  return F;
}

std::string serialize_free_parameters(const StageLayout& L,
                                      const FreeParameters& F) {
  nlohmann::json doc;
  doc["q_nodes"] = nlohmann::json::array();
  for (const ExtReal& x : F.q_nodes) doc["q_nodes"].push_back(x.to_string());
  doc["cluster_splits"] = nlohmann::json::array();
  for (const DenseVector& split : F.cluster_splits) {
    nlohmann::json row = nlohmann::json::array();
    for (const ExtReal& w : split) row.push_back(w.to_string());
    doc["cluster_splits"].push_back(std::move(row));
  }
  auto dump_entries = [&](const char* key,
                          const std::map<std::pair<int, int>, ExtReal>& entries) {
    doc[key] = nlohmann::json::object();
    for (const auto& [ij, value] : entries) {
      doc[key][std::to_string(ij.first) + "," + std::to_string(ij.second)] =
          value.to_string();
    }
  };
  dump_entries("free_A_Q", F.free_A_Q);
  dump_entries("free_A_D", F.free_A_D);
  (void)L;
  return doc.dump(2);
}

}  // namespace qderk
