// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/tableau.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qderk/errors.hpp"

namespace qderk {

namespace {

void require_valid(const ButcherTableau& T) {
  if (T.s <= 0 || T.c.size() != static_cast<std::size_t>(T.s) ||
      T.b.size() != static_cast<std::size_t>(T.s) ||
      T.A.rows() != static_cast<std::size_t>(T.s) ||
      T.A.cols() != static_cast<std::size_t>(T.s)) {
    throw ValidationError("tableau: inconsistent dimensions");
  }
}

}  // namespace

DenseVector q_vector(const ButcherTableau& T, int n) {
  if (n < 0) throw ValidationError("q_vector: n >= 0");
  require_valid(T);
  DenseVector cn = epow(T.c, n);
  DenseVector cn1 = hadamard(cn, T.c);
  ExtReal inv(1, T.precision_bits);
  inv /= ExtReal(n + 1);
  return matvec(T.A, cn) - inv * cn1;
}

DenseVector d_vector(const ButcherTableau& T, int n, const DenseVector& weights) {
  if (n < 0) throw ValidationError("d_vector: n >= 0");
  require_valid(T);
  if (weights.size() != static_cast<std::size_t>(T.s)) {
    throw ValidationError("d_vector: weight length mismatch");
  }
  DenseVector cn = epow(T.c, n);
  DenseVector cn1 = hadamard(cn, T.c);
  DenseVector lhs = tmatvec(T.A, hadamard(weights, cn));
  ExtReal inv(1, T.precision_bits);
  inv /= ExtReal(n + 1);
  DenseVector rhs(T.c.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = inv * weights[i] * (ExtReal(1, T.precision_bits) - cn1[i]);
  }
  return lhs - rhs;
}

DenseVector d_vector(const ButcherTableau& T, int n) { return d_vector(T, n, T.b); }

std::vector<SubspaceBasis> q_space_basis(const ButcherTableau& T, int m) {
  if (m < 1) throw ValidationError("q_space_basis: m >= 1");
  std::vector<SubspaceBasis> levels;
  SubspaceBasis q1;
  q1.level = 1;
  q1.generators.push_back({q_vector(T, 0), "q0"});
  levels.push_back(q1);
  for (int k = 2; k <= m; ++k) {
    SubspaceBasis lvl;
    lvl.level = k;
    lvl.generators.push_back({q_vector(T, k - 1), "q" + std::to_string(k - 1)});
    for (const Generator& g : levels.back().generators) {
      lvl.generators.push_back({g.v, g.provenance});
      lvl.generators.push_back({matvec(T.A, g.v), "A*(" + g.provenance + ")"});
      lvl.generators.push_back({hadamard(g.v, T.c), "(" + g.provenance + ")*c"});
    }
    levels.push_back(lvl);
  }
  return levels;
}

std::vector<SubspaceBasis> d_space_basis(const ButcherTableau& T, int n,
                                         const DenseVector& weights) {
  if (n < 1) throw ValidationError("d_space_basis: n >= 1");
  std::vector<SubspaceBasis> levels;
  SubspaceBasis d1;
  d1.level = 1;
  d1.generators.push_back({d_vector(T, 0, weights), "d0"});
  levels.push_back(d1);
  for (int k = 2; k <= n; ++k) {
    SubspaceBasis lvl;
    lvl.level = k;
    lvl.generators.push_back(
        {d_vector(T, k - 1, weights), "d" + std::to_string(k - 1)});
    for (const Generator& g : levels.back().generators) {
      lvl.generators.push_back({g.v, g.provenance});
      lvl.generators.push_back({tmatvec(T.A, g.v), "(" + g.provenance + ")x1A"});
      lvl.generators.push_back({hadamard(g.v, T.c), "(" + g.provenance + ")*c"});
    }
    levels.push_back(lvl);
  }
  return levels;
}

std::vector<SubspaceBasis> d_space_basis(const ButcherTableau& T, int n) {
  return d_space_basis(T, n, T.b);
}

SufficiencyReport check_sufficiency(const ButcherTableau& T, int p, int m,
                                    int n, const DenseVector& weights,
                                    const ExtReal& tol) {
  if (m < n - 1 || m + n + 1 < p) {
    throw ValidationError("check_sufficiency: requires m >= n-1 and m+n+1 >= p");
  }
  require_valid(T);
  SufficiencyReport rep;
  rep.p = p;
  rep.m = m;
  rep.n = n;

  // B(p): quadrature conditions.
  rep.worst_B = 0;
  for (int k = 1; k <= p; ++k) {
    ExtReal v = dot(weights, epow(T.c, k - 1)) -
                ExtReal(1, T.precision_bits) / ExtReal(k);
    rep.worst_B = max(rep.worst_B, abs(v));
  }

  auto qs = q_space_basis(T, m);
  auto ds = d_space_basis(T, n, weights);

  // QO(m): b orthogonal to Q_m (Hadamard form).
  rep.worst_QO = 0;
  for (const Generator& g : qs.back().generators) {
    rep.worst_QO = max(rep.worst_QO, norm_inf(hadamard(weights, g.v)));
  }

  // DO(n): d . c^(k-1) = 0 for k = 1 .. p - n over the D_n generators.
  rep.worst_DO = 0;
  for (const Generator& g : ds.back().generators) {
    for (int k = 1; k <= p - n; ++k) {
      rep.worst_DO = max(rep.worst_DO, abs(dot(g.v, epow(T.c, k - 1))));
    }
  }

  // QD(m,n): all Hadamard pairs vanish.
  rep.worst_QD = 0;
  for (const Generator& q : qs.back().generators) {
    for (const Generator& d : ds.back().generators) {
      rep.worst_QD = max(rep.worst_QD, norm_inf(hadamard(q.v, d.v)));
    }
  }

  // QR(m): Hadamard products of Q_{m1}, Q_{m2} generators (m2 <= m1 <= m)
  // stay inside span(Q_{m1}).
  rep.worst_QR = 0;
  for (int m1 = 1; m1 <= m; ++m1) {
    const auto& gens1 = qs[static_cast<std::size_t>(m1 - 1)].generators;
    if (gens1.empty()) continue;
    DenseMatrix span(static_cast<std::size_t>(T.s), gens1.size());
    for (std::size_t j = 0; j < gens1.size(); ++j) {
      for (int i = 0; i < T.s; ++i) {
        span(static_cast<std::size_t>(i), j) = gens1[j].v[static_cast<std::size_t>(i)];
      }
    }
    for (int m2 = 1; m2 <= m1; ++m2) {
      for (const Generator& g1 : gens1) {
        for (const Generator& g2 :
             qs[static_cast<std::size_t>(m2 - 1)].generators) {
          DenseVector prod = hadamard(g1.v, g2.v);
          auto [x, res] = least_squares(span, prod);
          (void)x;
          rep.worst_QR = max(rep.worst_QR, res);
        }
      }
    }
  }

  rep.pass_B = rep.worst_B < tol;
  rep.pass_QO = rep.worst_QO < tol;
  rep.pass_DO = rep.worst_DO < tol;
  rep.pass_QD = rep.worst_QD < tol;
  rep.pass_QR = rep.worst_QR < tol;
  return rep;
}

SufficiencyReport check_sufficiency(const ButcherTableau& T, int p, int m, int n) {
  ExtReal tol = pow_int(ExtReal(0.5, T.precision_bits), T.precision_bits / 2);
  return check_sufficiency(T, p, m, n, T.b, tol);
}

ExtReal sparsity_density(const ButcherTableau& T) {
  require_valid(T);
  ExtReal tol = pow_int(ExtReal(0.5, T.precision_bits), T.precision_bits - 24);
  long nonzero = 0;
  for (int i = 1; i < T.s; ++i) {
    for (int j = 0; j < i; ++j) {
      if (abs(T.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) > tol) {
        ++nonzero;
      }
    }
  }
  long total = static_cast<long>(T.s) * (T.s - 1) / 2;
  return ExtReal(nonzero) / ExtReal(total);
}

std::string serialize(const ButcherTableau& T) {
  require_valid(T);
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["order"] = T.claimed_order ? nlohmann::json(*T.claimed_order)
                                 : nlohmann::json(nullptr);
  doc["stages"] = T.s;
  doc["precision_bits"] = static_cast<long>(T.precision_bits);
  auto vec_to_json = [](const DenseVector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < v.size(); ++i) arr.push_back(v[i].to_string());
    return arr;
  };
  doc["c"] = vec_to_json(T.c);
  doc["b"] = vec_to_json(T.b);
  doc["b_embedded"] =
      T.b_embedded ? vec_to_json(*T.b_embedded) : nlohmann::json(nullptr);
  nlohmann::json A = nlohmann::json::array();
  for (int i = 0; i < T.s; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < T.s; ++j) {
      row.push_back(
          T.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).to_string());
    }
    A.push_back(row);
  }
  doc["A"] = A;
  return doc.dump(2);
}

ButcherTableau deserialize(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("deserialize: malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != 1) {
      throw ValidationError("deserialize: unsupported format_version");
    }
    ButcherTableau T;
    T.s = doc.at("stages").get<int>();
    T.precision_bits = doc.at("precision_bits").get<long>();
    if (!doc.at("order").is_null()) T.claimed_order = doc["order"].get<int>();
    auto parse_vec = [&](const nlohmann::json& arr) {
      if (!arr.is_array() || arr.size() != static_cast<std::size_t>(T.s)) {
        throw ValidationError("deserialize: vector length mismatch");
      }
      DenseVector v(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) {
        v[i] = ExtReal::from_string(arr[i].get<std::string>(), T.precision_bits);
      }
      return v;
    };
    T.c = parse_vec(doc.at("c"));
    T.b = parse_vec(doc.at("b"));
    if (!doc.at("b_embedded").is_null()) T.b_embedded = parse_vec(doc["b_embedded"]);
    const nlohmann::json& A = doc.at("A");
    if (!A.is_array() || A.size() != static_cast<std::size_t>(T.s)) {
      throw ValidationError("deserialize: A row count mismatch");
    }
    T.A = DenseMatrix(static_cast<std::size_t>(T.s), static_cast<std::size_t>(T.s));
    for (int i = 0; i < T.s; ++i) {
      const nlohmann::json& row = A[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(T.s)) {
        throw ValidationError("deserialize: A column count mismatch");
      }
      for (int j = 0; j < T.s; ++j) {
        ExtReal v = ExtReal::from_string(row[static_cast<std::size_t>(j)].get<std::string>(),
                                         T.precision_bits);
        if (j >= i && !v.is_zero()) {
          throw ValidationError("deserialize: A not strictly lower triangular at (" +
                                std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        }
        T.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      }
    }
    return T;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("deserialize: bad document: ") + e.what());
  }
}

ButcherTableau load_tableau(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open tableau file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

void save_tableau(const ButcherTableau& T, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write tableau file: " + path);
  out << serialize(T) << "\n";
}

}  // namespace qderk
