// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#include "qderk/trees.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "qderk/tableau.hpp"

namespace qderk {

RootedTree RootedTree::leaf() {
  RootedTree t;
  t.encoding = "()";
  return t;
}

RootedTree RootedTree::make(std::vector<RootedTree> children) {
  RootedTree t;
  t.children = std::move(children);
  std::sort(t.children.begin(), t.children.end(),
            [](const RootedTree& a, const RootedTree& b) {
              return a.encoding < b.encoding;
            });
  t.order = 1;
  t.gamma = 1;
  t.sigma = 1;
  std::string enc = "(";
  std::uint64_t run = 1;
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    const RootedTree& ch = t.children[i];
    t.order += ch.order;
    t.gamma *= ch.gamma;
    t.sigma *= ch.sigma;
    if (i > 0 && ch.encoding == t.children[i - 1].encoding) {
      run += 1;
      t.sigma *= run;  // accumulates the multiplicity factorial
    } else {
      run = 1;
    }
    enc += ch.encoding;
  }
  enc += ")";
  t.gamma *= static_cast<std::uint64_t>(t.order);
  t.encoding = std::move(enc);
  return t;
}

namespace {

// Recursively distributes "budget" nodes over children chosen from the pool
// of smaller trees (sorted), enforcing nondecreasing child index so every
// multiset appears exactly once.
void fill_children(const std::vector<std::vector<RootedTree>>& by_order,
                   int budget, std::size_t min_flat_index,
                   std::vector<RootedTree>* current,
                   std::vector<RootedTree>* out,
                   const std::vector<const RootedTree*>& flat) {
  if (budget == 0) {
    out->push_back(RootedTree::make(*current));
    return;
  }
  for (std::size_t idx = min_flat_index; idx < flat.size(); ++idx) {
    const RootedTree* t = flat[idx];
    if (t->order > budget) break;  // flat list is sorted by order
    current->push_back(*t);
    fill_children(by_order, budget - t->order, idx, current, out, flat);
    current->pop_back();
  }
}

}  // namespace

std::vector<std::vector<RootedTree>> enumerate_trees(int p_max) {
  if (p_max < 1) throw std::invalid_argument("enumerate_trees: p_max >= 1");
  std::vector<std::vector<RootedTree>> by_order;
  by_order.push_back({RootedTree::leaf()});
  for (int p = 2; p <= p_max; ++p) {
    std::vector<const RootedTree*> flat;
    for (const auto& grp : by_order)
      for (const auto& t : grp) flat.push_back(&t);
    std::vector<RootedTree> group;
    std::vector<RootedTree> current;
    fill_children(by_order, p - 1, 0, &current, &group, flat);
    std::sort(group.begin(), group.end(),
              [](const RootedTree& a, const RootedTree& b) {
                return a.encoding < b.encoding;
              });
    by_order.push_back(std::move(group));
  }
  return by_order;
}

DenseVector phi_vector(const ButcherTableau& T, const RootedTree& t) {
  DenseVector phi = ones(static_cast<std::size_t>(T.s), T.precision_bits);
  for (const RootedTree& ch : t.children) {
    phi = hadamard(phi, matvec(T.A, phi_vector(T, ch)));
  }
  return phi;
}

ExtReal elementary_weight(const ButcherTableau& T, const RootedTree& t,
                          const DenseVector& weights) {
  return dot(weights, phi_vector(T, t));
}

std::string OrderReport::to_csv() const {
  std::ostringstream os;
  os << "order,tree_encoding,residual_decimal\n";
  for (const auto& [enc, res] : residuals) {
    int order = static_cast<int>(std::count(enc.begin(), enc.end(), '('));
    os << order << "," << enc << "," << res.to_string() << "\n";
  }
  return os.str();
}

OrderReport verify_order(const ButcherTableau& T, int p_max,
                         const DenseVector& weights, const ExtReal& tol) {
  OrderReport report;
  auto groups = enumerate_trees(p_max);
  report.max_abs_residual_per_order.resize(groups.size());
  bool prefix_ok = true;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    ExtReal worst = 0;
    for (const RootedTree& t : groups[k]) {
      ExtReal phi = elementary_weight(T, t, weights);
      ExtReal residual =
          phi - ExtReal(1, T.precision_bits) /
                    ExtReal(static_cast<long>(t.gamma), T.precision_bits);
      report.residuals.emplace(t.encoding, residual);
      worst = max(worst, abs(residual));
    }
    report.max_abs_residual_per_order[k] = worst;
    if (prefix_ok && worst < tol) {
      report.order_verified = static_cast<int>(k) + 1;
    } else {
      prefix_ok = false;
    }
  }
  return report;
}

OrderReport verify_order(const ButcherTableau& T, int p_max) {
  ExtReal tol = pow_int(ExtReal(0.5, T.precision_bits), T.precision_bits / 2);
  return verify_order(T, p_max, T.b, tol);
}

ExtReal principal_error_norm(const ButcherTableau& T, int p) {
  auto groups = enumerate_trees(p + 1);
  ExtReal sum = 0;
  for (const RootedTree& t : groups[static_cast<std::size_t>(p)]) {
    ExtReal residual =
        elementary_weight(T, t, T.b) -
        ExtReal(1, T.precision_bits) /
            ExtReal(static_cast<long>(t.gamma), T.precision_bits);
    ExtReal weighted = residual / ExtReal(static_cast<long>(t.sigma));
    sum += weighted * weighted;
  }
  return sqrt(sum);
}

}  // namespace qderk
