#include "tgw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tgw {

NodeCorrectness node_correctness(const MultiCoupling& mu, const GroundTruth& truth) {
  const Index n = mu.arity();
  require(static_cast<Index>(truth.canonical.size()) == n, "ground truth missing for some space");
  for (Index i = 0; i < n; ++i) {
    require(static_cast<Index>(truth.canonical[static_cast<std::size_t>(i)].size()) ==
                mu.sizes()[static_cast<std::size_t>(i)],
            "ground truth size does not match space " + std::to_string(i));
  }
  require(mu.support_size() > 0, "empty matching");
  auto id = [&](Index s, Index i) {
    return truth.canonical[static_cast<std::size_t>(i)][static_cast<std::size_t>(mu.at(s, i))];
  };
  Index any = 0;
  Index all = 0;
  for (Index s = 0; s < mu.support_size(); ++s) {
    bool some_correct = false;
    bool all_correct = true;
    for (Index k = 0; k < n; ++k) {
      for (Index l = k + 1; l < n; ++l) {
        if (id(s, k) == id(s, l)) {
          some_correct = true;
        } else {
          all_correct = false;
        }
      }
    }
    if (n < 2) some_correct = true;
    any += some_correct ? 1 : 0;
    all += all_correct ? 1 : 0;
  }
  const auto total = static_cast<double>(mu.support_size());
  return {static_cast<double>(any) / total, static_cast<double>(all) / total};
}

std::vector<Index> encode_labels(const std::vector<std::string>& labels,
                                 std::vector<std::string>* classes) {
  std::vector<std::string> names;
  std::vector<Index> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = std::find(names.begin(), names.end(), l);
    if (it == names.end()) {
      names.push_back(l);
      it = names.end() - 1;
    }
    out.push_back(static_cast<Index>(it - names.begin()));
  }
  if (classes != nullptr) *classes = std::move(names);
  return out;
}

Matrix nn_confusion(const Matrix& distances, const std::vector<Index>& labels, int iterations,
                    std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  require(distances.rows() == n && distances.cols() == n, "distance matrix does not match labels");
  require(iterations >= 1, "iterations must be positive");
  require(n >= 1, "no items to classify");
  const Index classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
  for (Index i = 0; i < n; ++i) {
    require(labels[static_cast<std::size_t>(i)] >= 0, "negative class label");
    members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  for (const auto& m : members) require(!m.empty(), "class with zero members");

  Matrix counts = Matrix::Zero(classes, classes);
  std::vector<Index> reps(static_cast<std::size_t>(classes));
  std::vector<Index> tied;
  for (int it = 0; it < iterations; ++it) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(it));
    for (Index c = 0; c < classes; ++c) {
      const auto& m = members[static_cast<std::size_t>(c)];
      std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
      reps[static_cast<std::size_t>(c)] = m[pick(rng)];
    }
    for (Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      tied.clear();
      for (Index c = 0; c < classes; ++c) {
        const double d = distances(i, reps[static_cast<std::size_t>(c)]);
        if (d < best) {
          best = d;
          tied.assign(1, c);
        } else if (d == best) {
          tied.push_back(c);
        }
      }
      Index predicted = tied.front();
      if (tied.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
        predicted = tied[pick(rng)];
      }
      counts(labels[static_cast<std::size_t>(i)], predicted) += 1.0;
    }
  }
  for (Index c = 0; c < classes; ++c) {
    counts.row(c) /= static_cast<double>(iterations) *
                     static_cast<double>(members[static_cast<std::size_t>(c)].size());
  }
  return counts;
}

MrePcc mre_pcc(const Matrix& reference, const Matrix& approx) {
  require(reference.rows() == reference.cols() && reference.rows() == approx.rows() &&
              reference.cols() == approx.cols(),
          "matrices must be square and of equal shape");
  const Index n = reference.rows();
  double rel = 0.0;
  Index count = 0;
  std::vector<double> a;
  std::vector<double> b;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = reference(i, j);
      if (r != 0.0) {
        rel += std::abs(approx(i, j) - r) / std::abs(r);
        ++count;
      }
      if (j > i) {
        a.push_back(r);
        b.push_back(approx(i, j));
      }
    }
  }
  require(count > 0, "reference matrix has no nonzero off-diagonal entries");
  MrePcc out;
  out.mre = rel / static_cast<double>(count);
  const auto k = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ma += a[t];
    mb += b[t];
  }
  ma /= k;
  mb /= k;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    sab += (a[t] - ma) * (b[t] - mb);
    saa += (a[t] - ma) * (a[t] - ma);
    sbb += (b[t] - mb) * (b[t] - mb);
  }
  out.pcc = (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb)
                                     : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace tgw
