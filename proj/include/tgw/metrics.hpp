#pragma once

#include "tgw/coupling_algebra.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tgw {

// canonical[i][x] is the ground-truth node id of node x in space i; nodes of
// different spaces correspond iff their ids agree.
struct GroundTruth {
  std::vector<std::vector<Index>> canonical;
};

struct NodeCorrectness {
  double nc1 = 0.0;
  double nc_all = 0.0;
};

// Fractions of support tuples with at least one / all pairs matched correctly.
// Tuples are counted as written, so the denominator is the support size.
NodeCorrectness node_correctness(const MultiCoupling& mu, const GroundTruth& truth);

// Monte-Carlo nearest-representative confusion matrix. Every iteration draws one
// representative per class and classifies all items; ties are broken uniformly
// at random. Row c is normalized by iterations * |class c|.
Matrix nn_confusion(const Matrix& distances, const std::vector<Index>& labels, int iterations,
                    std::uint64_t seed);

struct MrePcc {
  double mre = 0.0;
  double pcc = 0.0;  // NaN when either vector is constant
};

// MRE over off-diagonal entries with nonzero reference; PCC over the strict upper triangle.
MrePcc mre_pcc(const Matrix& reference, const Matrix& approx);

// Maps string labels to dense class ids in order of first appearance.
std::vector<Index> encode_labels(const std::vector<std::string>& labels,
                                 std::vector<std::string>* classes = nullptr);

}  // namespace tgw
