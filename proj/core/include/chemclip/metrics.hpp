#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "chemclip/fingerprint.hpp"
#include "chemclip/matrix.hpp"

namespace chemclip {

// Group order used everywhere: inorganic active, inorganic inactive,
// organic active, organic inactive.
enum Group : std::size_t { kIA = 0, kII = 1, kOA = 2, kOI = 3 };
inline constexpr std::array<const char*, 4> kGroupNames = {"IA", "II", "OA", "OI"};

struct CentroidSet {
  std::array<std::vector<double>, 4> centroids;  // arithmetic means, not renormalised
  std::array<std::size_t, 4> counts{};

  double distance(Group a, Group b) const;
};

// Throws Error(kEmptyGroup) when any of the four groups has no member.
CentroidSet centroids(const Matrix& embeddings, std::span<const Domain> domains, std::span<const bool> active);

// 1/2 [d(IA,OA)/d(IA,OI) + d(II,OI)/d(II,OA)]; below 1 means same-activity
// groups sit closer across domains.
double alignment_ratio(const CentroidSet& c);
// avg[d(IA,OI), d(II,OA)] / avg[d(IA,OA), d(II,OI)]; above 1 means
// different-activity groups are further apart.
double separation_ratio(const CentroidSet& c);
double active_alignment_ratio(const CentroidSet& c);
double active_alignment_ratio(double d_ia_oa, double d_ia_oi);

// (1 - alignment) + (separation - 1), floored at zero.
double combined_score(double alignment, double separation);

struct AlignmentReport {
  std::array<std::size_t, 4> counts{};
  std::array<std::array<double, 4>, 4> distances{};
  double alignment = 0.0;
  double separation = 0.0;
  double combined = 0.0;
  double active_alignment = 0.0;

  std::string to_json() const;
  std::string to_text() const;
};

AlignmentReport alignment_report(const CentroidSet& c);

// Probability that a random positive outscores a random negative, ties
// counted as 1/2, via average ranks. Throws Error(kUndefined) for a
// single-class label set.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct ClassificationReport {
  double auc = 0.0;  // NaN when undefined
  double f1 = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Predict active iff score >= threshold. AUC is filled in when both classes
// are present, NaN otherwise.
ClassificationReport classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                             double threshold);

double f1_score(std::span<const double> scores, std::span<const int> labels, double threshold);

// Candidates are the midpoints between adjacent distinct scores plus a
// sentinel below the minimum (min - 1) and above the maximum (max + 1).
// The F1-maximising candidate wins; ties resolve to the smallest threshold.
double best_f1_threshold(std::span<const double> scores, std::span<const int> labels);

}  // namespace chemclip
