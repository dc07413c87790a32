#include "chemclip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "chemclip/error.hpp"

namespace chemclip {

double CentroidSet::distance(Group a, Group b) const {
  double s = 0.0;
  for (std::size_t k = 0; k < centroids[a].size(); ++k) {
    const double d = centroids[a][k] - centroids[b][k];
    s += d * d;
  }
  return std::sqrt(s);
}

CentroidSet centroids(const Matrix& embeddings, std::span<const Domain> domains, std::span<const bool> active) {
  if (domains.size() != embeddings.rows() || active.size() != embeddings.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not match embedding rows");
  }
  CentroidSet set;
  for (auto& c : set.centroids) c.assign(embeddings.cols(), 0.0);
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    const std::size_t g = (domains[r] == Domain::kInorganic ? 0 : 2) + (active[r] ? 0 : 1);
    ++set.counts[g];
    const auto row = embeddings.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) set.centroids[g][k] += row[k];
  }
  for (std::size_t g = 0; g < 4; ++g) {
    if (set.counts[g] == 0) {
      throw Error(ErrorCode::kEmptyGroup, std::string("group ") + kGroupNames[g] + " has no members");
    }
    for (double& v : set.centroids[g]) v /= static_cast<double>(set.counts[g]);
  }
  return set;
}

double alignment_ratio(const CentroidSet& c) {
  return 0.5 * (c.distance(kIA, kOA) / c.distance(kIA, kOI) + c.distance(kII, kOI) / c.distance(kII, kOA));
}

double separation_ratio(const CentroidSet& c) {
  const double different = 0.5 * (c.distance(kIA, kOI) + c.distance(kII, kOA));
  const double same = 0.5 * (c.distance(kIA, kOA) + c.distance(kII, kOI));
  return different / same;
}

double active_alignment_ratio(double d_ia_oa, double d_ia_oi) { return d_ia_oa / d_ia_oi; }

double active_alignment_ratio(const CentroidSet& c) {
  return active_alignment_ratio(c.distance(kIA, kOA), c.distance(kIA, kOI));
}

double combined_score(double alignment, double separation) {
  return std::max(0.0, (1.0 - alignment) + (separation - 1.0));
}

AlignmentReport alignment_report(const CentroidSet& c) {
  AlignmentReport r;
  r.counts = c.counts;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) r.distances[a][b] = a == b ? 0.0 : c.distance(Group(a), Group(b));
  }
  r.alignment = alignment_ratio(c);
  r.separation = separation_ratio(c);
  r.combined = combined_score(r.alignment, r.separation);
  r.active_alignment = active_alignment_ratio(c);
  return r;
}

std::string AlignmentReport::to_json() const {
  nlohmann::json j;
  for (std::size_t g = 0; g < 4; ++g) j["counts"][kGroupNames[g]] = counts[g];
  j["groups"] = kGroupNames;
  j["distances"] = distances;
  j["alignment_ratio"] = alignment;
  j["separation_ratio"] = separation;
  j["combined_score"] = combined;
  j["active_alignment_ratio"] = active_alignment;
  j["notes"] = {"centroids are unnormalised means of unit-norm embeddings; distances are Euclidean",
                "combined_score = max(0, (1 - alignment_ratio) + (separation_ratio - 1))"};
  return j.dump(2);
}

std::string AlignmentReport::to_text() const {
  std::ostringstream out;
  char buf[128];
  out << "Cross-modal alignment\n";
  std::snprintf(buf, sizeof(buf), "  alignment ratio (lower is better):   %.3f\n", alignment);
  out << buf;
  std::snprintf(buf, sizeof(buf), "  separation ratio (higher is better): %.3f\n", separation);
  out << buf;
  std::snprintf(buf, sizeof(buf), "  active alignment ratio d(IA,OA)/d(IA,OI): %.3f (%.1f%% closer)\n",
                active_alignment, 100.0 * (1.0 - active_alignment));
  out << buf;
  std::snprintf(buf, sizeof(buf), "  combined score: %.3f\n\n", combined);
  out << buf;
  out << "Centroid distances\n        IA      II      OA      OI\n";
  for (std::size_t a = 0; a < 4; ++a) {
    std::snprintf(buf, sizeof(buf), "  %s  %6.3f  %6.3f  %6.3f  %6.3f\n", kGroupNames[a], distances[a][0],
                  distances[a][1], distances[a][2], distances[a][3]);
    out << buf;
  }
  out << "\nGroup sizes\n";
  for (std::size_t g = 0; g < 4; ++g) out << "  " << kGroupNames[g] << ": " << counts[g] << '\n';
  return out.str();
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw Error(ErrorCode::kUndefined, "AUC needs both classes");
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

ClassificationReport classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                            double threshold) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ in length");
  ClassificationReport r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++r.tp;
    else if (predicted) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.accuracy = ratio(r.tp + r.tn, scores.size());
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  try {
    r.auc = auc_roc(scores, labels);
  } catch (const Error&) {
    r.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double f1_score(std::span<const double> scores, std::span<const int> labels, double threshold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

double best_f1_threshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ in length");
  if (scores.empty()) throw Error(ErrorCode::kUndefined, "no validation scores");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::size_t total_pos = 0;
  for (int l : labels) total_pos += l != 0;

  // Ascending sweep: at the candidate just below distinct value k, every
  // score >= that value is predicted active.
  auto f1_of = [](std::size_t tp, std::size_t fp, std::size_t fn) {
    const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  };
  std::size_t tp = total_pos, fp = scores.size() - total_pos, fn = 0;
  double best = scores[order.front()] - 1.0;
  double best_f1 = f1_of(tp, fp, fn);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] != 0) {
        --tp;
        ++fn;
      } else {
        --fp;
      }
      ++j;
    }
    const double t = j < order.size() ? 0.5 * (scores[order[i]] + scores[order[j]]) : scores[order[i]] + 1.0;
    const double f1 = f1_of(tp, fp, fn);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = t;
    }
    i = j;
  }
  return best;
}

}  // namespace chemclip
