#pragma once

#include <cstddef>

namespace gestalt {

struct Scores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline double f1_score(double precision, double recall) {
  if (precision + recall <= 0) return 0;
  return 2 * precision * recall / (precision + recall);
}

// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = harmonic mean; 0/0 is 0.
inline Scores metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  Scores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

}  // namespace gestalt
