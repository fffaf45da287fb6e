#pragma once

#include <cstddef>
#include <vector>

#include "fuzzcare/cardio_kb.hpp"

namespace fuzzcare {

struct CalibrationOptions {
  std::size_t resolution = kDefaultResolution;
  std::size_t max_sweeps = 20;
  /// Minimum fraction of rows that must agree, else CalibrationFailed.
  double min_agreement = 0.8;
};

inline constexpr const char* kCalibrationProcedure = "coordinate-grid/v1";

/// Spacing of the candidate grid for a variable's term centres.
double calibration_step(const LinguisticVariable& variable);

/// Rows whose diagnosed label equals the expected label.
std::size_t count_agreement(const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                            std::size_t resolution = kDefaultResolution);

/// Re-fits the term centres of every non-anchored input as a shouldered
/// partition. Cyclic coordinate search: for each free variable in declared
/// order, every strictly increasing choice of centres from its grid is tried
/// (lexicographic order) and kept if it raises the number of agreeing rows,
/// or keeps it and moves the centres closer to even spacing. Sweeps repeat
/// until nothing changes. An empty table returns kb unchanged.
KnowledgeBase calibrate(const KnowledgeBase& kb, const std::vector<LabeledRecord>& rows,
                        const CalibrationOptions& options = {});

}  // namespace fuzzcare
