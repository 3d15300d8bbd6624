#pragma once

namespace permod {

/// Result of a single model step: whether it exhausted and which fraction of
/// dt elapsed before the exhaustion point (1 when not exhausted).
struct StepOutcome {
  bool exhausted = false;
  double fraction = 1.0;
};

} // namespace permod
