#pragma once

#include "dca/learn/em.hpp"
#include "dca/model/citations.hpp"
#include "dca/model/compile.hpp"

namespace dca::model {

// Learns the compiled model's parameters from citation records. With more
// than one restart every run starts from a seeded random initialization and
// the best final objective wins.
inline learn::LearnResult train(const CompiledModel& compiled, const bn::RecordSet& records,
                                const learn::LearnConfig& config, int restarts = 1) {
  if (restarts > 1) return learn::em_learn_best_of(compiled.network, records, config, restarts);
  return learn::em_learn(compiled.network, records, config);
}

inline learn::LearnResult train(const CompiledModel& compiled, const std::vector<CitationRecord>& citations,
                                const learn::LearnConfig& config, int restarts = 1) {
  return train(compiled, records_to_assignments(compiled.model, compiled, citations), config, restarts);
}

}  // namespace dca::model
