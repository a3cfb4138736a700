#pragma once

#include <cstddef>
#include <vector>

namespace tpp {

// One realization: strictly increasing event times inside [0, window_end).
// An event landing exactly at window_end is not part of the sequence.
struct EventSequence {
  std::vector<double> times;
  double window_end = 0.0;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

// A collection of realizations over one shared observation window.
struct Dataset {
  std::vector<EventSequence> sequences;
  double window_end = 0.0;

  std::size_t size() const { return sequences.size(); }
  std::size_t total_events() const;
};

// Inter-event times; gaps[0] is measured from t = 0.
struct InterEventTimes {
  std::vector<double> gaps;
};

enum class SequenceCheck { Ok, NonMonotonic, OutOfWindow };

SequenceCheck validate(const EventSequence& seq);

// throws Error(NonMonotonic / OutOfWindow) when validate() != Ok
void require_valid(const EventSequence& seq);

// throws unless every member is valid and shares the dataset window
void require_valid(const Dataset& data);

InterEventTimes to_gaps(const EventSequence& seq);

// Left-to-right prefix sums of the gaps; events falling at or beyond
// window_end are dropped.  Round-trips exactly with to_gaps for sequences
// built the same way.
EventSequence from_gaps(const InterEventTimes& gaps, double window_end);

// every event time in the dataset, concatenated in sequence order
std::vector<double> pooled_times(const Dataset& data);

}  // namespace tpp
