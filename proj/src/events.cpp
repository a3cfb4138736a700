#include "events.hpp"

#include <cmath>

#include "errors.hpp"

namespace tpp {

std::size_t Dataset::total_events() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

SequenceCheck validate(const EventSequence& seq) {
  if (!(seq.window_end > 0.0) || !std::isfinite(seq.window_end))
    return SequenceCheck::OutOfWindow;
  for (std::size_t i = 1; i < seq.times.size(); ++i)
    if (!(seq.times[i] > seq.times[i - 1])) return SequenceCheck::NonMonotonic;
  for (double t : seq.times)
    if (!(t >= 0.0) || !(t < seq.window_end)) return SequenceCheck::OutOfWindow;
  return SequenceCheck::Ok;
}

void require_valid(const EventSequence& seq) {
  switch (validate(seq)) {
    case SequenceCheck::Ok:
      return;
    case SequenceCheck::NonMonotonic:
      fail(ErrorCode::NonMonotonic, "event times must be strictly increasing");
    case SequenceCheck::OutOfWindow:
      fail(ErrorCode::OutOfWindow,
           "event times must lie in [0, window_end) with window_end > 0");
  }
}

void require_valid(const Dataset& data) {
  if (data.sequences.empty())
    fail(ErrorCode::InvalidArgument, "dataset must contain at least one sequence");
  for (const auto& s : data.sequences) {
    if (s.window_end != data.window_end)
      fail(ErrorCode::InvalidArgument,
           "all sequences must share the dataset window");
    require_valid(s);
  }
}

InterEventTimes to_gaps(const EventSequence& seq) {
  require_valid(seq);
  InterEventTimes out;
  out.gaps.reserve(seq.times.size());
  double prev = 0.0;
  for (double t : seq.times) {
    out.gaps.push_back(t - prev);
    prev = t;
  }
  return out;
}

EventSequence from_gaps(const InterEventTimes& gaps, double window_end) {
  if (!(window_end > 0.0))
    fail(ErrorCode::InvalidArgument, "window_end must be positive");
  EventSequence out;
  out.window_end = window_end;
  double t = 0.0;
  for (double g : gaps.gaps) {
    if (!(g > 0.0))
      fail(ErrorCode::InvalidArgument, "gaps must be positive");
    t += g;
    if (t >= window_end) break;
    out.times.push_back(t);
  }
  return out;
}

std::vector<double> pooled_times(const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.total_events());
  for (const auto& s : data.sequences)
    out.insert(out.end(), s.times.begin(), s.times.end());
  return out;
}

}  // namespace tpp
