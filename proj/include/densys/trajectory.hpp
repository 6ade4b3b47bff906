#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace densys {

using State = std::vector<double>;

/// Why a vector field could not be evaluated at a point.
enum class Fault { None, OutOfDomain, Divergent };

/// Divergent outranks OutOfDomain when several evaluations fail.
inline Fault worst(Fault a, Fault b) {
  if (a == Fault::Divergent || b == Fault::Divergent) return Fault::Divergent;
  if (a == Fault::OutOfDomain || b == Fault::OutOfDomain) return Fault::OutOfDomain;
  return Fault::None;
}

inline std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::None: return "none";
    case Fault::OutOfDomain: return "out_of_domain";
    case Fault::Divergent: return "divergent";
  }
  return "?";
}

enum class EventKind { SignalSwitch, BarrierStall, DomainFault, StepLimit };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::SignalSwitch: return "SignalSwitch";
    case EventKind::BarrierStall: return "BarrierStall";
    case EventKind::DomainFault: return "DomainFault";
    case EventKind::StepLimit: return "StepLimit";
  }
  return "?";
}

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::SignalSwitch;
  std::string detail;
};

enum class Termination { Completed, BarrierStall, DomainFault, StepLimit, InvalidInitialState };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::BarrierStall: return "barrier_stall";
    case Termination::DomainFault: return "domain_fault";
    case Termination::StepLimit: return "step_limit";
    case Termination::InvalidInitialState: return "invalid_initial_state";
  }
  return "?";
}

/// Accepted integration samples. times are strictly increasing and every
/// state is finite.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Event> events;
  Termination terminated_reason = Termination::Completed;
  std::string detail;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
  const State& back() const { return states.back(); }
  double t_end() const { return times.back(); }

  bool has_event(EventKind kind) const {
    for (const auto& e : events)
      if (e.kind == kind) return true;
    return false;
  }

  /// Component `i` of every sample.
  std::vector<double> component(std::size_t i) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s[i]);
    return out;
  }
};

}  // namespace densys
