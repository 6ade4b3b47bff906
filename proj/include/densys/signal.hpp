#pragma once

// Piecewise-continuous time signals used as moving boundaries, references
// and switches. A Signal is an immutable expression tree; copies share nodes.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace densys {

class Signal;

namespace signal_detail {

struct ConstantNode {
  double value;
};

/// a * exp(b * t)
struct ExpNode {
  double a;
  double b;
};

/// exp(exp(t))
struct DoubleExpNode {};

/// amplitude * sin(omega * t + phase)
struct SinusoidNode {
  double amplitude;
  double omega;
  double phase;
};

enum class AtSwitch { Before, After };

/// `before` for t < t_switch, `after` for t > t_switch. The value at the
/// switch instant itself is selected by `at_switch`.
struct StepSwitchNode {
  double t_switch;
  double before;
  double after;
  AtSwitch at_switch;
};

/// Square wave. Holds `high` for duty * 2 * dwell, then `low` for the rest of
/// the 2 * dwell cycle. Closed on the left: at a switch instant the new level
/// is already active.
struct PulseTrainNode {
  double dwell;
  double high;
  double low;
  double phase;
  double duty;
};

struct SumNode {
  std::vector<Signal> terms;
};

struct ProductNode {
  std::vector<Signal> factors;
};

/// scale * inner(t) + offset
struct AffineNode {
  double scale;
  double offset;
  std::shared_ptr<const Signal> inner;
};

}  // namespace signal_detail

using signal_detail::AtSwitch;

class Signal {
 public:
  using Node = std::variant<signal_detail::ConstantNode, signal_detail::ExpNode,
                            signal_detail::DoubleExpNode, signal_detail::SinusoidNode,
                            signal_detail::StepSwitchNode, signal_detail::PulseTrainNode,
                            signal_detail::SumNode, signal_detail::ProductNode,
                            signal_detail::AffineNode>;

  Signal() : Signal(signal_detail::ConstantNode{0.0}) {}

  static Signal constant(double value) { return Signal(signal_detail::ConstantNode{value}); }
  static Signal exp(double a, double b) { return Signal(signal_detail::ExpNode{a, b}); }
  static Signal double_exp() { return Signal(signal_detail::DoubleExpNode{}); }
  static Signal sinusoid(double amplitude, double omega, double phase = 0.0) {
    return Signal(signal_detail::SinusoidNode{amplitude, omega, phase});
  }
  static Signal step_switch(double t_switch, double before, double after,
                            AtSwitch at_switch = AtSwitch::Before) {
    if (!(t_switch >= 0.0)) throw std::invalid_argument("step_switch: t_switch must be >= 0");
    return Signal(signal_detail::StepSwitchNode{t_switch, before, after, at_switch});
  }
  static Signal pulse_train(double dwell, double high = 1.0, double low = -1.0,
                            double phase = 0.0, double duty = 0.5) {
    if (!(dwell > 0.0)) throw std::invalid_argument("pulse_train: dwell must be > 0");
    if (!(duty > 0.0 && duty < 1.0)) throw std::invalid_argument("pulse_train: duty must lie in (0,1)");
    if (!(phase >= 0.0)) throw std::invalid_argument("pulse_train: phase must be >= 0");
    return Signal(signal_detail::PulseTrainNode{dwell, high, low, phase, duty});
  }
  static Signal sum(std::vector<Signal> terms) {
    if (terms.empty()) throw std::invalid_argument("sum: needs at least one term");
    return Signal(signal_detail::SumNode{std::move(terms)});
  }
  static Signal product(std::vector<Signal> factors) {
    if (factors.empty()) throw std::invalid_argument("product: needs at least one factor");
    return Signal(signal_detail::ProductNode{std::move(factors)});
  }
  Signal affine(double scale, double offset) const {
    return Signal(signal_detail::AffineNode{scale, offset, std::make_shared<const Signal>(*this)});
  }

  const Node& node() const { return *node_; }

  /// Value at t >= 0. Deterministic; see the node types for switch-instant rules.
  double operator()(double t) const {
    return std::visit([t](const auto& n) { return eval_node(n, t); }, *node_);
  }

  /// Strictly increasing discontinuity instants inside the open interval (t0, t1).
  std::vector<double> breakpoints(double t0, double t1) const {
    std::vector<double> out;
    collect(t0, t1, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void collect(double t0, double t1, std::vector<double>& out) const {
    std::visit([&](const auto& n) { collect_node(n, t0, t1, out); }, *node_);
  }

  friend Signal operator+(const Signal& a, const Signal& b) { return sum({a, b}); }
  friend Signal operator*(const Signal& a, const Signal& b) { return product({a, b}); }

 private:
  explicit Signal(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

  static double eval_node(const signal_detail::ConstantNode& n, double) { return n.value; }
  static double eval_node(const signal_detail::ExpNode& n, double t) { return n.a * std::exp(n.b * t); }
  static double eval_node(const signal_detail::DoubleExpNode&, double t) { return std::exp(std::exp(t)); }
  static double eval_node(const signal_detail::SinusoidNode& n, double t) {
    return n.amplitude * std::sin(n.omega * t + n.phase);
  }
  static double eval_node(const signal_detail::StepSwitchNode& n, double t) {
    if (t < n.t_switch) return n.before;
    if (t > n.t_switch) return n.after;
    return n.at_switch == AtSwitch::Before ? n.before : n.after;
  }
  static double eval_node(const signal_detail::PulseTrainNode& n, double t) {
    // Cycle index computed with the same arithmetic as collect_node so that
    // values switch exactly at the reported breakpoints.
    const double cycle = 2.0 * n.dwell;
    double k = std::floor((t + n.phase) / cycle);
    if (t < k * cycle - n.phase) k -= 1.0;
    if (t >= (k + 1.0) * cycle - n.phase) k += 1.0;
    const double rise = k * cycle - n.phase;
    return t < rise + n.duty * cycle ? n.high : n.low;
  }
  static double eval_node(const signal_detail::SumNode& n, double t) {
    double acc = 0.0;
    for (const auto& s : n.terms) acc += s(t);
    return acc;
  }
  static double eval_node(const signal_detail::ProductNode& n, double t) {
    double acc = 1.0;
    for (const auto& s : n.factors) acc *= s(t);
    return acc;
  }
  static double eval_node(const signal_detail::AffineNode& n, double t) {
    return n.scale * (*n.inner)(t) + n.offset;
  }

  template <class N>
  static void collect_node(const N&, double, double, std::vector<double>&) {}

  static void collect_node(const signal_detail::StepSwitchNode& n, double t0, double t1,
                           std::vector<double>& out) {
    if (n.before != n.after && n.t_switch > t0 && n.t_switch < t1) out.push_back(n.t_switch);
  }
  static void collect_node(const signal_detail::PulseTrainNode& n, double t0, double t1,
                           std::vector<double>& out) {
    if (n.high == n.low) return;
    const double cycle = 2.0 * n.dwell;
    const double high_len = n.duty * cycle;
    const double k_first = std::floor((t0 + n.phase) / cycle) - 1.0;
    for (double k = k_first;; k += 1.0) {
      const double rise = k * cycle - n.phase;
      const double fall = rise + high_len;
      if (rise >= t1) break;
      if (rise > t0 && rise < t1) out.push_back(rise);
      if (fall > t0 && fall < t1) out.push_back(fall);
    }
  }
  static void collect_node(const signal_detail::SumNode& n, double t0, double t1,
                           std::vector<double>& out) {
    for (const auto& s : n.terms) s.collect(t0, t1, out);
  }
  static void collect_node(const signal_detail::ProductNode& n, double t0, double t1,
                           std::vector<double>& out) {
    for (const auto& s : n.factors) s.collect(t0, t1, out);
  }
  static void collect_node(const signal_detail::AffineNode& n, double t0, double t1,
                           std::vector<double>& out) {
    if (n.scale != 0.0) n.inner->collect(t0, t1, out);
  }

  std::shared_ptr<const Node> node_;
};

}  // namespace densys
