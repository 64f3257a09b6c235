#pragma once

// Expressions in the semigroup generated by a family of costs: leaves are
// generator indices, nodes are composition, minimum, constant shift, finite
// power and Peierls closure.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "polykam/tropical.hpp"

namespace polykam {

class OperatorWord {
 public:
  enum class Kind { Leaf, Compose, Min, AddConst, Power, Closure };

  static OperatorWord leaf(int index);
  // `first` is applied first: T_{compose(a, b)} = T_b o T_a.
  static OperatorWord compose(OperatorWord first, OperatorWord second);
  static OperatorWord min(OperatorWord a, OperatorWord b);
  static OperatorWord add_const(OperatorWord w, double lam);
  // w composed with itself `exponent` times.
  static OperatorWord power(OperatorWord w, std::int64_t exponent);
  static OperatorWord closure(OperatorWord w, ClosureConfig config = {});

  // Parses the text form produced by to_string(), e.g.
  // "closure(compose(h0,h1))", "min(h0,add(h1,0.5))", "pow(h0,8)".
  static OperatorWord parse(const std::string& text);

  Kind kind() const;
  int index() const;
  double shift() const;
  std::int64_t exponent() const;
  const ClosureConfig& closure_config() const;
  const OperatorWord& child(std::size_t i) const;
  std::size_t child_count() const;

  bool is_finite_type() const;
  // Largest leaf index, -1 when none.
  int max_leaf() const;
  // Number of elementary generator applications when expanded (finite type).
  std::int64_t expanded_length() const;
  std::string to_string() const;

  bool operator==(const OperatorWord& other) const { return to_string() == other.to_string(); }

 private:
  struct Node;
  explicit OperatorWord(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Closure data collected during evaluation, one entry per closure node in
// depth-first order.
struct ClosureRecord {
  std::string path;
  PeierlsClosure closure;
};

struct WordValue {
  CostMatrix cost;
  std::vector<ClosureRecord> closures;
};

// Recursive evaluation with tropical operations. A closure node whose
// windowed minimum does not settle is retried with its transient doubled up
// to `closure_retries` times before NotStabilized propagates with the path.
WordValue evaluate_word_detailed(const OperatorWord& word, std::span<const CostMatrix> costs, int closure_retries = 2);
CostMatrix evaluate_word(const OperatorWord& word, std::span<const CostMatrix> costs);

// Replaces every closure(w) by add_const(power(finite(w), P), P alpha) with P
// the closure's best power and alpha its eigenvalue at these costs.
OperatorWord finite_reduction(const OperatorWord& word, std::span<const CostMatrix> costs, int closure_retries = 2);

// Peierls closure with the transient doubled on NotStabilized.
PeierlsClosure closure_with_retries(const CostMatrix& a, const ClosureConfig& config, int retries);

// Record of one application of a finite word to a function.
struct ApplyTrace {
  enum class Kind { Leaf, Sequence, Min, Shift };
  Kind kind = Kind::Leaf;
  int generator = -1;         // leaf
  std::vector<int> argmin;    // leaf: minimizing y for every x
  std::vector<std::int32_t> lift;  // leaf: displacement(argmin[x], x) in grid steps, if known
  std::vector<std::uint8_t> choice;  // min: branch attaining each x
  std::vector<ApplyTrace> children;
};

// T_word u (not normalized). Closure nodes throw InvalidArgument; reduce the
// word first.
GridFunction apply_word(const OperatorWord& word, std::span<const CostMatrix> costs, const GridFunction& u,
                        ApplyTrace* trace = nullptr);

struct Transition {
  int generator = -1;
  int from = 0;
  int to = 0;
  std::int32_t lift = 0;  // lifted displacement in grid steps
  bool has_lift = false;
};

// Walks `trace` backward from final index x; transitions come out in forward
// order. Throws NotBacktrackable on a missing table.
std::vector<Transition> backtrack(const ApplyTrace& trace, int x);

}  // namespace polykam
