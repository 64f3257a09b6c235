#include "polykam/operator_word.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace polykam {

struct OperatorWord::Node {
  Kind kind = Kind::Leaf;
  int index = -1;
  double shift = 0.0;
  std::int64_t exponent = 1;
  ClosureConfig config;
  std::vector<OperatorWord> children;
};

OperatorWord OperatorWord::leaf(int index) {
  if (index < 0) throw Error(ErrorCode::InvalidArgument, "leaf index must be non-negative");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Leaf;
  n->index = index;
  return OperatorWord(std::move(n));
}

OperatorWord OperatorWord::compose(OperatorWord first, OperatorWord second) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Compose;
  n->children = {std::move(first), std::move(second)};
  return OperatorWord(std::move(n));
}

OperatorWord OperatorWord::min(OperatorWord a, OperatorWord b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Min;
  n->children = {std::move(a), std::move(b)};
  return OperatorWord(std::move(n));
}

OperatorWord OperatorWord::add_const(OperatorWord w, double lam) {
  if (!std::isfinite(lam)) throw Error(ErrorCode::InvalidScalar, "add_const needs a finite shift");
  auto n = std::make_shared<Node>();
  n->kind = Kind::AddConst;
  n->shift = lam;
  n->children = {std::move(w)};
  return OperatorWord(std::move(n));
}

OperatorWord OperatorWord::power(OperatorWord w, std::int64_t exponent) {
  if (exponent < 1) throw Error(ErrorCode::InvalidArgument, "power exponent must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->exponent = exponent;
  n->children = {std::move(w)};
  return OperatorWord(std::move(n));
}

OperatorWord OperatorWord::closure(OperatorWord w, ClosureConfig config) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Closure;
  n->config = config;
  n->children = {std::move(w)};
  return OperatorWord(std::move(n));
}

OperatorWord::Kind OperatorWord::kind() const { return node_->kind; }
int OperatorWord::index() const { return node_->index; }
double OperatorWord::shift() const { return node_->shift; }
std::int64_t OperatorWord::exponent() const { return node_->exponent; }
const ClosureConfig& OperatorWord::closure_config() const { return node_->config; }
const OperatorWord& OperatorWord::child(std::size_t i) const { return node_->children.at(i); }
std::size_t OperatorWord::child_count() const { return node_->children.size(); }

bool OperatorWord::is_finite_type() const {
  if (kind() == Kind::Closure) return false;
  return std::all_of(node_->children.begin(), node_->children.end(),
                     [](const OperatorWord& c) { return c.is_finite_type(); });
}

int OperatorWord::max_leaf() const {
  int m = kind() == Kind::Leaf ? index() : -1;
  for (const auto& c : node_->children) m = std::max(m, c.max_leaf());
  return m;
}

std::int64_t OperatorWord::expanded_length() const {
  switch (kind()) {
    case Kind::Leaf: return 1;
    case Kind::Compose:
    case Kind::Min: return child(0).expanded_length() + child(1).expanded_length();
    case Kind::AddConst: return child(0).expanded_length();
    case Kind::Power: return exponent() * child(0).expanded_length();
    case Kind::Closure: break;
  }
  throw Error(ErrorCode::InvalidArgument, "closure words have no finite expansion");
}

std::string OperatorWord::to_string() const {
  char buf[64];
  switch (kind()) {
    case Kind::Leaf: return "h" + std::to_string(index());
    case Kind::Compose: return "compose(" + child(0).to_string() + "," + child(1).to_string() + ")";
    case Kind::Min: return "min(" + child(0).to_string() + "," + child(1).to_string() + ")";
    case Kind::AddConst:
      std::snprintf(buf, sizeof buf, "%.17g", shift());
      return "add(" + child(0).to_string() + "," + buf + ")";
    case Kind::Power: return "pow(" + child(0).to_string() + "," + std::to_string(exponent()) + ")";
    case Kind::Closure: {
      const ClosureConfig& cfg = closure_config();
      if (cfg.transient == 0 && cfg.window == 0) return "closure(" + child(0).to_string() + ")";
      return "closure(" + child(0).to_string() + "," + std::to_string(cfg.transient) + "," +
             std::to_string(cfg.window) + ")";
    }
  }
  return {};
}

// ----------------------------------------------------------------------- parse

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  OperatorWord word() {
    skip();
    if (peek() == 'h') {
      ++pos_;
      return OperatorWord::leaf(static_cast<int>(integer()));
    }
    const std::string name = ident();
    expect('(');
    OperatorWord first = word();
    OperatorWord out = first;
    if (name == "compose" || name == "min") {
      expect(',');
      OperatorWord second = word();
      out = name == "compose" ? OperatorWord::compose(first, second) : OperatorWord::min(first, second);
    } else if (name == "add") {
      expect(',');
      out = OperatorWord::add_const(first, real());
    } else if (name == "pow") {
      expect(',');
      out = OperatorWord::power(first, integer());
    } else if (name == "closure") {
      ClosureConfig cfg;
      skip();
      if (peek() == ',') {
        ++pos_;
        cfg.transient = integer();
        expect(',');
        cfg.window = integer();
      }
      out = OperatorWord::closure(first, cfg);
    } else {
      fail("unknown node '" + name + "'");
    }
    expect(')');
    return out;
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::InvalidArgument, "word '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip();
    std::size_t b = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (b == pos_) fail("expected a node name");
    return s_.substr(b, pos_ - b);
  }
  std::int64_t integer() {
    skip();
    const char* b = s_.c_str() + pos_;
    char* e = nullptr;
    long long v = std::strtoll(b, &e, 10);
    if (e == b) fail("expected an integer");
    pos_ += static_cast<std::size_t>(e - b);
    return v;
  }
  double real() {
    skip();
    const char* b = s_.c_str() + pos_;
    char* e = nullptr;
    double v = std::strtod(b, &e);
    if (e == b) fail("expected a number");
    pos_ += static_cast<std::size_t>(e - b);
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

OperatorWord OperatorWord::parse(const std::string& text) {
  Parser p(text);
  OperatorWord w = p.word();
  p.finish();
  return w;
}

// ------------------------------------------------------------------ evaluation

PeierlsClosure closure_with_retries(const CostMatrix& a, const ClosureConfig& config, int retries) {
  ClosureConfig cfg = config;
  if (cfg.transient == 0) cfg.transient = static_cast<std::int64_t>(4 * a.size());
  for (int attempt = 0;; ++attempt) {
    try {
      return peierls_closure(a, cfg);
    } catch (const NotStabilized&) {
      if (attempt >= retries) throw;
      cfg.transient *= 2;
    }
  }
}

namespace {

void check_leaf(int index, std::size_t count) {
  if (index < 0 || static_cast<std::size_t>(index) >= count) {
    throw Error(ErrorCode::InvalidArgument,
                "leaf h" + std::to_string(index) + " outside a family of " + std::to_string(count));
  }
}

CostMatrix eval(const OperatorWord& w, std::span<const CostMatrix> costs, int retries, const std::string& path,
                std::vector<ClosureRecord>& closures) {
  using K = OperatorWord::Kind;
  switch (w.kind()) {
    case K::Leaf:
      check_leaf(w.index(), costs.size());
      return costs[static_cast<std::size_t>(w.index())];
    case K::Compose:
      return compose_costs(eval(w.child(0), costs, retries, path + "/0", closures),
                           eval(w.child(1), costs, retries, path + "/1", closures));
    case K::Min:
      return min_costs(eval(w.child(0), costs, retries, path + "/0", closures),
                       eval(w.child(1), costs, retries, path + "/1", closures));
    case K::AddConst: return add_constant(eval(w.child(0), costs, retries, path + "/0", closures), w.shift());
    case K::Power: return tropical_power(eval(w.child(0), costs, retries, path + "/0", closures), w.exponent());
    case K::Closure: {
      CostMatrix inner = eval(w.child(0), costs, retries, path + "/0", closures);
      try {
        PeierlsClosure pc = closure_with_retries(inner, w.closure_config(), retries);
        CostMatrix h = pc.h;
        closures.push_back({path, std::move(pc)});
        return h;
      } catch (const NotStabilized& e) {
        throw NotStabilized("at node " + path + " " + w.to_string() + ": " + e.what(), e.partial());
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument, "bad word node");
}

OperatorWord reduce(const OperatorWord& w, std::span<const CostMatrix> costs, int retries) {
  using K = OperatorWord::Kind;
  switch (w.kind()) {
    case K::Leaf: return w;
    case K::Compose: return OperatorWord::compose(reduce(w.child(0), costs, retries), reduce(w.child(1), costs, retries));
    case K::Min: return OperatorWord::min(reduce(w.child(0), costs, retries), reduce(w.child(1), costs, retries));
    case K::AddConst: return OperatorWord::add_const(reduce(w.child(0), costs, retries), w.shift());
    case K::Power: return OperatorWord::power(reduce(w.child(0), costs, retries), w.exponent());
    case K::Closure: {
      OperatorWord inner = reduce(w.child(0), costs, retries);
      const CostMatrix a = evaluate_word(inner, costs);
      const PeierlsClosure pc = closure_with_retries(a, w.closure_config(), retries);
      const std::int64_t p = pc.diagnostics.best_power;
      return OperatorWord::add_const(OperatorWord::power(inner, p), static_cast<double>(p) * pc.alpha);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "bad word node");
}

}  // namespace

WordValue evaluate_word_detailed(const OperatorWord& word, std::span<const CostMatrix> costs, int closure_retries) {
  WordValue out;
  out.cost = eval(word, costs, closure_retries, "", out.closures);
  return out;
}

CostMatrix evaluate_word(const OperatorWord& word, std::span<const CostMatrix> costs) {
  std::vector<ClosureRecord> unused;
  return eval(word, costs, 2, "", unused);
}

OperatorWord finite_reduction(const OperatorWord& word, std::span<const CostMatrix> costs, int closure_retries) {
  return reduce(word, costs, closure_retries);
}

// ------------------------------------------------------------------ application

GridFunction apply_word(const OperatorWord& word, std::span<const CostMatrix> costs, const GridFunction& u,
                        ApplyTrace* trace) {
  using K = OperatorWord::Kind;
  switch (word.kind()) {
    case K::Leaf: {
      check_leaf(word.index(), costs.size());
      const CostMatrix& a = costs[static_cast<std::size_t>(word.index())];
      if (!trace) return lax_oleinik(a, u);
      trace->kind = ApplyTrace::Kind::Leaf;
      trace->generator = word.index();
      GridFunction out = lax_oleinik(a, u, trace->argmin);
      trace->lift.clear();
      if (a.has_displacement()) {
        trace->lift.resize(a.size());
        for (std::size_t x = 0; x < a.size(); ++x) {
          trace->lift[x] = a.displacement(static_cast<std::size_t>(trace->argmin[x]), x);
        }
      }
      return out;
    }
    case K::Compose:
    case K::Power: {
      const bool pow = word.kind() == K::Power;
      const std::size_t count = pow ? static_cast<std::size_t>(word.exponent()) : 2;
      if (trace) {
        trace->kind = ApplyTrace::Kind::Sequence;
        trace->children.assign(count, {});
      }
      GridFunction v = u;
      for (std::size_t i = 0; i < count; ++i) {
        v = apply_word(word.child(pow ? 0 : i), costs, v, trace ? &trace->children[i] : nullptr);
      }
      return v;
    }
    case K::Min: {
      ApplyTrace* t0 = nullptr;
      ApplyTrace* t1 = nullptr;
      if (trace) {
        trace->kind = ApplyTrace::Kind::Min;
        trace->children.assign(2, {});
        t0 = &trace->children[0];
        t1 = &trace->children[1];
      }
      GridFunction a = apply_word(word.child(0), costs, u, t0);
      const GridFunction b = apply_word(word.child(1), costs, u, t1);
      if (trace) trace->choice.assign(a.size(), 0);
      for (std::size_t x = 0; x < a.size(); ++x) {
        if (b[x] < a[x]) {
          a[x] = b[x];
          if (trace) trace->choice[x] = 1;
        }
      }
      return a;
    }
    case K::AddConst: {
      if (trace) {
        trace->kind = ApplyTrace::Kind::Shift;
        trace->children.assign(1, {});
      }
      return apply_word(word.child(0), costs, u, trace ? &trace->children[0] : nullptr) + word.shift();
    }
    case K::Closure: break;
  }
  throw Error(ErrorCode::InvalidArgument, "apply_word needs a finite-type word; reduce closures first");
}

namespace {

void walk_back(const ApplyTrace& t, int& x, std::vector<Transition>& reversed) {
  switch (t.kind) {
    case ApplyTrace::Kind::Leaf: {
      if (t.argmin.empty() || x < 0 || static_cast<std::size_t>(x) >= t.argmin.size()) {
        throw Error(ErrorCode::NotBacktrackable, "argmin table missing for generator " + std::to_string(t.generator));
      }
      const std::size_t xs = static_cast<std::size_t>(x);
      const int y = t.argmin[xs];
      const bool lifted = !t.lift.empty();
      reversed.push_back({t.generator, y, x, lifted ? t.lift[xs] : 0, lifted});
      x = y;
      return;
    }
    case ApplyTrace::Kind::Sequence:
      for (auto it = t.children.rbegin(); it != t.children.rend(); ++it) walk_back(*it, x, reversed);
      return;
    case ApplyTrace::Kind::Min:
      if (t.children.size() != 2 || t.choice.empty()) throw Error(ErrorCode::NotBacktrackable, "min branch choices missing");
      walk_back(t.children[t.choice[static_cast<std::size_t>(x)]], x, reversed);
      return;
    case ApplyTrace::Kind::Shift:
      if (t.children.size() != 1) throw Error(ErrorCode::NotBacktrackable, "shift node without child");
      walk_back(t.children[0], x, reversed);
      return;
  }
}

}  // namespace

std::vector<Transition> backtrack(const ApplyTrace& trace, int x) {
  std::vector<Transition> reversed;
  walk_back(trace, x, reversed);
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

}  // namespace polykam
