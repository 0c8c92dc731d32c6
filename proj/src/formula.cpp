#include "treebf/formula.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <sstream>

namespace treebf {

// ---------------------------------------------------------------------------
// Interner

namespace {

struct Interner {
  std::mutex mu;
  std::unordered_map<std::string, VarId> ids;
  std::deque<std::string> names; // stable references
  Interner() {
    ids.emplace("r", kRootVar);
    names.emplace_back("r");
  }
};

Interner& interner() {
  static Interner inst;
  return inst;
}

} // namespace

VarId intern(std::string_view name) {
  if (name.empty())
    throw FormulaError("empty variable name");
  auto& in = interner();
  std::lock_guard lock(in.mu);
  std::string key(name);
  if (auto it = in.ids.find(key); it != in.ids.end())
    return it->second;
  const auto id = static_cast<VarId>(in.names.size());
  in.names.push_back(key);
  in.ids.emplace(std::move(key), id);
  return id;
}

const std::string& var_name(VarId id) {
  auto& in = interner();
  std::lock_guard lock(in.mu);
  if (id < 0 || static_cast<std::size_t>(id) >= in.names.size())
    throw FormulaError("unknown variable id " + std::to_string(id));
  return in.names[static_cast<std::size_t>(id)];
}

std::vector<VarId> intern_all(std::span<const std::string> names) {
  std::vector<VarId> out;
  out.reserve(names.size());
  for (const auto& n : names)
    out.push_back(intern(n));
  return out;
}

std::vector<VarId> numbered_vars(std::string_view prefix, std::size_t n) {
  std::vector<VarId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(intern(std::string(prefix) + std::to_string(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Nodes

Formula::Formula(Token, Kind kind, bool negated, bool finitary, std::vector<VarId> vars,
                 std::vector<FormulaPtr> children, std::uint64_t color, int index, int bound)
    : kind_(kind), negated_(negated), finitary_(finitary), vars_(std::move(vars)),
      children_(std::move(children)), color_(color), index_(index), bound_(bound) {
  std::vector<VarId> fv;
  switch (kind_) {
  case Kind::equal:
  case Kind::parent:
  case Kind::root:
  case Kind::color:
  case Kind::eta:
  case Kind::neta:
    fv = vars_;
    break;
  case Kind::conj:
  case Kind::disj:
    for (const auto& c : children_) {
      fv.insert(fv.end(), c->free_vars().begin(), c->free_vars().end());
      tree_size_ += c->tree_size();
    }
    break;
  case Kind::exists:
  case Kind::forall:
    for (VarId v : children_[0]->free_vars())
      if (std::find(vars_.begin(), vars_.end(), v) == vars_.end())
        fv.push_back(v);
    tree_size_ += children_[0]->tree_size();
    break;
  }
  std::sort(fv.begin(), fv.end());
  fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
  free_ = std::move(fv);

  if (is_atom())
    qf_ = true;
  else if ((kind_ == Kind::conj || kind_ == Kind::disj) && finitary_)
    qf_ = std::all_of(children_.begin(), children_.end(), [](const FormulaPtr& c) { return c->quantifier_free(); });
  else
    qf_ = false;
}

namespace {

FormulaPtr make(Kind kind, bool negated, bool finitary, std::vector<VarId> vars,
                std::vector<FormulaPtr> children = {}, std::uint64_t color = 0, int index = 0,
                int bound = 0) {
  return std::make_shared<const Formula>(Formula::Token{}, kind, negated, finitary, std::move(vars),
                                         std::move(children), color, index, bound);
}

void check_block(const std::vector<VarId>& block) {
  for (VarId v : block)
    if (v == kRootVar)
      throw FormulaError("the root constant r cannot be quantified");
}

void check_schema(int i, const std::vector<VarId>& tuple, int bound) {
  if (i < 0 || static_cast<std::size_t>(i) >= tuple.size())
    throw FormulaError("schema index " + std::to_string(i) + " out of range for a tuple of length " +
                       std::to_string(tuple.size()));
  if (bound < 1)
    throw FormulaError("schema bound must be at least 1");
}

} // namespace

FormulaPtr eq(VarId x, VarId y, bool negated) { return make(Kind::equal, negated, true, {x, y}); }
FormulaPtr parent_of(VarId x, VarId y, bool negated) { return make(Kind::parent, negated, true, {x, y}); }
FormulaPtr is_root(VarId x, bool negated) { return make(Kind::root, negated, true, {x}); }
FormulaPtr has_color(std::uint64_t k, VarId x, bool negated) {
  return make(Kind::color, negated, true, {x}, {}, k);
}

FormulaPtr conj(std::vector<FormulaPtr> parts, bool finitary) {
  return make(Kind::conj, false, finitary, {}, std::move(parts));
}
FormulaPtr disj(std::vector<FormulaPtr> parts, bool finitary) {
  return make(Kind::disj, false, finitary, {}, std::move(parts));
}

FormulaPtr exists(std::vector<VarId> block, FormulaPtr body) {
  check_block(block);
  return make(Kind::exists, false, false, std::move(block), {std::move(body)});
}
FormulaPtr forall(std::vector<VarId> block, FormulaPtr body) {
  check_block(block);
  return make(Kind::forall, false, false, std::move(block), {std::move(body)});
}

FormulaPtr eta(int i, VarId x, std::vector<VarId> tuple, int bound) {
  check_schema(i, tuple, bound);
  tuple.insert(tuple.begin(), x);
  return make(Kind::eta, false, false, std::move(tuple), {}, 0, i, bound);
}
FormulaPtr neta(int i, VarId x, std::vector<VarId> tuple, int bound) {
  check_schema(i, tuple, bound);
  tuple.insert(tuple.begin(), x);
  return make(Kind::neta, false, false, std::move(tuple), {}, 0, i, bound);
}

namespace {

struct Dualizer {
  std::unordered_map<const Formula*, FormulaPtr> memo;

  FormulaPtr go(const FormulaPtr& f) {
    if (auto it = memo.find(f.get()); it != memo.end())
      return it->second;
    FormulaPtr out = rewrite(f);
    memo.emplace(f.get(), out);
    return out;
  }

  FormulaPtr rewrite(const FormulaPtr& f) {
    switch (f->kind()) {
    case Kind::equal:
    case Kind::parent:
    case Kind::root:
    case Kind::color:
      return make(f->kind(), !f->negated(), true, f->vars(), {}, f->color());
    case Kind::conj:
    case Kind::disj: {
      std::vector<FormulaPtr> parts;
      parts.reserve(f->children().size());
      for (const auto& c : f->children())
        parts.push_back(go(c));
      return make(f->kind() == Kind::conj ? Kind::disj : Kind::conj, false, f->finitary(), {}, std::move(parts));
    }
    case Kind::exists:
      return forall(f->vars(), go(f->children()[0]));
    case Kind::forall:
      return exists(f->vars(), go(f->children()[0]));
    case Kind::eta:
      return make(Kind::neta, false, false, f->vars(), {}, 0, f->index(), f->bound());
    case Kind::neta:
      return make(Kind::eta, false, false, f->vars(), {}, 0, f->index(), f->bound());
    }
    throw FormulaError("unreachable");
  }
};

struct Substituter {
  VarId from, to;
  std::unordered_map<const Formula*, FormulaPtr> memo;

  FormulaPtr go(const FormulaPtr& f) {
    if (!std::binary_search(f->free_vars().begin(), f->free_vars().end(), from))
      return f;
    if (auto it = memo.find(f.get()); it != memo.end())
      return it->second;
    FormulaPtr out = rewrite(f);
    memo.emplace(f.get(), out);
    return out;
  }

  FormulaPtr rewrite(const FormulaPtr& f) {
    switch (f->kind()) {
    case Kind::equal:
    case Kind::parent:
    case Kind::root:
    case Kind::color:
    case Kind::eta:
    case Kind::neta: {
      std::vector<VarId> vars = f->vars();
      std::replace(vars.begin(), vars.end(), from, to);
      return make(f->kind(), f->negated(), f->finitary(), std::move(vars), {}, f->color(), f->index(), f->bound());
    }
    case Kind::conj:
    case Kind::disj: {
      std::vector<FormulaPtr> parts;
      parts.reserve(f->children().size());
      for (const auto& c : f->children())
        parts.push_back(go(c));
      return make(f->kind(), false, f->finitary(), {}, std::move(parts));
    }
    case Kind::exists:
    case Kind::forall: {
      if (std::find(f->vars().begin(), f->vars().end(), to) != f->vars().end())
        throw FormulaError("substitution of " + var_name(from) + " by " + var_name(to) + " would be captured");
      return make(f->kind(), false, false, f->vars(), {go(f->children()[0])});
    }
    }
    throw FormulaError("unreachable");
  }
};

} // namespace

FormulaPtr dual(const FormulaPtr& f) { return Dualizer{}.go(f); }

FormulaPtr substitute(const FormulaPtr& f, VarId from, VarId to) {
  return Substituter{from, to, {}}.go(f);
}

// ---------------------------------------------------------------------------
// Text

namespace {

class FormulaParser {
public:
  explicit FormulaParser(std::string_view s) : s_(s) {}

  FormulaPtr parse() {
    auto f = formula();
    skip_ws();
    if (pos_ != s_.size())
      fail("trailing input");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormulaError("formula parse error: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size())
      fail(std::string("expected '") + c + "' but input ended");
    if (s_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  std::string symbol() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '#')
        break;
      ++pos_;
    }
    if (start == pos_)
      fail("expected a symbol");
    return std::string(s_.substr(start, pos_ - start));
  }

  long long number() {
    const std::size_t at = pos_;
    const auto sym = symbol();
    try {
      std::size_t used = 0;
      const long long v = std::stoll(sym, &used);
      if (used != sym.size())
        throw std::invalid_argument(sym);
      return v;
    } catch (const std::exception&) {
      pos_ = at;
      fail("expected a number, got '" + sym + "'");
    }
  }

  VarId var() { return intern(symbol()); }

  std::vector<VarId> var_list() {
    expect('(');
    std::vector<VarId> out;
    while (!peek(')'))
      out.push_back(var());
    expect(')');
    return out;
  }

  FormulaPtr atom(const std::string& head, bool negated) {
    if (head == "=") {
      const VarId x = var();
      const VarId y = var();
      return eq(x, y, negated);
    }
    if (head == "parent") {
      const VarId x = var();
      const VarId y = var();
      return parent_of(x, y, negated);
    }
    if (head == "root")
      return is_root(var(), negated);
    if (head == "color") {
      const long long k = number();
      if (k < 0)
        fail("negative color");
      return has_color(static_cast<std::uint64_t>(k), var(), negated);
    }
    return nullptr;
  }

  FormulaPtr formula() {
    expect('(');
    const std::size_t head_at = pos_;
    const std::string head = symbol();
    FormulaPtr out;
    if ((out = atom(head, false))) {
    } else if (head == "not") {
      expect('(');
      const std::string inner = symbol();
      out = atom(inner, true);
      if (!out)
        fail("negation applies only to atoms (formulas must be in negation normal form)");
      expect(')');
    } else if (head == "and" || head == "or" || head == "fand" || head == "for") {
      std::vector<FormulaPtr> parts;
      while (!peek(')'))
        parts.push_back(formula());
      const bool finitary = head[0] == 'f';
      out = (head == "and" || head == "fand") ? conj(std::move(parts), finitary) : disj(std::move(parts), finitary);
    } else if (head == "all" || head == "ex") {
      auto block = var_list();
      auto body = formula();
      out = head == "ex" ? exists(std::move(block), std::move(body)) : forall(std::move(block), std::move(body));
    } else if (head == "eta" || head == "neta") {
      const long long i = number();
      auto vars = var_list();
      if (vars.size() < 2)
        fail("schema needs an element variable and a nonempty tuple");
      skip_ws();
      expect('#');
      const long long bound = number();
      const VarId x = vars.front();
      vars.erase(vars.begin());
      out = head == "eta" ? eta(static_cast<int>(i), x, std::move(vars), static_cast<int>(bound))
                          : neta(static_cast<int>(i), x, std::move(vars), static_cast<int>(bound));
    } else {
      pos_ = head_at;
      fail("unknown connective '" + head + "'");
    }
    expect(')');
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void print(const Formula& f, std::string& out) {
  auto vars = [&](std::span<const VarId> vs) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i)
        out += ' ';
      out += var_name(vs[i]);
    }
  };
  if (f.is_atom()) {
    if (f.negated())
      out += "(not ";
    switch (f.kind()) {
    case Kind::equal:
      out += "(= ";
      break;
    case Kind::parent:
      out += "(parent ";
      break;
    case Kind::root:
      out += "(root ";
      break;
    default:
      out += "(color " + std::to_string(f.color()) + " ";
      break;
    }
    vars(f.vars());
    out += ')';
    if (f.negated())
      out += ')';
    return;
  }
  switch (f.kind()) {
  case Kind::conj:
  case Kind::disj:
    out += f.finitary() ? (f.kind() == Kind::conj ? "(fand" : "(for") : (f.kind() == Kind::conj ? "(and" : "(or");
    for (const auto& c : f.children()) {
      out += ' ';
      print(*c, out);
    }
    out += ')';
    return;
  case Kind::exists:
  case Kind::forall:
    out += f.kind() == Kind::exists ? "(ex (" : "(all (";
    vars(f.vars());
    out += ") ";
    print(f.body(), out);
    out += ')';
    return;
  default:
    out += f.kind() == Kind::eta ? "(eta " : "(neta ";
    out += std::to_string(f.index()) + " (";
    vars(f.vars());
    out += ") #" + std::to_string(f.bound()) + ")";
    return;
  }
}

} // namespace

FormulaPtr parse_formula(std::string_view text) { return FormulaParser(text).parse(); }

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Classification
//
// s, p: Sigma/Pi levels with finitary quantifier-free formulas at 0.
// e, a, eb, ab: levels of the E/A hierarchy and of its closures under both
// connectives. Finitary connectives are transparent (they commute with the
// block structure up to equivalence); countable ones follow the closure rules.

namespace {

struct Levels {
  int s, p, e, a, eb, ab;
};

void settle(Levels& l) {
  for (bool changed = true; changed;) {
    const Levels before = l;
    l.s = std::min(l.s, l.p + 1);
    l.p = std::min(l.p, l.s + 1);
    if (l.s <= 1)
      l.e = 1;
    if (l.p <= 1)
      l.a = 1;
    l.e = std::min({l.e, l.ab + 1, std::max(1, l.s)});
    l.a = std::min({l.a, l.eb + 1, std::max(1, l.p)});
    l.eb = std::min(l.eb, l.e);
    l.ab = std::min(l.ab, l.a);
    changed = before.s != l.s || before.p != l.p || before.e != l.e || before.a != l.a ||
              before.eb != l.eb || before.ab != l.ab;
  }
}

class Classifier {
public:
  Levels get(const Formula& f) {
    if (auto it = memo_.find(&f); it != memo_.end())
      return it->second;
    Levels l = compute(f);
    settle(l);
    memo_.emplace(&f, l);
    return l;
  }

private:
  Levels compute(const Formula& f) {
    if (f.quantifier_free())
      return {0, 0, 1, 1, 1, 1};
    switch (f.kind()) {
    case Kind::eta:
      return {1, 2, 1, 2, 1, 2};
    case Kind::neta:
      return {2, 1, 2, 1, 2, 1};
    case Kind::conj:
    case Kind::disj:
      return f.finitary() ? finitary(f) : countable(f);
    case Kind::exists:
    case Kind::forall:
      return quantifier(f);
    default:
      return {0, 0, 1, 1, 1, 1};
    }
  }

  Levels finitary(const Formula& f) {
    Levels l{0, 0, 1, 1, 1, 1};
    for (const auto& c : f.children()) {
      const Levels k = get(*c);
      l.s = std::max(l.s, k.s);
      l.p = std::max(l.p, k.p);
      l.e = std::max(l.e, k.e);
      l.a = std::max(l.a, k.a);
      l.eb = std::max(l.eb, k.eb);
      l.ab = std::max(l.ab, k.ab);
    }
    return l;
  }

  Levels countable(const Formula& f) {
    const bool is_or = f.kind() == Kind::disj;
    int head = 1, max_eb = 1, max_ab = 1;
    for (const auto& c : f.children()) {
      const Levels k = get(*c);
      head = std::max(head, is_or ? std::min(k.s, k.p + 1) : std::min(k.p, k.s + 1));
      max_eb = std::max(max_eb, k.eb);
      max_ab = std::max(max_ab, k.ab);
    }
    int head_ea = 1;
    for (const auto& c : f.children()) {
      const Levels k = get(*c);
      head_ea = std::max(head_ea, is_or ? std::min(k.e, k.ab + 1) : std::min(k.a, k.eb + 1));
    }
    Levels l{};
    if (is_or) {
      l.s = head;
      l.p = head + 1;
      l.e = head_ea;
      l.eb = std::min(l.e, max_eb);
      l.a = l.eb + 1;
      l.ab = std::min(l.a, max_ab);
    } else {
      l.p = head;
      l.s = head + 1;
      l.a = head_ea;
      l.ab = std::min(l.a, max_ab);
      l.e = l.ab + 1;
      l.eb = std::min(l.e, max_eb);
    }
    return l;
  }

  Levels quantifier(const Formula& f) {
    const Levels b = get(f.body());
    if (f.vars().empty())
      return b;
    Levels l{};
    if (f.kind() == Kind::exists) {
      l.s = std::max(1, std::min(b.s, b.p + 1));
      l.p = l.s + 1;
      l.e = std::min(b.e, b.ab + 1);
      l.eb = l.e;
      l.a = l.eb + 1;
      l.ab = l.a;
    } else {
      l.p = std::max(1, std::min(b.p, b.s + 1));
      l.s = l.p + 1;
      l.a = std::min(b.a, b.eb + 1);
      l.ab = l.a;
      l.e = l.ab + 1;
      l.eb = l.e;
    }
    return l;
  }

  std::unordered_map<const Formula*, Levels> memo_;
};

} // namespace

ComplexityTag classify(const Formula& f) {
  Classifier c;
  const Levels l = c.get(f);
  return {std::max(1, l.s), std::max(1, l.p), l.e, l.a, l.eb, l.ab};
}

std::string format_tag(const ComplexityTag& t) {
  std::ostringstream os;
  os << "sigma=" << t.sigma << " pi=" << t.pi << "\n"
     << "e=" << t.e << " a=" << t.a << " ebar=" << t.ebar << " abar=" << t.abar << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(const FiniteTree& t) : tree_(t) {}
Evaluator::Evaluator(const ColoredFiniteTree& t) : tree_(t.tree), colors_(&t.color) {}

bool Evaluator::eval(const FormulaPtr& f, const Assignment& assignment) {
  std::vector<VarId> vars;
  std::vector<NodeId> values;
  for (const auto& [name, node] : assignment) {
    vars.push_back(intern(name));
    values.push_back(node);
  }
  return eval(f, vars, values);
}

bool Evaluator::eval(const FormulaPtr& f, std::span<const VarId> vars, std::span<const NodeId> values) {
  if (vars.size() != values.size())
    throw FormulaError("assignment: variable and value counts differ");
  std::fill(env_.begin(), env_.end(), -1);
  auto bind = [&](VarId v, NodeId x) {
    if (static_cast<std::size_t>(v) >= env_.size())
      env_.resize(static_cast<std::size_t>(v) + 1, -1);
    env_[static_cast<std::size_t>(v)] = x;
  };
  bind(kRootVar, 0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] == kRootVar)
      throw FormulaError("assignment: r is the root constant and cannot be assigned");
    if (values[i] < 0 || static_cast<std::size_t>(values[i]) >= tree_.size())
      throw FormulaError("assignment: node " + std::to_string(values[i]) + " out of range for " +
                         var_name(vars[i]));
    bind(vars[i], values[i]);
  }
  for (VarId v : f->free_vars())
    if (static_cast<std::size_t>(v) >= env_.size() || env_[static_cast<std::size_t>(v)] < 0)
      throw FormulaError("unbound free variable " + var_name(v));
  if (roots_.empty() || roots_.back() != f)
    roots_.push_back(f);
  return run(*f);
}

bool Evaluator::run(const Formula& f) {
  if (f.is_atom() || f.is_schema() || f.quantifier_free())
    return eval_node(f);
  std::string key;
  const Formula* ptr = &f;
  key.append(reinterpret_cast<const char*>(&ptr), sizeof ptr);
  for (VarId v : f.free_vars()) {
    const NodeId x = env_[static_cast<std::size_t>(v)];
    key.push_back(static_cast<char>(x & 0xff));
    key.push_back(static_cast<char>((x >> 8) & 0xff));
  }
  if (auto it = memo_.find(key); it != memo_.end())
    return it->second;
  const bool r = eval_node(f);
  memo_.emplace(std::move(key), r);
  return r;
}

bool Evaluator::eval_node(const Formula& f) {
  auto val = [&](VarId v) {
    const NodeId x = static_cast<std::size_t>(v) < env_.size() ? env_[static_cast<std::size_t>(v)] : -1;
    if (x < 0)
      throw FormulaError("unbound free variable " + var_name(v));
    return x;
  };
  switch (f.kind()) {
  case Kind::equal:
    return (val(f.vars()[0]) == val(f.vars()[1])) != f.negated();
  case Kind::parent: {
    const NodeId y = val(f.vars()[1]);
    return (y != 0 && tree_.parent(y) == val(f.vars()[0])) != f.negated();
  }
  case Kind::root:
    return (val(f.vars()[0]) == 0) != f.negated();
  case Kind::color: {
    if (!colors_)
      throw FormulaError("color atom evaluated on an uncolored tree");
    const NodeId x = val(f.vars()[0]);
    return ((*colors_)[static_cast<std::size_t>(x)] == f.color()) != f.negated();
  }
  case Kind::conj:
    for (const auto& c : f.children())
      if (!run(*c))
        return false;
    return true;
  case Kind::disj:
    for (const auto& c : f.children())
      if (run(*c))
        return true;
    return false;
  case Kind::exists:
  case Kind::forall:
    return eval_block(f);
  case Kind::eta:
  case Kind::neta:
    return eval_schema(f);
  }
  throw FormulaError("unreachable");
}

// The truncation bound is raised to |T|, beyond which no path can reach, so
// the schema is decided exactly by walking up from x.
bool Evaluator::eval_schema(const Formula& f) const {
  auto val = [&](VarId v) {
    const NodeId x = static_cast<std::size_t>(v) < env_.size() ? env_[static_cast<std::size_t>(v)] : -1;
    if (x < 0)
      throw FormulaError("unbound free variable " + var_name(v));
    return x;
  };
  const auto& vs = f.vars();
  const NodeId x = val(vs[0]);
  const auto i = static_cast<std::size_t>(f.index());
  const NodeId anchor = val(vs[1 + i]);
  bool member = false;
  if (x == anchor) {
    member = true;
  } else if (tree_.depth(x) > tree_.depth(anchor)) {
    NodeId y1 = x;
    while (tree_.depth(tree_.parent(y1)) > tree_.depth(anchor))
      y1 = tree_.parent(y1);
    if (tree_.parent(y1) == anchor) {
      member = true;
      for (std::size_t j = 0; j + 1 < vs.size(); ++j)
        if (j != i && val(vs[1 + j]) == y1)
          member = false;
    }
  }
  return f.kind() == Kind::eta ? member : !member;
}

const Evaluator::PrunePlan& Evaluator::plan_for(const Formula& f) {
  if (auto it = plans_.find(&f); it != plans_.end())
    return it->second;
  PrunePlan plan;
  const Formula& body = f.body();
  const Kind connective = f.kind() == Kind::exists ? Kind::conj : Kind::disj;
  if (body.kind() == connective) {
    const auto& block = f.vars();
    for (const auto& c : body.children()) {
      if (!(c->is_atom() || c->is_schema() || c->quantifier_free()))
        continue;
      int ready = -1;
      for (VarId v : c->free_vars()) {
        for (std::size_t k = 0; k < block.size(); ++k)
          if (block[k] == v)
            ready = std::max(ready, static_cast<int>(k));
      }
      plan.checks.emplace_back(c.get(), ready);
    }
    std::stable_sort(plan.checks.begin(), plan.checks.end(),
                     [](const auto& x, const auto& y) { return x.second < y.second; });
  }
  return plans_.emplace(&f, std::move(plan)).first->second;
}

bool Evaluator::eval_block(const Formula& f) {
  const auto& block = f.vars();
  const bool is_exists = f.kind() == Kind::exists;
  if (block.empty())
    return run(f.body());
  const PrunePlan& plan = plan_for(f);
  // A check "blocks" the current branch when it is false under exists (the
  // conjunction fails) or true under forall (the disjunction succeeds).
  auto blocked_at = [&](int pos) {
    for (const auto& [g, ready] : plan.checks) {
      if (ready < pos)
        continue;
      if (ready > pos)
        break;
      if (eval_node(*g) != is_exists)
        return true;
    }
    return false;
  };

  std::vector<NodeId> saved;
  saved.reserve(block.size());
  for (VarId v : block) {
    if (static_cast<std::size_t>(v) >= env_.size())
      env_.resize(static_cast<std::size_t>(v) + 1, -1);
    saved.push_back(env_[static_cast<std::size_t>(v)]);
  }
  bool found = false; // witness under exists, counterexample under forall
  if (!blocked_at(-1)) {
    const auto n = static_cast<NodeId>(tree_.size());
    auto rec = [&](auto&& self, std::size_t k) -> void {
      for (NodeId x = 0; x < n && !found; ++x) {
        env_[static_cast<std::size_t>(block[k])] = x;
        if (blocked_at(static_cast<int>(k)))
          continue;
        if (k + 1 == block.size()) {
          if (run(f.body()) == is_exists)
            found = true;
        } else {
          self(self, k + 1);
        }
      }
    };
    rec(rec, 0);
  }
  for (std::size_t k = 0; k < block.size(); ++k)
    env_[static_cast<std::size_t>(block[k])] = saved[k];
  return is_exists ? found : !found;
}

bool eval(const FiniteTree& t, const FormulaPtr& f, const Assignment& assignment) {
  Evaluator ev(t);
  return ev.eval(f, assignment);
}

bool eval(const ColoredFiniteTree& t, const FormulaPtr& f, const Assignment& assignment) {
  Evaluator ev(t);
  return ev.eval(f, assignment);
}

// ---------------------------------------------------------------------------
// Schemas and relativization

FormulaPtr eta_formula(int i, VarId x, std::span<const VarId> tuple, int bound) {
  return eta(i, x, std::vector<VarId>(tuple.begin(), tuple.end()), bound);
}

namespace {

FormulaPtr expand_eta(const Formula& f, std::size_t model_size) {
  const auto& vs = f.vars();
  const VarId x = vs[0];
  const auto i = static_cast<std::size_t>(f.index());
  const VarId anchor = vs[1 + i];
  // Path variables must not collide with the schema's own variables.
  std::string prefix = "_y";
  auto clashes = [&](const std::string& p) {
    for (VarId v : vs)
      if (var_name(v).rfind(p, 0) == 0)
        return true;
    return false;
  };
  while (clashes(prefix))
    prefix.insert(prefix.begin(), '_');
  const int len = std::max<int>(f.bound(), static_cast<int>(model_size));
  std::vector<FormulaPtr> disjuncts;
  for (int n = 0; n <= len; ++n) {
    auto ys = numbered_vars(prefix, static_cast<std::size_t>(n) + 1);
    std::vector<FormulaPtr> parts{eq(anchor, ys[0])};
    for (int k = 1; k <= n; ++k)
      parts.push_back(parent_of(ys[static_cast<std::size_t>(k) - 1], ys[static_cast<std::size_t>(k)]));
    parts.push_back(eq(ys.back(), x));
    if (n >= 1)
      for (std::size_t j = 0; j + 1 < vs.size(); ++j)
        if (j != i)
          parts.push_back(eq(ys[1], vs[1 + j], true));
    disjuncts.push_back(exists(std::move(ys), conj(std::move(parts), true)));
  }
  return disj(std::move(disjuncts), false);
}

} // namespace

FormulaPtr expand_schemas(const FormulaPtr& f, std::size_t model_size) {
  switch (f->kind()) {
  case Kind::eta:
    return expand_eta(*f, model_size);
  case Kind::neta:
    return dual(expand_eta(*dual(f), model_size));
  case Kind::conj:
  case Kind::disj: {
    std::vector<FormulaPtr> parts;
    for (const auto& c : f->children())
      parts.push_back(expand_schemas(c, model_size));
    return f->kind() == Kind::conj ? conj(std::move(parts), f->finitary()) : disj(std::move(parts), f->finitary());
  }
  case Kind::exists:
    return exists(f->vars(), expand_schemas(f->children()[0], model_size));
  case Kind::forall:
    return forall(f->vars(), expand_schemas(f->children()[0], model_size));
  default:
    return f;
  }
}

namespace {

struct Relativizer {
  int i;
  std::vector<VarId> tuple;
  int bound;
  std::unordered_map<const Formula*, FormulaPtr> memo;

  FormulaPtr go(const FormulaPtr& f) {
    if (auto it = memo.find(f.get()); it != memo.end())
      return it->second;
    FormulaPtr out = rewrite(f);
    memo.emplace(f.get(), out);
    return out;
  }

  VarId anchor() const { return tuple[static_cast<std::size_t>(i)]; }

  FormulaPtr rewrite(const FormulaPtr& f) {
    switch (f->kind()) {
    case Kind::root: {
      // The root of the piece is its anchor.
      return eq(f->vars()[0] == kRootVar ? anchor() : f->vars()[0], anchor(), f->negated());
    }
    case Kind::equal:
    case Kind::parent:
    case Kind::color:
    case Kind::eta:
    case Kind::neta:
      return substitute(f, kRootVar, anchor());
    case Kind::conj:
    case Kind::disj: {
      std::vector<FormulaPtr> parts;
      parts.reserve(f->children().size());
      for (const auto& c : f->children())
        parts.push_back(go(c));
      return f->kind() == Kind::conj ? conj(std::move(parts), f->finitary())
                                     : disj(std::move(parts), f->finitary());
    }
    case Kind::exists:
    case Kind::forall: {
      for (VarId v : f->vars())
        if (std::find(tuple.begin(), tuple.end(), v) != tuple.end())
          throw FormulaError("relativize: variable " + var_name(v) + " is bound in the formula and used in the tuple");
      std::vector<FormulaPtr> parts;
      const bool ex = f->kind() == Kind::exists;
      for (VarId v : f->vars())
        parts.push_back(ex ? eta(i, v, tuple, bound) : neta(i, v, tuple, bound));
      parts.push_back(go(f->children()[0]));
      auto body = ex ? conj(std::move(parts), true) : disj(std::move(parts), true);
      return ex ? exists(f->vars(), std::move(body)) : forall(f->vars(), std::move(body));
    }
    }
    throw FormulaError("unreachable");
  }
};

} // namespace

FormulaPtr relativize(const FormulaPtr& f, int i, std::span<const VarId> tuple, int bound) {
  std::vector<VarId> tv(tuple.begin(), tuple.end());
  check_schema(i, tv, bound);
  for (VarId v : tv)
    if (v == kRootVar)
      throw FormulaError("relativize: r cannot be a tuple variable");
  for (VarId v : f->free_vars())
    if (v != kRootVar)
      throw FormulaError("relativize: formula must be a sentence, but " + var_name(v) + " is free");
  Relativizer r{i, std::move(tv), bound, {}};
  return r.go(f);
}

} // namespace treebf
