#include "szlab/weight_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <type_traits>

#include "szlab/errors.hpp"

namespace szlab {

struct WeightExpr::Node {
  enum class Kind { number, var_x, var_y, var_r2, neg, add, sub, mul, div, pow };
  Kind kind = Kind::number;
  double number = 0.0;
  int index = 0;     // coordinate index for var_x / var_y, exponent for pow
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = WeightExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view s, int m) : s_(s), m_(m) {}

  NodePtr parse() {
    skip();
    if (pos_ == s_.size()) throw WeightParseError("empty weight expression", pos_);
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw WeightParseError("unexpected character", pos_);
    return e;
  }

  bool has_variables() const { return vars_; }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_node(Node::Kind::add, lhs, term());
      else if (accept('-')) lhs = make_node(Node::Kind::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_node(Node::Kind::mul, lhs, unary());
      else if (accept('/')) lhs = make_node(Node::Kind::div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Node::Kind::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      bool negative = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        negative = true;
        ++pos_;
      }
      std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == digits) throw WeightParseError("expected integer exponent", start);
      int k = std::atoi(std::string(s_.substr(digits, pos_ - digits)).c_str());
      if (k > 64) throw WeightParseError("exponent too large", start);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::pow;
      n->lhs = base;
      n->index = negative ? -k : k;
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw WeightParseError("unexpected end of expression", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw WeightParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string tail(s_.substr(pos_));
      char* end = nullptr;
      double v = std::strtod(tail.c_str(), &end);
      if (end == tail.c_str()) throw WeightParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - tail.c_str());
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::number;
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string_view id = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Node>();
      if (id == "r2") {
        n->kind = Node::Kind::var_r2;
      } else if (id.size() == 2 && (id[0] == 'x' || id[0] == 'y') && (id[1] == '1' || id[1] == '2')) {
        int j = id[1] - '1';
        if (j >= m_) throw WeightParseError("variable '" + std::string(id) + "' exceeds dimension", start);
        n->kind = id[0] == 'x' ? Node::Kind::var_x : Node::Kind::var_y;
        n->index = j;
      } else {
        throw WeightParseError("unknown identifier '" + std::string(id) + "'", start);
      }
      vars_ = true;
      return n;
    }
    throw WeightParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view s_;
  int m_;
  std::size_t pos_ = 0;
  bool vars_ = false;
};

template <class T, class Vars>
T evaluate(const Node& n, const Vars& vars) {
  switch (n.kind) {
    case Node::Kind::number: return T(n.number);
    case Node::Kind::var_x: return vars.x(n.index);
    case Node::Kind::var_y: return vars.y(n.index);
    case Node::Kind::var_r2: return vars.r2();
    case Node::Kind::neg: return -evaluate<T>(*n.lhs, vars);
    case Node::Kind::add: return evaluate<T>(*n.lhs, vars) + evaluate<T>(*n.rhs, vars);
    case Node::Kind::sub: return evaluate<T>(*n.lhs, vars) - evaluate<T>(*n.rhs, vars);
    case Node::Kind::mul: return evaluate<T>(*n.lhs, vars) * evaluate<T>(*n.rhs, vars);
    case Node::Kind::div: return evaluate<T>(*n.lhs, vars) / evaluate<T>(*n.rhs, vars);
    case Node::Kind::pow: {
      T base = evaluate<T>(*n.lhs, vars);
      if constexpr (std::is_same_v<T, double>) return std::pow(base, n.index);
      else return ipow(base, n.index);
    }
  }
  return T(0.0);
}

struct DoubleVars {
  std::span<const std::complex<double>> w;
  double x(int j) const { return w[j].real(); }
  double y(int j) const { return w[j].imag(); }
  double r2() const {
    double s = 0.0;
    for (auto c : w) s += std::norm(c);
    return s;
  }
};

struct JetVars {
  std::span<const CJet> w;
  Jet2 x(int j) const { return w[j].re; }
  Jet2 y(int j) const { return w[j].im; }
  Jet2 r2() const {
    Jet2 s(0.0);
    for (const auto& c : w) s = s + norm2(c);
    return s;
  }
};

}  // namespace

WeightExpr::WeightExpr() : text_("0") {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::number;
  root_ = n;
}

WeightExpr WeightExpr::parse(std::string_view text, int m) {
  Parser p(text, m);
  WeightExpr e;
  e.root_ = p.parse();
  e.text_ = std::string(text);
  e.zero_ = !p.has_variables() && evaluate<double>(*e.root_, DoubleVars{}) == 0.0;
  return e;
}

double WeightExpr::value(std::span<const std::complex<double>> w) const {
  if (zero_) return 0.0;
  return evaluate<double>(*root_, DoubleVars{w});
}

Jet2 WeightExpr::jet(std::span<const CJet> w) const {
  if (zero_) return Jet2(0.0);
  return evaluate<Jet2>(*root_, JetVars{w});
}

std::vector<std::complex<double>> WeightExpr::gradient(
    std::span<const std::complex<double>> w) const {
  std::vector<std::complex<double>> out(w.size());
  if (zero_) return out;
  std::vector<CJet> jw(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    jw[j] = CJet(Jet2::variable(w[j].real(), 2 * static_cast<int>(j)),
                 Jet2::variable(w[j].imag(), 2 * static_cast<int>(j) + 1));
  Jet2 f = jet(jw);
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = wirtinger_dz(f, static_cast<int>(j));
  return out;
}

}  // namespace szlab
