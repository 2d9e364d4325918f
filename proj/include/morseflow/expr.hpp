#pragma once

// Scalar-field expressions over variables x1..xn. Parsed into an
// immutable postfix program; evaluation (plain or with derivative
// carriers) is a single linear pass with an explicit stack.
//
// Grammar:
//   expr   := ('+'|'-')? term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' signed-number)?
//   base   := number | 'x'digits | func '(' expr ')' | '(' expr ')'
//   func   in {sin, cos, exp, log, tanh}
// Whitespace is insignificant; numbers are decimal with optional exponent.
// The exponent of '^' is a literal constant, not a subexpression.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "morseflow/errors.hpp"
#include "morseflow/linalg.hpp"

namespace morseflow {

enum class Op : uint8_t {
  constant,
  variable,
  add,
  sub,
  mul,
  div,
  neg,
  pow,  // constant exponent stored in the node
  sin,
  cos,
  exp,
  log,
  tanh,
};

struct ExprNode {
  Op op;
  double value = 0.0;  // constant value or pow exponent
  int var = -1;        // 0-based variable index

  friend bool operator==(const ExprNode& a, const ExprNode& b) {
    return a.op == b.op && a.value == b.value && a.var == b.var;
  }
};

struct Expr {
  int dim = 0;
  std::vector<ExprNode> prog;  // postfix order
  int max_stack = 0;

  bool valid() const { return dim > 0 && !prog.empty(); }

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.dim == b.dim && a.prog == b.prog;
  }
};

namespace detail {

inline bool is_unary(Op op) {
  switch (op) {
    case Op::neg:
    case Op::pow:
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::log:
    case Op::tanh:
      return true;
    default:
      return false;
  }
}

inline bool is_binary(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return true;
    default:
      return false;
  }
}

enum class TokKind { number, variable, func, lparen, rparen, plus, minus, star, slash, caret, comma, end };

struct Token {
  TokKind kind;
  size_t offset;
  double number = 0.0;
  int var = -1;       // 0-based
  Op func = Op::sin;  // when kind == func
  std::string text;
};

class Lexer {
 public:
  Lexer(const std::string& src, int dim) : src_(src), dim_(dim) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokKind::end;
      tok_.text = "end of input";
      return;
    }
    char c = src_[pos_];
    switch (c) {
      case '+': tok_.kind = TokKind::plus; tok_.text = "+"; ++pos_; return;
      case '-': tok_.kind = TokKind::minus; tok_.text = "-"; ++pos_; return;
      case '*': tok_.kind = TokKind::star; tok_.text = "*"; ++pos_; return;
      case '/': tok_.kind = TokKind::slash; tok_.text = "/"; ++pos_; return;
      case '^': tok_.kind = TokKind::caret; tok_.text = "^"; ++pos_; return;
      case '(': tok_.kind = TokKind::lparen; tok_.text = "("; ++pos_; return;
      case ')': tok_.kind = TokKind::rparen; tok_.text = ")"; ++pos_; return;
      case ',': tok_.kind = TokKind::comma; tok_.text = ","; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      lex_ident();
      return;
    }
    throw SyntaxError(pos_, "a token", std::string("'") + c + "'");
  }

  void lex_number() {
    size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to something else; not part of this number
      }
    }
    tok_.kind = TokKind::number;
    tok_.text = src_.substr(start, pos_ - start);
    tok_.offset = start;
    char* endp = nullptr;
    tok_.number = std::strtod(tok_.text.c_str(), &endp);
    if (endp != tok_.text.c_str() + tok_.text.size())
      throw SyntaxError(start, "a number", "'" + tok_.text + "'");
  }

  void lex_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    tok_.offset = start;
    tok_.text = name;
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        long idx = std::strtol(name.c_str() + 1, nullptr, 10);
        if (idx < 1 || idx > dim_)
          fail(Errc::unknown_variable,
               name + " at offset " + std::to_string(start) + " (dimension is " +
                   std::to_string(dim_) + ")");
        tok_.kind = TokKind::variable;
        tok_.var = static_cast<int>(idx - 1);
        return;
      }
    }
    if (name == "sin") { tok_.kind = TokKind::func; tok_.func = Op::sin; return; }
    if (name == "cos") { tok_.kind = TokKind::func; tok_.func = Op::cos; return; }
    if (name == "exp") { tok_.kind = TokKind::func; tok_.func = Op::exp; return; }
    if (name == "log") { tok_.kind = TokKind::func; tok_.func = Op::log; return; }
    if (name == "tanh") { tok_.kind = TokKind::func; tok_.func = Op::tanh; return; }
    throw SyntaxError(start, "a number, variable, function or '('", "'" + name + "'");
  }

  const std::string& src_;
  int dim_;
  size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, int dim) : lex_(src, dim), dim_(dim) {}

  Expr parse() {
    Expr e;
    e.dim = dim_;
    parse_expr(e);
    const Token& t = lex_.peek();
    if (t.kind != TokKind::end) {
      if (t.kind == TokKind::comma)
        fail(Errc::arity, "unexpected ',' at offset " + std::to_string(t.offset) +
                              " (functions take exactly one argument)");
      throw SyntaxError(t.offset, "'+', '-', '*', '/', '^' or end of input", "'" + t.text + "'");
    }
    e.max_stack = compute_stack(e);
    return e;
  }

 private:
  void emit(Expr& e, Op op, double value = 0.0, int var = -1) {
    e.prog.push_back(ExprNode{op, value, var});
  }

  void parse_expr(Expr& e) {
    bool negate = false;
    if (lex_.peek().kind == TokKind::plus) {
      lex_.take();
    } else if (lex_.peek().kind == TokKind::minus) {
      lex_.take();
      negate = true;
    }
    parse_term(e);
    if (negate) emit(e, Op::neg);
    for (;;) {
      TokKind k = lex_.peek().kind;
      if (k == TokKind::plus) {
        lex_.take();
        parse_term(e);
        emit(e, Op::add);
      } else if (k == TokKind::minus) {
        lex_.take();
        parse_term(e);
        emit(e, Op::sub);
      } else {
        return;
      }
    }
  }

  void parse_term(Expr& e) {
    parse_factor(e);
    for (;;) {
      TokKind k = lex_.peek().kind;
      if (k == TokKind::star) {
        lex_.take();
        parse_factor(e);
        emit(e, Op::mul);
      } else if (k == TokKind::slash) {
        lex_.take();
        parse_factor(e);
        emit(e, Op::div);
      } else {
        return;
      }
    }
  }

  void parse_factor(Expr& e) {
    parse_base(e);
    if (lex_.peek().kind == TokKind::caret) {
      lex_.take();
      double sign = 1.0;
      if (lex_.peek().kind == TokKind::minus) {
        lex_.take();
        sign = -1.0;
      }
      Token t = lex_.take();
      if (t.kind != TokKind::number)
        throw SyntaxError(t.offset, "a numeric exponent", "'" + t.text + "'");
      emit(e, Op::pow, sign * t.number);
    }
  }

  void parse_base(Expr& e) {
    Token t = lex_.take();
    switch (t.kind) {
      case TokKind::number:
        emit(e, Op::constant, t.number);
        return;
      case TokKind::variable:
        emit(e, Op::variable, 0.0, t.var);
        return;
      case TokKind::func: {
        Token open = lex_.take();
        if (open.kind != TokKind::lparen)
          throw SyntaxError(open.offset, "'('", "'" + open.text + "'");
        parse_expr(e);
        Token close = lex_.take();
        if (close.kind == TokKind::comma)
          fail(Errc::arity, "'" + t.text + "' takes exactly one argument (offset " +
                                std::to_string(close.offset) + ")");
        if (close.kind != TokKind::rparen)
          throw SyntaxError(close.offset, "')'", "'" + close.text + "'");
        emit(e, t.func);
        return;
      }
      case TokKind::lparen: {
        parse_expr(e);
        Token close = lex_.take();
        if (close.kind != TokKind::rparen)
          throw SyntaxError(close.offset, "')'", "'" + close.text + "'");
        return;
      }
      default:
        throw SyntaxError(t.offset, "a number, variable, function or '('", "'" + t.text + "'");
    }
  }

  static int compute_stack(const Expr& e) {
    int depth = 0, peak = 0;
    for (const ExprNode& nd : e.prog) {
      if (nd.op == Op::constant || nd.op == Op::variable)
        ++depth;
      else if (is_binary(nd.op))
        --depth;
      // unary ops leave the depth unchanged
      if (depth <= 0 && !(nd.op == Op::constant || nd.op == Op::variable))
        fail(Errc::internal, "malformed expression program");
      peak = std::max(peak, depth);
    }
    if (depth != 1) fail(Errc::internal, "malformed expression program");
    return peak;
  }

  Lexer lex_;
  int dim_;
};

// Shortest decimal form that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

inline Expr parse_expr(const std::string& source, int dim) {
  if (dim < 1 || dim > kMaxDim)
    fail(Errc::config, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  return detail::Parser(source, dim).parse();
}

// Infix form; parses back to an equal AST for any parser-produced Expr.
inline std::string to_string(const Expr& e) {
  struct Frag {
    std::string text;
    int prec;  // 0 neg, 1 add, 2 mul, 3 pow, 4 atom
  };
  std::vector<Frag> st;
  auto wrap = [](const Frag& f, int need) {
    return f.prec >= need ? f.text : "(" + f.text + ")";
  };
  for (const ExprNode& nd : e.prog) {
    switch (nd.op) {
      case Op::constant:
        st.push_back({detail::format_double(nd.value), 4});
        break;
      case Op::variable:
        st.push_back({"x" + std::to_string(nd.var + 1), 4});
        break;
      case Op::add: {
        Frag b = st.back(); st.pop_back();
        Frag a = st.back(); st.pop_back();
        st.push_back({wrap(a, 1) + " + " + wrap(b, 2), 1});
        break;
      }
      case Op::sub: {
        Frag b = st.back(); st.pop_back();
        Frag a = st.back(); st.pop_back();
        st.push_back({wrap(a, 1) + " - " + wrap(b, 2), 1});
        break;
      }
      case Op::mul: {
        Frag b = st.back(); st.pop_back();
        Frag a = st.back(); st.pop_back();
        st.push_back({wrap(a, 2) + "*" + wrap(b, 3), 2});
        break;
      }
      case Op::div: {
        Frag b = st.back(); st.pop_back();
        Frag a = st.back(); st.pop_back();
        st.push_back({wrap(a, 2) + "/" + wrap(b, 3), 2});
        break;
      }
      case Op::neg: {
        Frag a = st.back(); st.pop_back();
        st.push_back({"-" + wrap(a, 2), 0});
        break;
      }
      case Op::pow: {
        Frag a = st.back(); st.pop_back();
        st.push_back({wrap(a, 4) + "^" + detail::format_double(nd.value), 3});
        break;
      }
      case Op::sin:
      case Op::cos:
      case Op::exp:
      case Op::log:
      case Op::tanh: {
        const char* name = nd.op == Op::sin   ? "sin"
                           : nd.op == Op::cos ? "cos"
                           : nd.op == Op::exp ? "exp"
                           : nd.op == Op::log ? "log"
                                              : "tanh";
        Frag a = st.back(); st.pop_back();
        st.push_back({std::string(name) + "(" + a.text + ")", 4});
        break;
      }
    }
  }
  return st.back().text;
}

}  // namespace morseflow
