#include "psikit/text.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace psikit {

ParseError::ParseError(Kind kind, int line, int column, const std::string& message)
    : Error((kind == Kind::Syntax ? "syntax error" : "semantic error") + std::string(" at ") +
            std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Var, Func, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int col = 1;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (c == '%' || c == '@') {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      if (j == i + 1) throw ParseError(ParseError::Kind::Syntax, line, col, "expected identifier after '" + std::string(1, c) + "'");
      t.kind = c == '%' ? Tok::Var : Tok::Func;
      t.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, t.value);
      if (ec != std::errc()) throw ParseError(ParseError::Kind::Syntax, line, col, "integer literal out of range: " + t.text);
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::string_view("(){},:?!=").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(ParseError::Kind::Syntax, line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

// Number of operands per opcode for the plain `%x = op a, b` form.
int plain_arity(Opcode op) {
  switch (op) {
    case Opcode::Const:
    case Opcode::Mov:
    case Opcode::Neg:
    case Opcode::Not:
    case Opcode::Load:
      return 1;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::CmpEq:
    case Opcode::CmpLt:
    case Opcode::CmpLe:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Store:
      return 2;
    case Opcode::Select:
      return 3;
    default:
      return -1;
  }
}

struct SourceLoc {
  int line;
  int col;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Module parse() {
    Module m;
    std::set<std::string> names;
    while (peek().kind != Tok::End) {
      Token start = peek();
      Function f = parse_function();
      if (!names.insert(f.name).second)
        throw ParseError(ParseError::Kind::Semantic, start.line, start.col, "duplicate function @" + f.name);
      m.functions.push_back(std::move(f));
    }
    return m;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, t.line, t.col, msg + (t.kind == Tok::End ? " (at end of input)" : " near '" + t.text + "'"));
  }

  bool is_punct(const Token& t, char c) const { return t.kind == Tok::Punct && t.text[0] == c; }

  void expect_punct(char c) {
    Token t = next();
    if (!is_punct(t, c)) fail(t, std::string("expected '") + c + "'");
  }

  std::string expect_var() {
    Token t = next();
    if (t.kind != Tok::Var) fail(t, "expected %register");
    return t.text;
  }

  std::string expect_ident() {
    Token t = next();
    if (t.kind != Tok::Ident) fail(t, "expected identifier");
    return t.text;
  }

  bool at_block_label() const { return peek().kind == Tok::Ident && is_punct(peek(1), ':'); }

  bool at_pred_prefix() const {
    const Token& t = peek();
    if (is_punct(t, '!')) return true;
    if (t.kind == Tok::Var && is_punct(peek(1), '?')) return true;
    if (t.kind == Tok::Int && t.value == 1 && is_punct(peek(1), '?')) return true;
    return false;
  }

  PredRef parse_pred() {
    Token t = peek();
    if (t.kind == Tok::Int) {
      next();
      if (t.value != 1) fail(t, "only the literal 1 is a predicate");
      return PredRef::always();
    }
    bool neg = false;
    if (is_punct(t, '!')) {
      next();
      neg = true;
    }
    return PredRef::of(expect_var(), neg);
  }

  Operand parse_operand() {
    Token t = next();
    if (t.kind == Tok::Var) return Operand::var(t.text);
    if (t.kind == Tok::Int) return Operand::immediate(t.value);
    fail(t, "expected %register or integer operand");
  }

  Function parse_function() {
    Token kw = next();
    if (kw.kind != Tok::Ident || kw.text != "func") fail(kw, "expected 'func'");
    Token name = next();
    if (name.kind != Tok::Func) fail(name, "expected @name");
    Function f;
    f.name = name.text;
    expect_punct('(');
    if (!is_punct(peek(), ')')) {
      for (;;) {
        Param p;
        p.name = expect_var();
        if (is_punct(peek(), ':')) {
          next();
          Token k = next();
          if (k.kind != Tok::Ident || k.text != "guard") fail(k, "expected 'guard'");
          p.guard = true;
        }
        f.params.push_back(std::move(p));
        if (!is_punct(peek(), ',')) break;
        next();
      }
    }
    expect_punct(')');
    expect_punct('{');
    std::map<std::string, SourceLoc> labels;
    while (!is_punct(peek(), '}')) {
      if (!at_block_label()) fail(peek(), "expected block label");
      Token label = next();
      next();  // ':'
      if (labels.count(label.text))
        throw ParseError(ParseError::Kind::Semantic, label.line, label.col, "duplicate block " + label.text);
      labels[label.text] = {label.line, label.col};
      Block b;
      b.label = label.text;
      while (!is_punct(peek(), '}') && !at_block_label()) {
        if (peek().kind == Tok::End) fail(peek(), "unterminated function");
        Token start = peek();
        b.instrs.push_back(parse_line());
        locs_.push_back({start.line, start.col});
      }
      f.blocks.push_back(std::move(b));
    }
    expect_punct('}');
    if (f.blocks.empty()) fail(peek(), "function @" + f.name + " has no blocks");
    check_function(f, labels);
    locs_.clear();
    return f;
  }

  Instr parse_line() {
    PredRef guard;
    if (at_pred_prefix()) {
      guard = parse_pred();
      expect_punct('?');
    }
    Token t = peek();
    if (t.kind == Tok::Ident) {
      next();
      Instr in;
      in.guard = guard;
      if (t.text == "br") {
        in.op = Opcode::Br;
        in.operands.push_back(Operand::var(expect_var()));
        expect_punct(',');
        in.operands.push_back(Operand::label(expect_ident()));
        expect_punct(',');
        in.operands.push_back(Operand::label(expect_ident()));
      } else if (t.text == "goto") {
        in.op = Opcode::Goto;
        in.operands.push_back(Operand::label(expect_ident()));
      } else if (t.text == "ret") {
        in.op = Opcode::Ret;
        if (peek().kind == Tok::Var && !is_punct(peek(1), '=') && !is_punct(peek(1), '?'))
          in.operands.push_back(Operand::var(next().text));
      } else if (t.text == "store") {
        in.op = Opcode::Store;
        in.operands.push_back(parse_operand());
        expect_punct(',');
        in.operands.push_back(parse_operand());
      } else {
        fail(t, "unknown statement");
      }
      if (in.is_terminator() && !guard.is_true()) fail(t, "terminators cannot be guarded");
      return in;
    }
    if (t.kind != Tok::Var) fail(t, "expected instruction");
    std::string def = next().text;
    expect_punct('=');
    Token opTok = next();
    if (opTok.kind != Tok::Ident) fail(opTok, "expected opcode");
    auto op = opcode_from_name(opTok.text);
    if (!op) fail(opTok, "unknown opcode");
    if (*op == Opcode::Phi) {
      if (!guard.is_true()) fail(opTok, "phi cannot be guarded");
      expect_punct('(');
      std::vector<PhiArg> args;
      for (;;) {
        PhiArg a;
        a.block = expect_ident();
        expect_punct(':');
        a.value = expect_var();
        args.push_back(std::move(a));
        if (!is_punct(peek(), ',')) break;
        next();
      }
      expect_punct(')');
      return make_phi(def, std::move(args));
    }
    if (*op == Opcode::Psi) {
      expect_punct('(');
      std::vector<PsiArg> args;
      for (;;) {
        PsiArg a;
        a.pred = parse_pred();
        expect_punct('?');
        a.value = expect_var();
        args.push_back(std::move(a));
        if (!is_punct(peek(), ',')) break;
        next();
      }
      expect_punct(')');
      return make_psi(def, std::move(args), guard);
    }
    int arity = plain_arity(*op);
    if (arity < 0 || *op == Opcode::Store) fail(opTok, "opcode cannot define a register");
    std::vector<Operand> ops;
    ops.push_back(parse_operand());
    while (is_punct(peek(), ',')) {
      next();
      ops.push_back(parse_operand());
    }
    if (static_cast<int>(ops.size()) != arity)
      throw ParseError(ParseError::Kind::Semantic, opTok.line, opTok.col,
                       std::string(opcode_name(*op)) + " expects " + std::to_string(arity) + " operand(s)");
    if (*op == Opcode::Const && !ops[0].is_imm())
      throw ParseError(ParseError::Kind::Semantic, opTok.line, opTok.col, "const expects an integer literal");
    return make_op(*op, def, std::move(ops), guard);
  }

  void check_function(const Function& f, const std::map<std::string, SourceLoc>& labels) {
    std::size_t k = 0;
    std::map<std::string, std::set<std::string>> preds;
    for (const auto& b : f.blocks)
      for (std::size_t i = 0; i < b.instrs.size(); ++i, ++k) {
        const auto& in = b.instrs[i];
        for (const auto& o : in.operands)
          if (o.is_label()) {
            if (!labels.count(o.name))
              throw ParseError(ParseError::Kind::Semantic, locs_[k].line, locs_[k].col, "undefined block " + o.name);
            preds[o.name].insert(b.label);
          }
      }
    k = 0;
    for (const auto& b : f.blocks) {
      if (b.instrs.empty() || !b.terminator().is_terminator()) {
        auto loc = labels.at(b.label);
        throw ParseError(ParseError::Kind::Semantic, loc.line, loc.col, "block " + b.label + " does not end with a terminator");
      }
      for (std::size_t i = 0; i < b.instrs.size(); ++i, ++k) {
        const auto& in = b.instrs[i];
        if (in.is_terminator() && i + 1 != b.instrs.size())
          throw ParseError(ParseError::Kind::Semantic, locs_[k].line, locs_[k].col, "terminator in the middle of block " + b.label);
        if (in.is_phi()) {
          std::set<std::string> seen;
          for (const auto& a : in.phi_args) {
            if (!labels.count(a.block))
              throw ParseError(ParseError::Kind::Semantic, locs_[k].line, locs_[k].col, "undefined block " + a.block);
            if (!seen.insert(a.block).second)
              throw ParseError(ParseError::Kind::Semantic, locs_[k].line, locs_[k].col, "duplicate phi argument for " + a.block);
          }
          if (seen != preds[b.label])
            throw ParseError(ParseError::Kind::Semantic, locs_[k].line, locs_[k].col,
                             "phi arity does not match the predecessors of " + b.label);
        }
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<SourceLoc> locs_;
};

void print_operand(std::ostream& os, const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Var:
      os << '%' << o.name;
      break;
    case Operand::Kind::Imm:
      os << o.imm;
      break;
    case Operand::Kind::Label:
      os << o.name;
      break;
  }
}

}  // namespace

Module parse_module(std::string_view text) { return Parser(text).parse(); }

std::string print_instr(const Instr& in) {
  std::ostringstream os;
  if (!in.guard.is_true()) os << in.guard.str() << " ? ";
  switch (in.op) {
    case Opcode::Br:
      os << "br ";
      print_operand(os, in.operands[0]);
      os << ", " << in.operands[1].name << ", " << in.operands[2].name;
      return os.str();
    case Opcode::Goto:
      os << "goto " << in.operands[0].name;
      return os.str();
    case Opcode::Ret:
      os << "ret";
      if (!in.operands.empty()) {
        os << ' ';
        print_operand(os, in.operands[0]);
      }
      return os.str();
    case Opcode::Store:
      os << "store ";
      print_operand(os, in.operands[0]);
      os << ", ";
      print_operand(os, in.operands[1]);
      return os.str();
    case Opcode::Phi:
      os << '%' << in.def << " = phi(";
      for (std::size_t i = 0; i < in.phi_args.size(); ++i)
        os << (i ? ", " : "") << in.phi_args[i].block << ": %" << in.phi_args[i].value;
      os << ')';
      return os.str();
    case Opcode::Psi:
      os << '%' << in.def << " = psi(";
      for (std::size_t i = 0; i < in.psi_args.size(); ++i)
        os << (i ? ", " : "") << in.psi_args[i].pred.str() << " ? %" << in.psi_args[i].value;
      os << ')';
      return os.str();
    default:
      break;
  }
  os << '%' << in.def << " = " << opcode_name(in.op);
  for (std::size_t i = 0; i < in.operands.size(); ++i) {
    os << (i ? ", " : " ");
    print_operand(os, in.operands[i]);
  }
  return os.str();
}

std::string print_function(const Function& f) {
  std::ostringstream os;
  os << "func @" << f.name << '(';
  for (std::size_t i = 0; i < f.params.size(); ++i)
    os << (i ? ", " : "") << '%' << f.params[i].name << (f.params[i].guard ? ":guard" : "");
  os << ") {\n";
  for (const auto& b : f.blocks) {
    os << b.label << ":\n";
    for (const auto& in : b.instrs) os << "  " << print_instr(in) << '\n';
  }
  os << "}\n";
  return os.str();
}

std::string print_module(const Module& m) {
  std::string out;
  for (std::size_t i = 0; i < m.functions.size(); ++i) {
    if (i) out += '\n';
    out += print_function(m.functions[i]);
  }
  return out;
}

}  // namespace psikit
