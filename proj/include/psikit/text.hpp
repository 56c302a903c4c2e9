// Textual form of the predicated IR (`.pir` files).
//
//   func @f(%a, %p:guard) {
//   b0:
//     %p ? %x = add %a, 1
//     %y = psi(%p ? %x, !%p ? %a)
//     ret %y
//   }
#pragma once

#include <string>
#include <string_view>

#include "psikit/ir.hpp"

namespace psikit {

class ParseError : public Error {
 public:
  enum class Kind { Syntax, Semantic };
  ParseError(Kind kind, int line, int column, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

Module parse_module(std::string_view text);
std::string print_module(const Module& m);
std::string print_function(const Function& f);
std::string print_instr(const Instr& in);

}  // namespace psikit
