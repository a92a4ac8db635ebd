#pragma once

#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lfcheck/lts.hpp"

namespace lfcheck {

class AutError : public std::runtime_error {
 public:
  AutError(std::size_t line, const std::string& what)
      : std::runtime_error("aut line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Aldebaran encoding of a label: tau is "i"; visible actions are
/// "CALL !T<t> !<METHOD> !<arg|NONE>" / "RET !T<t> !<METHOD> !<val|NONE>"
/// with the method name upper-cased and EMPTY as a distinguished token.
inline std::string aut_label(const ActionLabel& a) {
  if (a.is_tau()) return "i";
  std::string s = a.kind == ActionLabel::Kind::Call ? "CALL" : "RET";
  s += " !T" + std::to_string(a.thread);
  s += " !" + detail::upper(a.method);
  s += " !" + a.value.str();
  return s;
}

inline ActionLabel parse_aut_label(const std::string& text, std::size_t line) {
  if (text == "i") return ActionLabel::tau();
  std::istringstream in(text);
  std::string kind, tpart, mpart, vpart;
  in >> kind >> tpart >> mpart >> vpart;
  std::string rest;
  if (in >> rest) throw AutError(line, "unknown label encoding: \"" + text + "\"");
  bool is_call = kind == "CALL";
  if ((!is_call && kind != "RET") || tpart.size() < 3 || tpart.rfind("!T", 0) != 0 ||
      mpart.size() < 2 || mpart[0] != '!' || vpart.size() < 2 || vpart[0] != '!')
    throw AutError(line, "unknown label encoding: \"" + text + "\"");
  int thread = 0;
  try {
    std::size_t used = 0;
    thread = std::stoi(tpart.substr(2), &used);
    if (used != tpart.size() - 2 || thread <= 0) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw AutError(line, "bad thread in label: \"" + text + "\"");
  }
  std::string method = detail::lower(mpart.substr(1));
  std::string vtext = vpart.substr(1);
  LabelValue value;
  if (vtext == "NONE") {
    value = LabelValue::none();
  } else if (vtext == "EMPTY") {
    value = LabelValue::empty();
  } else {
    try {
      std::size_t used = 0;
      value = LabelValue::integer(std::stoi(vtext, &used));
      if (used != vtext.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw AutError(line, "bad value in label: \"" + text + "\"");
    }
  }
  return is_call ? ActionLabel::call(thread, std::move(method), value)
                 : ActionLabel::ret(thread, std::move(method), value);
}

/// Writes `des (initial, num_transitions, num_states)` plus one line per
/// transition in canonical stored order. Output is byte-stable.
inline void write_aut(std::ostream& out, const Lts& l) {
  out << "des (" << l.initial() << ", " << l.num_transitions() << ", " << l.num_states() << ")\n";
  for (const auto& t : l.transitions())
    out << "(" << t.src << ", \"" << aut_label(l.label(t.label)) << "\", " << t.dst << ")\n";
}

inline std::string write_aut(const Lts& l) {
  std::ostringstream out;
  write_aut(out, l);
  return out.str();
}

inline Lts read_aut(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      std::size_t b = line.find_last_not_of(" \t\r");
      line = line.substr(a, b - a + 1);
      return true;
    }
    return false;
  };

  if (!next_line()) throw AutError(0, "empty input");
  unsigned long initial = 0, ntrans = 0, nstates = 0;
  if (std::sscanf(line.c_str(), "des (%lu, %lu, %lu)", &initial, &ntrans, &nstates) != 3 &&
      std::sscanf(line.c_str(), "des(%lu,%lu,%lu)", &initial, &ntrans, &nstates) != 3)
    throw AutError(lineno, "malformed header: \"" + line + "\"");
  if (nstates == 0) throw AutError(lineno, "header declares zero states");
  if (initial >= nstates) throw AutError(lineno, "initial state out of range");

  LtsBuilder b;
  for (unsigned long i = 0; i < ntrans; ++i) {
    if (!next_line()) throw AutError(lineno, "expected " + std::to_string(ntrans) + " transitions");
    // (src, "LABEL", dst)
    if (line.size() < 2 || line.front() != '(' || line.back() != ')')
      throw AutError(lineno, "malformed transition: \"" + line + "\"");
    std::string body = line.substr(1, line.size() - 2);
    std::size_t q1 = body.find('"');
    std::size_t q2 = body.rfind('"');
    if (q1 == std::string::npos || q2 <= q1)
      throw AutError(lineno, "transition label must be quoted: \"" + line + "\"");
    std::string srcpart = body.substr(0, q1);
    std::string label = body.substr(q1 + 1, q2 - q1 - 1);
    std::string dstpart = body.substr(q2 + 1);
    unsigned long src = 0, dst = 0;
    if (std::sscanf(srcpart.c_str(), " %lu ,", &src) != 1 ||
        std::sscanf(dstpart.c_str(), " , %lu", &dst) != 1)
      throw AutError(lineno, "malformed transition endpoints: \"" + line + "\"");
    if (src >= nstates || dst >= nstates)
      throw AutError(lineno, "transition endpoint out of range: \"" + line + "\"");
    b.add(static_cast<StateId>(src), parse_aut_label(label, lineno), static_cast<StateId>(dst));
  }
  if (next_line()) throw AutError(lineno, "trailing content after declared transitions");
  return std::move(b).build(static_cast<StateId>(nstates), static_cast<StateId>(initial));
}

inline Lts read_aut(const std::string& text) {
  std::istringstream in(text);
  return read_aut(in);
}

}  // namespace lfcheck
