#include "pim/dump.hpp"

#include <charconv>
#include <sstream>
#include <string_view>

namespace pim {

namespace {

std::string layout_spec(const OperandLayout& op) {
  std::ostringstream os;
  const char* role = op.role == OperandRole::INPUT ? "in" : "out";
  if (op.format == LayoutFormat::CONTIGUOUS)
    os << "C " << op.base << ' ' << op.width << ' ' << role << ' ' << op.tag;
  else
    os << "S " << op.first_partition << ' ' << op.base << ' ' << op.width << ' ' << role << ' '
       << op.tag;
  return os.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T to_number(std::string_view s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ParseError(line, "expected a number, got '" + std::string(s) + "'");
  return v;
}

GateInstance parse_gate(std::string_view text, std::size_t line) {
  text = trim(text);
  auto open = text.find('(');
  auto close = text.find(')');
  auto arrow = text.find("->");
  if (open == std::string_view::npos || close == std::string_view::npos ||
      arrow == std::string_view::npos || !(open < close && close < arrow))
    throw ParseError(line, "malformed gate '" + std::string(text) + "'");
  auto name = text.substr(0, open);
  GateKind kind;
  if (name == "INIT0") kind = GateKind::INIT0;
  else if (name == "INIT1") kind = GateKind::INIT1;
  else if (name == "NOT") kind = GateKind::NOT;
  else if (name == "NOR2") kind = GateKind::NOR2;
  else throw ParseError(line, "unknown gate kind '" + std::string(name) + "'");

  GateInstance g{kind, {0, 0}, 0};
  auto args = text.substr(open + 1, close - open - 1);
  std::size_t n = 0;
  if (!trim(args).empty()) {
    while (true) {
      auto comma = args.find(',');
      auto tok = trim(args.substr(0, comma));
      if (n >= 2) throw ParseError(line, "too many gate inputs");
      g.in[n++] = to_number<Col>(tok, line);
      if (comma == std::string_view::npos) break;
      args.remove_prefix(comma + 1);
    }
  }
  if (n != arity(kind)) throw ParseError(line, std::string("wrong arity for ") + to_string(kind));
  if (trim(text.substr(close + 1, arrow - close - 1)) != "")
    throw ParseError(line, "unexpected text before '->'");
  g.out = to_number<Col>(trim(text.substr(arrow + 2)), line);
  return g;
}

}  // namespace

std::string dump_program(const MicroProgram& prog) {
  std::ostringstream os;
  os << "WIDTH " << prog.row_width() << '\n';
  os << "PARTITIONS " << prog.config.k << '\n';
  for (const auto& op : prog.operands) os << "OPERAND " << op.name << ' ' << layout_spec(op) << '\n';
  for (std::size_t i = 0; i < prog.steps.size(); ++i) {
    const auto& s = prog.steps[i];
    os << "STEP " << i << " SW=";
    for (bool b : s.switches) os << (b ? '1' : '0');
    for (const auto& g : s.gates) {
      os << " ; " << to_string(g.kind) << '(';
      for (std::size_t j = 0; j < arity(g.kind); ++j) os << (j ? "," : "") << g.in[j];
      os << ")->" << g.out;
    }
    os << '\n';
  }
  return os.str();
}

MicroProgram parse_program(const std::string& text) {
  MicroProgram prog;
  std::istringstream is(text);
  std::string raw;
  std::size_t line = 0;
  std::size_t width = 0;
  bool have_width = false, have_k = false;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view l = trim(raw);
    if (l.empty()) continue;
    std::istringstream ls{std::string(l)};
    std::string key;
    ls >> key;
    if (key == "WIDTH") {
      std::string v;
      ls >> v;
      width = to_number<std::size_t>(v, line);
      have_width = true;
    } else if (key == "PARTITIONS") {
      std::string v;
      ls >> v;
      prog.config.k = to_number<std::size_t>(v, line);
      if (prog.config.k == 0) throw ParseError(line, "partition count must be positive");
      have_k = true;
    } else if (key == "OPERAND") {
      OperandLayout op;
      std::string fmt, a, b, c, role, tag;
      ls >> op.name >> fmt;
      if (fmt == "C") {
        ls >> a >> b >> role >> tag;
        op.format = LayoutFormat::CONTIGUOUS;
        op.base = to_number<Col>(a, line);
        op.width = to_number<std::size_t>(b, line);
      } else if (fmt == "S") {
        ls >> a >> b >> c >> role >> tag;
        op.format = LayoutFormat::STRIDED;
        op.first_partition = to_number<std::size_t>(a, line);
        op.base = to_number<Col>(b, line);
        op.width = to_number<std::size_t>(c, line);
      } else {
        throw ParseError(line, "unknown layout format '" + fmt + "'");
      }
      if (role == "in") op.role = OperandRole::INPUT;
      else if (role == "out") op.role = OperandRole::OUTPUT;
      else throw ParseError(line, "unknown operand role '" + role + "'");
      if (tag.empty()) throw ParseError(line, "missing operand tag");
      op.tag = tag;
      std::string extra;
      if (ls >> extra) throw ParseError(line, "trailing text in OPERAND");
      prog.operands.push_back(std::move(op));
    } else if (key == "STEP") {
      if (!have_width || !have_k) throw ParseError(line, "STEP before WIDTH/PARTITIONS");
      std::size_t pos = 0;
      std::vector<std::string_view> parts;
      while (true) {
        auto semi = l.find(';', pos);
        parts.push_back(trim(l.substr(pos, semi == std::string_view::npos ? semi : semi - pos)));
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
      }
      std::istringstream hs{std::string(parts[0])};
      std::string step_kw, idx, sw;
      hs >> step_kw >> idx >> sw;
      if (to_number<std::size_t>(idx, line) != prog.steps.size())
        throw ParseError(line, "step index out of sequence");
      if (sw.rfind("SW=", 0) != 0) throw ParseError(line, "missing SW= field");
      std::string bits = sw.substr(3);
      std::string extra;
      if (hs >> extra) throw ParseError(line, "trailing text after SW field");
      if (bits.size() != prog.config.k - 1)
        throw ParseError(line, "SW bitstring must have " + std::to_string(prog.config.k - 1) +
                                   " bits");
      CycleStep step;
      for (char ch : bits) {
        if (ch != '0' && ch != '1') throw ParseError(line, "SW bitstring must contain only 0/1");
        step.switches.push_back(ch == '1');
      }
      for (std::size_t i = 1; i < parts.size(); ++i) step.gates.push_back(parse_gate(parts[i], line));
      prog.steps.push_back(std::move(step));
    } else {
      throw ParseError(line, "unknown directive '" + key + "'");
    }
  }
  if (!have_width || !have_k) throw ParseError(line, "missing WIDTH or PARTITIONS");
  if (width % prog.config.k != 0) throw ParseError(line, "WIDTH not divisible by PARTITIONS");
  prog.config.partition_width = width / prog.config.k;
  return prog;
}

}  // namespace pim
