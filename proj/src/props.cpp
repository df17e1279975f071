#include "secwit/props.hpp"

#include <cctype>
#include <sstream>

namespace secwit::props {

using bundle::BundleAutomaton;

BundleAutomaton negated_constant_time(const std::string &phi) {
  std::ostringstream os;
  os << "automaton negated_ct tracks 2\n"
     << "state I initial\n"
     << "state S\n"
     << "state M\n"
     << "state F accepting\n"
     << "trans I -> M when kind(1)=input && kind(2)=input && (" << phi << ")\n"
     << "trans I -> S when kind(1)=input && kind(2)=input && !(" << phi << ")\n"
     << "trans S -> S when true\n"
     << "trans M -> M when agree(1,2,all)\n"
     << "trans M -> F when !(agree(1,2,all))\n"
     << "trans F -> F when true\n";
  return bundle::parse_automaton(os.str());
}

BundleAutomaton
negated_noninterference(const std::vector<std::string> &low_vars) {
  std::ostringstream os;
  os << "automaton negated_ni";
  if (!low_vars.empty()) {
    os << "_low";
    for (auto &v : low_vars)
      os << "_" << v;
  }
  os << " tracks 2\n"
     << "state I initial\n"
     << "state S\n"
     << "state M\n"
     << "state F accepting\n"
     << "trans I -> M when tag(1)=init && tag(2)=init && agree(1,2,low)\n"
     << "trans I -> S when tag(1)=init && tag(2)=init && !(agree(1,2,low))\n"
     << "trans S -> S when true\n"
     << "trans M -> M when agree(1,2,low)\n"
     << "trans M -> F when !(agree(1,2,low))\n"
     << "trans F -> F when true\n";
  return bundle::parse_automaton(os.str());
}

BundleAutomaton final_memory_equal(const std::vector<std::string> &vars) {
  std::ostringstream os;
  os << "automaton final_memory_equal";
  for (auto &v : vars)
    os << "_" << v;
  os << " tracks 2\n"
     << "state W initial\n"
     << "state F accepting\n"
     << "trans W -> W when !(tag(1)=final && tag(2)=final) || agree(1,2,all)\n"
     << "trans W -> F when tag(1)=final && tag(2)=final && !(agree(1,2,all))\n"
     << "trans F -> F when true\n";
  return bundle::parse_automaton(os.str());
}

BundleAutomaton universal_acceptor(int k) {
  std::ostringstream os;
  os << "automaton universal tracks " << k << "\n"
     << "state A initial accepting\n"
     << "trans A -> A when true\n";
  return bundle::parse_automaton(os.str());
}

namespace {

std::string strip_comment(const std::string &line) {
  std::size_t h = line.find('#');
  std::size_t ds = line.find("//");
  std::size_t cut = std::min(h == std::string::npos ? line.size() : h,
                             ds == std::string::npos ? line.size() : ds);
  return line.substr(0, cut);
}

bool blank(const std::string &s) {
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      return false;
  return true;
}

std::vector<std::string> words(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w)
    out.push_back(w);
  return out;
}

} // namespace

Property parse_property(const std::string &text, const FileLoader &load) {
  Property prop;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool saw_attack = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string body = strip_comment(raw);
    if (blank(body))
      continue;
    auto w = words(body);
    if (w[0] == "property" && w.size() == 2) {
      prop.name = w[1];
    } else if (w[0] == "prefix") {
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] == "forall")
          prop.universal.push_back(true);
        else if (w[i] == "exists")
          prop.universal.push_back(false);
        else
          throw ParseError(lineno, 1, "expected forall or exists");
      }
    } else if (w[0] == "automaton" && w.size() == 2) {
      prop.automata.push_back(bundle::parse_automaton(load(w[1])));
    } else if (w[0] == "attack" && w.size() >= 2) {
      std::vector<std::string> exposed;
      if (w.size() > 2) {
        if (w[2] != "expose")
          throw ParseError(lineno, 1, "expected 'expose' after model name");
        exposed.assign(w.begin() + 3, w.end());
      }
      prop.model = secir::attack_model_by_name(w[1], std::move(exposed));
      saw_attack = true;
    } else {
      throw ParseError(lineno, 1, "unrecognized property line: " + w[0]);
    }
  }
  if (prop.universal.empty())
    throw ParseError(lineno, 1, "property has no quantifier prefix");
  if (prop.automata.empty())
    throw ParseError(lineno, 1, "property names no automata");
  if (!saw_attack)
    throw ParseError(lineno, 1, "property names no attack model");
  for (auto &a : prop.automata)
    if (a.k != prop.k())
      throw ParseError(lineno, 1, "automaton " + a.name + " has " +
                                      std::to_string(a.k) +
                                      " tracks, prefix has " +
                                      std::to_string(prop.k()));
  return prop;
}

std::string print_property(const Property &p,
                           const std::vector<std::string> &automaton_paths) {
  std::ostringstream os;
  os << "property " << p.name << "\n";
  os << "prefix";
  for (bool u : p.universal)
    os << (u ? " forall" : " exists");
  os << "\n";
  for (auto &path : automaton_paths)
    os << "automaton " << path << "\n";
  os << "attack " << p.model.name;
  if (!p.model.exposed.empty()) {
    os << " expose";
    for (auto &v : p.model.exposed)
      os << " " << v;
  }
  os << "\n";
  return os.str();
}

} // namespace secwit::props
