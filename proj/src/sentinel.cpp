#include "agetrack/sentinel.hpp"

#include "agetrack/log.hpp"
#include "agetrack/text.hpp"

#include <regex>
#include <set>

namespace agetrack {
namespace {

const std::regex& token_re() {
  static const std::regex re(R"(\[ACCUM(_INIT)?:([A-Za-z_][A-Za-z0-9_]*):([+-]?[0-9]+(\.[0-9]+)?)\])");
  return re;
}

// Anything that looks like the start of a token.
const std::regex& candidate_re() {
  static const std::regex re(R"(\[ACCUM(_INIT)?(:[^\]\n]*)?\]?)");
  return re;
}

}  // namespace

SentinelParse parse_sentinels(std::string_view text) {
  SentinelParse out;
  const std::string input(text);
  std::set<std::string> initialized;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(input.begin(), input.end(), token_re()); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.text.append(input, last, static_cast<std::size_t>(m.position(0)) - last);
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
    SentinelEffect e;
    e.kind = m[1].matched ? SentinelKind::init : SentinelKind::delta;
    e.name = m[2].str();
    e.value = std::stod(m[3].str());
    if (e.kind == SentinelKind::init) {
      initialized.insert(e.name);
    } else if (initialized.count(e.name) == 0) {
      out.warnings.push_back("sentinel: delta for '" + e.name + "' precedes its init in this text");
    }
    out.effects.push_back(std::move(e));
  }
  out.text.append(input, last, std::string::npos);

  for (auto it = std::sregex_iterator(out.text.begin(), out.text.end(), candidate_re()); it != std::sregex_iterator();
       ++it) {
    out.warnings.push_back("sentinel: malformed token '" + it->str() + "' left in place");
  }
  for (const auto& w : out.warnings) log::debug(w);
  return out;
}

Sidecar apply_effects(Sidecar sidecar, const std::vector<SentinelEffect>& effects, std::vector<std::string>* warnings) {
  for (const auto& e : effects) {
    if (e.kind == SentinelKind::init) {
      sidecar[e.name] = e.value;
      continue;
    }
    auto it = sidecar.find(e.name);
    if (it == sidecar.end()) {
      const std::string msg = "sentinel: delta on unknown accumulator '" + e.name + "' skipped";
      log::warn(msg);
      if (warnings != nullptr) warnings->push_back(msg);
      continue;
    }
    it->second += e.value;
  }
  return sidecar;
}

std::string render_sidecar(const Sidecar& sidecar) {
  std::string out;
  for (const auto& [name, value] : sidecar) {
    if (!out.empty()) out += '\n';
    out += name + ": " + text::format_number(value);
  }
  return out;
}

}  // namespace agetrack
