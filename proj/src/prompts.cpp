#include "bootroute/prompts.hpp"

#include "prompt_assets.hpp"

namespace bootroute {

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = vars.find(name);
    if (it != vars.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  return out;
}

namespace {

// The asset files end with a newline the template should not carry.
std::string_view strip_trailing_newline(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

std::string_view selector_template() {
  return strip_trailing_newline(assets::kSelectorTemplate);
}

std::string_view aggregator_template() {
  return strip_trailing_newline(assets::kAggregatorTemplate);
}

std::string spell_count(int n) {
  static constexpr const char* kWords[] = {"zero", "one", "two",   "three", "four", "five",
                                           "six",  "seven", "eight", "nine",  "ten"};
  if (n >= 0 && n <= 10) return kWords[n];
  return std::to_string(n);
}

}  // namespace bootroute
