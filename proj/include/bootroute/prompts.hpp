#pragma once

#include <map>
#include <string>
#include <string_view>

namespace bootroute {

// Substitutes {name} placeholders in a single pass; text injected for one
// placeholder is never re-scanned, so model output cannot smuggle tokens
// into the rendering. Unknown placeholders are left verbatim.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars);

// Templates compiled in from assets/prompts/ at build time.
std::string_view selector_template();
std::string_view aggregator_template();

// "one".."ten" spelled out, digits beyond.
std::string spell_count(int n);

}  // namespace bootroute
