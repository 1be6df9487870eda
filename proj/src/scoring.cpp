#include "bootroute/scoring.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bootroute {

const char* to_string(ScorerKind s) {
  switch (s) {
    case ScorerKind::exact_match: return "exact_match";
    case ScorerKind::numeric_match: return "numeric_match";
    case ScorerKind::contains: return "contains";
    case ScorerKind::external: return "external";
  }
  return "exact_match";
}

ScorerKind scorer_from_string(const std::string& s) {
  if (s == "exact_match") return ScorerKind::exact_match;
  if (s == "numeric_match") return ScorerKind::numeric_match;
  if (s == "contains") return ScorerKind::contains;
  if (s == "external") return ScorerKind::external;
  throw DatasetError("unknown scorer: " + s);
}

std::string normalize_answer(const std::string& text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !collapsed.empty();
    } else {
      if (pending_space) collapsed += ' ';
      pending_space = false;
      collapsed += static_cast<char>(c);
    }
  }
  const std::string terminal = ".,!?;:";
  while (!collapsed.empty() && terminal.find(collapsed.back()) != std::string::npos) {
    collapsed.pop_back();
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  return collapsed;
}

std::optional<double> extract_last_number(const std::string& text) {
  std::optional<double> last;
  std::size_t i = 0;
  auto is_digit = [&](std::size_t p) {
    return p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]));
  };
  while (i < text.size()) {
    std::size_t start = i;
    std::size_t p = i;
    if ((text[p] == '+' || text[p] == '-') && is_digit(p + 1)) ++p;
    if (!is_digit(p)) {
      ++i;
      continue;
    }
    std::string digits;
    while (is_digit(p)) digits += text[p++];
    // comma-grouped thousands: 1,234,567
    while (p + 3 < text.size() && text[p] == ',' && is_digit(p + 1) && is_digit(p + 2) &&
           is_digit(p + 3) && !is_digit(p + 4)) {
      digits += text.substr(p + 1, 3);
      p += 4;
    }
    if (text[start] == '-') digits = "-" + digits;
    if (text[start] == '+') digits = "+" + digits;
    std::string number = digits;
    if (p < text.size() && text[p] == '.' && is_digit(p + 1)) {
      number += '.';
      ++p;
      while (is_digit(p)) number += text[p++];
    }
    if (p < text.size() && (text[p] == 'e' || text[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text.size() && (text[q] == '+' || text[q] == '-')) ++q;
      if (is_digit(q)) {
        number += text.substr(p, q - p);
        p = q;
        while (is_digit(p)) number += text[p++];
      }
    }
    try {
      last = std::stod(number);
    } catch (const std::exception&) {
      // out-of-range literal; skip it
    }
    i = p;
  }
  return last;
}

namespace {

bool numbers_match(double a, double b) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-6 * scale;
}

}  // namespace

bool score_answer(const std::string& final_text, const TaskRecord& record) {
  switch (record.scorer) {
    case ScorerKind::exact_match:
      return normalize_answer(final_text) == normalize_answer(record.reference);
    case ScorerKind::numeric_match: {
      auto answer = extract_last_number(final_text);
      auto reference = extract_last_number(record.reference);
      if (!answer || !reference) return false;
      return numbers_match(*answer, *reference);
    }
    case ScorerKind::contains: {
      std::string needle = normalize_answer(record.reference);
      return !needle.empty() &&
             normalize_answer(final_text).find(needle) != std::string::npos;
    }
    case ScorerKind::external:
      throw DatasetError("external scorer cannot be evaluated locally");
  }
  return false;
}

void to_json(nlohmann::json& j, const TaskRecord& t) {
  j = nlohmann::json{
      {"task_id", t.task_id},
      {"prompt", t.prompt},
      {"scorer", to_string(t.scorer)},
  };
  if (!t.reference.empty()) j["reference"] = t.reference;
  if (!t.metadata.is_null()) j["metadata"] = t.metadata;
}

void from_json(const nlohmann::json& j, TaskRecord& t) {
  t.task_id = j.at("task_id").get<std::string>();
  t.prompt = j.at("prompt").get<std::string>();
  t.scorer = scorer_from_string(j.value("scorer", std::string{"exact_match"}));
  t.reference = j.value("reference", std::string{});
  t.metadata = j.value("metadata", nlohmann::json{});
}

std::vector<TaskRecord> parse_dataset_jsonl(const std::string& content) {
  std::vector<TaskRecord> records;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw DatasetError("line " + std::to_string(line_no) + ": not valid JSON");
    }
    TaskRecord record;
    try {
      from_json(doc, record);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (record.task_id.empty()) {
      throw DatasetError("line " + std::to_string(line_no) + ": task_id must be non-empty");
    }
    if (record.prompt.empty()) {
      throw DatasetError("line " + std::to_string(line_no) + ": prompt must be non-empty");
    }
    if (record.scorer != ScorerKind::external && record.reference.empty()) {
      throw DatasetError("line " + std::to_string(line_no) + ": scorer " +
                         to_string(record.scorer) + " requires a reference");
    }
    if (record.scorer == ScorerKind::numeric_match &&
        !extract_last_number(record.reference)) {
      throw DatasetError("line " + std::to_string(line_no) +
                         ": numeric_match reference carries no number");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<TaskRecord> load_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_jsonl(buffer.str());
}

}  // namespace bootroute
