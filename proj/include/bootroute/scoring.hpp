#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bootroute {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScorerKind { exact_match, numeric_match, contains, external };

const char* to_string(ScorerKind s);
ScorerKind scorer_from_string(const std::string& s);

struct TaskRecord {
  std::string task_id;
  std::string prompt;
  std::string reference;  // required unless scorer is external
  ScorerKind scorer = ScorerKind::exact_match;
  nlohmann::json metadata;  // free-form; "capabilities" array feeds the query
};

// JSON-lines, one TaskRecord per line. Validates the scorer/reference
// invariant at load time (numeric references must parse as numbers).
std::vector<TaskRecord> load_dataset_jsonl(const std::string& path);
std::vector<TaskRecord> parse_dataset_jsonl(const std::string& content);

// Pinned answer normalization: trim, collapse whitespace runs to one space,
// strip terminal punctuation (.,!?;:). No case folding.
std::string normalize_answer(const std::string& text);

// Last number appearing in the text (comma-grouped integers accepted),
// or nullopt when no numeral occurs.
std::optional<double> extract_last_number(const std::string& text);

// exact_match: normalized string equality. numeric_match: last number in
// the answer vs the reference number, relative tolerance 1e-6. contains:
// normalized substring. Throws for external scorers (not locally scorable).
bool score_answer(const std::string& final_text, const TaskRecord& record);

void to_json(nlohmann::json& j, const TaskRecord& t);
void from_json(const nlohmann::json& j, TaskRecord& t);

}  // namespace bootroute
