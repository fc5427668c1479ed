#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ieqa/defvalue.hpp"

namespace ieqa {

// One feedback-loop iteration: a definition text and its aggregated V_d.
struct TrialRecord {
  int iter = 0;
  std::string definition;
  DefinitionValue v_d;
  std::string ts;  // UTC instant, ISO 8601
};

struct OptimizerEndpoint {
  enum class Kind { mock, http };
  Kind kind = Kind::mock;

  // mock: fixed candidate pool, proposed in order (skipping already-tried
  // texts, cycling once exhausted).
  std::vector<std::string> pool;

  // http: chat-completion-style endpoint.
  std::string base_url;  // scheme://host[:port]
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int timeout_ms = 10000;
  int max_retries = 2;
  std::string api_key;  // from FDMPO_API_KEY; never logged
};

// Transport/protocol failure talking to the optimizer endpoint.
struct endpoint_error : std::runtime_error {
  int last_status = 0;
  explicit endpoint_error(const std::string& what, int status = 0)
      : std::runtime_error(what), last_status(status) {}
};

inline constexpr const char* kApiKeyEnvVar = "FDMPO_API_KEY";
inline constexpr const char* kChatCompletionsPath = "/v1/chat/completions";

// History rendering sent to the http optimizer: (definition, V_d) pairs
// sorted ascending by V_d plus the improvement request.
std::string render_history_prompt(const std::vector<TrialRecord>& history);
std::string meta_system_prompt();

// Request body for the http optimizer (exposed for protocol tests).
std::string build_chat_request(const std::vector<TrialRecord>& history,
                               const OptimizerEndpoint& endpoint);

// Whitespace-trims the reply and strips code fences and one layer of
// surrounding quotes.
std::string strip_reply(std::string_view reply);

// Next candidate definition. Mock consults only the pool and history; http
// POSTs the rendered history and parses the first message text, retrying
// with bounded jittered backoff. Throws endpoint_error after max_retries.
std::string propose_next(const std::vector<TrialRecord>& history,
                         const OptimizerEndpoint& endpoint);

using DefinitionEvaluator = std::function<DefinitionValue(const std::string&)>;

struct FdmpoResult {
  TrialRecord best;
  std::vector<TrialRecord> history;
};

// evaluate -> record -> propose -> iterate; history has budget+1 records on
// success and is appended (and flushed) to history_path as it grows when the
// path is nonempty. Best = maximum V_d over all trials, ties to the earliest
// iteration.
FdmpoResult run_fdmpo(const std::string& initial_definition,
                      const DefinitionEvaluator& evaluator,
                      const OptimizerEndpoint& endpoint, int budget,
                      const std::filesystem::path& history_path = {});

// Argmax over v_d, earliest iteration on ties. Throws std::invalid_argument
// on an empty history.
const TrialRecord& select_best(const std::vector<TrialRecord>& history);

// JSON Lines history file: {iter, definition, v_d, n_samples, ts} per line.
void append_history_line(const TrialRecord& record,
                         const std::filesystem::path& path);
std::vector<TrialRecord> load_history(const std::filesystem::path& path);

// CSV with columns iter,v_d.
void write_trajectory_csv(const std::vector<TrialRecord>& history,
                          const std::filesystem::path& path);

}  // namespace ieqa
