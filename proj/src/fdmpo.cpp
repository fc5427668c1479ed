#include "ieqa/fdmpo.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "ieqa/rng.hpp"

namespace ieqa {

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return std::string(s.substr(begin, end - begin + 1));
}

std::string now_utc_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_v(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string meta_system_prompt() {
  return "You refine natural-language metric definitions for an automatic "
         "image-quality evaluator. Each candidate definition is scored by its "
         "definition value: the evaluator's probability of reproducing the "
         "ground-truth score digits when prompted with that definition "
         "(higher is better). Study the scored history and propose exactly "
         "one improved definition.";
}

std::string render_history_prompt(const std::vector<TrialRecord>& history) {
  if (history.empty())
    throw std::invalid_argument("history must contain at least one trial");
  // Ascending by V_d so the strongest definition appears last (recency bias
  // works in our favor); stable to keep equal-valued trials in loop order.
  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return history[a].v_d.v < history[b].v_d.v;
  });

  std::ostringstream out;
  out << "Historical metric definitions with their definition values, worst to "
         "best:\n\n";
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const TrialRecord& rec = history[order[rank]];
    out << (rank + 1) << ". V_d=" << format_v(rec.v_d.v) << "\n"
        << rec.definition << "\n\n";
  }
  out << "Write one new metric definition likely to achieve a higher definition "
         "value than every definition above. Reply with the definition text "
         "only: no commentary, no quotes, no code fences.";
  return out.str();
}

std::string build_chat_request(const std::vector<TrialRecord>& history,
                               const OptimizerEndpoint& endpoint) {
  nlohmann::ordered_json body;
  body["model"] = endpoint.model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", meta_system_prompt()}},
       {{"role", "user"}, {"content", render_history_prompt(history)}}});
  body["temperature"] = endpoint.temperature;
  return body.dump();
}

std::string strip_reply(std::string_view reply) {
  std::string s = trim(reply);
  if (s.rfind("```", 0) == 0) {
    // drop the opening fence line (which may carry a language tag)
    const auto nl = s.find('\n');
    s = nl == std::string::npos ? std::string{} : s.substr(nl + 1);
    const auto fence = s.rfind("```");
    if (fence != std::string::npos) s = s.substr(0, fence);
    s = trim(s);
  }
  if (s.size() >= 2) {
    const char front = s.front(), back = s.back();
    if ((front == '"' && back == '"') || (front == '\'' && back == '\''))
      s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

namespace {

std::string propose_mock(const std::vector<TrialRecord>& history,
                         const OptimizerEndpoint& endpoint) {
  if (endpoint.pool.empty())
    throw std::invalid_argument("mock optimizer requires a non-empty candidate pool");
  const auto tried = [&](const std::string& text) {
    return std::any_of(history.begin(), history.end(),
                       [&](const TrialRecord& r) { return r.definition == text; });
  };
  for (const std::string& candidate : endpoint.pool)
    if (!tried(candidate)) return candidate;
  // Pool exhausted: cycle deterministically on the trial count.
  return endpoint.pool[history.size() % endpoint.pool.size()];
}

std::string parse_completion(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw endpoint_error(std::string("malformed optimizer response: ") + e.what(), 200);
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw endpoint_error("optimizer response carries no choices", 200);
  const auto& msg = j["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content") ||
      !msg["message"]["content"].is_string())
    throw endpoint_error("optimizer response carries no message text", 200);
  const std::string text = strip_reply(msg["message"]["content"].get<std::string>());
  if (text.empty()) throw endpoint_error("optimizer returned an empty definition", 200);
  return text;
}

std::string propose_http(const std::vector<TrialRecord>& history,
                         const OptimizerEndpoint& endpoint) {
  if (endpoint.base_url.empty())
    throw std::invalid_argument("http optimizer requires a base URL");
  if (endpoint.max_retries < 0)
    throw std::invalid_argument("max_retries must be non-negative");

  const std::string body = build_chat_request(history, endpoint);
  httplib::Headers headers;
  if (!endpoint.api_key.empty())
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);

  // Jitter only spreads retry pressure; it does not affect results, so a
  // clock seed is fine here.
  SplitMix64 jitter(static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count()));

  int last_status = 0;
  std::string last_error = "no attempt made";
  const int attempts = endpoint.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double base = 250.0 * static_cast<double>(1 << (attempt - 1));
      const auto delay = std::chrono::milliseconds(
          static_cast<long>(base + jitter.uniform(0.0, 0.5 * base)));
      std::this_thread::sleep_for(delay);
    }

    httplib::Client client(endpoint.base_url);
    const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Result res =
        client.Post(kChatCompletionsPath, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    return parse_completion(res->body);  // protocol errors are not retried
  }
  throw endpoint_error("optimizer endpoint failed after " + std::to_string(attempts) +
                           " attempts (" + last_error + ")",
                       last_status);
}

}  // namespace

std::string propose_next(const std::vector<TrialRecord>& history,
                         const OptimizerEndpoint& endpoint) {
  if (history.empty())
    throw std::invalid_argument("propose_next requires a non-empty history");
  return endpoint.kind == OptimizerEndpoint::Kind::mock ? propose_mock(history, endpoint)
                                                        : propose_http(history, endpoint);
}

const TrialRecord& select_best(const std::vector<TrialRecord>& history) {
  if (history.empty()) throw std::invalid_argument("cannot select from an empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    // strict > keeps the earliest iteration on ties
    if (history[i].v_d.v > history[best].v_d.v) best = i;
  }
  return history[best];
}

FdmpoResult run_fdmpo(const std::string& initial_definition,
                      const DefinitionEvaluator& evaluator,
                      const OptimizerEndpoint& endpoint, int budget,
                      const std::filesystem::path& history_path) {
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");
  if (initial_definition.empty())
    throw std::invalid_argument("initial definition must be non-empty");
  if (!evaluator) throw std::invalid_argument("missing definition evaluator");

  FdmpoResult result;
  std::string current = initial_definition;
  for (int iter = 0; iter <= budget; ++iter) {
    TrialRecord record;
    record.iter = iter;
    record.definition = current;
    record.v_d = evaluator(current);
    record.ts = now_utc_iso8601();
    result.history.push_back(record);
    if (!history_path.empty()) append_history_line(record, history_path);
    if (iter < budget) current = propose_next(result.history, endpoint);
  }
  result.best = select_best(result.history);
  return result;
}

// --------------------------------------------------------------------------
// persistence
// --------------------------------------------------------------------------

void append_history_line(const TrialRecord& record, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["iter"] = record.iter;
  j["definition"] = record.definition;
  j["v_d"] = record.v_d.v;
  j["n_samples"] = record.v_d.n_samples;
  j["ts"] = record.ts;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open history for append: " + path.string());
  out << j.dump() << std::endl;  // endl: flush so a crash leaves a valid prefix
  if (!out) throw std::runtime_error("failed writing history: " + path.string());
}

std::vector<TrialRecord> load_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open history: " + path.string());
  std::vector<TrialRecord> history;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("malformed history line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    TrialRecord rec;
    rec.iter = j.at("iter").get<int>();
    rec.definition = j.at("definition").get<std::string>();
    rec.v_d.v = j.at("v_d").get<double>();
    rec.v_d.n_samples = j.at("n_samples").get<int>();
    rec.ts = j.value("ts", "");
    if (rec.definition.empty())
      throw std::runtime_error("history line " + std::to_string(lineno) +
                               " carries an empty definition");
    if (rec.iter != static_cast<int>(history.size()))
      throw std::runtime_error("history iterations are not consecutive at line " +
                               std::to_string(lineno));
    history.push_back(std::move(rec));
  }
  return history;
}

void write_trajectory_csv(const std::vector<TrialRecord>& history,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trajectory for writing: " + path.string());
  out << "iter,v_d\n";
  for (const TrialRecord& rec : history)
    out << rec.iter << ',' << format_v(rec.v_d.v) << '\n';
  if (!out) throw std::runtime_error("failed writing trajectory: " + path.string());
}

}  // namespace ieqa
