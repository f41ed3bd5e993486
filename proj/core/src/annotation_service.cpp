#include "expltk/annotation_service.hpp"

#include <httplib.h>

#include <fstream>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"
#include "expltk/text.hpp"

namespace expltk {

AnnotationService::AnnotationService(std::vector<AnnotationTask> tasks, ServiceOptions options)
    : tasks_(std::move(tasks)), options_(std::move(options)) {
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!task_index_.emplace(tasks_[i].task_id, i).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate task id " + tasks_[i].task_id);
    }
  }
  if (!options_.label_log || !std::filesystem::exists(*options_.label_log)) return;
  std::ifstream in(*options_.label_log);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      auto record = record_from_json(json::parse(line));
      validate_record(record);
      auto key = std::make_pair(record.task_id, record.annotator_id);
      labels_[std::move(key)] = std::move(record);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::parse, options_.label_log->string() + " line " +
                                        std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<AnnotationTask> AnnotationService::next_task(
    const std::string& annotator, const std::optional<std::string>& country) const {
  std::lock_guard lock(mutex_);
  for (const auto& task : tasks_) {
    if (country && task.country != country) continue;
    if (labels_.contains({task.task_id, annotator})) continue;
    std::size_t count = 0;
    for (auto it = labels_.lower_bound({task.task_id, std::string()});
         it != labels_.end() && it->first.first == task.task_id; ++it) {
      ++count;
    }
    if (count >= options_.annotators_per_task) continue;
    return task;
  }
  return std::nullopt;
}

void AnnotationService::submit(const AnnotationRecord& record) {
  validate_record(record);
  std::lock_guard lock(mutex_);
  if (!task_index_.contains(record.task_id)) {
    throw Error(ErrorKind::not_found, "unknown task " + record.task_id);
  }
  if (options_.label_log) {
    std::ofstream out(*options_.label_log, std::ios::app);
    out << jsonl_line(to_json(record));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "cannot append to " + options_.label_log->string());
  }
  labels_[{record.task_id, record.annotator_id}] = record;
}

std::vector<AnnotationRecord> AnnotationService::records() const {
  std::lock_guard lock(mutex_);
  std::vector<AnnotationRecord> out;
  out.reserve(labels_.size());
  for (const auto& [key, record] : labels_) out.push_back(record);
  return out;
}

AnnotationService::Progress AnnotationService::progress() const {
  std::lock_guard lock(mutex_);
  Progress p;
  p.tasks = tasks_.size();
  p.labels = labels_.size();
  std::map<std::string, std::size_t> per_task;
  for (const auto& [key, record] : labels_) {
    ++per_task[key.first];
    ++p.per_annotator[key.second];
  }
  for (const auto& [task, n] : per_task) {
    if (n >= options_.annotators_per_task) ++p.complete_tasks;
  }
  return p;
}

namespace {

ApiResponse json_response(int status, const json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

std::optional<std::string> query_value(const std::map<std::string, std::string>& query,
                                       const char* key) {
  const auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

}  // namespace

ApiResponse handle_api_request(AnnotationService& service, const std::string& method,
                               const std::string& path,
                               const std::map<std::string, std::string>& query,
                               const std::string& body) {
  try {
    if (path == "/api/tasks/next") {
      if (method != "GET") return error_response(405, "use GET");
      const auto annotator = query_value(query, "annotator");
      if (!annotator) return error_response(400, "missing annotator parameter");
      const auto task = service.next_task(*annotator, query_value(query, "country"));
      if (!task) return {204, "", "application/json"};
      return json_response(200, to_json(*task));
    }
    if (path == "/api/labels") {
      if (method != "POST") return error_response(405, "use POST");
      json j;
      try {
        j = json::parse(body);
      } catch (const json::parse_error& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
      }
      const AnnotationRecord record = record_from_json(j);
      service.submit(record);
      const auto next = service.next_task(record.annotator_id);
      return json_response(200, {{"status", "ok"},
                                 {"next_task", next ? to_json(*next) : json(nullptr)}});
    }
    if (path == "/api/progress") {
      if (method != "GET") return error_response(405, "use GET");
      const auto p = service.progress();
      return json_response(200, {{"tasks", p.tasks},
                                 {"labels", p.labels},
                                 {"complete_tasks", p.complete_tasks},
                                 {"per_annotator", p.per_annotator}});
    }
    return error_response(404, "no route for " + path);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::schema:
      case ErrorKind::invalid_argument:
      case ErrorKind::parse: return error_response(400, e.what());
      case ErrorKind::not_found: return error_response(404, e.what());
      default: return error_response(500, e.what());
    }
  }
}

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {}
};

AnnotationServer::AnnotationServer(AnnotationService& service,
                                   std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [key, value] : req.params) query.emplace(key, value);
    const ApiResponse r = handle_api_request(impl_->service, req.method, req.path, query, req.body);
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, r.content_type);
  };
  for (const char* path : {"/api/tasks/next", "/api/labels", "/api/progress"}) {
    impl_->server.Get(path, route);
    impl_->server.Post(path, route);
  }
  if (static_dir) {
    if (!impl_->server.set_mount_point("/", static_dir->string())) {
      throw Error(ErrorKind::io, "static directory not found: " + static_dir->string());
    }
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace expltk
