#pragma once

// Task queue and label store behind the annotation REST surface:
//   GET  /api/tasks/next?annotator=ID[&country=CC]
//   POST /api/labels
//   GET  /api/progress

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expltk/annotation.hpp"

namespace expltk {

struct ServiceOptions {
  std::size_t annotators_per_task = 3;
  // Append-only JSONL label log; existing content is replayed on startup.
  std::optional<std::filesystem::path> label_log;
};

class AnnotationService {
 public:
  AnnotationService(std::vector<AnnotationTask> tasks, ServiceOptions options);

  // First task this annotator has not labeled that still needs labels.
  std::optional<AnnotationTask> next_task(
      const std::string& annotator,
      const std::optional<std::string>& country = std::nullopt) const;

  // Validates and stores; a later label for the same (task, annotator)
  // replaces the earlier one. Throws Error(schema) / Error(not_found).
  void submit(const AnnotationRecord& record);

  std::vector<AnnotationRecord> records() const;

  struct Progress {
    std::size_t tasks = 0;
    std::size_t labels = 0;
    std::size_t complete_tasks = 0;
    std::map<std::string, std::size_t> per_annotator;
  };
  Progress progress() const;

 private:
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  ServiceOptions options_;
  mutable std::mutex mutex_;
  // (task_id, annotator) -> record, last write wins
  std::map<std::pair<std::string, std::string>, AnnotationRecord> labels_;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-free request routing, shared by the HTTP server and tests.
ApiResponse handle_api_request(AnnotationService& service,
                               const std::string& method,
                               const std::string& path,
                               const std::map<std::string, std::string>& query,
                               const std::string& body);

class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service,
                            std::optional<std::filesystem::path> static_dir =
                                std::nullopt);
  ~AnnotationServer();

  // Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace expltk
